"""Regenerates the demo corpus in this directory.

Needs RDKit (3D embedding and force-field cleanup only). Spectra are synthetic:
rule-of-thumb shifts, bands and fragments, not measurements. Predictions are
seeded perturbations of the references.

    python make_demo.py

spectra.jsonl is the structured form of the reference spectra. It is written from
`specbench parse` output when a specbench binary is given in $SPECBENCH or found
on PATH, and left untouched otherwise.
"""

import json
import os
import random
import shutil
import subprocess
from pathlib import Path

from rdkit import Chem
from rdkit.Chem import AllChem, Descriptors

HERE = Path(__file__).resolve().parent

MOLECULES = [
    ("ethanol", "CCO", "ethanol"),
    ("acetone", "CC(C)=O", "propan-2-one"),
    ("benzene", "c1ccccc1", "benzene"),
    ("toluene", "Cc1ccccc1", "methylbenzene"),
    ("phenol", "Oc1ccccc1", "phenol"),
    ("acetic_acid", "CC(=O)O", "acetic acid"),
    ("ethyl_acetate", "CCOC(C)=O", "ethyl acetate"),
    ("aniline", "Nc1ccccc1", "aniline"),
    ("benzaldehyde", "O=Cc1ccccc1", "benzaldehyde"),
    ("acetophenone", "CC(=O)c1ccccc1", "1-phenylethan-1-one"),
    ("benzoic_acid", "OC(=O)c1ccccc1", "benzoic acid"),
    ("pyridine", "c1ccncc1", "pyridine"),
    ("cyclohexanone", "O=C1CCCCC1", "cyclohexanone"),
    ("butanol", "CCCCO", "butan-1-ol"),
    ("acetonitrile", "CC#N", "acetonitrile"),
    ("methyl_benzoate", "COC(=O)c1ccccc1", "methyl benzoate"),
    ("dmf", "CN(C)C=O", "N,N-dimethylformamide"),
    ("propanoic_acid", "CCC(=O)O", "propanoic acid"),
    ("anisole", "COc1ccccc1", "methoxybenzene"),
    ("tert_butanol", "CC(C)(C)O", "2-methylpropan-2-ol"),
]


def heavy_neighbors(atom):
    return [n for n in atom.GetNeighbors() if n.GetAtomicNum() > 1]


def is_carbonyl_c(atom):
    return atom.GetSymbol() == "C" and any(
        b.GetBondTypeAsDouble() == 2 and b.GetOtherAtom(atom).GetSymbol() == "O" for b in atom.GetBonds()
    )


def carbon_shift(atom):
    nbrs = heavy_neighbors(atom)
    syms = [n.GetSymbol() for n in nbrs]
    if atom.GetIsAromatic():
        if "O" in syms:
            return 157.0
        if "N" in syms and not atom.IsInRing() or any(n.GetSymbol() == "N" and not n.GetIsAromatic() for n in nbrs):
            return 146.5
        if any(n.GetSymbol() == "N" and n.GetIsAromatic() for n in nbrs):
            return 149.8
        if any(is_carbonyl_c(n) for n in nbrs):
            return 133.5
        if any(not n.GetIsAromatic() for n in nbrs):
            return 137.9
        return 128.4
    if any(b.GetBondTypeAsDouble() == 3 for b in atom.GetBonds()):
        return 117.7
    if is_carbonyl_c(atom):
        single_o = sum(1 for n in nbrs if n.GetSymbol() == "O") - 1
        if "N" in syms:
            return 162.6
        if single_o > 0:
            return 177.8 if any(n.GetTotalNumHs() for n in nbrs if n.GetSymbol() == "O") else 170.9
        if atom.GetTotalNumHs():
            return 192.3
        return 206.8 if not any(n.GetIsAromatic() for n in nbrs) else 198.1
    base = {0: 8.0, 1: 15.2, 2: 24.9, 3: 30.1, 4: 34.6}[len(nbrs)]
    if "O" in syms:
        base += 44.0
    elif "N" in syms:
        base += 21.5
    if any(is_carbonyl_c(n) for n in nbrs):
        base += 13.0
    if any(n.GetIsAromatic() for n in nbrs):
        base += 6.2
    if any(b.GetBondTypeAsDouble() == 3 for n in nbrs for b in n.GetBonds()):
        base -= 13.5
    return base


def proton_shift(atom):
    sym = atom.GetSymbol()
    nbrs = heavy_neighbors(atom)
    if sym == "O":
        if any(is_carbonyl_c(n) for n in nbrs):
            return 11.6, "br s"
        if any(n.GetIsAromatic() for n in nbrs):
            return 5.35, "br s"
        return 2.05, "br s"
    if sym == "N":
        return 3.62, "br s"
    if atom.GetIsAromatic():
        if any(n.GetSymbol() == "N" for n in nbrs):
            return 8.6, "m"
        return 7.28, "m"
    if is_carbonyl_c(atom):
        return (9.98, "s") if not any(n.GetSymbol() == "N" for n in nbrs) else (8.02, "s")
    h = atom.GetTotalNumHs()
    base = {3: 0.92, 2: 1.31, 1: 1.55}.get(h, 1.3)
    syms = [n.GetSymbol() for n in nbrs]
    if "O" in syms:
        base += 2.45
    elif "N" in syms:
        base += 1.5
    elif any(is_carbonyl_c(n) for n in nbrs):
        base += 1.2
    elif any(n.GetIsAromatic() for n in nbrs):
        base += 1.42
    elif any(b.GetBondTypeAsDouble() == 3 for n in nbrs for b in n.GetBonds()):
        base += 1.1
    # n + 1 rule over hydrogens on neighbouring sp3 carbons.
    n = sum(x.GetTotalNumHs() for x in nbrs if x.GetSymbol() == "C" and not x.GetIsAromatic() and not is_carbonyl_c(x))
    mult = ["s", "d", "t", "q", "quint", "sext", "sept"][n] if n <= 6 else "m"
    return base, mult


def equivalence_classes(mol):
    ranks = list(Chem.CanonicalRankAtoms(mol, breakTies=False))
    classes = {}
    for atom in mol.GetAtoms():
        classes.setdefault(ranks[atom.GetIdx()], []).append(atom)
    return list(classes.values())


def carbon_text(mol):
    shifts = sorted({round(carbon_shift(g[0]), 1) for g in equivalence_classes(mol) if g[0].GetSymbol() == "C"}, reverse=True)
    return shifts


def proton_peaks(mol):
    peaks = []
    merged = {}
    for group in equivalence_classes(mol):
        a = group[0]
        if a.GetAtomicNum() == 1 or a.GetTotalNumHs() == 0:
            continue
        shift, mult = proton_shift(a)
        n = sum(x.GetTotalNumHs() for x in group)
        key = (round(shift, 2), mult)
        merged[key] = merged.get(key, 0) + n
    for (shift, mult), n in merged.items():
        j = [7.1] if mult in ("d", "t", "q", "quint", "sext", "sept") else []
        peaks.append((shift, mult, j, n))
    peaks.sort(key=lambda p: -p[0])
    return peaks


def fmt_proton(peaks, freq="400 MHz", solvent="CDCl3"):
    parts = []
    for shift, mult, j, n in peaks:
        inner = [mult]
        if j:
            inner.append("J = " + ", ".join(f"{x:.1f}" for x in j) + " Hz")
        inner.append(f"{n}H")
        parts.append(f"{shift:.2f} ({', '.join(inner)})")
    return f"<1H_NMR>({freq}, {solvent}) δ " + ", ".join(parts) + "</1H_NMR>"


def fmt_carbon(shifts, freq="100 MHz", solvent="CDCl3"):
    return f"<13C_NMR>({freq}, {solvent}) δ " + ", ".join(f"{s:.1f}" for s in shifts) + "</13C_NMR>"


def ir_bands(mol):
    patt = lambda s: mol.HasSubstructMatch(Chem.MolFromSmarts(s))
    bands = []
    if patt("[OX2H]"):
        bands.append((3340 if not patt("C(=O)[OH]") else 3010, 0.55))
    if patt("[NX3;H2,H1]"):
        bands += [(3430, 0.35), (3355, 0.32)]
    if patt("[CX4;!H0]"):
        bands += [(2960, 0.62), (2874, 0.41)]
    if patt("c[H]") or patt("[cH]"):
        bands.append((3062, 0.28))
    if patt("[CX3]=O"):
        bands.append((1715 if not patt("c[CX3]=O") else 1688, 1.0))
    if patt("C#N"):
        bands.append((2254, 0.52))
    if patt("c1ccccc1") or patt("n1ccccc1"):
        bands += [(1600, 0.45), (1496, 0.5), (752, 0.7), (694, 0.6)]
    if patt("[CX4][OX2]") or patt("c[OX2]"):
        bands.append((1100 if not patt("c[OX2]") else 1245, 0.78))
    if patt("C(=O)O"):
        bands.append((1280, 0.66))
    top = max(b for _, b in bands)
    return sorted({(p, round(b / top, 3)) for p, b in bands})


def fmt_ir(points):
    return "<IR>(500~4000)" + " ".join(f"{p}({i:.3f})" for p, i in points) + "</IR>"


def ms_peaks(mol):
    m = round(Descriptors.ExactMolWt(mol))
    patt = lambda s: mol.HasSubstructMatch(Chem.MolFromSmarts(s))
    peaks = {float(m): 45.0}
    if patt("[CH3]"):
        peaks[float(m - 15)] = 70.0
    if patt("[OX2H]"):
        peaks[float(m - 17)] = 35.0
        peaks[float(m - 18)] = 22.0
    if patt("[CX3]=O"):
        peaks[float(m - 28)] = 30.0
    if patt("c1ccccc1"):
        peaks[77.0] = 85.0
        peaks[51.0] = 24.0
    if patt("CC(=O)"):
        peaks[43.0] = 100.0
    if patt("[CH2][OH]"):
        peaks[31.0] = 100.0
    peaks = {k: v for k, v in peaks.items() if k > 0}
    top = max(peaks.values())
    return sorted((k, round(v * 100.0 / top, 1)) for k, v in peaks.items())


def fmt_ms(peaks):
    return "<ms_positive>" + " ".join(f"{k:.1f}:{v:.1f}" for k, v in peaks) + "</ms_positive>"


def molblock(smiles, seed):
    mol = Chem.AddHs(Chem.MolFromSmiles(smiles))
    AllChem.EmbedMolecule(mol, randomSeed=seed)
    AllChem.MMFFOptimizeMolecule(mol)
    Chem.Kekulize(mol, clearAromaticFlags=True)
    return Chem.MolToMolBlock(mol, kekulize=True)


def perturb_carbon(rng, shifts):
    out = [round(s + rng.gauss(0, 0.35), 1) for s in shifts]
    if rng.random() < 0.3 and len(out) > 1:
        out.pop(rng.randrange(len(out)))
    if rng.random() < 0.2:
        out.append(round(rng.uniform(10, 200), 1))
    return sorted(out, reverse=True)


def perturb_proton(rng, peaks):
    out = []
    for shift, mult, j, n in peaks:
        shift = round(min(19.9, max(-1.9, shift + rng.gauss(0, 0.05))), 2)
        if rng.random() < 0.15:
            n = max(1, n + rng.choice([-1, 1]))
        out.append((shift, mult, j, n))
    out.sort(key=lambda p: -p[0])
    return out


def perturb_ir(rng, points):
    moved = {}
    for p, i in points:
        q = min(3998, max(502, p + rng.choice((-2, 0, 0, 2))))
        moved[q] = round(min(1.0, max(0.005, i + rng.gauss(0, 0.08))), 3)
    return sorted(moved.items())


def perturb_ms(rng, peaks):
    out = [(k, max(0.5, v + rng.gauss(0, 6.0))) for k, v in peaks if v >= 100.0 or rng.random() > 0.15]
    top = max(v for _, v in out)
    return [(k, round(v * 100.0 / top, 1)) for k, v in out]


def main():
    rng = random.Random(20240611)
    records, truth, pred = [], {}, {}
    for key in ("nmr13c", "nmr1h", "ir", "ms", "seq", "fpsim"):
        truth[key], pred[key] = [], []
    (HERE / "structures").mkdir(exist_ok=True)
    smiles_pool = [s for _, s, _ in MOLECULES]
    for idx, (ident, smiles, name) in enumerate(MOLECULES):
        mol = Chem.MolFromSmiles(smiles)
        canon = Chem.MolToSmiles(mol, isomericSmiles=False)
        block = molblock(smiles, 1000 + idx)
        (HERE / "structures" / f"{idx + 1:02d}_{ident}.sdf").write_text(block + "$$$$\n")
        carbons = carbon_text(mol)
        protons = proton_peaks(mol)
        ir = ir_bands(mol)
        ms = ms_peaks(mol)
        spectra = [fmt_carbon(carbons), fmt_proton(protons), fmt_ir(ir), fmt_ms(ms)]
        records.append({"id": ident, "smiles": smiles, "iupac": name, "structure": block, "spectra": spectra})

        truth["nmr13c"].append({"id": ident, "spectrum": spectra[0]})
        truth["nmr1h"].append({"id": ident, "spectrum": spectra[1]})
        truth["ir"].append({"id": ident, "spectrum": spectra[2]})
        truth["ms"].append({"id": ident, "spectrum": spectra[3]})
        truth["seq"].append({"id": ident, "text": canon})
        truth["fpsim"].append({"id": ident, "smiles": canon})

        pred["nmr13c"].append({"id": ident, "spectrum": fmt_carbon(perturb_carbon(rng, carbons))})
        pred["nmr1h"].append({"id": ident, "spectrum": fmt_proton(perturb_proton(rng, protons))})
        pred["ir"].append({"id": ident, "spectrum": fmt_ir(perturb_ir(rng, ir))})
        pred["ms"].append({"id": ident, "spectrum": fmt_ms(perturb_ms(rng, ms))})
        roll = rng.random()
        if roll < 0.4:
            guess = canon
        elif roll < 0.7:
            guess = Chem.MolToSmiles(mol, doRandom=True, isomericSmiles=False)
        else:
            guess = Chem.MolToSmiles(Chem.MolFromSmiles(rng.choice(smiles_pool)), isomericSmiles=False)
        pred["seq"].append({"id": ident, "text": guess})
        pred["fpsim"].append({"id": ident, "smiles": guess})

    def dump(path, rows):
        path.parent.mkdir(exist_ok=True)
        path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows))

    dump(HERE / "molecules.jsonl", records)
    for key in truth:
        dump(HERE / "truth" / f"{key}.jsonl", truth[key])
        dump(HERE / "pred" / f"{key}.jsonl", pred[key])
    write_structured(dump)


def write_structured(dump):
    binary = os.environ.get("SPECBENCH") or shutil.which("specbench")
    if binary is None:
        print("specbench not found; spectra.jsonl not regenerated")
        return
    rows = []
    for key in ("nmr13c", "nmr1h", "ir", "ms"):
        out = subprocess.run(
            [binary, "parse", "--in", str(HERE / "truth" / f"{key}.jsonl"), "--strict"],
            check=True,
            capture_output=True,
            text=True,
        ).stdout
        for line in out.splitlines():
            row = json.loads(line)
            metrics = row["metrics"]
            rows.append({"id": f"{row['id']}-{metrics['modality']}", "spectrum": metrics["output"]})
    dump(HERE / "spectra.jsonl", rows)


if __name__ == "__main__":
    main()
