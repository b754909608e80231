//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails the
//! target if any criterion fails.

#![allow(clippy::type_complexity)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use specbench::fingerprints::{self, BitFingerprint, FingerprintConfig, FingerprintKind};
use specbench::geometry::{self, GeometryParams};
use specbench::molgraph::{
    canonical_smiles, parse_sdf, parse_smiles, write_sdf, Atom, Bond, BondOrder, Element, MoleculeGraph, Position,
};
use specbench::nmr_metrics::{score_carbon, score_proton, MatchScore, NmrConfig};
use specbench::seq_metrics::{evaluate, tokenize, Canonicalizer, TokenScheme};
use specbench::spectra::{parse_spectrum, serialize, CarbonSpectrum, ProtonPeak, ProtonSpectrum, Spectrum};
use specbench::taskgen::{self, Format, MoleculeRecord, Task, TemplateSet};
use specbench::vec_metrics::{cosine, vectorize_spectrum, BinningConfig};
use specbench_oracles::{
    exhaustive_match, isomorphic, random, raw_feature_sets, sequences, set_tanimoto, Criterion, FeatureKind,
    FIXTURE_SMILES,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("demo")
}

fn identity_ok(s: &MatchScore, proton: bool) -> bool {
    let exact = s.precision == 1.0 && s.recall == 1.0 && s.f1 == 1.0;
    let mae = s.mae.is_some_and(|m| m.abs() <= 1e-12);
    let jac = !proton || s.jaccard.is_some_and(|j| (j - 1.0).abs() <= 1e-12);
    exact && mae && jac
}

fn c1_identity() -> Outcome {
    let start = Instant::now();
    let cfg = NmrConfig::default();
    let mut r = rng(1);
    for k in 0..500 {
        let c = random::carbon(&mut r);
        let s = score_carbon(&c, &c, &cfg);
        ensure!(identity_ok(&s, false), "13C spectrum {k} scored {s:?} against itself");
        let h = random::proton(&mut r);
        let s = score_proton(&h, &h, &cfg);
        ensure!(identity_ok(&s, true), "1H spectrum {k} scored {s:?} against itself");
        for spec in random::one_of_each(&mut r).into_iter().skip(2) {
            let grid = match &spec {
                Spectrum::Mass(_) => BinningConfig::ms_default(),
                Spectrum::Waveform(w) => {
                    let (lo, hi) = w.axis_range();
                    BinningConfig::new(lo, hi + 1.0, w.modality().default_grid_step()).unwrap()
                }
                _ => unreachable!(),
            };
            let v = vectorize_spectrum(&spec, &grid).map_err(|e| e.to_string())?;
            if v.values().iter().any(|x| *x != 0.0) {
                let c = cosine(v.values(), v.values());
                ensure!((c - 1.0).abs() <= 1e-12, "{} self-cosine {c}", spec.modality());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("500 spectra per type, {:.2} s", elapsed.as_secs_f64()))
}

fn c2_proton_case() -> Outcome {
    let cfg = NmrConfig::new(0.5, 0.12, 0.06).unwrap();
    let pred = ProtonSpectrum::new(vec![ProtonPeak::simple(1.00, 3).unwrap()], None, None).unwrap();
    let truth = ProtonSpectrum::new(vec![ProtonPeak::simple(1.05, 3).unwrap()], None, None).unwrap();
    let s = score_proton(&pred, &truth, &cfg);
    let j = s.jaccard.ok_or("no jaccard")?;
    let mae = s.mae.ok_or("no mae")?;
    ensure!((j - 0.5464).abs() <= 1e-3, "jaccard {j}");
    ensure!((mae - 0.05).abs() <= 1e-12, "mae {mae}");
    Ok(format!("jaccard {j:.4}, mae {mae}"))
}

fn c3_matcher_oracle() -> Outcome {
    let cfg = NmrConfig::default();
    let mut r = rng(3);
    let mut strictly_better = 0;
    for k in 0..1000 {
        let np = r.gen_range(0..=10);
        let nt = r.gen_range(0..=10);
        let (score, m) = if k % 2 == 0 {
            let gen =
                |r: &mut ChaCha8Rng, n| (0..n).map(|_| (r.gen_range(100..=140) as f64) / 10.0).collect::<Vec<_>>();
            let p = CarbonSpectrum::new(gen(&mut r, np), None, None).unwrap();
            let t = CarbonSpectrum::new(gen(&mut r, nt), None, None).unwrap();
            let m =
                exhaustive_match(p.shifts(), t.shifts(), cfg.tau_c, Criterion::Nearest).map_err(|e| e.to_string())?;
            (score_carbon(&p, &t, &cfg), m.value)
        } else {
            let gen = |r: &mut ChaCha8Rng, n: usize| {
                let peaks = (0..n.max(1))
                    .map(|_| ProtonPeak::simple(r.gen_range(100..=160) as f64 / 100.0, r.gen_range(1..=4)).unwrap())
                    .collect();
                ProtonSpectrum::new(peaks, None, None).unwrap()
            };
            let p = gen(&mut r, np);
            let t = gen(&mut r, nt);
            let pc: Vec<f64> = p.peaks().iter().map(|x| x.centroid()).collect();
            let tc: Vec<f64> = t.peaks().iter().map(|x| x.centroid()).collect();
            let sigma = cfg.sigma;
            let weight = |j: usize, i: usize, d: f64| {
                let n = p.peaks()[j].n_h().min(t.peaks()[i].n_h()) as f64;
                n * (-(d * d) / (2.0 * sigma * sigma)).exp()
            };
            let m = exhaustive_match(&pc, &tc, cfg.tau_h, Criterion::MaxWeight(&weight)).map_err(|e| e.to_string())?;
            (score_proton(&p, &t, &cfg), m.value)
        };
        ensure!(
            score.pairs.len() == m.greedy.len(),
            "instance {k}: {} pairs vs oracle {}",
            score.pairs.len(),
            m.greedy.len()
        );
        for (a, b) in score.pairs.iter().zip(&m.greedy) {
            ensure!(
                (a.pred_index, a.true_index, a.deviation) == (b.pred_index, b.true_index, b.deviation),
                "instance {k}: pair {a:?} vs oracle {b:?}"
            );
            if let Some(w) = a.weight {
                ensure!((w - b.weight).abs() <= 1e-12, "instance {k}: weight {w} vs oracle {}", b.weight);
            }
        }
        ensure!(m.optimal_weight >= m.greedy_weight - 1e-12, "instance {k}: optimal below greedy");
        if m.optimal_weight > m.greedy_weight + 1e-12 {
            strictly_better += 1;
        }
    }
    Ok(format!("1000 instances agree; optimal strictly better on {strictly_better}"))
}

/// Equal JSON trees, numbers compared within `tol`.
fn json_close(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= tol,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| json_close(p, q, tol)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| json_close(v, w, tol)))
        }
        _ => a == b,
    }
}

fn c4_round_trip() -> Outcome {
    let mut r = rng(4);
    for k in 0..1000 {
        for spec in random::one_of_each(&mut r) {
            let text = serialize(&spec);
            let (back, modality) = parse_spectrum(&text).map_err(|e| format!("{text}: {e}"))?;
            ensure!(modality == spec.modality(), "modality changed for {text}");
            let (a, b) = (serde_json::to_value(&spec).unwrap(), serde_json::to_value(&back).unwrap());
            ensure!(json_close(&a, &b, 1e-9), "spectrum {k} changed: {text}");
            ensure!(serialize(&back) == text, "text not a fixed point: {text}");
        }
    }
    for k in 0..200 {
        let n = r.gen_range(1..=30);
        let g = random::graph(&mut r, n, true);
        let text = write_sdf(&g).map_err(|e| e.to_string())?;
        let back = parse_sdf(&text).map_err(|e| format!("graph {k}: {e}"))?;
        ensure!(back == g, "graph {k} changed:\n{text}");
    }
    Ok("6000 spectra, 200 graphs".into())
}

fn fixtures() -> Vec<(&'static str, MoleculeGraph)> {
    FIXTURE_SMILES.iter().map(|(name, s)| (*name, parse_smiles(s).expect("fixture parses"))).collect()
}

fn c5_canonical() -> Outcome {
    let mut r = rng(5);
    let mut all = BTreeSet::new();
    for (name, g) in fixtures() {
        let mut seen = BTreeSet::new();
        for _ in 0..500 {
            let p = random::permutation(&mut r, g.atom_count());
            seen.insert(canonical_smiles(&g.permuted(&p)).map_err(|e| e.to_string())?);
        }
        ensure!(seen.len() == 1, "{name}: {} canonical forms {seen:?}", seen.len());
        let s = seen.into_iter().next().unwrap();
        let back = parse_smiles(&s).map_err(|e| format!("{name}: canonical '{s}' does not parse: {e}"))?;
        ensure!(isomorphic(&back, &g), "{name}: canonical '{s}' is a different molecule");
        all.insert(s);
    }
    ensure!(all.len() == FIXTURE_SMILES.len(), "two fixtures share a canonical form");
    Ok("20 fixtures x 500 permutations".into())
}

fn oracle_kind(kind: FingerprintKind) -> FeatureKind {
    match kind {
        FingerprintKind::Path => FeatureKind::Path,
        FingerprintKind::Torsion => FeatureKind::Torsion,
        FingerprintKind::AtomPair => FeatureKind::AtomPair,
    }
}

fn c6_fingerprints() -> Outcome {
    let cfg = FingerprintConfig::default();
    let mols = fixtures();
    let (mut comparisons, mut cross_collisions) = (0, 0);
    for kind in FingerprintKind::ALL {
        let mut sets = Vec::new();
        let mut fps: Vec<BitFingerprint> = Vec::new();
        for (name, g) in &mols {
            let set = raw_feature_sets(g, oracle_kind(kind), cfg.l_max, cfg.include_hydrogens, cfg.charge_in_class)
                .map_err(|e| e.to_string())?
                .value;
            let raw = fingerprints::raw_features(g, kind, &cfg);
            ensure!(raw.len() == set.len(), "{name} {kind}: {} features vs oracle {}", raw.len(), set.len());
            let fp = fingerprints::fingerprint(g, kind, &cfg);
            ensure!(fp.count_ones() == set.len(), "{name} {kind}: {} features on {} bits", set.len(), fp.count_ones());
            sets.push(set);
            fps.push(fp);
        }
        // Pairs whose combined features share a bit cannot match the set value.
        for a in 0..mols.len() {
            for b in 0..mols.len() {
                let union = sets[a].union(&sets[b]).count();
                let bits = fps[a].ones().chain(fps[b].ones()).collect::<BTreeSet<_>>().len();
                if bits != union {
                    cross_collisions += 1;
                    continue;
                }
                let t = fingerprints::tanimoto(&fps[a], &fps[b]).map_err(|e| e.to_string())?;
                let o = set_tanimoto(&sets[a], &sets[b]);
                ensure!((t - o).abs() <= 1e-12, "{} / {} {kind}: {t} vs oracle {o}", mols[a].0, mols[b].0);
                comparisons += 1;
            }
        }
    }
    let mut r = rng(6);
    for k in 0..200 {
        let n = r.gen_range(1..=16);
        let g = random::graph(&mut r, n, false);
        let p = random::permutation(&mut r, g.atom_count());
        let h = g.permuted(&p);
        for kind in FingerprintKind::ALL {
            ensure!(
                fingerprints::fingerprint(&g, kind, &cfg) == fingerprints::fingerprint(&h, kind, &cfg),
                "graph {k}: {kind} fingerprint changed under permutation"
            );
        }
    }
    for k in 0..10_000 {
        let bits = [64, 256, 2048][k % 3];
        let mut a = BitFingerprint::empty(FingerprintKind::Path, bits);
        let mut b = BitFingerprint::empty(FingerprintKind::Path, bits);
        let density = r.gen_range(0.0..0.5);
        for i in 0..bits {
            if r.gen_bool(density) {
                a.set(i);
            }
            if r.gen_bool(density) {
                b.set(i);
            }
        }
        let ab = fingerprints::tanimoto(&a, &b).unwrap();
        let ba = fingerprints::tanimoto(&b, &a).unwrap();
        ensure!((0.0..=1.0).contains(&ab), "pair {k}: tanimoto {ab}");
        ensure!(ab == ba, "pair {k}: asymmetric {ab} vs {ba}");
        if !a.is_empty() && a.count_ones() > 0 {
            ensure!(fingerprints::tanimoto(&a, &a).unwrap() == 1.0, "pair {k}: self-similarity below 1");
        }
    }
    Ok(format!(
        "no collisions within any fixture; {comparisons} fixture pairs equal the oracle, \
         {cross_collisions} pairs with a shared bit left out; 200 permuted graphs; 10000 bit-vector pairs"
    ))
}

fn ethane(cc: f64, with_h: bool) -> MoleculeGraph {
    let ch = 1.09;
    let mut atoms =
        vec![Atom::new(Element::C).with_position([0.0; 3]), Atom::new(Element::C).with_position([cc, 0.0, 0.0])];
    let mut bonds = vec![Bond::new(0, 1, BondOrder::Single)];
    if with_h {
        let s = 2.0 * 2f64.sqrt() / 3.0;
        for k in 0..3 {
            let phi = (k as f64) * 2.0 * std::f64::consts::PI / 3.0;
            let psi = phi + std::f64::consts::PI / 3.0;
            atoms.push(Atom::new(Element::H).with_position([-ch / 3.0, ch * s * phi.cos(), ch * s * phi.sin()]));
            bonds.push(Bond::new(0, atoms.len() - 1, BondOrder::Single));
            atoms.push(Atom::new(Element::H).with_position([cc + ch / 3.0, ch * s * psi.cos(), ch * s * psi.sin()]));
            bonds.push(Bond::new(1, atoms.len() - 1, BondOrder::Single));
        }
    }
    MoleculeGraph::new(atoms, bonds, None).unwrap()
}

fn rotation(r: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    // unit quaternion to rotation matrix
    let mut q: [f64; 4] =
        [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= n);
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn c7_geometry() -> Outcome {
    let params = GeometryParams::default();
    let perfect = geometry::analyze(&ethane(1.54, true), &params);
    ensure!(perfect.measured(), "perfect ethane not measured: {:?}", perfect.error);
    ensure!(perfect.clash_count == 0 && perfect.violation_count == 0, "perfect ethane: {perfect:?}");
    let stretched = geometry::analyze(&ethane(1.90, false), &params);
    ensure!(stretched.violation_count == 1 && stretched.clash_count == 0, "stretched bond: {stretched:?}");
    let pair = MoleculeGraph::new(
        vec![Atom::new(Element::C).with_position([0.0; 3]), Atom::new(Element::C).with_position([2.0, 0.0, 0.0])],
        vec![],
        None,
    )
    .unwrap();
    let close = geometry::analyze(&pair, &params);
    ensure!(close.clash_count == 1 && close.violation_count == 0, "close contact: {close:?}");

    let mut r = rng(7);
    let mut cases = vec![ethane(1.54, true), ethane(1.90, true), pair];
    for _ in 0..100 {
        let n = r.gen_range(2..=12);
        cases.push(random::graph(&mut r, n, true).map_positions(|p| p.map(|c| c / 6.0)));
    }
    for (k, g) in cases.iter().enumerate() {
        let m = rotation(&mut r);
        let t: Position = [r.gen_range(-50.0..50.0), r.gen_range(-50.0..50.0), r.gen_range(-50.0..50.0)];
        let moved = g.map_positions(|p| {
            let mut out = t;
            for (i, row) in m.iter().enumerate() {
                out[i] += row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
            }
            out
        });
        let (a, b) = (geometry::analyze(g, &params), geometry::analyze(&moved, &params));
        ensure!(a.clash_count == b.clash_count, "case {k}: clashes {} vs {}", a.clash_count, b.clash_count);
        ensure!(a.violation_count == b.violation_count, "case {k}: violations differ");
        ensure!(a.error == b.error, "case {k}: measurability differs");
        for (x, y) in a.clashes.iter().zip(&b.clashes) {
            ensure!((x.i, x.j) == (y.i, y.j) && (x.distance - y.distance).abs() <= 1e-9, "case {k}: clash moved");
        }
        for (x, y) in a.violations.iter().zip(&b.violations) {
            ensure!((x.i, x.j) == (y.i, y.j) && (x.distance - y.distance).abs() <= 1e-9, "case {k}: bond moved");
        }
    }
    Ok(format!("3 fixtures, {} rigid motions", cases.len()))
}

const SEQ_PIECES: [&str; 16] =
    ["C", "c", "O", "N", "Cl", "Br", "(", ")", "=", "1", "2", "[NH4+]", "[O-]", "%12", "#", "é"];
const SMILES_POOL: [&str; 12] = [
    "CCO",
    "OCC",
    "C(C)O",
    "CC(=O)O",
    "OC(C)=O",
    "c1ccccc1",
    "Cc1ccccc1",
    "c1ccccc1C",
    "CCN",
    "NCC",
    "C1CC1",
    "not smiles",
];

fn c8_sequences() -> Outcome {
    let mut r = rng(8);
    for k in 0..1000 {
        let n = r.gen_range(1..=20);
        let scheme = if k % 2 == 0 { TokenScheme::Character } else { TokenScheme::SmilesAtoms };
        let canon = if k % 4 < 2 { Canonicalizer::Trim } else { Canonicalizer::Smiles };
        let pairs: Vec<(String, String)> = (0..n)
            .map(|_| {
                if canon == Canonicalizer::Smiles {
                    let t = SMILES_POOL[r.gen_range(0..SMILES_POOL.len() - 1)];
                    (t.to_string(), SMILES_POOL[r.gen_range(0..SMILES_POOL.len())].to_string())
                } else {
                    let word = |r: &mut ChaCha8Rng, len: usize| {
                        (0..len).map(|_| SEQ_PIECES[r.gen_range(0..16)]).collect::<String>()
                    };
                    let len = r.gen_range(1..=12);
                    let t = word(&mut r, len);
                    let len = r.gen_range(0..=12);
                    let p = if r.gen_bool(0.3) { t.clone() } else { word(&mut r, len) };
                    (t, if r.gen_bool(0.1) { format!(" {p} ") } else { p })
                }
            })
            .collect();
        let report = evaluate(&pairs, scheme, canon).map_err(|e| e.to_string())?;
        let toks = |s: &str| match scheme {
            TokenScheme::Character => sequences::char_tokens(s),
            TokenScheme::SmilesAtoms => sequences::smiles_atom_tokens(s).unwrap_or_else(|| sequences::char_tokens(s)),
        };
        let accs: Vec<f64> =
            pairs.iter().map(|(t, p)| sequences::token_accuracy(&toks(t), &toks(p)).unwrap()).collect();
        let naive_tok = accs.iter().sum::<f64>() / accs.len() as f64;
        let same = |t: &str, p: &str| match canon {
            Canonicalizer::Trim => t.trim() == p.trim(),
            Canonicalizer::Smiles => match (parse_smiles(t.trim()), parse_smiles(p.trim())) {
                (Ok(a), Ok(b)) => isomorphic(&a, &b),
                _ => false,
            },
        };
        let naive_seq = sequences::sequence_accuracy(&pairs, &same).unwrap();
        ensure!(
            (report.token_acc - naive_tok).abs() <= 1e-12,
            "corpus {k}: token acc {} vs {naive_tok}",
            report.token_acc
        );
        ensure!(report.seq_acc == naive_seq, "corpus {k}: seq acc {} vs {naive_seq}", report.seq_acc);
        for (t, _) in &pairs {
            ensure!(
                tokenize(t, scheme).is_ok_and(|s| s.tokens().concat() == *t),
                "tokens of '{t}' do not concatenate back"
            );
        }
    }
    let cco = evaluate(&[("CCO", "OCC")], TokenScheme::Character, Canonicalizer::Smiles).map_err(|e| e.to_string())?;
    ensure!(cco.seq_acc == 1.0, "CCO/OCC not a match");
    Ok("1000 corpora; CCO/OCC match".into())
}

fn c9_cosine() -> Outcome {
    let mut r = rng(9);
    for k in 0..10_000 {
        let n = r.gen_range(1..=64);
        let sparse = r.gen_bool(0.5);
        let mut v = || {
            (0..n).map(|_| if sparse && r.gen_bool(0.7) { 0.0 } else { r.gen_range(0.0..100.0) }).collect::<Vec<f64>>()
        };
        let (p, q) = (v(), v());
        let c = cosine(&p, &q);
        ensure!((0.0..=1.0).contains(&c), "pair {k}: cosine {c}");
        ensure!(c == cosine(&q, &p), "pair {k}: asymmetric");
        let scale = r.gen_range(1e-3..1e3);
        let scaled: Vec<f64> = p.iter().map(|x| x * scale).collect();
        ensure!((cosine(&scaled, &q) - c).abs() <= 1e-12, "pair {k}: not scale invariant");
    }
    let c = cosine(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]);
    #[allow(clippy::approx_constant)]
    let expected = 0.70711;
    ensure!((c - expected).abs() <= 1e-5, "[1,1,0]/[1,0,0] gave {c}");
    Ok(format!("10000 pairs; [1,1,0]/[1,0,0] = {c:.5}"))
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["specbench"];
    full.extend_from_slice(args);
    let code = specbench_cli::run(full, Vec::new(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn c10_end_to_end() -> Outcome {
    let d = demo();
    let p = |rel: &str| d.join(rel).to_string_lossy().into_owned();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("serialize", vec!["--in".into(), p("spectra.jsonl")]),
        ("parse", vec!["--in".into(), p("truth/nmr1h.jsonl")]),
        ("score-nmr13c", vec!["--pred".into(), p("pred/nmr13c.jsonl"), "--truth".into(), p("truth/nmr13c.jsonl")]),
        ("score-nmr1h", vec!["--pred".into(), p("pred/nmr1h.jsonl"), "--truth".into(), p("truth/nmr1h.jsonl")]),
        ("score-ir", vec!["--pred".into(), p("pred/ir.jsonl"), "--truth".into(), p("truth/ir.jsonl")]),
        ("score-ms", vec!["--pred".into(), p("pred/ms.jsonl"), "--truth".into(), p("truth/ms.jsonl")]),
        ("score-seq", vec!["--pred".into(), p("pred/seq.jsonl"), "--truth".into(), p("truth/seq.jsonl")]),
        ("geom", vec!["--in".into(), p("structures")]),
        ("fpsim", vec!["--pred".into(), p("pred/fpsim.jsonl"), "--truth".into(), p("truth/fpsim.jsonl")]),
        ("taskgen", vec!["--in".into(), p("molecules.jsonl"), "--split".into()]),
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut slowest = Duration::ZERO;
    let mut outputs: BTreeMap<(usize, &str), (Vec<u8>, Vec<u8>)> = BTreeMap::new();
    for round in 0..2 {
        let jobs = if round == 0 { "1" } else { "4" };
        let start = Instant::now();
        for (cmd, extra) in &runs {
            let records = tmp.path().join(format!("{cmd}-{round}.jsonl"));
            let report = tmp.path().join(format!("{cmd}-{round}.json"));
            let mut args = vec![*cmd];
            args.extend(extra.iter().map(String::as_str));
            let (rs, os) = (records.to_string_lossy().into_owned(), report.to_string_lossy().into_owned());
            args.extend(["--records", &rs, "--out", &os, "--jobs", jobs, "--strict"]);
            let (code, _, err) = cli(&args);
            ensure!(code == 0, "{cmd} exited {code}: {err}");
            let text = std::fs::read(&report).map_err(|e| e.to_string())?;
            let v: Value = serde_json::from_slice(&text).map_err(|e| format!("{cmd}: {e}"))?;
            for key in ["command", "config", "aggregate", "warnings", "per_record"] {
                ensure!(v.get(key).is_some(), "{cmd}: report lacks '{key}'");
            }
            ensure!(v["command"] == *cmd, "{cmd}: report names {}", v["command"]);
            let rows = v["per_record"].as_array().unwrap();
            let expected = if *cmd == "taskgen" {
                360
            } else if *cmd == "serialize" {
                80
            } else {
                20
            };
            ensure!(rows.len() == expected, "{cmd}: {} rows", rows.len());
            ensure!(v["aggregate"]["errors"] == 0, "{cmd}: record errors {}", v["aggregate"]["errors"]);
            ensure!(!v["aggregate"]["summary"].is_null(), "{cmd}: empty summary");
            outputs.insert((round, cmd), (std::fs::read(&records).map_err(|e| e.to_string())?, text));
        }
        slowest = slowest.max(start.elapsed());
    }
    let merged = tmp.path().join("merged.json");
    let (a, b) = (tmp.path().join("score-nmr13c-0.json"), tmp.path().join("score-nmr13c-1.json"));
    let (code, _, err) =
        cli(&["report", "--merge", &a.to_string_lossy(), &b.to_string_lossy(), "--out", &merged.to_string_lossy()]);
    ensure!(code == 0, "report --merge exited {code}: {err}");
    let v: Value =
        serde_json::from_slice(&std::fs::read(&merged).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(v["per_record"].as_array().map_or(0, Vec::len) == 40, "merged report row count");
    let (code, man, _) = cli(&["manual"]);
    ensure!(code == 0 && man.contains("score-nmr1h"), "manual failed");
    for (cmd, _) in &runs {
        let (x, y) = (&outputs[&(0, *cmd)], &outputs[&(1, *cmd)]);
        ensure!(x.0 == y.0, "{cmd}: per-record output differs between runs");
        ensure!(x.1 == y.1, "{cmd}: report differs between runs");
    }
    ensure!(slowest < Duration::from_secs(10), "a full pass took {slowest:?}");
    Ok(format!("{} subcommands + report + manual, slowest pass {:.2} s", runs.len(), slowest.as_secs_f64()))
}

fn c11_taskgen() -> Outcome {
    let text = std::fs::read_to_string(demo().join("molecules.jsonl")).map_err(|e| e.to_string())?;
    let records: Vec<MoleculeRecord> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    let templates = TemplateSet::default();
    let fractions = [0.8, 0.1, 0.1];
    let mut checked = 0;
    for seed in 0..50u64 {
        let split = taskgen::split(&ids, fractions, seed).map_err(|e| e.to_string())?;
        let parts = [&split.train, &split.val, &split.test];
        let sets: Vec<BTreeSet<&String>> = parts.iter().map(|p| p.iter().collect()).collect();
        ensure!(
            sets[0].is_disjoint(&sets[1]) && sets[0].is_disjoint(&sets[2]) && sets[1].is_disjoint(&sets[2]),
            "seed {seed}: splits overlap"
        );
        ensure!(
            sets.iter().map(BTreeSet::len).sum::<usize>() == ids.len(),
            "seed {seed}: splits do not cover the corpus"
        );
        let pools = templates.partition(fractions, seed).map_err(|e| e.to_string())?;
        let train: Vec<MoleculeRecord> = records.iter().filter(|r| sets[0].contains(&r.id)).cloned().collect();
        for (k, part) in sets.iter().enumerate() {
            let members: Vec<MoleculeRecord> = records.iter().filter(|r| part.contains(&r.id)).cloned().collect();
            let extra: &[MoleculeRecord] = if k == 0 { &[] } else { &train };
            for &task in Task::ALL {
                for &format in Format::ALL {
                    let out = taskgen::generate_with_distractors(&members, extra, task, format, &pools[k], seed)
                        .map_err(|e| format!("seed {seed} split {k} {task}/{format}: {e}"))?;
                    ensure!(
                        out.len() == members.len(),
                        "seed {seed} {task}/{format}: {} of {} records",
                        out.len(),
                        members.len()
                    );
                    for inst in &out {
                        ensure!(part.contains(&inst.source_id), "seed {seed}: {} leaked across splits", inst.source_id);
                        taskgen::self_check(inst)
                            .map_err(|e| format!("seed {seed} {task}/{format} {}: {e}", inst.source_id))?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} instructions self-checked over 50 seeds"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("identity suite", c1_identity),
        ("hand-derived 1H case", c2_proton_case),
        ("matcher vs oracle", c3_matcher_oracle),
        ("round trips", c4_round_trip),
        ("canonicalization", c5_canonical),
        ("fingerprints", c6_fingerprints),
        ("geometry fixtures", c7_geometry),
        ("sequence metrics", c8_sequences),
        ("cosine metrics", c9_cosine),
        ("end to end", c10_end_to_end),
        ("taskgen", c11_taskgen),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(note) => println!("PASS {:>2} {name}: {note}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
