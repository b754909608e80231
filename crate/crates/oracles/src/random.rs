//! Seeded generators of valid spectra and molecular graphs.
//!
//! Every number is already rounded to the precision the text formats print, so a
//! serialize/parse round trip can be compared exactly.

use rand::seq::SliceRandom;
use rand::Rng;
use specbench::molgraph::{Atom, Bond, BondOrder, Element, MoleculeGraph};
use specbench::spectra::{
    CarbonSpectrum, IonMode, MassPeak, MassSpectrum, Multiplicity, ProtonPeak, ProtonSpectrum, Spectrum,
    WaveformModality, WaveformSpectrum,
};

const SOLVENTS: [&str; 5] = ["CDCl3", "DMSO-d6", "CD3OD", "D2O", "C6D6"];
const FREQUENCIES: [f64; 5] = [75.0, 100.0, 125.0, 400.0, 500.0];
const LABELS: [&str; 10] = ["s", "d", "t", "q", "m", "dd", "dt", "br s", "sept", "dddd"];

fn quantize(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

fn header<R: Rng>(rng: &mut R) -> (Option<f64>, Option<String>) {
    let f = rng.gen_bool(0.7).then(|| *FREQUENCIES.choose(rng).unwrap());
    let s = rng.gen_bool(0.7).then(|| SOLVENTS.choose(rng).unwrap().to_string());
    (f, s)
}

/// ¹³C list of 0 to 20 shifts at 0.1 ppm, duplicates possible.
pub fn carbon<R: Rng>(rng: &mut R) -> CarbonSpectrum {
    let n = rng.gen_range(0..=20);
    let shifts = (0..n).map(|_| quantize(rng.gen_range(-5.0..230.0), 1)).collect();
    let (f, s) = header(rng);
    CarbonSpectrum::new(shifts, f, s).expect("generated in range")
}

/// ¹H list of 1 to 12 peaks at 0.01 ppm with coupling constants at 0.1 Hz.
pub fn proton<R: Rng>(rng: &mut R) -> ProtonSpectrum {
    let n = rng.gen_range(1..=12);
    let peaks = (0..n)
        .map(|_| {
            let centroid = quantize(rng.gen_range(-0.5..13.0), 2);
            let mult = Multiplicity::parse(LABELS.choose(rng).unwrap()).unwrap();
            let nj = rng.gen_range(0..=3);
            let js = (0..nj).map(|_| quantize(rng.gen_range(0.5..18.0), 1)).collect();
            ProtonPeak::new(centroid, mult, js, rng.gen_range(1..=6)).expect("generated in range")
        })
        .collect();
    let (f, s) = header(rng);
    ProtonSpectrum::new(peaks, f, s).expect("generated in range")
}

/// Waveform peaks at integer positions with intensities at 0.001.
pub fn waveform<R: Rng>(rng: &mut R, modality: WaveformModality) -> WaveformSpectrum {
    let (lo, hi) = match modality {
        WaveformModality::Ir => (500, 4000),
        WaveformModality::Raman => (100, 3500),
        WaveformModality::Uv => (190, 800),
    };
    let n = rng.gen_range(0..=15);
    let mut positions: Vec<i32> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    positions.sort_unstable();
    positions.dedup();
    let points = positions.into_iter().map(|p| (p as f64, quantize(rng.gen_range(0.0..=1.0), 3))).collect();
    WaveformSpectrum::new(modality, (lo as f64, hi as f64), points).expect("generated in range")
}

/// Mass spectrum with m/z at 0.1, abundances at 0.1 and one base peak of 100.
pub fn mass<R: Rng>(rng: &mut R) -> MassSpectrum {
    let n = rng.gen_range(1..=15);
    let mut mzs: Vec<i64> = (0..n).map(|_| rng.gen_range(100..=6000)).collect();
    mzs.sort_unstable();
    mzs.dedup();
    let base = rng.gen_range(0..mzs.len());
    let peaks = mzs
        .iter()
        .enumerate()
        .map(|(k, &m)| MassPeak {
            mz: m as f64 / 10.0,
            abundance: if k == base { 100.0 } else { rng.gen_range(1..=999) as f64 / 10.0 },
        })
        .collect();
    let mode = if rng.gen_bool(0.5) { IonMode::Positive } else { IonMode::Negative };
    let ce = rng.gen_bool(0.5).then(|| rng.gen_range(5..=60) as f64);
    MassSpectrum::new(mode, ce, peaks).expect("generated in range")
}

/// One spectrum of every kind, in a fixed order.
pub fn one_of_each<R: Rng>(rng: &mut R) -> [Spectrum; 6] {
    [
        carbon(rng).into(),
        proton(rng).into(),
        waveform(rng, WaveformModality::Ir).into(),
        waveform(rng, WaveformModality::Raman).into(),
        waveform(rng, WaveformModality::Uv).into(),
        mass(rng).into(),
    ]
}

fn capacity(e: Element, charge: i8) -> u32 {
    match (e, charge) {
        (Element::N, 1) => 4,
        (Element::N, _) => 3,
        (Element::O, -1) => 1,
        (Element::O, _) => 2,
        (Element::S, _) => 2,
        (Element::F | Element::Cl | Element::Br, _) => 1,
        _ => 4,
    }
}

/// Connected graph of up to `n` heavy atoms (n >= 1): a random tree plus a few ring
/// closures, sometimes built around an aromatic six-ring. Valences are respected;
/// coordinates (rounded to 1e-4) are attached when `with_positions` is set.
pub fn graph<R: Rng>(rng: &mut R, n: usize, with_positions: bool) -> MoleculeGraph {
    let pool = [Element::C, Element::C, Element::C, Element::N, Element::O, Element::S, Element::F, Element::Cl];
    let mut atoms: Vec<Atom> = Vec::with_capacity(n);
    let mut left: Vec<u32> = Vec::with_capacity(n);
    let mut bonds: Vec<Bond> = Vec::new();
    let ring = n >= 6 && rng.gen_bool(0.3);
    if ring {
        for i in 0..6 {
            atoms.push(Atom::new(Element::C).with_aromatic(true));
            left.push(1);
            bonds.push(Bond::new(i, (i + 1) % 6, BondOrder::Aromatic));
        }
    }
    while atoms.len() < n {
        let i = atoms.len();
        let open: Vec<usize> = (0..i).filter(|&j| left[j] > 0).collect();
        if i > 0 && open.is_empty() {
            break;
        }
        let mut element = *pool.choose(rng).unwrap();
        // a terminal atom on the last open site would end the growth early
        if i > 0 && capacity(element, 0) == 1 && open.len() == 1 && left[open[0]] == 1 && i + 1 < n {
            element = Element::C;
        }
        let charge = match element {
            Element::N if rng.gen_bool(0.1) => 1,
            Element::O if rng.gen_bool(0.1) => -1,
            _ => 0,
        };
        let mut cap = capacity(element, charge);
        if i > 0 {
            let j = *open.choose(rng).unwrap();
            let max_order = cap.min(left[j]).min(3);
            let order = match rng.gen_range(1..=max_order) {
                1 => BondOrder::Single,
                2 => BondOrder::Double,
                _ => BondOrder::Triple,
            };
            let used = order.half_units() / 2;
            left[j] -= used;
            cap -= used;
            bonds.push(Bond::new(j, i, order));
        }
        atoms.push(Atom::new(element).with_charge(charge));
        left.push(cap);
    }
    let closures = rng.gen_range(0..=2);
    for _ in 0..closures {
        let open: Vec<usize> = (0..atoms.len()).filter(|&j| left[j] > 0).collect();
        if open.len() < 2 {
            break;
        }
        let a = *open.choose(rng).unwrap();
        let b = *open.choose(rng).unwrap();
        if a == b || bonds.iter().any(|x| (x.a, x.b) == (a, b) || (x.a, x.b) == (b, a)) {
            continue;
        }
        left[a] -= 1;
        left[b] -= 1;
        bonds.push(Bond::new(a, b, BondOrder::Single));
    }
    if with_positions {
        for a in &mut atoms {
            let mut p = [0.0; 3];
            for c in &mut p {
                *c = quantize(rng.gen_range(-20.0..20.0), 4);
            }
            a.position = Some(p);
        }
    }
    let name = rng.gen_bool(0.5).then(|| format!("mol{}", rng.gen_range(0..10_000)));
    MoleculeGraph::new(atoms, bonds, name).expect("generator respects valence")
}

/// Uniform random permutation of `0..n`.
pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
