use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specbench::fingerprints::{fingerprint, tanimoto, BitFingerprint, FingerprintConfig, FingerprintKind};
use specbench::geometry::{analyze, GeometryParams};
use specbench::molgraph::{canonical_smiles, parse_sdf, parse_smiles, write_sdf, MoleculeGraph};
use specbench::nmr_metrics::{score_carbon, score_proton, NmrConfig, TOLERANCE_EPS};
use specbench::seq_metrics::{score_pair, sequence_accuracy, token_accuracy, tokenize, Canonicalizer, TokenScheme};
use specbench::spectra::{
    clean_waveform, parse_spectrum, serialize, CarbonSpectrum, IonMode, MassPeak, MassSpectrum, ProtonPeak,
    ProtonSpectrum, Spectrum, WaveformModality, WaveformSpectrum,
};
use specbench::taskgen::split;
use specbench::vec_metrics::{cosine, vectorize, BinningConfig};
use specbench_oracles::{exhaustive_match, isomorphic, random, Criterion};

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn graph(seed: u64, max_atoms: usize, positions: bool) -> MoleculeGraph {
    let mut r = seeded(seed);
    let n = 1 + (seed as usize % max_atoms);
    random::graph(&mut r, n, positions)
}

fn shifts(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..400).prop_map(|x| x as f64 / 10.0 + 10.0), 0..=max)
}

fn proton_peaks(max: usize) -> impl Strategy<Value = Vec<(f64, u32)>> {
    prop::collection::vec(((0u32..300).prop_map(|x| x as f64 / 100.0), 1u32..=6), 1..=max)
}

fn proton_spectrum(peaks: &[(f64, u32)]) -> ProtonSpectrum {
    ProtonSpectrum::new(peaks.iter().map(|&(c, n)| ProtonPeak::simple(c, n).unwrap()).collect(), None, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // molgraph

    #[test]
    fn sdf_round_trip(seed in any::<u64>()) {
        let g = graph(seed, 40, true);
        prop_assert_eq!(parse_sdf(&write_sdf(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn canonical_smiles_ignores_atom_order(seed in any::<u64>()) {
        let g = graph(seed, 14, false);
        let p = random::permutation(&mut seeded(seed ^ 1), g.atom_count());
        let s = canonical_smiles(&g).unwrap();
        prop_assert_eq!(&canonical_smiles(&g.permuted(&p)).unwrap(), &s);
        prop_assert!(isomorphic(&parse_smiles(&s).unwrap(), &g), "{} is not the input graph", s);
    }

    #[test]
    fn bond_order_never_changes_validity(seed in any::<u64>()) {
        let g = graph(seed, 20, false);
        let mut bonds = g.bonds().to_vec();
        bonds.reverse();
        let again = MoleculeGraph::new(g.atoms().to_vec(), bonds, g.name().map(String::from));
        prop_assert_eq!(again.unwrap(), g);
    }

    #[test]
    fn topological_distances_obey_triangle_inequality(seed in any::<u64>()) {
        let g = graph(seed, 16, false);
        let d = g.topological_distances();
        let n = g.atom_count();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), Some(0));
            for j in 0..n {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..n {
                    if let (Some(a), Some(b), Some(c)) = (d.get(i, j), d.get(j, k), d.get(i, k)) {
                        prop_assert!(c <= a + b);
                    }
                }
            }
        }
    }

    // spectra

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        for spec in random::one_of_each(&mut seeded(seed)) {
            let text = serialize(&spec);
            let (back, _) = parse_spectrum(&text).unwrap();
            prop_assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn carbon_serialization_is_idempotent_for_any_input_order(values in prop::collection::vec(-50.0f64..350.0, 0..20)) {
        let c: Spectrum = CarbonSpectrum::new(values, None, None).unwrap().into();
        let once = serialize(&c);
        let twice = serialize(&parse_spectrum(&once).unwrap().0);
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn distinct_spectra_serialize_differently(a in shifts(6), b in shifts(6)) {
        let sa = CarbonSpectrum::new(a, Some(100.0), None).unwrap();
        let sb = CarbonSpectrum::new(b, Some(100.0), None).unwrap();
        prop_assert_eq!(sa == sb, serialize(&sa.into()) == serialize(&sb.into()));
    }

    #[test]
    fn mass_normalization_puts_base_peak_at_100(raw in prop::collection::vec((1u32..5000, 0.001f64..1e6), 1..20)) {
        let mut peaks: Vec<MassPeak> = raw.iter().map(|&(m, a)| MassPeak { mz: m as f64 / 10.0, abundance: a }).collect();
        peaks.sort_by(|x, y| x.mz.total_cmp(&y.mz));
        peaks.dedup_by(|x, y| x.mz == y.mz);
        let ms = MassSpectrum::normalized(IonMode::Positive, None, peaks).unwrap();
        let max = ms.peaks().iter().map(|p| p.abundance).fold(0.0, f64::max);
        prop_assert!((max - 100.0).abs() <= 1e-9);
        prop_assert!(ms.peaks().iter().all(|p| p.abundance > 0.0 && p.abundance <= 100.0));
    }

    #[test]
    fn cleaned_waveform_peaks_at_one(trace in prop::collection::vec(0.0f64..5.0, 3..200)) {
        let raw: Vec<(f64, f64)> = trace.iter().enumerate().map(|(i, &y)| (500.0 + 3.0 * i as f64, y)).collect();
        let w = clean_waveform(&raw, WaveformModality::Ir, 2.0, 0.01).unwrap();
        let (lo, hi) = w.axis_range();
        prop_assert!(w.points().iter().all(|&(p, y)| (lo..=hi).contains(&p) && (0.0..=1.0).contains(&y)));
        if let Some(max) = w.points().iter().map(|p| p.1).reduce(f64::max) {
            prop_assert_eq!(max, 1.0);
        }
    }

    // nmr_metrics

    #[test]
    fn carbon_matching_is_one_to_one_and_within_tolerance(p in shifts(12), t in shifts(12)) {
        let cfg = NmrConfig::default();
        let (p, t) = (CarbonSpectrum::new(p, None, None).unwrap(), CarbonSpectrum::new(t, None, None).unwrap());
        let s = score_carbon(&p, &t, &cfg);
        let used: BTreeSet<usize> = s.pairs.iter().map(|x| x.true_index).collect();
        prop_assert_eq!(used.len(), s.pairs.len());
        prop_assert!(s.n_match <= s.n_pred.min(s.n_true));
        prop_assert!(s.pairs.iter().all(|x| x.deviation >= 0.0 && x.deviation <= cfg.tau_c + TOLERANCE_EPS));
        if let Some(mae) = s.mae {
            prop_assert!(mae <= cfg.tau_c + TOLERANCE_EPS);
        }
        for v in [s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn proton_scores_are_bounded(p in proton_peaks(10), t in proton_peaks(10)) {
        let cfg = NmrConfig::default();
        let (ps, ts) = (proton_spectrum(&p), proton_spectrum(&t));
        let s = score_proton(&ps, &ts, &cfg);
        let j = s.jaccard.unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
        for x in &s.pairs {
            let w = x.weight.unwrap();
            let cap = ps.peaks()[x.pred_index].n_h().min(ts.peaks()[x.true_index].n_h()) as f64;
            prop_assert!(w > 0.0 && w <= cap);
            prop_assert!(x.deviation <= cfg.tau_h + TOLERANCE_EPS);
        }
    }

    #[test]
    fn self_score_is_perfect(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let cfg = NmrConfig::default();
        let c = random::carbon(&mut r);
        let s = score_carbon(&c, &c, &cfg);
        prop_assert_eq!((s.precision, s.recall, s.f1, s.mae), (1.0, 1.0, 1.0, Some(0.0)));
        let h = random::proton(&mut r);
        let s = score_proton(&h, &h, &cfg);
        prop_assert_eq!((s.precision, s.recall, s.f1, s.mae), (1.0, 1.0, 1.0, Some(0.0)));
        prop_assert!((s.jaccard.unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn greedy_matches_reference_scan(p in shifts(10), t in shifts(10)) {
        let cfg = NmrConfig::default();
        let (p, t) = (CarbonSpectrum::new(p, None, None).unwrap(), CarbonSpectrum::new(t, None, None).unwrap());
        let s = score_carbon(&p, &t, &cfg);
        let m = exhaustive_match(p.shifts(), t.shifts(), cfg.tau_c, Criterion::Nearest).unwrap().value;
        let got: Vec<(usize, usize)> = s.pairs.iter().map(|x| (x.pred_index, x.true_index)).collect();
        let want: Vec<(usize, usize)> = m.greedy.iter().map(|x| (x.pred_index, x.true_index)).collect();
        prop_assert_eq!(got, want);
        prop_assert!(m.optimal_weight >= m.greedy_weight);
    }

    #[test]
    fn optimal_match_count_is_symmetric(p in shifts(8), t in shifts(8)) {
        let (p, t) = (CarbonSpectrum::new(p, None, None).unwrap(), CarbonSpectrum::new(t, None, None).unwrap());
        let a = exhaustive_match(p.shifts(), t.shifts(), 0.5, Criterion::Nearest).unwrap().value;
        let b = exhaustive_match(t.shifts(), p.shifts(), 0.5, Criterion::Nearest).unwrap().value;
        prop_assert_eq!(a.optimal.len(), b.optimal.len());
    }

    // vec_metrics

    #[test]
    fn cosine_properties(
        p in prop::collection::vec(0.0f64..10.0, 1..50),
        q in prop::collection::vec(0.0f64..10.0, 1..50),
        c in 1e-6f64..1e6,
    ) {
        let n = p.len().min(q.len());
        let (p, q) = (&p[..n], &q[..n]);
        let s = cosine(p, q);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, cosine(q, p));
        let scaled: Vec<f64> = p.iter().map(|x| x * c).collect();
        prop_assert!((cosine(&scaled, q) - s).abs() <= 1e-12);
    }

    #[test]
    fn vectorize_is_additive(points in prop::collection::btree_map(500u32..4000, 0.0f64..=1.0, 0..30), cut in 0usize..30) {
        let all: Vec<(f64, f64)> = points.iter().map(|(&p, &i)| (p as f64, i)).collect();
        let cut = cut.min(all.len());
        let cfg = BinningConfig::ir_default();
        let (a, b) = (&all[..cut], &all[cut..]);
        let whole = vectorize(&WaveformSpectrum::new(WaveformModality::Ir, (500.0, 4000.0), all.clone()).unwrap(), &cfg);
        let (va, vb) = (vectorize(a, &cfg), vectorize(b, &cfg));
        prop_assert_eq!(whole.values().len(), cfg.k());
        for k in 0..cfg.k() {
            prop_assert!(whole.values()[k] >= 0.0);
            prop_assert!((whole.values()[k] - va.values()[k] - vb.values()[k]).abs() <= 1e-12);
        }
    }

    // seq_metrics

    #[test]
    fn token_accuracy_bounds(t in "[CNO()=1-3\\[\\]a-c]{1,20}", p in "[CNO()=1-3\\[\\]a-c]{0,20}") {
        for scheme in [TokenScheme::Character, TokenScheme::SmilesAtoms] {
            if let Ok(tt) = tokenize(&t, scheme) {
                prop_assert_eq!(token_accuracy(&tt, &tt).unwrap(), 1.0);
                prop_assert_eq!(tt.tokens().concat(), t.clone());
                let s = score_pair(&t, &p, scheme, Canonicalizer::Trim).unwrap();
                prop_assert!((0.0..=1.0).contains(&s.token_acc));
            }
        }
    }

    #[test]
    fn canonicalizing_first_changes_nothing(a in 0usize..8, b in 0usize..8) {
        const POOL: [&str; 8] = ["CCO", "OCC", "C(C)O", "CC(=O)O", "OC(C)=O", "c1ccccc1", "CN", "xyz"];
        let (t, p) = (POOL[a], POOL[b]);
        let canon = Canonicalizer::Smiles;
        let plain = sequence_accuracy(&[(t, p)], canon).unwrap();
        if let Some(ct) = canon.apply(t) {
            prop_assert_eq!(sequence_accuracy(&[(ct.as_str(), p)], canon).unwrap(), plain);
        }
        if let Some(cp) = canon.apply(p) {
            prop_assert_eq!(sequence_accuracy(&[(t, cp.as_str())], canon).unwrap(), plain);
        }
    }

    // geometry

    #[test]
    fn geometry_counts_ignore_atom_order(seed in any::<u64>()) {
        let g = graph(seed, 12, true).map_positions(|p| p.map(|c| c / 8.0));
        let perm = random::permutation(&mut seeded(seed ^ 7), g.atom_count());
        let params = GeometryParams::default();
        let (a, b) = (analyze(&g, &params), analyze(&g.permuted(&perm), &params));
        prop_assert_eq!((a.clash_count, a.violation_count), (b.clash_count, b.violation_count));
        prop_assert_eq!(a.clash_count, a.clashes.len());
        prop_assert_eq!(a.violation_count, a.violations.len());
    }

    #[test]
    fn expanding_never_adds_clashes(seed in any::<u64>(), factor in 1.0f64..3.0) {
        let g = graph(seed, 12, true).map_positions(|p| p.map(|c| c / 8.0));
        let params = GeometryParams::default();
        let before = analyze(&g, &params).clash_count;
        let after = analyze(&g.map_positions(|p| p.map(|c| c * factor)), &params).clash_count;
        prop_assert!(after <= before);
    }

    // fingerprints

    #[test]
    fn fingerprints_ignore_atom_order(seed in any::<u64>()) {
        let g = graph(seed, 16, false);
        let perm = random::permutation(&mut seeded(seed ^ 3), g.atom_count());
        let h = g.permuted(&perm);
        let cfg = FingerprintConfig::default();
        for kind in FingerprintKind::ALL {
            prop_assert_eq!(fingerprint(&g, kind, &cfg), fingerprint(&h, kind, &cfg));
        }
    }

    #[test]
    fn tanimoto_properties(a in prop::collection::btree_set(0usize..256, 0..64), b in prop::collection::btree_set(0usize..256, 0..64)) {
        let fp = |s: &BTreeSet<usize>| {
            let mut f = BitFingerprint::empty(FingerprintKind::AtomPair, 256);
            s.iter().for_each(|&i| f.set(i));
            f
        };
        let (fa, fb) = (fp(&a), fp(&b));
        let t = tanimoto(&fa, &fb).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert_eq!(t, tanimoto(&fb, &fa).unwrap());
        if !a.is_empty() {
            prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
        }
    }

    // taskgen

    #[test]
    fn splits_are_disjoint_and_complete(n in 0usize..60, seed in any::<u64>(), f in (1u32..8, 0u32..3, 0u32..3)) {
        let ids: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let total = (f.0 + f.1 + f.2) as f64;
        let fractions = [f.0 as f64 / total, f.1 as f64 / total, f.2 as f64 / total];
        let s = split(&ids, fractions, seed).unwrap();
        let parts = [&s.train, &s.val, &s.test];
        let all: BTreeSet<&String> = parts.iter().flat_map(|p| p.iter()).collect();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(parts.iter().map(|p| p.len()).sum::<usize>(), n);
        prop_assert_eq!(split(&ids, fractions, seed).unwrap(), s);
    }
}
