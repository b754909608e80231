//! Unhashed fingerprint features as readable strings.

use std::collections::{BTreeSet, VecDeque};

use specbench::molgraph::{BondOrder, Element, MoleculeGraph};

use crate::{OracleError, OracleResult};

pub const MAX_FEATURE_ATOMS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Path,
    Torsion,
    AtomPair,
}

fn label(mol: &MoleculeGraph, i: usize, with_charge: bool) -> String {
    let a = mol.atom(i);
    let mut s = a.element.symbol().to_string();
    if a.aromatic {
        s.push_str("(ar)");
    }
    if with_charge {
        s.push_str(&format!("[{:+}]", a.formal_charge));
    }
    s
}

fn bond_symbol(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single => "-",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => ":",
    }
}

/// Exact feature set of a graph with at most [`MAX_FEATURE_ATOMS`] considered atoms.
///
/// Paths are written as `C-C=O`, read in the lexicographically smaller direction;
/// atom pairs as `A|x|y|d` with `x <= y`.
pub fn raw_feature_sets(
    mol: &MoleculeGraph,
    kind: FeatureKind,
    l_max: usize,
    include_hydrogens: bool,
    charge_in_class: bool,
) -> Result<OracleResult<BTreeSet<String>>, OracleError> {
    let atoms: Vec<usize> =
        (0..mol.atom_count()).filter(|&i| include_hydrogens || mol.atom(i).element != Element::H).collect();
    if atoms.len() > MAX_FEATURE_ATOMS {
        return Err(OracleError::TooLarge { size: atoms.len(), limit: MAX_FEATURE_ATOMS });
    }
    let kept = |i: usize| include_hydrogens || mol.atom(i).element != Element::H;
    let mut out = BTreeSet::new();
    match kind {
        FeatureKind::Path | FeatureKind::Torsion => {
            let (lo, hi) = if kind == FeatureKind::Path { (1, l_max) } else { (3, 3) };
            // Grow every walk without repeated atoms, breadth first.
            let mut frontier: Vec<Vec<usize>> = atoms.iter().map(|&a| vec![a]).collect();
            for len in 1..=hi {
                let mut next = Vec::new();
                for walk in &frontier {
                    let last = *walk.last().unwrap();
                    for &(n, _) in mol.neighbors(last) {
                        if kept(n) && !walk.contains(&n) {
                            let mut w = walk.clone();
                            w.push(n);
                            next.push(w);
                        }
                    }
                }
                if len >= lo {
                    for w in &next {
                        let fwd = write_walk(mol, w, charge_in_class);
                        let rev: Vec<usize> = w.iter().rev().copied().collect();
                        let bwd = write_walk(mol, &rev, charge_in_class);
                        let prefix = if kind == FeatureKind::Path { "P|" } else { "T|" };
                        out.insert(format!("{prefix}{}", fwd.min(bwd)));
                    }
                }
                frontier = next;
            }
        }
        FeatureKind::AtomPair => {
            for (x, &i) in atoms.iter().enumerate() {
                let dist = bfs(mol, i, &kept);
                for &j in &atoms[x + 1..] {
                    if let Some(d) = dist[j] {
                        let (a, b) = (label(mol, i, charge_in_class), label(mol, j, charge_in_class));
                        let (a, b) = if a <= b { (a, b) } else { (b, a) };
                        out.insert(format!("A|{a}|{b}|{d}"));
                    }
                }
            }
        }
    }
    Ok(OracleResult { value: out, method: "explicit walk and breadth-first enumeration, no hashing" })
}

fn write_walk(mol: &MoleculeGraph, walk: &[usize], charge: bool) -> String {
    let mut s = label(mol, walk[0], charge);
    for w in walk.windows(2) {
        s.push_str(bond_symbol(mol.bond_between(w[0], w[1]).expect("walk follows bonds")));
        s.push_str(&label(mol, w[1], charge));
    }
    s
}

fn bfs(mol: &MoleculeGraph, start: usize, kept: &dyn Fn(usize) -> bool) -> Vec<Option<usize>> {
    let mut dist = vec![None; mol.atom_count()];
    dist[start] = Some(0);
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        for &(v, _) in mol.neighbors(u) {
            if kept(v) && dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// `|A ∩ B| / |A ∪ B|`, 0 for two empty sets.
pub fn set_tanimoto(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use specbench::molgraph::parse_smiles;

    fn feats(smiles: &str, kind: FeatureKind) -> BTreeSet<String> {
        raw_feature_sets(&parse_smiles(smiles).unwrap(), kind, 7, false, false).unwrap().value
    }

    #[test]
    fn small_cases() {
        assert_eq!(feats("CC", FeatureKind::AtomPair), BTreeSet::from(["A|C|C|1".to_string()]));
        assert_eq!(feats("CCCC", FeatureKind::Torsion), BTreeSet::from(["T|C-C-C-C".to_string()]));
        assert!(feats("C", FeatureKind::Path).is_empty());
        assert_eq!(feats("CC=O", FeatureKind::Path).len(), 3);
        assert_eq!(feats("c1ccccc1", FeatureKind::Path).len(), 5);
    }

    #[test]
    fn propane_has_a_path_ethane_lacks() {
        let (e, p) = (feats("CC", FeatureKind::Path), feats("CCC", FeatureKind::Path));
        assert!(set_tanimoto(&e, &p) < 1.0);
        assert_eq!(set_tanimoto(&e, &e), 1.0);
        assert_eq!(set_tanimoto(&BTreeSet::new(), &BTreeSet::new()), 0.0);
    }

    #[test]
    fn size_cap() {
        let m = parse_smiles("CCCCCCCCCCCCC").unwrap();
        assert!(raw_feature_sets(&m, FeatureKind::Path, 7, false, false).is_err());
    }
}
