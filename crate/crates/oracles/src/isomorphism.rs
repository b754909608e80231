//! Labelled graph isomorphism by backtracking.

use specbench::molgraph::MoleculeGraph;

fn signature(g: &MoleculeGraph, i: usize) -> (u8, i8, bool, usize, Vec<u8>) {
    let a = g.atom(i);
    let mut around: Vec<u8> = g.neighbors(i).iter().map(|&(n, _)| g.atom(n).element.atomic_number()).collect();
    around.sort_unstable();
    (a.element.atomic_number(), a.formal_charge, a.aromatic, g.degree(i), around)
}

/// Same atoms (element, charge, aromatic flag) joined by the same bond orders,
/// up to relabelling. Coordinates and names are ignored.
pub fn isomorphic(a: &MoleculeGraph, b: &MoleculeGraph) -> bool {
    let n = a.atom_count();
    if n != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let sa: Vec<_> = (0..n).map(|i| signature(a, i)).collect();
    let sb: Vec<_> = (0..n).map(|i| signature(b, i)).collect();
    let (mut ca, mut cb) = (sa.clone(), sb.clone());
    ca.sort();
    cb.sort();
    if ca != cb {
        return false;
    }
    // Visit atoms of `a` so each one after the first in its component has a mapped neighbour.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        order.push(s);
        let mut k = order.len() - 1;
        while k < order.len() {
            for &(v, _) in a.neighbors(order[k]) {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
            k += 1;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    extend(a, b, &sa, &sb, &order, 0, &mut map, &mut taken)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    a: &MoleculeGraph,
    b: &MoleculeGraph,
    sa: &[(u8, i8, bool, usize, Vec<u8>)],
    sb: &[(u8, i8, bool, usize, Vec<u8>)],
    order: &[usize],
    k: usize,
    map: &mut [usize],
    taken: &mut [bool],
) -> bool {
    let Some(&u) = order.get(k) else { return true };
    for v in 0..b.atom_count() {
        if taken[v] || sa[u] != sb[v] {
            continue;
        }
        let consistent = a.neighbors(u).iter().all(|&(w, order)| {
            let mw = map[w];
            mw == usize::MAX || b.bond_between(v, mw) == Some(order)
        });
        if !consistent {
            continue;
        }
        map[u] = v;
        taken[v] = true;
        if extend(a, b, sa, sb, order, k + 1, map, taken) {
            return true;
        }
        map[u] = usize::MAX;
        taken[v] = false;
    }
    false
}
