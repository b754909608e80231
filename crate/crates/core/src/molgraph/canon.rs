//! Canonical SMILES via iterative invariant refinement with exhaustive tie breaking.
//!
//! Atom classes start from (element, charge, heavy degree, aromatic, H count) and
//! are refined by neighbor classes and bond orders until stable. Remaining ties
//! are broken by trying every member of the first tied class and keeping the
//! lexicographically smallest output string, so the result does not depend on
//! input atom order.

use super::element::Element;
use super::graph::{BondOrder, MoleculeGraph};
use super::smiles::{implicit_hydrogens, smiles_valence_units};
use super::MolError;

/// Search leaves explored before tie breaking falls back to the first class member.
const LEAF_BUDGET: usize = 20_000;

struct Node {
    element: Element,
    charge: i8,
    aromatic: bool,
    hydrogens: u32,
    /// (node, bond order) pairs among written atoms.
    edges: Vec<(usize, BondOrder)>,
}

struct Canon {
    nodes: Vec<Node>,
    leaves: usize,
}

/// Writes a canonical SMILES string for `mol`.
///
/// Hydrogens that are neutral, singly bonded to a non-hydrogen atom are folded
/// into their neighbor's hydrogen count; all other hydrogens are written as
/// `[H]` atoms.
pub fn canonical_smiles(mol: &MoleculeGraph) -> Result<String, MolError> {
    let n = mol.atom_count();
    let suppressed: Vec<bool> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            a.element == Element::H && a.formal_charge == 0 && !a.aromatic && mol.degree(i) == 1 && {
                let (nb, order) = mol.neighbors(i)[0];
                order == BondOrder::Single && mol.atom(nb).element != Element::H
            }
        })
        .collect();
    let mut local = vec![usize::MAX; n];
    let mut order = Vec::new();
    for i in 0..n {
        if !suppressed[i] {
            local[i] = order.len();
            order.push(i);
        }
    }
    let mut nodes = Vec::with_capacity(order.len());
    for &i in &order {
        let atom = mol.atom(i);
        if atom.aromatic && !atom.element.can_be_aromatic() {
            return Err(MolError::UnsupportedFeature(format!("aromatic {} atom", atom.element)));
        }
        let edges = mol.neighbors(i).iter().filter(|(nb, _)| !suppressed[*nb]).map(|&(nb, o)| (local[nb], o)).collect();
        nodes.push(Node {
            element: atom.element,
            charge: atom.formal_charge,
            aromatic: atom.aromatic,
            hydrogens: mol.neighbors(i).iter().filter(|(nb, _)| suppressed[*nb]).count() as u32,
            edges,
        });
    }

    let mut canon = Canon { nodes, leaves: 0 };
    let initial = canon.initial_classes();
    Ok(canon.search(initial))
}

fn order_code(order: BondOrder) -> u8 {
    order.mdl_code()
}

/// Dense ranks (0..k) of `keys`, equal keys sharing a rank.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).expect("present") as u32).collect()
}

fn class_count(ranks: &[u32]) -> usize {
    ranks.iter().copied().max().map_or(0, |m| m as usize + 1)
}

impl Canon {
    fn initial_classes(&self) -> Vec<u32> {
        let keys: Vec<_> = self
            .nodes
            .iter()
            .map(|n| (n.element.atomic_number(), n.charge, n.edges.len(), n.aromatic, n.hydrogens))
            .collect();
        dense_ranks(&keys)
    }

    fn refine(&self, mut ranks: Vec<u32>) -> Vec<u32> {
        loop {
            let keys: Vec<(u32, Vec<(u32, u8)>)> = self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| {
                    let mut nb: Vec<(u32, u8)> = node.edges.iter().map(|&(j, o)| (ranks[j], order_code(o))).collect();
                    nb.sort_unstable();
                    (ranks[i], nb)
                })
                .collect();
            let next = dense_ranks(&keys);
            if class_count(&next) == class_count(&ranks) {
                return next;
            }
            ranks = next;
        }
    }

    fn search(&mut self, ranks: Vec<u32>) -> String {
        let ranks = self.refine(ranks);
        let n = ranks.len();
        if class_count(&ranks) == n {
            self.leaves += 1;
            return self.write(&ranks);
        }
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r as usize] += 1;
        }
        let tied = counts.iter().position(|&c| c > 1).expect("some class is tied") as u32;
        let members: Vec<usize> = (0..n).filter(|&i| ranks[i] == tied).collect();
        let mut best: Option<String> = None;
        for &m in &members {
            let keys: Vec<(u32, bool)> = (0..n).map(|i| (ranks[i], ranks[i] == tied && i != m)).collect();
            let s = self.search(dense_ranks(&keys));
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
            if self.leaves >= LEAF_BUDGET {
                break;
            }
        }
        best.expect("at least one member")
    }

    fn write(&self, ranks: &[u32]) -> String {
        let n = self.nodes.len();
        let mut by_rank: Vec<usize> = (0..n).collect();
        by_rank.sort_by_key(|&i| ranks[i]);
        let sorted_edges: Vec<Vec<(usize, BondOrder)>> = self
            .nodes
            .iter()
            .map(|node| {
                let mut e = node.edges.clone();
                e.sort_by_key(|&(j, _)| ranks[j]);
                e
            })
            .collect();

        let mut visited = vec![false; n];
        let mut parts = Vec::new();
        for &start in &by_rank {
            if visited[start] {
                continue;
            }
            let tree = DfsTree::build(start, &sorted_edges, &mut visited);
            let mut out = String::new();
            let mut writer = Emitter { canon: self, tree: &tree, digits: Vec::new(), ring_digit: Vec::new() };
            writer.emit(start, &mut out);
            parts.push(out);
        }
        parts.join(".")
    }
}

struct RingBond {
    opener: usize,
    closer: usize,
    order: BondOrder,
}

struct DfsTree {
    children: Vec<Vec<(usize, BondOrder)>>,
    /// Ring bond ids touching each atom, in discovery order.
    ring_at: Vec<Vec<usize>>,
    rings: Vec<RingBond>,
}

impl DfsTree {
    fn build(start: usize, edges: &[Vec<(usize, BondOrder)>], visited: &mut [bool]) -> DfsTree {
        let n = edges.len();
        let mut tree = DfsTree { children: vec![Vec::new(); n], ring_at: vec![Vec::new(); n], rings: Vec::new() };
        let mut parent = vec![usize::MAX; n];
        let mut ring_pairs = std::collections::HashSet::new();
        // (atom, next neighbor position)
        let mut stack = vec![(start, 0usize)];
        visited[start] = true;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next >= edges[u].len() {
                stack.pop();
                continue;
            }
            let (v, order) = edges[u][*next];
            *next += 1;
            if !visited[v] {
                visited[v] = true;
                parent[v] = u;
                tree.children[u].push((v, order));
                stack.push((v, 0));
            } else if parent[u] != v && parent[v] != u {
                let key = (u.min(v), u.max(v));
                if ring_pairs.insert(key) {
                    // v is an ancestor of u: it opens the ring, u closes it
                    let id = tree.rings.len();
                    tree.rings.push(RingBond { opener: v, closer: u, order });
                    tree.ring_at[v].push(id);
                    tree.ring_at[u].push(id);
                }
            }
        }
        tree
    }
}

struct Emitter<'a> {
    canon: &'a Canon,
    tree: &'a DfsTree,
    /// Ring digits currently in use.
    digits: Vec<u32>,
    ring_digit: Vec<(usize, u32)>,
}

fn bond_symbol(order: BondOrder, a_aromatic: bool, b_aromatic: bool) -> &'static str {
    match order {
        BondOrder::Single if a_aromatic && b_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if a_aromatic && b_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

fn digit_text(d: u32) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

impl Emitter<'_> {
    fn emit(&mut self, root: usize, out: &mut String) {
        // explicit stack of (atom, bond symbol into it, close paren after)
        enum Step {
            Atom(usize, &'static str),
            Open,
            Close,
        }
        let mut stack = vec![Step::Atom(root, "")];
        while let Some(step) = stack.pop() {
            match step {
                Step::Open => out.push('('),
                Step::Close => out.push(')'),
                Step::Atom(u, sym) => {
                    out.push_str(sym);
                    out.push_str(&self.atom_token(u));
                    self.ring_digits(u, out);
                    let children = &self.tree.children[u];
                    let au = self.canon.nodes[u].aromatic;
                    // pushed in reverse so the lowest-ranked child is written first
                    for (k, &(v, order)) in children.iter().enumerate().rev() {
                        let s = bond_symbol(order, au, self.canon.nodes[v].aromatic);
                        if k + 1 < children.len() {
                            stack.push(Step::Close);
                            stack.push(Step::Atom(v, s));
                            stack.push(Step::Open);
                        } else {
                            stack.push(Step::Atom(v, s));
                        }
                    }
                }
            }
        }
    }

    fn ring_digits(&mut self, u: usize, out: &mut String) {
        let mut freed = Vec::new();
        for &id in &self.tree.ring_at[u] {
            let ring = &self.tree.rings[id];
            if ring.closer == u {
                let pos = self.ring_digit.iter().position(|&(r, _)| r == id).expect("ring opened");
                let (_, d) = self.ring_digit.remove(pos);
                out.push_str(&digit_text(d));
                freed.push(d);
            }
        }
        for &id in &self.tree.ring_at[u] {
            let ring = &self.tree.rings[id];
            if ring.opener == u {
                let d = (1..).find(|d| !self.digits.contains(d) && !freed.contains(d)).expect("unbounded");
                self.digits.push(d);
                self.ring_digit.push((id, d));
                let other = self.canon.nodes[ring.closer].aromatic;
                out.push_str(bond_symbol(ring.order, self.canon.nodes[u].aromatic, other));
                out.push_str(&digit_text(d));
            }
        }
        self.digits.retain(|d| !freed.contains(d));
    }

    fn atom_token(&self, u: usize) -> String {
        let node = &self.canon.nodes[u];
        let symbol =
            if node.aromatic { node.element.symbol().to_ascii_lowercase() } else { node.element.symbol().to_string() };
        let written_valence: u32 = node.edges.iter().map(|&(_, o)| smiles_valence_units(o)).sum();
        let bare_ok = node.element.is_organic_subset()
            && node.charge == 0
            && implicit_hydrogens(node.element, node.aromatic, written_valence) == node.hydrogens;
        if bare_ok {
            return symbol;
        }
        let mut s = String::from("[");
        s.push_str(&symbol);
        match node.hydrogens {
            0 => {}
            1 => s.push('H'),
            h => s.push_str(&format!("H{h}")),
        }
        match node.charge {
            0 => {}
            1 => s.push('+'),
            -1 => s.push('-'),
            c if c > 0 => s.push_str(&format!("+{c}")),
            c => s.push_str(&format!("-{}", -c)),
        }
        s.push(']');
        s
    }
}
