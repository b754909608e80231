use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::element::Element;
use super::MolError;

pub type Position = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's valence in half-bond units (aromatic counts 1.5).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// MDL bond type code: 1, 2, 3, or 4 for aromatic.
    pub fn mdl_code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn from_mdl_code(code: u8) -> Option<BondOrder> {
        match code {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            4 => Some(BondOrder::Aromatic),
            _ => None,
        }
    }
}

impl fmt::Display for BondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BondOrder::Single => "single",
            BondOrder::Double => "double",
            BondOrder::Triple => "triple",
            BondOrder::Aromatic => "aromatic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    pub position: Option<Position>,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom { element, formal_charge: 0, aromatic: false, position: None }
    }

    pub fn with_charge(mut self, charge: i8) -> Self {
        self.formal_charge = charge;
        self
    }

    pub fn with_aromatic(mut self, aromatic: bool) -> Self {
        self.aromatic = aromatic;
        self
    }

    pub fn with_position(mut self, position: Position) -> Self {
        self.position = Some(position);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Bond { a, b, order }
    }

    fn normalized(self) -> Self {
        if self.a <= self.b {
            self
        } else {
            Bond { a: self.b, b: self.a, order: self.order }
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// An immutable molecular graph: atoms, typed bonds and optional 3D coordinates.
///
/// Bonds are normalized to `a < b` and kept sorted, so two graphs built from the
/// same bond set in any order compare equal.
#[derive(Debug, Clone)]
pub struct MoleculeGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    name: Option<String>,
    adjacency: Vec<Vec<(usize, BondOrder)>>,
}

impl PartialEq for MoleculeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.bonds == other.bonds && self.name == other.name
    }
}

impl MoleculeGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>, name: Option<String>) -> Result<Self, MolError> {
        Self::build(atoms, bonds, name, &|_| None, &|_| None)
    }

    /// Builds a graph, attributing errors to source lines through the two lookups
    /// (atom index -> line, bond index -> line).
    pub(crate) fn build(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        name: Option<String>,
        atom_line: &dyn Fn(usize) -> Option<usize>,
        bond_line: &dyn Fn(usize) -> Option<usize>,
    ) -> Result<Self, MolError> {
        if atoms.is_empty() {
            return Err(MolError::EmptyGraph);
        }
        let with_pos = atoms.iter().filter(|a| a.position.is_some()).count();
        if with_pos != 0 && with_pos != atoms.len() {
            return Err(MolError::MixedDimensionality { with_positions: with_pos, atoms: atoms.len() });
        }
        for (i, atom) in atoms.iter().enumerate() {
            if !(-4..=4).contains(&atom.formal_charge) {
                return Err(MolError::ChargeOutOfRange { atom: i, charge: atom.formal_charge, line: atom_line(i) });
            }
            if let Some(p) = atom.position {
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(MolError::AtomBlock { line: atom_line(i), reason: "non-finite coordinate".into() });
                }
            }
        }

        let n = atoms.len();
        let mut seen = HashSet::with_capacity(bonds.len());
        let mut normalized = Vec::with_capacity(bonds.len());
        for (k, bond) in bonds.into_iter().enumerate() {
            for idx in [bond.a, bond.b] {
                if idx >= n {
                    return Err(MolError::BondIndexOutOfRange { line: bond_line(k), index: idx, atoms: n });
                }
            }
            if bond.a == bond.b {
                return Err(MolError::SelfBond { line: bond_line(k), atom: bond.a });
            }
            let bond = bond.normalized();
            if !seen.insert((bond.a, bond.b)) {
                return Err(MolError::DuplicateBond { line: bond_line(k), a: bond.a, b: bond.b });
            }
            normalized.push(bond);
        }
        normalized.sort();

        let mut adjacency = vec![Vec::new(); n];
        for bond in &normalized {
            adjacency[bond.a].push((bond.b, bond.order));
            adjacency[bond.b].push((bond.a, bond.order));
        }

        let graph = MoleculeGraph { atoms, bonds: normalized, name, adjacency };
        for i in 0..n {
            if let Some((valence, max)) = graph.valence_excess(i) {
                return Err(MolError::ValenceViolation {
                    atom: i,
                    element: graph.atoms[i].element,
                    valence,
                    max,
                    line: atom_line(i),
                });
            }
        }
        Ok(graph)
    }

    /// Returns `(valence, allowed)` when atom `i` exceeds its allowed valence.
    fn valence_excess(&self, i: usize) -> Option<(u32, u32)> {
        let atom = &self.atoms[i];
        let mut max = match atom.formal_charge {
            0 => atom.element.max_valence()?,
            1 if atom.element == Element::N => 4,
            1 if atom.element == Element::O => 3,
            _ => return None,
        };
        let half: u32 = self.adjacency[i].iter().map(|(_, o)| o.half_units()).sum();
        let has_aromatic = self.adjacency[i].iter().any(|(_, o)| *o == BondOrder::Aromatic);
        // pyrrole-type heteroatoms donate a lone pair into the ring
        if has_aromatic && matches!(atom.element, Element::N | Element::O | Element::S | Element::P | Element::Se) {
            max += 1;
        }
        let valence = half / 2;
        (valence > max).then_some((valence, max))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: Option<String>) -> Self {
        self.name = name;
        self
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, BondOrder)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, i: usize, j: usize) -> Option<BondOrder> {
        self.adjacency[i].iter().find(|(n, _)| *n == j).map(|(_, o)| *o)
    }

    pub fn has_positions(&self) -> bool {
        self.atoms[0].position.is_some()
    }

    /// Number of hydrogen atoms bonded to atom `i`.
    pub fn hydrogen_count(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|(n, _)| self.atoms[*n].element == Element::H).count()
    }

    /// Returns the graph with atom `i` moved to position `perm[i]`.
    ///
    /// `perm` must be a permutation of `0..atom_count()`.
    pub fn permuted(&self, perm: &[usize]) -> MoleculeGraph {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut atoms = vec![None; self.atoms.len()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = Some(self.atoms[old].clone());
        }
        let atoms = atoms.into_iter().map(|a| a.expect("not a permutation")).collect();
        let bonds = self.bonds.iter().map(|b| Bond::new(perm[b.a], perm[b.b], b.order)).collect();
        MoleculeGraph::new(atoms, bonds, self.name.clone()).expect("permutation preserves validity")
    }

    /// Returns the graph with every position mapped through `f`.
    pub fn map_positions(&self, f: impl Fn(Position) -> Position) -> MoleculeGraph {
        let mut g = self.clone();
        for atom in &mut g.atoms {
            atom.position = atom.position.map(&f);
        }
        g
    }

    /// Connected components, each as ascending atom indices, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut k = 0;
            while k < members.len() {
                let u = members[k];
                k += 1;
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// All-pairs shortest path lengths in bonds (breadth-first search from every atom).
    pub fn topological_distances(&self) -> DistanceMatrix {
        let n = self.atoms.len();
        let mut data = vec![None; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut data[src * n..(src + 1) * n];
            row[src] = Some(0);
            queue.clear();
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = row[u].unwrap_or(0);
                for &(v, _) in &self.adjacency[u] {
                    if row[v].is_none() {
                        row[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        DistanceMatrix { n, data }
    }

    /// Hill-order molecular formula, e.g. `C2H6O`; formal charge is not included.
    pub fn formula(&self) -> String {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for atom in &self.atoms {
            *counts.entry(atom.element.symbol()).or_default() += 1;
        }
        let mut out = String::new();
        let mut push = |sym: &str, n: usize| {
            out.push_str(sym);
            if n > 1 {
                out.push_str(&n.to_string());
            }
        };
        if let Some(c) = counts.remove("C") {
            push("C", c);
            if let Some(h) = counts.remove("H") {
                push("H", h);
            }
        }
        for (sym, n) in counts {
            push(sym, n);
        }
        out
    }
}

/// Symmetric matrix of topological distances; `None` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Option<usize>>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carbon_chain(n: usize) -> MoleculeGraph {
        let atoms = (0..n).map(|_| Atom::new(Element::C)).collect();
        let bonds = (1..n).map(|i| Bond::new(i - 1, i, BondOrder::Single)).collect();
        MoleculeGraph::new(atoms, bonds, None).unwrap()
    }

    #[test]
    fn rejects_empty_graph() {
        assert_eq!(MoleculeGraph::new(vec![], vec![], None), Err(MolError::EmptyGraph));
    }

    #[test]
    fn rejects_bad_bonds() {
        let atoms = vec![Atom::new(Element::C), Atom::new(Element::C)];
        let err = MoleculeGraph::new(atoms.clone(), vec![Bond::new(0, 2, BondOrder::Single)], None);
        assert!(matches!(err, Err(MolError::BondIndexOutOfRange { index: 2, atoms: 2, .. })));
        let err = MoleculeGraph::new(atoms.clone(), vec![Bond::new(1, 1, BondOrder::Single)], None);
        assert!(matches!(err, Err(MolError::SelfBond { atom: 1, .. })));
        let dup = vec![Bond::new(0, 1, BondOrder::Single), Bond::new(1, 0, BondOrder::Double)];
        assert!(matches!(MoleculeGraph::new(atoms, dup, None), Err(MolError::DuplicateBond { a: 0, b: 1, .. })));
    }

    #[test]
    fn rejects_partial_positions() {
        let atoms = vec![Atom::new(Element::C).with_position([0.0; 3]), Atom::new(Element::C)];
        assert!(matches!(
            MoleculeGraph::new(atoms, vec![], None),
            Err(MolError::MixedDimensionality { with_positions: 1, atoms: 2 })
        ));
    }

    #[test]
    fn valence_limits() {
        // pentavalent carbon
        let mut atoms = vec![Atom::new(Element::C)];
        atoms.extend((0..5).map(|_| Atom::new(Element::H)));
        let bonds: Vec<_> = (1..6).map(|i| Bond::new(0, i, BondOrder::Single)).collect();
        assert!(matches!(
            MoleculeGraph::new(atoms.clone(), bonds.clone(), None),
            Err(MolError::ValenceViolation { atom: 0, valence: 5, max: 4, .. })
        ));
        // four bonds on N is fine only for N+
        let mut atoms = vec![Atom::new(Element::N)];
        atoms.extend((0..4).map(|_| Atom::new(Element::H)));
        let bonds: Vec<_> = (1..5).map(|i| Bond::new(0, i, BondOrder::Single)).collect();
        assert!(MoleculeGraph::new(atoms.clone(), bonds.clone(), None).is_err());
        atoms[0].formal_charge = 1;
        assert!(MoleculeGraph::new(atoms, bonds, None).is_ok());
    }

    #[test]
    fn aromatic_bonds_count_one_and_a_half() {
        // carbon with three aromatic bonds: floor(4.5) = 4, allowed
        let atoms = vec![Atom::new(Element::C).with_aromatic(true); 4];
        let bonds: Vec<_> = (1..4).map(|i| Bond::new(0, i, BondOrder::Aromatic)).collect();
        assert!(MoleculeGraph::new(atoms.clone(), bonds.clone(), None).is_ok());
        // plus one single bond: floor(5.5) = 5 > 4
        let mut atoms = atoms;
        atoms.push(Atom::new(Element::C));
        let mut bonds = bonds;
        bonds.push(Bond::new(0, 4, BondOrder::Single));
        assert!(MoleculeGraph::new(atoms, bonds, None).is_err());
    }

    #[test]
    fn bond_list_order_is_irrelevant() {
        let mut atoms = vec![Atom::new(Element::O)];
        atoms.extend((0..2).map(|_| Atom::new(Element::H)));
        let b = vec![Bond::new(0, 1, BondOrder::Single), Bond::new(2, 0, BondOrder::Single)];
        let mut r = b.clone();
        r.reverse();
        assert_eq!(MoleculeGraph::new(atoms.clone(), b, None), MoleculeGraph::new(atoms, r, None));
    }

    #[test]
    fn distances_on_small_graphs() {
        let two = carbon_chain(2);
        assert_eq!(two.topological_distances().get(0, 1), Some(1));
        let four = carbon_chain(4);
        let d = four.topological_distances();
        assert_eq!(d.get(0, 3), Some(3));
        assert_eq!(d.get(3, 0), Some(3));
        assert_eq!(d.get(2, 2), Some(0));

        let atoms = vec![Atom::new(Element::C); 4];
        let bonds = vec![Bond::new(0, 1, BondOrder::Single), Bond::new(2, 3, BondOrder::Single)];
        let split = MoleculeGraph::new(atoms, bonds, None).unwrap();
        let d = split.topological_distances();
        assert_eq!(d.get(0, 2), None);
        assert_eq!(d.get(1, 3), None);
        assert_eq!(d.get(2, 3), Some(1));
        assert_eq!(split.connected_components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn permutation_preserves_bond_multiset() {
        let g = carbon_chain(5);
        let p = g.permuted(&[4, 2, 0, 1, 3]);
        assert_eq!(p.bond_count(), 4);
        assert_eq!(p.bond_between(4, 2), Some(BondOrder::Single));
        assert_eq!(p.bond_between(3, 1), Some(BondOrder::Single));
    }

    #[test]
    fn hill_formula() {
        let atoms = vec![
            Atom::new(Element::O),
            Atom::new(Element::C),
            Atom::new(Element::H),
            Atom::new(Element::C),
            Atom::new(Element::Cl),
        ];
        let g = MoleculeGraph::new(atoms, vec![], None).unwrap();
        assert_eq!(g.formula(), "C2HClO");
    }
}
