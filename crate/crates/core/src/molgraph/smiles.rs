use std::collections::BTreeMap;

use super::element::Element;
use super::graph::{Atom, Bond, BondOrder, MoleculeGraph};
use super::MolError;

/// Implicit hydrogen count for an organic-subset atom written without brackets.
///
/// `explicit_valence` counts written bonds as single 1, double 2, triple 3 and
/// aromatic 1. Aromatic atoms reserve one extra unit for the ring π system and
/// only ever use their lowest default valence.
pub fn implicit_hydrogens(element: Element, aromatic: bool, explicit_valence: u32) -> u32 {
    let valences = element.default_valences();
    if valences.is_empty() {
        return 0;
    }
    if aromatic {
        let used = explicit_valence + 1;
        return valences[0].saturating_sub(used);
    }
    valences.iter().find(|&&v| v >= explicit_valence).map_or(0, |v| v - explicit_valence)
}

pub(crate) fn smiles_valence_units(order: BondOrder) -> u32 {
    match order {
        BondOrder::Single | BondOrder::Aromatic => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
    }
}

#[derive(Debug)]
struct ParsedAtom {
    element: Element,
    charge: i8,
    aromatic: bool,
    /// `Some` for bracket atoms, which never receive implicit hydrogens.
    hydrogens: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondSymbol {
    fn order(self) -> BondOrder {
        match self {
            BondSymbol::Single => BondOrder::Single,
            BondSymbol::Double => BondOrder::Double,
            BondSymbol::Triple => BondOrder::Triple,
            BondSymbol::Aromatic => BondOrder::Aromatic,
        }
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<ParsedAtom>,
    bonds: Vec<(usize, usize, Option<BondSymbol>)>,
    rings: BTreeMap<String, (usize, Option<BondSymbol>)>,
}

/// Parses the supported SMILES subset into a graph with explicit hydrogens.
///
/// Stereo markers (`/`, `\`, `@`, `@@`) and isotope labels are accepted and dropped.
pub fn parse_smiles(text: &str) -> Result<MoleculeGraph, MolError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(MolError::EmptyInput);
    }
    let mut p = Parser { bytes: text.as_bytes(), pos: 0, atoms: Vec::new(), bonds: Vec::new(), rings: BTreeMap::new() };
    p.run()?;
    p.into_graph()
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn unexpected(&self, offset: usize) -> MolError {
        let ch = std::str::from_utf8(&self.bytes[offset..]).ok().and_then(|s| s.chars().next()).unwrap_or('?');
        MolError::UnexpectedCharacter { offset, ch }
    }

    fn run(&mut self) -> Result<(), MolError> {
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(Option<usize>, usize)> = Vec::new();
        let mut pending: Option<(BondSymbol, usize)> = None;

        while let Some(c) = self.peek() {
            let offset = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.unexpected(offset));
                    }
                    branches.push((prev, offset));
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.unexpected(offset));
                    }
                    let (restored, _) = branches.pop().ok_or(MolError::UnbalancedParenthesis(offset))?;
                    prev = restored;
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected(offset));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected(offset));
                    }
                    let sym = match c {
                        b'=' => BondSymbol::Double,
                        b'#' => BondSymbol::Triple,
                        b':' => BondSymbol::Aromatic,
                        _ => BondSymbol::Single,
                    };
                    pending = Some((sym, offset));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return Err(self.unexpected(offset));
                    };
                    let label = self.ring_label()?;
                    let sym = pending.take().map(|(s, _)| s);
                    match self.rings.remove(&label) {
                        Some((open_atom, open_sym)) => {
                            let sym = match (open_sym, sym) {
                                (Some(a), Some(b)) if a != b => return Err(MolError::ConflictingRingBond(label)),
                                (a, b) => a.or(b),
                            };
                            self.bonds.push((open_atom, atom, sym));
                        }
                        None => {
                            self.rings.insert(label, (atom, sym));
                        }
                    }
                }
                _ => {
                    let atom = self.atom()?;
                    if let Some(p) = prev {
                        self.bonds.push((p, atom, pending.take().map(|(s, _)| s)));
                    } else if let Some((_, off)) = pending {
                        return Err(self.unexpected(off));
                    }
                    prev = Some(atom);
                }
            }
        }
        if let Some((_, off)) = pending {
            return Err(self.unexpected(off));
        }
        if let Some((_, off)) = branches.last() {
            return Err(MolError::UnbalancedParenthesis(*off));
        }
        if let Some(label) = self.rings.keys().next() {
            return Err(MolError::UnclosedRingBond(label.clone()));
        }
        Ok(())
    }

    fn ring_label(&mut self) -> Result<String, MolError> {
        let start = self.pos;
        if self.bytes[self.pos] == b'%' {
            let digits = self.bytes.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(((d[0] - b'0') as u32 * 10 + (d[1] - b'0') as u32).to_string())
                }
                _ => Err(self.unexpected(start)),
            }
        } else {
            self.pos += 1;
            Ok((self.bytes[start] as char).to_string())
        }
    }

    fn push_atom(&mut self, atom: ParsedAtom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn atom(&mut self) -> Result<usize, MolError> {
        let offset = self.pos;
        let c = self.bytes[offset];
        if c == b'[' {
            return self.bracket_atom();
        }
        let two = self.bytes.get(offset..offset + 2);
        let (element, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => (Element::Cl, false, 2),
            (b'B', Some(b"Br")) => (Element::Br, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (c, _) if c.is_ascii_alphabetic() || c == b'*' => {
                return Err(MolError::UnknownAtomSymbol { offset, symbol: (c as char).to_string() });
            }
            _ => return Err(self.unexpected(offset)),
        };
        self.pos += len;
        Ok(self.push_atom(ParsedAtom { element, charge: 0, aromatic, hydrogens: None }))
    }

    fn bracket_atom(&mut self) -> Result<usize, MolError> {
        let open = self.pos;
        let close = self.bytes[open..].iter().position(|&b| b == b']').map(|k| open + k).ok_or(
            MolError::UnknownAtomSymbol {
                offset: open,
                symbol: String::from_utf8_lossy(&self.bytes[open..]).into_owned(),
            },
        )?;
        let body = &self.bytes[open + 1..close];
        let mut i = 0;
        // isotope label, dropped
        while i < body.len() && body[i].is_ascii_digit() {
            i += 1;
        }
        let sym_start = i;
        let unknown = |end: usize| MolError::UnknownAtomSymbol {
            offset: open + 1 + sym_start,
            symbol: String::from_utf8_lossy(&body[sym_start..end.min(body.len())]).into_owned(),
        };
        if i >= body.len() || !body[i].is_ascii_alphabetic() {
            return Err(unknown(i + 1));
        }
        let (element, aromatic) = if body[i].is_ascii_lowercase() {
            let (e, len) = if body[i..].starts_with(b"se") {
                (Element::Se, 2)
            } else {
                let e = match body[i] {
                    b'b' => Element::B,
                    b'c' => Element::C,
                    b'n' => Element::N,
                    b'o' => Element::O,
                    b'p' => Element::P,
                    b's' => Element::S,
                    _ => return Err(unknown(i + 1)),
                };
                (e, 1)
            };
            i += len;
            (e, true)
        } else {
            let two = body.get(i..i + 2).and_then(|s| std::str::from_utf8(s).ok()).and_then(Element::from_symbol);
            let two = two.filter(|_| body[i + 1].is_ascii_lowercase());
            match two {
                Some(e) => {
                    i += 2;
                    (e, false)
                }
                None => {
                    let one = Element::from_symbol(std::str::from_utf8(&body[i..i + 1]).unwrap_or(""));
                    match one {
                        Some(e) if !body.get(i + 1).is_some_and(|b| b.is_ascii_lowercase()) => {
                            i += 1;
                            (e, false)
                        }
                        _ => return Err(unknown(i + 2)),
                    }
                }
            }
        };
        // chirality, dropped
        while i < body.len() && body[i] == b'@' {
            i += 1;
        }
        let mut hydrogens = 0u32;
        if i < body.len() && body[i] == b'H' {
            i += 1;
            let start = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            hydrogens = if start == i {
                1
            } else {
                std::str::from_utf8(&body[start..i])
                    .expect("digits")
                    .parse()
                    .map_err(|_| self.unexpected(open + 1 + start))?
            };
        }
        let mut charge: i32 = 0;
        if i < body.len() && (body[i] == b'+' || body[i] == b'-') {
            let sign = if body[i] == b'+' { 1 } else { -1 };
            let sign_char = body[i];
            i += 1;
            let start = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if start != i {
                let mag: i32 = std::str::from_utf8(&body[start..i]).expect("digits").parse().unwrap_or(i32::MAX);
                charge = sign * mag;
            } else {
                let mut mag = 1;
                while i < body.len() && body[i] == sign_char {
                    mag += 1;
                    i += 1;
                }
                charge = sign * mag;
            }
        }
        if i != body.len() {
            return Err(self.unexpected(open + 1 + i));
        }
        if !(-4..=4).contains(&charge) {
            return Err(MolError::ChargeOutOfRange {
                atom: self.atoms.len(),
                charge: charge.clamp(-128, 127) as i8,
                line: None,
            });
        }
        self.pos = close + 1;
        Ok(self.push_atom(ParsedAtom { element, charge: charge as i8, aromatic, hydrogens: Some(hydrogens) }))
    }

    fn into_graph(self) -> Result<MoleculeGraph, MolError> {
        let mut atoms: Vec<Atom> =
            self.atoms.iter().map(|a| Atom::new(a.element).with_charge(a.charge).with_aromatic(a.aromatic)).collect();
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|&(a, b, sym)| {
                let order = match sym {
                    Some(s) => s.order(),
                    None if self.atoms[a].aromatic && self.atoms[b].aromatic => BondOrder::Aromatic,
                    None => BondOrder::Single,
                };
                Bond::new(a, b, order)
            })
            .collect();

        let mut valence = vec![0u32; self.atoms.len()];
        for bond in &bonds {
            let units = smiles_valence_units(bond.order);
            valence[bond.a] += units;
            valence[bond.b] += units;
        }
        for (i, parsed) in self.atoms.iter().enumerate() {
            let h = match parsed.hydrogens {
                Some(h) => h,
                None => implicit_hydrogens(parsed.element, parsed.aromatic, valence[i]),
            };
            for _ in 0..h {
                atoms.push(Atom::new(Element::H));
                bonds.push(Bond::new(i, atoms.len() - 1, BondOrder::Single));
            }
        }
        MoleculeGraph::new(atoms, bonds, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heavy_and_h(g: &MoleculeGraph) -> (usize, usize) {
        let h = g.atoms().iter().filter(|a| a.element == Element::H).count();
        (g.atom_count() - h, h)
    }

    #[test]
    fn methane_gets_four_hydrogens() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(g.atom_count(), 5);
        assert_eq!(g.bond_count(), 4);
        assert_eq!(g.hydrogen_count(0), 4);
    }

    #[test]
    fn cyclopropane_ring() {
        let g = parse_smiles("C1CC1").unwrap();
        let cc =
            g.bonds().iter().filter(|b| g.atom(b.a).element == Element::C && g.atom(b.b).element == Element::C).count();
        assert_eq!(cc, 3);
        assert_eq!(heavy_and_h(&g), (3, 6));
    }

    #[test]
    fn unclosed_ring() {
        assert_eq!(parse_smiles("C1CC"), Err(MolError::UnclosedRingBond("1".into())));
        assert_eq!(parse_smiles("C%12CC"), Err(MolError::UnclosedRingBond("12".into())));
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse_smiles("   "), Err(MolError::EmptyInput));
        assert!(matches!(parse_smiles("CC("), Err(MolError::UnbalancedParenthesis(2))));
        assert!(matches!(parse_smiles("CC)C"), Err(MolError::UnbalancedParenthesis(2))));
        assert!(matches!(parse_smiles("CXC"), Err(MolError::UnknownAtomSymbol { offset: 1, .. })));
        assert!(matches!(parse_smiles("C[Xe]"), Err(MolError::UnknownAtomSymbol { .. })));
        assert!(matches!(parse_smiles("C=1CC-1"), Err(MolError::ConflictingRingBond(_))));
        assert!(matches!(parse_smiles("C[NH4+"), Err(MolError::UnknownAtomSymbol { .. })));
        assert!(matches!(parse_smiles("=C"), Err(MolError::UnexpectedCharacter { offset: 0, ch: '=' })));
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("[NH4+]").unwrap();
        assert_eq!(g.atom(0).formal_charge, 1);
        assert_eq!(g.hydrogen_count(0), 4);
        let g = parse_smiles("[O-]C(=O)C").unwrap();
        assert_eq!(g.atom(0).formal_charge, -1);
        assert_eq!(g.hydrogen_count(0), 0);
        let g = parse_smiles("[Fe]").map(|_| ()).unwrap_err();
        assert!(matches!(g, MolError::UnknownAtomSymbol { .. }));
        let g = parse_smiles("[13CH3][C@@H](Cl)Br").unwrap();
        assert_eq!(heavy_and_h(&g), (4, 4));
        let g = parse_smiles("[Cu++]").map(|_| ()).unwrap_err();
        assert!(matches!(g, MolError::UnknownAtomSymbol { .. }));
        let g = parse_smiles("[Mg++]").unwrap();
        assert_eq!(g.atom(0).formal_charge, 2);
    }

    #[test]
    fn aromatic_rings() {
        let benzene = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(heavy_and_h(&benzene), (6, 6));
        assert!(benzene.bonds().iter().filter(|b| b.order == BondOrder::Aromatic).count() == 6);
        let pyridine = parse_smiles("c1ccncc1").unwrap();
        assert_eq!(heavy_and_h(&pyridine), (6, 5));
        let pyrrole = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(heavy_and_h(&pyrrole), (5, 5));
        let thiophene = parse_smiles("c1ccsc1").unwrap();
        assert_eq!(heavy_and_h(&thiophene), (5, 4));
        let biphenyl = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(biphenyl.bond_between(5, 6), Some(BondOrder::Single));
    }

    #[test]
    fn stereo_markers_are_dropped() {
        let a = parse_smiles("F/C=C/F").unwrap();
        let b = parse_smiles("FC=CF").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ring_bond_symbol_on_either_side() {
        let a = parse_smiles("C=1CCCCC1").unwrap();
        let b = parse_smiles("C1CCCCC=1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bond_between(0, 5), Some(BondOrder::Double));
    }

    #[test]
    fn hypervalent_defaults() {
        // sulfur in DMSO uses valence 4
        let g = parse_smiles("CS(=O)C").unwrap();
        assert_eq!(g.hydrogen_count(1), 0);
        let g = parse_smiles("OP(=O)(O)O").unwrap();
        assert_eq!(g.hydrogen_count(1), 0);
    }

    #[test]
    fn disconnected_components() {
        let g = parse_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!(g.atom_count(), 2);
        assert_eq!(g.connected_components().len(), 2);
    }
}
