use crate::molgraph::{Atom, Bond, BondOrder, Element, MolError, MoleculeGraph};

/// Parses the 3D structure block:
///
/// ```text
/// atoms:
/// 0 C 0.0000 0.0000 0.0000
/// 1 O 1.4300 0.0000 0.0000 -1
/// bonds:
/// 0 1 1
/// ```
///
/// Atom lines are `index element x y z [charge]` with indices counting up from 0.
/// Bond lines are `a b order` with orders 1-3 and 4 for aromatic; aromatic bonds
/// mark both atoms aromatic. Blank lines are ignored. Line numbers in errors are 1-based.
pub fn parse_structure_text(text: &str) -> Result<MoleculeGraph, MolError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Atoms,
        Bonds,
    }
    let mut section = Section::None;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut atom_lines = Vec::new();
    let mut bonds = Vec::new();
    let mut bond_lines = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "atoms:" if section == Section::None => {
                section = Section::Atoms;
                continue;
            }
            "bonds:" if section == Section::Atoms => {
                section = Section::Bonds;
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::None => {
                return Err(MolError::AtomBlock { line: Some(line_no), reason: "expected 'atoms:'".into() });
            }
            Section::Atoms => {
                let err = |reason: String| MolError::AtomBlock { line: Some(line_no), reason };
                if fields.len() != 5 && fields.len() != 6 {
                    return Err(err(format!("expected 'index element x y z [charge]', got {} fields", fields.len())));
                }
                let index: usize = fields[0].parse().map_err(|_| err(format!("bad index '{}'", fields[0])))?;
                if index != atoms.len() {
                    return Err(err(format!("atom index {index} out of sequence, expected {}", atoms.len())));
                }
                let element: Element = fields[1].parse().map_err(|e| err(format!("{e}")))?;
                let mut xyz = [0.0; 3];
                for (k, f) in fields[2..5].iter().enumerate() {
                    xyz[k] = f
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(format!("bad coordinate '{f}'")))?;
                }
                let charge: i8 = match fields.get(5) {
                    Some(c) => c.parse().map_err(|_| err(format!("bad charge '{c}'")))?,
                    None => 0,
                };
                atoms.push(Atom::new(element).with_charge(charge).with_position(xyz));
                atom_lines.push(line_no);
            }
            Section::Bonds => {
                let err = |reason: String| MolError::BondBlock { line: Some(line_no), reason };
                if fields.len() != 3 {
                    return Err(err(format!("expected 'a b order', got {} fields", fields.len())));
                }
                let a: usize = fields[0].parse().map_err(|_| err(format!("bad atom index '{}'", fields[0])))?;
                let b: usize = fields[1].parse().map_err(|_| err(format!("bad atom index '{}'", fields[1])))?;
                let order =
                    fields[2].parse::<u8>().ok().and_then(BondOrder::from_mdl_code).ok_or_else(|| {
                        MolError::UnknownBondOrder { line: Some(line_no), token: fields[2].to_string() }
                    })?;
                for idx in [a, b] {
                    if idx >= atoms.len() {
                        return Err(MolError::BondIndexOutOfRange {
                            line: Some(line_no),
                            index: idx,
                            atoms: atoms.len(),
                        });
                    }
                }
                if order == BondOrder::Aromatic {
                    atoms[a] = atoms[a].clone().with_aromatic(true);
                    atoms[b] = atoms[b].clone().with_aromatic(true);
                }
                bonds.push(Bond::new(a, b, order));
                bond_lines.push(line_no);
            }
        }
    }
    if section == Section::None {
        return Err(MolError::EmptyGraph);
    }
    MoleculeGraph::build(atoms, bonds, None, &|i| atom_lines.get(i).copied(), &|i| bond_lines.get(i).copied())
}

/// Writes the block read by [`parse_structure_text`]. Coordinates use 4 decimals;
/// graphs without positions are written at the origin.
pub fn write_structure_text(mol: &MoleculeGraph) -> String {
    let mut out = String::from("atoms:\n");
    for (i, atom) in mol.atoms().iter().enumerate() {
        let [x, y, z] = atom.position.unwrap_or([0.0; 3]);
        out.push_str(&format!("{i} {} {x:.4} {y:.4} {z:.4}", atom.element));
        if atom.formal_charge != 0 {
            out.push_str(&format!(" {}", atom.formal_charge));
        }
        out.push('\n');
    }
    out.push_str("bonds:\n");
    for bond in mol.bonds() {
        out.push_str(&format!("{} {} {}\n", bond.a, bond.b, bond.order.mdl_code()));
    }
    out
}
