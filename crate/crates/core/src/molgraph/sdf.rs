use std::fmt::Write as _;

use super::element::Element;
use super::graph::{Atom, Bond, BondOrder, MoleculeGraph};
use super::MolError;

const V2000_LIMIT: usize = 999;

fn charge_from_code(code: i32) -> Option<i8> {
    match code {
        0 | 4 => Some(0),
        1 => Some(3),
        2 => Some(2),
        3 => Some(1),
        5 => Some(-1),
        6 => Some(-2),
        7 => Some(-3),
        _ => None,
    }
}

fn charge_to_code(charge: i8) -> i32 {
    match charge {
        3 => 1,
        2 => 2,
        1 => 3,
        -1 => 5,
        -2 => 6,
        -3 => 7,
        _ => 0,
    }
}

fn field(line: &str, start: usize, end: usize) -> Option<&str> {
    line.get(start..end.min(line.len())).filter(|s| !s.is_empty())
}

/// Splits a multi-record SD file on `$$$$` and parses every record.
pub fn parse_sdf_records(text: &str) -> Vec<Result<MoleculeGraph, MolError>> {
    let mut out = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim_end() == "$$$$" {
            out.push(parse_sdf(&current));
            current.clear();
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.trim().is_empty() {
        out.push(parse_sdf(&current));
    }
    out
}

/// Parses one V2000 molfile (trailing data items and `$$$$` are ignored).
///
/// Line numbers in errors are 1-based within `text`.
pub fn parse_sdf(text: &str) -> Result<MoleculeGraph, MolError> {
    let lines: Vec<&str> = text.lines().collect();
    let counts_line = 4;
    let counts = lines
        .get(counts_line - 1)
        .ok_or(MolError::MalformedCounts { line: Some(counts_line), reason: "missing counts line".into() })?;
    if counts.contains("V3000") {
        return Err(MolError::UnsupportedVersion("V3000".into()));
    }
    let parse_count = |start: usize| -> Result<usize, MolError> {
        field(counts, start, start + 3).and_then(|s| s.trim().parse::<usize>().ok()).ok_or_else(|| {
            MolError::MalformedCounts {
                line: Some(counts_line),
                reason: format!("expected a 3-wide integer at column {}", start + 1),
            }
        })
    };
    let n_atoms = parse_count(0)?;
    let n_bonds = parse_count(3)?;
    if n_atoms == 0 {
        return Err(MolError::EmptyGraph);
    }

    let mut atoms = Vec::with_capacity(n_atoms);
    for k in 0..n_atoms {
        let line_no = counts_line + 1 + k;
        let line = lines.get(line_no - 1).ok_or_else(|| MolError::AtomBlock {
            line: Some(line_no),
            reason: format!("atom block truncated: expected {n_atoms} atoms"),
        })?;
        atoms.push(parse_atom_line(line, line_no)?);
    }

    let mut bonds = Vec::with_capacity(n_bonds);
    let mut bond_lines = Vec::with_capacity(n_bonds);
    for k in 0..n_bonds {
        let line_no = counts_line + 1 + n_atoms + k;
        let line = lines.get(line_no - 1).ok_or_else(|| MolError::BondBlock {
            line: Some(line_no),
            reason: format!("bond block truncated: expected {n_bonds} bonds"),
        })?;
        let (a, b, order) = parse_bond_line(line, line_no)?;
        for idx in [a, b] {
            if idx == 0 || idx > n_atoms {
                return Err(MolError::BondIndexOutOfRange { line: Some(line_no), index: idx, atoms: n_atoms });
            }
        }
        bonds.push(Bond::new(a - 1, b - 1, order));
        bond_lines.push(line_no);
    }

    let mut saw_end = false;
    let mut charges_reset = false;
    for (offset, line) in lines.iter().enumerate().skip(counts_line + n_atoms + n_bonds) {
        let line_no = offset + 1;
        if line.starts_with("M  END") {
            saw_end = true;
            break;
        }
        if line.starts_with("M  V30") {
            return Err(MolError::UnsupportedVersion("V3000".into()));
        }
        if let Some(rest) = line.strip_prefix("M  CHG") {
            if !charges_reset {
                for atom in &mut atoms {
                    atom.formal_charge = 0;
                }
                charges_reset = true;
            }
            apply_charge_property(rest, &mut atoms, line_no)?;
        }
    }
    if !saw_end {
        return Err(MolError::MissingEnd);
    }

    for bond in &bonds {
        if bond.order == BondOrder::Aromatic {
            atoms[bond.a].aromatic = true;
            atoms[bond.b].aromatic = true;
        }
    }

    let name = lines.first().map(|l| l.trim_end()).filter(|l| !l.is_empty()).map(str::to_string);
    MoleculeGraph::build(atoms, bonds, name, &|i| Some(counts_line + 1 + i), &|k| bond_lines.get(k).copied())
}

fn parse_atom_line(line: &str, line_no: usize) -> Result<Atom, MolError> {
    let err = |reason: String| MolError::AtomBlock { line: Some(line_no), reason };
    let fixed = || -> Option<([f64; 3], &str, i32)> {
        let x = field(line, 0, 10)?.trim().parse().ok()?;
        let y = field(line, 10, 20)?.trim().parse().ok()?;
        let z = field(line, 20, 30)?.trim().parse().ok()?;
        let sym = field(line, 31, 34)?.trim();
        let chg = match field(line, 36, 39) {
            Some(s) => s.trim().parse().ok()?,
            None => 0,
        };
        Some(([x, y, z], sym, chg))
    };
    let loose = || -> Option<([f64; 3], &str, i32)> {
        let t: Vec<&str> = line.split_whitespace().collect();
        let x = t.first()?.parse().ok()?;
        let y = t.get(1)?.parse().ok()?;
        let z = t.get(2)?.parse().ok()?;
        let sym = *t.get(3)?;
        let chg = match t.get(5) {
            Some(s) => s.parse().ok()?,
            None => 0,
        };
        Some(([x, y, z], sym, chg))
    };
    let (pos, sym, code) = fixed().or_else(loose).ok_or_else(|| err(format!("cannot read atom line '{line}'")))?;
    let element = Element::from_symbol(sym).ok_or_else(|| err(format!("unknown element '{sym}'")))?;
    let charge = charge_from_code(code).ok_or_else(|| err(format!("invalid charge code {code}")))?;
    Ok(Atom::new(element).with_charge(charge).with_position(pos))
}

fn parse_bond_line(line: &str, line_no: usize) -> Result<(usize, usize, BondOrder), MolError> {
    let fixed = || -> Option<(usize, usize, &str)> {
        let a = field(line, 0, 3)?.trim().parse().ok()?;
        let b = field(line, 3, 6)?.trim().parse().ok()?;
        let t = field(line, 6, 9)?.trim();
        Some((a, b, t))
    };
    let loose = || -> Option<(usize, usize, &str)> {
        let t: Vec<&str> = line.split_whitespace().collect();
        Some((t.first()?.parse().ok()?, t.get(1)?.parse().ok()?, *t.get(2)?))
    };
    let (a, b, token) = fixed().or_else(loose).ok_or_else(|| MolError::BondBlock {
        line: Some(line_no),
        reason: format!("cannot read bond line '{line}'"),
    })?;
    let order = token
        .parse::<u8>()
        .ok()
        .and_then(BondOrder::from_mdl_code)
        .ok_or_else(|| MolError::UnknownBondOrder { line: Some(line_no), token: token.to_string() })?;
    Ok((a, b, order))
}

fn apply_charge_property(rest: &str, atoms: &mut [Atom], line_no: usize) -> Result<(), MolError> {
    let err = |reason: &str| MolError::AtomBlock { line: Some(line_no), reason: reason.to_string() };
    let nums: Vec<i64> = rest
        .split_whitespace()
        .map(|t| t.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| err("malformed M  CHG entry"))?;
    let (&count, pairs) = nums.split_first().ok_or_else(|| err("empty M  CHG entry"))?;
    if count < 0 || pairs.len() != 2 * count as usize {
        return Err(err("M  CHG count does not match entries"));
    }
    for pair in pairs.chunks(2) {
        let idx = pair[0];
        if idx < 1 || idx as usize > atoms.len() {
            return Err(MolError::BondIndexOutOfRange {
                line: Some(line_no),
                index: idx.max(0) as usize,
                atoms: atoms.len(),
            });
        }
        let charge = i8::try_from(pair[1]).map_err(|_| err("charge out of range"))?;
        atoms[idx as usize - 1].formal_charge = charge;
    }
    Ok(())
}

/// Writes `mol` as a V2000 molfile terminated by `M  END`.
///
/// Graphs without positions are written with all-zero coordinates.
pub fn write_sdf(mol: &MoleculeGraph) -> Result<String, MolError> {
    let n_atoms = mol.atom_count();
    let n_bonds = mol.bond_count();
    if n_atoms > V2000_LIMIT || n_bonds > V2000_LIMIT {
        return Err(MolError::TooManyAtoms(n_atoms.max(n_bonds)));
    }
    let mut out = String::new();
    let name = mol.name().unwrap_or("").replace(['\n', '\r'], " ");
    let dim = if mol.has_positions() { "3D" } else { "2D" };
    writeln!(out, "{name}").unwrap();
    writeln!(out, "  specbnch          {dim}").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "{n_atoms:>3}{n_bonds:>3}  0  0  0  0  0  0  0  0999 V2000").unwrap();
    for atom in mol.atoms() {
        let [x, y, z] = atom.position.unwrap_or([0.0; 3]);
        for c in [x, y, z] {
            if !(-9999.99995..9999.99995).contains(&c) {
                return Err(MolError::CoordinateOverflow(c));
            }
        }
        writeln!(
            out,
            "{x:>10.4}{y:>10.4}{z:>10.4} {:<3} 0{:>3}  0  0  0  0  0  0  0  0  0  0",
            atom.element.symbol(),
            charge_to_code(atom.formal_charge)
        )
        .unwrap();
    }
    for bond in mol.bonds() {
        writeln!(out, "{:>3}{:>3}{:>3}  0", bond.a + 1, bond.b + 1, bond.order.mdl_code()).unwrap();
    }
    let charged: Vec<(usize, i8)> = mol
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.formal_charge != 0)
        .map(|(i, a)| (i + 1, a.formal_charge))
        .collect();
    for chunk in charged.chunks(8) {
        write!(out, "M  CHG{:>3}", chunk.len()).unwrap();
        for (idx, chg) in chunk {
            write!(out, " {idx:>3} {chg:>3}").unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(out, "M  END").unwrap();
    Ok(out)
}
