//! Molecule graph model with SDF V2000 and SMILES readers/writers.
//!
//! Graphs are immutable after construction. Aromaticity comes only from the
//! input annotations (lowercase SMILES atoms, SDF bond type 4); there is no
//! perception pass. SMILES parsing always materializes implicit hydrogens as
//! explicit `H` atoms so downstream code sees a single graph form.

mod canon;
mod element;
mod graph;
mod sdf;
mod smiles;

pub use canon::canonical_smiles;
pub use element::{Element, UnknownElement};
pub use graph::{Atom, Bond, BondOrder, DistanceMatrix, MoleculeGraph, Position};
pub use sdf::{parse_sdf, parse_sdf_records, write_sdf};
pub use smiles::{implicit_hydrogens, parse_smiles};

use thiserror::Error;

fn at(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MolError {
    #[error("molecule has no atoms")]
    EmptyGraph,
    #[error("malformed counts line{}: {reason}", at(.line))]
    MalformedCounts { line: Option<usize>, reason: String },
    #[error("atom block error{}: {reason}", at(.line))]
    AtomBlock { line: Option<usize>, reason: String },
    #[error("bond block error{}: {reason}", at(.line))]
    BondBlock { line: Option<usize>, reason: String },
    #[error("unknown bond order '{token}'{}", at(.line))]
    UnknownBondOrder { line: Option<usize>, token: String },
    #[error("bond references atom {index} but molecule has {atoms} atoms{}", at(.line))]
    BondIndexOutOfRange { line: Option<usize>, index: usize, atoms: usize },
    #[error("bond from atom {atom} to itself{}", at(.line))]
    SelfBond { line: Option<usize>, atom: usize },
    #[error("duplicate bond {a}-{b}{}", at(.line))]
    DuplicateBond { line: Option<usize>, a: usize, b: usize },
    #[error("atom {atom} charge {charge} outside [-4, 4]{}", at(.line))]
    ChargeOutOfRange { atom: usize, charge: i8, line: Option<usize> },
    #[error("{with_positions} of {atoms} atoms carry coordinates; need all or none")]
    MixedDimensionality { with_positions: usize, atoms: usize },
    #[error("atom {atom} ({element}) has valence {valence}, maximum {max}{}", at(.line))]
    ValenceViolation { atom: usize, element: Element, valence: u32, max: u32, line: Option<usize> },
    #[error("missing 'M  END' terminator")]
    MissingEnd,
    #[error("unsupported molfile version '{0}' (only V2000 is read)")]
    UnsupportedVersion(String),
    #[error("empty SMILES input")]
    EmptyInput,
    #[error("unbalanced parenthesis at offset {0}")]
    UnbalancedParenthesis(usize),
    #[error("ring bond {0} never closed")]
    UnclosedRingBond(String),
    #[error("unknown atom symbol '{symbol}' at offset {offset}")]
    UnknownAtomSymbol { offset: usize, symbol: String },
    #[error("unexpected character '{ch}' at offset {offset}")]
    UnexpectedCharacter { offset: usize, ch: char },
    #[error("conflicting bond symbols on ring closure {0}")]
    ConflictingRingBond(String),
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("{0} atoms or bonds exceed the V2000 limit of 999")]
    TooManyAtoms(usize),
    #[error("coordinate {0} does not fit the %10.4f field")]
    CoordinateOverflow(f64),
}
