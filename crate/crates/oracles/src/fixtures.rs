//! Small molecules shared by the canonicalization and fingerprint checks.
//!
//! Every entry has at most twelve heavy atoms, so the exhaustive feature
//! enumeration in [`crate::features`] stays cheap.

pub const FIXTURE_SMILES: [(&str, &str); 20] = [
    ("ethanol", "CCO"),
    ("acetic acid", "CC(=O)O"),
    ("acetate", "CC(=O)[O-]"),
    ("acetonitrile", "CC#N"),
    ("butadiene", "C=CC=C"),
    ("isobutyric acid", "CC(C)C(=O)O"),
    ("glycine", "NCC(=O)O"),
    ("tetramethylammonium", "C[N+](C)(C)C"),
    ("trifluoroacetic acid", "FC(F)(F)C(=O)O"),
    ("dimethyl sulfoxide", "CS(C)=O"),
    ("cyclohexane", "C1CCCCC1"),
    ("cyclopentanone", "O=C1CCCC1"),
    ("3-hydroxyoxolane", "OC1CCOC1"),
    ("norbornane", "C1CC2CCC1C2"),
    ("benzene", "c1ccccc1"),
    ("toluene", "Cc1ccccc1"),
    ("pyridine", "c1ccncc1"),
    ("pyrrole", "c1cc[nH]c1"),
    ("naphthalene", "c1ccc2ccccc2c1"),
    ("salicylic acid", "OC(=O)c1ccccc1O"),
];
