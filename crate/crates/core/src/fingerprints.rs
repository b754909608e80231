//! Hashed path, topological-torsion and atom-pair bit fingerprints.
//!
//! Each feature is encoded as a byte string, hashed with seeded 64-bit FNV-1a
//! and folded onto `k_bits` bits. Features only set bits; counts are not kept.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{Atom, Element, MoleculeGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpError {
    #[error("cannot compare {0} and {1} fingerprints")]
    KindMismatch(FingerprintKind, FingerprintKind),
    #[error("fingerprint lengths differ: {0} vs {1} bits")]
    LengthMismatch(usize, usize),
    #[error("invalid fingerprint config: {0}")]
    BadConfig(String),
    #[error("invalid hex fingerprint: {0}")]
    BadHex(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerprintKind {
    Path,
    Torsion,
    AtomPair,
}

impl FingerprintKind {
    pub const ALL: [FingerprintKind; 3] = [FingerprintKind::Path, FingerprintKind::Torsion, FingerprintKind::AtomPair];

    fn tag(self) -> u8 {
        match self {
            FingerprintKind::Path => b'P',
            FingerprintKind::Torsion => b'T',
            FingerprintKind::AtomPair => b'A',
        }
    }
}

impl fmt::Display for FingerprintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FingerprintKind::Path => "path",
            FingerprintKind::Torsion => "torsion",
            FingerprintKind::AtomPair => "atom_pair",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FingerprintFields")]
pub struct FingerprintConfig {
    pub k_bits: usize,
    pub l_max: usize,
    pub hash_seed: u64,
    pub include_hydrogens: bool,
    /// Put the formal charge into the atom class as well as element and aromaticity.
    pub charge_in_class: bool,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FingerprintFields {
    k_bits: usize,
    l_max: usize,
    hash_seed: u64,
    include_hydrogens: bool,
    charge_in_class: bool,
}

impl Default for FingerprintFields {
    fn default() -> Self {
        let d = FingerprintConfig::default();
        FingerprintFields {
            k_bits: d.k_bits,
            l_max: d.l_max,
            hash_seed: d.hash_seed,
            include_hydrogens: d.include_hydrogens,
            charge_in_class: d.charge_in_class,
        }
    }
}

impl TryFrom<FingerprintFields> for FingerprintConfig {
    type Error = FpError;
    fn try_from(f: FingerprintFields) -> Result<Self, Self::Error> {
        let cfg = FingerprintConfig {
            k_bits: f.k_bits,
            l_max: f.l_max,
            hash_seed: f.hash_seed,
            include_hydrogens: f.include_hydrogens,
            charge_in_class: f.charge_in_class,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Default for FingerprintConfig {
    /// Seed 1 leaves every bundled test fixture free of hash collisions at 2048 bits.
    fn default() -> Self {
        FingerprintConfig { k_bits: 2048, l_max: 7, hash_seed: 1, include_hydrogens: false, charge_in_class: false }
    }
}

impl FingerprintConfig {
    pub fn validate(&self) -> Result<(), FpError> {
        if !self.k_bits.is_power_of_two() || self.k_bits < 8 {
            return Err(FpError::BadConfig(format!("k_bits {} must be a power of two >= 8", self.k_bits)));
        }
        if self.l_max == 0 {
            return Err(FpError::BadConfig("l_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Atom class: element and aromaticity, optionally charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomTypeClass {
    pub element: Element,
    pub aromatic: bool,
    pub charge: Option<i8>,
}

impl AtomTypeClass {
    pub fn of(atom: &Atom, with_charge: bool) -> Self {
        AtomTypeClass {
            element: atom.element,
            aromatic: atom.aromatic,
            charge: with_charge.then_some(atom.formal_charge),
        }
    }

    fn bytes(self) -> [u8; 3] {
        [self.element.atomic_number(), self.aromatic as u8, self.charge.map_or(0x80, |c| c as u8)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitFingerprint {
    kind: FingerprintKind,
    k_bits: usize,
    words: Vec<u64>,
}

impl BitFingerprint {
    pub fn empty(kind: FingerprintKind, k_bits: usize) -> Self {
        BitFingerprint { kind, k_bits, words: vec![0; k_bits.div_ceil(64)] }
    }

    pub fn kind(&self) -> FingerprintKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.k_bits
    }

    pub fn is_empty(&self) -> bool {
        self.k_bits == 0
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k_bits).filter(|&b| self.get(b))
    }

    /// Two hex digits per byte; byte `n` holds bits `8n..8n+7`, low bit first.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.k_bits / 4);
        for byte in 0..self.k_bits.div_ceil(8) {
            let b = (self.words[byte / 8] >> ((byte % 8) * 8)) as u8;
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn from_hex(kind: FingerprintKind, hex: &str) -> Result<Self, FpError> {
        if !hex.len().is_multiple_of(2) || hex.is_empty() {
            return Err(FpError::BadHex(format!("length {} is not a positive even number", hex.len())));
        }
        let k_bits = hex.len() * 4;
        let mut fp = BitFingerprint::empty(kind, k_bits);
        for (byte, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| FpError::BadHex("not ASCII".into()))?;
            let b = u8::from_str_radix(text, 16).map_err(|_| FpError::BadHex(format!("'{text}'")))?;
            fp.words[byte / 8] |= (b as u64) << ((byte % 8) * 8);
        }
        Ok(fp)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the seed's little-endian bytes followed by `data`.
pub fn fnv1a64(seed: u64, data: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in seed.to_le_bytes().iter().chain(data) {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// The graph the features are read from: heavy atoms only unless hydrogens are included.
struct FeatureGraph {
    classes: Vec<[u8; 3]>,
    adj: Vec<Vec<(usize, u8)>>,
}

impl FeatureGraph {
    fn new(mol: &MoleculeGraph, cfg: &FingerprintConfig) -> Self {
        let keep: Vec<Option<usize>> = {
            let mut next = 0;
            mol.atoms()
                .iter()
                .map(|a| {
                    (cfg.include_hydrogens || a.element != Element::H).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let mut classes = Vec::new();
        for (i, a) in mol.atoms().iter().enumerate() {
            if keep[i].is_some() {
                classes.push(AtomTypeClass::of(a, cfg.charge_in_class).bytes());
            }
        }
        let mut adj = vec![Vec::new(); classes.len()];
        for b in mol.bonds() {
            if let (Some(x), Some(y)) = (keep[b.a], keep[b.b]) {
                adj[x].push((y, b.order.mdl_code()));
                adj[y].push((x, b.order.mdl_code()));
            }
        }
        FeatureGraph { classes, adj }
    }

    /// Tag, bond count, then alternating atom classes and bond codes, read in the
    /// smaller of the path's two directions.
    fn path_key(&self, tag: u8, atoms: &[usize], bonds: &[u8]) -> Vec<u8> {
        let encode = |atoms: &mut dyn Iterator<Item = &usize>, bonds: &mut dyn Iterator<Item = &u8>| {
            let mut out = vec![tag, (atoms.size_hint().0 - 1) as u8];
            for (step, &a) in atoms.enumerate() {
                if step > 0 {
                    out.push(*bonds.next().expect("one bond between consecutive atoms"));
                }
                out.extend_from_slice(&self.classes[a]);
            }
            out
        };
        let forward = encode(&mut atoms.iter(), &mut bonds.iter());
        let backward = encode(&mut atoms.iter().rev(), &mut bonds.iter().rev());
        forward.min(backward)
    }

    fn simple_paths(&self, max_bonds: usize, mut visit: impl FnMut(&[usize], &[u8])) {
        fn walk(
            g: &FeatureGraph,
            atoms: &mut Vec<usize>,
            bonds: &mut Vec<u8>,
            max_bonds: usize,
            visit: &mut dyn FnMut(&[usize], &[u8]),
        ) {
            if !bonds.is_empty() {
                visit(atoms, bonds);
            }
            if bonds.len() == max_bonds {
                return;
            }
            let last = *atoms.last().expect("path is never empty");
            for &(next, order) in &g.adj[last] {
                if atoms.contains(&next) {
                    continue;
                }
                atoms.push(next);
                bonds.push(order);
                walk(g, atoms, bonds, max_bonds, visit);
                atoms.pop();
                bonds.pop();
            }
        }
        for start in 0..self.classes.len() {
            walk(self, &mut vec![start], &mut Vec::new(), max_bonds, &mut visit);
        }
    }

    fn distances_from(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.classes.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued atoms have a distance");
            for &(v, _) in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Distinct feature byte strings of one kind, before hashing.
pub fn raw_features(mol: &MoleculeGraph, kind: FingerprintKind, cfg: &FingerprintConfig) -> BTreeSet<Vec<u8>> {
    let g = FeatureGraph::new(mol, cfg);
    let mut out = BTreeSet::new();
    match kind {
        FingerprintKind::Path => {
            g.simple_paths(cfg.l_max, |atoms, bonds| {
                out.insert(g.path_key(kind.tag(), atoms, bonds));
            });
        }
        FingerprintKind::Torsion => {
            g.simple_paths(3, |atoms, bonds| {
                if bonds.len() == 3 {
                    out.insert(g.path_key(kind.tag(), atoms, bonds));
                }
            });
        }
        FingerprintKind::AtomPair => {
            for i in 0..g.classes.len() {
                let dist = g.distances_from(i);
                for (j, d) in dist.iter().enumerate().skip(i + 1) {
                    let Some(d) = d else { continue };
                    let (a, b) = (g.classes[i].min(g.classes[j]), g.classes[i].max(g.classes[j]));
                    let mut key = vec![kind.tag()];
                    key.extend_from_slice(&a);
                    key.extend_from_slice(&b);
                    key.extend_from_slice(&(*d as u32).to_le_bytes());
                    out.insert(key);
                }
            }
        }
    }
    out
}

pub fn fingerprint(mol: &MoleculeGraph, kind: FingerprintKind, cfg: &FingerprintConfig) -> BitFingerprint {
    let mut fp = BitFingerprint::empty(kind, cfg.k_bits);
    for key in raw_features(mol, kind, cfg) {
        fp.set((fnv1a64(cfg.hash_seed, &key) % cfg.k_bits as u64) as usize);
    }
    fp
}

pub fn path_fp(mol: &MoleculeGraph, cfg: &FingerprintConfig) -> BitFingerprint {
    fingerprint(mol, FingerprintKind::Path, cfg)
}

pub fn torsion_fp(mol: &MoleculeGraph, cfg: &FingerprintConfig) -> BitFingerprint {
    fingerprint(mol, FingerprintKind::Torsion, cfg)
}

pub fn atom_pair_fp(mol: &MoleculeGraph, cfg: &FingerprintConfig) -> BitFingerprint {
    fingerprint(mol, FingerprintKind::AtomPair, cfg)
}

/// `|a ∧ b| / (|a| + |b| - |a ∧ b|)`, 0 when both are empty.
pub fn tanimoto(a: &BitFingerprint, b: &BitFingerprint) -> Result<f64, FpError> {
    if a.kind != b.kind {
        return Err(FpError::KindMismatch(a.kind, b.kind));
    }
    if a.k_bits != b.k_bits {
        return Err(FpError::LengthMismatch(a.k_bits, b.k_bits));
    }
    let c: usize = a.words.iter().zip(&b.words).map(|(x, y)| (x & y).count_ones() as usize).sum();
    let union = a.count_ones() + b.count_ones() - c;
    Ok(if union == 0 { 0.0 } else { c as f64 / union as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpSimilarity {
    pub rdk_fp_sim: f64,
    pub torsion_sim: f64,
    pub atom_pair_sim: f64,
}

pub fn similarity(pred: &MoleculeGraph, truth: &MoleculeGraph, cfg: &FingerprintConfig) -> FpSimilarity {
    let sim =
        |kind| tanimoto(&fingerprint(pred, kind, cfg), &fingerprint(truth, kind, cfg)).expect("same kind and length");
    FpSimilarity {
        rdk_fp_sim: sim(FingerprintKind::Path),
        torsion_sim: sim(FingerprintKind::Torsion),
        atom_pair_sim: sim(FingerprintKind::AtomPair),
    }
}
