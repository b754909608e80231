//! Geometry diagnostics for generated 3D structures: parse validity, steric
//! clashes between non-bonded atoms and bond lengths outside a tolerance band.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{parse_sdf, BondOrder, Element, MolError, MoleculeGraph};
use crate::spectra::parse_structure_text;

/// The shipped van der Waals radius table.
pub const DEFAULT_RADII: &str = include_str!("../data/vdw_radii.toml");
/// The shipped reference bond-length table.
pub const DEFAULT_BOND_LENGTHS: &str = include_str!("../data/bond_lengths.toml");
const DATA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("structure has no 3D coordinates")]
    MissingCoordinates,
    #[error("no van der Waals radius for element {0}")]
    UnknownElementRadius(String),
    #[error("no reference length for {a}-{b} bond of order {order:?}")]
    UnknownBondReference { a: Element, b: Element, order: BondOrder },
    #[error("invalid geometry parameters: {0}")]
    BadParams(String),
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Which atom pairs to leave out of clash counting. All off by default, so every
/// non-bonded pair counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClashExclusions {
    /// Pairs two bonds apart.
    pub one_three: bool,
    /// Pairs three bonds apart.
    pub one_four: bool,
    /// Any pair involving a hydrogen.
    pub hydrogens: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryParams {
    alpha: f64,
    beta: f64,
    vdw_radii: BTreeMap<Element, f64>,
    bond_lengths: BTreeMap<(Element, Element, BondOrder), f64>,
    exclusions: ClashExclusions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiiFile {
    version: u32,
    radii: BTreeMap<Element, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BondFile {
    version: u32,
    bond: Vec<BondEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BondEntry {
    a: Element,
    b: Element,
    order: BondOrder,
    length: f64,
}

fn pair_key(a: Element, b: Element, order: BondOrder) -> (Element, Element, BondOrder) {
    if a <= b {
        (a, b, order)
    } else {
        (b, a, order)
    }
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams::from_tables(DEFAULT_RADII, DEFAULT_BOND_LENGTHS).expect("shipped tables are valid")
    }
}

impl GeometryParams {
    /// Builds parameters from radius and bond-length table texts (same layout as
    /// the shipped `data/*.toml` files), with alpha 0.65 and beta 0.20.
    pub fn from_tables(radii_toml: &str, bonds_toml: &str) -> Result<Self, GeomError> {
        let radii: RadiiFile =
            toml::from_str(radii_toml).map_err(|e| GeomError::BadParams(format!("radii table: {e}")))?;
        let bonds: BondFile =
            toml::from_str(bonds_toml).map_err(|e| GeomError::BadParams(format!("bond table: {e}")))?;
        for (what, v) in [("radii", radii.version), ("bond", bonds.version)] {
            if v != DATA_VERSION {
                return Err(GeomError::BadParams(format!("{what} table version {v}, expected {DATA_VERSION}")));
            }
        }
        let mut bond_lengths = BTreeMap::new();
        for e in bonds.bond {
            if bond_lengths.insert(pair_key(e.a, e.b, e.order), e.length).is_some() {
                return Err(GeomError::BadParams(format!("duplicate entry {}-{} {:?}", e.a, e.b, e.order)));
            }
        }
        let params = GeometryParams {
            alpha: 0.65,
            beta: 0.20,
            vdw_radii: radii.radii,
            bond_lengths,
            exclusions: ClashExclusions::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, GeomError> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self, GeomError> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_exclusions(mut self, exclusions: ClashExclusions) -> Self {
        self.exclusions = exclusions;
        self
    }

    fn validate(&self) -> Result<(), GeomError> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(GeomError::BadParams(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if let Some((e, r)) = self.vdw_radii.iter().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
            return Err(GeomError::BadParams(format!("radius of {e} is {r}")));
        }
        if let Some((k, l)) = self.bond_lengths.iter().find(|(_, l)| !(l.is_finite() && **l > 0.0)) {
            return Err(GeomError::BadParams(format!("length of {}-{} {:?} is {l}", k.0, k.1, k.2)));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn exclusions(&self) -> ClashExclusions {
        self.exclusions
    }

    pub fn radius(&self, e: Element) -> Result<f64, GeomError> {
        self.vdw_radii.get(&e).copied().ok_or_else(|| GeomError::UnknownElementRadius(e.symbol().to_string()))
    }

    pub fn bond_length(&self, a: Element, b: Element, order: BondOrder) -> Result<f64, GeomError> {
        let (a, b, order) = pair_key(a, b, order);
        self.bond_lengths.get(&(a, b, order)).copied().ok_or(GeomError::UnknownBondReference { a, b, order })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clash {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondViolation {
    pub i: usize,
    pub j: usize,
    pub order: BondOrder,
    pub distance: f64,
    pub reference: f64,
    pub low: f64,
    pub high: f64,
}

fn distance(mol: &MoleculeGraph, i: usize, j: usize) -> f64 {
    let (a, b) = (mol.atom(i).position.unwrap_or_default(), mol.atom(j).position.unwrap_or_default());
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Non-bonded pairs `i < j` closer than `alpha * (r_i + r_j)`.
pub fn atom_clashes(mol: &MoleculeGraph, params: &GeometryParams) -> Result<Vec<Clash>, GeomError> {
    if !mol.has_positions() {
        return Err(GeomError::MissingCoordinates);
    }
    let radii = mol.atoms().iter().map(|a| params.radius(a.element)).collect::<Result<Vec<_>, _>>()?;
    let ex = params.exclusions;
    let topo = (ex.one_three || ex.one_four).then(|| mol.topological_distances());
    let n = mol.atom_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if mol.bond_between(i, j).is_some() {
                continue;
            }
            if ex.hydrogens && (mol.atom(i).element == Element::H || mol.atom(j).element == Element::H) {
                continue;
            }
            if let Some(t) = &topo {
                match t.get(i, j) {
                    Some(2) if ex.one_three => continue,
                    Some(3) if ex.one_four => continue,
                    _ => {}
                }
            }
            let d = distance(mol, i, j);
            let threshold = params.alpha * (radii[i] + radii[j]);
            if d < threshold {
                out.push(Clash { i, j, distance: d, threshold });
            }
        }
    }
    Ok(out)
}

/// Bonds whose length falls outside `[(1 - beta) l, (1 + beta) l]`.
pub fn bond_violations(mol: &MoleculeGraph, params: &GeometryParams) -> Result<Vec<BondViolation>, GeomError> {
    if !mol.has_positions() {
        return Err(GeomError::MissingCoordinates);
    }
    let mut out = Vec::new();
    for bond in mol.bonds() {
        let reference = params.bond_length(mol.atom(bond.a).element, mol.atom(bond.b).element, bond.order)?;
        let d = distance(mol, bond.a, bond.b);
        let (low, high) = ((1.0 - params.beta) * reference, (1.0 + params.beta) * reference);
        if d < low || d > high {
            out.push(BondViolation { i: bond.a, j: bond.b, order: bond.order, distance: d, reference, low, high });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub parsed_ok: bool,
    pub clash_count: usize,
    pub violation_count: usize,
    pub clashes: Vec<Clash>,
    pub violations: Vec<BondViolation>,
    /// Why the record did not parse, or why a parsed record could not be measured.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl GeometryReport {
    fn unparsed(err: &MolError) -> Self {
        GeometryReport {
            parsed_ok: false,
            clash_count: 0,
            violation_count: 0,
            clashes: Vec::new(),
            violations: Vec::new(),
            error: Some(err.to_string()),
        }
    }

    /// Parsed but not measurable (missing coordinates or table entries).
    pub fn measured(&self) -> bool {
        self.parsed_ok && self.error.is_none()
    }
}

pub fn analyze(mol: &MoleculeGraph, params: &GeometryParams) -> GeometryReport {
    let result = atom_clashes(mol, params).and_then(|c| Ok((c, bond_violations(mol, params)?)));
    match result {
        Ok((clashes, violations)) => GeometryReport {
            parsed_ok: true,
            clash_count: clashes.len(),
            violation_count: violations.len(),
            clashes,
            violations,
            error: None,
        },
        Err(e) => GeometryReport {
            parsed_ok: true,
            clash_count: 0,
            violation_count: 0,
            clashes: Vec::new(),
            violations: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureFormat {
    /// Structure text when the record starts with `atoms:`, SDF otherwise.
    #[default]
    Auto,
    Sdf,
    Text,
}

pub fn parse_candidate(text: &str, format: StructureFormat) -> Result<MoleculeGraph, MolError> {
    let as_text = match format {
        StructureFormat::Auto => text.trim_start().starts_with("atoms:"),
        StructureFormat::Sdf => false,
        StructureFormat::Text => true,
    };
    if as_text {
        parse_structure_text(text)
    } else {
        parse_sdf(text)
    }
}

/// Parses and measures one candidate record.
pub fn analyze_record(text: &str, format: StructureFormat, params: &GeometryParams) -> GeometryReport {
    match parse_candidate(text, format) {
        Ok(mol) => analyze(&mol, params),
        Err(e) => GeometryReport::unparsed(&e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusGeometry {
    pub n_total: usize,
    pub n_valid: usize,
    pub sdf_valid: f64,
    /// Clashing pairs per record; unparsable records count as 0 but stay in the denominator.
    pub mean_clash: f64,
    pub mean_violation: f64,
    /// The same means over parsed, measurable records only.
    pub valid_mean_clash: Option<f64>,
    pub valid_mean_violation: Option<f64>,
    /// Parsed records that could not be measured.
    pub n_unmeasured: usize,
}

pub fn summarize(reports: &[GeometryReport]) -> Result<CorpusGeometry, GeomError> {
    if reports.is_empty() {
        return Err(GeomError::EmptyCorpus);
    }
    let n_total = reports.len();
    let n_valid = reports.iter().filter(|r| r.parsed_ok).count();
    let measured: Vec<&GeometryReport> = reports.iter().filter(|r| r.measured()).collect();
    let clashes: usize = reports.iter().map(|r| r.clash_count).sum();
    let violations: usize = reports.iter().map(|r| r.violation_count).sum();
    let valid_mean = |total: usize| (!measured.is_empty()).then(|| total as f64 / measured.len() as f64);
    Ok(CorpusGeometry {
        n_total,
        n_valid,
        sdf_valid: n_valid as f64 / n_total as f64,
        mean_clash: clashes as f64 / n_total as f64,
        mean_violation: violations as f64 / n_total as f64,
        valid_mean_clash: valid_mean(clashes),
        valid_mean_violation: valid_mean(violations),
        n_unmeasured: n_valid - measured.len(),
    })
}

pub fn corpus_geometry<I, S>(
    records: I,
    format: StructureFormat,
    params: &GeometryParams,
) -> Result<CorpusGeometry, GeomError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let reports: Vec<GeometryReport> =
        records.into_iter().map(|r| analyze_record(r.as_ref(), format, params)).collect();
    summarize(&reports)
}
