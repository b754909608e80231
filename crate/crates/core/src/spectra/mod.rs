//! Typed spectrum records and their standardized tagged-text forms.
//!
//! Every record type validates on construction; the serde implementations go
//! through the same constructors, so a deserialized value always satisfies the
//! invariants.

mod structure;
mod text;
mod waveform;

pub use structure::{parse_structure_text, write_structure_text};
pub use text::{parse_spectrum, serialize, ParseError};
pub use waveform::{clean_waveform, DEFAULT_NOISE_FLOOR};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("chemical shift {0} ppm outside the allowed range")]
    ShiftOutOfRange(f64),
    #[error("coupling constant {0} Hz must be positive and finite")]
    BadCoupling(f64),
    #[error("proton count must be at least 1")]
    ZeroProtons,
    #[error("proton spectrum has no peaks")]
    NoProtonPeaks,
    #[error("spectrometer frequency {0} MHz must be positive and finite")]
    BadFrequency(f64),
    #[error("invalid solvent label '{0}'")]
    BadSolvent(String),
    #[error("invalid multiplicity '{0}'")]
    BadMultiplicity(String),
    #[error("axis range ({0}, {1}) is not an increasing finite interval")]
    BadAxisRange(f64, f64),
    #[error("waveform position {0} is out of order or outside the axis range")]
    BadPosition(f64),
    #[error("intensity {0} outside [0, 1]")]
    BadIntensity(f64),
    #[error("m/z {0} must be positive, finite and strictly increasing")]
    BadMz(f64),
    #[error("abundance {0} outside (0, 100]")]
    BadAbundance(f64),
    #[error("base peak abundance is {0}, expected 100")]
    NotNormalized(f64),
    #[error("mass spectrum has no peaks")]
    NoMassPeaks,
    #[error("collision energy {0} eV must be non-negative and finite")]
    BadCollisionEnergy(f64),
    #[error("need at least 2 raw points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite value in raw waveform at index {0}")]
    NonFiniteIntensity(usize),
    #[error("invalid cleaning parameter: {0}")]
    BadParameter(String),
}

pub const CARBON_SHIFT_RANGE: (f64, f64) = (-50.0, 350.0);
pub const PROTON_SHIFT_RANGE: (f64, f64) = (-2.0, 20.0);

fn check_frequency(f: Option<f64>) -> Result<(), SpectrumError> {
    match f {
        Some(v) if !(v.is_finite() && v > 0.0) => Err(SpectrumError::BadFrequency(v)),
        _ => Ok(()),
    }
}

/// Solvent labels must survive the `(FREQ MHz, SOLVENT)` header unambiguously.
fn check_solvent(s: &Option<String>) -> Result<(), SpectrumError> {
    if let Some(s) = s {
        let bad = s.is_empty()
            || s.trim() != s
            || s == "unknown"
            || s.chars().any(|c| matches!(c, '(' | ')' | ',' | '<' | '>' | '\n' | '\r'));
        if bad {
            return Err(SpectrumError::BadSolvent(s.clone()));
        }
    }
    Ok(())
}

/// ¹³C peak list (shifts only), kept in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CarbonSpectrumFields")]
pub struct CarbonSpectrum {
    shifts: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solvent: Option<String>,
}

#[derive(Deserialize)]
struct CarbonSpectrumFields {
    shifts: Vec<f64>,
    #[serde(default)]
    frequency: Option<f64>,
    #[serde(default)]
    solvent: Option<String>,
}

impl TryFrom<CarbonSpectrumFields> for CarbonSpectrum {
    type Error = SpectrumError;
    fn try_from(f: CarbonSpectrumFields) -> Result<Self, Self::Error> {
        CarbonSpectrum::new(f.shifts, f.frequency, f.solvent)
    }
}

impl CarbonSpectrum {
    /// Sorts `shifts` descending. Repeated shifts are kept (the peak list is a multiset).
    pub fn new(mut shifts: Vec<f64>, frequency: Option<f64>, solvent: Option<String>) -> Result<Self, SpectrumError> {
        let (lo, hi) = CARBON_SHIFT_RANGE;
        if let Some(&bad) = shifts.iter().find(|s| !(s.is_finite() && (lo..=hi).contains(*s))) {
            return Err(SpectrumError::ShiftOutOfRange(bad));
        }
        check_frequency(frequency)?;
        check_solvent(&solvent)?;
        shifts.sort_by(|a, b| b.total_cmp(a));
        Ok(CarbonSpectrum { shifts, frequency, solvent })
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn frequency(&self) -> Option<f64> {
        self.frequency
    }

    pub fn solvent(&self) -> Option<&str> {
        self.solvent.as_deref()
    }
}

/// ¹H multiplicity label. Parsed and printed, never scored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Singlet,
    Doublet,
    Triplet,
    Quartet,
    Quintet,
    Sextet,
    Septet,
    Multiplet,
    DoubletOfDoublets,
    DoubletOfTriplets,
    TripletOfDoublets,
    TripletOfTriplets,
    DoubletOfDoubletOfDoublets,
    DoubletOfQuartets,
    QuartetOfDoublets,
    Broad,
    BroadSinglet,
    Other(String),
}

const MULTIPLICITY_LABELS: [(&str, Multiplicity); 17] = [
    ("s", Multiplicity::Singlet),
    ("d", Multiplicity::Doublet),
    ("t", Multiplicity::Triplet),
    ("q", Multiplicity::Quartet),
    ("quint", Multiplicity::Quintet),
    ("sext", Multiplicity::Sextet),
    ("sept", Multiplicity::Septet),
    ("m", Multiplicity::Multiplet),
    ("dd", Multiplicity::DoubletOfDoublets),
    ("dt", Multiplicity::DoubletOfTriplets),
    ("td", Multiplicity::TripletOfDoublets),
    ("tt", Multiplicity::TripletOfTriplets),
    ("ddd", Multiplicity::DoubletOfDoubletOfDoublets),
    ("dq", Multiplicity::DoubletOfQuartets),
    ("qd", Multiplicity::QuartetOfDoublets),
    ("br", Multiplicity::Broad),
    ("br s", Multiplicity::BroadSinglet),
];

impl Multiplicity {
    /// Maps a label to a known variant, or `Other` for anything else that is
    /// printable inside the peak parentheses.
    pub fn parse(label: &str) -> Result<Multiplicity, SpectrumError> {
        if let Some((_, m)) = MULTIPLICITY_LABELS.iter().find(|(l, _)| *l == label) {
            return Ok(m.clone());
        }
        let bad = label.is_empty()
            || label.trim() != label
            || label.starts_with("J ")
            || label.chars().any(|c| matches!(c, '(' | ')' | ',' | '<' | '>' | '\n' | '\r'));
        if bad {
            Err(SpectrumError::BadMultiplicity(label.to_string()))
        } else {
            Ok(Multiplicity::Other(label.to_string()))
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Multiplicity::Other(s) => s,
            known => MULTIPLICITY_LABELS.iter().find(|(_, m)| m == known).map(|(l, _)| *l).expect("listed"),
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Multiplicity::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtonPeakFields")]
pub struct ProtonPeak {
    centroid: f64,
    multiplicity: Multiplicity,
    j_values: Vec<f64>,
    n_h: u32,
}

#[derive(Deserialize)]
struct ProtonPeakFields {
    centroid: f64,
    multiplicity: Multiplicity,
    #[serde(default)]
    j_values: Vec<f64>,
    n_h: u32,
}

impl TryFrom<ProtonPeakFields> for ProtonPeak {
    type Error = SpectrumError;
    fn try_from(f: ProtonPeakFields) -> Result<Self, Self::Error> {
        ProtonPeak::new(f.centroid, f.multiplicity, f.j_values, f.n_h)
    }
}

impl ProtonPeak {
    pub fn new(centroid: f64, multiplicity: Multiplicity, j_values: Vec<f64>, n_h: u32) -> Result<Self, SpectrumError> {
        let (lo, hi) = PROTON_SHIFT_RANGE;
        if !(centroid.is_finite() && (lo..=hi).contains(&centroid)) {
            return Err(SpectrumError::ShiftOutOfRange(centroid));
        }
        if let Some(&j) = j_values.iter().find(|j| !(j.is_finite() && **j > 0.0)) {
            return Err(SpectrumError::BadCoupling(j));
        }
        if n_h == 0 {
            return Err(SpectrumError::ZeroProtons);
        }
        Ok(ProtonPeak { centroid, multiplicity, j_values, n_h })
    }

    /// Singlet-style peak with no coupling information.
    pub fn simple(centroid: f64, n_h: u32) -> Result<Self, SpectrumError> {
        ProtonPeak::new(centroid, Multiplicity::Singlet, Vec::new(), n_h)
    }

    pub fn centroid(&self) -> f64 {
        self.centroid
    }

    pub fn multiplicity(&self) -> &Multiplicity {
        &self.multiplicity
    }

    pub fn j_values(&self) -> &[f64] {
        &self.j_values
    }

    pub fn n_h(&self) -> u32 {
        self.n_h
    }
}

/// ¹H peak list sorted by descending centroid (stable for equal centroids).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtonSpectrumFields")]
pub struct ProtonSpectrum {
    peaks: Vec<ProtonPeak>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solvent: Option<String>,
}

#[derive(Deserialize)]
struct ProtonSpectrumFields {
    peaks: Vec<ProtonPeak>,
    #[serde(default)]
    frequency: Option<f64>,
    #[serde(default)]
    solvent: Option<String>,
}

impl TryFrom<ProtonSpectrumFields> for ProtonSpectrum {
    type Error = SpectrumError;
    fn try_from(f: ProtonSpectrumFields) -> Result<Self, Self::Error> {
        ProtonSpectrum::new(f.peaks, f.frequency, f.solvent)
    }
}

impl ProtonSpectrum {
    pub fn new(
        mut peaks: Vec<ProtonPeak>,
        frequency: Option<f64>,
        solvent: Option<String>,
    ) -> Result<Self, SpectrumError> {
        if peaks.is_empty() {
            return Err(SpectrumError::NoProtonPeaks);
        }
        check_frequency(frequency)?;
        check_solvent(&solvent)?;
        peaks.sort_by(|a, b| b.centroid.total_cmp(&a.centroid));
        Ok(ProtonSpectrum { peaks, frequency, solvent })
    }

    pub fn peaks(&self) -> &[ProtonPeak] {
        &self.peaks
    }

    pub fn frequency(&self) -> Option<f64> {
        self.frequency
    }

    pub fn solvent(&self) -> Option<&str> {
        self.solvent.as_deref()
    }

    pub fn total_protons(&self) -> u32 {
        self.peaks.iter().map(|p| p.n_h).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveformModality {
    #[serde(rename = "IR")]
    Ir,
    Raman,
    #[serde(rename = "UV")]
    Uv,
}

impl WaveformModality {
    pub fn tag(self) -> &'static str {
        match self {
            WaveformModality::Ir => "IR",
            WaveformModality::Raman => "Raman",
            WaveformModality::Uv => "UV",
        }
    }

    /// Default resampling grid step: 2 cm⁻¹ for IR/Raman, 1 nm for UV.
    pub fn default_grid_step(self) -> f64 {
        match self {
            WaveformModality::Ir | WaveformModality::Raman => 2.0,
            WaveformModality::Uv => 1.0,
        }
    }
}

/// Cleaned waveform: peak positions with intensities normalized to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WaveformFields")]
pub struct WaveformSpectrum {
    modality: WaveformModality,
    axis_range: (f64, f64),
    points: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct WaveformFields {
    modality: WaveformModality,
    axis_range: (f64, f64),
    #[serde(default)]
    points: Vec<(f64, f64)>,
}

impl TryFrom<WaveformFields> for WaveformSpectrum {
    type Error = SpectrumError;
    fn try_from(f: WaveformFields) -> Result<Self, Self::Error> {
        WaveformSpectrum::new(f.modality, f.axis_range, f.points)
    }
}

impl WaveformSpectrum {
    pub fn new(
        modality: WaveformModality,
        axis_range: (f64, f64),
        points: Vec<(f64, f64)>,
    ) -> Result<Self, SpectrumError> {
        let (lo, hi) = axis_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpectrumError::BadAxisRange(lo, hi));
        }
        let mut last = f64::NEG_INFINITY;
        for &(pos, intensity) in &points {
            if !(pos.is_finite() && pos > last && pos >= lo && pos <= hi) {
                return Err(SpectrumError::BadPosition(pos));
            }
            if !(0.0..=1.0).contains(&intensity) {
                return Err(SpectrumError::BadIntensity(intensity));
            }
            last = pos;
        }
        Ok(WaveformSpectrum { modality, axis_range, points })
    }

    pub fn modality(&self) -> WaveformModality {
        self.modality
    }

    pub fn axis_range(&self) -> (f64, f64) {
        self.axis_range
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IonMode {
    Positive,
    Negative,
}

impl IonMode {
    pub fn tag(self) -> &'static str {
        match self {
            IonMode::Positive => "ms_positive",
            IonMode::Negative => "ms_negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassPeak {
    pub mz: f64,
    pub abundance: f64,
}

/// Mass spectrum with abundances in percent of the base peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MassSpectrumFields")]
pub struct MassSpectrum {
    mode: IonMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision_energy: Option<f64>,
    peaks: Vec<MassPeak>,
}

#[derive(Deserialize)]
struct MassSpectrumFields {
    mode: IonMode,
    #[serde(default)]
    collision_energy: Option<f64>,
    peaks: Vec<MassPeak>,
}

impl TryFrom<MassSpectrumFields> for MassSpectrum {
    type Error = SpectrumError;
    fn try_from(f: MassSpectrumFields) -> Result<Self, Self::Error> {
        MassSpectrum::normalized(f.mode, f.collision_energy, f.peaks)
    }
}

const BASE_PEAK_TOLERANCE: f64 = 1e-9;

impl MassSpectrum {
    /// Builds from already-normalized peaks (base peak 100 within 1e-9).
    pub fn new(mode: IonMode, collision_energy: Option<f64>, mut peaks: Vec<MassPeak>) -> Result<Self, SpectrumError> {
        if let Some(ce) = collision_energy {
            if !(ce.is_finite() && ce >= 0.0) {
                return Err(SpectrumError::BadCollisionEnergy(ce));
            }
        }
        if peaks.is_empty() {
            return Err(SpectrumError::NoMassPeaks);
        }
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
        let mut last = 0.0;
        for p in &peaks {
            if !(p.mz.is_finite() && p.mz > last) {
                return Err(SpectrumError::BadMz(p.mz));
            }
            if !(p.abundance > 0.0 && p.abundance <= 100.0 + BASE_PEAK_TOLERANCE) {
                return Err(SpectrumError::BadAbundance(p.abundance));
            }
            last = p.mz;
        }
        let max = peaks.iter().map(|p| p.abundance).fold(0.0, f64::max);
        if (max - 100.0).abs() > BASE_PEAK_TOLERANCE {
            return Err(SpectrumError::NotNormalized(max));
        }
        for p in &mut peaks {
            p.abundance = p.abundance.min(100.0);
        }
        Ok(MassSpectrum { mode, collision_energy, peaks })
    }

    /// Rescales raw intensities so the base peak is exactly 100.
    ///
    /// Peaks with zero intensity are dropped.
    pub fn normalized(
        mode: IonMode,
        collision_energy: Option<f64>,
        peaks: Vec<MassPeak>,
    ) -> Result<Self, SpectrumError> {
        if let Some(p) = peaks.iter().find(|p| !(p.abundance.is_finite() && p.abundance >= 0.0)) {
            return Err(SpectrumError::BadAbundance(p.abundance));
        }
        let max = peaks.iter().map(|p| p.abundance).fold(0.0, f64::max);
        let scaled = peaks
            .into_iter()
            .filter(|p| p.abundance > 0.0)
            .map(|p| MassPeak {
                mz: p.mz,
                abundance: if p.abundance == max { 100.0 } else { p.abundance / max * 100.0 },
            })
            .collect();
        MassSpectrum::new(mode, collision_energy, scaled)
    }

    pub fn mode(&self) -> IonMode {
        self.mode
    }

    pub fn collision_energy(&self) -> Option<f64> {
        self.collision_energy
    }

    pub fn peaks(&self) -> &[MassPeak] {
        &self.peaks
    }
}

/// Any spectrum record, tagged by kind in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    #[serde(rename = "13C_NMR")]
    Carbon(CarbonSpectrum),
    #[serde(rename = "1H_NMR")]
    Proton(ProtonSpectrum),
    Waveform(WaveformSpectrum),
    Mass(MassSpectrum),
}

/// Modality detected from the opening tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "13C_NMR")]
    Carbon13,
    #[serde(rename = "1H_NMR")]
    Proton1,
    #[serde(rename = "IR")]
    Ir,
    Raman,
    #[serde(rename = "UV")]
    Uv,
    #[serde(rename = "ms_positive")]
    MsPositive,
    #[serde(rename = "ms_negative")]
    MsNegative,
}

impl Modality {
    pub const ALL: [Modality; 7] = [
        Modality::Carbon13,
        Modality::Proton1,
        Modality::Ir,
        Modality::Raman,
        Modality::Uv,
        Modality::MsPositive,
        Modality::MsNegative,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Modality::Carbon13 => "13C_NMR",
            Modality::Proton1 => "1H_NMR",
            Modality::Ir => "IR",
            Modality::Raman => "Raman",
            Modality::Uv => "UV",
            Modality::MsPositive => "ms_positive",
            Modality::MsNegative => "ms_negative",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Modality> {
        Modality::ALL.iter().copied().find(|m| m.tag() == tag)
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Spectrum {
    pub fn modality(&self) -> Modality {
        match self {
            Spectrum::Carbon(_) => Modality::Carbon13,
            Spectrum::Proton(_) => Modality::Proton1,
            Spectrum::Waveform(w) => match w.modality {
                WaveformModality::Ir => Modality::Ir,
                WaveformModality::Raman => Modality::Raman,
                WaveformModality::Uv => Modality::Uv,
            },
            Spectrum::Mass(m) => match m.mode {
                IonMode::Positive => Modality::MsPositive,
                IonMode::Negative => Modality::MsNegative,
            },
        }
    }
}

impl From<CarbonSpectrum> for Spectrum {
    fn from(s: CarbonSpectrum) -> Self {
        Spectrum::Carbon(s)
    }
}

impl From<ProtonSpectrum> for Spectrum {
    fn from(s: ProtonSpectrum) -> Self {
        Spectrum::Proton(s)
    }
}

impl From<WaveformSpectrum> for Spectrum {
    fn from(s: WaveformSpectrum) -> Self {
        Spectrum::Waveform(s)
    }
}

impl From<MassSpectrum> for Spectrum {
    fn from(s: MassSpectrum) -> Self {
        Spectrum::Mass(s)
    }
}
