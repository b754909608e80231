//! Fixed-grid vectors for IR and MS spectra, compared by cosine similarity.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::{MassSpectrum, Spectrum, WaveformSpectrum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VecError {
    #[error("invalid binning: {0}")]
    BadConfig(String),
    #[error("vectors were built on different grids")]
    ConfigMismatch,
    #[error("{0} spectra are not vectorized")]
    Unsupported(String),
}

/// Uniform grid `[low, high)` split into bins of `bin_width`.
///
/// With `spread_sigma` set, each peak is spread over neighbouring bins with a
/// Gaussian of that width (in axis units) instead of landing in a single bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinningFields")]
pub struct BinningConfig {
    low: f64,
    high: f64,
    bin_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    spread_sigma: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BinningFields {
    low: f64,
    high: f64,
    bin_width: f64,
    #[serde(default)]
    spread_sigma: Option<f64>,
}

impl TryFrom<BinningFields> for BinningConfig {
    type Error = VecError;
    fn try_from(f: BinningFields) -> Result<Self, Self::Error> {
        BinningConfig::new(f.low, f.high, f.bin_width)?.with_spread(f.spread_sigma)
    }
}

impl BinningConfig {
    pub fn new(low: f64, high: f64, bin_width: f64) -> Result<Self, VecError> {
        if !(low.is_finite() && high.is_finite() && high > low) {
            return Err(VecError::BadConfig(format!("need low < high, got [{low}, {high})")));
        }
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(VecError::BadConfig(format!("bin_width {bin_width} must be positive")));
        }
        Ok(BinningConfig { low, high, bin_width, spread_sigma: None })
    }

    pub fn with_spread(mut self, sigma: Option<f64>) -> Result<Self, VecError> {
        if let Some(s) = sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(VecError::BadConfig(format!("spread_sigma {s} must be positive")));
            }
        }
        self.spread_sigma = sigma;
        Ok(self)
    }

    /// 500-4000 cm⁻¹ at 2 cm⁻¹, 1750 bins.
    pub fn ir_default() -> Self {
        BinningConfig { low: 500.0, high: 4000.0, bin_width: 2.0, spread_sigma: None }
    }

    /// 0-1000 Da at 1 Da, 1000 bins.
    pub fn ms_default() -> Self {
        BinningConfig { low: 0.0, high: 1000.0, bin_width: 1.0, spread_sigma: None }
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn spread_sigma(&self) -> Option<f64> {
        self.spread_sigma
    }

    /// Number of bins, `ceil((high - low) / bin_width)`; exact ratios are not rounded up.
    pub fn k(&self) -> usize {
        let r = (self.high - self.low) / self.bin_width;
        let k = if (r - r.round()).abs() < 1e-9 { r.round() } else { r.ceil() };
        (k as usize).max(1)
    }

    pub fn bin_of(&self, position: f64) -> Option<usize> {
        if !(position >= self.low && position < self.high) {
            return None;
        }
        let idx = ((position - self.low) / self.bin_width).floor() as usize;
        Some(idx.min(self.k() - 1))
    }

    pub fn bin_start(&self, idx: usize) -> f64 {
        self.low + idx as f64 * self.bin_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumVector {
    values: Vec<f64>,
    config: BinningConfig,
    dropped: usize,
}

impl SpectrumVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn config(&self) -> &BinningConfig {
        &self.config
    }

    /// Peaks that fell outside the grid.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn scaled(&self, c: f64) -> SpectrumVector {
        SpectrumVector { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Writes `bin,start,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin,start,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{},{v}", self.config.bin_start(i))?;
        }
        Ok(())
    }
}

/// Anything that yields `(position, intensity)` peaks.
pub trait PeakSource {
    fn peak_pairs(&self) -> Vec<(f64, f64)>;
}

impl PeakSource for WaveformSpectrum {
    fn peak_pairs(&self) -> Vec<(f64, f64)> {
        self.points().to_vec()
    }
}

impl PeakSource for MassSpectrum {
    fn peak_pairs(&self) -> Vec<(f64, f64)> {
        self.peaks().iter().map(|p| (p.mz, p.abundance)).collect()
    }
}

impl PeakSource for [(f64, f64)] {
    fn peak_pairs(&self) -> Vec<(f64, f64)> {
        self.to_vec()
    }
}

/// Deposits each peak's intensity into the bin containing its position,
/// summing collisions. Peaks outside `[low, high)` are counted in `dropped`.
pub fn vectorize<S: PeakSource + ?Sized>(spectrum: &S, cfg: &BinningConfig) -> SpectrumVector {
    let k = cfg.k();
    let mut values = vec![0.0; k];
    let mut dropped = 0;
    for (pos, intensity) in spectrum.peak_pairs() {
        let Some(idx) = cfg.bin_of(pos) else {
            dropped += 1;
            continue;
        };
        match cfg.spread_sigma {
            None => values[idx] += intensity,
            Some(sigma) => {
                let reach = ((4.0 * sigma) / cfg.bin_width).ceil() as usize;
                let (lo, hi) = (idx.saturating_sub(reach), (idx + reach).min(k - 1));
                let weights: Vec<f64> = (lo..=hi)
                    .map(|b| {
                        let center = cfg.bin_start(b) + cfg.bin_width / 2.0;
                        (-0.5 * ((center - pos) / sigma).powi(2)).exp()
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                for (b, w) in (lo..=hi).zip(weights) {
                    values[b] += intensity * w / total;
                }
            }
        }
    }
    SpectrumVector { values, config: *cfg, dropped }
}

/// Vectorizes a waveform or mass spectrum; NMR records are rejected.
pub fn vectorize_spectrum(spectrum: &Spectrum, cfg: &BinningConfig) -> Result<SpectrumVector, VecError> {
    match spectrum {
        Spectrum::Waveform(w) => Ok(vectorize(w, cfg)),
        Spectrum::Mass(m) => Ok(vectorize(m, cfg)),
        other => Err(VecError::Unsupported(other.modality().to_string())),
    }
}

/// `p·q / (‖p‖‖q‖)`, or 0 when either vector is all zeros.
pub fn cosine_similarity(p: &SpectrumVector, q: &SpectrumVector) -> Result<f64, VecError> {
    if p.config != q.config {
        return Err(VecError::ConfigMismatch);
    }
    Ok(cosine(&p.values, &q.values))
}

pub fn cosine(p: &[f64], q: &[f64]) -> f64 {
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let pp: f64 = p.iter().map(|a| a * a).sum();
    let qq: f64 = q.iter().map(|b| b * b).sum();
    if pp == 0.0 || qq == 0.0 {
        return 0.0;
    }
    let prod = pp * qq;
    let denom = if prod.is_finite() && prod > 0.0 { prod.sqrt() } else { pp.sqrt() * qq.sqrt() };
    (dot / denom).clamp(-1.0, 1.0)
}
