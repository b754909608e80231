//! Peak-matching scores for predicted ¹³C and ¹H NMR peak lists.
//!
//! Predictions are scanned in the stored (descending-shift) order; each takes the
//! best unused truth peak within tolerance, ties going to the lower truth index.
//! Pair indices refer to positions in the stored, sorted peak lists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::{parse_spectrum, CarbonSpectrum, ParseError, ProtonSpectrum, Spectrum};

/// Slack on tolerance comparisons so that printed decimals such as 10.2 vs 10.0
/// with a 0.2 ppm window still count as inside.
pub const TOLERANCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmrError {
    #[error("{name} must be positive and finite, got {value}")]
    BadConfig { name: &'static str, value: f64 },
    #[error("cannot aggregate an empty list of scores")]
    EmptyList,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("prediction is {pred} but reference is {truth}")]
    ModalityMismatch { pred: String, truth: String },
    #[error("{0} is not an NMR modality")]
    NotNmr(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NmrConfigFields")]
pub struct NmrConfig {
    pub tau_c: f64,
    pub tau_h: f64,
    pub sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NmrConfigFields {
    #[serde(default = "default_tau_c")]
    tau_c: f64,
    #[serde(default = "default_tau_h")]
    tau_h: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
}

fn default_tau_c() -> f64 {
    0.5
}

fn default_tau_h() -> f64 {
    0.12
}

fn default_sigma() -> f64 {
    0.06
}

impl TryFrom<NmrConfigFields> for NmrConfig {
    type Error = NmrError;
    fn try_from(f: NmrConfigFields) -> Result<Self, Self::Error> {
        NmrConfig::new(f.tau_c, f.tau_h, f.sigma)
    }
}

impl Default for NmrConfig {
    fn default() -> Self {
        NmrConfig { tau_c: default_tau_c(), tau_h: default_tau_h(), sigma: default_sigma() }
    }
}

impl NmrConfig {
    pub fn new(tau_c: f64, tau_h: f64, sigma: f64) -> Result<Self, NmrError> {
        for (name, value) in [("tau_c", tau_c), ("tau_h", tau_h), ("sigma", sigma)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(NmrError::BadConfig { name, value });
            }
        }
        Ok(NmrConfig { tau_c, tau_h, sigma })
    }

    /// Legal but suspicious settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.tau_h < self.sigma {
            w.push(format!("tau_h ({}) is smaller than sigma ({})", self.tau_h, self.sigma));
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub pred_index: usize,
    pub true_index: usize,
    pub deviation: f64,
    /// Gaussian overlap weight, ¹H only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mae: Option<f64>,
    /// Weighted Jaccard, ¹H only.
    pub jaccard: Option<f64>,
    pub n_match: usize,
    pub n_pred: usize,
    pub n_true: usize,
    pub pairs: Vec<MatchPair>,
}

fn within(dev: f64, tau: f64) -> bool {
    dev <= tau + TOLERANCE_EPS
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn finish(pairs: Vec<MatchPair>, n_pred: usize, n_true: usize, jaccard: Option<f64>) -> MatchScore {
    let n_match = pairs.len();
    if n_pred == 0 && n_true == 0 {
        return MatchScore {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            mae: Some(0.0),
            jaccard,
            n_match,
            n_pred,
            n_true,
            pairs,
        };
    }
    let ratio = |n: usize| if n == 0 { 0.0 } else { n_match as f64 / n as f64 };
    let (precision, recall) = (ratio(n_pred), ratio(n_true));
    let mae = (n_match > 0).then(|| pairs.iter().map(|p| p.deviation).sum::<f64>() / n_match as f64);
    MatchScore { precision, recall, f1: f1(precision, recall), mae, jaccard, n_match, n_pred, n_true, pairs }
}

/// Greedy nearest-neighbour matching of ¹³C shifts within `tau_c`.
///
/// Two empty lists score as a perfect match with MAE 0.
pub fn score_carbon(pred: &CarbonSpectrum, truth: &CarbonSpectrum, cfg: &NmrConfig) -> MatchScore {
    let (p, t) = (pred.shifts(), truth.shifts());
    let mut used = vec![false; t.len()];
    let mut pairs = Vec::new();
    for (j, &dp) in p.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (i, &dt) in t.iter().enumerate() {
            let dev = (dp - dt).abs();
            if used[i] || !within(dev, cfg.tau_c) {
                continue;
            }
            if best.is_none_or(|(_, b)| dev < b) {
                best = Some((i, dev));
            }
        }
        if let Some((i, dev)) = best {
            used[i] = true;
            pairs.push(MatchPair { pred_index: j, true_index: i, deviation: dev, weight: None });
        }
    }
    finish(pairs, p.len(), t.len(), None)
}

/// Gaussian overlap weight between two ¹H peaks.
pub fn overlap_weight(n_pred: u32, n_true: u32, deviation: f64, sigma: f64) -> f64 {
    n_pred.min(n_true) as f64 * (-0.5 * (deviation / sigma).powi(2)).exp()
}

/// Greedy ¹H matching maximizing the Gaussian overlap weight within `tau_h`.
/// Multiplicities and J values do not take part.
pub fn score_proton(pred: &ProtonSpectrum, truth: &ProtonSpectrum, cfg: &NmrConfig) -> MatchScore {
    let (p, t) = (pred.peaks(), truth.peaks());
    let mut used = vec![false; t.len()];
    let mut pairs = Vec::new();
    for (j, pp) in p.iter().enumerate() {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, tp) in t.iter().enumerate() {
            let dev = (pp.centroid() - tp.centroid()).abs();
            if used[i] || !within(dev, cfg.tau_h) {
                continue;
            }
            let w = overlap_weight(pp.n_h(), tp.n_h(), dev, cfg.sigma);
            if best.is_none_or(|(_, _, bw)| w > bw) {
                best = Some((i, dev, w));
            }
        }
        if let Some((i, dev, w)) = best {
            used[i] = true;
            pairs.push(MatchPair { pred_index: j, true_index: i, deviation: dev, weight: Some(w) });
        }
    }
    let w_match: f64 = pairs.iter().filter_map(|p| p.weight).sum();
    let w_pred = pred.total_protons() as f64;
    let w_true = truth.total_protons() as f64;
    let jaccard = w_match / (w_pred + w_true - w_match);
    finish(pairs, p.len(), t.len(), Some(jaccard))
}

/// Parses two tagged NMR texts and scores them with the matching nucleus.
pub fn score_text(pred: &str, truth: &str, cfg: &NmrConfig) -> Result<MatchScore, NmrError> {
    let (p, pm) = parse_spectrum(pred)?;
    let (t, tm) = parse_spectrum(truth)?;
    if pm != tm {
        return Err(NmrError::ModalityMismatch { pred: pm.to_string(), truth: tm.to_string() });
    }
    match (p, t) {
        (Spectrum::Carbon(p), Spectrum::Carbon(t)) => Ok(score_carbon(&p, &t, cfg)),
        (Spectrum::Proton(p), Spectrum::Proton(t)) => Ok(score_proton(&p, &t, cfg)),
        _ => Err(NmrError::NotNmr(pm.to_string())),
    }
}

/// Corpus-level means of per-spectrum scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean over spectra that have an MAE.
    pub mae: Option<f64>,
    /// Spectra left out of the MAE mean because nothing matched.
    pub mae_excluded: usize,
    pub jaccard: Option<f64>,
    pub n_match: f64,
    pub n_pred: f64,
    pub n_true: f64,
}

/// Mean computed over sorted values with a running update, so the result does
/// not depend on input order and a list of identical values returns that value.
pub fn stable_mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mut mean = 0.0;
    for (k, x) in v.into_iter().enumerate() {
        mean += (x - mean) / (k + 1) as f64;
    }
    Some(mean)
}

pub fn aggregate_scores(scores: &[MatchScore]) -> Result<ScoreSummary, NmrError> {
    if scores.is_empty() {
        return Err(NmrError::EmptyList);
    }
    let mean = |f: &dyn Fn(&MatchScore) -> f64| stable_mean(scores.iter().map(f)).unwrap_or(0.0);
    let with_mae: Vec<f64> = scores.iter().filter_map(|s| s.mae).collect();
    Ok(ScoreSummary {
        count: scores.len(),
        precision: mean(&|s| s.precision),
        recall: mean(&|s| s.recall),
        f1: mean(&|s| s.f1),
        mae_excluded: scores.len() - with_mae.len(),
        mae: stable_mean(with_mae),
        jaccard: stable_mean(scores.iter().filter_map(|s| s.jaccard)),
        n_match: mean(&|s| s.n_match as f64),
        n_pred: mean(&|s| s.n_pred as f64),
        n_true: mean(&|s| s.n_true as f64),
    })
}
