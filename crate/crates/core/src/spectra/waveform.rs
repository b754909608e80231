use super::{SpectrumError, WaveformModality, WaveformSpectrum};

pub const DEFAULT_NOISE_FLOOR: f64 = 0.01;

/// Resamples a raw trace onto a uniform grid, min-max normalizes it and keeps
/// the local maxima above `noise_floor`.
///
/// Grid points are the multiples of `grid_step` inside the raw position range.
/// Repeated raw positions are averaged. A plateau reports its first point.
/// The axis range is the raw position range widened to whole units.
pub fn clean_waveform(
    raw: &[(f64, f64)],
    modality: WaveformModality,
    grid_step: f64,
    noise_floor: f64,
) -> Result<WaveformSpectrum, SpectrumError> {
    if raw.len() < 2 {
        return Err(SpectrumError::TooFewPoints(raw.len()));
    }
    if let Some(i) = raw.iter().position(|(p, y)| !(p.is_finite() && y.is_finite())) {
        return Err(SpectrumError::NonFiniteIntensity(i));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(SpectrumError::BadParameter(format!("grid_step {grid_step} must be positive")));
    }
    if !(0.0..1.0).contains(&noise_floor) {
        return Err(SpectrumError::BadParameter(format!("noise_floor {noise_floor} must be in [0, 1)")));
    }

    let mut sorted = raw.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut trace: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let mut sum = 0.0;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            sum += sorted[j].1;
            j += 1;
        }
        trace.push((sorted[i].0, sum / (j - i) as f64));
        i = j;
    }
    if trace.len() < 2 {
        return Err(SpectrumError::TooFewPoints(trace.len()));
    }

    let (first, last) = (trace[0].0, trace[trace.len() - 1].0);
    let k0 = (first / grid_step).ceil() as i64;
    let k1 = (last / grid_step).floor() as i64;
    if k1 < k0 {
        return Err(SpectrumError::TooFewPoints(0));
    }
    let grid: Vec<f64> = (k0..=k1).map(|k| k as f64 * grid_step).collect();

    let mut values = Vec::with_capacity(grid.len());
    let mut seg = 0;
    for &x in &grid {
        while seg + 2 < trace.len() && trace[seg + 1].0 < x {
            seg += 1;
        }
        let (x0, y0) = trace[seg];
        let (x1, y1) = trace[seg + 1];
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        values.push(y0 + t * (y1 - y0));
    }

    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let norm: Vec<f64> =
        if span > 0.0 { values.iter().map(|v| (v - lo) / span).collect() } else { vec![0.0; values.len()] };

    let mut points = Vec::new();
    let n = norm.len();
    let mut a = 0;
    while a < n {
        let mut b = a;
        while b + 1 < n && norm[b + 1] == norm[a] {
            b += 1;
        }
        let rises = a == 0 || norm[a - 1] < norm[a];
        let falls = b == n - 1 || norm[b + 1] < norm[b];
        if rises && falls && norm[a] > noise_floor {
            points.push((grid[a], norm[a]));
        }
        a = b + 1;
    }

    WaveformSpectrum::new(modality, (first.floor(), last.ceil()), points)
}
