//! Exhaustive one-to-one peak matching.

use crate::{OracleError, OracleResult};

pub const MAX_PEAKS: usize = 10;

/// Tolerance slack, the same absolute allowance the production matcher uses.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePair {
    pub pred_index: usize,
    pub true_index: usize,
    pub deviation: f64,
    pub weight: f64,
}

/// How the greedy scan picks a partner and what a pair is worth.
pub enum Criterion<'a> {
    /// Nearest unused truth peak; every pair is worth 1.
    Nearest,
    /// Heaviest unused truth peak under `weight(pred_index, true_index, deviation)`.
    MaxWeight(&'a dyn Fn(usize, usize, f64) -> f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Greedy scan over predictions in descending position, ties to the lower truth index.
    pub greedy: Vec<OraclePair>,
    pub greedy_weight: f64,
    /// Best assignment over all injective matchings within tolerance.
    pub optimal: Vec<OraclePair>,
    pub optimal_weight: f64,
}

impl Criterion<'_> {
    fn weight(&self, j: usize, i: usize, dev: f64) -> f64 {
        match self {
            Criterion::Nearest => 1.0,
            Criterion::MaxWeight(f) => f(j, i, dev),
        }
    }
}

/// Indices refer to the input slices.
pub fn exhaustive_match(
    pred: &[f64],
    truth: &[f64],
    tolerance: f64,
    criterion: Criterion<'_>,
) -> Result<OracleResult<Matching>, OracleError> {
    let size = pred.len().max(truth.len());
    if size > MAX_PEAKS {
        return Err(OracleError::TooLarge { size, limit: MAX_PEAKS });
    }
    let dev = |j: usize, i: usize| (pred[j] - truth[i]).abs();
    let ok = |j: usize, i: usize| dev(j, i) <= tolerance + SLACK;

    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[b].total_cmp(&pred[a]));
    let mut used = vec![false; truth.len()];
    let mut greedy = Vec::new();
    for &j in &order {
        let mut best: Option<usize> = None;
        #[allow(clippy::needless_range_loop)]
        for i in 0..truth.len() {
            if used[i] || !ok(j, i) {
                continue;
            }
            let better = match (best, &criterion) {
                (None, _) => true,
                (Some(b), Criterion::Nearest) => dev(j, i) < dev(j, b),
                (Some(b), Criterion::MaxWeight(_)) => {
                    criterion.weight(j, i, dev(j, i)) > criterion.weight(j, b, dev(j, b))
                }
            };
            if better {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            used[i] = true;
            greedy.push(OraclePair {
                pred_index: j,
                true_index: i,
                deviation: dev(j, i),
                weight: criterion.weight(j, i, dev(j, i)),
            });
        }
    }
    let greedy_weight = greedy.iter().map(|p| p.weight).sum();

    // Every subset of used truth peaks, for every prefix of predictions.
    let full = 1usize << truth.len();
    let mut memo: Vec<Option<(f64, f64)>> = vec![None; (pred.len() + 1) * full];
    fn best_from(
        j: usize,
        mask: usize,
        pred_len: usize,
        truth_len: usize,
        memo: &mut Vec<Option<(f64, f64)>>,
        edge: &dyn Fn(usize, usize) -> Option<(f64, f64)>,
    ) -> (f64, f64) {
        if j == pred_len {
            return (0.0, 0.0);
        }
        let slot = j * (1 << truth_len) + mask;
        if let Some(v) = memo[slot] {
            return v;
        }
        let mut best = best_from(j + 1, mask, pred_len, truth_len, memo, edge);
        for i in 0..truth_len {
            if mask & (1 << i) != 0 {
                continue;
            }
            if let Some((w, d)) = edge(j, i) {
                let (rw, rd) = best_from(j + 1, mask | (1 << i), pred_len, truth_len, memo, edge);
                let cand = (rw + w, rd - d);
                if cand.0 > best.0 || (cand.0 == best.0 && cand.1 > best.1) {
                    best = cand;
                }
            }
        }
        memo[slot] = Some(best);
        best
    }
    let edge = |j: usize, i: usize| ok(j, i).then(|| (criterion.weight(j, i, dev(j, i)), dev(j, i)));
    let (optimal_weight, _) = best_from(0, 0, pred.len(), truth.len(), &mut memo, &edge);

    let mut optimal = Vec::new();
    let mut mask = 0;
    for j in 0..pred.len() {
        let target = best_from(j, mask, pred.len(), truth.len(), &mut memo, &edge);
        if best_from(j + 1, mask, pred.len(), truth.len(), &mut memo, &edge) == target {
            continue;
        }
        for i in 0..truth.len() {
            if mask & (1 << i) != 0 {
                continue;
            }
            if let Some((w, d)) = edge(j, i) {
                let (rw, rd) = best_from(j + 1, mask | (1 << i), pred.len(), truth.len(), &mut memo, &edge);
                if (rw + w, rd - d) == target {
                    optimal.push(OraclePair { pred_index: j, true_index: i, deviation: d, weight: w });
                    mask |= 1 << i;
                    break;
                }
            }
        }
    }

    Ok(OracleResult {
        value: Matching { greedy, greedy_weight, optimal, optimal_weight },
        method: "greedy scan simulation plus dynamic programming over used-truth subsets",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_enumerated_three_by_three() {
        // Greedy takes 10.0 for 10.3 first and strands 9.6; the optimum pairs both.
        let m = exhaustive_match(&[10.3, 9.6], &[10.0, 10.7], 0.5, Criterion::Nearest).unwrap().value;
        assert_eq!(m.greedy.len(), 1);
        assert_eq!(m.greedy[0].true_index, 0);
        assert_eq!(m.optimal_weight, 2.0);
        let pairs: Vec<(usize, usize)> = m.optimal.iter().map(|p| (p.pred_index, p.true_index)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn ties_go_to_lower_truth_index() {
        let m = exhaustive_match(&[5.0], &[5.25, 4.75], 0.5, Criterion::Nearest).unwrap().value;
        assert_eq!(m.greedy[0].true_index, 0);
    }

    #[test]
    fn weighted() {
        let w = |_j: usize, i: usize, d: f64| [1.0, 3.0][i] * (-d).exp();
        let m = exhaustive_match(&[1.0], &[1.0, 1.05], 0.12, Criterion::MaxWeight(&w)).unwrap().value;
        assert_eq!(m.greedy[0].true_index, 1);
        assert_eq!(m.greedy_weight, m.optimal_weight);
    }

    #[test]
    fn empty_and_too_large() {
        let m = exhaustive_match(&[], &[], 0.5, Criterion::Nearest).unwrap().value;
        assert!(m.greedy.is_empty() && m.optimal.is_empty());
        let big = vec![1.0; 11];
        assert!(exhaustive_match(&big, &[], 0.5, Criterion::Nearest).is_err());
    }
}
