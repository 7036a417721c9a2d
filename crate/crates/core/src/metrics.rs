//! Batch metrics over trial outcomes.
//!
//! True and estimated targets are matched by a minimum total squared distance
//! assignment over `U = min(K, K_hat)` pairs. The MSE divides by the number of
//! matched pairs summed over all trials.

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Point};
use crate::pipeline::TrialOutcome;
use crate::{Error, Result};

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`).
///
/// Shortest augmenting path form of the Hungarian method with row and column
/// potentials, O(rows^2 * cols).
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // 1-based arrays with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

fn squared_distance(a: Point, b: Point) -> f64 {
    let d = a - b;
    d.x * d.x + d.y * d.y
}

/// Optimal `(actual index, estimated index)` pairs, sorted by actual index.
pub fn pair_targets(actual: &[Point], estimated: &[Point]) -> Vec<(usize, usize)> {
    if actual.is_empty() || estimated.is_empty() {
        return Vec::new();
    }
    let mut pairs: Vec<(usize, usize)> = if actual.len() <= estimated.len() {
        let cost: Vec<Vec<f64>> = actual
            .iter()
            .map(|&a| estimated.iter().map(|&e| squared_distance(a, e)).collect())
            .collect();
        min_cost_assignment(&cost).into_iter().enumerate().collect()
    } else {
        let cost: Vec<Vec<f64>> = estimated
            .iter()
            .map(|&e| actual.iter().map(|&a| squared_distance(a, e)).collect())
            .collect();
        min_cost_assignment(&cost)
            .into_iter()
            .enumerate()
            .map(|(e, a)| (a, e))
            .collect()
    };
    pairs.sort_unstable();
    pairs
}

/// Sum of squared distances over `pairs`, accumulated in the given order.
pub fn total_squared_distance(actual: &[Point], estimated: &[Point], pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .map(|&(a, e)| squared_distance(actual[a], estimated[e]))
        .sum()
}

fn paired(o: &TrialOutcome) -> Vec<(usize, usize)> {
    pair_targets(&o.true_positions, &o.estimated_positions)
}

/// Mean squared error over all matched pairs of all trials.
pub fn mse(outcomes: &[TrialOutcome]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for o in outcomes {
        let pairs = paired(o);
        sum += total_squared_distance(&o.true_positions, &o.estimated_positions, &pairs);
        count += pairs.len();
    }
    if count == 0 {
        return Err(Error::UndefinedMetric("mse over zero matched pairs"));
    }
    Ok(sum / count as f64)
}

/// Fraction of trials with `K_hat = K`.
pub fn detection_probability(outcomes: &[TrialOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    let hits = outcomes.iter().filter(|o| o.k_hat == o.k).count();
    hits as f64 / outcomes.len() as f64
}

/// True when every true target is matched within `epsilon`; `strict` also
/// requires `K_hat = K`.
pub fn trial_recovered(o: &TrialOutcome, epsilon: f64, strict: bool) -> bool {
    if strict && o.k_hat != o.k {
        return false;
    }
    let pairs = paired(o);
    pairs.len() == o.true_positions.len()
        && pairs
            .iter()
            .all(|&(a, e)| distance(o.true_positions[a], o.estimated_positions[e]) <= epsilon)
}

/// Successful recovery probability.
pub fn srp(outcomes: &[TrialOutcome], epsilon: f64, strict: bool) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    let hits = outcomes
        .iter()
        .filter(|o| trial_recovered(o, epsilon, strict))
        .count();
    hits as f64 / outcomes.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` when no pair was matched in any trial.
    pub mse: Option<f64>,
    pub p_d: f64,
    pub srp: f64,
    pub trials: usize,
    pub pairs_used: usize,
    pub mapping_failures: usize,
}

pub fn summarize(outcomes: &[TrialOutcome], epsilon: f64, strict: bool) -> MetricsReport {
    MetricsReport {
        mse: mse(outcomes).ok(),
        p_d: detection_probability(outcomes),
        srp: srp(outcomes, epsilon, strict),
        trials: outcomes.len(),
        pairs_used: outcomes.iter().map(|o| paired(o).len()).sum(),
        mapping_failures: outcomes.iter().map(|o| o.mapping_failures.len()).sum(),
    }
}
