//! Per-step iteration records and the checks run against them.

use crate::error::{Error, Result};

/// Relative error/bound gap accepted as "equality".
pub const SHARPNESS_RTOL: f64 = 1e-6;
/// Relative slack for the upper-bound check `error <= bound`.
pub const UPPER_BOUND_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    /// `||X_k - X_{k+1}||`, absent on the final iterate.
    pub step_distance: Option<f64>,
    /// `||X_* - X_k||`.
    pub error: f64,
    /// `sigma(omega^(k)(t0))`, absent when no bound applies.
    pub bound: Option<f64>,
    /// `omega^(k)(t0)`, the a-priori bound on `step_distance`.
    pub step_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub steps: Vec<StepRecord>,
    pub converged: bool,
    /// Index of the final iterate.
    pub iterations: usize,
}

impl IterationTrace {
    pub fn errors(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.error).collect()
    }

    pub fn bounds(&self) -> Vec<Option<f64>> {
        self.steps.iter().map(|s| s.bound).collect()
    }

    pub fn has_bounds(&self) -> bool {
        self.steps.iter().any(|s| s.bound.is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessReport {
    /// Largest `|error_k - bound_k| / bound_k` over the compared steps.
    pub max_gap: f64,
    /// Step where `max_gap` occurs.
    pub worst_k: Option<usize>,
    /// Number of steps compared.
    pub compared: usize,
    pub pass: bool,
}

/// Compares error and bound over steps `k >= first_k` whose error exceeds
/// `floor`. Passes iff the largest relative gap is at most [`SHARPNESS_RTOL`].
pub fn sharpness_from(trace: &IterationTrace, first_k: usize, floor: f64) -> Result<SharpnessReport> {
    if trace.steps.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut max_gap = 0.0f64;
    let mut worst_k = None;
    let mut compared = 0;
    for s in trace.steps.iter().filter(|s| s.k >= first_k && s.error > floor) {
        let Some(b) = s.bound else { continue };
        let gap = if b > 0.0 { (s.error - b).abs() / b } else { f64::INFINITY };
        compared += 1;
        if gap > max_gap || worst_k.is_none() {
            max_gap = max_gap.max(gap);
            worst_k = Some(s.k);
        }
    }
    Ok(SharpnessReport { max_gap, worst_k, compared, pass: max_gap <= SHARPNESS_RTOL })
}

/// Equality of error and bound for all `k >= 1` above `floor`.
pub fn verify_sharpness(trace: &IterationTrace, floor: f64) -> Result<SharpnessReport> {
    sharpness_from(trace, 1, floor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundReport {
    /// Largest `error_k / bound_k - 1` seen (negative when every error is strictly below).
    pub max_excess: f64,
    pub worst_k: Option<usize>,
    pub compared: usize,
    /// Bounds strictly decrease in k.
    pub bounds_decreasing: bool,
    pub pass: bool,
}

/// `error_k <= bound_k (1 + 1e-8)` on every step whose error lies above the
/// floating-point `floor`, plus strict decrease of the bounds.
pub fn check_upper_bound(trace: &IterationTrace, floor: f64) -> Result<UpperBoundReport> {
    if trace.steps.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst_k = None;
    let mut compared = 0;
    for s in trace.steps.iter().filter(|s| s.error > floor) {
        let Some(b) = s.bound else { continue };
        let excess = if b > 0.0 { s.error / b - 1.0 } else { f64::INFINITY };
        compared += 1;
        if excess > max_excess {
            max_excess = excess;
            worst_k = Some(s.k);
        }
    }
    let bounds: Vec<f64> = trace.steps.iter().filter_map(|s| s.bound).collect();
    let bounds_decreasing = bounds.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0);
    Ok(UpperBoundReport {
        max_excess,
        worst_k,
        compared,
        bounds_decreasing,
        pass: bounds_decreasing && max_excess <= UPPER_BOUND_RTOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(rows: &[(f64, Option<f64>)]) -> IterationTrace {
        IterationTrace {
            steps: rows
                .iter()
                .enumerate()
                .map(|(k, &(error, bound))| StepRecord { k, step_distance: None, error, bound, step_bound: None })
                .collect(),
            converged: true,
            iterations: rows.len().saturating_sub(1),
        }
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert_eq!(verify_sharpness(&trace(&[]), 0.0), Err(Error::EmptyTrace));
        assert_eq!(check_upper_bound(&trace(&[]), 0.0), Err(Error::EmptyTrace));
    }

    #[test]
    fn k0_is_excluded_from_sharpness() {
        let t = trace(&[(0.1, Some(1.0)), (0.25, Some(0.25)), (0.025, Some(0.025))]);
        let r = verify_sharpness(&t, 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.compared, 2);
    }

    #[test]
    fn perturbed_bound_fails() {
        let t = trace(&[(1.0, Some(1.0)), (0.25, Some(0.25 * (1.0 + 1e-4)))]);
        let r = verify_sharpness(&t, 0.0).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_k, Some(1));
    }

    #[test]
    fn floor_skips_tiny_errors() {
        let t = trace(&[(1.0, Some(1.0)), (1e-15, Some(1e-30))]);
        assert!(verify_sharpness(&t, 1e-12).unwrap().pass);
        assert!(check_upper_bound(&t, 1e-12).unwrap().pass);
        assert!(!check_upper_bound(&t, 0.0).unwrap().pass);
    }

    #[test]
    fn upper_bound_requires_decreasing_bounds() {
        let t = trace(&[(0.5, Some(1.0)), (0.1, Some(1.0))]);
        assert!(!check_upper_bound(&t, 0.0).unwrap().pass);
    }
}
