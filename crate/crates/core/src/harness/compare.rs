//! Empirical frequencies set against the closed-form bounds.

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, SummaryStats};
use crate::bounds::{lemma4_bound, lemma5_bound, thm2_aas_bound, thm2_expectation_bound};
use crate::constructs::pick_c;

/// One `(n, λ)` of a [`BoundComparison`].
///
/// Only the tail bound on `P(F > 2λ+1)` is checked: a violation is flagged when
/// the bound is at most 1 and the empirical frequency exceeds
/// `bound + 3·√(bound(1−bound)/count)`. The other columns report gaps only,
/// because those bounds are asymptotic or carry unquantified terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub count: usize,
    pub lemma5_bound: Option<f64>,
    pub lemma5_tolerance: Option<f64>,
    pub p_gt_2lambda_plus_1: Option<f64>,
    pub lemma5_violation: bool,
    pub thm1_threshold: f64,
    pub p_gt_thm1: Option<f64>,
    pub thm2_aas_bound: Option<f64>,
    pub thm2_aas_precondition: Option<bool>,
    pub p_le_thm2: Option<f64>,
    pub thm2_expectation_bound: Option<f64>,
    pub thm2_expectation_precondition: Option<bool>,
    pub mean_con: Option<f64>,
    /// Bound minus empirical mean.
    pub thm2_expectation_gap: Option<f64>,
    pub lemma4_c: Option<f64>,
    pub lemma4_bound: Option<f64>,
    pub p_lt_lambda: Option<f64>,
    /// Bound minus empirical frequency.
    pub lemma4_gap: Option<f64>,
}

/// Comparison report for an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub name: String,
    pub rows: Vec<ComparisonRow>,
    pub violations: usize,
}

impl BoundComparison {
    pub fn has_violation(&self) -> bool {
        self.violations > 0
    }
}

/// Compares every summary row with the bounds at its `(n, p, λ, w)`.
/// `c` for the lower-tail bound is `c_override` when set, else [`pick_c`]`(n)`
/// when that exists.
pub fn compare_to_bounds(summary: &SummaryStats, spec: &ExperimentSpec) -> BoundComparison {
    let rows: Vec<ComparisonRow> = summary
        .rows
        .iter()
        .map(|s| {
            let (n, p, lambda) = (s.n, s.p, s.lambda);
            let lemma5 = lemma5_bound(n, p, lambda).ok();
            let tolerance = lemma5.map(|b| {
                let q = b.min(1.0);
                3.0 * (q * (1.0 - q) / s.count.max(1) as f64).sqrt()
            });
            let lemma5_violation = match (lemma5, tolerance, s.p_gt_2lambda_plus_1) {
                (Some(b), Some(t), Some(freq)) => b <= 1.0 && freq > b + t,
                _ => false,
            };
            let thm2 = thm2_aas_bound(n, p, s.w).ok();
            let thm2e = thm2_expectation_bound(n, p).ok();
            let c = spec.c_override.or_else(|| pick_c(n).ok());
            let lemma4 = c.and_then(|c| lemma4_bound(n, p, lambda, c).ok()).map(|b| b.value);
            ComparisonRow {
                n,
                p,
                lambda,
                count: s.count,
                lemma5_bound: lemma5,
                lemma5_tolerance: tolerance,
                p_gt_2lambda_plus_1: s.p_gt_2lambda_plus_1,
                lemma5_violation,
                thm1_threshold: s.thm1_threshold,
                p_gt_thm1: s.p_gt_thm1,
                thm2_aas_bound: thm2.map(|b| b.value),
                thm2_aas_precondition: thm2.map(|b| b.precondition_holds),
                p_le_thm2: s.p_le_thm2,
                thm2_expectation_bound: thm2e.map(|b| b.value),
                thm2_expectation_precondition: thm2e.map(|b| b.precondition_holds),
                mean_con: s.mean_con,
                thm2_expectation_gap: thm2e.zip(s.mean_con).map(|(b, m)| b.value - m),
                lemma4_c: c,
                lemma4_bound: lemma4,
                p_lt_lambda: s.p_lt_lambda,
                lemma4_gap: lemma4.zip(s.p_lt_lambda).map(|(b, q)| b - q),
            }
        })
        .collect();
    BoundComparison {
        name: summary.name.clone(),
        violations: rows.iter().filter(|r| r.lemma5_violation).count(),
        rows,
    }
}
