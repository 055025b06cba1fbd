//! Summary statistics, quantiles, bootstrap and the two-sample KS test.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, TrialRecord};
use crate::bounds::{thm1_threshold, thm2_aas_bound};
use crate::error::Result;
use crate::rng::{substream, tag};

/// Number of resamples behind [`SummaryRow::se_median_con`].
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Statistics for one `(n, λ)`.
///
/// `count` excludes three-phase conditioning failures. Unconditional
/// frequencies use `count` as denominator and treat a disconnected graph as
/// `F = ∞`; the `_con` fields use the connected trials only. `p_lt_lambda`
/// and `p_le_thm2` are over all valid trials, so disconnected ones never
/// count toward them. `se_*` are binomial standard errors `√(q(1−q)/k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub trials: usize,
    pub count: usize,
    pub conditioning_failures: usize,
    pub connected_count: usize,
    pub p_gt_lambda: Option<f64>,
    pub se_gt_lambda: Option<f64>,
    pub p_gt_lambda_con: Option<f64>,
    pub se_gt_lambda_con: Option<f64>,
    pub p_lt_lambda: Option<f64>,
    pub se_lt_lambda: Option<f64>,
    pub p_gt_2lambda_plus_1: Option<f64>,
    pub se_gt_2lambda_plus_1: Option<f64>,
    pub w: f64,
    pub thm1_threshold: f64,
    pub p_gt_thm1: Option<f64>,
    pub se_gt_thm1: Option<f64>,
    pub thm2_aas_bound: Option<f64>,
    pub p_le_thm2: Option<f64>,
    pub q10_con: Option<f64>,
    pub q50_con: Option<f64>,
    pub q90_con: Option<f64>,
    pub mean_con: Option<f64>,
    pub se_mean_con: Option<f64>,
    pub se_median_con: Option<f64>,
}

/// All rows of an experiment, in `n_grid` then `lambda_grid` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub name: String,
    pub rows: Vec<SummaryRow>,
}

impl SummaryStats {
    pub fn row(&self, n: usize, lambda: f64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.n == n && r.lambda == lambda)
    }
}

/// Quantile `q` of sorted values by linear interpolation between order
/// statistics: position `h = (k−1)q`, value `x[⌊h⌋] + (h−⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋])`.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn proportion(hits: usize, k: usize) -> (Option<f64>, Option<f64>) {
    if k == 0 {
        return (None, None);
    }
    let q = hits as f64 / k as f64;
    (Some(q), Some((q * (1.0 - q) / k as f64).sqrt()))
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation, `0` for a single value.
fn sample_sd(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    if values.len() == 1 {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

fn mean_and_se(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let se = sample_sd(values).map(|sd| sd / (values.len() as f64).sqrt());
    (mean(values), se)
}

/// Bootstrap standard error of the median, from `resamples` resamples drawn
/// with the given stream.
pub fn bootstrap_median_se<R: Rng + ?Sized>(values: &[f64], resamples: usize, rng: &mut R) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut buf = vec![0.0; values.len()];
    let medians: Vec<f64> = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = values[rng.random_range(0..values.len())];
            }
            buf.sort_by(f64::total_cmp);
            quantile(&buf, 0.5).unwrap_or(f64::NAN)
        })
        .collect();
    sample_sd(&medians)
}

/// Summarizes `records`, which must come from `spec`.
pub fn summarize(spec: &ExperimentSpec, records: &[TrialRecord]) -> Result<SummaryStats> {
    let mut rows = Vec::new();
    for &n in &spec.n_grid {
        let at_n: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        let p = spec.p_expr.eval(n)?;
        let w = spec.w_choice.eval(n);
        let values: Vec<f64> = at_n.iter().filter_map(|r| r.stretch_or_infinity()).collect();
        let count = values.len();
        let mut con: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        con.sort_by(f64::total_cmp);

        let thm1 = thm1_threshold(n, p, w)?;
        let thm2 = if p > 0.0 { Some(thm2_aas_bound(n, p, w)?.value) } else { None };
        let (mean_con, se_mean_con) = mean_and_se(&con);
        let mut rng = substream(spec.master_seed, tag::BOOTSTRAP, n as u64);
        let se_median_con = bootstrap_median_se(&con, BOOTSTRAP_RESAMPLES, &mut rng);
        let hits = |pred: &dyn Fn(f64) -> bool| values.iter().filter(|&&v| pred(v)).count();
        let (p_gt_thm1, se_gt_thm1) = proportion(hits(&|v| v > thm1), count);
        let p_le_thm2 = thm2.and_then(|b| proportion(hits(&|v| v <= b), count).0);

        for &lambda in &spec.lambda_grid {
            let (p_gt_lambda, se_gt_lambda) = proportion(hits(&|v| v > lambda), count);
            let con_hits = con.iter().filter(|&&v| v > lambda).count();
            let (p_gt_lambda_con, se_gt_lambda_con) = proportion(con_hits, con.len());
            let (p_lt_lambda, se_lt_lambda) = proportion(hits(&|v| v < lambda), count);
            let (p_gt_2lambda_plus_1, se_gt_2lambda_plus_1) =
                proportion(hits(&|v| v > 2.0 * lambda + 1.0), count);
            rows.push(SummaryRow {
                n,
                p,
                lambda,
                trials: at_n.len(),
                count,
                conditioning_failures: at_n.len() - count,
                connected_count: con.len(),
                p_gt_lambda,
                se_gt_lambda,
                p_gt_lambda_con,
                se_gt_lambda_con,
                p_lt_lambda,
                se_lt_lambda,
                p_gt_2lambda_plus_1,
                se_gt_2lambda_plus_1,
                w,
                thm1_threshold: thm1,
                p_gt_thm1,
                se_gt_thm1,
                thm2_aas_bound: thm2,
                p_le_thm2,
                q10_con: quantile(&con, 0.1),
                q50_con: quantile(&con, 0.5),
                q90_con: quantile(&con, 0.9),
                mean_con,
                se_mean_con,
                se_median_con,
            });
        }
    }
    Ok(SummaryStats {
        name: spec.name.clone(),
        rows,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q(t) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²t²}`, the Kolmogorov survival function.
pub fn kolmogorov_q(t: f64) -> f64 {
    if t < 0.1 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS test. Values may include `±∞`; ties are handled by
/// advancing both samples past each distinct value. The p-value uses the
/// effective size `m·k/(m+k)` with the usual small-sample correction
/// `(√e + 0.12 + 0.11/√e)·D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Option<KsResult> {
    if a.is_empty() || b.is_empty() || a.iter().chain(b).any(|v| v.is_nan()) {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let t = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Some(KsResult {
        statistic: d,
        p_value: kolmogorov_q(t),
    })
}
