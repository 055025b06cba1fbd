//! Closed-form bounds on the stretch factor `F = F(n, p)` and the regime classifier.
//!
//! All logarithms are natural. Bounds carrying an unquantified `o(1)` term return
//! the explicit part together with `unquantified_slack = true`.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constructs::{pick_c, C_MAX, C_MIN};
use crate::error::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("p = {p} is outside [0, 1]")))
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {value}")))
    }
}

/// Lower threshold `√(n(1−p)) / w`: a.a.s. `F` exceeds it for any `w = ω(1)`.
pub fn thm1_threshold(n: usize, p: f64, w: f64) -> Result<f64> {
    check_p(p)?;
    check_positive("w", w)?;
    Ok((n as f64 * (1.0 - p)).sqrt() / w)
}

/// A bound value with its precondition flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBound {
    pub value: f64,
    /// Whether `p²n ≥ k·log n` holds for the bound's constant `k`.
    pub precondition_holds: bool,
    /// The bound omits an `o(1)` term with no stated constant.
    pub unquantified_slack: bool,
}

fn p2n_at_least(n: usize, p: f64, k: f64) -> bool {
    let n = n as f64;
    p * p * n >= k * n.ln()
}

/// Upper bound `1 + w·√(n(1−p))/p`, which holds a.a.s. when `p²n ≥ 33 log n`.
pub fn thm2_aas_bound(n: usize, p: f64, w: f64) -> Result<ConditionalBound> {
    check_p(p)?;
    check_positive("p", p)?;
    check_positive("w", w)?;
    Ok(ConditionalBound {
        value: 1.0 + w * (n as f64 * (1.0 - p)).sqrt() / p,
        precondition_holds: p2n_at_least(n, p, 33.0),
        unquantified_slack: false,
    })
}

/// Bound `1 + √(2048·n(1−p))/p + o(1)` on `E[F | connected]`, valid when `p²n ≥ 113 log n`.
pub fn thm2_expectation_bound(n: usize, p: f64) -> Result<ConditionalBound> {
    check_p(p)?;
    check_positive("p", p)?;
    Ok(ConditionalBound {
        value: 1.0 + (2048.0 * n as f64 * (1.0 - p)).sqrt() / p,
        precondition_holds: p2n_at_least(n, p, 113.0),
        unquantified_slack: true,
    })
}

/// Explicit part of a probability bound that also carries an `o(1)` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackedProbability {
    pub value: f64,
    pub unquantified_slack: bool,
    /// `c` lies in the open window `(1/51, 1/(16π))` rather than only below `1/(16π)`.
    pub c_in_window: bool,
}

/// `P(F < λ) ≤ exp(−c·n(1−p) / (2e⁸λ²)) + o(1)`.
///
/// `c` must lie in `(0, 1/(16π))`; values below `1/51` are accepted for
/// exploratory runs and reported through `c_in_window`.
pub fn lemma4_bound(n: usize, p: f64, lambda: f64, c: f64) -> Result<SlackedProbability> {
    check_p(p)?;
    check_positive("lambda", lambda)?;
    if !(c > 0.0 && c < C_MAX) {
        return Err(Error::invalid(format!("c = {c} is outside (0, 1/(16 pi))")));
    }
    let exponent = c * n as f64 * (1.0 - p) / (2.0 * E.powi(8) * lambda * lambda);
    Ok(SlackedProbability {
        value: (-exponent).exp(),
        unquantified_slack: true,
        c_in_window: c > C_MIN,
    })
}

/// `P(F > 2λ + 1) ≤ n²[exp(−p²n/16) + 128(1−p)/(p²nλ²)]`, unclamped.
pub fn lemma5_bound(n: usize, p: f64, lambda: f64) -> Result<f64> {
    check_p(p)?;
    check_positive("p", p)?;
    check_positive("lambda", lambda)?;
    let n = n as f64;
    let p2n = p * p * n;
    Ok(n * n * ((-p2n / 16.0).exp() + 128.0 * (1.0 - p) / (p2n * lambda * lambda)))
}

/// Lower bound `(1−p)/λ²` on the chance that a disc holding exactly its centre
/// and one other vertex is nice.
pub fn nice_probability_lower_bound(p: f64, lambda: f64) -> Result<f64> {
    check_p(p)?;
    check_positive("lambda", lambda)?;
    Ok((1.0 - p) / (lambda * lambda))
}

/// Minimum number `e⁻⁸·m` of discs with exactly two vertices, out of `m` primary discs.
pub fn two_vertex_disc_threshold(m: usize) -> f64 {
    (-8.0f64).exp() * m as f64
}

/// Asymptotic behaviour of `n(1−p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `n(1−p) → 0`: the stretch factor is bounded a.a.s.
    Bounded,
    /// `n(1−p) = Θ(1)`.
    Critical,
    /// `n(1−p) → ∞`: the stretch factor exceeds any constant a.a.s.
    Unbounded,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Bounded => "BOUNDED",
            Regime::Critical => "CRITICAL",
            Regime::Unbounded => "UNBOUNDED",
        })
    }
}

/// Edge probability as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PExpression {
    /// `p = a`
    Constant { a: f64 },
    /// `p = 1 − a/n^b`
    OneMinusPower { a: f64, b: f64 },
    /// `p = 1 − a/(n log n)`
    OneMinusNLogN { a: f64 },
    /// `p = √(a log n / n)`
    Threshold { a: f64 },
}

/// Vertex counts used to validate expressions and fit the numeric classifier.
pub const CLASSIFY_RANGE: std::ops::RangeInclusive<u32> = 10..=20;

const SLOPE_TOLERANCE: f64 = 0.05;

impl PExpression {
    /// `p(n)`, checked to lie in `[0, 1]`.
    pub fn eval(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let p = match *self {
            PExpression::Constant { a } => a,
            PExpression::OneMinusPower { a, b } => 1.0 - a / nf.powf(b),
            PExpression::OneMinusNLogN { a } => 1.0 - a / (nf * nf.ln()),
            PExpression::Threshold { a } => (a * nf.ln() / nf).sqrt(),
        };
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(Error::invalid(format!("{self} evaluates to {p} at n = {n}, outside [0, 1]")))
        }
    }

    /// Checks the parameters alone, without evaluating at any `n`.
    pub fn check_parameters(&self) -> Result<()> {
        let ok = match *self {
            PExpression::Constant { a } => (0.0..=1.0).contains(&a),
            PExpression::OneMinusPower { a, b } => a > 0.0 && b > 0.0,
            PExpression::OneMinusNLogN { a } | PExpression::Threshold { a } => a > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("malformed p-expression {self}")))
        }
    }

    /// Checks parameters and that `p(n) ∈ [0, 1]` for every `n` in `ns`.
    pub fn validate_on(&self, ns: impl IntoIterator<Item = usize>) -> Result<()> {
        self.check_parameters()?;
        for n in ns {
            self.eval(n)?;
        }
        Ok(())
    }

    fn classify_range() -> impl Iterator<Item = usize> {
        CLASSIFY_RANGE.map(|k| 1usize << k)
    }
}

impl fmt::Display for PExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExpression::Constant { a } => write!(f, "const({a})"),
            PExpression::OneMinusPower { a, b } => write!(f, "one_minus_pow({a},{b})"),
            PExpression::OneMinusNLogN { a } => write!(f, "one_minus_nlogn({a})"),
            PExpression::Threshold { a } => write!(f, "threshold({a})"),
        }
    }
}

impl FromStr for PExpression {
    type Err = Error;

    /// Accepts `const(a)`, `one_minus_pow(a,b)`, `one_minus_nlogn(a)`,
    /// `threshold(a)`, or a bare number for a constant.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse p-expression {s:?}"));
        if let Ok(a) = s.parse::<f64>() {
            let expr = PExpression::Constant { a };
            expr.check_parameters()?;
            return Ok(expr);
        }
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args = inner
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let expr = match (&s[..open], args.as_slice()) {
            ("const", &[a]) => PExpression::Constant { a },
            ("one_minus_pow", &[a, b]) => PExpression::OneMinusPower { a, b },
            ("one_minus_nlogn", &[a]) => PExpression::OneMinusNLogN { a },
            ("threshold", &[a]) => PExpression::Threshold { a },
            _ => return Err(bad()),
        };
        expr.check_parameters()?;
        Ok(expr)
    }
}

/// Regime of an expression family, decided symbolically.
pub fn regime_classify(expr: &PExpression) -> Result<Regime> {
    expr.validate_on(PExpression::classify_range())?;
    Ok(match *expr {
        PExpression::Constant { a } if a == 1.0 => Regime::Bounded,
        PExpression::Constant { .. } => Regime::Unbounded,
        PExpression::OneMinusPower { b, .. } if b > 1.0 => Regime::Bounded,
        PExpression::OneMinusPower { b, .. } if b == 1.0 => Regime::Critical,
        PExpression::OneMinusPower { .. } => Regime::Unbounded,
        PExpression::OneMinusNLogN { .. } => Regime::Bounded,
        PExpression::Threshold { .. } => Regime::Unbounded,
    })
}

/// Regime decided from the least-squares slope of `log(n(1−p(n)))` against
/// `log n` over `n = 2¹⁰, …, 2²⁰`. Slopes beyond `±0.05` count as growth or decay;
/// the threshold is a heuristic that separates the supported families.
pub fn regime_classify_numeric(expr: &PExpression) -> Result<Regime> {
    expr.validate_on(PExpression::classify_range())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in PExpression::classify_range() {
        let slack = n as f64 * (1.0 - expr.eval(n)?);
        if slack <= 0.0 {
            return Ok(Regime::Bounded);
        }
        xs.push((n as f64).ln());
        ys.push(slack.ln());
    }
    let slope = least_squares_slope(&xs, &ys);
    Ok(if slope > SLOPE_TOLERANCE {
        Regime::Unbounded
    } else if slope < -SLOPE_TOLERANCE {
        Regime::Bounded
    } else {
        Regime::Critical
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Inputs of [`evaluate_all`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub w: f64,
    pub c: Option<f64>,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        check_positive("lambda", self.lambda)?;
        check_positive("w", self.w)?;
        if let Some(c) = self.c {
            if !(c > 0.0 && c < C_MAX) {
                return Err(Error::invalid(format!("c = {c} is outside (0, 1/(16 pi))")));
            }
        }
        Ok(())
    }
}

/// Every bound applicable to one `(n, p, λ, w, c)`; `None` where a bound is not
/// defined (for instance `p = 0`), with the reason in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub inputs: BoundInputs,
    pub c_used: Option<f64>,
    pub thm1_threshold: f64,
    pub thm2_aas: Option<ConditionalBound>,
    pub thm2_expectation: Option<ConditionalBound>,
    pub lemma4: Option<SlackedProbability>,
    /// Bound on `P(F > 2λ + 1)`.
    pub lemma5: Option<f64>,
    pub nice_probability_lower_bound: f64,
    pub regime: Option<Regime>,
    pub notes: Vec<String>,
}

/// Evaluates every bound. Without an explicit `c`, the value from
/// [`pick_c`] is used when one exists.
pub fn evaluate_all(inputs: BoundInputs, expr: Option<&PExpression>) -> Result<BoundsReport> {
    inputs.validate()?;
    let BoundInputs { n, p, lambda, w, c } = inputs;
    let mut notes = Vec::new();
    let c_used = match c {
        Some(c) => Some(c),
        None => match pick_c(n) {
            Ok(c) => Some(c),
            Err(e) => {
                notes.push(format!("lemma4: {e}"));
                None
            }
        },
    };
    let mut positive_p = |what: &str| {
        if p > 0.0 {
            true
        } else {
            notes.push(format!("{what}: undefined for p = 0"));
            false
        }
    };
    let thm2_aas = positive_p("thm2_aas").then(|| thm2_aas_bound(n, p, w)).transpose()?;
    let thm2_expectation = positive_p("thm2_expectation")
        .then(|| thm2_expectation_bound(n, p))
        .transpose()?;
    let lemma5 = positive_p("lemma5").then(|| lemma5_bound(n, p, lambda)).transpose()?;
    let lemma4 = c_used.map(|c| lemma4_bound(n, p, lambda, c)).transpose()?;
    let regime = expr.map(regime_classify).transpose()?;
    Ok(BoundsReport {
        inputs,
        c_used,
        thm1_threshold: thm1_threshold(n, p, w)?,
        thm2_aas,
        thm2_expectation,
        lemma4,
        lemma5,
        nice_probability_lower_bound: nice_probability_lower_bound(p, lambda)?,
        regime,
        notes,
    })
}
