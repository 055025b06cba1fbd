//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::io::Write;

use stretchlab::EmbeddedGraph;

/// Prints a line that is not swallowed by the test harness's output capture.
pub fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

/// Area of the disc of radius `r` about `(cx, cy)` inside `[0,1]²`, by
/// numerical integration of the clipped chord length.
///
/// With `x = cx + r·sin θ` the chord half-height is `r·cos θ`, which removes
/// the square-root singularities at the ends of the disc. The integrand is
/// then smooth except where the chord meets the square's top or bottom edge
/// or `x` crosses 0 or 1; those angles split the range and each piece is
/// integrated by adaptive Simpson.
pub fn quadrature_area(cx: f64, cy: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let half = std::f64::consts::FRAC_PI_2;
    let mut breaks = vec![-half, half];
    let mut add_asin = |v: f64| {
        if v.abs() < 1.0 {
            breaks.push(v.asin());
        }
    };
    add_asin(-cx / r);
    add_asin((1.0 - cx) / r);
    let mut add_acos = |v: f64| {
        if v.abs() < 1.0 {
            let t = v.acos();
            breaks.push(t);
            breaks.push(-t);
        }
    };
    add_acos((1.0 - cy) / r);
    add_acos(cy / r);
    breaks.retain(|t| (-half..=half).contains(t));
    breaks.sort_by(f64::total_cmp);

    let f = |t: f64| {
        let x = cx + r * t.sin();
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let h = r * t.cos();
        let top = (cy + h).min(1.0);
        let bottom = (cy - h).max(0.0);
        (top - bottom).max(0.0) * r * t.cos()
    };
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-13, 40))
        .sum()
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Stretch factor by Floyd–Warshall over an explicit weight matrix: the
/// largest `d_G/d` over distinct pairs with the lexicographically smallest
/// pair on ties, floored at 1. `None` for a disconnected graph.
pub fn brute_force_stretch(g: &EmbeddedGraph) -> Option<(f64, (usize, usize))> {
    let n = g.n();
    let pts: Vec<(f64, f64)> = g.points().iter().map(|p| (p.x, p.y)).collect();
    let dist = |i: usize, j: usize| ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (i, j) in g.edges() {
        d[i][j] = dist(i, j);
        d[j][i] = dist(i, j);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let mut best = (1.0, (0, 1));
    let mut first = true;
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j].is_infinite() {
                return None;
            }
            let ratio = d[i][j] / dist(i, j);
            if first || ratio > best.0 {
                best = (ratio, (i, j));
                first = false;
            }
        }
    }
    if best.0 < 1.0 {
        best = (1.0, (0, 1));
    }
    Some(best)
}

/// `(i, j)` distances by plain Floyd–Warshall, for APSP checks.
pub fn floyd_warshall(g: &EmbeddedGraph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (i, j) in g.edges() {
        let w = g.edge_weight(i, j).unwrap();
        d[i][j] = w;
        d[j][i] = w;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Relative difference, `0` when both are equal (including both infinite).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Quantile `q` of sorted values, interpolating linearly at position `(k−1)q`.
pub fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    if sorted[hi] == sorted[lo] {
        return sorted[lo];
    }
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Two-sample Kolmogorov–Smirnov statistic, by evaluating both empirical CDFs
/// at every sample value.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |xs: &[f64], t: f64| xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64;
    a.iter()
        .chain(b)
        .map(|&t| (ecdf(a, t) - ecdf(b, t)).abs())
        .fold(0.0, f64::max)
}
