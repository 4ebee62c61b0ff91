//! Distribution helpers: reference laws, Kolmogorov–Smirnov distances and
//! limit extrapolation of scale sequences.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Arcsine law on `[-2, 2]`: `F(x) = 1 - arccos(x/2)/π`.
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        1.0 - (x / 2.0).acos() / PI
    }
}

/// Kesten–McKay density of the `d`-regular tree (`d ≥ 2`).
pub fn kesten_mckay_density(x: f64, d: usize) -> f64 {
    let d = d as f64;
    let edge = 4.0 * (d - 1.0);
    if x * x >= edge {
        return 0.0;
    }
    d * (edge - x * x).sqrt() / (2.0 * PI * (d * d - x * x))
}

/// Kesten–McKay CDF by composite Simpson integration in the angle
/// `x = 2√(d-1)·cos θ`, which removes the square-root edges.
pub fn kesten_mckay_cdf(x: f64, d: usize) -> f64 {
    let rho = 2.0 * ((d as f64) - 1.0).sqrt();
    if x <= -rho {
        return 0.0;
    }
    if x >= rho {
        return 1.0;
    }
    let theta0 = (x / rho).acos();
    let df = d as f64;
    // density times dx/dθ, simplified so the endpoints stay finite
    let g = |t: f64| {
        let r2s2 = (rho * t.sin()).powi(2);
        let denom = (df - 2.0).powi(2) + r2s2;
        if denom == 0.0 {
            df / (2.0 * PI)
        } else {
            df * r2s2 / (2.0 * PI * denom)
        }
    };
    let steps = 2000;
    let h = (PI - theta0) / steps as f64;
    let mut s = g(theta0) + g(PI);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(theta0 + k as f64 * h);
    }
    (s * h / 3.0).clamp(0.0, 1.0)
}

/// Sup distance between the empirical CDF of `sorted` and a continuous CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs())
    })
}

/// Sup distance between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// Empirical CDF of `sorted` evaluated at each grid point.
pub fn empirical_cdf(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len().max(1) as f64;
    grid.iter().map(|&x| sorted.partition_point(|&v| v <= x) as f64 / n).collect()
}

/// Number of values of a sorted slice in `[center - radius, center + radius]`.
pub fn count_within(sorted: &[f64], center: f64, radius: f64) -> usize {
    let lo = sorted.partition_point(|&v| v < center - radius);
    let hi = sorted.partition_point(|&v| v <= center + radius);
    hi - lo
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub last: f64,
    pub last3_mean: f64,
    pub cesaro: f64,
    /// First-order extrapolation in `1/N` from the last two points.
    pub richardson: f64,
    /// The value reported as the limit.
    pub headline: f64,
    /// Max pairwise deviation of the last three points.
    pub spread: f64,
    pub non_cauchy: bool,
}

/// Limit diagnostics of a sequence observed at increasing dimensions.
pub fn limit_estimate(dims: &[usize], values: &[f64], tolerance: f64) -> LimitEstimate {
    assert_eq!(dims.len(), values.len());
    let n = values.len();
    if n == 0 {
        return LimitEstimate {
            last: f64::NAN,
            last3_mean: f64::NAN,
            cesaro: f64::NAN,
            richardson: f64::NAN,
            headline: f64::NAN,
            spread: 0.0,
            non_cauchy: false,
        };
    }
    let tail = &values[n.saturating_sub(3)..];
    let last3_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().flat_map(|a| tail.iter().map(move |b| (a - b).abs())).fold(0.0, f64::max);
    let cesaro = values.iter().sum::<f64>() / n as f64;
    let last = values[n - 1];
    let richardson = if n >= 2 && dims[n - 1] != dims[n - 2] {
        let (a, b) = (dims[n - 2] as f64, dims[n - 1] as f64);
        ((b * values[n - 1] - a * values[n - 2]) / (b - a)).clamp(0.0, 1.0)
    } else {
        last
    };
    LimitEstimate { last, last3_mean, cesaro, richardson, headline: richardson, spread, non_cauchy: spread > 10.0 * tolerance }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_values() {
        assert!((arcsine_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((arcsine_cdf(2f64.sqrt()) - 0.75).abs() < 1e-15);
        assert_eq!(arcsine_cdf(-3.0), 0.0);
    }

    #[test]
    fn kesten_mckay_is_a_distribution() {
        assert!((kesten_mckay_cdf(0.0, 4) - 0.5).abs() < 1e-9);
        assert!(kesten_mckay_cdf(3.46, 4) > 0.9999);
        // d = 2 is the arcsine law
        for x in [-1.5, -0.3, 0.4, 1.9] {
            assert!((kesten_mckay_cdf(x, 2) - arcsine_cdf(x)).abs() < 1e-9, "{x}: {} {}", kesten_mckay_cdf(x, 2), arcsine_cdf(x));
        }
    }

    #[test]
    fn ks_examples() {
        let u: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_distance(&u, |x| x.clamp(0.0, 1.0)) - 0.005).abs() < 1e-12);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]), 1.0);
        assert_eq!(count_within(&[-1.0, 0.0, 0.0, 1.0], 0.0, 0.5), 2);
        assert_eq!(empirical_cdf(&[0.0, 1.0], &[-1.0, 0.0, 2.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn richardson_removes_inverse_scale_decay() {
        let dims: Vec<usize> = (2..=12).map(|k| 1 << k).collect();
        let vals: Vec<f64> = dims.iter().map(|&m| 2.0 / m as f64).collect();
        let l = limit_estimate(&dims, &vals, 1e-3);
        assert!(l.headline.abs() < 1e-12);
        let c = limit_estimate(&[2, 4, 6], &[0.5, 0.5, 0.5], 1e-3);
        assert_eq!(c.headline, 0.5);
        assert!(!c.non_cauchy);
    }
}
