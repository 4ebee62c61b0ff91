use num_bigint::BigInt;

use super::{IntPoly, PolyError};
use crate::rootlab::{isolate_roots, RootError};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficient bounds `⌊C(d, k) λ^k⌋` for the coefficient of `t^(d-k)`.
fn coefficient_bounds(d: usize, lambda: f64) -> Vec<i64> {
    (1..=d).map(|k| (binomial(d, k) * lambda.powi(k as i32) + 1e-9).floor() as i64).collect()
}

/// All monic integer polynomials of degree `1..=n` whose roots lie in the
/// closed disk `|z| ≤ λ`. Roots on the boundary are accepted up to a
/// relative tolerance of `1e-9`.
pub fn enumerate_pn(n: usize, lambda: f64, budget: u128) -> Result<Vec<IntPoly>, RootError> {
    if n > 4 {
        return Err(PolyError::DegreeTooLarge(n).into());
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(RootError::BadArgument(format!("radius {lambda} must be finite and nonnegative")));
    }
    let mut needed: u128 = 0;
    for d in 1..=n {
        needed += coefficient_bounds(d, lambda).iter().map(|&b| 2 * b as u128 + 1).product::<u128>();
    }
    if needed > budget {
        return Err(PolyError::BudgetExceeded { needed, budget }.into());
    }
    let slack = lambda + 1e-9 * lambda.max(1.0);
    let mut out = Vec::new();
    for d in 1..=n {
        let bounds = coefficient_bounds(d, lambda);
        // coefficients of t^(d-1), ..., t^0
        let mut digits: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let mut coeffs: Vec<BigInt> = digits.iter().rev().map(|&c| BigInt::from(c)).collect();
            coeffs.push(BigInt::from(1));
            let q = IntPoly::from_coeffs(coeffs);
            let roots = isolate_roots(&q, 1e-12)?;
            if roots.roots.iter().all(|r| r.center().norm() - r.radius <= slack) {
                out.push(q);
            }
            let mut i = 0;
            loop {
                if i == digits.len() {
                    break;
                }
                if digits[i] < bounds[i] {
                    digits[i] += 1;
                    break;
                }
                digits[i] = -bounds[i];
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
    }
    out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    #[test]
    fn small_sets() {
        let one = enumerate_pn(1, 1.0, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(one.len(), 3);
        for q in ["t - 1", "t", "t + 1"] {
            assert!(one.contains(&p(q)));
        }
        assert_eq!(enumerate_pn(1, 0.5, DEFAULT_ENUMERATION_BUDGET).unwrap(), vec![p("t")]);
        let two = enumerate_pn(2, 1.0, DEFAULT_ENUMERATION_BUDGET).unwrap();
        for q in ["t^2 + 1", "t^2 + t + 1", "t^2 - t + 1", "t^2 - 1", "t^2"] {
            assert!(two.contains(&p(q)), "{q}");
        }
        assert!(!two.contains(&p("t^2 - t - 1")));
    }

    #[test]
    fn contains_quadratic_integers_up_to_two() {
        let two = enumerate_pn(2, 2.0, DEFAULT_ENUMERATION_BUDGET).unwrap();
        for q in ["t^2 - 2", "t^2 + t - 1", "t^2 - t - 1", "t^2 - 4", "t^2 + 4", "t^2 - 2*t + 2", "t^2 - 3*t + 2"] {
            assert!(two.contains(&p(q)), "{q}");
        }
        assert!(!two.contains(&p("t^2 - 3*t + 1")));
    }

    #[test]
    fn budget_and_degree_limits() {
        assert!(enumerate_pn(5, 1.0, DEFAULT_ENUMERATION_BUDGET).is_err());
        assert!(enumerate_pn(4, 10.0, 1000).is_err());
    }
}
