#![allow(dead_code)]

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use sspec_core::groupring::{GroupRingElement, GroupRingMatrix};
use sspec_core::groups::GroupSpec;

/// Writes a result line past the test harness's output capture.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let line = format!("criterion {criterion:>2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

pub fn scalar_op(spec: &GroupSpec, s: &str) -> GroupRingMatrix {
    GroupRingMatrix::scalar(GroupRingElement::parse(spec, s).unwrap())
}

/// Integer matrix over the trivial group.
pub fn integer_matrix(rows: &[Vec<i64>]) -> (GroupSpec, GroupRingMatrix) {
    let n = rows.len();
    let entries = rows
        .iter()
        .flat_map(|r| r.iter().map(|&c| GroupRingElement::scalar(BigRational::from_integer(BigInt::from(c)))))
        .collect();
    (GroupSpec::cyclic(1).unwrap(), GroupRingMatrix::new(n, entries).unwrap())
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; n]; n];
    for &(i, j) in edges {
        a[i][j] = 1;
        a[j][i] = 1;
    }
    a
}

pub fn path_graph(n: usize) -> Vec<Vec<i64>> {
    adjacency(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>())
}

/// `c₀ + Σ c_j (s^j + s^-j)` on `cyclic(m)`, plus `c s^(m/2)` for even `m`.
pub fn random_self_adjoint(rng: &mut impl Rng, m: usize, coeff: i64) -> String {
    let mut terms = vec![format!("{}", rng.gen_range(-coeff..=coeff))];
    for j in 1..=(m - 1) / 2 {
        let c = rng.gen_range(-coeff..=coeff);
        if c != 0 {
            terms.push(format!("{c}*s^{j} + {c}*S^{j}"));
        }
    }
    if m.is_multiple_of(2) && m > 1 {
        let c = rng.gen_range(-coeff..=coeff);
        if c != 0 {
            terms.push(format!("{c}*s^{}", m / 2));
        }
    }
    terms.join(" + ")
}

/// `Σ c_j s^j` on `cyclic(m)`.
pub fn random_element(rng: &mut impl Rng, m: usize, coeff: i64) -> String {
    (0..m).map(|j| format!("{}*s^{j}", rng.gen_range(-coeff..=coeff))).collect::<Vec<_>>().join(" + ")
}

/// Number of eigenvalues of the symmetric matrix `a` greater than `x`, by
/// Sylvester inertia of `a - x I` through unpivoted LDLᵀ.
pub fn eigenvalues_above(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut positive = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot > 0.0 {
            positive += 1;
        }
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            let f = row[k] / pivot;
            for (x, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x -= f * p;
            }
        }
    }
    positive
}

/// Spectral radius of a symmetric matrix by bisection on inertia counts.
pub fn spectral_radius_oracle(a: &[Vec<i64>]) -> f64 {
    let f: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
    let bound = a.iter().map(|r| r.iter().map(|c| c.abs()).sum::<i64>()).max().unwrap_or(0) as f64 + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    // largest eigenvalue
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if eigenvalues_above(&f, mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let top = hi;
    let n = a.len();
    let (mut lo, mut hi) = (-bound, bound);
    // smallest eigenvalue
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if eigenvalues_above(&f, mid) < n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    top.max(-lo)
}
