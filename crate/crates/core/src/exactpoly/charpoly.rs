use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntPoly;
use crate::groupring::RealizedMatrix;
use crate::linalg::IntMatrix;

/// `det(t·I - M)` of the integer entry array of `m` (the denominator is
/// ignored), by the division-free Berkowitz algorithm.
pub fn charpoly(m: &RealizedMatrix) -> IntPoly {
    let rows: Vec<&[(usize, BigInt)]> = (0..m.dim()).map(|i| m.row(i)).collect();
    berkowitz(&rows)
}

pub fn charpoly_dense(m: &IntMatrix) -> IntPoly {
    assert!(m.is_square());
    let sparse = RealizedMatrix::from_dense(m);
    charpoly(&sparse)
}

fn berkowitz(rows: &[&[(usize, BigInt)]]) -> IntPoly {
    let n = rows.len();
    let mut v: Vec<BigInt> = vec![BigInt::one()];
    for r in 0..n {
        let mut diag = BigInt::zero();
        let mut row_part: Vec<BigInt> = vec![BigInt::zero(); r];
        for (c, val) in rows[r] {
            if *c < r {
                row_part[*c] = val.clone();
            } else if *c == r {
                diag = val.clone();
            }
        }
        let mut col_part: Vec<BigInt> = vec![BigInt::zero(); r];
        for (i, row) in rows.iter().enumerate().take(r) {
            if let Ok(k) = row.binary_search_by_key(&r, |(c, _)| *c) {
                col_part[i] = row[k].1.clone();
            }
        }
        // first column of the Toeplitz factor: 1, -a, -R C, -R A C, ...
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(BigInt::one());
        toeplitz.push(-diag);
        let mut x = row_part;
        for j in 0..r {
            let dot = x.iter().zip(&col_part).filter(|(a, b)| !a.is_zero() && !b.is_zero()).fold(BigInt::zero(), |acc, (a, b)| acc + a * b);
            toeplitz.push(-dot);
            if j + 1 < r {
                let mut y = vec![BigInt::zero(); r];
                for (i, xi) in x.iter().enumerate() {
                    if xi.is_zero() {
                        continue;
                    }
                    for (c, val) in rows[i] {
                        if *c >= r {
                            break;
                        }
                        y[*c] += xi * val;
                    }
                }
                x = y;
            }
        }
        let mut next = vec![BigInt::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate().take(i + 1) {
                let t = &toeplitz[i - j];
                if !t.is_zero() && !vj.is_zero() {
                    *slot += t * vj;
                }
            }
        }
        v = next;
    }
    v.reverse();
    IntPoly::from_coeffs(v)
}
