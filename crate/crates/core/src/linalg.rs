//! Dense integer matrices with fraction-free (Bareiss) elimination.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Row-major dense matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `t0·I - self` for square matrices.
    pub fn shifted(&self, t0: &BigInt) -> IntMatrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for x in m.data.iter_mut() {
            *x = -&*x;
        }
        for i in 0..self.rows {
            m[(i, i)] += t0;
        }
        m
    }

    /// Determinant by Bareiss elimination.
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut prev = BigInt::one();
        let mut negate = false;
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[(i, k)].is_zero()) else {
                return BigInt::zero();
            };
            if p != k {
                a.swap_rows(p, k);
                negate = !negate;
            }
            a.eliminate_below(k, k, &prev);
            prev = a[(k, k)].clone();
        }
        let det = a[(n - 1, n - 1)].clone();
        if negate {
            -det
        } else {
            det
        }
    }

    /// Rank over the rationals by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !a[(i, c)].is_zero()) else {
                continue;
            };
            a.swap_rows(p, r);
            a.eliminate_below(r, c, &prev);
            prev = a[(r, c)].clone();
            r += 1;
        }
        r
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// One Bareiss step with pivot `(r, c)`: rows below `r`, columns after `c`.
    fn eliminate_below(&mut self, r: usize, c: usize, prev: &BigInt) {
        let cols = self.cols;
        let pivot = self[(r, c)].clone();
        let pivot_row: Vec<BigInt> = self.data[r * cols + c + 1..(r + 1) * cols].to_vec();
        for i in r + 1..self.rows {
            let lead = std::mem::take(&mut self.data[i * cols + c]);
            let row = &mut self.data[i * cols + c + 1..(i + 1) * cols];
            if lead.is_zero() {
                if pivot.is_one() && prev.is_one() {
                    continue;
                }
                for x in row.iter_mut() {
                    if !x.is_zero() {
                        *x = &*x * &pivot / prev;
                    }
                }
            } else {
                for (x, pr) in row.iter_mut().zip(&pivot_row) {
                    let v = &*x * &pivot - &lead * pr;
                    *x = v / prev;
                }
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..=p.len() {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn leibniz(m: &IntMatrix) -> BigInt {
        let n = m.rows();
        let mut total = BigInt::zero();
        for p in permutations(n) {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let mut term = BigInt::one();
            for (i, &pi) in p.iter().enumerate() {
                term *= &m[(i, pi)];
            }
            if inversions % 2 == 1 {
                term = -term;
            }
            total += term;
        }
        total
    }

    #[test]
    fn determinant_matches_leibniz() {
        let m = IntMatrix::from_i64(&[vec![2, -1, 0, 3], vec![1, 0, 4, -2], vec![0, 5, -3, 1], vec![7, 2, 1, 0]]);
        assert_eq!(m.determinant(), leibniz(&m));
        let singular = IntMatrix::from_i64(&[vec![0, 1, 2], vec![0, 2, 4], vec![0, 3, 7]]);
        assert_eq!(singular.determinant(), BigInt::zero());
    }

    #[test]
    fn rank_of_structured_matrices() {
        let m = IntMatrix::from_i64(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(IntMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(IntMatrix::identity(5).rank(), 5);
        let wide = IntMatrix::from_i64(&[vec![0, 0, 1, 2], vec![0, 0, 2, 4], vec![0, 1, 0, 0]]);
        assert_eq!(wide.rank(), 2);
    }
}
