//! Eigenvalues of real symmetric matrices: reduction to tridiagonal form
//! (Givens band reduction after a bandwidth-minimizing reordering, or dense
//! Householder) followed by the implicit QL iteration.

use num_traits::ToPrimitive;

use super::SpectraError;
use crate::groupring::RealizedMatrix;

/// Sorted eigenvalues of `m / denominator` for a symmetric realized matrix.
pub fn eigenvalues_symmetric(m: &RealizedMatrix) -> Result<Vec<f64>, SpectraError> {
    if !m.is_symmetric() {
        return Err(SpectraError::NotSymmetric);
    }
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let denom = m.denominator().to_f64().unwrap_or(1.0);
    let pattern: Vec<Vec<usize>> = (0..n).map(|i| m.row(i).iter().map(|(j, _)| *j).collect()).collect();
    let order = reverse_cuthill_mckee(&pattern);
    let mut position = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    let bandwidth = (0..n)
        .flat_map(|i| m.row(i).iter().map(move |(j, _)| (i, *j)))
        .map(|(i, j)| position[i].abs_diff(position[j]))
        .max()
        .unwrap_or(0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for (j, v) in m.row(i) {
            a[position[i] * n + position[*j]] = v.to_f64().unwrap_or(f64::NAN) / denom;
        }
    }
    let (mut d, mut e) = if bandwidth * 8 < n { band_tridiagonalize(&mut a, n, bandwidth) } else { householder_tridiagonalize(&mut a, n) };
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Sorted eigenvalues of a dense symmetric row-major matrix.
pub fn eigenvalues_dense(a: &[f64], n: usize) -> Result<Vec<f64>, SpectraError> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut work = a.to_vec();
    let (mut d, mut e) = householder_tridiagonalize(&mut work, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reverse Cuthill–McKee ordering of a symmetric sparsity pattern.
fn reverse_cuthill_mckee(pattern: &[Vec<usize>]) -> Vec<usize> {
    let n = pattern.len();
    let degree: Vec<usize> = pattern.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut next: Vec<usize> = pattern[u].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            next.dedup();
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// Givens reduction of a symmetric band matrix (half-bandwidth `b`, dense
/// storage) to tridiagonal form, chasing each bulge down the band.
fn band_tridiagonalize(a: &mut [f64], n: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
    if b >= 2 {
        for j in 0..n.saturating_sub(2) {
            for k in (2..=b.min(n - 1 - j)).rev() {
                let (mut col, mut p, mut q) = (j, j + k - 1, j + k);
                loop {
                    let x = a[p * n + col];
                    let y = a[q * n + col];
                    if y != 0.0 {
                        let r = x.hypot(y);
                        let (c, s) = (x / r, y / r);
                        let lo = p.saturating_sub(b + 1);
                        let hi = (q + b + 1).min(n - 1);
                        for t in lo..=hi {
                            let (ap, aq) = (a[p * n + t], a[q * n + t]);
                            a[p * n + t] = c * ap + s * aq;
                            a[q * n + t] = c * aq - s * ap;
                        }
                        for t in lo..=hi {
                            let (ap, aq) = (a[t * n + p], a[t * n + q]);
                            a[t * n + p] = c * ap + s * aq;
                            a[t * n + q] = c * aq - s * ap;
                        }
                        a[q * n + col] = 0.0;
                        a[col * n + q] = 0.0;
                    } else {
                        // no rotation, so no bulge to chase
                        break;
                    }
                    if q + b >= n {
                        break;
                    }
                    col = p;
                    p = q + b - 1;
                    q += b;
                }
            }
        }
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    let e = (0..n).map(|i| if i + 1 < n { a[(i + 1) * n + i] } else { 0.0 }).collect();
    (d, e)
}

/// Householder vector for `x`: returns `(v, beta, alpha)` with
/// `(I - beta v vᵀ) x = alpha e₁`.
fn householder_vector(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (vec![0.0; x.len()], 0.0, 0.0);
    }
    let alpha = if x[0] > 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vv = v.iter().map(|t| t * t).sum::<f64>();
    if vv == 0.0 {
        return (vec![0.0; x.len()], 0.0, alpha);
    }
    (v, 2.0 / vv, alpha)
}

/// Dense Householder tridiagonalization working on the lower triangle. The
/// rank-two update of each step is fused with the matrix-vector product of
/// the next step so the trailing block is read once per step.
fn householder_tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        d[0] = a[0];
        return (d, e);
    }
    // symmetric product with the lower triangle of the block starting at `start`
    let symv = |a: &[f64], start: usize, v: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; n - start];
        for i in start..n {
            let row = &a[i * n + start..i * n + i];
            let vi = v[i - start];
            let mut acc = 0.0;
            for (jj, &aij) in row.iter().enumerate() {
                acc += aij * v[jj];
                p[jj] += aij * vi;
            }
            p[i - start] += acc + a[i * n + i] * vi;
        }
        p
    };
    let column = |a: &[f64], k: usize| -> Vec<f64> { (k + 1..n).map(|i| a[i * n + k]).collect() };

    let (mut v, mut beta, mut alpha) = householder_vector(&column(a, 0));
    let mut p: Vec<f64> = symv(a, 1, &v).into_iter().map(|t| t * beta).collect();
    for k in 0..n - 2 {
        d[k] = a[k * n + k];
        e[k] = alpha;
        let start = k + 1;
        let m = n - start;
        let pv: f64 = p.iter().zip(&v).map(|(x, y)| x * y).sum();
        let kk = beta * pv / 2.0;
        let w: Vec<f64> = p.iter().zip(&v).map(|(x, y)| x - kk * y).collect();
        if k + 3 < n {
            // next column after this step's update
            let next_col: Vec<f64> = (start + 1..n)
                .map(|i| a[i * n + start] - v[i - start] * w[0] - w[i - start] * v[0])
                .collect();
            let (nv, nbeta, nalpha) = householder_vector(&next_col);
            let mut np = vec![0.0; m - 1];
            for ii in 0..m {
                let i = start + ii;
                let (vi, wi) = (v[ii], w[ii]);
                let row = &mut a[i * n + start..=i * n + i];
                for (jj, aij) in row.iter_mut().enumerate() {
                    *aij -= vi * w[jj] + wi * v[jj];
                }
                if ii >= 1 {
                    let nvi = nv[ii - 1];
                    let mut acc = 0.0;
                    for jj in 1..ii {
                        let aij = row[jj];
                        acc += aij * nv[jj - 1];
                        np[jj - 1] += aij * nvi;
                    }
                    np[ii - 1] += acc + row[ii] * nvi;
                }
            }
            v = nv;
            beta = nbeta;
            alpha = nalpha;
            p = np.into_iter().map(|t| t * beta).collect();
        } else {
            for ii in 0..m {
                let i = start + ii;
                for jj in 0..=ii {
                    a[i * n + start + jj] -= v[ii] * w[jj] + w[ii] * v[jj];
                }
            }
        }
    }
    d[n - 2] = a[(n - 2) * n + n - 2];
    d[n - 1] = a[(n - 1) * n + n - 1];
    e[n - 2] = a[(n - 1) * n + n - 2];
    e[n - 1] = 0.0;
    (d, e)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix
/// with diagonal `d` and off-diagonal `e[i]` between rows `i` and `i + 1`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<(), SpectraError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 100 {
                return Err(SpectraError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use std::f64::consts::PI;

    fn circulant(m: usize) -> RealizedMatrix {
        let rows = (0..m).map(|i| vec![((i + 1) % m, BigInt::from(1)), ((i + m - 1) % m, BigInt::from(1))]).collect();
        RealizedMatrix::from_rows(m, rows, BigInt::from(1))
    }

    fn expected_circulant(m: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..m).map(|k| 2.0 * (2.0 * PI * k as f64 / m as f64).cos()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn circulant_band_path() {
        for m in [3, 4, 5, 12, 60, 257] {
            let ev = eigenvalues_symmetric(&circulant(m)).unwrap();
            assert!(max_diff(&ev, &expected_circulant(m)) < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn dense_path_matches_band_path() {
        // random symmetric matrix through both reductions
        let n = 40;
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 7) as i64 - 3
        };
        let mut dense = vec![0.0; n * n];
        let mut rows = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                if v != 0 {
                    dense[i * n + j] = v as f64;
                    dense[j * n + i] = v as f64;
                    rows[i].push((j, BigInt::from(v)));
                    if i != j {
                        rows[j].push((i, BigInt::from(v)));
                    }
                }
            }
        }
        let m = RealizedMatrix::from_rows(n, rows, BigInt::from(1));
        let a = eigenvalues_dense(&dense, n).unwrap();
        let mut d: Vec<f64> = (0..n).map(|i| dense[i * n + i]).collect();
        let mut e = vec![0.0; n];
        let mut work = dense.clone();
        let (bd, be) = band_tridiagonalize(&mut work, n, n - 1);
        d.clone_from(&bd);
        e.clone_from(&be);
        tridiagonal_ql(&mut d, &mut e).unwrap();
        d.sort_by(f64::total_cmp);
        assert!(max_diff(&a, &d) < 1e-10);
        let b = eigenvalues_symmetric(&m).unwrap();
        assert!(max_diff(&a, &b) < 1e-10);
        let trace: f64 = (0..n).map(|i| dense[i * n + i]).sum();
        assert!((a.iter().sum::<f64>() - trace).abs() < 1e-9);
    }

    #[test]
    fn path_graph_spectrum() {
        for q in [3usize, 7, 12] {
            let n = q - 1;
            let rows = (0..n)
                .map(|i| {
                    let mut r = Vec::new();
                    if i > 0 {
                        r.push((i - 1, BigInt::from(1)));
                    }
                    if i + 1 < n {
                        r.push((i + 1, BigInt::from(1)));
                    }
                    r
                })
                .collect();
            let ev = eigenvalues_symmetric(&RealizedMatrix::from_rows(n, rows, BigInt::from(1))).unwrap();
            let mut expected: Vec<f64> = (1..q).map(|k| 2.0 * (k as f64 * PI / q as f64).cos()).collect();
            expected.sort_by(f64::total_cmp);
            assert!(max_diff(&ev, &expected) < 1e-12);
        }
    }

    #[test]
    fn zero_and_tiny() {
        let z = RealizedMatrix::from_rows(3, vec![Vec::new(); 3], BigInt::from(1));
        assert_eq!(eigenvalues_symmetric(&z).unwrap(), vec![0.0; 3]);
        let one = RealizedMatrix::from_rows(1, vec![vec![(0, BigInt::from(5))]], BigInt::from(2));
        assert_eq!(eigenvalues_symmetric(&one).unwrap(), vec![2.5]);
        assert!(max_diff(&eigenvalues_dense(&[1.0, 2.0, 2.0, 1.0], 2).unwrap(), &[-1.0, 3.0]) < 1e-14);
    }
}
