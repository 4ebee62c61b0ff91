//! Exact evaluation of integer polynomials at points with `f64` coordinates.
//!
//! Every finite double is a dyadic rational, so `p(z)` can be computed exactly
//! in big-integer arithmetic and rounded once at the end.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::exactpoly::IntPoly;

/// `(m, e)` with `x = m · 2^e`.
fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (m, e) = if exponent == 0 { (fraction, -1074) } else { (fraction | (1u64 << 52), exponent - 1075) };
    let m = BigInt::from(m);
    (if x < 0.0 { -m } else { m }, e)
}

/// Multiplies `x` by `2^k` without intermediate overflow.
fn ldexp(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

/// `x / 2^shift` rounded to a double (relative error below `2^-52`).
pub(crate) fn scaled_to_f64(x: &BigInt, shift: i64) -> f64 {
    let bits = x.bits() as i64;
    if bits == 0 {
        return 0.0;
    }
    let drop = (bits - 64).max(0);
    let top = (x.abs() >> drop as usize).to_f64().unwrap_or(f64::INFINITY);
    let v = ldexp(top, drop - shift);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Natural logarithm of `|x|` for arbitrarily large integers.
pub(crate) fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits() as i64;
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let drop = (bits - 64).max(0);
    let top = (x.abs() >> drop as usize).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + drop as f64 * std::f64::consts::LN_2
}

/// `p(z)` evaluated exactly, then rounded.
pub fn eval_exact(p: &IntPoly, z: Complex64) -> Complex64 {
    if p.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let (mr, er) = decompose(z.re);
    let (mi, ei) = decompose(z.im);
    let mut s = 0i64;
    if !mr.is_zero() {
        s = s.max(-er);
    }
    if !mi.is_zero() {
        s = s.max(-ei);
    }
    let a = if mr.is_zero() { BigInt::zero() } else { shift(&mr, er + s) };
    let b = if mi.is_zero() { BigInt::zero() } else { shift(&mi, ei + s) };
    // z = (a + ib) / 2^s; accumulate 2^(s·n) p(z)
    let n = p.degree();
    let coeffs = p.coeffs();
    let mut re = coeffs[n].clone();
    let mut im = BigInt::zero();
    for j in (0..n).rev() {
        let nre = &re * &a - &im * &b;
        let nim = &re * &b + &im * &a;
        re = nre;
        im = nim;
        if !coeffs[j].is_zero() {
            re += &coeffs[j] << ((s as usize) * (n - j));
        }
    }
    let total = s * n as i64;
    Complex64::new(scaled_to_f64(&re, total), scaled_to_f64(&im, total))
}

fn shift(m: &BigInt, k: i64) -> BigInt {
    if k >= 0 {
        m << k as usize
    } else {
        m >> (-k) as usize
    }
}

/// Horner evaluation of `p` and `p'` in doubles, with a running bound on the
/// rounding error of each value.
pub(crate) fn eval_f64_with_error(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64, f64, f64) {
    let n = coeffs.len() - 1;
    let mut p = Complex64::new(coeffs[n], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let r = z.norm();
    let mut bound = coeffs[n].abs();
    let mut dbound = 0.0;
    for j in (0..n).rev() {
        dp = dp * z + p;
        dbound = dbound * r + bound;
        p = p * z + coeffs[j];
        bound = bound * r + coeffs[j].abs();
    }
    let u = f64::EPSILON;
    let gamma = 8.0 * (n as f64 + 2.0) * u;
    (p, dp, gamma * bound, gamma * dbound)
}
