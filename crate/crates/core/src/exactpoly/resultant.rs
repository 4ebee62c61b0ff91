use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{IntPoly, PolyError};

fn divide_coeffs(p: &IntPoly, d: &BigInt) -> IntPoly {
    IntPoly::from_coeffs(p.coeffs().iter().map(|c| c / d).collect())
}

fn next_h(g: &BigInt, h: &BigInt, delta: usize) -> BigInt {
    match delta {
        0 => h.clone(),
        1 => g.clone(),
        _ => g.pow(delta as u32) / h.pow(delta as u32 - 1),
    }
}

/// Greatest common divisor in ℤ[t] with positive leading coefficient, by the
/// subresultant remainder sequence.
pub fn gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    if a.is_zero() {
        return b.normalize_sign();
    }
    if b.is_zero() {
        return a.normalize_sign();
    }
    let content = a.content().gcd(&b.content());
    let (mut x, mut y) = (a.primitive_part(), b.primitive_part());
    if x.degree() < y.degree() {
        std::mem::swap(&mut x, &mut y);
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = x.degree() - y.degree();
        let r = x.pseudo_rem(&y);
        if r.is_zero() {
            break;
        }
        if r.is_constant() {
            return IntPoly::constant(content);
        }
        x = y;
        y = divide_coeffs(&r, &(&g * h.pow(delta as u32)));
        g = x.leading();
        h = next_h(&g, &h, delta);
    }
    y.primitive_part().scale(&content)
}

/// Resultant `Res(a, b)` via the subresultant algorithm.
pub fn resultant(a: &IntPoly, b: &IntPoly) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    let (ca, cb) = (a.content(), b.content());
    let (mut x, mut y) = (a.primitive_part(), b.primitive_part());
    // primitive_part may flip signs; fold them into the contents
    let ca = if a.leading().is_negative() { -ca } else { ca };
    let cb = if b.leading().is_negative() { -cb } else { cb };
    let mut scale = ca.pow(b.degree() as u32) * cb.pow(a.degree() as u32);
    let mut sign = BigInt::one();
    if x.degree() < y.degree() {
        std::mem::swap(&mut x, &mut y);
        if x.degree() % 2 == 1 && y.degree() % 2 == 1 {
            sign = -sign;
        }
    }
    if y.degree() == 0 {
        return scale * sign * y.leading().pow(x.degree() as u32);
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = x.degree() - y.degree();
        if x.degree() % 2 == 1 && y.degree() % 2 == 1 {
            sign = -sign;
        }
        let r = x.pseudo_rem(&y);
        if r.is_zero() {
            return BigInt::zero();
        }
        x = y;
        y = divide_coeffs(&r, &(&g * h.pow(delta as u32)));
        g = x.leading();
        h = next_h(&g, &h, delta);
        if y.degree() == 0 {
            break;
        }
    }
    let dx = x.degree() as u32;
    let lc = y.leading();
    let hh = if dx == 1 { lc } else { lc.pow(dx) / h.pow(dx - 1) };
    scale *= sign * hh;
    scale
}

/// `∏_{i<j} (α_i - α_j)^2 · lc^(2n-2)`, computed as `(-1)^(n(n-1)/2) Res(p, p') / lc(p)`.
pub fn discriminant(p: &IntPoly) -> Result<BigInt, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let n = p.degree();
    if n == 0 {
        return Err(PolyError::ConstantPolynomial);
    }
    let r = resultant(p, &p.derivative()) / p.leading();
    Ok(if (n * (n - 1) / 2) % 2 == 1 { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;

    fn p(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    fn sylvester(a: &IntPoly, b: &IntPoly) -> BigInt {
        let (m, n) = (a.degree(), b.degree());
        let size = m + n;
        let mut s = IntMatrix::zeros(size, size);
        for i in 0..n {
            for (k, c) in a.coeffs().iter().rev().enumerate() {
                s[(i, i + k)] = c.clone();
            }
        }
        for i in 0..m {
            for (k, c) in b.coeffs().iter().rev().enumerate() {
                s[(n + i, i + k)] = c.clone();
            }
        }
        s.determinant()
    }

    #[test]
    fn discriminants() {
        assert_eq!(discriminant(&p("t^2 - 2")).unwrap(), BigInt::from(8));
        assert_eq!(discriminant(&p("t^2 + t + 1")).unwrap(), BigInt::from(-3));
        assert_eq!(discriminant(&p("t^2 - 2*t + 1")).unwrap(), BigInt::zero());
        assert_eq!(discriminant(&p("t^3 - t - 1")).unwrap(), BigInt::from(-23));
        assert!(discriminant(&p("5")).is_err());
    }

    #[test]
    fn resultant_matches_sylvester() {
        let cases = [
            ("t^3 - 2*t + 5", "3*t^2 + t - 4"),
            ("2*t^4 - t^3 + 7", "t^3 + t^2 - t + 1"),
            ("t^2 + 1", "t^5 - 3*t + 2"),
            ("-3*t^3 + 6*t", "4*t^2 - 2"),
            ("t - 3", "t^2 - 9"),
        ];
        for (a, b) in cases {
            let (a, b) = (p(a), p(b));
            assert_eq!(resultant(&a, &b), sylvester(&a, &b), "{a} / {b}");
        }
    }

    #[test]
    fn gcds() {
        assert_eq!(gcd(&p("t^4 - 4*t^2"), &p("4*t^3 - 8*t")), p("t"));
        assert_eq!(gcd(&p("t^2 - 1"), &p("t^2 - 2*t + 1")), p("t - 1"));
        assert_eq!(gcd(&p("6*t^2 - 6"), &p("4*t + 4")), p("2*t + 2"));
        assert!(gcd(&p("t^2 + 1"), &p("t^2 - 2")).is_one());
    }
}
