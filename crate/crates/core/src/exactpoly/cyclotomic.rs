use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{IntPoly, PolyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CyclotomicVerdict {
    CyclotomicProduct,
    HasNoncyclotomicFactor,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n).iter().fold(n, |acc, p| acc / p * (p - 1))
}

/// The `n`-th cyclotomic polynomial `Φ_n`.
pub fn cyclotomic(n: u64) -> IntPoly {
    assert!(n >= 1);
    let primes = prime_factors(n);
    // Φ_{m p}(t) = Φ_m(t^p) / Φ_m(t) for p ∤ m, starting from Φ_1 = t - 1
    let mut phi = IntPoly::from_i64(&[-1, 1]);
    let mut radical = 1u64;
    for &p in &primes {
        let inflated = phi.inflate(p as usize);
        phi = inflated.div_exact(&phi).expect("cyclotomic recursion is exact");
        radical *= p;
    }
    phi.inflate((n / radical) as usize)
}

/// Every `k` with `φ(k) ≤ degree`, using `φ(k) ≥ √(k/2)` to bound the search.
pub(crate) fn indices_up_to_degree(degree: usize) -> Vec<u64> {
    let limit = (2 * degree * degree).max(2);
    let mut phi: Vec<usize> = (0..=limit).collect();
    for i in 2..=limit {
        if phi[i] == i {
            for j in (i..=limit).step_by(i) {
                phi[j] -= phi[j] / i;
            }
        }
    }
    (1..=limit).filter(|&k| phi[k] <= degree).map(|k| k as u64).collect()
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * a as u128 % m as u128) as u64;
        }
        a = (a as u128 * a as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// A prime `ℓ ≡ 1 (mod k)` and an element of exact order `k` modulo `ℓ`.
fn root_of_unity_mod_prime(k: u64) -> (u64, u64) {
    let mut ell = k + 1;
    while !is_prime(ell) {
        ell += k;
    }
    let factors = prime_factors(k);
    for x in 2..ell {
        let w = pow_mod(x, (ell - 1) / k, ell);
        if factors.iter().all(|q| pow_mod(w, k / q, ell) != 1) {
            return (ell, w);
        }
    }
    (ell, 1)
}

/// Cheap necessary condition for `Φ_k | p`: `p` vanishes at a primitive
/// `k`-th root of unity modulo a prime `ℓ ≡ 1 (mod k)`.
pub(crate) fn may_contain_cyclotomic(p: &IntPoly, k: u64) -> bool {
    if k == 1 {
        return p.eval(&BigInt::from(1)).is_zero();
    }
    let (ell, w) = root_of_unity_mod_prime(k);
    let m = BigInt::from(ell);
    let mut acc = 0u64;
    for c in p.coeffs().iter().rev() {
        let c = c.mod_floor(&m).to_u64().unwrap_or(0);
        acc = ((acc as u128 * w as u128 + c as u128) % ell as u128) as u64;
    }
    acc == 0
}

/// Splits off every cyclotomic factor of a squarefree monic polynomial.
/// Returns the factors with their indices and the cyclotomic-free cofactor.
pub(crate) fn strip_cyclotomic(p: &IntPoly) -> (Vec<(u64, IntPoly)>, IntPoly) {
    let mut rest = p.clone();
    let mut found = Vec::new();
    for k in indices_up_to_degree(p.degree()) {
        if euler_phi(k) as usize > rest.degree() {
            continue;
        }
        if !may_contain_cyclotomic(&rest, k) {
            continue;
        }
        let phi = cyclotomic(k);
        while let Some(q) = rest.div_exact(&phi) {
            rest = q;
            found.push((k, phi.clone()));
            if rest.is_constant() {
                break;
            }
        }
    }
    (found, rest)
}

/// `Some(k)` when `p = Φ_k`.
pub fn cyclotomic_index(p: &IntPoly) -> Option<u64> {
    if !p.is_monic() || p.degree() == 0 {
        return None;
    }
    indices_up_to_degree(p.degree())
        .into_iter()
        .filter(|&k| euler_phi(k) as usize == p.degree())
        .find(|&k| may_contain_cyclotomic(p, k) && cyclotomic(k) == *p)
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::from(1)];
    for k in 0..n {
        let next = &row[k] * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

/// Root-squaring step: the monic polynomial whose roots are the squares of the roots of `p`.
pub(crate) fn graeffe(p: &IntPoly) -> IntPoly {
    let prod = p * &p.negate_variable();
    let even: Vec<BigInt> = prod.coeffs().iter().step_by(2).cloned().collect();
    let g = IntPoly::from_coeffs(even);
    if g.leading().is_negative() {
        -&g
    } else {
        g
    }
}

/// Decides whether every irreducible factor of `p` is cyclotomic.
///
/// Iterates root squaring: for a product of cyclotomic polynomials the
/// iterates live in a finite set and must repeat, otherwise the Mahler
/// measure squares at every step and some coefficient eventually exceeds the
/// binomial bound satisfied by polynomials with all roots in the unit disc.
pub fn cyclotomic_test(p: &IntPoly) -> Result<CyclotomicVerdict, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if !p.is_monic() {
        return Err(PolyError::NotMonic);
    }
    if p.coeff(0).is_zero() {
        return Err(PolyError::ZeroConstantTerm);
    }
    let n = p.degree();
    if n == 0 {
        return Ok(CyclotomicVerdict::CyclotomicProduct);
    }
    let bounds = binomial_row(n);
    let within = |q: &IntPoly| q.coeffs().iter().zip(&bounds).all(|(c, b)| c.abs() <= *b);
    let mut seen: Vec<IntPoly> = Vec::new();
    let mut current = p.clone();
    for _ in 0..64 {
        if !within(&current) {
            return Ok(CyclotomicVerdict::HasNoncyclotomicFactor);
        }
        if seen.contains(&current) {
            return Ok(CyclotomicVerdict::CyclotomicProduct);
        }
        seen.push(current.clone());
        current = graeffe(&current);
    }
    // exact-division sweep as a fallback
    let mut rest = p.clone();
    for k in indices_up_to_degree(n) {
        let phi = cyclotomic(k);
        while let Some(q) = rest.div_exact(&phi) {
            rest = q;
        }
    }
    Ok(if rest.is_one() { CyclotomicVerdict::CyclotomicProduct } else { CyclotomicVerdict::HasNoncyclotomicFactor })
}
