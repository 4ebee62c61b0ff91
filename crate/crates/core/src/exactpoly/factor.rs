use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cyclotomic::strip_cyclotomic;
use super::modp::{Field, Fp};
use super::resultant::{discriminant, gcd};
use super::{IntPoly, PolyError};

pub const DEFAULT_DEGREE_CAP: usize = 24;

/// Number of subsets tried during recombination before giving up on a piece.
const RECOMBINATION_BUDGET: usize = 200_000;

/// Primes tried when choosing the modulus for Zassenhaus.
const PRIME_CANDIDATES: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub poly: IntPoly,
    pub multiplicity: usize,
    /// `Some(k)` when the factor is `Φ_k`.
    pub cyclotomic: Option<u64>,
}

/// `constant · remainder · ∏ factor^multiplicity`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredPoly {
    #[serde(with = "crate::serde_util::bigint_string")]
    pub constant: BigInt,
    pub factors: Vec<Factor>,
    pub remainder: IntPoly,
}

impl FactoredPoly {
    pub fn expand(&self) -> IntPoly {
        let mut out = self.remainder.scale(&self.constant);
        for f in &self.factors {
            out = &out * &f.poly.pow(f.multiplicity as u32);
        }
        out
    }

    /// True when no unfactored remainder is left.
    pub fn is_complete(&self) -> bool {
        self.remainder.is_one()
    }

    pub fn multiplicity_of(&self, p: &IntPoly) -> usize {
        self.factors.iter().find(|f| &f.poly == p).map_or(0, |f| f.multiplicity)
    }
}

/// Yun's squarefree decomposition `p = constant · ∏ part_i^i`, with parts
/// primitive, pairwise coprime and with positive leading coefficients.
pub fn squarefree_decomposition(p: &IntPoly) -> Result<FactoredPoly, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let prim = p.primitive_part();
    let constant = p.leading() / prim.leading();
    let mut factors = Vec::new();
    if prim.degree() > 0 {
        let d = prim.derivative();
        let c = gcd(&prim, &d);
        let mut w = prim.div_exact(&c).expect("gcd divides");
        let mut y = d.div_exact(&c).expect("gcd divides derivative");
        let mut z = &y - &w.derivative();
        let mut i = 1;
        while w.degree() > 0 {
            let g = gcd(&w, &z);
            if g.degree() > 0 {
                factors.push(Factor { poly: g.clone(), multiplicity: i, cyclotomic: None });
            }
            w = w.div_exact(&g).expect("gcd divides");
            y = z.div_exact(&g).expect("gcd divides");
            z = &y - &w.derivative();
            i += 1;
        }
    }
    Ok(FactoredPoly { constant, factors, remainder: IntPoly::one() })
}

/// Largest `m` with `p^m | q`.
pub fn multiplicity(p: &IntPoly, q: &IntPoly) -> usize {
    assert!(p.degree() >= 1, "multiplicity needs a nonconstant divisor");
    if q.is_zero() {
        return usize::MAX;
    }
    let mut m = 0;
    let mut rest = q.clone();
    while let Some(next) = rest.div_exact(p) {
        rest = next;
        m += 1;
    }
    m
}

fn small_divisors(n: &BigInt) -> Option<Vec<i64>> {
    let n = n.abs().to_i64()?;
    if n == 0 || n > 1_000_000 {
        return None;
    }
    let mut out = Vec::new();
    for d in 1..=n.sqrt() {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Irreducible factorization of a monic polynomial.
///
/// Powers of `t`, cyclotomic factors and small integer roots are split off
/// first; the rest goes through Zassenhaus. Recombination only searches
/// factors of degree at most `degree_cap`; a piece that cannot be proven
/// irreducible within that limit is left in the remainder.
pub fn factor(p: &IntPoly, degree_cap: usize) -> Result<FactoredPoly, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if !p.is_monic() {
        return Err(PolyError::NotMonic);
    }
    let mut factors = Vec::new();
    let mut remainder = IntPoly::one();
    let zeros = p.trailing_zeros();
    if zeros > 0 {
        factors.push(Factor { poly: IntPoly::t(), multiplicity: zeros, cyclotomic: None });
    }
    let rest = p.shift_down(zeros);
    for part in squarefree_decomposition(&rest)?.factors {
        let m = part.multiplicity;
        let (cyclos, mut piece) = strip_cyclotomic(&part.poly);
        for (k, phi) in cyclos {
            factors.push(Factor { poly: phi, multiplicity: m, cyclotomic: Some(k) });
        }
        if piece.degree() > 1 {
            if let Some(divs) = small_divisors(&piece.coeff(0)) {
                for d in divs {
                    for r in [BigInt::from(d), BigInt::from(-d)] {
                        if piece.degree() > 1 && piece.eval(&r).is_zero() {
                            let lin = IntPoly::linear(&r);
                            piece = piece.div_exact(&lin).expect("root gives a factor");
                            factors.push(Factor { poly: lin, multiplicity: m, cyclotomic: None });
                        }
                    }
                }
            }
        }
        if piece.degree() == 0 {
            continue;
        }
        let (irreducible, leftover) = zassenhaus(&piece, degree_cap);
        for g in irreducible {
            factors.push(Factor { poly: g, multiplicity: m, cyclotomic: None });
        }
        if let Some(left) = leftover {
            remainder = &remainder * &left.pow(m as u32);
        }
    }
    factors.sort_by(|a, b| a.poly.degree().cmp(&b.poly.degree()).then_with(|| a.poly.cmp(&b.poly)));
    Ok(FactoredPoly { constant: BigInt::one(), factors, remainder })
}

fn next_prime(mut n: u64) -> u64 {
    loop {
        n += 1;
        if n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d)) {
            return n;
        }
    }
}

fn fp_to_int(v: &Fp) -> IntPoly {
    IntPoly::from_coeffs(v.iter().map(|&c| BigInt::from(c)).collect())
}

fn reduce_mod(p: &IntPoly, m: &BigInt) -> IntPoly {
    IntPoly::from_coeffs(p.coeffs().iter().map(|c| c.mod_floor(m)).collect())
}

fn mul_mod(a: &IntPoly, b: &IntPoly, m: &BigInt) -> IntPoly {
    reduce_mod(&(a * b), m)
}

/// Division by a polynomial that is monic modulo `m`.
fn divrem_mod(a: &IntPoly, b: &IntPoly, m: &BigInt) -> (IntPoly, IntPoly) {
    let b = reduce_mod(b, m);
    debug_assert!(b.is_monic());
    let (q, r) = a.div_rem(&b).expect("monic divisor");
    (reduce_mod(&q, m), reduce_mod(&r, m))
}

/// One quadratic Hensel step: from `f ≡ g h`, `s g + t h ≡ 1 (mod m)` to the
/// same relations modulo `m²`.
fn hensel_step(f: &IntPoly, g: &IntPoly, h: &IntPoly, s: &IntPoly, t: &IntPoly, m: &BigInt) -> [IntPoly; 4] {
    let m2 = m * m;
    let e = reduce_mod(&(f - &(g * h)), &m2);
    let (q, r) = divrem_mod(&(s * &e), h, &m2);
    let g1 = reduce_mod(&(&(g + &(t * &e)) + &(&q * g)), &m2);
    let h1 = reduce_mod(&(h + &r), &m2);
    let b = reduce_mod(&(&(&(s * &g1) + &(t * &h1)) - &IntPoly::one()), &m2);
    let (c, d) = divrem_mod(&(s * &b), &h1, &m2);
    let s1 = reduce_mod(&(s - &d), &m2);
    let t1 = reduce_mod(&(&(t - &(t * &b)) - &(&c * &g1)), &m2);
    [g1, h1, s1, t1]
}

/// Lifts the factorization `f ≡ ∏ factors (mod p)` to modulus `p^(2^steps)`.
fn lift_factors(f: &IntPoly, factors: &[Fp], field: Field, steps: u32) -> Vec<IntPoly> {
    let p = BigInt::from(field.p);
    let modulus = p.pow(1 << steps);
    if factors.len() == 1 {
        return vec![reduce_mod(f, &modulus)];
    }
    let mid = factors.len() / 2;
    let prod = |fs: &[Fp]| fs.iter().fold(vec![1u64], |acc, g| field.mul_poly(&acc, g));
    let (g0, h0) = (prod(&factors[..mid]), prod(&factors[mid..]));
    let (_, s0, t0) = field.ext_gcd(&g0, &h0);
    let (mut g, mut h, mut s, mut t) = (fp_to_int(&g0), fp_to_int(&h0), fp_to_int(&s0), fp_to_int(&t0));
    let mut m = p.clone();
    for _ in 0..steps {
        [g, h, s, t] = hensel_step(f, &g, &h, &s, &t, &m);
        m = &m * &m;
    }
    let mut out = lift_factors(&g, &factors[..mid], field, steps);
    out.extend(lift_factors(&h, &factors[mid..], field, steps));
    out
}

fn symmetric(p: &IntPoly, m: &BigInt) -> IntPoly {
    let half = m / 2;
    IntPoly::from_coeffs(p.coeffs().iter().map(|c| if c > &half { c - m } else { c.clone() }).collect())
}

/// Combinations of `k` indices out of `n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Factors a monic squarefree polynomial with nonzero constant term.
/// Returns irreducible factors and the piece that could not be resolved.
fn zassenhaus(f: &IntPoly, degree_cap: usize) -> (Vec<IntPoly>, Option<IntPoly>) {
    let n = f.degree();
    if n <= 1 {
        return (vec![f.clone()], None);
    }
    let disc = discriminant(f).expect("nonconstant");
    debug_assert!(!disc.is_zero());
    let mut best: Option<(Field, Vec<Fp>)> = None;
    let mut prime = 2;
    let mut tried = 0;
    while tried < PRIME_CANDIDATES {
        prime = next_prime(prime);
        if (&disc % BigInt::from(prime)).is_zero() {
            continue;
        }
        tried += 1;
        let field = Field::new(prime);
        let local = field.factor_squarefree(&field.reduce(f));
        if local.len() == 1 {
            return (vec![f.clone()], None);
        }
        if best.as_ref().is_none_or(|(_, b)| local.len() < b.len()) {
            best = Some((field, local));
        }
    }
    let (field, local) = best.expect("at least one prime");

    // Mignotte: factor coefficients are bounded by 2^n ‖f‖₂
    let norm2 = f.coeffs().iter().fold(BigInt::zero(), |acc, c| acc + c * c).sqrt() + 1;
    let bound = (BigInt::one() << n) * norm2 * 2;
    let p = BigInt::from(field.p);
    let mut steps = 0;
    while p.pow(1 << steps) <= bound {
        steps += 1;
    }
    let modulus = p.pow(1 << steps);
    let mut lifted: Vec<IntPoly> = lift_factors(f, &local, field, steps);

    let mut found = Vec::new();
    let mut current = f.clone();
    let mut size = 1;
    let mut budget = RECOMBINATION_BUDGET;
    let mut capped = false;
    'search: while 2 * size <= lifted.len() {
        let r = lifted.len();
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let deg: usize = idx.iter().map(|&i| lifted[i].degree()).sum();
            if deg > degree_cap {
                capped = true;
            } else {
                if budget == 0 {
                    capped = true;
                    break 'search;
                }
                budget -= 1;
                let c0 = idx.iter().fold(BigInt::one(), |acc, &i| (acc * lifted[i].coeff(0)).mod_floor(&modulus));
                let c0 = symmetric(&IntPoly::constant(c0.clone()), &modulus).coeff(0);
                if !c0.is_zero() && (current.coeff(0) % &c0).is_zero() {
                    let g = idx.iter().fold(IntPoly::one(), |acc, &i| mul_mod(&acc, &lifted[i], &modulus));
                    let g = symmetric(&g, &modulus);
                    if let Some(q) = current.div_exact(&g) {
                        found.push(g);
                        current = q;
                        for &i in idx.iter().rev() {
                            lifted.remove(i);
                        }
                        continue 'search;
                    }
                }
            }
            if !next_combination(&mut idx, r) {
                break;
            }
        }
        size += 1;
    }
    if current.degree() == 0 {
        return (found, None);
    }
    if !capped || current.degree() <= 2 * degree_cap {
        found.push(current);
        (found, None)
    } else {
        (found, Some(current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::cyclotomic;

    fn p(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    fn factor_list(f: &FactoredPoly) -> Vec<(String, usize)> {
        f.factors.iter().map(|x| (x.poly.to_string(), x.multiplicity)).collect()
    }

    #[test]
    fn squarefree_parts() {
        let sq = squarefree_decomposition(&p("t^4 - 4*t^2")).unwrap();
        assert_eq!(factor_list(&sq), vec![("t^2 - 4".to_string(), 1), ("t".to_string(), 2)]);
        let cube = squarefree_decomposition(&p("t^3 - 3*t^2 + 3*t - 1")).unwrap();
        assert_eq!(factor_list(&cube), vec![("t - 1".to_string(), 3)]);
        let sf = squarefree_decomposition(&p("t^2 - t - 1")).unwrap();
        assert_eq!(factor_list(&sf), vec![("t^2 - t - 1".to_string(), 1)]);
        let scaled = squarefree_decomposition(&p("-6*t^2 + 6")).unwrap();
        assert_eq!(scaled.expand(), p("-6*t^2 + 6"));
    }

    #[test]
    fn factor_examples() {
        let f = factor(&p("t^4 - 4*t^2"), DEFAULT_DEGREE_CAP).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.multiplicity_of(&p("t")), 2);
        assert_eq!(f.multiplicity_of(&p("t - 2")), 1);
        assert_eq!(f.multiplicity_of(&p("t + 2")), 1);
        let phi12 = factor(&p("t^4 - t^2 + 1"), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(phi12.factors.len(), 1);
        assert_eq!(phi12.factors[0].cyclotomic, Some(12));
        let golden = factor(&p("t^2 - t - 1"), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(golden.factors.len(), 1);
        assert_eq!(golden.factors[0].cyclotomic, None);
    }

    #[test]
    fn zassenhaus_splits_products() {
        // (t^4 + 1)(t^3 - t - 1)(t^2 - 3) · (t^5 - t - 1)
        let parts = [p("t^4 + 1"), p("t^3 - t - 1"), p("t^2 - 3"), p("t^5 - t - 1")];
        let prod = parts.iter().fold(IntPoly::one(), |a, b| &a * b);
        let f = factor(&prod, DEFAULT_DEGREE_CAP).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.expand(), prod);
        for q in &parts {
            assert_eq!(f.multiplicity_of(q), 1, "{q}");
        }
        // irreducible over ℤ but reducible modulo every prime
        let swinnerton = factor(&p("t^4 - 10*t^2 + 1"), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(swinnerton.factors.len(), 1);
    }

    #[test]
    fn cap_sends_large_pieces_to_remainder() {
        let big = &p("t^5 - t - 1") * &p("t^7 - t - 1");
        let f = factor(&big, 2).unwrap();
        assert_eq!(f.expand(), big);
        let g = factor(&big, DEFAULT_DEGREE_CAP).unwrap();
        assert!(g.is_complete());
    }

    #[test]
    fn t60_minus_one_splits_into_cyclotomics() {
        let chi = &IntPoly::monomial(BigInt::one(), 60) - &IntPoly::one();
        let f = factor(&chi, DEFAULT_DEGREE_CAP).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.factors.len(), 12);
        assert!(f.factors.iter().all(|x| x.cyclotomic.is_some()));
        assert_eq!(f.expand(), chi);
        assert_eq!(f.multiplicity_of(&cyclotomic(60)), 1);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(&p("t"), &p("t^4 - 4*t^2")), 2);
        assert_eq!(multiplicity(&p("t - 5"), &p("t^4 - 4*t^2")), 0);
        assert_eq!(multiplicity(&p("t^2 + 1"), &p("t^2 + 1")), 1);
    }
}
