//! Exact integer polynomial arithmetic: characteristic polynomials,
//! resultants, squarefree and irreducible factorization, cyclotomic detection.

mod charpoly;
mod cyclotomic;
mod enumerate;
mod factor;
mod modp;
mod resultant;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use charpoly::{charpoly, charpoly_dense};
pub use cyclotomic::{cyclotomic, cyclotomic_index, cyclotomic_test, euler_phi, CyclotomicVerdict};
pub use enumerate::{enumerate_pn, DEFAULT_ENUMERATION_BUDGET};
pub use factor::{factor, multiplicity, squarefree_decomposition, FactoredPoly, Factor, DEFAULT_DEGREE_CAP};
pub use resultant::{discriminant, gcd, resultant};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("cannot parse polynomial '{input}': {reason}")]
    Parse { input: String, reason: String },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("operation needs degree at least 1")]
    ConstantPolynomial,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("zero constant term; divide out powers of t first")]
    ZeroConstantTerm,
    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("degree {0} is above the supported enumeration degree 4")]
    DegreeTooLarge(usize),
}

/// Polynomial with arbitrary-precision integer coefficients, constant term
/// first. Trailing zeros are never stored, so the zero polynomial has no
/// coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn constant(c: BigInt) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        Self::from_coeffs(v)
    }

    /// `t - r`.
    pub fn linear(r: &BigInt) -> Self {
        Self::from_coeffs(vec![-r, BigInt::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive_part(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        IntPoly { coeffs: self.coeffs.iter().map(|x| x / &c).collect() }
    }

    /// Multiplies by -1 if needed so the leading coefficient is positive.
    pub fn normalize_sign(&self) -> IntPoly {
        if self.leading().is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::from_coeffs(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + big_to_f64(c))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + big_to_f64(c))
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        IntPoly::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> IntPoly {
        let mut result = IntPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Division with remainder over ℤ; `None` when some quotient coefficient
    /// is not an integer (never happens for monic divisors).
    pub fn div_rem(&self, d: &IntPoly) -> Option<(IntPoly, IntPoly)> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < d.coeffs.len() {
            return Some((IntPoly::zero(), self.clone()));
        }
        let lc = d.leading();
        let dn = d.degree();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.coeffs.len() - dn];
        for k in (0..q.len()).rev() {
            let top = std::mem::take(&mut r[k + dn]);
            if top.is_zero() {
                continue;
            }
            let (c, rem) = top.div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs[..dn].iter().enumerate() {
                if !dc.is_zero() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        Some((IntPoly::from_coeffs(q), IntPoly::from_coeffs(r)))
    }

    /// Exact quotient `self / d` if `d` divides `self` in ℤ[t].
    pub fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        match self.div_rem(d) {
            Some((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    pub fn divides(&self, other: &IntPoly) -> bool {
        other.div_exact(self).is_some()
    }

    /// `lc(d)^(deg self - deg d + 1) · self mod d`.
    pub fn pseudo_rem(&self, d: &IntPoly) -> IntPoly {
        assert!(!d.is_zero());
        if self.coeffs.len() < d.coeffs.len() {
            return self.clone();
        }
        let lc = d.leading();
        let dn = d.degree();
        let mut r = self.coeffs.clone();
        let steps = self.degree() - dn + 1;
        let mut done = 0;
        while r.len() > dn && !r.is_empty() {
            let top = r.pop().unwrap_or_default();
            let shift = r.len() - dn;
            for x in r.iter_mut() {
                *x *= &lc;
            }
            for (j, dc) in d.coeffs[..dn].iter().enumerate() {
                r[shift + j] -= &top * dc;
            }
            done += 1;
        }
        let mut out = IntPoly::from_coeffs(r);
        if done < steps {
            out = out.scale(&lc.pow((steps - done) as u32));
        }
        out
    }

    /// Largest `k` with `t^k | self`.
    pub fn trailing_zeros(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// `self / t^k`, dropping the lowest `k` coefficients.
    pub fn shift_down(&self, k: usize) -> IntPoly {
        IntPoly::from_coeffs(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// `self(-t)`.
    pub fn negate_variable(&self) -> IntPoly {
        IntPoly::from_coeffs(self.coeffs.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() }).collect())
    }

    /// `self(t^k)`.
    pub fn inflate(&self, k: usize) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.degree() * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * k] = c.clone();
        }
        IntPoly::from_coeffs(v)
    }

    /// Reversed coefficient list, `t^deg · self(1/t)`.
    pub fn reverse(&self) -> IntPoly {
        IntPoly::from_coeffs(self.coeffs.iter().rev().cloned().collect())
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn l1_norm(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |acc, c| acc + c.abs())
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(big_to_f64).collect()
    }

    /// Coefficients as decimal strings, constant term first.
    pub fn to_coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }

    pub fn from_coeff_strings<S: AsRef<str>>(items: &[S]) -> Result<Self, PolyError> {
        let coeffs = items
            .iter()
            .map(|s| {
                s.as_ref().trim().parse::<BigInt>().map_err(|_| PolyError::Parse {
                    input: s.as_ref().to_string(),
                    reason: "not an integer".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_coeffs(coeffs))
    }
}

/// Nearest double, saturating to ±∞ for huge values.
pub fn big_to_f64(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or(if c.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

impl Add for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::from_coeffs((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;

    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::from_coeffs((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] += a * b;
                }
            }
        }
        IntPoly::from_coeffs(v)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;

    fn neg(self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let var = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            if k == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{var}")?;
            } else {
                write!(f, "{mag}*{var}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({self})")
    }
}

impl FromStr for IntPoly {
    type Err = PolyError;

    /// Parses sums of terms `c`, `c*t`, `c*t^k`, `t^k` (`x` is accepted as the
    /// variable too); juxtaposition `3t^2` is allowed.
    fn from_str(input: &str) -> Result<Self, PolyError> {
        let err = |reason: &str| PolyError::Parse { input: input.to_string(), reason: reason.to_string() };
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty input"));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && !cur.ends_with('^') {
                if cur.is_empty() {
                    if i > 0 {
                        return Err(err("doubled sign"));
                    }
                } else {
                    terms.push((neg, std::mem::take(&mut cur)));
                }
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(err("trailing sign"));
        }
        terms.push((neg, cur));

        let mut coeffs: Vec<BigInt> = Vec::new();
        for (neg, term) in terms {
            let (coef_str, var_part) = match term.find(['t', 'x']) {
                Some(pos) => (term[..pos].trim_end_matches('*'), Some(&term[pos + 1..])),
                None => (term.as_str(), None),
            };
            let mut c: BigInt = if coef_str.is_empty() {
                BigInt::one()
            } else {
                coef_str.parse().map_err(|_| err("bad coefficient"))?
            };
            if neg {
                c = -c;
            }
            let k = match var_part {
                None => 0,
                Some("") => 1,
                Some(rest) => {
                    let e = rest.strip_prefix('^').ok_or_else(|| err("expected '^' after variable"))?;
                    e.parse::<usize>().map_err(|_| err("bad exponent"))?
                }
            };
            if k >= 1 << 20 {
                return Err(err("exponent too large"));
            }
            if coeffs.len() <= k {
                coeffs.resize(k + 1, BigInt::zero());
            }
            coeffs[k] += c;
        }
        Ok(IntPoly::from_coeffs(coeffs))
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_coeff_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        IntPoly::from_coeff_strings(&items).map_err(serde::de::Error::custom)
    }
}
