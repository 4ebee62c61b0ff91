//! Integral and rational group rings, matrices over them, and their
//! realization as integer matrices through a sofic map.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{word_evaluate, GroupError, GroupSpec, SoficMap, Word};
use crate::linalg::IntMatrix;

#[derive(Debug, Error)]
pub enum RingError {
    #[error("cannot parse group ring element '{input}': {reason}")]
    Parse { input: String, reason: String },
    #[error("matrix shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRing {
    Integer,
    Rational,
}

/// A finite formal combination `Σ c_g g` with rational coefficients and
/// canonical words. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, BigRational>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(BigRational::one())
    }

    pub fn scalar(c: BigRational) -> Self {
        let mut e = Self::zero();
        e.add_term(Word::identity(), c);
        e
    }

    /// Builds an element from (word, coefficient) pairs, canonicalizing words.
    pub fn from_terms(spec: &GroupSpec, terms: impl IntoIterator<Item = (Word, BigRational)>) -> Result<Self, RingError> {
        let mut e = Self::zero();
        for (w, c) in terms {
            e.add_term(spec.canonical(&w)?, c);
        }
        Ok(e)
    }

    fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_ring(&self) -> CoefficientRing {
        if self.terms.values().all(|c| c.is_integer()) {
            CoefficientRing::Integer
        } else {
            CoefficientRing::Rational
        }
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// `Σ |c_g|`.
    pub fn l1_norm(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |acc, c| acc + c.abs())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        GroupRingElement { terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        GroupRingElement { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * k)).collect() }
    }

    /// Convolution product using the group law of `spec`.
    pub fn multiply(&self, other: &Self, spec: &GroupSpec) -> Result<Self, RingError> {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(spec.multiply(w1, w2)?, c1 * c2);
            }
        }
        Ok(out)
    }

    /// `x* = Σ c_g g⁻¹` (coefficients are real).
    pub fn adjoint(&self, spec: &GroupSpec) -> Result<Self, RingError> {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(spec.invert(w)?, c.clone());
        }
        Ok(out)
    }

    pub fn parse(spec: &GroupSpec, input: &str) -> Result<Self, RingError> {
        parse_element(spec, input)
    }

    pub fn display<'a>(&'a self, spec: &'a GroupSpec) -> ElementDisplay<'a> {
        ElementDisplay { element: self, spec }
    }
}

pub struct ElementDisplay<'a> {
    element: &'a GroupRingElement,
    spec: &'a GroupSpec,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.element.is_zero() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.element.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if w.is_identity() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", self.spec.format_word(w))?;
            } else {
                write!(f, "{mag}*{}", self.spec.format_word(w))?;
            }
        }
        Ok(())
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        s.trim().parse::<BigInt>().ok().map(BigRational::from_integer)
    }
}

fn parse_element(spec: &GroupSpec, input: &str) -> Result<GroupRingElement, RingError> {
    let err = |reason: &str| RingError::Parse { input: input.to_string(), reason: reason.to_string() };
    let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty expression"));
    }
    // split into signed terms at top-level '+'/'-' (a '-' right after '^' is an exponent sign)
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    let mut prev: Option<char> = None;
    for c in compact.chars() {
        if (c == '+' || c == '-') && prev != Some('^') {
            if !current.is_empty() {
                terms.push((negative, std::mem::take(&mut current)));
            } else if prev.is_some() && prev != Some('+') && prev != Some('-') {
                return Err(err("dangling operator"));
            }
            negative = if current.is_empty() && matches!(prev, Some('+') | Some('-')) {
                negative ^ (c == '-')
            } else {
                c == '-'
            };
        } else {
            current.push(c);
        }
        prev = Some(c);
    }
    if current.is_empty() {
        return Err(err("expression ends with an operator"));
    }
    terms.push((negative, current));

    let mut out = GroupRingElement::zero();
    for (neg, term) in terms {
        let mut coef = BigRational::one();
        let mut word = Word::identity();
        for factor in term.split('*') {
            if factor.is_empty() {
                return Err(err("empty factor"));
            }
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<i64>().map_err(|_| err("bad exponent"))?),
                None => (factor, 1),
            };
            // leading numeric literal, possibly a fraction
            let split = base.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(base.len());
            let (num, letters) = base.split_at(split);
            if !num.is_empty() {
                let q = parse_rational(num).ok_or_else(|| err("bad coefficient"))?;
                if letters.is_empty() {
                    if exp < 0 && q.is_zero() {
                        return Err(err("zero to a negative power"));
                    }
                    coef *= pow_rational(&q, exp);
                    continue;
                }
                if factor.contains('^') {
                    return Err(err("write coefficients as separate factors when using '^'"));
                }
                coef *= q;
            }
            if !letters.is_empty() {
                let w = spec.parse_word(letters).map_err(|e| err(&e.to_string()))?;
                let powered = if exp >= 0 {
                    (0..exp).fold(Word::identity(), |acc, _| acc.concat(&w))
                } else {
                    (0..-exp).fold(Word::identity(), |acc, _| acc.concat(&w.inverse()))
                };
                word = word.concat(&powered);
            }
        }
        if neg {
            coef = -coef;
        }
        out.add_term(spec.canonical(&word)?, coef);
    }
    Ok(out)
}

fn pow_rational(q: &BigRational, e: i64) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        r *= q;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

/// Square matrix over the group ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingMatrix {
    size: usize,
    entries: Vec<GroupRingElement>,
}

impl GroupRingMatrix {
    pub fn new(size: usize, entries: Vec<GroupRingElement>) -> Result<Self, RingError> {
        if size == 0 || entries.len() != size * size {
            return Err(RingError::Shape(format!("{} entries for a {size}x{size} matrix", entries.len())));
        }
        Ok(GroupRingMatrix { size, entries })
    }

    pub fn scalar(e: GroupRingElement) -> Self {
        GroupRingMatrix { size: 1, entries: vec![e] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &GroupRingElement {
        &self.entries[i * self.size + j]
    }

    pub fn coefficient_ring(&self) -> CoefficientRing {
        if self.entries.iter().all(|e| e.coefficient_ring() == CoefficientRing::Integer) {
            CoefficientRing::Integer
        } else {
            CoefficientRing::Rational
        }
    }

    pub fn denominator(&self) -> BigInt {
        self.entries.iter().fold(BigInt::one(), |acc, e| acc.lcm(&e.denominator()))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GroupRingElement::is_zero)
    }

    pub fn adjoint(&self, spec: &GroupSpec) -> Result<Self, RingError> {
        let n = self.size;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.entry(j, i).adjoint(spec)?);
            }
        }
        Ok(GroupRingMatrix { size: n, entries })
    }

    pub fn is_self_adjoint(&self, spec: &GroupSpec) -> Result<bool, RingError> {
        Ok(&self.adjoint(spec)? == self)
    }

    pub fn multiply(&self, other: &Self, spec: &GroupSpec) -> Result<Self, RingError> {
        if self.size != other.size {
            return Err(RingError::Shape("size mismatch".into()));
        }
        let n = self.size;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = GroupRingElement::zero();
                for k in 0..n {
                    acc = acc.add(&self.entry(i, k).multiply(other.entry(k, j), spec)?);
                }
                entries.push(acc);
            }
        }
        Ok(GroupRingMatrix { size: n, entries })
    }

    /// Parses a JSON value: a single string (1×1) or an array of rows of strings.
    pub fn from_json_value(spec: &GroupSpec, v: &serde_json::Value) -> Result<Self, RingError> {
        use serde_json::Value;
        let shape = |m: &str| RingError::Shape(m.to_string());
        match v {
            Value::String(s) => Ok(Self::scalar(GroupRingElement::parse(spec, s)?)),
            Value::Array(rows) if rows.len() == 1 && rows[0].is_string() => {
                Ok(Self::scalar(GroupRingElement::parse(spec, rows[0].as_str().unwrap_or_default())?))
            }
            Value::Array(rows) => {
                let n = rows.len();
                let mut entries = Vec::with_capacity(n * n);
                for row in rows {
                    let Value::Array(cells) = row else {
                        return Err(shape("rows must be arrays of strings"));
                    };
                    if cells.len() != n {
                        return Err(shape("matrix must be square"));
                    }
                    for c in cells {
                        let s = c.as_str().ok_or_else(|| shape("entries must be strings"))?;
                        entries.push(GroupRingElement::parse(spec, s)?);
                    }
                }
                Self::new(n, entries)
            }
            _ => Err(shape("expected a string or an array of rows")),
        }
    }

    pub fn to_json_value(&self, spec: &GroupSpec) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.size)
            .map(|i| {
                serde_json::Value::Array(
                    (0..self.size).map(|j| serde_json::Value::String(self.entry(i, j).display(spec).to_string())).collect(),
                )
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// `‖A‖₁`: maximum over rows of the summed ℓ¹ norms of the entries.
pub fn one_norm(a: &GroupRingMatrix) -> BigRational {
    (0..a.size)
        .map(|i| (0..a.size).fold(BigRational::zero(), |acc, j| acc + a.entry(i, j).l1_norm()))
        .max()
        .unwrap_or_else(BigRational::zero)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Sparse square integer matrix produced by [`realize`]; the operator it
/// represents is `entries / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizedMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, BigInt)>>,
    denominator: BigInt,
}

impl RealizedMatrix {
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, BigInt)>>, denominator: BigInt) -> Self {
        assert_eq!(rows.len(), dim);
        let rows = rows
            .into_iter()
            .map(|r| {
                let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
                for (c, v) in r {
                    *acc.entry(c).or_insert_with(BigInt::zero) += v;
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        RealizedMatrix { dim, rows, denominator }
    }

    pub fn from_dense(m: &IntMatrix) -> Self {
        assert!(m.is_square());
        let rows = (0..m.rows())
            .map(|i| m.row(i).iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect())
            .collect();
        RealizedMatrix { dim: m.rows(), rows, denominator: BigInt::one() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn row(&self, i: usize) -> &[(usize, BigInt)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.rows[i].binary_search_by_key(&j, |(c, _)| *c).map(|k| self.rows[i][k].1.clone()).unwrap_or_default()
    }

    pub fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m[(i, *j)] = v.clone();
            }
        }
        m
    }

    /// Dense row-major `f64` copy of the integer entries divided by the denominator.
    pub fn to_f64_dense(&self) -> Vec<f64> {
        let d = self.denominator.to_f64().unwrap_or(1.0);
        let mut out = vec![0.0; self.dim * self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                out[i * self.dim + j] = v.to_f64().unwrap_or(f64::NAN) / d;
            }
        }
        out
    }

    pub fn transpose(&self) -> RealizedMatrix {
        let mut rows: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                rows[*j].push((i, v.clone()));
            }
        }
        RealizedMatrix { dim: self.dim, rows, denominator: self.denominator.clone() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| row.iter().all(|(j, v)| self.get(*j, i) == *v))
    }

    /// Integer product of the entry arrays; the denominators multiply.
    pub fn mul(&self, other: &RealizedMatrix) -> RealizedMatrix {
        assert_eq!(self.dim, other.dim);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
                for (k, a) in row {
                    for (j, b) in &other.rows[*k] {
                        *acc.entry(*j).or_insert_with(BigInt::zero) += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        RealizedMatrix { dim: self.dim, rows, denominator: &self.denominator * &other.denominator }
    }

    /// Maximum absolute row sum of the integer entries.
    pub fn max_row_sum(&self) -> BigInt {
        self.rows.iter().map(|r| r.iter().fold(BigInt::zero(), |acc, (_, v)| acc + v.abs())).max().unwrap_or_default()
    }

    /// Matrix Market coordinate export of the integer entries.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate integer general\n");
        s.push_str(&format!("% denominator {}\n", self.denominator));
        s.push_str(&format!("{} {} {}\n", self.dim, self.dim, self.nnz()));
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                s.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
            }
        }
        s
    }
}

/// Realizes `A` through `map`: every group element `g` becomes the permutation
/// matrix of `φ(g)`, coefficients are cleared by their common denominator `D`
/// and block `(r, c)` of the output is the image of entry `A[r][c]`.
pub fn realize(a: &GroupRingMatrix, map: &SoficMap, spec: &GroupSpec) -> Result<RealizedMatrix, RingError> {
    let scale = map.scale();
    let dim = a.size * scale;
    let denom = a.denominator();
    let mut rows: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); dim];
    for r in 0..a.size {
        for c in 0..a.size {
            for (w, coef) in a.entry(r, c).terms() {
                let sigma = word_evaluate(spec, map, w)?;
                let value = (coef * BigRational::from_integer(denom.clone())).to_integer();
                for i in 0..scale {
                    rows[r * scale + sigma.apply(i)].push((c * scale + i, value.clone()));
                }
            }
        }
    }
    Ok(RealizedMatrix::from_rows(dim, rows, denom))
}

/// `rank(φ(xy) - φ(x)φ(y)) / n` computed exactly.
pub fn multiplicative_defect(
    x: &GroupRingElement,
    y: &GroupRingElement,
    map: &SoficMap,
    spec: &GroupSpec,
) -> Result<BigRational, RingError> {
    let xy = GroupRingMatrix::scalar(x.multiply(y, spec)?);
    let mx = realize(&GroupRingMatrix::scalar(x.clone()), map, spec)?;
    let my = realize(&GroupRingMatrix::scalar(y.clone()), map, spec)?;
    let mxy = realize(&xy, map, spec)?;
    let prod = mx.mul(&my);
    let l = mxy.denominator().lcm(prod.denominator());
    let f1 = &l / mxy.denominator();
    let f2 = &l / prod.denominator();
    let n = map.scale();
    let mut diff = IntMatrix::zeros(n, n);
    let mut nonzero = false;
    for i in 0..n {
        for (j, v) in mxy.row(i) {
            diff[(i, *j)] += v * &f1;
        }
        for (j, v) in prod.row(i) {
            diff[(i, *j)] -= v * &f2;
        }
        nonzero |= diff.row(i).iter().any(|v| !v.is_zero());
    }
    let rank = if nonzero { diff.rank() } else { 0 };
    Ok(BigRational::new(BigInt::from(rank), BigInt::from(n)))
}
