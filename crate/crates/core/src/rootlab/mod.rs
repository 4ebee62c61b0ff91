//! Certified complex roots of integer polynomials, Mahler measures, zero
//! counts in disks, root separation bounds and atom certification.

mod atom;
mod eval;

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactpoly::{self, big_to_f64, cyclotomic_test, CyclotomicVerdict, IntPoly, PolyError};

pub use atom::{certify_atom, epsilon_threshold, AtomCertificate, AtomVerdict, MAX_FIXED_POINT_ITERATIONS};
pub use eval::eval_exact;
pub(crate) use eval::big_ln;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("the zero polynomial has no root set")]
    ZeroPolynomial,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("root iteration did not converge for a degree {0} polynomial")]
    NonConvergence(usize),
    #[error("a root disk straddles the circle |z - ({re}, {im})| = {epsilon}")]
    BoundaryAmbiguous { re: f64, im: f64, epsilon: f64 },
    #[error("polynomial has repeated roots")]
    RepeatedRoots,
    #[error("observation violates the root radius bound: {0}")]
    InconsistentObservation(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Working precision for residual evaluation inside the root iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Double-precision iteration; exact residuals are used for certification
    /// and as a fallback when disks are not separated.
    Double,
    /// Exact residuals throughout the iteration.
    Quad,
}

impl Precision {
    /// Reads `SSPEC_PRECISION` (`double` or `quad`) once per process.
    pub fn from_env() -> Precision {
        static CACHE: OnceLock<Precision> = OnceLock::new();
        *CACHE.get_or_init(|| match std::env::var("SSPEC_PRECISION").as_deref() {
            Ok("quad") => Precision::Quad,
            _ => Precision::Double,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    /// The closed disk of this radius around the center contains exactly
    /// `multiplicity` roots when the set is certified.
    pub radius: f64,
    pub multiplicity: usize,
}

impl Root {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub degree: usize,
    /// All disks are finite and pairwise disjoint.
    pub certified: bool,
}

impl RootSet {
    pub fn max_radius(&self) -> f64 {
        self.roots.iter().map(|r| r.radius).fold(0.0, f64::max)
    }

    /// Centers repeated by multiplicity.
    pub fn expanded_centers(&self) -> Vec<Complex64> {
        self.roots.iter().flat_map(|r| std::iter::repeat_n(r.center(), r.multiplicity)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,radius,multiplicity\n");
        for r in &self.roots {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e},{}\n", r.re, r.im, r.radius, r.multiplicity));
        }
        s
    }
}

const MAX_ITERATIONS: usize = 500;
const EXACT_ITERATIONS: usize = 100;

/// Upper bound for the moduli of the roots (Fujiwara), computed in logs.
fn log_root_bound(p: &IntPoly) -> f64 {
    let n = p.degree();
    let ln_lead = big_ln(&p.leading());
    let mut best = f64::NEG_INFINITY;
    for k in 1..=n {
        let c = p.coeff(n - k);
        if c.is_zero() {
            continue;
        }
        let mut v = big_ln(&c) - ln_lead;
        if k == n {
            v -= LN_2;
        }
        best = best.max(v / k as f64);
    }
    best + LN_2
}

/// Newton quotient `p(z)/p'(z)`, either in doubles or exactly.
struct Evaluator<'a> {
    poly: &'a IntPoly,
    derivative: IntPoly,
    coeffs: Option<Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(poly: &'a IntPoly) -> Self {
        let coeffs: Vec<f64> = poly.coeffs().iter().map(big_to_f64).collect();
        let finite = coeffs.iter().all(|c| c.is_finite());
        Evaluator { poly, derivative: poly.derivative(), coeffs: finite.then_some(coeffs) }
    }

    /// Returns the quotient and whether `|p(z)|` is at rounding-noise level.
    fn quotient(&self, z: Complex64, exact: bool) -> (Complex64, bool) {
        if !exact {
            if let Some(c) = &self.coeffs {
                let (p, dp, err, _) = eval::eval_f64_with_error(c, z);
                if p.is_finite() && dp.is_finite() && dp.norm() > 0.0 {
                    return (p / dp, p.norm() <= err);
                }
            }
        }
        let p = eval_exact(self.poly, z);
        let dp = eval_exact(&self.derivative, z);
        if p.is_zero() {
            return (Complex64::zero(), true);
        }
        (p / dp, false)
    }

    /// Certified inclusion radius `n |p(z)| / |p'(z)|`.
    fn radius(&self, z: Complex64) -> f64 {
        let n = self.poly.degree() as f64;
        let p = eval_exact(self.poly, z).norm();
        if p == 0.0 {
            return 0.0;
        }
        let dp = eval_exact(&self.derivative, z).norm();
        if dp == 0.0 || !dp.is_finite() {
            return f64::INFINITY;
        }
        n * p / dp * (1.0 + 1e-12)
    }
}

/// Aberth–Ehrlich iteration in place; returns whether every root converged.
fn aberth(ev: &Evaluator, zs: &mut [Complex64], exact: bool, max_iter: usize) -> bool {
    let n = zs.len();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (ratio, at_noise) = ev.quotient(zs[k], exact);
            let mut sum = Complex64::zero();
            for j in 0..n {
                if j != k {
                    sum += (zs[k] - zs[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !w.is_finite() {
                all = false;
                continue;
            }
            zs[k] -= w;
            if at_noise || w.norm() <= 2.0 * f64::EPSILON * zs[k].norm() || w.norm() < 1e-300 {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            return true;
        }
    }
    false
}

fn disks_disjoint(disks: &[(Complex64, f64)]) -> bool {
    let mut order: Vec<usize> = (0..disks.len()).collect();
    order.sort_by(|&a, &b| disks[a].0.re.total_cmp(&disks[b].0.re));
    for (i, &a) in order.iter().enumerate() {
        let (ca, ra) = disks[a];
        if !ra.is_finite() {
            return false;
        }
        for &b in &order[i + 1..] {
            let (cb, rb) = disks[b];
            if cb.re - ca.re > ra + rb {
                break;
            }
            if (ca - cb).norm() <= ra + rb {
                return false;
            }
        }
    }
    true
}

/// Roots of a squarefree polynomial with nonzero constant term.
fn squarefree_roots(g: &IntPoly, target_radius: f64, precision: Precision) -> Vec<(Complex64, f64)> {
    let n = g.degree();
    let ev = Evaluator::new(g);
    if n == 1 {
        let z = Complex64::new(-big_to_f64(&g.coeff(0)) / big_to_f64(&g.coeff(1)), 0.0);
        return vec![(z, ev.radius(z))];
    }
    let radius = log_root_bound(g).exp().min(1e150);
    let mut zs: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.25)).collect();
    let warm = aberth(&ev, &mut zs, false, MAX_ITERATIONS);
    let certify = |zs: &[Complex64]| -> Vec<(Complex64, f64)> { zs.iter().map(|&z| (z, ev.radius(z))).collect() };
    let mut disks = certify(&zs);
    let good = |d: &[(Complex64, f64)]| disks_disjoint(d) && d.iter().all(|(_, r)| *r <= target_radius);
    if precision == Precision::Quad || !warm || !good(&disks) {
        aberth(&ev, &mut zs, true, EXACT_ITERATIONS);
        disks = certify(&zs);
    }
    disks
}

/// Isolates all complex roots of `p` with multiplicities.
pub fn isolate_roots(p: &IntPoly, target_radius: f64) -> Result<RootSet, RootError> {
    isolate_roots_with(p, target_radius, Precision::from_env())
}

pub fn isolate_roots_with(p: &IntPoly, target_radius: f64, precision: Precision) -> Result<RootSet, RootError> {
    if p.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    if target_radius.is_nan() || target_radius <= 0.0 {
        return Err(RootError::BadArgument(format!("target radius {target_radius} must be positive")));
    }
    let mut roots = Vec::new();
    let zeros = p.trailing_zeros();
    if zeros > 0 {
        roots.push(Root { re: 0.0, im: 0.0, radius: 0.0, multiplicity: zeros });
    }
    let rest = p.shift_down(zeros);
    for part in exactpoly::squarefree_decomposition(&rest)?.factors {
        for (z, r) in squarefree_roots(&part.poly, target_radius, precision) {
            roots.push(Root { re: z.re, im: z.im, radius: r, multiplicity: part.multiplicity });
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let disks: Vec<(Complex64, f64)> = roots.iter().map(|r| (r.center(), r.radius)).collect();
    let certified = disks_disjoint(&disks);
    if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(RootError::NonConvergence(p.degree()));
    }
    Ok(RootSet { roots, degree: p.degree(), certified })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MahlerMeasure {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Set when the measure is exactly 1 by Kronecker's theorem.
    pub exact_one: bool,
}

impl MahlerMeasure {
    pub fn ln(&self) -> f64 {
        self.value.ln()
    }
}

/// `M(p) = |lc| ∏ max(1, |α|)` over roots with multiplicity.
pub fn mahler_measure(p: &IntPoly) -> Result<MahlerMeasure, RootError> {
    if p.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    let rest = p.shift_down(p.trailing_zeros());
    if rest.is_monic() && (rest.degree() == 0 || cyclotomic_test(&rest)? == CyclotomicVerdict::CyclotomicProduct) {
        return Ok(MahlerMeasure { value: 1.0, lower: 1.0, upper: 1.0, exact_one: true });
    }
    let roots = isolate_roots(&rest, 1e-12)?;
    let ln_lead = big_ln(&rest.leading());
    let (mut v, mut lo, mut hi) = (ln_lead, ln_lead, ln_lead);
    for r in &roots.roots {
        let m = r.multiplicity as f64;
        let c = r.center().norm();
        v += m * c.max(1.0).ln();
        lo += m * (c - r.radius).max(1.0).ln();
        hi += m * (c + r.radius).max(1.0).ln();
    }
    Ok(MahlerMeasure { value: v.exp(), lower: lo.exp(), upper: hi.exp(), exact_one: false })
}

/// `Z(β, ε)` for an isolated root set: roots in the closed disk `|z - β| ≤ ε`.
pub fn count_in_disk(roots: &RootSet, beta: Complex64, epsilon: f64) -> Result<usize, RootError> {
    let mut count = 0;
    for r in &roots.roots {
        let d = (r.center() - beta).norm();
        if d + r.radius <= epsilon {
            count += r.multiplicity;
        } else if d - r.radius <= epsilon {
            return Err(RootError::BoundaryAmbiguous { re: beta.re, im: beta.im, epsilon });
        }
    }
    Ok(count)
}

/// Number of zeros of `p`, with multiplicity, in the closed disk `|z - β| ≤ ε`.
pub fn count_zeros_in_disk(p: &IntPoly, beta: Complex64, epsilon: f64) -> Result<usize, RootError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(RootError::BadArgument(format!("radius {epsilon} must be positive")));
    }
    let roots = isolate_roots(p, 1e-12)?;
    match count_in_disk(&roots, beta, epsilon) {
        Err(RootError::BoundaryAmbiguous { .. }) => {
            let refined = isolate_roots_with(p, 1e-15, Precision::Quad)?;
            count_in_disk(&refined, beta, epsilon)
        }
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationBound {
    pub bound: f64,
    /// The variant with the discriminant term dropped, valid for irreducible `p`.
    pub irreducible_bound: Option<f64>,
}

/// Lower bound for `max_i |α_i - β|` over any `t` distinct zeros of a
/// squarefree monic `p` of degree `n`:
/// `|disc|^(-1/(t(t-1))) · (2 M^(2/n))^(-n(n-1)/(t(t-1)))`.
pub fn separation_bound(p: &IntPoly, t: usize) -> Result<SeparationBound, RootError> {
    if !p.is_monic() {
        return Err(RootError::NotMonic);
    }
    let n = p.degree();
    if t < 2 || t > n {
        return Err(RootError::BadArgument(format!("need 2 ≤ t ≤ {n}, got {t}")));
    }
    let disc = exactpoly::discriminant(p)?;
    if disc.is_zero() {
        return Err(RootError::RepeatedRoots);
    }
    let m = mahler_measure(p)?;
    let tt = (t * (t - 1)) as f64;
    let nn = (n * (n - 1)) as f64;
    let tail = -nn / tt * (LN_2 + 2.0 / n as f64 * m.upper.ln());
    let bound = (-big_ln(&disc) / tt + tail).exp();
    let factored = exactpoly::factor(p, exactpoly::DEFAULT_DEGREE_CAP)?;
    let irreducible = factored.is_complete() && factored.factors.len() == 1 && factored.factors[0].multiplicity == 1;
    Ok(SeparationBound { bound, irreducible_bound: irreducible.then(|| tail.exp()) })
}
