//! Empirical spectral distributions along a schedule of sofic scales:
//! kernel dimensions, atomic/continuous decomposition, Galois symmetry of
//! atom weights and Fuglede–Kadison determinants.

mod eigen;
mod stats;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::{eigenvalues_dense, eigenvalues_symmetric};
pub use stats::{
    arcsine_cdf, count_within, empirical_cdf, kesten_mckay_cdf, kesten_mckay_density, ks_distance, ks_two_sample,
    limit_estimate, LimitEstimate,
};

use crate::exactpoly::{big_to_f64, charpoly, factor, multiplicity, IntPoly, PolyError, DEFAULT_DEGREE_CAP};
use crate::groupring::{one_norm, rational_to_f64, realize, GroupRingElement, GroupRingMatrix, RealizedMatrix, RingError};
use crate::groups::{build_sofic_map, derive_seed, GroupError, GroupSpec};
use crate::linalg::IntMatrix;
use crate::rootlab::{certify_atom, isolate_roots, AtomCertificate, AtomVerdict, RootError};

pub const DEFAULT_EXACT_CAP: usize = 256;
/// `√((1+√5)/2)`, the lower bound for normalized Mahler measures of totally
/// real algebraic integers other than `0, ±1`.
pub const SMYTH_CONSTANT: f64 = 1.272_019_649_514_069;
pub const SMYTH_TOLERANCE: f64 = 1e-6;
/// Numeric eigenvalue window relative to `max(1, ‖A‖₁)`.
pub const NUMERIC_RESOLUTION: f64 = 1e-8;
/// Tolerance that decides when a limit is reported as non-Cauchy.
pub const LIMIT_TOLERANCE: f64 = 1e-3;
const CDF_GRID_POINTS: usize = 513;
/// Cluster proportion needed to call an atom from a single numeric scale.
const SINGLE_SCALE_ATOM_PROPORTION: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("tridiagonal QL iteration did not converge")]
    NoConvergence,
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("schedule scales must be strictly increasing")]
    ScheduleNotIncreasing,
    #[error("dimension {dim} exceeds the exact cap {cap} and the numeric path is disabled")]
    ExactCapExceeded { dim: usize, cap: usize },
    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,
    #[error("operator is zero")]
    ZeroOperator,
    #[error("eigenvalue at {0} present; the normalized Mahler flag does not apply")]
    UnitAtom(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("inconsistent samples: {0}")]
    Inconsistent(String),
    #[error("cannot parse spectral point '{0}'")]
    BadPoint(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulePoint {
    /// Scale passed to the sofic map builder.
    pub scale: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub points: Vec<SchedulePoint>,
}

impl Schedule {
    /// Strictly increasing scales; each point's seed is split from `seed`
    /// by its scale, so a point reproduces independently of the others.
    pub fn new(scales: &[usize], seed: u64) -> Result<Self, SpectraError> {
        if scales.is_empty() {
            return Err(SpectraError::EmptySchedule);
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpectraError::ScheduleNotIncreasing);
        }
        Ok(Schedule { points: scales.iter().map(|&s| SchedulePoint { scale: s, seed: derive_seed(seed, s as u64) }).collect() })
    }

    /// Repeats one scale under `count` independent seeds.
    pub fn repeated(scale: usize, count: usize, seed: u64) -> Self {
        Schedule { points: (0..count).map(|k| SchedulePoint { scale, seed: derive_seed(seed, k as u64) }).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectraOptions {
    /// Largest realized dimension handled by exact characteristic polynomials.
    pub exact_cap: usize,
    pub numeric: bool,
    pub jobs: usize,
}

impl Default for SpectraOptions {
    fn default() -> Self {
        SpectraOptions { exact_cap: DEFAULT_EXACT_CAP, numeric: true, jobs: 1 }
    }
}

/// The self-adjoint operator whose spectrum is analyzed: `A` itself, or
/// `A*A` when `A` is not self-adjoint.
#[derive(Clone, Debug)]
pub struct Operator {
    pub matrix: GroupRingMatrix,
    pub squared: bool,
    pub norm: BigRational,
}

impl Operator {
    pub fn new(a: &GroupRingMatrix, spec: &GroupSpec) -> Result<Self, SpectraError> {
        let (matrix, squared) =
            if a.is_self_adjoint(spec)? { (a.clone(), false) } else { (a.adjoint(spec)?.multiply(a, spec)?, true) };
        let norm = one_norm(&matrix);
        Ok(Operator { matrix, squared, norm })
    }

    pub fn norm_f64(&self) -> f64 {
        rational_to_f64(&self.norm)
    }

    fn window(&self) -> f64 {
        NUMERIC_RESOLUTION * self.norm_f64().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    /// Realized dimension `N`.
    pub scale: usize,
    pub group_scale: usize,
    pub seed: u64,
    #[serde(with = "crate::serde_util::bigint_string")]
    pub denominator: BigInt,
    /// Sorted eigenvalues of the realized operator (already divided by the denominator).
    pub eigenvalues: Vec<f64>,
    /// Characteristic polynomial of the integer realization, within the exact cap.
    pub charpoly: Option<IntPoly>,
    /// Normalized kernel dimension at each query point.
    pub kernel_dims: BTreeMap<String, f64>,
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn realize_at(m: &GroupRingMatrix, spec: &GroupSpec, point: SchedulePoint) -> Result<RealizedMatrix, SpectraError> {
    let map = build_sofic_map(spec, point.scale, point.seed)?;
    Ok(realize(m, &map, spec)?)
}

fn sample_at(op: &Operator, spec: &GroupSpec, point: SchedulePoint, opts: &SpectraOptions) -> Result<SpectralSample, SpectraError> {
    let m = realize_at(&op.matrix, spec, point)?;
    let n = m.dim();
    let d = m.denominator().clone();
    let chi = (n <= opts.exact_cap).then(|| charpoly(&m));
    let eigenvalues = if opts.numeric {
        eigenvalues_symmetric(&m)?
    } else if let Some(c) = &chi {
        let df = big_to_f64(&d);
        let mut v: Vec<f64> = isolate_roots(c, 1e-12)?.expanded_centers().iter().map(|z| z.re / df).collect();
        v.sort_by(f64::total_cmp);
        v
    } else {
        return Err(SpectraError::ExactCapExceeded { dim: n, cap: opts.exact_cap });
    };
    let zero = match &chi {
        Some(c) => c.trailing_zeros() as f64 / n as f64,
        None => count_within(&eigenvalues, 0.0, op.window()) as f64 / n as f64,
    };
    Ok(SpectralSample {
        scale: n,
        group_scale: point.scale,
        seed: point.seed,
        denominator: d,
        eigenvalues,
        charpoly: chi,
        kernel_dims: BTreeMap::from([("0".to_string(), zero)]),
    })
}

/// Realizes the operator at every schedule point and computes its spectrum.
pub fn spectral_samples(
    op: &Operator,
    spec: &GroupSpec,
    schedule: &Schedule,
    opts: &SpectraOptions,
) -> Result<Vec<SpectralSample>, SpectraError> {
    with_pool(opts.jobs, || schedule.points.par_iter().map(|&p| sample_at(op, spec, p, opts)).collect())
}

/// A spectral query point: a rational number or a real root of an integer
/// polynomial selected by proximity.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    Rational(BigRational),
    Algebraic { poly: IntPoly, root: f64 },
}

impl LambdaSpec {
    pub fn rational(q: BigRational) -> Self {
        LambdaSpec::Rational(q)
    }

    /// The real root of `poly` nearest `near`, with `poly` reduced to the
    /// irreducible factor that carries it.
    pub fn algebraic(poly: &IntPoly, near: f64) -> Result<Self, SpectraError> {
        if !poly.is_monic() || poly.degree() == 0 {
            return Err(SpectraError::BadPoint(format!("{poly} must be monic of positive degree")));
        }
        let f = factor(poly, DEFAULT_DEGREE_CAP)?;
        let mut candidates: Vec<IntPoly> = f.factors.iter().map(|x| x.poly.clone()).collect();
        if !f.remainder.is_one() {
            candidates.push(f.remainder.clone());
        }
        let mut best: Option<(f64, IntPoly, f64)> = None;
        for c in candidates {
            for r in isolate_roots(&c, 1e-14)?.roots {
                if r.im.abs() > r.radius.max(1e-12) {
                    continue;
                }
                let dist = (r.re - near).abs();
                if best.as_ref().is_none_or(|b| dist < b.0) {
                    best = Some((dist, c.clone(), r.re));
                }
            }
        }
        let (_, poly, root) = best.ok_or_else(|| SpectraError::BadPoint(format!("{poly} has no real root")))?;
        Ok(LambdaSpec::Algebraic { poly, root })
    }

    /// Parses `"1/3"`, `"0.7"` or `"t^2 + t - 1 @ 0.6"`.
    pub fn parse(s: &str) -> Result<Self, SpectraError> {
        if let Some((p, near)) = s.split_once('@') {
            let poly: IntPoly = p.trim().parse().map_err(|_| SpectraError::BadPoint(s.to_string()))?;
            let near: f64 = near.trim().parse().map_err(|_| SpectraError::BadPoint(s.to_string()))?;
            return Self::algebraic(&poly, near);
        }
        crate::serde_util::rational_string::parse(s.trim()).map(LambdaSpec::Rational).map_err(|_| SpectraError::BadPoint(s.to_string()))
    }

    pub fn value(&self) -> f64 {
        match self {
            LambdaSpec::Rational(q) => rational_to_f64(q),
            LambdaSpec::Algebraic { root, .. } => *root,
        }
    }

    pub fn label(&self) -> String {
        match self {
            LambdaSpec::Rational(q) => q.to_string(),
            LambdaSpec::Algebraic { poly, root } => format!("{poly} @ {root:.17e}"),
        }
    }

    /// Minimal polynomial of `D·λ`, the matching eigenvalue of the integer
    /// realization; `None` when `D·λ` is not an algebraic integer.
    pub fn integer_minimal_poly(&self, denominator: &BigInt) -> Option<IntPoly> {
        match self {
            LambdaSpec::Rational(q) => {
                let scaled = q * BigRational::from_integer(denominator.clone());
                scaled.is_integer().then(|| IntPoly::linear(&scaled.to_integer()))
            }
            LambdaSpec::Algebraic { poly, .. } => Some(scale_roots(poly, denominator)),
        }
    }
}

/// `D^deg · p(t/D)`: the monic polynomial whose roots are `D` times those of `p`.
pub fn scale_roots(p: &IntPoly, d: &BigInt) -> IntPoly {
    let n = p.degree();
    let mut power = BigInt::one();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    for k in (0..=n).rev() {
        coeffs[k] = p.coeff(k) * &power;
        power *= d;
    }
    IntPoly::from_coeffs(coeffs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelPath {
    Exact,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub scale: usize,
    pub group_scale: usize,
    pub seed: u64,
    pub dimension: usize,
    #[serde(with = "crate::serde_util::rational_string")]
    pub normalized: BigRational,
    pub normalized_f64: f64,
    pub path: KernelPath,
    /// Counting window of the numeric path.
    pub window: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelTrace {
    pub lambda: String,
    pub lambda_value: f64,
    pub points: Vec<KernelPoint>,
    pub limit: LimitEstimate,
}

fn shifted(a: &GroupRingMatrix, lambda: &BigRational) -> Result<GroupRingMatrix, SpectraError> {
    let n = a.size();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let e = a.entry(i, j).clone();
            entries.push(if i == j { e.sub(&GroupRingElement::scalar(lambda.clone())) } else { e });
        }
    }
    Ok(GroupRingMatrix::new(n, entries)?)
}

/// Evaluates `p` at a dense integer matrix by Horner's rule.
fn poly_at_matrix(p: &IntPoly, m: &IntMatrix) -> IntMatrix {
    let n = m.rows();
    let mut acc = IntMatrix::zeros(n, n);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(m);
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

/// `dim ker(λ - A_N) / N` along the schedule.
///
/// Within the exact cap, a symmetric realization gives the multiplicity of
/// the minimal polynomial of `D·λ` in the characteristic polynomial, and a
/// non-symmetric one `(N - rank p(M)) / deg p`. Above it, eigenvalues of the
/// (shifted, squared if needed) operator are counted in a window of
/// `1e-8 · max(1, ‖A‖₁)` around `λ`.
pub fn kernel_dim_sequence(
    a: &GroupRingMatrix,
    spec: &GroupSpec,
    lambda: &LambdaSpec,
    schedule: &Schedule,
    opts: &SpectraOptions,
) -> Result<KernelTrace, SpectraError> {
    let self_adjoint = a.is_self_adjoint(spec)?;
    let numeric_op = match lambda {
        _ if self_adjoint => Some(Operator::new(a, spec)?),
        LambdaSpec::Rational(q) => Some(Operator::new(&shifted(a, q)?, spec)?),
        LambdaSpec::Algebraic { .. } => None,
    };
    let numeric_center = if self_adjoint { lambda.value() } else { 0.0 };
    let point_at = |p: SchedulePoint| -> Result<KernelPoint, SpectraError> {
        let m = realize_at(a, spec, p)?;
        let n = m.dim();
        if n <= opts.exact_cap {
            let dimension = match lambda.integer_minimal_poly(m.denominator()) {
                None => 0,
                Some(q) if m.is_symmetric() => multiplicity(&q, &charpoly(&m)),
                Some(q) => (n - poly_at_matrix(&q, &m.to_dense()).rank()) / q.degree(),
            };
            return Ok(KernelPoint {
                scale: n,
                group_scale: p.scale,
                seed: p.seed,
                dimension,
                normalized: BigRational::new(dimension.into(), n.into()),
                normalized_f64: dimension as f64 / n as f64,
                path: KernelPath::Exact,
                window: None,
            });
        }
        if !opts.numeric {
            return Err(SpectraError::ExactCapExceeded { dim: n, cap: opts.exact_cap });
        }
        let numeric_op = numeric_op.as_ref().ok_or_else(|| {
            SpectraError::Unsupported("numeric kernels at irrational points of non-self-adjoint operators".into())
        })?;
        let op_m = realize_at(&numeric_op.matrix, spec, p)?;
        let ev = eigenvalues_symmetric(&op_m)?;
        let window = numeric_op.window();
        let dimension = count_within(&ev, numeric_center, window);
        Ok(KernelPoint {
            scale: n,
            group_scale: p.scale,
            seed: p.seed,
            dimension,
            normalized: BigRational::new(dimension.into(), n.into()),
            normalized_f64: dimension as f64 / n as f64,
            path: KernelPath::Numeric,
            window: Some(window),
        })
    };
    let points: Vec<KernelPoint> =
        with_pool(opts.jobs, || schedule.points.par_iter().map(|&p| point_at(p)).collect::<Result<_, _>>())?;
    let dims: Vec<usize> = points.iter().map(|p| p.scale).collect();
    let values: Vec<f64> = points.iter().map(|p| p.normalized_f64).collect();
    Ok(KernelTrace {
        lambda: lambda.label(),
        lambda_value: lambda.value(),
        limit: limit_estimate(&dims, &values, LIMIT_TOLERANCE),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Minimal polynomial of the corresponding eigenvalue of the integer
    /// realization (`denominator` times the operator); unknown for atoms
    /// found only numerically.
    pub minimal_poly: Option<IntPoly>,
    #[serde(with = "crate::serde_util::bigint_string")]
    pub denominator: BigInt,
    /// Real positions of the roots, already divided by the denominator.
    pub roots: Vec<f64>,
    #[serde(with = "crate::serde_util::rational_string::option")]
    pub weight_per_root_exact: Option<BigRational>,
    pub weight_per_root: f64,
    /// Per-root weight times the number of roots.
    pub total_weight: f64,
    /// Weight of each root at the largest scale.
    pub per_root_weights: Vec<f64>,
    pub exact: bool,
    /// Per-root proportion at every scale.
    pub proportions: Vec<f64>,
    pub certificate: Option<AtomCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaloisCheck {
    pub minimal_poly: Option<IntPoly>,
    pub weights: Vec<f64>,
    pub max_deviation: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub scale: usize,
    pub seed: u64,
    pub zero_kernel: f64,
    pub continuous_mass: f64,
    /// Sup distance between this scale's continuous CDF and the previous one.
    pub cdf_distance_to_previous: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub norm_bound: f64,
    pub atoms: Vec<Atom>,
    pub continuous_mass: f64,
    /// Atom weights plus continuous mass.
    pub mass_total: f64,
    pub cdf_x: Vec<f64>,
    /// Continuous-part CDF normalized to total mass 1 (zero when there is no continuous mass).
    pub cdf_y: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub galois: Vec<GaloisCheck>,
    /// Sorted eigenvalues of the continuous part at the largest scale.
    #[serde(skip)]
    pub continuous_spectrum: Vec<f64>,
}

struct Candidate {
    /// Minimal polynomial of the integer realization eigenvalue.
    poly: Option<IntPoly>,
    /// Root positions of the operator.
    roots: Vec<f64>,
}

/// Per-root count of a candidate at one sample.
fn candidate_count(c: &Candidate, s: &SpectralSample, window: f64) -> usize {
    match (&c.poly, &s.charpoly) {
        (Some(p), Some(chi)) => multiplicity(p, chi),
        _ => c.roots.iter().map(|&r| count_within(&s.eigenvalues, r, window)).min().unwrap_or(0),
    }
}

/// Removes atom eigenvalues: the `count` nearest eigenvalues to each root.
fn excise(eigenvalues: &[f64], atoms: &[(Vec<f64>, usize)]) -> Vec<f64> {
    let mut removed = vec![false; eigenvalues.len()];
    for (roots, count) in atoms {
        for &r in roots {
            let mut idx: Vec<usize> = (0..eigenvalues.len()).filter(|&i| !removed[i]).collect();
            idx.sort_by(|&i, &j| (eigenvalues[i] - r).abs().total_cmp(&(eigenvalues[j] - r).abs()));
            for &i in idx.iter().take(*count) {
                removed[i] = true;
            }
        }
    }
    eigenvalues.iter().zip(&removed).filter(|(_, &r)| !r).map(|(&v, _)| v).collect()
}

fn real_roots(p: &IntPoly, d: &BigInt) -> Result<Vec<f64>, SpectraError> {
    let df = big_to_f64(d);
    let mut roots: Vec<f64> = isolate_roots(p, 1e-14)?.expanded_centers().iter().map(|z| z.re / df).collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Splits the spectral measure into atoms and a continuous part.
///
/// Candidate atoms are the irreducible factors of the characteristic
/// polynomial at the largest exact scale (or eigenvalue clusters at the
/// largest scale when no exact data exists). A candidate is kept when its
/// per-root proportion is present at the last three scales and does not
/// extrapolate towards zero in `1/N`; exact candidates must also survive
/// [`certify_atom`]. Weights are averaged over the last three scales.
pub fn decompose_spectrum(samples: &[SpectralSample], norm_bound: f64) -> Result<SpectralReport, SpectraError> {
    if samples.is_empty() {
        return Err(SpectraError::EmptySchedule);
    }
    let mut samples: Vec<&SpectralSample> = samples.iter().collect();
    samples.sort_by_key(|s| s.scale);
    let d = samples[0].denominator.clone();
    if samples.iter().any(|s| s.denominator != d) {
        return Err(SpectraError::Inconsistent("samples have different denominators".into()));
    }
    if samples.iter().any(|s| s.eigenvalues.len() != s.scale) {
        return Err(SpectraError::Inconsistent("eigenvalue count differs from the dimension".into()));
    }
    let window = NUMERIC_RESOLUTION * norm_bound.max(1.0);
    let exact: Vec<&SpectralSample> = samples.iter().copied().filter(|s| s.charpoly.is_some()).collect();
    let top = *samples.last().expect("nonempty");

    let mut candidates = Vec::new();
    if let Some(top_exact) = exact.last() {
        let chi = top_exact.charpoly.as_ref().expect("exact");
        let f = factor(chi, DEFAULT_DEGREE_CAP)?;
        for fac in &f.factors {
            candidates.push(Candidate { roots: real_roots(&fac.poly, &d)?, poly: Some(fac.poly.clone()) });
        }
    } else {
        let ev = &top.eigenvalues;
        let mut i = 0;
        while i < ev.len() {
            let mut j = i + 1;
            while j < ev.len() && ev[j] - ev[j - 1] <= window {
                j += 1;
            }
            if j - i >= 2 {
                let center = ev[i..j].iter().sum::<f64>() / (j - i) as f64;
                let scaled = center * big_to_f64(&d);
                let poly = ((scaled - scaled.round()).abs() <= window * big_to_f64(&d))
                    .then(|| IntPoly::linear(&BigInt::from(scaled.round() as i64)));
                candidates.push(Candidate { poly, roots: vec![center] });
            }
            i = j;
        }
    }

    let lambda_int = norm_bound * big_to_f64(&d);
    let observations: Vec<(IntPoly, usize)> =
        exact.iter().map(|s| (s.charpoly.clone().expect("exact"), s.scale)).collect();
    let mut atoms = Vec::new();
    for c in candidates {
        let counts: Vec<usize> = samples.iter().map(|s| candidate_count(&c, s, window)).collect();
        let props: Vec<f64> = counts.iter().zip(&samples).map(|(&k, s)| k as f64 / s.scale as f64).collect();
        let n = props.len();
        let tail = n.saturating_sub(3);
        if counts[tail..].contains(&0) {
            continue;
        }
        if n >= 2 {
            let (a, b) = (samples[n - 2].scale as f64, samples[n - 1].scale as f64);
            let extrapolated = (b * props[n - 1] - a * props[n - 2]) / (b - a);
            if 4.0 * extrapolated < props[n - 1] {
                continue;
            }
        } else if c.poly.is_none() && props[0] < SINGLE_SCALE_ATOM_PROPORTION {
            continue;
        }
        let mut certificate = None;
        let is_exact_atom = c.poly.is_some() && !exact.is_empty();
        if is_exact_atom && lambda_int > 0.0 {
            let beta = c.roots.first().copied().unwrap_or(0.0) * big_to_f64(&d);
            let cert = certify_atom(&observations, Complex64::new(beta, 0.0), lambda_int)?;
            if cert.verdict == AtomVerdict::Refuted {
                continue;
            }
            certificate = Some(cert);
        }
        let tail_samples = &samples[tail..];
        let weight_exact = tail_samples.iter().all(|s| s.charpoly.is_some()).then(|| {
            let sum = counts[tail..]
                .iter()
                .zip(tail_samples)
                .fold(BigRational::zero(), |acc, (&k, s)| acc + BigRational::new(k.into(), s.scale.into()));
            sum / BigRational::from_integer(tail_samples.len().into())
        });
        let weight = match &weight_exact {
            Some(w) => rational_to_f64(w),
            None => props[tail..].iter().sum::<f64>() / (n - tail) as f64,
        };
        let per_root_weights: Vec<f64> = if top.charpoly.is_some() && c.poly.is_some() {
            vec![props[n - 1]; c.roots.len()]
        } else {
            c.roots.iter().map(|&r| count_within(&top.eigenvalues, r, window) as f64 / top.scale as f64).collect()
        };
        atoms.push(Atom {
            total_weight: weight * c.roots.len() as f64,
            minimal_poly: c.poly,
            denominator: d.clone(),
            exact: weight_exact.is_some(),
            weight_per_root_exact: weight_exact,
            weight_per_root: weight,
            per_root_weights,
            roots: c.roots,
            proportions: props,
            certificate,
        });
    }

    // continuous part at every scale
    let mut trace = Vec::with_capacity(samples.len());
    let mut previous: Option<Vec<f64>> = None;
    let mut continuous = Vec::new();
    for s in &samples {
        let removal: Vec<(Vec<f64>, usize)> = atoms
            .iter()
            .map(|a| {
                let c = Candidate { poly: a.minimal_poly.clone(), roots: a.roots.clone() };
                (a.roots.clone(), candidate_count(&c, s, window))
            })
            .collect();
        let cont = excise(&s.eigenvalues, &removal);
        let distance = previous.as_ref().map(|p| ks_two_sample(p, &cont));
        trace.push(TracePoint {
            scale: s.scale,
            seed: s.seed,
            zero_kernel: s.kernel_dims.get("0").copied().unwrap_or(0.0),
            continuous_mass: cont.len() as f64 / s.scale as f64,
            cdf_distance_to_previous: distance,
        });
        previous = Some(cont.clone());
        continuous = cont;
    }
    let continuous_mass = continuous.len() as f64 / top.scale as f64;
    let radius = norm_bound.max(f64::MIN_POSITIVE);
    let cdf_x: Vec<f64> =
        (0..CDF_GRID_POINTS).map(|k| -radius + 2.0 * radius * k as f64 / (CDF_GRID_POINTS - 1) as f64).collect();
    let cdf_y = if continuous.is_empty() { vec![0.0; cdf_x.len()] } else { empirical_cdf(&continuous, &cdf_x) };
    let galois = galois_conjugate_check(&atoms);
    let mass_total = atoms.iter().map(|a| a.total_weight).sum::<f64>() + continuous_mass;
    Ok(SpectralReport {
        norm_bound,
        atoms,
        continuous_mass,
        mass_total,
        cdf_x,
        cdf_y,
        trace,
        galois,
        continuous_spectrum: continuous,
    })
}

/// Per-root weights of every atom and their largest pairwise deviation.
pub fn galois_conjugate_check(atoms: &[Atom]) -> Vec<GaloisCheck> {
    atoms
        .iter()
        .map(|a| {
            let max = a.per_root_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = a.per_root_weights.iter().copied().fold(f64::INFINITY, f64::min);
            GaloisCheck {
                minimal_poly: a.minimal_poly.clone(),
                weights: a.per_root_weights.clone(),
                max_deviation: if a.per_root_weights.is_empty() { 0.0 } else { max - min },
                exact: a.exact,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmythFlag {
    Holds,
    Fails,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkScale {
    pub scale: usize,
    pub seed: u64,
    pub path: KernelPath,
    /// `exp` of the mean of `ln|μ|` over nonzero eigenvalues, normalized by `N`
    /// (square root taken for `A*A`).
    pub determinant: f64,
    /// `M(χ)^(1/N)` for the operator spectrum.
    pub mahler_normalized: f64,
    /// `ln M(χ)` of the operator spectrum.
    pub log_mahler: f64,
    /// Points among `0, 1, -1` that are eigenvalues at this scale.
    pub unit_eigenvalues: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkReport {
    pub scales: Vec<FkScale>,
    pub determinant: f64,
    /// Running maximum of the normalized Mahler measure.
    pub running_max: f64,
    pub threshold: f64,
    pub tolerance: f64,
    pub flag: SmythFlag,
    pub reason: String,
}

fn fk_scale(op: &Operator, spec: &GroupSpec, p: SchedulePoint, opts: &SpectraOptions) -> Result<FkScale, SpectraError> {
    let m = realize_at(&op.matrix, spec, p)?;
    let n = m.dim();
    let d = m.denominator().clone();
    let ln_d = big_to_f64(&d).ln();
    let half = if op.squared { 0.5 } else { 1.0 };
    if n <= opts.exact_cap {
        let chi = charpoly(&m);
        let k = chi.trailing_zeros();
        let rest = chi.shift_down(k);
        let ln_const = crate::rootlab::big_ln(&rest.coeff(0).abs());
        let determinant = (half * (ln_const - (n - k) as f64 * ln_d) / n as f64).exp();
        let log_mahler = if d.is_one() {
            crate::rootlab::mahler_measure(&chi)?.ln()
        } else {
            let roots = isolate_roots(&rest, 1e-12)?;
            let df = big_to_f64(&d);
            roots.roots.iter().map(|r| r.multiplicity as f64 * (r.center().norm() / df).max(1.0).ln()).sum()
        };
        let mut unit = Vec::new();
        for (label, v) in [("0", BigInt::zero()), ("1", d.clone()), ("-1", -d.clone())] {
            if chi.eval(&v).is_zero() {
                unit.push(label.to_string());
            }
        }
        return Ok(FkScale {
            scale: n,
            seed: p.seed,
            path: KernelPath::Exact,
            determinant,
            mahler_normalized: (log_mahler / n as f64).exp(),
            log_mahler,
            unit_eigenvalues: unit,
        });
    }
    if !opts.numeric {
        return Err(SpectraError::ExactCapExceeded { dim: n, cap: opts.exact_cap });
    }
    let ev = eigenvalues_symmetric(&m)?;
    let window = op.window();
    let log_det: f64 = ev.iter().filter(|x| x.abs() > window).map(|x| x.abs().ln()).sum();
    let log_mahler: f64 = ev.iter().map(|x| x.abs().max(1.0).ln()).sum();
    let unit = [("0", 0.0), ("1", 1.0), ("-1", -1.0)]
        .iter()
        .filter(|(_, v)| count_within(&ev, *v, window) > 0)
        .map(|(l, _)| l.to_string())
        .collect();
    Ok(FkScale {
        scale: n,
        seed: p.seed,
        path: KernelPath::Numeric,
        determinant: (half * log_det / n as f64).exp(),
        mahler_normalized: (log_mahler / n as f64).exp(),
        log_mahler,
        unit_eigenvalues: unit,
    })
}

/// Fuglede–Kadison determinant estimates along the schedule, with the flag
/// comparing the normalized Mahler measure against [`SMYTH_CONSTANT`].
/// The flag needs a self-adjoint operator without eigenvalues at `0, ±1`;
/// otherwise it is not applicable, and an error when `require_flag` is set.
pub fn fk_determinant(
    a: &GroupRingMatrix,
    spec: &GroupSpec,
    schedule: &Schedule,
    opts: &SpectraOptions,
    require_flag: bool,
) -> Result<FkReport, SpectraError> {
    let op = Operator::new(a, spec)?;
    let scales: Vec<FkScale> =
        with_pool(opts.jobs, || schedule.points.par_iter().map(|&p| fk_scale(&op, spec, p, opts)).collect::<Result<_, _>>())?;
    let running_max = scales.iter().map(|s| s.mahler_normalized).fold(f64::NEG_INFINITY, f64::max);
    let determinant = scales.last().map(|s| s.determinant).unwrap_or(f64::NAN);
    let unit: Vec<String> = {
        let mut u: Vec<String> = scales.iter().flat_map(|s| s.unit_eigenvalues.iter().cloned()).collect();
        u.sort();
        u.dedup();
        u
    };
    let (flag, reason) = if op.squared {
        if require_flag {
            return Err(SpectraError::NotSelfAdjoint);
        }
        (SmythFlag::NotApplicable, "operator is not self-adjoint".to_string())
    } else if !unit.is_empty() {
        if require_flag {
            return Err(SpectraError::UnitAtom(unit.join(", ")));
        }
        (SmythFlag::NotApplicable, format!("eigenvalues at {}", unit.join(", ")))
    } else if running_max >= SMYTH_CONSTANT - SMYTH_TOLERANCE {
        (SmythFlag::Holds, String::new())
    } else {
        (SmythFlag::Fails, format!("normalized Mahler measure {running_max} below the bound"))
    };
    Ok(FkReport { scales, determinant, running_max, threshold: SMYTH_CONSTANT, tolerance: SMYTH_TOLERANCE, flag, reason })
}

/// Samples and decomposition in one call.
pub fn analyze(
    a: &GroupRingMatrix,
    spec: &GroupSpec,
    schedule: &Schedule,
    opts: &SpectraOptions,
) -> Result<(Operator, Vec<SpectralSample>, SpectralReport), SpectraError> {
    let op = Operator::new(a, spec)?;
    let samples = spectral_samples(&op, spec, schedule, opts)?;
    let report = decompose_spectrum(&samples, op.norm_f64())?;
    Ok((op, samples, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(spec: &GroupSpec, s: &str) -> GroupRingMatrix {
        GroupRingMatrix::scalar(GroupRingElement::parse(spec, s).unwrap())
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn cyclic_two_kernel_constant_half() {
        let g = GroupSpec::cyclic(2).unwrap();
        let sched = Schedule::new(&[2, 4, 8, 16], 1).unwrap();
        let t = kernel_dim_sequence(&op(&g, "1 + s"), &g, &LambdaSpec::rational(q(0, 1)), &sched, &SpectraOptions::default())
            .unwrap();
        assert!(t.points.iter().all(|p| p.normalized == q(1, 2)));
        assert_eq!(t.limit.headline, 0.5);
    }

    #[test]
    fn chain_kernel_is_two_over_m() {
        let g = GroupSpec::free_abelian(1).unwrap();
        let scales = [4, 8, 16, 32, 64, 128, 256, 512];
        let opts = SpectraOptions { exact_cap: 64, ..Default::default() };
        let t = kernel_dim_sequence(&op(&g, "s + S"), &g, &LambdaSpec::rational(q(0, 1)), &Schedule::new(&scales, 3).unwrap(), &opts)
            .unwrap();
        for (p, m) in t.points.iter().zip(scales) {
            assert_eq!(p.normalized, q(2, m as i64), "m = {m}");
        }
        assert!(t.points.iter().any(|p| p.path == KernelPath::Numeric));
        assert!(t.limit.headline.abs() < 1e-3);
    }

    #[test]
    fn non_integers_are_never_eigenvalues() {
        let g = GroupSpec::cyclic(6).unwrap();
        let sched = Schedule::new(&[6, 12], 0).unwrap();
        for l in ["1/3", "1/2", "0.7"] {
            let t = kernel_dim_sequence(&op(&g, "s + S + 1"), &g, &LambdaSpec::parse(l).unwrap(), &sched, &SpectraOptions::default())
                .unwrap();
            assert!(t.points.iter().all(|p| p.dimension == 0));
        }
    }

    #[test]
    fn non_self_adjoint_kernels() {
        // a - 1 on cyclic(4) has a one-dimensional kernel per copy
        let g = GroupSpec::cyclic(4).unwrap();
        let sched = Schedule::new(&[4, 8], 0).unwrap();
        let exact = kernel_dim_sequence(&op(&g, "s - 1"), &g, &LambdaSpec::rational(q(0, 1)), &sched, &SpectraOptions::default())
            .unwrap();
        assert!(exact.points.iter().all(|p| p.normalized == q(1, 4)));
        let numeric = kernel_dim_sequence(
            &op(&g, "s"),
            &g,
            &LambdaSpec::rational(q(1, 1)),
            &sched,
            &SpectraOptions { exact_cap: 0, ..Default::default() },
        )
        .unwrap();
        assert!(numeric.points.iter().all(|p| p.normalized == q(1, 4) && p.path == KernelPath::Numeric));
        // the eigenvalue i of the 4-cycle: t^2 + 1
        let i = kernel_dim_sequence(&op(&g, "s"), &g, &LambdaSpec::Algebraic { poly: "t^2+1".parse().unwrap(), root: 0.0 }, &sched, &SpectraOptions::default())
            .unwrap();
        assert!(i.points.iter().all(|p| p.normalized == q(1, 4)));
    }

    #[test]
    fn cyclic_five_atoms() {
        let g = GroupSpec::cyclic(5).unwrap();
        let (_, samples, report) =
            analyze(&op(&g, "s + S"), &g, &Schedule::new(&[5, 10, 20], 0).unwrap(), &SpectraOptions::default()).unwrap();
        assert_eq!(samples.len(), 3);
        let find = |s: &str| report.atoms.iter().find(|a| a.minimal_poly == Some(s.parse().unwrap())).unwrap();
        assert_eq!(find("t - 2").weight_per_root_exact, Some(q(1, 5)));
        // 2cos(2π/5) and 2cos(4π/5) each occur twice in every copy
        let golden = find("t^2 + t - 1");
        assert_eq!(golden.weight_per_root_exact, Some(q(2, 5)));
        assert_eq!(golden.certificate.as_ref().unwrap().verdict, AtomVerdict::CertifiedAlgebraicInteger);
        assert!(report.galois.iter().all(|g| g.max_deviation == 0.0));
        assert_eq!(report.continuous_mass, 0.0);
        assert!((report.mass_total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_operator_single_atom() {
        let g = GroupSpec::cyclic(3).unwrap();
        let (_, _, report) =
            analyze(&op(&g, "0"), &g, &Schedule::new(&[3, 6], 0).unwrap(), &SpectraOptions::default()).unwrap();
        assert_eq!(report.atoms.len(), 1);
        assert_eq!(report.atoms[0].minimal_poly, Some(IntPoly::t()));
        assert_eq!(report.atoms[0].total_weight, 1.0);
    }

    #[test]
    fn chain_has_no_atoms_and_arcsine_cdf() {
        let g = GroupSpec::free_abelian(1).unwrap();
        let scales: Vec<usize> = (3..=10).map(|k| 1 << k).collect();
        let (_, _, report) = analyze(
            &op(&g, "s + S"),
            &g,
            &Schedule::new(&scales, 0).unwrap(),
            &SpectraOptions { exact_cap: 32, ..Default::default() },
        )
        .unwrap();
        assert!(report.atoms.is_empty(), "{:?}", report.atoms.iter().map(|a| &a.roots).collect::<Vec<_>>());
        assert_eq!(report.continuous_mass, 1.0);
        assert!(ks_distance(&report.continuous_spectrum, arcsine_cdf) < 0.01);
        assert!(report.cdf_y.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn numeric_atoms_without_exact_data() {
        let g = GroupSpec::cyclic(5).unwrap();
        let (_, _, report) = analyze(
            &op(&g, "s + S"),
            &g,
            &Schedule::new(&[10, 20, 40], 0).unwrap(),
            &SpectraOptions { exact_cap: 0, ..Default::default() },
        )
        .unwrap();
        assert_eq!(report.atoms.len(), 3);
        assert!(report.atoms.iter().any(|a| a.minimal_poly == Some("t - 2".parse().unwrap())));
        assert!((report.mass_total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fk_flags() {
        let g = GroupSpec::cyclic(1).unwrap();
        let golden = GroupRingMatrix::from_json_value(&g, &serde_json::json!([["0", "1"], ["1", "1"]])).unwrap();
        let r = fk_determinant(&golden, &g, &Schedule::new(&[1, 2], 0).unwrap(), &SpectraOptions::default(), true).unwrap();
        assert_eq!(r.flag, SmythFlag::Holds);
        assert!((r.running_max - SMYTH_CONSTANT).abs() < 1e-9);
        assert!((r.scales[0].log_mahler.exp() - 1.618_033_988_749_895).abs() < 1e-9);
        assert!((r.determinant - 1.0).abs() < 1e-12);
        let c2 = GroupSpec::cyclic(2).unwrap();
        let r = fk_determinant(&op(&c2, "s"), &c2, &Schedule::new(&[2], 0).unwrap(), &SpectraOptions::default(), false).unwrap();
        assert_eq!(r.flag, SmythFlag::NotApplicable);
        assert!((r.determinant - 1.0).abs() < 1e-15);
        assert!(fk_determinant(&op(&c2, "s"), &c2, &Schedule::new(&[2], 0).unwrap(), &SpectraOptions::default(), true).is_err());
    }

    #[test]
    fn scale_roots_and_parse() {
        assert_eq!(scale_roots(&"t^2 + t - 1".parse().unwrap(), &BigInt::from(2)), "t^2 + 2*t - 4".parse().unwrap());
        let l = LambdaSpec::parse("t^4 - 1 @ 0.9").unwrap();
        assert_eq!(l, LambdaSpec::Algebraic { poly: "t - 1".parse().unwrap(), root: 1.0 });
        assert_eq!(LambdaSpec::parse("0.7").unwrap(), LambdaSpec::Rational(q(7, 10)));
        assert!(Schedule::new(&[4, 4], 0).is_err());
        assert!(Schedule::new(&[], 0).is_err());
    }
}
