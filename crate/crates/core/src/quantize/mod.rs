//! Norm quantization below 2: the Kronecker transform, snapping to the
//! `2cos(π/q)` grid, the `√2` gap, angular discrepancy bounds for roots of
//! integer polynomials and the equilibrium law at norm 2.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactpoly::{cyclotomic_index, factor, IntPoly, PolyError, DEFAULT_DEGREE_CAP};
use crate::groupring::{GroupRingMatrix, RingError};
use crate::groups::GroupSpec;
use crate::rootlab::{big_ln, isolate_roots, mahler_measure, RootError};
use crate::spectra::{
    arcsine_cdf, count_within, ks_distance, spectral_samples, Operator, Schedule, SpectraError, SpectraOptions,
    SpectralReport, SpectralSample, NUMERIC_RESOLUTION,
};

/// Largest `q` considered when snapping to the `2cos(π/q)` grid.
pub const DEFAULT_GRID_CAP: u64 = 200;
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Relative accuracy of numeric eigenvalues.
const EIGEN_ACCURACY: f64 = 1e-10;
/// Angular slack when deciding whether a root lies in a closed sector.
const ANGLE_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,
    #[error("operator is zero")]
    ZeroOperator,
    #[error("operator has non-integer coefficients")]
    NotInteger,
    #[error("polynomial {0} is not irreducible")]
    Reducible(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("continuous mass {0} is below 1/2")]
    InsufficientContinuousMass(f64),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `t^deg(p) · p(t + 1/t)`.
pub fn kronecker_transform(p: &IntPoly) -> IntPoly {
    let n = p.degree();
    let base: IntPoly = IntPoly::from_i64(&[1, 0, 1]);
    let mut power = IntPoly::one();
    let mut out = IntPoly::zero();
    for k in 0..=n {
        let c = p.coeff(k);
        if !c.is_zero() {
            let term = &power.scale(&c) * &IntPoly::monomial(BigInt::one(), n - k);
            out = &out + &term;
        }
        power = &power * &base;
    }
    out
}

/// `2cos(π·num/den)`.
pub fn grid_value(num: u64, den: u64) -> f64 {
    2.0 * (PI * num as f64 / den as f64).cos()
}

/// The `q ≤ cap` with `|2cos(π/q) - x|` within `min(gap/4, 1e-6)`, where
/// `gap` is the spacing to the neighboring grid points.
pub fn snap_to_grid(x: f64, cap: u64) -> Option<u64> {
    (1..=cap).find(|&q| {
        let v = grid_value(1, q);
        let next = grid_value(1, q + 1) - v;
        let prev = if q > 1 { v - grid_value(1, q - 1) } else { f64::INFINITY };
        (x - v).abs() <= (next.min(prev) / 4.0).min(NORM_TOLERANCE)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// `‖A‖ ≥ 2`.
    AtLeastTwo,
    /// `‖A‖ = 2cos(π/q)`.
    Grid { q: u64, value: f64 },
    /// A nonzero integer operator of norm below 1 would be impossible.
    BelowOne,
    Indeterminate { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAtom {
    /// The atom sits at `2cos(π·numerator/denominator)`.
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
    pub minimal_poly: IntPoly,
    /// Per-root weight at the largest exact scale.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorEvidence {
    pub poly: IntPoly,
    pub multiplicity: usize,
    /// Dropped because a root leaves `[-2cos φ, 2cos φ]`.
    pub stripped: bool,
    /// Cyclotomic indices of the transformed factor, when it is a cyclotomic product.
    pub cyclotomic_indices: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEvidence {
    pub scale: usize,
    pub norm_estimate: f64,
    pub stripped_proportion: Option<f64>,
    pub factors: Vec<FactorEvidence>,
    /// Factorization left an unfactored remainder.
    pub incomplete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearTwo {
    pub atom_at_two: bool,
    pub continuous_mass: f64,
    pub equilibrium_ks: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationVerdict {
    pub norm_estimate: f64,
    pub norm_enclosure: [f64; 2],
    pub regime: Regime,
    /// All atoms at the largest exact scale lie on the grid and exhaust the spectrum.
    pub purely_atomic: bool,
    pub certified: bool,
    pub atoms: Vec<GridAtom>,
    pub evidence: Vec<ScaleEvidence>,
    pub near_two: Option<NearTwo>,
}

fn require_integer_self_adjoint(op: &Operator) -> Result<(), QuantizeError> {
    if op.squared {
        return Err(QuantizeError::NotSelfAdjoint);
    }
    if op.matrix.is_zero() {
        return Err(QuantizeError::ZeroOperator);
    }
    Ok(())
}

fn spectral_radius(s: &SpectralSample) -> f64 {
    s.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `2cos(π·a/b)` atoms of a factor whose transform is `∏ Φ_k`.
fn grid_points(indices: &[u64]) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for &k in indices {
        for j in 0..=k / 2 {
            if j.gcd(&k) == 1 || (k == 1 && j == 0) {
                let (num, den) = (2 * j, k);
                let g = num.gcd(&den).max(1);
                out.push((num / g, den / g));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Estimates `‖A‖` and, below 2, certifies the grid value and the atoms.
pub fn norm_quantize(
    a: &GroupRingMatrix,
    spec: &GroupSpec,
    schedule: &Schedule,
    opts: &SpectraOptions,
) -> Result<QuantizationVerdict, QuantizeError> {
    let op = Operator::new(a, spec)?;
    require_integer_self_adjoint(&op)?;
    let samples = spectral_samples(&op, spec, schedule, opts)?;
    let top = samples.last().expect("schedule is nonempty");
    let norm = op.norm_f64();
    let estimate = spectral_radius(top);
    let radius = EIGEN_ACCURACY * norm.max(1.0);
    let enclosure = [estimate - radius, estimate + radius];
    let integer = samples.iter().all(|s| s.denominator.is_one());

    let mut verdict = QuantizationVerdict {
        norm_estimate: estimate,
        norm_enclosure: enclosure,
        regime: Regime::Indeterminate { reason: String::new() },
        purely_atomic: false,
        certified: false,
        atoms: Vec::new(),
        evidence: Vec::new(),
        near_two: None,
    };
    if !integer {
        verdict.regime = Regime::Indeterminate { reason: "rational coefficients".into() };
        return Ok(verdict);
    }
    if estimate >= 2.0 - NORM_TOLERANCE {
        let report = crate::spectra::decompose_spectrum(&samples, norm)?;
        let atom_at_two =
            report.atoms.iter().any(|a| a.roots.iter().any(|r| (r.abs() - 2.0).abs() <= NUMERIC_RESOLUTION * norm.max(1.0)));
        let equilibrium_ks = (report.continuous_mass >= 0.5 && estimate <= 2.0 + NORM_TOLERANCE)
            .then(|| ks_distance(&report.continuous_spectrum, arcsine_cdf));
        verdict.regime = Regime::AtLeastTwo;
        verdict.near_two = Some(NearTwo { atom_at_two, continuous_mass: report.continuous_mass, equilibrium_ks });
        return Ok(verdict);
    }
    if estimate < 1.0 - NORM_TOLERANCE {
        verdict.regime = Regime::BelowOne;
        return Ok(verdict);
    }

    // 2cos φ halfway between the estimate and 2
    let cut = (estimate + 2.0) / 2.0;
    let mut last_exact: Option<(&SpectralSample, Vec<FactorEvidence>, bool)> = None;
    for s in &samples {
        let mut ev = ScaleEvidence {
            scale: s.scale,
            norm_estimate: spectral_radius(s),
            stripped_proportion: None,
            factors: Vec::new(),
            incomplete: false,
        };
        if let Some(chi) = &s.charpoly {
            let f = factor(chi, DEFAULT_DEGREE_CAP)?;
            ev.incomplete = !f.is_complete();
            let mut stripped = 0usize;
            for fac in &f.factors {
                let roots = isolate_roots(&fac.poly, 1e-14)?;
                let outside = roots.roots.iter().any(|r| r.re.abs() + r.radius > cut || r.im.abs() > r.radius.max(1e-9));
                if outside {
                    stripped += fac.poly.degree() * fac.multiplicity;
                }
                let indices = if outside {
                    None
                } else {
                    let t = factor(&kronecker_transform(&fac.poly), DEFAULT_DEGREE_CAP)?;
                    let idx: Option<Vec<u64>> =
                        if t.is_complete() { t.factors.iter().map(|g| cyclotomic_index(&g.poly)).collect() } else { None };
                    idx
                };
                ev.factors.push(FactorEvidence {
                    poly: fac.poly.clone(),
                    multiplicity: fac.multiplicity,
                    stripped: outside,
                    cyclotomic_indices: indices,
                });
            }
            ev.stripped_proportion = Some(stripped as f64 / s.scale as f64);
            last_exact = Some((s, ev.factors.clone(), ev.incomplete));
        }
        verdict.evidence.push(ev);
    }

    if let Some((s, factors, incomplete)) = last_exact {
        let mut all_grid = !incomplete;
        for fe in &factors {
            match (&fe.cyclotomic_indices, fe.stripped) {
                (Some(idx), false) => {
                    for (num, den) in grid_points(idx) {
                        verdict.atoms.push(GridAtom {
                            numerator: num,
                            denominator: den,
                            value: grid_value(num, den),
                            minimal_poly: fe.poly.clone(),
                            weight: fe.multiplicity as f64 / s.scale as f64,
                        });
                    }
                }
                _ => all_grid = false,
            }
        }
        verdict.atoms.sort_by(|x, y| x.value.total_cmp(&y.value));
        verdict.purely_atomic = all_grid;
        // the largest atom modulus is the norm of a purely atomic operator
        let top_atom = verdict.atoms.iter().max_by(|x, y| x.value.abs().total_cmp(&y.value.abs()));
        verdict.regime = match top_atom {
            Some(atom) if all_grid => {
                let num = atom.numerator.min(atom.denominator - atom.numerator);
                if num == 1 && (atom.value.abs() - estimate).abs() <= NORM_TOLERANCE {
                    verdict.certified = true;
                    Regime::Grid { q: atom.denominator, value: grid_value(1, atom.denominator) }
                } else {
                    Regime::Indeterminate {
                        reason: format!("largest atom 2cos({}π/{}) is not of the form 2cos(π/q)", num, atom.denominator),
                    }
                }
            }
            _ => Regime::Indeterminate { reason: "spectrum at the largest exact scale is not on the grid".into() },
        };
        return Ok(verdict);
    }
    verdict.regime = match snap_to_grid(estimate, DEFAULT_GRID_CAP) {
        Some(q) => Regime::Grid { q, value: grid_value(1, q) },
        None => Regime::Indeterminate { reason: format!("{estimate} is not within tolerance of a grid point") },
    };
    Ok(verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sqrt2Outcome {
    /// `‖A‖ = 1` and the spectrum lies in `{-1, 0, 1}`, so `A²` is a projection.
    ProjectionCase,
    AtLeastSqrt2,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sqrt2Verdict {
    pub outcome: Sqrt2Outcome,
    pub norm_estimate: f64,
    /// Eigenvalue points found in the norm-1 case.
    pub spectrum_points: Vec<i64>,
    pub reason: String,
}

/// Checks the dichotomy `‖A‖ = 1` with `A²` a projection, or `‖A‖ ≥ √2`.
pub fn sqrt2_gap_check(
    a: &GroupRingMatrix,
    spec: &GroupSpec,
    schedule: &Schedule,
    opts: &SpectraOptions,
) -> Result<Sqrt2Verdict, QuantizeError> {
    let op = Operator::new(a, spec)?;
    require_integer_self_adjoint(&op)?;
    if !op.matrix.denominator().is_one() {
        return Err(QuantizeError::NotInteger);
    }
    let samples = spectral_samples(&op, spec, schedule, opts)?;
    let top = samples.last().expect("schedule is nonempty");
    let estimate = spectral_radius(top);
    if (estimate - 1.0).abs() < NORM_TOLERANCE {
        let mut points: Vec<i64> = Vec::new();
        let mut ok = true;
        for s in &samples {
            match &s.charpoly {
                Some(chi) => {
                    let f = factor(chi, DEFAULT_DEGREE_CAP)?;
                    ok &= f.is_complete();
                    for fac in &f.factors {
                        match fac.poly.degree() {
                            1 => points.push(-fac.poly.coeff(0).to_string().parse::<i64>().unwrap_or(i64::MAX)),
                            _ => ok = false,
                        }
                    }
                }
                None => {
                    let w = NUMERIC_RESOLUTION;
                    let counted: usize = [-1.0, 0.0, 1.0]
                        .iter()
                        .map(|&c| {
                            let k = count_within(&s.eigenvalues, c, w);
                            if k > 0 {
                                points.push(c as i64);
                            }
                            k
                        })
                        .sum();
                    ok &= counted == s.eigenvalues.len();
                }
            }
        }
        points.sort();
        points.dedup();
        ok &= points.iter().all(|p| p.abs() <= 1);
        return Ok(Sqrt2Verdict {
            outcome: if ok { Sqrt2Outcome::ProjectionCase } else { Sqrt2Outcome::Violation },
            norm_estimate: estimate,
            spectrum_points: points,
            reason: if ok { String::new() } else { "norm 1 with spectrum outside {-1, 0, 1}".into() },
        });
    }
    let ok = estimate >= 2f64.sqrt() - NORM_TOLERANCE;
    Ok(Sqrt2Verdict {
        outcome: if ok { Sqrt2Outcome::AtLeastSqrt2 } else { Sqrt2Outcome::Violation },
        norm_estimate: estimate,
        spectrum_points: Vec::new(),
        reason: if ok { String::new() } else { format!("norm {estimate} in the gap (1, √2)") },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub polynomial: IntPoly,
    pub degree: usize,
    pub sector: [f64; 2],
    pub observed: f64,
    pub uniform: f64,
    pub deviation: f64,
    /// `ln L(p)` with `L(p) = |a₀|^(-1/2) Σ|aᵢ|`.
    pub log_l: f64,
    pub erdos_turan_bound: f64,
    pub erdos_turan_holds: bool,
    pub mahler: f64,
    pub log_mahler_per_degree: f64,
    pub dubickas_applicable: bool,
    pub dubickas_bound: Option<f64>,
    pub dubickas_holds: Option<bool>,
    pub irreducible: bool,
}

/// `16 √(ln L / deg)`; infinite when the constant term vanishes.
fn erdos_turan(p: &IntPoly) -> (f64, f64) {
    let a0 = p.coeff(0).abs();
    if a0.is_zero() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let log_l = big_ln(&p.l1_norm()) - 0.5 * big_ln(&a0);
    (log_l, 16.0 * (log_l.max(0.0) / p.degree() as f64).sqrt())
}

/// `6 (ln M/deg)^(1/3) ln(deg/ln M)`, applicable for `0 < ln M/deg < 5/6`.
fn dubickas(log_m: f64, deg: usize) -> Option<f64> {
    let ratio = log_m / deg as f64;
    (ratio > 0.0 && ratio < 5.0 / 6.0).then(|| 6.0 * ratio.cbrt() * (deg as f64 / log_m).ln())
}

fn in_sector(arg: f64, lo: f64, hi: f64) -> bool {
    let two_pi = 2.0 * PI;
    // shift the argument into [lo, lo + 2π)
    let shifted = lo + (arg - lo).rem_euclid(two_pi);
    shifted <= hi + ANGLE_SLACK || (shifted - two_pi >= lo - ANGLE_SLACK && shifted - two_pi <= hi + ANGLE_SLACK)
}

/// Reports for several closed sectors `[α, β]` (angles in radians,
/// `β - α ≤ 2π`) sharing one root isolation. With `require_irreducible`,
/// reducible input is refused.
pub fn discrepancy_reports(
    p: &IntPoly,
    sectors: &[[f64; 2]],
    require_irreducible: bool,
) -> Result<Vec<DiscrepancyReport>, QuantizeError> {
    if !p.is_monic() {
        return Err(RootError::NotMonic.into());
    }
    if p.degree() == 0 {
        return Err(PolyError::ConstantPolynomial.into());
    }
    let f = factor(p, DEFAULT_DEGREE_CAP)?;
    let irreducible = f.is_complete() && f.factors.len() == 1 && f.factors[0].multiplicity == 1;
    if require_irreducible && !irreducible {
        return Err(QuantizeError::Reducible(p.to_string()));
    }
    let roots = isolate_roots(p, 1e-13)?;
    let args: Vec<f64> = roots.expanded_centers().iter().map(|z| z.arg()).collect();
    let m = mahler_measure(p)?;
    let log_m = if m.exact_one { 0.0 } else { m.value.ln() };
    let n = p.degree();
    let (log_l, et) = erdos_turan(p);
    let dub = dubickas(log_m, n);
    Ok(sectors
        .iter()
        .map(|&[lo, hi]| {
            let full = hi - lo >= 2.0 * PI - ANGLE_SLACK;
            let inside = if full { n } else { args.iter().filter(|&&a| in_sector(a, lo, hi)).count() };
            let observed = inside as f64 / n as f64;
            let uniform = ((hi - lo) / (2.0 * PI)).min(1.0);
            let deviation = (observed - uniform).abs();
            DiscrepancyReport {
                polynomial: p.clone(),
                degree: n,
                sector: [lo, hi],
                observed,
                uniform,
                deviation,
                log_l,
                erdos_turan_bound: et,
                erdos_turan_holds: deviation <= et,
                mahler: m.value,
                log_mahler_per_degree: log_m / n as f64,
                dubickas_applicable: dub.is_some(),
                dubickas_bound: dub,
                dubickas_holds: dub.map(|b| deviation <= b),
                irreducible,
            }
        })
        .collect())
}

pub fn discrepancy_report(p: &IntPoly, sector: [f64; 2], require_irreducible: bool) -> Result<DiscrepancyReport, QuantizeError> {
    Ok(discrepancy_reports(p, &[sector], require_irreducible)?.remove(0))
}

/// The `2^k` dyadic sectors of `[-π, π]` for `k = 0..=levels`.
pub fn dyadic_sectors(levels: u32) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for k in 0..=levels {
        let parts = 1u32 << k;
        let width = 2.0 * PI / parts as f64;
        for j in 0..parts {
            out.push([-PI + j as f64 * width, -PI + (j + 1) as f64 * width]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub polynomial: IntPoly,
    pub phi: f64,
    pub lambda: f64,
    pub cyclotomic: bool,
    /// Proportion of roots with argument in `[-φ, φ] ∪ [π - φ, π + φ]`.
    pub observed: f64,
    /// Angular measure of the double sector, `2φ/π`.
    pub uniform: f64,
    pub log_mahler: f64,
    /// `ln M(p) ≤ δ · deg · ln λ`.
    pub mahler_inequality_holds: Option<bool>,
    /// Dubickas bound for two arcs, when applicable.
    pub dubickas_two_arc_bound: Option<f64>,
    /// `δ < 2φ/π - bound`: the contradiction the sector argument relies on.
    pub contradiction_triggered: bool,
}

/// Sector proportion of an irreducible polynomial whose roots lie on the
/// unit circle or in the double sector around the real axis, all within
/// `|z| ≤ λ`.
pub fn sector_proportion_bound(p: &IntPoly, phi: f64, lambda: f64) -> Result<SectorReport, QuantizeError> {
    if !(phi > 0.0 && phi < PI / 2.0) || lambda.is_nan() || lambda < 1.0 {
        return Err(QuantizeError::Hypothesis(format!("need 0 < φ < π/2 and λ ≥ 1, got φ = {phi}, λ = {lambda}")));
    }
    let f = factor(p, DEFAULT_DEGREE_CAP)?;
    if !(f.is_complete() && f.factors.len() == 1 && f.factors[0].multiplicity == 1) {
        return Err(QuantizeError::Reducible(p.to_string()));
    }
    let n = p.degree();
    let roots = isolate_roots(p, 1e-13)?.expanded_centers();
    let sector = |z: &num_complex::Complex64| in_sector(z.arg(), -phi, phi) || in_sector(z.arg(), PI - phi, PI + phi);
    let inside = roots.iter().filter(|z| sector(z)).count();
    let observed = inside as f64 / n as f64;
    let uniform = 2.0 * phi / PI;
    if f.factors[0].cyclotomic.is_some() || cyclotomic_index(p).is_some() {
        return Ok(SectorReport {
            polynomial: p.clone(),
            phi,
            lambda,
            cyclotomic: true,
            observed,
            uniform,
            log_mahler: 0.0,
            mahler_inequality_holds: None,
            dubickas_two_arc_bound: None,
            contradiction_triggered: false,
        });
    }
    for z in &roots {
        let on_circle = (z.norm() - 1.0).abs() <= 1e-9;
        if !(on_circle || sector(z)) {
            return Err(QuantizeError::Hypothesis(format!("root {z} is neither on the unit circle nor in the sector")));
        }
        if z.norm() > lambda * (1.0 + 1e-12) {
            return Err(QuantizeError::Hypothesis(format!("root {z} lies outside |z| ≤ {lambda}")));
        }
    }
    let log_m = mahler_measure(p)?.value.ln();
    let holds = log_m <= observed * n as f64 * lambda.ln() + 1e-9;
    let bound = dubickas(log_m, n).map(|b| 2.0 * b);
    Ok(SectorReport {
        polynomial: p.clone(),
        phi,
        lambda,
        cyclotomic: false,
        observed,
        uniform,
        log_mahler: log_m,
        mahler_inequality_holds: Some(holds),
        dubickas_two_arc_bound: bound,
        contradiction_triggered: bound.is_some_and(|b| observed < uniform - b),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub ks_distance: f64,
    pub continuous_mass: f64,
    pub spectral_radius: f64,
    /// `λ_K = (‖A‖₁ + √(‖A‖₁² - 4))/2`, the largest root modulus after the transform.
    pub lambda_k: f64,
    /// `ln M(q)/deg q` for the transformed continuous part.
    pub log_mahler_per_degree: f64,
    /// `ln M(q) / (ln λ_K · deg q)`; absent when `λ_K = 1`.
    pub delta_n: Option<f64>,
}

/// Kolmogorov–Smirnov distance from the continuous part to the arcsine law
/// `F(x) = 1 - arccos(x/2)/π`, for spectra inside `[-2, 2]`.
pub fn equilibrium_check(report: &SpectralReport, samples: &[SpectralSample]) -> Result<EquilibriumReport, QuantizeError> {
    let top = samples.iter().max_by_key(|s| s.scale).ok_or(SpectraError::EmptySchedule)?;
    let radius = spectral_radius(top);
    if radius > 2.0 + NORM_TOLERANCE {
        return Err(QuantizeError::NotApplicable(format!("spectral radius {radius} exceeds 2")));
    }
    if report.continuous_mass < 0.5 {
        return Err(QuantizeError::InsufficientContinuousMass(report.continuous_mass));
    }
    let cont = &report.continuous_spectrum;
    let norm = report.norm_bound;
    let lambda_k = if norm >= 2.0 { (norm + (norm * norm - 4.0).sqrt()) / 2.0 } else { 1.0 };
    // each eigenvalue x gives the transformed root pair r, 1/r with r + 1/r = x
    let log_m: f64 = cont
        .iter()
        .map(|&x| if x.abs() > 2.0 { ((x.abs() + (x * x - 4.0).sqrt()) / 2.0).ln() } else { 0.0 })
        .sum();
    let per_degree = log_m / (2.0 * cont.len() as f64);
    Ok(EquilibriumReport {
        ks_distance: ks_distance(cont, arcsine_cdf),
        continuous_mass: report.continuous_mass,
        spectral_radius: radius,
        lambda_k,
        log_mahler_per_degree: per_degree,
        delta_n: (lambda_k > 1.0).then(|| per_degree / lambda_k.ln()),
    })
}
