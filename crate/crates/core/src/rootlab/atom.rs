use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{count_in_disk, isolate_roots, isolate_roots_with, Precision, RootError, RootSet};
use crate::exactpoly::{enumerate_pn, factor, IntPoly, DEFAULT_DEGREE_CAP, DEFAULT_ENUMERATION_BUDGET};

pub const MAX_FIXED_POINT_ITERATIONS: usize = 32;

/// Smallest disk radius used for cluster counting, relative to `max(1, λ)`.
/// Below it the threshold radius is indistinguishable from the certified
/// root radii.
const RESOLUTION: f64 = 1e-9;

/// `exp(-2 log(2 (1 + λ)^2) / δ'^2)`: the disk radius at which a cluster of
/// proportion `δ'` forces `β` to be a root of a low-degree integer polynomial.
pub fn epsilon_threshold(delta: f64, lambda: f64) -> f64 {
    (-2.0 * (2.0 * (1.0 + lambda).powi(2)).ln() / (delta * delta)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomVerdict {
    CertifiedAlgebraicInteger,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleProportion {
    pub scale: usize,
    #[serde(with = "crate::serde_util::rational_string")]
    pub proportion: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomCertificate {
    pub beta: [f64; 2],
    /// Mean of the clustered roots at the largest scale.
    pub beta_estimate: [f64; 2],
    #[serde(with = "crate::serde_util::rational_string::option")]
    pub cluster_proportion: Option<BigRational>,
    pub radius_bound: f64,
    pub epsilon_used: f64,
    pub degree_bound: Option<usize>,
    pub minimal_poly: Option<IntPoly>,
    pub verdict: AtomVerdict,
    pub iterations: usize,
    pub proportions: Vec<ScaleProportion>,
    pub reason: String,
}

struct Observation {
    chi: IntPoly,
    scale: usize,
    roots: RootSet,
}

impl Observation {
    fn count(&mut self, beta: Complex64, eps: f64) -> Result<usize, RootError> {
        match count_in_disk(&self.roots, beta, eps) {
            Err(RootError::BoundaryAmbiguous { .. }) => {
                self.roots = isolate_roots_with(&self.chi, 1e-15, Precision::Quad)?;
                count_in_disk(&self.roots, beta, eps)
            }
            other => other,
        }
    }
}

/// Degree bound `⌊(2 - δ')/δ'⌋`.
fn degree_bound(delta: &BigRational) -> usize {
    let two = BigRational::from_integer(BigInt::from(2));
    ((&two - delta) / delta).floor().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// Finite-scale test of whether `β` carries a cluster of eigenvalues that
/// forces it to be an algebraic integer.
///
/// The cluster proportion `δ'` is solved self-consistently: starting from
/// `δ' = 1`, the next estimate is the smallest proportion of roots within
/// the threshold radius for the current estimate, over all observations.
pub fn certify_atom(observations: &[(IntPoly, usize)], beta: Complex64, lambda: f64) -> Result<AtomCertificate, RootError> {
    if observations.is_empty() {
        return Err(RootError::BadArgument("no observations".into()));
    }
    if !(lambda.is_finite() && lambda > 0.0) || !beta.is_finite() {
        return Err(RootError::BadArgument("radius bound and β must be finite, λ > 0".into()));
    }
    let mut obs = Vec::with_capacity(observations.len());
    for (chi, scale) in observations {
        if !chi.is_monic() {
            return Err(RootError::NotMonic);
        }
        let roots = isolate_roots(chi, 1e-12)?;
        if let Some(r) = roots.roots.iter().find(|r| r.center().norm() - r.radius > lambda * (1.0 + 1e-9)) {
            return Err(RootError::InconsistentObservation(format!(
                "root ({}, {}) of a scale-{scale} polynomial lies outside |z| ≤ {lambda}",
                r.re, r.im
            )));
        }
        obs.push(Observation { chi: chi.clone(), scale: *scale, roots });
    }
    obs.sort_by_key(|o| o.scale);
    let floor = RESOLUTION * lambda.max(1.0);
    let eps_of = |delta: &BigRational| epsilon_threshold(delta.to_f64().unwrap_or(0.0), lambda).max(floor);

    let mut cert = AtomCertificate {
        beta: [beta.re, beta.im],
        beta_estimate: [beta.re, beta.im],
        cluster_proportion: None,
        radius_bound: lambda,
        epsilon_used: 0.0,
        degree_bound: None,
        minimal_poly: None,
        verdict: AtomVerdict::Inconclusive,
        iterations: 0,
        proportions: Vec::new(),
        reason: String::new(),
    };

    let mut delta = BigRational::one();
    let mut history: Vec<BigRational> = Vec::new();
    let mut fixed = false;
    for iter in 1..=MAX_FIXED_POINT_ITERATIONS {
        let eps = eps_of(&delta);
        let mut props = Vec::with_capacity(obs.len());
        for o in obs.iter_mut() {
            let z = o.count(beta, eps)?;
            props.push(ScaleProportion {
                scale: o.scale,
                proportion: BigRational::new(BigInt::from(z), BigInt::from(o.chi.degree().max(1))),
            });
        }
        let next = props.iter().map(|p| p.proportion.clone()).min().unwrap_or_else(BigRational::zero);
        cert.iterations = iter;
        cert.epsilon_used = eps;
        cert.proportions = props;
        if next.is_zero() {
            cert.verdict = AtomVerdict::Refuted;
            cert.cluster_proportion = Some(next);
            cert.reason = "no zeros cluster at β".into();
            return Ok(cert);
        }
        if next == delta {
            fixed = true;
            break;
        }
        if history.contains(&next) {
            cert.reason = "cluster proportion oscillates".into();
            return Ok(cert);
        }
        history.push(delta);
        delta = next;
    }
    if !fixed {
        cert.reason = "no fixed point within the iteration limit".into();
        return Ok(cert);
    }
    cert.cluster_proportion = Some(delta.clone());

    // a proportion that extrapolates towards 0 along the schedule is not an atom
    let distinct: Vec<&ScaleProportion> = {
        let mut v: Vec<&ScaleProportion> = Vec::new();
        for p in &cert.proportions {
            if v.last().is_some_and(|q| q.scale == p.scale) {
                v.pop();
            }
            v.push(p);
        }
        v
    };
    if distinct.len() >= 2 {
        let (a, b) = (distinct[distinct.len() - 2], distinct[distinct.len() - 1]);
        let (na, nb) = (BigRational::from_integer(a.scale.into()), BigRational::from_integer(b.scale.into()));
        let extrapolated = (&nb * &b.proportion - &na * &a.proportion) / (&nb - &na);
        if extrapolated * BigRational::from_integer(4.into()) < b.proportion {
            cert.verdict = AtomVerdict::Refuted;
            cert.reason = "cluster proportion decays along the schedule".into();
            return Ok(cert);
        }
    }

    let bound = degree_bound(&delta);
    cert.degree_bound = Some(bound);
    let eps = cert.epsilon_used;
    let top = obs.last_mut().expect("nonempty");
    let cluster: Vec<Complex64> = top
        .roots
        .roots
        .iter()
        .filter(|r| (r.center() - beta).norm() <= eps)
        .flat_map(|r| std::iter::repeat_n(r.center(), r.multiplicity))
        .collect();
    if !cluster.is_empty() {
        let mean = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        cert.beta_estimate = [mean.re, mean.im];
    }

    let near = |q: &IntPoly| -> Result<Option<f64>, RootError> {
        let rs = isolate_roots(q, 1e-12)?;
        Ok(rs
            .roots
            .iter()
            .map(|r| (r.center() - beta).norm() - r.radius)
            .filter(|d| *d <= eps)
            .min_by(f64::total_cmp))
    };
    let mut best: Option<(usize, f64, IntPoly)> = None;
    let factored = factor(&top.chi, DEFAULT_DEGREE_CAP)?;
    for f in &factored.factors {
        if f.poly.degree() > bound {
            continue;
        }
        if let Some(d) = near(&f.poly)? {
            let key = (f.poly.degree(), d);
            if best.as_ref().is_none_or(|(bd, bdist, _)| key < (*bd, *bdist)) {
                best = Some((key.0, key.1, f.poly.clone()));
            }
        }
    }
    if best.is_none() && bound <= 4 {
        if let Ok(candidates) = enumerate_pn(bound, lambda, DEFAULT_ENUMERATION_BUDGET) {
            for q in candidates {
                if q.divides(&top.chi) {
                    if let Some(d) = near(&q)? {
                        let key = (q.degree(), d);
                        if best.as_ref().is_none_or(|(bd, bdist, _)| key < (*bd, *bdist)) {
                            best = Some((key.0, key.1, q));
                        }
                    }
                }
            }
        }
    }
    match best {
        Some((_, _, q)) => {
            cert.minimal_poly = Some(q);
            cert.verdict = AtomVerdict::CertifiedAlgebraicInteger;
            cert.reason = "stable cluster with a low-degree integer polynomial vanishing at β".into();
        }
        None => {
            cert.reason = "stable cluster but no polynomial of degree within the bound vanishes at β".into();
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    #[test]
    fn threshold_values() {
        // λ = 2, δ' = 1: exp(-2 log 18)
        assert!((epsilon_threshold(1.0, 2.0) - 18f64.powi(-2)).abs() < 1e-15);
        assert_eq!(degree_bound(&BigRational::new(2.into(), 5.into())), 4);
        assert_eq!(degree_bound(&BigRational::new(1.into(), 2.into())), 3);
    }

    #[test]
    fn zero_atom_of_cyclic_four() {
        let chi = p("t^4 - 4*t^2");
        let obs = vec![(chi.clone(), 4), (chi.pow(2), 8), (chi.pow(4), 16)];
        let c = certify_atom(&obs, Complex64::new(0.0, 0.0), 2.0).unwrap();
        assert_eq!(c.verdict, AtomVerdict::CertifiedAlgebraicInteger);
        assert_eq!(c.minimal_poly, Some(p("t")));
        assert_eq!(c.cluster_proportion, Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(c.degree_bound, Some(3));
    }

    #[test]
    fn golden_atom_of_cyclic_five() {
        let chi = &p("t - 2") * &p("t^2 + t - 1").pow(2);
        let beta = Complex64::new((5f64.sqrt() - 1.0) / 2.0, 0.0);
        let c = certify_atom(&[(chi.clone(), 5), (chi.pow(2), 10)], beta, 2.0).unwrap();
        assert_eq!(c.verdict, AtomVerdict::CertifiedAlgebraicInteger);
        assert_eq!(c.minimal_poly, Some(p("t^2 + t - 1")));
        assert_eq!(c.degree_bound, Some(4));
        let refuted = certify_atom(&[(chi, 5)], Complex64::new(1.0 / 3.0, 0.0), 2.0).unwrap();
        assert_eq!(refuted.verdict, AtomVerdict::Refuted);
    }

    #[test]
    fn rejects_roots_outside_radius() {
        let r = certify_atom(&[(p("t - 3"), 1)], Complex64::new(3.0, 0.0), 2.0);
        assert!(matches!(r, Err(RootError::InconsistentObservation(_))));
    }
}
