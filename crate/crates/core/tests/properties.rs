mod common;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use common::*;
use sspec_core::cli::to_json_string;
use sspec_core::exactpoly::{charpoly, discriminant, enumerate_pn, factor, multiplicity, IntPoly, DEFAULT_DEGREE_CAP};
use sspec_core::groupring::{multiplicative_defect, one_norm, rational_to_f64, realize, GroupRingElement, GroupRingMatrix};
use sspec_core::groups::{build_sofic_map, measure_defect, random_permutation, word_evaluate, GroupSpec, Word};
use sspec_core::linalg::IntMatrix;
use sspec_core::quantize::kronecker_transform;
use sspec_core::rootlab::{certify_atom, count_zeros_in_disk, isolate_roots, mahler_measure, AtomVerdict};
use sspec_core::spectra::{
    decompose_spectrum, eigenvalues_symmetric, spectral_samples, Operator, Schedule, SpectraOptions,
};

fn monic(coeffs: Vec<i64>) -> IntPoly {
    let mut c = coeffs;
    c.push(1);
    IntPoly::from_i64(&c)
}

fn monic_poly(max_deg: usize, bound: i64) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-bound..=bound, 1..=max_deg).prop_map(monic)
}

/// A group with a scale admitting a sofic map, and a seed.
fn group_and_scale() -> impl Strategy<Value = (GroupSpec, usize, u64)> {
    prop_oneof![
        (1usize..=8, 1usize..=4).prop_map(|(m, k)| (GroupSpec::cyclic(m).unwrap(), m * k)),
        (2usize..=5, 1usize..=2).prop_map(|(m0, d)| (GroupSpec::free_abelian(d).unwrap(), m0.pow(d as u32))),
        (1usize..=3, 1usize..=12).prop_map(|(k, n)| (GroupSpec::free(k).unwrap(), n)),
    ]
    .prop_flat_map(|(g, n)| (Just(g), Just(n), any::<u64>()))
}

fn word_over(spec: &GroupSpec, letters: &[(usize, bool)]) -> Word {
    let k = spec.generator_count();
    let text: String = letters
        .iter()
        .map(|&(g, inv)| {
            let c = spec.names()[g % k];
            if inv { c.to_ascii_uppercase() } else { c }
        })
        .collect();
    spec.parse_word(&text).unwrap()
}

fn letters() -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..4, any::<bool>()), 0..6)
}

/// Random integer element over the generators and their inverses.
fn element_text(spec: &GroupSpec, coeffs: &[(i64, Vec<(usize, bool)>)]) -> String {
    let mut terms = vec!["0".to_string()];
    for (c, w) in coeffs {
        let word = word_over(spec, w);
        let text = spec.format_word(&word);
        terms.push(if word.is_identity() { format!("{c}") } else { format!("{c}*{text}") });
    }
    terms.join(" + ")
}

fn terms() -> impl Strategy<Value = Vec<(i64, Vec<(usize, bool)>)>> {
    prop::collection::vec((-3i64..=3, prop::collection::vec((0usize..4, any::<bool>()), 0..3)), 1..4)
}

fn exact_group() -> impl Strategy<Value = (GroupSpec, usize)> {
    prop_oneof![
        (1usize..=7, 1usize..=3).prop_map(|(m, k)| (GroupSpec::cyclic(m).unwrap(), m * k)),
        (2usize..=4, 1usize..=2).prop_map(|(m0, d)| (GroupSpec::free_abelian(d).unwrap(), m0.pow(d as u32))),
    ]
}

fn dense_sum(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let rows = (0..a.rows()).map(|i| a.row(i).iter().zip(b.row(i)).map(|(x, y)| x + y).collect()).collect();
    IntMatrix::from_rows(rows)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sofic_maps_send_identity_and_inverses((g, n, seed) in group_and_scale(), w in letters()) {
        let map = build_sofic_map(&g, n, seed).unwrap();
        prop_assert!(word_evaluate(&g, &map, &Word::identity()).unwrap().is_identity());
        let word = word_over(&g, &w);
        let image = word_evaluate(&g, &map, &word).unwrap();
        prop_assert_eq!(word_evaluate(&g, &map, &word.inverse()).unwrap(), image.inverse());
    }

    #[test]
    fn exact_maps_are_homomorphisms((g, n) in exact_group(), w1 in letters(), w2 in letters()) {
        let map = build_sofic_map(&g, n, 0).unwrap();
        let (a, b) = (word_over(&g, &w1), word_over(&g, &w2));
        let lhs = word_evaluate(&g, &map, &a.concat(&b)).unwrap();
        let rhs = word_evaluate(&g, &map, &a).unwrap().compose(&word_evaluate(&g, &map, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let defect = measure_defect(&g, &map, &[a, b]).unwrap();
        prop_assert!(defect.multiplicativity.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn realization_is_linear_and_adjoint_is_transpose((g, n) in exact_group(), x in terms(), y in terms()) {
        let map = build_sofic_map(&g, n, 0).unwrap();
        let ex = GroupRingElement::parse(&g, &element_text(&g, &x)).unwrap();
        let ey = GroupRingElement::parse(&g, &element_text(&g, &y)).unwrap();
        let real = |e: &GroupRingElement| realize(&GroupRingMatrix::scalar(e.clone()), &map, &g).unwrap().to_dense();
        prop_assert_eq!(real(&ex.add(&ey)), dense_sum(&real(&ex), &real(&ey)));
        prop_assert_eq!(real(&ex.adjoint(&g).unwrap()), real(&ex).transpose());
        let sym = ex.add(&ex.adjoint(&g).unwrap());
        let rs = realize(&GroupRingMatrix::scalar(sym), &map, &g).unwrap();
        prop_assert!(rs.is_symmetric());
        prop_assert!(multiplicative_defect(&ex, &ey, &map, &g).unwrap().is_zero());
    }

    #[test]
    fn spectral_radius_is_bounded_by_one_norm((g, n, seed) in group_and_scale(), x in terms()) {
        let e = GroupRingElement::parse(&g, &element_text(&g, &x)).unwrap();
        let a = GroupRingMatrix::scalar(e.add(&e.adjoint(&g).unwrap()));
        let map = build_sofic_map(&g, n, seed).unwrap();
        let ev = eigenvalues_symmetric(&realize(&a, &map, &g).unwrap()).unwrap();
        let radius = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(radius <= rational_to_f64(&one_norm(&a)) + 1e-8);
    }

    #[test]
    fn charpoly_matches_bareiss(rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 12), 1..=12), t0 in -3i64..=3) {
        let n = rows.len();
        let m = IntMatrix::from_i64(&rows.iter().map(|r| r[..n].to_vec()).collect::<Vec<_>>());
        let chi = charpoly(&sspec_core::groupring::RealizedMatrix::from_dense(&m));
        prop_assert_eq!(chi.eval(&BigInt::from(t0)), m.shifted(&BigInt::from(t0)).determinant());
    }

    #[test]
    fn factorization_multiplies_back(parts in prop::collection::vec(monic_poly(4, 4), 1..4)) {
        let mut p = IntPoly::one();
        for q in &parts {
            p = &p * q;
        }
        let f = factor(&p, DEFAULT_DEGREE_CAP).unwrap();
        prop_assert_eq!(f.expand(), p);
    }

    #[test]
    fn discriminant_matches_root_pairs(p in monic_poly(5, 6)) {
        let d = discriminant(&p).unwrap();
        prop_assume!(!d.is_zero() && p.degree() >= 2);
        let roots = isolate_roots(&p, 1e-14).unwrap().expanded_centers();
        let mut prod = Complex64::one();
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                prod *= (roots[i] - roots[j]).powi(2);
            }
        }
        let exact = d.to_f64().unwrap();
        prop_assert!((prod.re - exact).abs() <= 1e-6 * exact.abs(), "{} vs {}", prod, exact);
    }

    #[test]
    fn multiplicity_of_constructed_powers(p in monic_poly(3, 5), r in monic_poly(3, 5), k in 1usize..=4) {
        let f = factor(&p, DEFAULT_DEGREE_CAP).unwrap();
        prop_assume!(f.factors.len() == 1 && f.factors[0].multiplicity == 1 && f.is_complete());
        prop_assume!(!p.divides(&r));
        let q = &p.pow(k as u32) * &r;
        prop_assert_eq!(multiplicity(&p, &q), k);
    }

    #[test]
    fn enumeration_contains_every_small_integer_polynomial(p in monic_poly(2, 4)) {
        let roots = isolate_roots(&p, 1e-13).unwrap();
        let radius = roots.expanded_centers().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!(radius <= 2.0 - 1e-9);
        let list = enumerate_pn(p.degree(), 2.0, 1 << 24).unwrap();
        prop_assert!(list.contains(&p), "{p} missing");
    }

    #[test]
    fn disk_counts_are_monotone(p in monic_poly(6, 5), re in -3.0f64..3.0, im in -3.0f64..3.0, e1 in 0.01f64..3.0, e2 in 0.01f64..3.0) {
        let beta = Complex64::new(re, im);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        if let (Ok(a), Ok(b)) = (count_zeros_in_disk(&p, beta, lo), count_zeros_in_disk(&p, beta, hi)) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn mahler_measure_is_multiplicative_and_bounded(p in monic_poly(5, 5), q in monic_poly(5, 5)) {
        let (mp, mq, mpq) = (mahler_measure(&p).unwrap(), mahler_measure(&q).unwrap(), mahler_measure(&(&p * &q)).unwrap());
        prop_assert!(mp.lower * mq.lower <= mpq.upper * (1.0 + 1e-12));
        prop_assert!(mpq.lower <= mp.upper * mq.upper * (1.0 + 1e-12));
        let radius = isolate_roots(&p, 1e-13).unwrap().expanded_centers().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(mp.lower <= (1.0 + radius).powi(p.degree() as i32) * (1.0 + 1e-12));
    }

    #[test]
    fn irreducible_roots_are_isolated(p in monic_poly(6, 6)) {
        let f = factor(&p, DEFAULT_DEGREE_CAP).unwrap();
        prop_assume!(f.factors.len() == 1 && f.factors[0].multiplicity == 1 && f.is_complete());
        let roots = isolate_roots(&p, 1e-14).unwrap().expanded_centers();
        let gap = roots.iter().enumerate()
            .flat_map(|(i, a)| roots.iter().skip(i + 1).map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        for beta in &roots {
            // cluster proportion at a radius below the root separation
            let count = count_zeros_in_disk(&p, *beta, (gap / 4.0).min(1e-3)).unwrap();
            prop_assert_eq!(count, 1);
        }
    }

    #[test]
    fn certified_atoms_are_algebraic_integers(m in 2usize..=6, seed in any::<u64>(), pick in 0usize..64, shift in -1.0f64..1.0) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = GroupSpec::cyclic(m).unwrap();
        let a = scalar_op(&g, &random_self_adjoint(&mut rng, m, 1));
        prop_assume!(!a.is_zero());
        let op = Operator::new(&a, &g).unwrap();
        let samples = spectral_samples(&op, &g, &Schedule::new(&[m, 2 * m], 0).unwrap(), &SpectraOptions::default()).unwrap();
        let obs: Vec<(IntPoly, usize)> = samples.iter().map(|s| (s.charpoly.clone().unwrap(), s.scale)).collect();
        let ev = &samples[0].eigenvalues;
        // either an eigenvalue or an arbitrary point
        let beta = if pick % 2 == 0 { ev[pick % ev.len()] } else { ev[pick % ev.len()] + shift };
        let lambda = op.norm_f64().max(1.0);
        let c = certify_atom(&obs, Complex64::new(beta, 0.0), lambda).unwrap();
        if c.verdict == AtomVerdict::CertifiedAlgebraicInteger {
            let mp = c.minimal_poly.clone().unwrap();
            prop_assert!(mp.is_monic());
            prop_assert!(mp.degree() <= c.degree_bound.unwrap());
            prop_assert!(mp.eval_f64(beta).abs() < 1e-6);
            if mp.degree() <= 3 {
                if let Ok(list) = enumerate_pn(mp.degree(), lambda, 1 << 26) {
                    prop_assert!(list.contains(&mp));
                }
            }
        }
    }

    #[test]
    fn numeric_eigenvalues_match_certified_roots(m in 2usize..=6, k in 1usize..=4, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = GroupSpec::cyclic(m).unwrap();
        let a = scalar_op(&g, &random_self_adjoint(&mut rng, m, 2));
        let map = build_sofic_map(&g, m * k, 0).unwrap();
        let real = realize(&a, &map, &g).unwrap();
        let numeric = eigenvalues_symmetric(&real).unwrap();
        let roots = isolate_roots(&charpoly(&real), 1e-13).unwrap();
        let tol = 1e-6 * rational_to_f64(&one_norm(&a)).max(1.0);
        let mut exact: Vec<f64> = roots.expanded_centers().iter().map(|z| z.re).collect();
        exact.sort_by(f64::total_cmp);
        prop_assert_eq!(exact.len(), numeric.len());
        for (x, y) in exact.iter().zip(&numeric) {
            prop_assert!((x - y).abs() <= tol + roots.max_radius(), "{} vs {}", x, y);
        }
    }

    #[test]
    fn reports_are_normalized_with_monotone_cdf(m in 2usize..=6, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = GroupSpec::cyclic(m).unwrap();
        let a = scalar_op(&g, &random_self_adjoint(&mut rng, m, 2));
        let op = Operator::new(&a, &g).unwrap();
        let samples = spectral_samples(&op, &g, &Schedule::new(&[m, 2 * m, 3 * m], 0).unwrap(), &SpectraOptions::default()).unwrap();
        let bound = rational_to_f64(&one_norm(&a));
        for s in &samples {
            prop_assert_eq!(s.eigenvalues.len(), s.scale);
            prop_assert!(s.eigenvalues.iter().all(|x| x.abs() <= bound + 1e-8));
        }
        match decompose_spectrum(&samples, op.norm_f64()) {
            Ok(rep) => {
                prop_assert!((rep.mass_total - 1.0).abs() <= 1e-6);
                prop_assert!(rep.cdf_y.windows(2).all(|w| w[0] <= w[1]));
            }
            Err(e) => prop_assert!(a.is_zero(), "{e}"),
        }
    }

    #[test]
    fn kronecker_transform_is_reciprocal_and_multiplicative(p in monic_poly(5, 6), q in monic_poly(5, 6)) {
        let kp = kronecker_transform(&p);
        prop_assert_eq!(kp.reverse(), kp.clone());
        prop_assert_eq!(kronecker_transform(&(&p * &q)), &kp * &kronecker_transform(&q));
    }

    #[test]
    fn json_output_round_trips(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20), n in any::<i64>()) {
        let v = serde_json::json!({ "values": xs, "count": n, "nested": { "first": xs.first() } });
        let text = to_json_string(&v);
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, v);
    }
}

#[test]
fn random_permutations_have_few_fixed_points() {
    let n = 1000;
    let seeds = 200;
    let total: usize = (0..seeds).map(|s| random_permutation(n, s).fixed_points()).sum();
    let mean = total as f64 / seeds as f64 / n as f64;
    assert!(mean <= 3.0 / n as f64, "mean fixed-point fraction {mean}");
    let g = GroupSpec::free(2).unwrap();
    let words = [g.parse_word("a").unwrap(), g.parse_word("b").unwrap()];
    let mut sums = [0.0f64; 2];
    for s in 0..100 {
        let map = build_sofic_map(&g, n, s).unwrap();
        let d = measure_defect(&g, &map, &words).unwrap();
        for (k, (_, f)) in d.freeness.iter().enumerate() {
            sums[k] += f;
        }
    }
    assert!(sums.iter().all(|s| s / 100.0 <= 3.0 / n as f64), "{sums:?}");
}

#[test]
fn successive_cdfs_contract_along_doubling_schedule() {
    let z = GroupSpec::free_abelian(1).unwrap();
    let op = Operator::new(&scalar_op(&z, "s + S"), &z).unwrap();
    let scales: Vec<usize> = (3..=11).map(|k| 1usize << k).map(|m| m + 2).collect();
    let samples = spectral_samples(&op, &z, &Schedule::new(&scales, 0).unwrap(), &SpectraOptions::default()).unwrap();
    let rep = decompose_spectrum(&samples, op.norm_f64()).unwrap();
    let d: Vec<f64> = rep.trace.iter().filter_map(|t| t.cdf_distance_to_previous).collect();
    let decreasing = d.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(decreasing as f64 >= 0.8 * (d.len() - 1) as f64, "{d:?}");
}
