use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ptmap::base::{HSpec, MembershipOptions, NSpec, OrbitGeometry};
use ptmap::experiment::{entries, Context, ExperimentConfig, Pipeline};
use ptmap::lie::{
    adjoint, bracket, builders, exp_map, split_center, AlgebraElement, AutomorphismSpec, InnerForm,
    LieGroup,
};
use ptmap::linalg;
use ptmap::oracle::fd_sff_base;
use ptmap::path::{
    canonical_reflection, develop_smooth, gauge_act, gauge_push_tangent, l2_inner, phi, DiscretePath, GaugePath,
};
use ptmap::pf::{
    fiber_basis, fiber_image, refined_spectrum, sff_preimage, shape_fiber, shape_preimage, spectrum_and_traces,
    TangentBasis,
};
use ptmap::verdict::{
    check_austere, check_inverse_closed, classify_totally_geodesic, random_gauge, verify_reflection,
    ReflectionCandidate, Verdict,
};

fn form() -> InnerForm {
    InnerForm::default()
}

fn su2() -> LieGroup {
    builders::su(2, form()).unwrap()
}

fn so3() -> LieGroup {
    builders::so(3, form()).unwrap()
}

fn groups() -> Vec<LieGroup> {
    vec![
        so3(),
        builders::so(4, form()).unwrap(),
        builders::so(5, form()).unwrap(),
        su2(),
        builders::su(3, form()).unwrap(),
        builders::u(2, form()).unwrap(),
        builders::torus(3, form()).unwrap(),
        builders::product(vec![su2(), builders::torus(1, form()).unwrap()], form()).unwrap(),
    ]
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal) * scale)
}

fn element(g: &LieGroup, c: DVector<f64>) -> AlgebraElement {
    AlgebraElement::new(g.algebra().clone(), c).unwrap()
}

fn combo(rng: &mut ChaCha8Rng, basis: &[DVector<f64>], d: usize) -> DVector<f64> {
    basis.iter().fold(DVector::zeros(d), |acc, b| acc + b * rng.sample::<f64, _>(StandardNormal))
}

/// Smooth path with a few random cosine and sine modes.
fn smooth_path(g: &LieGroup, n: usize, rng: &mut ChaCha8Rng, amp: f64) -> DiscretePath {
    let d = g.dim();
    let c: Vec<DVector<f64>> = (0..4).map(|_| gaussian(rng, d, amp)).collect();
    DiscretePath::from_fn(g.algebra().clone(), n, |t| {
        &c[0] + &c[1] * (2.0 * PI * t).cos() + &c[2] * (PI * t).sin() + &c[3] * t * t
    })
    .unwrap()
}

fn smooth_gauge(g: &LieGroup, n: usize, rng: &mut ChaCha8Rng, amp: f64) -> GaugePath {
    let d = g.dim();
    let c: Vec<DVector<f64>> = (0..3).map(|_| gaussian(rng, d, amp)).collect();
    GaugePath::pointwise_exp(g, n, |t| &c[0] * t + &c[1] * (PI * t).sin() + &c[2] * (3.0 * t).cos()).unwrap()
}

/// Orbits of shipped subgroups, at the identity and at a random point.
fn orbit_examples(rng: &mut ChaCha8Rng) -> Vec<NSpec> {
    let s = su2();
    let o = so3();
    let hs = vec![
        HSpec::diagonal(s.clone()).unwrap(),
        HSpec::product(s.clone(), &[], &[linalg::unit(3, 2)]).unwrap(),
        HSpec::product(o.clone(), &[linalg::unit(3, 0)], &[linalg::unit(3, 2)]).unwrap(),
        HSpec::twisted_diagonal(s.clone(), AutomorphismSpec::complex_conjugation(&s).unwrap()).unwrap(),
        HSpec::diagonal(o.clone()).unwrap(),
    ];
    let mut out = Vec::new();
    for h in hs {
        let a = exp_map(&element(h.group(), gaussian(rng, 3, 0.6)));
        out.push(NSpec::base_orbit(&h, &h.group().identity()).unwrap());
        out.push(NSpec::base_orbit(&h, &a).unwrap());
    }
    out
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

// ---------------------------------------------------------------- lie kernel

#[test]
fn structure_identities_hold_for_every_builder() {
    for g in groups() {
        let alg = g.algebra();
        assert!(alg.jacobi_defect() <= 1e-12, "{} jacobi {:e}", g.name(), alg.jacobi_defect());
        assert!(alg.ad_invariance_defect() <= 1e-12, "{} ad {:e}", g.name(), alg.ad_invariance_defect());
        let split = split_center(alg).unwrap();
        assert_eq!(split.center.len() + split.semisimple.len(), alg.dim());
        for c in &split.center {
            for i in 0..alg.dim() {
                let b = alg.bracket_coeffs(&linalg::unit(alg.dim(), i), c);
                assert!(b.norm() <= 1e-10, "{}: center does not commute", g.name());
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn exp_is_a_homomorphism_on_commuting_pairs(seed in any::<u64>(), which in 0usize..8, s in -2.0f64..2.0) {
        let g = &groups()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = g.dim();
        let x = gaussian(&mut rng, d, 0.8);
        let center = split_center(g.algebra()).unwrap().center;
        let y = &x * s + combo(&mut rng, &center, d);
        let (ex, ey) = (element(g, x), element(g, y));
        let lhs = exp_map(&ex.add(&ey).unwrap());
        let rhs = exp_map(&ex).mul(&exp_map(&ey));
        prop_assert!(bracket(&ex, &ey).unwrap().norm() < 1e-12);
        prop_assert!((lhs.matrix - rhs.matrix).amax() <= 1e-10);
    }

    #[test]
    fn adjoint_preserves_brackets(seed in any::<u64>(), which in 0usize..8) {
        let g = &groups()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = g.dim();
        let a = exp_map(&element(g, gaussian(&mut rng, d, 1.5)));
        let x = element(g, gaussian(&mut rng, d, 1.0));
        let y = element(g, gaussian(&mut rng, d, 1.0));
        let lhs = adjoint(&a, &bracket(&x, &y).unwrap()).unwrap();
        let rhs = bracket(&adjoint(&a, &x).unwrap(), &adjoint(&a, &y).unwrap()).unwrap();
        prop_assert!((lhs.coeffs() - rhs.coeffs()).amax() <= 1e-10);
        prop_assert!(g.membership_defect(&a.matrix) <= 1e-10);
    }
}

// ---------------------------------------------------------------- path space

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn development_is_fourth_order(c in prop::collection::vec(-2.0f64..2.0, 6)) {
        let g = su2();
        let alg = g.algebra().clone();
        let u = |t: f64| DVector::from_vec(vec![
            2.0 + c[0] * (2.0 * t).cos(),
            c[1] * t * t + c[2],
            c[3] * (3.0 * t).sin() + c[4] * t + c[5],
        ]);
        let reference = develop_smooth(&alg, 4096, u).unwrap().pop().unwrap();
        let errs: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| (develop_smooth(&alg, n, u).unwrap().pop().unwrap() - &reference).norm())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            prop_assert!((12.0..20.0).contains(&ratio), "{:?}", errs);
        }
    }

    #[test]
    fn gauge_action_composes_and_pushforward_is_isometric(seed in any::<u64>(), ortho in any::<bool>()) {
        let g = if ortho { so3() } else { su2() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 128;
        let a = smooth_gauge(&g, n, &mut rng, 0.8);
        let b = smooth_gauge(&g, n, &mut rng, 0.8);
        let u = smooth_path(&g, n, &mut rng, 0.5);
        let lhs = gauge_act(&a.mul(&b).unwrap(), &u).unwrap();
        let rhs = gauge_act(&a, &gauge_act(&b, &u).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);

        let x = smooth_path(&g, n, &mut rng, 1.0);
        let y = smooth_path(&g, n, &mut rng, 1.0);
        let (px, py) = (gauge_push_tangent(&a, &x).unwrap(), gauge_push_tangent(&a, &y).unwrap());
        let before = l2_inner(&x, &y).unwrap();
        prop_assert!((l2_inner(&px, &py).unwrap() - before).abs() <= 1e-12 * (1.0 + before.abs()));
    }

    #[test]
    fn phi_is_equivariant_at_fine_grids(seed in any::<u64>(), ortho in any::<bool>()) {
        let g = if ortho { so3() } else { su2() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1024;
        let a = smooth_gauge(&g, n, &mut rng, 1.0);
        let u = smooth_path(&g, n, &mut rng, 1.0);
        let lhs = phi(&gauge_act(&a, &u).unwrap()).unwrap();
        let rhs = a.start().mul(&phi(&u).unwrap()).mul(&a.end().inverse());
        prop_assert!(lhs.distance_to(&rhs) <= 1e-8);
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn canonical_reflection_is_an_exact_involutive_isometry(seed in any::<u64>(), log_n in 1u32..8) {
        let g = su2();
        let n = 1usize << log_n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n * 3).map(|_| rng.sample(StandardNormal)).collect();
        let u = DiscretePath::new(g.algebra().clone(), n, values).unwrap();
        let r = canonical_reflection(&u);
        prop_assert_eq!(r.norm(), u.norm());
        prop_assert_eq!(canonical_reflection(&r), u);
    }

    #[test]
    fn fixed_paths_of_the_reflection_have_trivial_endpoint(seed in any::<u64>(), log_n in 4u32..10, amp in 0.01f64..1.5) {
        let g = so3();
        let n = 1usize << log_n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half: Vec<DVector<f64>> = (0..n / 2).map(|_| gaussian(&mut rng, 3, amp)).collect();
        let mut values = Vec::with_capacity(n * 3);
        for v in &half {
            values.extend(v.iter());
        }
        for v in half.iter().rev() {
            values.extend(v.iter().map(|c| -c));
        }
        let u = DiscretePath::new(g.algebra().clone(), n, values).unwrap();
        prop_assert_eq!(canonical_reflection(&u), u.clone());
        prop_assert!(u.mean().amax() <= 1e-12);
        prop_assert!(phi(&u).unwrap().distance_to(&g.identity()) <= 1e-8);
    }
}

// ---------------------------------------------------------------- base geometry

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn sff_is_symmetric_and_compatible_with_the_shape_operator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ns in orbit_examples(&mut rng) {
            let orbit = ns.orbit();
            if orbit.tangent().is_empty() || orbit.normal().is_empty() {
                continue;
            }
            let d = orbit.group().dim();
            let v = combo(&mut rng, orbit.tangent(), d);
            let w = combo(&mut rng, orbit.tangent(), d);
            let xi = combo(&mut rng, orbit.normal(), d);
            let s = orbit.sff(&v, &w).unwrap();
            prop_assert!((&s - orbit.sff(&w, &v).unwrap()).amax() <= 1e-12);
            prop_assert!((&s - orbit.sff_alternative(&v, &w).unwrap()).amax() <= 1e-12);
            let av = orbit.apply_shape(&xi, &v);
            let aw = orbit.apply_shape(&xi, &w);
            prop_assert!((av.dot(&w) - v.dot(&aw)).abs() <= 1e-10);
            prop_assert!((av.dot(&w) - s.dot(&xi)).abs() <= 1e-10, "{} {:e} {:e}", ns.label(), av.dot(&w), s.dot(&xi));
        }
    }
}

#[test]
fn base_sff_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for ns in orbit_examples(&mut rng) {
        let orbit = ns.orbit();
        if orbit.tangent().is_empty() || orbit.normal().is_empty() {
            continue;
        }
        let d = orbit.group().dim();
        for _ in 0..5 {
            let v = combo(&mut rng, orbit.tangent(), d).normalize();
            let w = combo(&mut rng, orbit.tangent(), d).normalize();
            let dev = (orbit.sff(&v, &w).unwrap() - fd_sff_base(orbit, &v, &w).unwrap()).amax();
            assert!(dev <= 1e-5, "{}: {dev:e}", ns.label());
        }
    }
}

#[test]
fn involutive_twisted_diagonals_are_totally_geodesic() {
    let s = su2();
    let o = so3();
    let flip = exp_map(&element(&o, linalg::unit(3, 2) * PI * std::f64::consts::SQRT_2));
    let sigmas = vec![
        (s.clone(), AutomorphismSpec::complex_conjugation(&s).unwrap()),
        (o.clone(), AutomorphismSpec::conjugation(&o, &flip).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (g, sigma) in sigmas {
        assert!(sigma.involution_defect() <= 1e-12, "{}", sigma.involution_defect());
        let orbit = OrbitGeometry::new(HSpec::twisted_diagonal(g.clone(), sigma).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let v = combo(&mut rng, orbit.tangent(), g.dim());
            let w = combo(&mut rng, orbit.tangent(), g.dim());
            worst = worst.max(orbit.sff(&v, &w).unwrap().norm());
        }
        assert!(worst <= 1e-9, "{}: {worst:e}", g.name());
    }
}

// ---------------------------------------------------------------- pf geometry

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn assembled_operators_are_symmetric_and_match_the_sff(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ns in orbit_examples(&mut rng) {
            if ns.normal().is_empty() {
                continue;
            }
            let alg = ns.group().algebra().clone();
            let basis = Arc::new(TangentBasis::new(alg.clone(), ns.tangent(), 4, 64).unwrap());
            let xi = AlgebraElement::new(alg, combo(&mut rng, ns.normal(), ns.group().dim())).unwrap();
            let op = shape_preimage(&ns, &xi, &basis).unwrap();
            prop_assert!(op.symmetry_defect <= 1e-10);
            for _ in 0..4 {
                let (i, j) = (rng.gen_range(0..basis.dim()), rng.gen_range(0..basis.dim()));
                let s = sff_preimage(&ns, &basis.vector(i), &basis.vector(j)).unwrap();
                prop_assert!((s.dot(xi.coeffs()) - op.entries[(i, j)]).abs() <= 1e-8);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn fiber_images_have_zero_mean(seed in any::<u64>(), ortho in any::<bool>(), log_n in 3u32..9) {
        let g = if ortho { so3() } else { su2() };
        let n = 1usize << log_n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = gaussian(&mut rng, 3, 1.0);
        let x: Vec<f64> = (0..n * 3).map(|_| rng.sample(StandardNormal)).collect();
        let img = DiscretePath::new(g.algebra().clone(), n, fiber_image(g.algebra(), &xi, &x, n)).unwrap();
        prop_assert!(img.mean().amax() <= 1e-14 * (1.0 + xi.norm()) * n as f64);
    }
}

fn fiber_eigs(g: &LieGroup, modes: usize, n: usize) -> Vec<f64> {
    let xi = AlgebraElement::basis_vector(g.algebra().clone(), 2);
    let op = shape_fiber(&xi, &Arc::new(fiber_basis(g.algebra().clone(), modes, n).unwrap())).unwrap();
    spectrum_and_traces(&op).unwrap().eigenvalues
}

/// Largest distance from an eigenvalue at `M` to the nearest one at `2M`.
fn subset_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().map(|x| b.iter().map(|y| (x - y).abs()).fold(f64::MAX, f64::min)).fold(0.0, f64::max)
}

#[test]
#[ignore = "not attained: the deviation is about 4e-5 for the leading eigenvalues and 6e-4 overall at M = 16, n = 256..1024"]
fn truncated_fiber_spectrum_is_a_subset_of_the_refined_one() {
    for g in [su2(), so3()] {
        let dev = subset_deviation(&fiber_eigs(&g, 16, 512), &fiber_eigs(&g, 32, 512));
        assert!(dev <= 1e-6, "{}: {dev:e}", g.name());
    }
}

#[test]
fn truncated_fiber_spectrum_interlaces_the_refined_one() {
    // nested bases: the M-mode operator is a compression of the 2M-mode one
    for g in [su2(), so3()] {
        for m in [8, 16, 32] {
            let a = fiber_eigs(&g, m, 512);
            let b = fiber_eigs(&g, 2 * m, 512);
            for (k, v) in a.iter().enumerate() {
                assert!(*v <= b[k] + 1e-12, "{} M={m}: top {k}", g.name());
                assert!(a[a.len() - 1 - k] >= b[b.len() - 1 - k] - 1e-12, "{} M={m}: bottom {k}", g.name());
            }
        }
    }
}

#[test]
fn trace_regularizations_agree_within_extrapolation_uncertainty() {
    let g = su2();
    let diag = HSpec::diagonal(g.clone()).unwrap();
    let e3 = AlgebraElement::basis_vector(g.algebra().clone(), 2);
    for theta in [0.3f64, PI / 4.0, 1.2] {
        let ns = NSpec::base_orbit(&diag, &exp_map(&e3.scaled(2.0 * theta))).unwrap();
        let xi = AlgebraElement::new(g.algebra().clone(), ns.normal()[0].clone()).unwrap();
        let r = refined_spectrum(32, |m| {
            shape_preimage(&ns, &xi, &Arc::new(TangentBasis::new(g.algebra().clone(), ns.tangent(), m, 256)?))
        })
        .unwrap();
        let ex = r.extrapolation.unwrap();
        let ur = (ex.tr_r.estimate - ex.tr_r.values[2]).abs();
        let uz = (ex.tr_zeta.estimate - ex.tr_zeta.values[2]).abs();
        let gap = (ex.tr_r.estimate - ex.tr_zeta.estimate).abs();
        assert!(gap <= ur + uz, "theta {theta}: gap {gap:e}, uncertainty {ur:e} + {uz:e}");
    }
}

// ---------------------------------------------------------------- property suite

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn reflection_candidates_are_linear_isometries(seed in any::<u64>()) {
        let g = su2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = exp_map(&element(&g, gaussian(&mut rng, 3, 1.0)));
        let candidates = vec![
            ReflectionCandidate::canonical(g.algebra().clone()),
            ReflectionCandidate::conjugation(&g, &b).unwrap(),
            ReflectionCandidate::automorphism_lift(&g, &AutomorphismSpec::complex_conjugation(&g).unwrap()).unwrap(),
        ];
        for c in candidates {
            prop_assert!(c.isometry_defect(64, 4, seed).unwrap() <= 1e-10, "{}", c.label());
        }
    }

    #[test]
    fn reflection_of_a_gauge_orbit_point_reverses_the_gauge(seed in any::<u64>()) {
        let g = su2();
        let everything: Vec<DVector<f64>> = (0..3).map(|i| linalg::unit(3, i)).collect();
        let h = HSpec::product(g.clone(), &[], &everything).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_gauge(&h, 128, 0.7, &mut rng).unwrap();
        prop_assert!(a.start().distance_to(&g.identity()) <= 1e-12);
        let zero = DiscretePath::zeros(g.algebra().clone(), 128).unwrap();
        let rev = a.reversed();
        let lhs = canonical_reflection(&gauge_act(&a, &zero).unwrap());
        let rhs = gauge_act(&rev, &zero).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
        prop_assert_eq!(rev.start().matrix, a.end().matrix);
        prop_assert_eq!(rev.end().matrix, a.start().matrix);
    }
}

fn shipped_configs() -> Vec<ExperimentConfig> {
    entries().iter().filter(|e| e.builtin.is_none()).map(|e| e.config()).collect()
}

#[test]
fn canonical_reflection_holds_exactly_when_h_is_inverse_closed() {
    let opts = MembershipOptions { tol: 1e-8, ..MembershipOptions::default() };
    let mut seen = 0;
    for config in shipped_configs() {
        let Some(h) = Context::build(&config).unwrap().h else { continue };
        let orbit = OrbitGeometry::new(h.clone()).unwrap();
        let Some(xi) = orbit.normal().first() else { continue };
        let alg = h.group().algebra().clone();
        let u = DiscretePath::zeros(alg.clone(), 128).unwrap();
        let x = DiscretePath::constant(&AlgebraElement::new(alg.clone(), xi.clone()).unwrap(), 128).unwrap();
        let r = ReflectionCandidate::canonical(alg);
        let reflection = verify_reflection(&r, &h, &u, &x, 12, &opts, 5).unwrap();
        let closed = check_inverse_closed(&h, 12, &opts, 5);
        assert_ne!(closed.verdict, Verdict::Inconclusive, "{}", h.label());
        assert_eq!(reflection.verdict, closed.verdict, "{}", h.label());
        seen += 1;
    }
    assert!(seen >= 4);
}

#[test]
fn totally_geodesic_preimages_are_austere() {
    let opts = MembershipOptions { tol: 1e-8, ..MembershipOptions::default() };
    let mut seen = 0;
    for config in shipped_configs() {
        if config.pipeline != Pipeline::TotallyGeodesic {
            continue;
        }
        let Some(ns) = Context::build(&config).unwrap().n_spec else { continue };
        let tg = classify_totally_geodesic(&ns, 8, &opts, 1).unwrap();
        if tg.verdict != Verdict::Holds {
            continue;
        }
        let alg = ns.group().algebra().clone();
        for xi in ns.normal() {
            let xi = AlgebraElement::new(alg.clone(), xi.clone()).unwrap();
            let spectrum = refined_spectrum(16, |m| {
                shape_preimage(&ns, &xi, &Arc::new(TangentBasis::new(alg.clone(), ns.tangent(), m, 256)?))
            })
            .unwrap();
            assert_eq!(check_austere(&spectrum, 1e-6).verdict, Verdict::Holds, "{}", ns.label());
            seen += 1;
        }
    }
    assert!(seen >= 1);
}
