//! Verdict engines: austerity, totally geodesic preimages, inverse-closed
//! orbits and the minimality comparison between `N` and `Phi^{-1}(N)`.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::base::hspec::HSpec;
use crate::base::membership::{Membership, MembershipOptions};
use crate::base::orbit::{NSpec, NormalVector};
use crate::error::Result;
use crate::lie::algebra::{split_center, AlgebraElement};
use crate::lie::group::GroupElement;
use crate::linalg;
use crate::path::homogeneous::HomogeneousSetup;
use crate::pf::basis::TangentBasis;
use crate::pf::operator::shape_preimage;
use crate::pf::spectrum::{refined_spectrum, Richardson, SpectrumReport};
use crate::verdict::reflection::orbit_evidence;
use crate::verdict::{Evidence, Outcome, VerdictReport};

/// Tolerance for exact algebraic conditions (closure, containment, witnesses).
pub const ALGEBRAIC_TOL: f64 = 1e-8;
/// Base mean curvature below this counts as minimal.
pub const MEAN_CURVATURE_TOL: f64 = 1e-6;
/// Extrapolated regularized traces below this count as zero.
pub const TRACE_TOL: f64 = 1e-3;

/// Spectrum symmetric under `lambda -> -lambda`, with a defect that does not
/// grow under mode refinement (when the report carries refinement data).
pub fn check_austere(report: &SpectrumReport, tol: f64) -> VerdictReport {
    let mut evidence = vec![Evidence::at_most("symmetry_defect", report.symmetry_defect, tol)];
    if let Some(ex) = &report.extrapolation {
        let [_, at_m, at_2m] = ex.symmetry_defect;
        evidence.push(Evidence::at_most("refinement_growth", (at_2m - at_m).max(0.0), tol));
    }
    VerdictReport::from_evidence("austere", evidence, "eigenvalues with multiplicities invariant under multiplication by -1")
}

/// Is `Phi^{-1}(N)` totally geodesic? Holds iff `N` is a subgroup containing
/// `G^ss`; also reports the direct witness `max |[x, xi]| / sqrt(12)` over a basis
/// of `g` and of the normal space, the size of the sff on `(t - 1/2) x` directions.
pub fn classify_totally_geodesic(
    n_spec: &NSpec,
    samples: usize,
    opts: &MembershipOptions,
    seed: u64,
) -> Result<VerdictReport> {
    let group = n_spec.group();
    let alg = group.algebra();
    let d = alg.dim();
    let tangent = n_spec.tangent();

    let mut closure = 0.0f64;
    for x in tangent {
        for y in tangent {
            let b = alg.bracket_coeffs(x, y);
            closure = closure.max((&b - linalg::project(&b, tangent)).norm());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<GroupElement> = (0..samples)
        .map(|_| {
            let v = tangent.iter().fold(DVector::zeros(d), |acc, t| acc + t * rng.sample::<f64, _>(StandardNormal));
            GroupElement::from_matrix_unchecked(linalg::expm(&alg.matrix_of(v.as_slice())))
        })
        .collect();
    let h = n_spec.orbit().h();
    let e = group.identity();
    let results: Vec<Membership> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| h.membership(&e, p, &MembershipOptions { seed: opts.seed.wrapping_add(i as u64), ..*opts }))
        .collect();

    let semisimple = split_center(alg)?.semisimple_defect_in(tangent);

    let mut witness = 0.0f64;
    for a in 0..d {
        let x = linalg::unit(d, a);
        for xi in n_spec.normal() {
            witness = witness.max(alg.bracket_coeffs(&x, xi).norm());
        }
    }
    witness /= 12f64.sqrt();

    let mut evidence = vec![
        Evidence::at_most("subgroup_closure", closure, ALGEBRAIC_TOL),
        Evidence::at_most("semisimple_in_tangent", semisimple, ALGEBRAIC_TOL),
        Evidence::at_most("sff_witness", witness, ALGEBRAIC_TOL),
    ];
    if !results.is_empty() {
        evidence.push(orbit_evidence("exp_tangent_in_n", &results, opts.tol));
    }
    Ok(VerdictReport::from_evidence(
        "totally_geodesic",
        evidence,
        "Phi^{-1}(N) totally geodesic iff N is a closed subgroup containing G^ss",
    ))
}

/// Is the fiber `Phi_K^{-1}(eK)` totally geodesic, i.e. `g^ss` inside `k`?
pub fn classify_fiber_tg(setup: &HomogeneousSetup) -> Result<VerdictReport> {
    let defect = split_center(setup.group().algebra())?.semisimple_defect_in(setup.k_basis());
    Ok(VerdictReport::from_evidence(
        "fiber_totally_geodesic",
        vec![Evidence::at_most("semisimple_in_k", defect, ALGEBRAIC_TOL)],
        "fibers of Phi_K totally geodesic iff g^ss is contained in k",
    ))
}

/// `(H . e)^{-1} = H . e`, tested on `samples` random points `b1 b2^{-1}`.
pub fn check_inverse_closed(h: &HSpec, samples: usize, opts: &MembershipOptions, seed: u64) -> VerdictReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<GroupElement> = (0..samples)
        .map(|_| {
            let (b1, b2) = h.sample(&mut rng, 1.0);
            b1.mul(&b2.inverse())
        })
        .collect();
    let e = h.group().identity();
    let results: Vec<Membership> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            h.membership(&e, &p.inverse(), &MembershipOptions { seed: opts.seed.wrapping_add(i as u64), ..*opts })
        })
        .collect();
    VerdictReport::from_evidence(
        "inverse_closed",
        vec![orbit_evidence("inverse_in_orbit", &results, opts.tol)],
        "p in H . e implies p^{-1} in H . e",
    )
}

fn trace_evidence(check: String, r: &Richardson) -> Evidence {
    let mut ev = Evidence::at_most(check, r.estimate.abs(), TRACE_TOL);
    if r.low_confidence {
        ev.outcome = Outcome::Inconclusive;
    }
    ev
}

/// Per direction: base mean curvature next to the extrapolated `tr_r` and
/// `tr_zeta` of the preimage shape operator (`modes/2, modes, 2 modes` on `n` points).
/// Holds iff all of them vanish.
pub fn check_minimality(
    n_spec: &NSpec,
    directions: &[NormalVector],
    modes: usize,
    n: usize,
) -> Result<(VerdictReport, Vec<SpectrumReport>)> {
    let alg = n_spec.group().algebra().clone();
    let mut evidence = Vec::new();
    let mut spectra = Vec::with_capacity(directions.len());
    for (i, dir) in directions.iter().enumerate() {
        let h = n_spec.orbit().mean_curvature(&dir.xi)?;
        let xi = AlgebraElement::new(alg.clone(), dir.xi.clone())?;
        let report = refined_spectrum(modes, |m| {
            let basis = Arc::new(TangentBasis::new(alg.clone(), n_spec.tangent(), m, n)?);
            shape_preimage(n_spec, &xi, &basis)
        })?;
        let ex = report.extrapolation.as_ref().expect("refined report carries extrapolation");
        evidence.push(Evidence::at_most(format!("direction_{i}.mean_curvature"), h.abs(), MEAN_CURVATURE_TOL));
        evidence.push(trace_evidence(format!("direction_{i}.tr_r"), &ex.tr_r));
        evidence.push(trace_evidence(format!("direction_{i}.tr_zeta"), &ex.tr_zeta));
        spectra.push(report);
    }
    Ok((
        VerdictReport::from_evidence(
            "minimal",
            evidence,
            "N minimal iff Phi^{-1}(N) is r-minimal iff Phi^{-1}(N) is zeta-minimal",
        ),
        spectra,
    ))
}
