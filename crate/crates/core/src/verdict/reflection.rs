//! Candidate reflections of path-space orbits and their verification.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::hspec::HSpec;
use crate::base::membership::{Membership, MembershipOptions};
use crate::base::orbit::OrbitGeometry;
use crate::error::{Error, Result};
use crate::lie::algebra::{check_same, LieAlgebra};
use crate::lie::automorphism::{AutomorphismDesc, AutomorphismSpec};
use crate::lie::group::{GroupElement, LieGroup};
use crate::linalg;
use crate::path::develop::{phi, phi_differential};
use crate::path::discrete::{canonical_reflection, l2_inner, DiscretePath};
use crate::path::gauge::{gauge_act, GaugePath};
use crate::path::homogeneous::HomogeneousSetup;
use crate::verdict::{Evidence, VerdictReport};

/// Tolerance for the point, normal and isometry checks.
pub const REFLECTION_TOL: f64 = 1e-8;
/// Tolerance for linearity, orthogonality and involutivity of a candidate.
pub const ISOMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionKind {
    /// `u -> -u(1 - t)`.
    Canonical,
    /// `u -> b u b^{-1}`.
    Conjugation,
    /// `u -> d nu . u`.
    AutomorphismLift,
    /// `u -> d nu . u` with `nu = Ad_c . theta . Ad_c^{-1}` from a symmetric pair.
    SymmetricSpaceLift,
}

/// JSON form of a reflection candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReflectionSpec {
    Canonical,
    Conjugation { log: Vec<f64> },
    AutomorphismLift { automorphism: AutomorphismDesc },
    SymmetricSpaceLift {
        /// Point `c = exp(sum point_log[i] e_i)`; identity when absent.
        #[serde(default)]
        point_log: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct ReflectionCandidate {
    kind: ReflectionKind,
    label: String,
    algebra: Arc<LieAlgebra>,
    /// Pointwise linear map on coefficients; `None` for the canonical reflection.
    pointwise: Option<DMatrix<f64>>,
    involutive: bool,
}

impl ReflectionCandidate {
    pub fn canonical(algebra: Arc<LieAlgebra>) -> Self {
        Self {
            kind: ReflectionKind::Canonical,
            label: "canonical reflection".into(),
            algebra,
            pointwise: None,
            involutive: true,
        }
    }

    pub fn conjugation(group: &LieGroup, b: &GroupElement) -> Result<Self> {
        let nu = AutomorphismSpec::conjugation(group, b)?;
        Self::from_automorphism(group, ReflectionKind::Conjugation, "constant conjugation", &nu)
    }

    pub fn automorphism_lift(group: &LieGroup, nu: &AutomorphismSpec) -> Result<Self> {
        Self::from_automorphism(group, ReflectionKind::AutomorphismLift, "automorphism lift", nu)
    }

    /// Lift of `Ad_c . theta . Ad_c^{-1}` for the declared involution `theta` of `setup`.
    ///
    /// Refuses unless an involution is declared and the form is a negative
    /// multiple of the Killing form; checks `nu(c K c^{-1}) = c K c^{-1}` on samples.
    pub fn symmetric_space_lift(
        setup: &HomogeneousSetup,
        c: &GroupElement,
        samples: usize,
        opts: &MembershipOptions,
    ) -> Result<Self> {
        let group = setup.group();
        let theta = setup
            .involution()
            .ok_or_else(|| Error::Hypothesis("no involution declared for the homogeneous space".into()))?;
        if !group.algebra().is_negative_killing_multiple(1e-8) {
            return Err(Error::Hypothesis("metric is not a negative multiple of the Killing form".into()));
        }
        let defect = group.membership_defect(&c.matrix);
        if defect > 1e-10 {
            return Err(Error::NotInGroup { defect });
        }
        let q = &c.matrix * theta.ambient_matrix() * c.matrix.transpose();
        let nu = AutomorphismSpec::ambient(group, "symmetric-space lift", q)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let alg = group.algebra();
        for _ in 0..samples {
            let mut z = DVector::zeros(group.dim());
            for k in setup.k_basis() {
                z.axpy(rng.sample::<f64, _>(StandardNormal), k, 1.0);
            }
            let k = GroupElement::from_matrix_unchecked(linalg::expm(&alg.matrix_of(z.as_slice())));
            let moved = c.inverse().mul(&nu.apply(&c.mul(&k).mul(&c.inverse()))).mul(c);
            match setup.k_membership(&moved, opts) {
                Membership::Member { .. } => {}
                m => {
                    return Err(Error::Hypothesis(format!(
                        "lifted involution does not preserve K (distance {:.3e})",
                        m.distance()
                    )))
                }
            }
        }
        Self::from_automorphism(group, ReflectionKind::SymmetricSpaceLift, "symmetric-space lift", &nu)
    }

    fn from_automorphism(group: &LieGroup, kind: ReflectionKind, label: &str, nu: &AutomorphismSpec) -> Result<Self> {
        let alg = group.algebra();
        let bracket = nu.bracket_defect(alg);
        if bracket > ISOMETRY_TOL {
            return Err(Error::InvalidSpec(format!("map is not a Lie algebra automorphism (defect {bracket:.3e})")));
        }
        let iso = nu.isometry_defect();
        if iso > ISOMETRY_TOL {
            return Err(Error::InvalidSpec(format!("map is not an isometry (defect {iso:.3e})")));
        }
        Ok(Self {
            kind,
            label: label.to_string(),
            algebra: alg.clone(),
            pointwise: Some(nu.differential().clone()),
            involutive: nu.involution_defect() <= ISOMETRY_TOL,
        })
    }

    pub fn kind(&self) -> ReflectionKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn pointwise(&self) -> Option<&DMatrix<f64>> {
        self.pointwise.as_ref()
    }

    pub fn is_involutive(&self) -> bool {
        self.involutive
    }

    pub fn apply(&self, u: &DiscretePath) -> Result<DiscretePath> {
        check_same(u.algebra(), &self.algebra)?;
        let Some(p) = &self.pointwise else {
            return Ok(canonical_reflection(u));
        };
        let d = u.dim();
        let mut values = Vec::with_capacity(u.values().len());
        for i in 0..u.n() {
            let v = p * DVector::from_column_slice(u.value(i));
            values.extend(v.iter().take(d));
        }
        Ok(u.with_values(values))
    }

    /// Worst defect of linearity and of `<c u, c v> = <u, v>` on random paths.
    pub fn isometry_defect(&self, n: usize, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let u = random_path(&self.algebra, n, &mut rng)?;
            let v = random_path(&self.algebra, n, &mut rng)?;
            let s: f64 = rng.sample(StandardNormal);
            let (cu, cv) = (self.apply(&u)?, self.apply(&v)?);
            let lin = self.apply(&u.add(&v.scaled(s))?)?.sub(&cu.add(&cv.scaled(s))?)?.norm();
            let iso = (l2_inner(&cu, &cv)? - l2_inner(&u, &v)?).abs();
            worst = worst.max(lin).max(iso);
        }
        Ok(worst)
    }

    /// Worst `|c(c(u)) - u|` on random paths.
    pub fn involution_defect(&self, n: usize, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let u = random_path(&self.algebra, n, &mut rng)?;
            worst = worst.max(self.apply(&self.apply(&u)?)?.sub(&u)?.norm());
        }
        Ok(worst)
    }
}

fn random_path<R: Rng>(alg: &Arc<LieAlgebra>, n: usize, rng: &mut R) -> Result<DiscretePath> {
    let values = (0..n * alg.dim()).map(|_| rng.sample(StandardNormal)).collect();
    DiscretePath::new(alg.clone(), n, values)
}

fn element_from_log(group: &LieGroup, log: &[f64]) -> Result<GroupElement> {
    if log.len() != group.dim() {
        return Err(Error::Schema(format!("expected {} coefficients, got {}", group.dim(), log.len())));
    }
    Ok(GroupElement::from_matrix_unchecked(linalg::expm(&group.algebra().matrix_of(log))))
}

/// Build a candidate from its JSON form. The symmetric-space lift needs `setup`.
pub fn build_reflection(
    spec: &ReflectionSpec,
    group: &LieGroup,
    setup: Option<&HomogeneousSetup>,
    opts: &MembershipOptions,
) -> Result<ReflectionCandidate> {
    match spec {
        ReflectionSpec::Canonical => Ok(ReflectionCandidate::canonical(group.algebra().clone())),
        ReflectionSpec::Conjugation { log } => ReflectionCandidate::conjugation(group, &element_from_log(group, log)?),
        ReflectionSpec::AutomorphismLift { automorphism } => {
            ReflectionCandidate::automorphism_lift(group, &automorphism.build(group)?)
        }
        ReflectionSpec::SymmetricSpaceLift { point_log } => {
            let setup = setup.ok_or_else(|| Error::Hypothesis("symmetric-space lift needs a symmetric pair".into()))?;
            let c = match point_log {
                Some(log) => element_from_log(group, log)?,
                None => group.identity(),
            };
            ReflectionCandidate::symmetric_space_lift(setup, &c, 8, opts)
        }
    }
}

/// Random element of `P(G, H)`: `g = exp(Z)` with `Z` a smooth path whose
/// endpoints `(Z(0), Z(1))` lie in `h`.
pub fn random_gauge<R: Rng>(h: &HSpec, n: usize, scale: f64, rng: &mut R) -> Result<GaugePath> {
    let d = h.group().dim();
    let (x, y) = h.random_pair(rng, scale);
    let modes: Vec<DVector<f64>> = (1..=3)
        .map(|k| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal) * scale / k as f64))
        .collect();
    GaugePath::pointwise_exp(h.group(), n, |t| {
        let mut z = &x * (1.0 - t) + &y * t;
        for (k, c) in modes.iter().enumerate() {
            z.axpy((std::f64::consts::PI * (k + 1) as f64 * t).sin(), c, 1.0);
        }
        z
    })
}

/// L2 distance of `x` from the normal space of `P(G, H) * u` at `u`, which is
/// `{ n J^T zeta : zeta normal to H^a . e }` for `J` the left-trivialized
/// differential of `Phi` and `a = Phi(u)`.
fn normality_defect(h: &HSpec, u: &DiscretePath, x: &DiscretePath) -> Result<f64> {
    let a = phi(u)?;
    let orbit = OrbitGeometry::new(h.normalized(&a)?)?;
    let normal = orbit.normal();
    let vx = DVector::from_column_slice(x.values());
    let scale = 1.0f64.max(x.norm());
    if normal.is_empty() {
        return Ok(x.norm() / scale);
    }
    let j = phi_differential(u)?;
    let n = u.n() as f64;
    let mut b = DMatrix::zeros(vx.len(), normal.len());
    for (k, zeta) in normal.iter().enumerate() {
        b.set_column(k, &(j.transpose() * zeta * n));
    }
    let c = linalg::pseudo_inverse(&b) * &vx;
    let residual = x.with_values((vx - b * c).iter().copied().collect());
    Ok(residual.norm() / scale)
}

/// Three-check verification that `c` is a reflection of `P(G, H) * u` at `u`
/// in the normal direction `x`: it fixes `u`, negates `x` and maps the orbit
/// into itself (tested on `samples` random gauge elements through `Phi`).
pub fn verify_reflection(
    c: &ReflectionCandidate,
    h: &HSpec,
    u: &DiscretePath,
    x: &DiscretePath,
    samples: usize,
    opts: &MembershipOptions,
    seed: u64,
) -> Result<VerdictReport> {
    check_same(u.algebra(), h.group().algebra())?;
    let normal = normality_defect(h, u, x)?;
    if normal > REFLECTION_TOL {
        return Err(Error::NotNormal { defect: normal });
    }
    let mut evidence = vec![
        Evidence::at_most("fixes_point", c.apply(u)?.sub(u)?.norm(), REFLECTION_TOL),
        Evidence::at_most("negates_normal", c.apply(x)?.add(x)?.norm(), REFLECTION_TOL),
        Evidence::at_most("isometry", c.isometry_defect(u.n(), 4, seed)?, ISOMETRY_TOL),
    ];
    let a = phi(u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauges: Vec<GaugePath> = (0..samples).map(|_| random_gauge(h, u.n(), 0.5, &mut rng)).collect::<Result<_>>()?;
    let results: Vec<Membership> = gauges
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let moved = c.apply(&gauge_act(g, u)?)?;
            let o = MembershipOptions { seed: opts.seed.wrapping_add(i as u64), ..*opts };
            Ok(h.membership(&a, &phi(&moved)?, &o))
        })
        .collect::<Result<_>>()?;
    evidence.push(orbit_evidence("preserves_orbit", &results, opts.tol));
    Ok(VerdictReport::from_evidence(
        "weakly_reflective",
        evidence,
        "c(u) = u, dc(X) = -X and Phi(c(g * u)) in H . Phi(u) for sampled g in P(G, H)",
    ))
}

/// First non-member if any, else the first inconclusive, else the farthest member.
pub(crate) fn orbit_evidence(check: &str, results: &[Membership], tol: f64) -> Evidence {
    let pick = results
        .iter()
        .find(|m| matches!(m, Membership::NonMember { .. }))
        .or_else(|| results.iter().find(|m| matches!(m, Membership::Inconclusive { .. })))
        .copied()
        .unwrap_or(Membership::Member {
            distance: results.iter().map(Membership::distance).fold(0.0, f64::max),
        });
    Evidence::membership(check, &pick, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::{AlgebraElement, InnerForm};
    use crate::lie::builders;
    use crate::lie::exp_map;
    use crate::verdict::Verdict;

    fn su2() -> LieGroup {
        builders::su(2, InnerForm::default()).unwrap()
    }

    #[test]
    fn canonical_negates_constant_normal() {
        let g = su2();
        let xi = AlgebraElement::basis_vector(g.algebra().clone(), 1);
        let x = DiscretePath::constant(&xi, 32).unwrap();
        let c = ReflectionCandidate::canonical(g.algebra().clone());
        assert_eq!(c.apply(&x).unwrap().add(&x).unwrap().norm(), 0.0);
        assert!(c.isometry_defect(32, 3, 1).unwrap() < 1e-12);
        assert_eq!(c.involution_defect(32, 3, 1).unwrap(), 0.0);
    }

    #[test]
    fn conjugation_is_orthogonal() {
        let g = su2();
        let b = exp_map(&AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(std::f64::consts::FRAC_PI_2));
        let c = ReflectionCandidate::conjugation(&g, &b).unwrap();
        assert!(c.isometry_defect(16, 4, 2).unwrap() < 1e-12);
        let zero = DiscretePath::zeros(g.algebra().clone(), 16).unwrap();
        assert_eq!(c.apply(&zero).unwrap().norm(), 0.0);
    }

    #[test]
    fn automorphism_lift_intertwines_gauge_action() {
        let g = su2();
        let nu = AutomorphismSpec::complex_conjugation(&g).unwrap();
        let c = ReflectionCandidate::automorphism_lift(&g, &nu).unwrap();
        assert!(c.is_involutive());
        let h = HSpec::diagonal(g.clone()).unwrap();
        let zero = DiscretePath::zeros(g.algebra().clone(), 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let gauge = random_gauge(&h, 64, 0.7, &mut rng).unwrap();
            let lhs = c.apply(&gauge_act(&gauge, &zero).unwrap()).unwrap();
            let rhs = gauge_act(&gauge.map_ambient(nu.ambient_matrix()), &zero).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn random_gauge_has_endpoints_in_h() {
        let g = su2();
        let h = HSpec::product(g.clone(), &[linalg::unit(3, 2)], &[linalg::unit(3, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gauge = random_gauge(&h, 32, 1.0, &mut rng).unwrap();
        let x = gauge.start().log(g.algebra()).unwrap();
        let y = gauge.end().log(g.algebra()).unwrap();
        assert!(h.contains_pair(x.coeffs(), y.coeffs()) < 1e-12);
    }

    #[test]
    fn canonical_reflects_fiber_and_fails_off_point() {
        let g = su2();
        let h = HSpec::product(g.clone(), &[], &[linalg::unit(3, 2)]).unwrap();
        let n = 64;
        let zero = DiscretePath::zeros(g.algebra().clone(), n).unwrap();
        let x = DiscretePath::constant(&AlgebraElement::basis_vector(g.algebra().clone(), 0), n).unwrap();
        let c = ReflectionCandidate::canonical(g.algebra().clone());
        let opts = MembershipOptions::default();
        let r = verify_reflection(&c, &h, &zero, &x, 6, &opts, 5).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");

        // shifted point: constant path along the K direction, still with a normal X
        let k = AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(0.4);
        let u = DiscretePath::constant(&k, n).unwrap();
        let j = phi_differential(&u).unwrap();
        let xn = j.transpose() * linalg::unit(3, 0) * n as f64;
        let x = u.with_values(xn.iter().copied().collect());
        let r = verify_reflection(&c, &h, &u, &x, 2, &opts, 5).unwrap();
        assert_eq!(r.evidence_for("fixes_point").unwrap().outcome, crate::verdict::Outcome::Fail);
        assert_eq!(r.verdict, Verdict::Fails);
    }

    #[test]
    fn tangent_direction_is_refused() {
        let g = su2();
        let h = HSpec::product(g.clone(), &[], &[linalg::unit(3, 2)]).unwrap();
        let zero = DiscretePath::zeros(g.algebra().clone(), 16).unwrap();
        let x = DiscretePath::constant(&AlgebraElement::basis_vector(g.algebra().clone(), 2), 16).unwrap();
        let c = ReflectionCandidate::canonical(g.algebra().clone());
        let err = verify_reflection(&c, &h, &zero, &x, 1, &MembershipOptions::default(), 0).unwrap_err();
        assert!(matches!(err, Error::NotNormal { .. }));
    }

    #[test]
    fn symmetric_space_lift_needs_declared_involution() {
        let g = su2();
        let setup = HomogeneousSetup::new(g.clone(), &[linalg::unit(3, 2)]).unwrap();
        let opts = MembershipOptions::default();
        let err = ReflectionCandidate::symmetric_space_lift(&setup, &g.identity(), 2, &opts).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
        let b = exp_map(&AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(std::f64::consts::PI));
        let theta = AutomorphismSpec::conjugation(&g, &b).unwrap();
        let setup = setup.with_involution(theta).unwrap();
        let c = ReflectionCandidate::symmetric_space_lift(&setup, &g.identity(), 4, &opts).unwrap();
        assert!(c.is_involutive());
        let spec = ReflectionSpec::SymmetricSpaceLift { point_log: None };
        assert!(build_reflection(&spec, &g, None, &opts).is_err());
    }
}
