//! Named, reproducible examples. Each entry is either an ordinary experiment
//! config or a built-in check for identities no pipeline covers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::sync::Arc;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::base::hspec::HSpec;
use crate::base::orbit::{pi_preimage_geometry, NSpec, OrbitGeometry};
use crate::error::{Error, Result};
use crate::experiment::config::{ExperimentConfig, HDesc, HomogeneousDesc, NDesc, Numeric, Pipeline};
use crate::experiment::report::ResultItem;
use crate::lie::algebra::{AlgebraElement, InnerForm};
use crate::lie::automorphism::{AutomorphismDesc, AutomorphismSpec};
use crate::lie::builders::{self, GroupSpec};
use crate::linalg;
use crate::path::develop::phi;
use crate::path::discrete::{canonical_reflection, t_mid, DiscretePath};
use crate::path::gauge::gauge_act;
use crate::pf::basis::fiber_basis;
use crate::pf::operator::{preimage_image, shape_fiber};
use crate::pf::spectrum::refined_spectrum;
use crate::verdict::reflection::{random_gauge, verify_reflection, ReflectionCandidate};
use crate::verdict::{Evidence, ReflectionSpec, Verdict, VerdictReport};

pub type Builtin = fn(&Numeric) -> Result<Vec<ResultItem>>;

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub expect: Verdict,
    make: fn() -> ExperimentConfig,
    pub builtin: Option<Builtin>,
}

impl CatalogEntry {
    /// The config echoed into reports; built-ins use `catalog:<name>` as pipeline.
    pub fn config(&self) -> ExperimentConfig {
        let mut c = (self.make)();
        c.label = Some(self.name.to_string());
        c.expect = Some(self.expect);
        c
    }
}

fn su2() -> GroupSpec {
    GroupSpec::simple("SU", 2, InnerForm::default())
}

fn so3() -> GroupSpec {
    GroupSpec::simple("SO", 3, InnerForm::default())
}

fn torus(k: usize) -> GroupSpec {
    GroupSpec::simple("T", k, InnerForm::default())
}

fn su2_u1() -> GroupSpec {
    GroupSpec {
        group: "product".into(),
        n: None,
        inner_form: InnerForm::default(),
        factors: vec![su2(), torus(1)],
        basis: None,
        name: None,
    }
}

fn e(d: usize, i: usize) -> Vec<f64> {
    linalg::unit(d, i).iter().copied().collect()
}

fn numeric(n: usize, modes: usize, samples: usize) -> Numeric {
    Numeric { n, modes, samples, ..Numeric::default() }
}

fn config(pipeline: Pipeline, group: GroupSpec) -> ExperimentConfig {
    ExperimentConfig::new(pipeline, group)
}

/// Rotation by `2 pi / 3` about `(1, 1, 1)` in so(3) coordinates.
fn order_three_log() -> Vec<f64> {
    let s = 2.0 * PI / 3.0 * (2.0f64 / 3.0).sqrt();
    vec![s, s, s]
}

fn conjugacy_class(theta: f64) -> NDesc {
    NDesc::BaseOrbit { point_log: Some(vec![0.0, 0.0, 2.0 * theta]) }
}

macro_rules! entry {
    ($name:expr, $desc:expr, $expect:ident, $make:expr) => {
        CatalogEntry { name: $name, description: $desc, expect: Verdict::$expect, make: $make, builtin: None }
    };
    ($name:expr, $desc:expr, $expect:ident, $make:expr, $builtin:expr) => {
        CatalogEntry { name: $name, description: $desc, expect: Verdict::$expect, make: $make, builtin: Some($builtin) }
    };
}

static CATALOG: &[CatalogEntry] = &[
    entry!("equivariance_su2", "Phi(g * u) = g(0) Phi(u) g(1)^{-1} for random gauge paths", Holds,
        || config(Pipeline::Catalog("equivariance_su2".into()), su2()), builtin_equivariance),
    entry!("canonical_inversion_su2", "Phi(r(u)) = Phi(u)^{-1} for the canonical reflection", Holds,
        || config(Pipeline::Catalog("canonical_inversion_su2".into()), su2()), builtin_inversion),
    entry!("canonical_involution_su2", "r(r(u)) = u bitwise on the grid", Holds,
        || config(Pipeline::Catalog("canonical_involution_su2".into()), su2()), builtin_involution),
    entry!("conlon_orbit_tg_su2", "G(sigma) . e for complex conjugation has vanishing second fundamental form", Holds,
        || config(Pipeline::Catalog("conlon_orbit_tg_su2".into()), su2()), builtin_conlon_orbit_tg),
    entry!("preimage_k_term_su2", "shape operator of pi^{-1}(N) on pure k directions is 1/2 [x, xi]^T", Holds,
        || config(Pipeline::Catalog("preimage_k_term_su2".into()), su2()), builtin_k_term),
    entry!("horizontal_image_so3", "preimage shape operator of SO(2) in SO(3) sends e3 to (t - 1/2) e2", Holds,
        || config(
            Pipeline::Catalog("horizontal_image_so3".into()),
            GroupSpec::simple("SO", 3, InnerForm::NegTrace { scale: 0.5 }),
        ), builtin_horizontal_image),
    entry!("fiber_su2", "fiber of Phi over SU(2), xi = e3: austere", Holds, || {
        let mut c = config(Pipeline::Austere, su2());
        c.normal = Some(e(3, 2));
        c.numeric = numeric(512, 64, 8);
        c
    }),
    entry!("fiber_so3", "fiber of Phi over SO(3), xi = e3: austere", Holds, || {
        let mut c = config(Pipeline::Austere, so3());
        c.normal = Some(e(3, 2));
        c.numeric = numeric(512, 64, 8);
        c
    }),
    entry!("fiber_traces_su2", "fiber of Phi over SU(2): extrapolated tr_r, tr_zeta, tr_f vanish", Holds,
        || config(Pipeline::Catalog("fiber_traces_su2".into()), su2()), builtin_fiber_traces),
    entry!("tg_whole_group_su2", "N = G in SU(2): Phi^{-1}(N) totally geodesic", Holds, || {
        let mut c = config(Pipeline::TotallyGeodesic, su2());
        c.n_spec = Some(NDesc::WholeGroup);
        c
    }),
    entry!("tg_torus_t2", "closed one-parameter subgroup of T^2: totally geodesic preimage", Holds, || {
        let mut c = config(Pipeline::TotallyGeodesic, torus(2));
        c.n_spec = Some(NDesc::Subgroup { span: vec![vec![0.6, 0.8]] });
        c
    }),
    entry!("tg_so3_so2", "SO(2) in SO(3): semisimple part not contained, not totally geodesic", Fails, || {
        let mut c = config(Pipeline::TotallyGeodesic, so3());
        c.n_spec = Some(NDesc::Subgroup { span: vec![e(3, 2)] });
        c
    }),
    entry!("fiber_tg_su2", "fibers of Phi over SU(2) are not totally geodesic", Fails, || {
        let mut c = config(Pipeline::TotallyGeodesic, su2());
        c.homogeneous = Some(HomogeneousDesc { k: vec![], involution: None });
        c
    }),
    entry!("fiber_tg_t2", "fibers of Phi over T^2 are totally geodesic", Holds, || {
        let mut c = config(Pipeline::TotallyGeodesic, torus(2));
        c.homogeneous = Some(HomogeneousDesc { k: vec![], involution: None });
        c
    }),
    entry!("fiber_tg_su2_u1", "fibers of Phi_K for SU(2) x U(1) / SU(2) are totally geodesic", Holds, || {
        let mut c = config(Pipeline::TotallyGeodesic, su2_u1());
        c.homogeneous = Some(HomogeneousDesc { k: vec![e(4, 0), e(4, 1), e(4, 2)], involution: None });
        c
    }),
    entry!("inverse_closed_subgroup_su2", "{e} x U(1) orbit through e is inverse closed", Holds, || {
        let mut c = config(Pipeline::InverseClosed, su2());
        c.h = Some(HDesc::Product { k1: vec![], k2: vec![e(3, 2)] });
        c
    }),
    entry!("inverse_closed_conlon_su2", "G(sigma) . e for complex conjugation is inverse closed", Holds, || {
        let mut c = config(Pipeline::InverseClosed, su2());
        c.h = Some(HDesc::TwistedDiagonal { sigma: AutomorphismDesc::ComplexConjugation });
        c
    }),
    entry!("inverse_closed_so3_order3", "G(sigma) . e for an order-3 rotation in SO(3) is not inverse closed", Fails, || {
        let mut c = config(Pipeline::InverseClosed, so3());
        c.h = Some(HDesc::TwistedDiagonal { sigma: AutomorphismDesc::Conjugation { log: order_three_log() } });
        c.numeric.samples = 16;
        c
    }),
    entry!("weak_fiber_su2_u1", "canonical reflection of P(G, {e} x U(1)) * 0", Holds, || {
        let mut c = config(Pipeline::Reflection, su2());
        c.h = Some(HDesc::Product { k1: vec![], k2: vec![e(3, 2)] });
        c.numeric = numeric(256, 16, 100);
        c
    }),
    entry!("conlon_su2_conj", "canonical reflection of P(G, G(sigma)) * 0 with sigma complex conjugation", Holds, || {
        let mut c = config(Pipeline::Reflection, su2());
        c.h = Some(HDesc::TwistedDiagonal { sigma: AutomorphismDesc::ComplexConjugation });
        c.numeric = numeric(256, 16, 100);
        c
    }),
    entry!("conlon_so3_order3", "canonical reflection of P(G, G(sigma)) * 0 for an order-3 rotation", Fails, || {
        let mut c = config(Pipeline::Reflection, so3());
        c.h = Some(HDesc::TwistedDiagonal { sigma: AutomorphismDesc::Conjugation { log: order_three_log() } });
        c.numeric = numeric(256, 16, 16);
        c
    }),
    entry!("automorphism_lift_su2", "lift of complex conjugation intertwines the gauge action and reflects P(G, {e} x U(1)) * 0", Holds,
        || config(Pipeline::Catalog("automorphism_lift_su2".into()), su2()), builtin_automorphism_lift),
    entry!("symmetric_lift_su2_u1", "symmetric-space lift for SU(2)/U(1) reflects P(G, U(1)' x U(1)) * 0", Holds, || {
        let mut c = config(Pipeline::Reflection, su2());
        c.h = Some(HDesc::Product { k1: vec![e(3, 0)], k2: vec![e(3, 2)] });
        c.homogeneous = Some(HomogeneousDesc {
            k: vec![e(3, 2)],
            involution: Some(AutomorphismDesc::Conjugation { log: vec![0.0, 0.0, PI] }),
        });
        c.reflection = Some(ReflectionSpec::SymmetricSpaceLift { point_log: None });
        c.numeric = numeric(256, 16, 32);
        c
    }),
    entry!("conjugacy_equator_su2", "equatorial conjugacy class of SU(2): minimal on both sides", Holds, || {
        let mut c = config(Pipeline::Minimality, su2());
        c.h = Some(HDesc::Diagonal);
        c.n_spec = Some(conjugacy_class(FRAC_PI_2));
        c.numeric = numeric(256, 32, 8);
        c
    }),
    entry!("conjugacy_sphere_su2", "conjugacy class of SU(2) at polar angle pi/3: tr_r, tr_zeta and mean curvature agree", Fails, || {
        let mut c = config(Pipeline::Minimality, su2());
        c.h = Some(HDesc::Diagonal);
        c.n_spec = Some(conjugacy_class(FRAC_PI_3));
        c.numeric = numeric(256, 32, 8);
        c
    }),
    entry!("oracle_su2_conjugacy", "sff of Phi^{-1}(N) against finite differences, SU(2) conjugacy class", Holds, || {
        let mut c = config(Pipeline::OracleCompare, su2());
        c.h = Some(HDesc::Diagonal);
        c.n_spec = Some(conjugacy_class(0.6));
        c.numeric = numeric(512, 16, 20);
        c
    }),
    entry!("oracle_so3_conjugacy", "sff of Phi^{-1}(N) against finite differences, SO(3) conjugacy class", Holds, || {
        let mut c = config(Pipeline::OracleCompare, so3());
        c.h = Some(HDesc::Diagonal);
        c.n_spec = Some(NDesc::BaseOrbit { point_log: Some(vec![0.3, -0.5, 1.1]) });
        c.numeric = numeric(512, 16, 20);
        c
    }),
];

pub fn entries() -> &'static [CatalogEntry] {
    CATALOG
}

pub fn find(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownCatalog(name.to_string()))
}

fn at_most(property: &str, check: &str, value: f64, tol: f64, provenance: &str) -> ResultItem {
    ResultItem::verdict(property, VerdictReport::from_evidence(property, vec![Evidence::at_most(check, value, tol)], provenance))
}

fn smooth_path(alg: &Arc<crate::lie::algebra::LieAlgebra>, n: usize, rng: &mut ChaCha8Rng) -> Result<DiscretePath> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let d = alg.dim();
    let c: Vec<DVector<f64>> =
        (0..3).map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))).collect();
    DiscretePath::from_fn(alg.clone(), n, |t| &c[0] + &c[1] * (PI * t).sin() + &c[2] * (2.0 * PI * t).cos())
}

fn builtin_equivariance(num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::su(2, InnerForm::default())?;
    let d = g.dim();
    let all: Vec<_> = (0..d).map(|i| linalg::unit(d, i)).collect();
    let h = HSpec::product(g.clone(), &all, &all)?;
    let mut rng = ChaCha8Rng::seed_from_u64(num.seed);
    let mut worst = 0.0f64;
    for _ in 0..num.samples {
        let gauge = random_gauge(&h, num.n, 0.7, &mut rng)?;
        let u = smooth_path(g.algebra(), num.n, &mut rng)?;
        let lhs = phi(&gauge_act(&gauge, &u)?)?;
        let rhs = gauge.start().mul(&phi(&u)?).mul(&gauge.end().inverse());
        worst = worst.max((lhs.matrix - rhs.matrix).amax());
    }
    Ok(vec![at_most("equivariance", "max_entry_defect", worst, 1e-8, "Phi(g * u) = g(0) Phi(u) g(1)^{-1}")])
}

fn builtin_inversion(num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::su(2, InnerForm::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(num.seed);
    let mut worst = 0.0f64;
    for _ in 0..num.samples {
        let u = smooth_path(g.algebra(), num.n, &mut rng)?;
        let prod = phi(&canonical_reflection(&u))?.mul(&phi(&u)?);
        worst = worst.max((prod.matrix - g.identity().matrix).amax());
    }
    Ok(vec![at_most("covers_inversion", "max_entry_defect", worst, 1e-8, "Phi(r(u)) = Phi(u)^{-1}")])
}

fn builtin_involution(num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::su(2, InnerForm::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(num.seed);
    let mut worst = 0.0f64;
    for _ in 0..num.samples {
        let u = smooth_path(g.algebra(), num.n, &mut rng)?;
        worst = worst.max(canonical_reflection(&canonical_reflection(&u)).max_abs_diff(&u)?);
    }
    Ok(vec![at_most("involution", "max_abs_defect", worst, 0.0, "r(r(u)) = u")])
}

fn builtin_conlon_orbit_tg(num: &Numeric) -> Result<Vec<ResultItem>> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let g = builders::su(2, InnerForm::default())?;
    let h = HSpec::twisted_diagonal(g.clone(), AutomorphismSpec::complex_conjugation(&g)?)?;
    let orbit = OrbitGeometry::new(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(num.seed);
    let mut random_tangent = || {
        orbit
            .tangent()
            .iter()
            .fold(DVector::zeros(3), |acc, t| acc + t * rng.sample::<f64, _>(StandardNormal))
    };
    let mut worst = 0.0f64;
    for _ in 0..num.samples {
        let (v, w) = (random_tangent(), random_tangent());
        worst = worst.max(orbit.sff(&v, &w)?.norm());
    }
    Ok(vec![at_most("totally_geodesic", "max_sff_norm", worst, 1e-8, "Cartan immersion image of an involution is totally geodesic")])
}

fn builtin_k_term(_num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::su(2, InnerForm::default())?;
    let alg = g.algebra();
    let setup = crate::path::homogeneous::HomogeneousSetup::new(g.clone(), &[linalg::unit(3, 2)])?;
    let a = crate::lie::exp_map(&AlgebraElement::new(alg.clone(), DVector::from_vec(vec![0.2, 0.5, -0.3]))?);
    let n = NSpec::coset_orbit(&setup, &[linalg::unit(3, 0)], &a)?;
    let o = n.orbit();
    let xi = n.normal_vector(n.normal()[0].clone())?;
    let t = o.tangent();
    let geo = pi_preimage_geometry(&n, &t[0], &t[1], &xi)?;
    let k = linalg::unit(3, 2);
    let want = o.project_tangent(&alg.bracket_coeffs(&k, &xi.xi)) * 0.5;
    let kc = DVector::from_fn(geo.basis.len(), |i, _| geo.basis[i].dot(&k));
    let got = geo
        .basis
        .iter()
        .zip((&geo.operator * kc).iter())
        .fold(DVector::zeros(3), |acc, (b, c)| acc + b * *c);
    Ok(vec![at_most("k_term", "defect", (got - want).norm(), 1e-10, "A(x) = 1/2 [x, xi]^T for x in k")])
}

fn builtin_horizontal_image(num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::so(3, InnerForm::NegTrace { scale: 0.5 })?;
    let e3 = linalg::unit(3, 2);
    let n_spec = NSpec::subgroup(g.clone(), std::slice::from_ref(&e3))?;
    let xi = linalg::unit(3, 0);
    let x = DiscretePath::constant(&AlgebraElement::new(g.algebra().clone(), e3)?, num.n)?;
    let img = preimage_image(n_spec.orbit(), &xi, x.values(), num.n);
    let e2 = linalg::unit(3, 1);
    let mut worst = 0.0f64;
    for i in 0..num.n {
        let want = &e2 * (t_mid(num.n, i) - 0.5);
        worst = worst.max((DVector::from_column_slice(&img[i * 3..i * 3 + 3]) - want).norm());
    }
    Ok(vec![at_most("horizontal_image", "max_defect", worst, 1e-10, "A(x) = A^N(x) + (t - 1/2)[x, xi] with A^N = 0")])
}

fn builtin_fiber_traces(num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::su(2, InnerForm::default())?;
    let alg = g.algebra().clone();
    let mut items = Vec::new();
    let mut evidence = Vec::new();
    for (a, name) in ["e1", "e2", "e3"].iter().enumerate() {
        let xi = AlgebraElement::basis_vector(alg.clone(), a);
        let report = refined_spectrum(num.modes, |m| shape_fiber(&xi, &Arc::new(fiber_basis(alg.clone(), m, num.n)?)))?;
        let ex = report.extrapolation.as_ref().expect("refined report carries extrapolation");
        evidence.push(Evidence::at_most(format!("{name}.tr_r"), ex.tr_r.estimate.abs(), 1e-4));
        evidence.push(Evidence::at_most(format!("{name}.tr_zeta"), ex.tr_zeta.estimate.abs(), 1e-4));
        evidence.push(Evidence::at_most(format!("{name}.tr_f"), ex.tr_f.estimate.abs(), 1e-4));
        items.push(ResultItem::spectrum(format!("fiber_{name}"), report));
    }
    items.push(ResultItem::verdict(
        "regularized_traces",
        VerdictReport::from_evidence("regularized_traces", evidence, "austere fibers have vanishing regularized traces"),
    ));
    Ok(items)
}

fn builtin_automorphism_lift(num: &Numeric) -> Result<Vec<ResultItem>> {
    let g = builders::su(2, InnerForm::default())?;
    let nu = AutomorphismSpec::complex_conjugation(&g)?;
    let c = ReflectionCandidate::automorphism_lift(&g, &nu)?;
    let all = HSpec::diagonal(g.clone())?;
    let zero = DiscretePath::zeros(g.algebra().clone(), num.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(num.seed);
    let mut worst = 0.0f64;
    for _ in 0..num.samples {
        let gauge = random_gauge(&all, num.n, 0.7, &mut rng)?;
        let lhs = c.apply(&gauge_act(&gauge, &zero)?)?;
        let rhs = gauge_act(&gauge.map_ambient(nu.ambient_matrix()), &zero)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    let h = HSpec::product(g.clone(), &[], &[linalg::unit(3, 1)])?;
    let x = DiscretePath::constant(&AlgebraElement::basis_vector(g.algebra().clone(), 0), num.n)?;
    let verdict = verify_reflection(&c, &h, &zero, &x, num.samples, &num.membership(), num.seed)?;
    Ok(vec![
        at_most("intertwines_gauge", "max_abs_defect", worst, 1e-10, "nu(g * 0) = (nu . g) * 0"),
        ResultItem::verdict("reflection", verdict),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_configs_valid() {
        let mut names: Vec<_> = entries().iter().map(|e| e.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), entries().len());
        for e in entries() {
            let c = e.config();
            c.numeric.validate().unwrap();
            assert_eq!(c.label.as_deref(), Some(e.name));
            let text = serde_json::to_string(&c).unwrap();
            assert_eq!(ExperimentConfig::parse(&text).unwrap(), c, "{}", e.name);
        }
        assert!(matches!(find("nope"), Err(Error::UnknownCatalog(_))));
    }
}
