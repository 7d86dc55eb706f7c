use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::base::hspec::HSpec;
use crate::error::{Error, Result};
use crate::lie::group::{GroupElement, LieGroup};
use crate::linalg;
use crate::path::homogeneous::HomogeneousSetup;

/// Tolerance for tangency / normality of inputs.
pub const SUBSPACE_TOL: f64 = 1e-8;

/// Extrinsic geometry of the orbit `H . e` at `e`.
///
/// Tangent vectors `v` are lifted to `h` by the minimal-norm preimage of
/// `(x, y) -> x - y`; shape operators do not depend on that choice because the
/// isotropy algebra maps the normal space into itself.
#[derive(Debug, Clone)]
pub struct OrbitGeometry {
    h: HSpec,
    tangent: Vec<DVector<f64>>,
    normal: Vec<DVector<f64>>,
    /// `2d x d`: tangent vector -> stacked `(x; y)`.
    lift: DMatrix<f64>,
    kernel_dim: usize,
}

impl OrbitGeometry {
    pub fn new(h: HSpec) -> Result<Self> {
        let d = h.group().dim();
        let k = h.dim();
        let diffs: Vec<_> = h.pairs().iter().map(|(x, y)| x - y).collect();
        let tangent = linalg::span_basis(&diffs, d)?;
        let normal = linalg::complement(&tangent, d)?;
        let (lift, kernel_dim) = if k == 0 {
            (DMatrix::zeros(2 * d, d), 0)
        } else {
            let l = DMatrix::from_columns(&diffs);
            let l_pinv = linalg::pseudo_inverse(&l);
            let mut stacked = DMatrix::zeros(2 * d, k);
            for (j, (x, y)) in h.pairs().iter().enumerate() {
                stacked.view_mut((0, j), (d, 1)).copy_from(x);
                stacked.view_mut((d, j), (d, 1)).copy_from(y);
            }
            (stacked * l_pinv, k - tangent.len())
        };
        Ok(Self { h, tangent, normal, lift, kernel_dim })
    }

    pub fn h(&self) -> &HSpec {
        &self.h
    }

    pub fn group(&self) -> &LieGroup {
        self.h.group()
    }

    pub fn dim(&self) -> usize {
        self.h.group().dim()
    }

    pub fn tangent(&self) -> &[DVector<f64>] {
        &self.tangent
    }

    pub fn normal(&self) -> &[DVector<f64>] {
        &self.normal
    }

    /// Dimension of the isotropy algebra `{(x, y) in h : x = y}`.
    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn project_tangent(&self, v: &DVector<f64>) -> DVector<f64> {
        linalg::project(v, &self.tangent)
    }

    pub fn project_normal(&self, v: &DVector<f64>) -> DVector<f64> {
        linalg::project(v, &self.normal)
    }

    pub fn check_tangent(&self, v: &DVector<f64>) -> Result<()> {
        let defect = (v - self.project_tangent(v)).norm();
        if defect > SUBSPACE_TOL * (1.0 + v.norm()) {
            return Err(Error::NotTangent { defect });
        }
        Ok(())
    }

    pub fn check_normal(&self, xi: &DVector<f64>) -> Result<()> {
        let defect = self.project_tangent(xi).norm();
        if defect > SUBSPACE_TOL * (1.0 + xi.norm()) {
            return Err(Error::NotNormal { defect });
        }
        Ok(())
    }

    /// Minimal-norm `(x, y) in h` with `x - y = v`.
    pub fn lift(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let d = self.dim();
        let s = &self.lift * v;
        (s.rows(0, d).into_owned(), s.rows(d, d).into_owned())
    }

    /// `alpha(x - y, z - w) = -1/2 [x - y, z + w]^perp`.
    pub fn sff(&self, v: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_tangent(v)?;
        self.check_tangent(w)?;
        let alg = self.group().algebra();
        let (x, y) = self.lift(v);
        let (z, ww) = self.lift(w);
        let b = alg.bracket_coeffs(&(&x - &y), &(&z + &ww));
        Ok(self.project_normal(&b) * -0.5)
    }

    /// The same form written as `-1/2 ([x, w] - [y, z])^perp`.
    pub fn sff_alternative(&self, v: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_tangent(v)?;
        self.check_tangent(w)?;
        let alg = self.group().algebra();
        let (x, y) = self.lift(v);
        let (z, ww) = self.lift(w);
        let b = alg.bracket_coeffs(&x, &ww) - alg.bracket_coeffs(&y, &z);
        Ok(self.project_normal(&b) * -0.5)
    }

    /// `A_xi(x - y) = -1/2 [x + y, xi]^T` for a tangent vector `v`.
    pub fn apply_shape(&self, xi: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let alg = self.group().algebra();
        let (x, y) = self.lift(v);
        self.project_tangent(&alg.bracket_coeffs(&(&x + &y), xi)) * -0.5
    }

    /// Shape operator in the orthonormal tangent basis.
    pub fn shape(&self, xi: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_normal(xi)?;
        let t = &self.tangent;
        let mut m = DMatrix::zeros(t.len(), t.len());
        for (j, tj) in t.iter().enumerate() {
            let img = self.apply_shape(xi, tj);
            for (i, ti) in t.iter().enumerate() {
                m[(i, j)] = ti.dot(&img);
            }
        }
        Ok(m)
    }

    pub fn mean_curvature(&self, xi: &DVector<f64>) -> Result<f64> {
        Ok(self.shape(xi)?.trace())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NKind {
    /// `H . a` in `G`.
    BaseOrbit,
    /// `K' . aK` in `G/K`, represented by its preimage `K' a K` in `G`.
    CosetOrbit,
    /// A connected subgroup `N` of `G`, i.e. the orbit of `{e} x N` through `e`.
    Subgroup,
}

/// A submanifold through the anchor `a`, translated to `e`: `N' = a^{-1} N = H^a . e`.
#[derive(Debug, Clone)]
pub struct NSpec {
    kind: NKind,
    label: String,
    anchor: GroupElement,
    orbit: OrbitGeometry,
    setup: Option<HomogeneousSetup>,
}

/// A normal vector at `e` to a translated submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalVector {
    pub xi: DVector<f64>,
}

impl NSpec {
    pub fn base_orbit(h: &HSpec, a: &GroupElement) -> Result<Self> {
        let orbit = OrbitGeometry::new(h.normalized(a)?)?;
        Ok(Self { kind: NKind::BaseOrbit, label: h.label().to_string(), anchor: a.clone(), orbit, setup: None })
    }

    pub fn subgroup(group: LieGroup, span: &[DVector<f64>]) -> Result<Self> {
        let h = HSpec::product(group.clone(), &[], span)?;
        let label = format!("subgroup({}) of {}", h.dim(), group.name());
        let orbit = OrbitGeometry::new(h)?;
        Ok(Self { kind: NKind::Subgroup, label, anchor: group.identity(), orbit, setup: None })
    }

    pub fn whole_group(group: LieGroup) -> Result<Self> {
        let d = group.dim();
        let span: Vec<_> = (0..d).map(|i| linalg::unit(d, i)).collect();
        Self::subgroup(group, &span)
    }

    /// The single point `{e}`; its preimage is a fiber of `Phi`.
    pub fn point(group: LieGroup) -> Result<Self> {
        Self::subgroup(group, &[])
    }

    /// `N = K' . aK` in `G/K`.
    pub fn coset_orbit(setup: &HomogeneousSetup, k_prime: &[DVector<f64>], a: &GroupElement) -> Result<Self> {
        let h = HSpec::product(setup.group().clone(), k_prime, setup.k_basis())?;
        let orbit = OrbitGeometry::new(h.normalized(a)?)?;
        Ok(Self {
            kind: NKind::CosetOrbit,
            label: format!("K'.aK in {}/K", setup.group().name()),
            anchor: a.clone(),
            orbit,
            setup: Some(setup.clone()),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn kind(&self) -> NKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn anchor(&self) -> &GroupElement {
        &self.anchor
    }

    pub fn orbit(&self) -> &OrbitGeometry {
        &self.orbit
    }

    pub fn group(&self) -> &LieGroup {
        self.orbit.group()
    }

    pub fn setup(&self) -> Option<&HomogeneousSetup> {
        self.setup.as_ref()
    }

    pub fn tangent(&self) -> &[DVector<f64>] {
        self.orbit.tangent()
    }

    pub fn normal(&self) -> &[DVector<f64>] {
        self.orbit.normal()
    }

    pub fn normal_vector(&self, xi: DVector<f64>) -> Result<NormalVector> {
        self.orbit.check_normal(&xi)?;
        Ok(NormalVector { xi })
    }

    /// `T_{eK} N`: the m-part of the tangent space of the preimage in `G`.
    pub fn coset_tangent(&self) -> Result<Vec<DVector<f64>>> {
        let setup = self.require_setup()?;
        let proj: Vec<_> = self.tangent().iter().map(|t| setup.project_m(t)).collect();
        linalg::span_basis(&proj, self.group().dim())
    }

    fn require_setup(&self) -> Result<&HomogeneousSetup> {
        self.setup
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec("submanifold is not a coset orbit in G/K".into()))
    }
}

/// Second fundamental form and shape operator of `pi^{-1}(N)` assembled from those of `N` in `G/K`.
#[derive(Debug, Clone)]
pub struct PreimageGeometry {
    pub alpha: DVector<f64>,
    /// Shape operator on `basis`.
    pub operator: DMatrix<f64>,
    /// `k` basis followed by a basis of `T_{eK} N`.
    pub basis: Vec<DVector<f64>>,
}

/// Geometry of `pi^{-1}(N)` for `N` in a normal homogeneous space, from the
/// `k`/`m` decomposition:
/// `alpha(x, y) = alpha^N(x_m, y_m) - 1/2 [x_k, y_m]^perp + 1/2 [x_m, y_k]^perp` and
/// `A(x) = A^N(x_m) - 1/2 [x_m, xi]_k + 1/2 [x_k, xi]^T`.
pub fn pi_preimage_geometry(
    n: &NSpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
    xi: &NormalVector,
) -> Result<PreimageGeometry> {
    let setup = n.require_setup()?;
    let orbit = n.orbit();
    let alg = n.group().algebra();
    orbit.check_tangent(x)?;
    orbit.check_tangent(y)?;
    if setup.project_k(&xi.xi).norm() > SUBSPACE_TOL {
        return Err(Error::NotNormal { defect: setup.project_k(&xi.xi).norm() });
    }
    orbit.check_normal(&xi.xi)?;
    let coset_tangent = n.coset_tangent()?;
    // alpha^N and A^N of N in G/K, evaluated on horizontal vectors
    let alpha_n = |a: &DVector<f64>, b: &DVector<f64>| orbit.sff(a, b);
    let shape_n = |a: &DVector<f64>| linalg::project(&orbit.apply_shape(&xi.xi, a), &coset_tangent);

    let (xk, xm) = (setup.project_k(x), setup.project_m(x));
    let (yk, ym) = (setup.project_k(y), setup.project_m(y));
    let alpha = alpha_n(&xm, &ym)? - orbit.project_normal(&alg.bracket_coeffs(&xk, &ym)) * 0.5
        + orbit.project_normal(&alg.bracket_coeffs(&xm, &yk)) * 0.5;

    let apply = |v: &DVector<f64>| -> DVector<f64> {
        let (vk, vm) = (setup.project_k(v), setup.project_m(v));
        shape_n(&vm) - setup.project_k(&alg.bracket_coeffs(&vm, &xi.xi)) * 0.5
            + orbit.project_tangent(&alg.bracket_coeffs(&vk, &xi.xi)) * 0.5
    };
    let mut basis: Vec<_> = setup.k_basis().to_vec();
    basis.extend(coset_tangent.iter().cloned());
    let mut operator = DMatrix::zeros(basis.len(), basis.len());
    for (j, bj) in basis.iter().enumerate() {
        let img = apply(bj);
        for (i, bi) in basis.iter().enumerate() {
            operator[(i, j)] = bi.dot(&img);
        }
    }
    Ok(PreimageGeometry { alpha, operator, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::{AlgebraElement, InnerForm};
    use crate::lie::automorphism::AutomorphismSpec;
    use crate::lie::builders;
    use crate::lie::exp_map;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn so3() -> LieGroup {
        builders::so(3, InnerForm::default()).unwrap()
    }

    #[test]
    fn tangent_spaces() {
        let g = so3();
        let e3 = linalg::unit(3, 2);
        let diag = OrbitGeometry::new(HSpec::diagonal(g.clone()).unwrap()).unwrap();
        assert!(diag.tangent().is_empty());
        assert_eq!(diag.kernel_dim(), 3);
        let tt = OrbitGeometry::new(HSpec::product(g.clone(), std::slice::from_ref(&e3), std::slice::from_ref(&e3)).unwrap()).unwrap();
        assert_eq!(tt.tangent().len(), 1);
        assert!((tt.tangent()[0].dot(&e3).abs() - 1.0).abs() < 1e-12);
        let su2 = builders::su(2, InnerForm::default()).unwrap();
        let sigma = AutomorphismSpec::complex_conjugation(&su2).unwrap();
        let tw = OrbitGeometry::new(HSpec::twisted_diagonal(su2, sigma.clone()).unwrap()).unwrap();
        // span{x - d sigma x} = the -1 eigenspace of d sigma
        assert_eq!(tw.tangent().len(), 2);
        for t in tw.tangent() {
            assert!((sigma.apply_coeffs(t) + t).norm() < 1e-12);
        }
    }

    #[test]
    fn circle_subgroup_is_geodesic() {
        let g = so3();
        let e3 = linalg::unit(3, 2);
        let o = OrbitGeometry::new(HSpec::product(g, std::slice::from_ref(&e3), std::slice::from_ref(&e3)).unwrap()).unwrap();
        let t = o.tangent()[0].clone();
        assert!(o.sff(&t, &t).unwrap().norm() < 1e-15);
        for xi in o.normal() {
            assert!(o.shape(xi).unwrap().amax() < 1e-15);
        }
        assert!(matches!(o.shape(&t), Err(Error::NotNormal { .. })));
        assert!(matches!(o.sff(&linalg::unit(3, 0), &t), Err(Error::NotTangent { .. })));
    }

    #[test]
    fn involutive_twist_is_totally_geodesic() {
        let su2 = builders::su(2, InnerForm::default()).unwrap();
        let sigma = AutomorphismSpec::complex_conjugation(&su2).unwrap();
        let o = OrbitGeometry::new(HSpec::twisted_diagonal(su2, sigma).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (x, y) = o.h().random_pair(&mut rng, 1.0);
            let (z, w) = o.h().random_pair(&mut rng, 1.0);
            assert!(o.sff(&(x - y), &(z - w)).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn sff_forms_agree_and_are_symmetric() {
        let g = builders::su(2, InnerForm::default()).unwrap();
        let a = exp_map(&AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(0.7));
        let n = NSpec::base_orbit(&HSpec::diagonal(g).unwrap(), &a).unwrap();
        let o = n.orbit();
        let t = o.tangent();
        assert_eq!(t.len(), 2);
        let v = &t[0] * 0.3 - &t[1] * 1.1;
        let w = &t[0] * -0.8 + &t[1] * 0.4;
        let s1 = o.sff(&v, &w).unwrap();
        assert!((&s1 - o.sff(&w, &v).unwrap()).norm() < 1e-12);
        assert!((&s1 - o.sff_alternative(&v, &w).unwrap()).norm() < 1e-12);
        let xi = &n.normal()[0];
        let a_xi = o.shape(xi).unwrap();
        assert!((&a_xi - a_xi.transpose()).amax() < 1e-12);
        let vc = DVector::from_vec(vec![v.dot(&t[0]), v.dot(&t[1])]);
        let wc = DVector::from_vec(vec![w.dot(&t[0]), w.dot(&t[1])]);
        assert!((wc.dot(&(&a_xi * &vc)) - s1.dot(xi)).abs() < 1e-12);
        assert!(a_xi.amax() > 0.1);
    }

    #[test]
    fn preimage_remark_matches_direct_formulas() {
        let g = builders::su(2, InnerForm::default()).unwrap();
        let setup = HomogeneousSetup::new(g.clone(), &[linalg::unit(3, 2)]).unwrap();
        let k_prime = [linalg::unit(3, 0)];
        let a = exp_map(&AlgebraElement::new(g.algebra().clone(), DVector::from_vec(vec![0.2, 0.5, -0.3])).unwrap());
        let n = NSpec::coset_orbit(&setup, &k_prime, &a).unwrap();
        let o = n.orbit();
        assert_eq!(o.tangent().len(), 2);
        let xi = n.normal_vector(n.normal()[0].clone()).unwrap();
        let x = &o.tangent()[0] * 0.6 + &o.tangent()[1] * 0.2;
        let y = &o.tangent()[0] * -0.1 + &o.tangent()[1] * 0.9;
        let geo = pi_preimage_geometry(&n, &x, &y, &xi).unwrap();
        assert!((&geo.alpha - o.sff(&x, &y).unwrap()).norm() < 1e-12);
        let direct = DMatrix::from_fn(2, 2, |i, j| {
            geo.basis[i].dot(&o.apply_shape(&xi.xi, &geo.basis[j]))
        });
        assert!((&geo.operator - direct).amax() < 1e-12);
        assert!((geo.operator.trace() - o.mean_curvature(&xi.xi).unwrap()).abs() < 1e-12);

        // pure k input: A(x) = 1/2 [x, xi]^T
        let k = linalg::unit(3, 2);
        let img = o.project_tangent(&g.algebra().bracket_coeffs(&k, &xi.xi)) * 0.5;
        let kc = DVector::from_fn(2, |i, _| geo.basis[i].dot(&k));
        let from_matrix: DVector<f64> = geo.basis.iter().zip((&geo.operator * kc).iter()).map(|(b, c)| b * *c).sum();
        assert!((from_matrix - img).norm() < 1e-12);
    }
}
