use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::base::hspec::HSpec;
use crate::base::orbit::{NSpec, OrbitGeometry};
use crate::error::{Error, Result};
use crate::lie::algebra::{check_same, AlgebraElement, LieAlgebra};
use crate::path::discrete::{mean_flat, prefix_integral_flat, DiscretePath};
use crate::pf::basis::TangentBasis;

/// Symmetry tolerance for assembled operators, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Galerkin matrix `<b_i, A b_j>` of a shape operator on a truncated basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub label: String,
    pub basis: Arc<TangentBasis>,
    /// Symmetrized entries.
    pub entries: DMatrix<f64>,
    /// `max |E - E^T|` before symmetrization.
    pub symmetry_defect: f64,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// Fiber-fiber block.
    pub fn fiber_block(&self) -> DMatrix<f64> {
        let h0 = self.basis.horizontal_dim();
        let m = self.dim() - h0;
        self.entries.view((h0, h0), (m, m)).into_owned()
    }
}

/// Matrix `R` with `R v = [v, xi]`.
fn right_bracket(alg: &LieAlgebra, xi: &DVector<f64>) -> DMatrix<f64> {
    -alg.ad_matrix(xi.as_slice())
}

fn check_xi(alg: &Arc<LieAlgebra>, xi: &AlgebraElement) -> Result<()> {
    check_same(alg, xi.algebra())
}

fn assemble(
    label: String,
    basis: &Arc<TangentBasis>,
    apply: impl Fn(&[f64]) -> Vec<f64> + Sync,
) -> Result<OperatorMatrix> {
    let dim = basis.dim();
    let len = basis.columns().nrows();
    let images: Vec<Vec<f64>> = (0..dim).into_par_iter().map(|j| apply(basis.column(j))).collect();
    let mut img = DMatrix::zeros(len, dim);
    for (j, col) in images.iter().enumerate() {
        img.column_mut(j).copy_from_slice(col);
    }
    let e = basis.columns().tr_mul(&img) / basis.n() as f64;
    let defect = (&e - e.transpose()).amax();
    if defect > SYMMETRY_TOL * e.amax().max(1.0) {
        return Err(Error::Asymmetric { defect });
    }
    let entries = (&e + e.transpose()) * 0.5;
    Ok(OperatorMatrix { label, basis: basis.clone(), entries, symmetry_defect: defect })
}

/// Fiber image `A(-Q') = -[Q, xi] + [int Q, xi]` with `Q = -V X`.
///
/// The mean of the first term cancels the second exactly; the result has zero mean.
pub fn fiber_image(alg: &LieAlgebra, xi: &DVector<f64>, x: &[f64], n: usize) -> Vec<f64> {
    let d = alg.dim();
    let r = right_bracket(alg, xi);
    let vx = prefix_integral_flat(x, n, d);
    let m = DVector::from_vec(mean_flat(&vx, n, d));
    let shift = &r * m;
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        let v = DVector::from_column_slice(&vx[i * d..(i + 1) * d]);
        let w = &r * v - &shift;
        out[i * d..(i + 1) * d].copy_from_slice(w.as_slice());
    }
    out
}

/// Shape operator of the fiber `Phi^{-1}(e)` at the zero path.
pub fn shape_fiber(xi: &AlgebraElement, basis: &Arc<TangentBasis>) -> Result<OperatorMatrix> {
    check_xi(basis.algebra(), xi)?;
    if basis.horizontal_dim() > 0 {
        return Err(Error::InvalidSpec("fiber operator needs a pure fiber basis".into()));
    }
    let alg = basis.algebra().clone();
    let n = basis.n();
    let c = xi.coeffs().clone();
    let label = format!("fiber {} M={} n={}", alg.name(), basis.modes(), n);
    assemble(label, basis, |x| fiber_image(&alg, &c, x, n))
}

fn check_path_tangent(orbit: &OrbitGeometry, x: &DiscretePath) -> Result<DVector<f64>> {
    let m = x.mean();
    orbit.check_tangent(&m)?;
    Ok(m)
}

fn check_basis_matches(orbit: &OrbitGeometry, basis: &TangentBasis) -> Result<()> {
    check_same(orbit.group().algebra(), basis.algebra())?;
    if basis.horizontal_dim() != orbit.tangent().len() {
        return Err(Error::InvalidSpec(format!(
            "basis has {} horizontal vectors, tangent space has dimension {}",
            basis.horizontal_dim(),
            orbit.tangent().len()
        )));
    }
    for x in basis.horizontal() {
        orbit.check_tangent(x)?;
    }
    Ok(())
}

/// `A X = A^N(x) - 1/2 [x, xi]^T + [V X, xi] - [mean V X, xi]^perp`, `x = mean X`.
///
/// On constants this is `A^N(x) + (t - 1/2)[x, xi]`; on zero-mean paths it is
/// `-[Q, xi] + [int Q, xi]^perp`.
pub fn preimage_image(orbit: &OrbitGeometry, xi: &DVector<f64>, x: &[f64], n: usize) -> Vec<f64> {
    let alg = orbit.group().algebra();
    let d = alg.dim();
    let r = right_bracket(alg, xi);
    let hx = orbit.project_tangent(&DVector::from_vec(mean_flat(x, n, d)));
    let vx = prefix_integral_flat(x, n, d);
    let mv = DVector::from_vec(mean_flat(&vx, n, d));
    let constant = orbit.apply_shape(xi, &hx) - orbit.project_tangent(&(&r * &hx)) * 0.5
        - orbit.project_normal(&(&r * mv));
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        let v = DVector::from_column_slice(&vx[i * d..(i + 1) * d]);
        let w = &r * v + &constant;
        out[i * d..(i + 1) * d].copy_from_slice(w.as_slice());
    }
    out
}

/// Shape operator of `Phi^{-1}(N)` at the zero path, for `N` translated to pass through `e`.
pub fn shape_preimage(n_spec: &NSpec, xi: &AlgebraElement, basis: &Arc<TangentBasis>) -> Result<OperatorMatrix> {
    let orbit = n_spec.orbit();
    check_xi(basis.algebra(), xi)?;
    check_basis_matches(orbit, basis)?;
    orbit.check_normal(xi.coeffs())?;
    let n = basis.n();
    let c = xi.coeffs().clone();
    let label = format!("preimage {} M={} n={}", n_spec.label(), basis.modes(), n);
    assemble(label, basis, |x| preimage_image(orbit, &c, x, n))
}

/// `A(-Z') = -[Z, xi] + [int Z, xi]^perp` with `Z = x - V X`, `(x, y)` the
/// minimal lift of `mean X` into `h`.
pub fn pgh_image(orbit: &OrbitGeometry, xi: &DVector<f64>, x: &[f64], n: usize) -> Vec<f64> {
    let alg = orbit.group().algebra();
    let d = alg.dim();
    let r = right_bracket(alg, xi);
    let (z0, _) = orbit.lift(&DVector::from_vec(mean_flat(x, n, d)));
    let vx = prefix_integral_flat(x, n, d);
    let mut z = vec![0.0; n * d];
    for i in 0..n {
        for a in 0..d {
            z[i * d + a] = z0[a] - vx[i * d + a];
        }
    }
    let mz = DVector::from_vec(mean_flat(&z, n, d));
    let constant = orbit.project_normal(&(&r * mz));
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        let v = DVector::from_column_slice(&z[i * d..(i + 1) * d]);
        let w = -(&r * v) + &constant;
        out[i * d..(i + 1) * d].copy_from_slice(w.as_slice());
    }
    out
}

/// Shape operator of the orbit `P(G, H) * 0`.
pub fn shape_pgh_orbit(h: &HSpec, xi: &AlgebraElement, basis: &Arc<TangentBasis>) -> Result<OperatorMatrix> {
    let orbit = OrbitGeometry::new(h.clone())?;
    check_xi(basis.algebra(), xi)?;
    check_basis_matches(&orbit, basis)?;
    orbit.check_normal(xi.coeffs())?;
    let n = basis.n();
    let c = xi.coeffs().clone();
    let label = format!("P(G,H) orbit {} M={} n={}", h.label(), basis.modes(), n);
    assemble(label, basis, |x| pgh_image(&orbit, &c, x, n))
}

/// Second fundamental form of `Phi^{-1}(N)` at the zero path:
/// `alpha^N(x, y) + 1/2 [x, y]^perp - (int_0^1 [int_0^t X, Y] dt)^perp`.
pub fn sff_preimage(n_spec: &NSpec, x: &DiscretePath, y: &DiscretePath) -> Result<DVector<f64>> {
    check_same(x.algebra(), y.algebra())?;
    check_same(x.algebra(), n_spec.group().algebra())?;
    if x.n() != y.n() {
        return Err(Error::GridMismatch { left: x.n(), right: y.n() });
    }
    let orbit = n_spec.orbit();
    let alg = x.algebra();
    let d = alg.dim();
    let n = x.n();
    let mx = check_path_tangent(orbit, x)?;
    let my = check_path_tangent(orbit, y)?;
    let vx = prefix_integral_flat(x.values(), n, d);
    let mut acc = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    for i in 0..n {
        alg.bracket_into(&vx[i * d..(i + 1) * d], y.value(i), &mut tmp);
        acc.iter_mut().zip(&tmp).for_each(|(a, t)| *a += t);
    }
    let double = DVector::from_vec(acc) / n as f64;
    let correction = alg.bracket_coeffs(&mx, &my) * 0.5 - double;
    Ok(orbit.sff(&mx, &my)? + orbit.project_normal(&correction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::InnerForm;
    use crate::lie::{builders, exp_map, LieGroup};
    use crate::linalg;
    use crate::path::discrete::l2_inner;
    use crate::pf::basis::fiber_basis;

    fn so3() -> LieGroup {
        builders::so(3, InnerForm::default()).unwrap()
    }

    #[test]
    fn fiber_images_have_zero_mean_and_abelian_vanishes() {
        let g = so3();
        let b = Arc::new(fiber_basis(g.algebra().clone(), 4, 32).unwrap());
        let xi = DVector::from_vec(vec![0.3, -0.2, 1.0]);
        for j in 0..b.dim() {
            let img = fiber_image(g.algebra(), &xi, b.column(j), 32);
            assert!(mean_flat(&img, 32, 3).iter().all(|v| v.abs() < 1e-15));
        }
        let t2 = builders::torus(2, InnerForm::default()).unwrap();
        let bt = Arc::new(fiber_basis(t2.algebra().clone(), 4, 32).unwrap());
        let a = shape_fiber(&AlgebraElement::basis_vector(t2.algebra().clone(), 0), &bt).unwrap();
        assert_eq!(a.entries.amax(), 0.0);
    }

    #[test]
    fn horizontal_image_for_circle_subgroup() {
        // with -tr/2 the generators L1, L2, L3 are orthonormal and [L3, L1] = L2
        let g = builders::so(3, InnerForm::NegTrace { scale: 0.5 }).unwrap();
        let e3 = linalg::unit(3, 2);
        let n = NSpec::subgroup(g.clone(), std::slice::from_ref(&e3)).unwrap();
        let xi = linalg::unit(3, 0);
        let x = DiscretePath::constant(&AlgebraElement::new(g.algebra().clone(), e3.clone()).unwrap(), 16).unwrap();
        let img = preimage_image(n.orbit(), &xi, x.values(), 16);
        let e3e1 = g.algebra().bracket_coeffs(&e3, &xi);
        assert!((&e3e1 - linalg::unit(3, 1)).norm() < 1e-14);
        for i in 0..16 {
            let want = &e3e1 * (crate::path::t_mid(16, i) - 0.5);
            assert!((DVector::from_column_slice(&img[i * 3..i * 3 + 3]) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn operator_matches_sff_pairing() {
        let g = builders::su(2, InnerForm::default()).unwrap();
        let a = exp_map(&AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(1.1));
        let n = NSpec::base_orbit(&HSpec::diagonal(g.clone()).unwrap(), &a).unwrap();
        let basis = Arc::new(TangentBasis::new(g.algebra().clone(), n.tangent(), 4, 64).unwrap());
        let xi = AlgebraElement::new(g.algebra().clone(), n.normal()[0].clone()).unwrap();
        let op = shape_preimage(&n, &xi, &basis).unwrap();
        assert!(op.symmetry_defect < 1e-13);
        for (i, j) in [(0, 1), (1, 1), (0, 5), (3, 7), (9, 2)] {
            let s = sff_preimage(&n, &basis.vector(i), &basis.vector(j)).unwrap();
            assert!((s.dot(xi.coeffs()) - op.entries[(i, j)]).abs() < 1e-12);
        }
        // trace of the truncation equals the mean curvature of N
        assert!((op.entries.trace() - n.orbit().mean_curvature(xi.coeffs()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pgh_agrees_with_preimage() {
        let g = so3();
        let h = HSpec::product(g.clone(), &[], &[linalg::unit(3, 2)]).unwrap();
        let n = NSpec::subgroup(g.clone(), &[linalg::unit(3, 2)]).unwrap();
        let basis = Arc::new(TangentBasis::new(g.algebra().clone(), n.tangent(), 4, 64).unwrap());
        let xi = AlgebraElement::basis_vector(g.algebra().clone(), 0);
        let a = shape_preimage(&n, &xi, &basis).unwrap();
        let b = shape_pgh_orbit(&h, &xi, &basis).unwrap();
        assert!((&a.entries - &b.entries).amax() < 1e-13);
    }

    #[test]
    fn sff_of_constant_paths_is_base_sff() {
        let g = builders::su(2, InnerForm::default()).unwrap();
        let a = exp_map(&AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(0.6));
        let n = NSpec::base_orbit(&HSpec::diagonal(g.clone()).unwrap(), &a).unwrap();
        let t = n.tangent();
        let alg = g.algebra().clone();
        let x = DiscretePath::constant(&AlgebraElement::new(alg.clone(), &t[0] * 0.4 + &t[1]).unwrap(), 8).unwrap();
        let y = DiscretePath::constant(&AlgebraElement::new(alg.clone(), &t[1] * -0.7).unwrap(), 8).unwrap();
        let s = sff_preimage(&n, &x, &y).unwrap();
        assert!((s - n.orbit().sff(&x.mean(), &y.mean()).unwrap()).norm() < 1e-14);
        let whole = NSpec::whole_group(g).unwrap();
        let z = DiscretePath::from_fn(alg, 8, |t| DVector::from_vec(vec![t, t * t, 1.0])).unwrap();
        assert!(sff_preimage(&whole, &x, &z).unwrap().norm() < 1e-15);
        assert!(l2_inner(&x, &z).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = so3();
        let n = NSpec::subgroup(g.clone(), &[linalg::unit(3, 2)]).unwrap();
        let basis = Arc::new(TangentBasis::new(g.algebra().clone(), n.tangent(), 2, 16).unwrap());
        let tangent_xi = AlgebraElement::basis_vector(g.algebra().clone(), 2);
        assert!(matches!(shape_preimage(&n, &tangent_xi, &basis), Err(Error::NotNormal { .. })));
        let fb = Arc::new(fiber_basis(g.algebra().clone(), 2, 16).unwrap());
        assert!(shape_preimage(&n, &AlgebraElement::basis_vector(g.algebra().clone(), 0), &fb).is_err());
        assert!(shape_fiber(&tangent_xi, &basis).is_err());
        let x = DiscretePath::constant(&AlgebraElement::basis_vector(g.algebra().clone(), 0), 16).unwrap();
        assert!(matches!(sff_preimage(&n, &x, &x), Err(Error::NotTangent { .. })));
    }
}
