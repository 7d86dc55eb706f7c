use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// The Ad-invariant inner product used to orthonormalize the basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerForm {
    /// `<x, y> = -scale * tr(x y)` on the (realified) matrices.
    NegTrace { scale: f64 },
    /// `<x, y> = -scale * tr(ad x ad y)`; requires a semisimple algebra.
    NegKilling { scale: f64 },
}

impl Default for InnerForm {
    fn default() -> Self {
        InnerForm::NegTrace { scale: 1.0 }
    }
}

impl InnerForm {
    pub fn scale(&self) -> f64 {
        match *self {
            InnerForm::NegTrace { scale } | InnerForm::NegKilling { scale } => scale,
        }
    }
}

/// A compact matrix Lie algebra with a basis that is orthonormal for its inner form.
///
/// Matrices are real; complex algebras are stored in realified form so that
/// every basis matrix is skew-symmetric.
#[derive(Clone)]
pub struct LieAlgebra {
    name: String,
    matrix_size: usize,
    basis: Vec<DMatrix<f64>>,
    /// `structure[(i * d + j) * d + k]` is the coefficient of `e_k` in `[e_i, e_j]`.
    structure: Vec<f64>,
    /// `ad[i][(k, j)] = c[i][j][k]`, the matrix of `x -> [e_i, x]`.
    ad: Vec<DMatrix<f64>>,
    inner_form: InnerForm,
    /// Least-squares map from a flattened matrix to basis coefficients.
    coeff_map: DMatrix<f64>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAlgebra")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("matrix_size", &self.matrix_size)
            .field("inner_form", &self.inner_form)
            .finish()
    }
}

impl PartialEq for LieAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.dim() == other.dim()
            && self.inner_form == other.inner_form
            && self.matrix_size == other.matrix_size
    }
}

impl LieAlgebra {
    /// Build an algebra from a raw spanning set of skew-symmetric matrices.
    ///
    /// The raw matrices are orthonormalized by Gram-Schmidt in the given order
    /// (so `e_1` stays parallel to the first raw matrix).
    pub fn from_matrices(name: &str, raw: Vec<DMatrix<f64>>, form: InnerForm) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidSpec("empty basis".into()));
        }
        let size = raw[0].nrows();
        for m in &raw {
            if m.nrows() != size || m.ncols() != size {
                return Err(Error::InvalidSpec("basis matrices differ in shape".into()));
            }
            if !m.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidSpec("non-finite basis entry".into()));
            }
            let skew = (m + m.transpose()).norm();
            if skew > 1e-12 * (1.0 + m.norm()) {
                return Err(Error::InvalidSpec(
                    "basis matrices must be skew-symmetric (compact real form)".into(),
                ));
            }
        }
        if form.scale().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
            || !form.scale().is_finite()
        {
            return Err(Error::InvalidSpec("inner form scale must be positive".into()));
        }

        // First pass: orthonormal for -tr(xy) (Frobenius on skew matrices).
        let trace_gram = DMatrix::from_fn(raw.len(), raw.len(), |i, j| raw[i].dot(&raw[j]));
        let first = orthonormalize(&raw, &trace_gram)?;
        let mut alg = Self::assemble(name, size, first, InnerForm::NegTrace { scale: 1.0 })?;

        let target_gram = match form {
            InnerForm::NegTrace { scale } => DMatrix::identity(alg.dim(), alg.dim()) * scale,
            InnerForm::NegKilling { scale } => {
                let d = alg.dim();
                DMatrix::from_fn(d, d, |i, j| -scale * (&alg.ad[i] * &alg.ad[j]).trace())
            }
        };
        let rebased = orthonormalize(&alg.basis, &target_gram).map_err(|_| {
            Error::InvalidSpec("inner form is not positive definite (algebra not semisimple?)".into())
        })?;
        alg = Self::assemble(name, size, rebased, form)?;
        Ok(alg)
    }

    fn assemble(
        name: &str,
        size: usize,
        basis: Vec<DMatrix<f64>>,
        form: InnerForm,
    ) -> Result<Self> {
        let d = basis.len();
        let flat = DMatrix::from_fn(size * size, d, |r, c| basis[c][r]);
        let coeff_map = linalg::pseudo_inverse(&flat);
        let mut alg = LieAlgebra {
            name: name.to_string(),
            matrix_size: size,
            basis,
            structure: vec![0.0; d * d * d],
            ad: Vec::new(),
            inner_form: form,
            coeff_map,
        };
        for i in 0..d {
            for j in 0..d {
                let comm = &alg.basis[i] * &alg.basis[j] - &alg.basis[j] * &alg.basis[i];
                let (c, residual) = alg.coeffs_with_residual(&comm);
                if residual > 1e-10 * (1.0 + comm.norm()) {
                    return Err(Error::InvalidSpec(format!(
                        "basis is not closed under the bracket (residual {residual:.3e})"
                    )));
                }
                for k in 0..d {
                    alg.structure[(i * d + j) * d + k] = c[k];
                }
            }
        }
        alg.ad = (0..d)
            .map(|i| DMatrix::from_fn(d, d, |k, j| alg.structure[(i * d + j) * d + k]))
            .collect();
        Ok(alg)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn inner_form(&self) -> InnerForm {
        self.inner_form
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    /// Matrix of `x -> [e_i, x]` in basis coordinates.
    pub fn ad_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.ad[i]
    }

    /// Matrix of `y -> [x, y]` for a coefficient vector `x`.
    pub fn ad_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                m += &self.ad[i] * xi;
            }
        }
        m
    }

    /// Bracket on raw coefficient slices: `out = [x, y]`.
    pub fn bracket_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let d = self.dim();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, xi) in x.iter().enumerate().take(d) {
            if *xi == 0.0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate().take(d) {
                let w = xi * yj;
                if w == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for (o, c) in out.iter_mut().zip(&self.structure[base..base + d]) {
                    *o += w * c;
                }
            }
        }
    }

    pub fn bracket_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.bracket_into(x.as_slice(), y.as_slice(), out.as_mut_slice());
        out
    }

    /// Matrix `sum_i c_i e_i`.
    pub fn matrix_of(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let n = self.matrix_size;
        let mut m = DMatrix::zeros(n, n);
        for (c, e) in coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += e * *c;
            }
        }
        m
    }

    /// Least-squares basis coefficients of a matrix, with the residual norm.
    pub fn coeffs_with_residual(&self, m: &DMatrix<f64>) -> (DVector<f64>, f64) {
        let flat = DVector::from_column_slice(m.as_slice());
        let c = &self.coeff_map * &flat;
        let back = self.matrix_of(c.as_slice());
        let residual = (m - back).norm();
        (c, residual)
    }

    /// Coefficients of a matrix that must lie in the algebra.
    pub fn coeffs_of(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        let (c, residual) = self.coeffs_with_residual(m);
        if residual > 1e-8 * (1.0 + m.norm()) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(c)
    }

    /// Inner form evaluated on two matrices of the algebra.
    pub fn matrix_inner(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        Ok(self.coeffs_of(x)?.dot(&self.coeffs_of(y)?))
    }

    /// Largest Jacobi-identity defect over basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let ei = linalg::unit(d, i);
                    let ej = linalg::unit(d, j);
                    let ek = linalg::unit(d, k);
                    let a = self.bracket_coeffs(&ei, &self.bracket_coeffs(&ej, &ek));
                    let b = self.bracket_coeffs(&ej, &self.bracket_coeffs(&ek, &ei));
                    let c = self.bracket_coeffs(&ek, &self.bracket_coeffs(&ei, &ej));
                    worst = worst.max((a + b + c).amax());
                }
            }
        }
        worst
    }

    /// Largest `|<[x,y],z> + <y,[x,z]>|` over basis triples.
    pub fn ad_invariance_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            // ad_i must be skew-symmetric in an orthonormal basis
            let a = &self.ad[i];
            worst = worst.max((a + a.transpose()).amax());
        }
        worst
    }

    /// Largest antisymmetry defect `|c_ijk + c_jik|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst
                        .max((self.structure_constant(i, j, k) + self.structure_constant(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Gram matrix of the basis under the inner form, minus the identity.
    pub fn gram_defect(&self) -> f64 {
        let d = self.dim();
        let scale = self.inner_form.scale();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let value = match self.inner_form {
                    InnerForm::NegTrace { .. } => -scale * (&self.basis[i] * &self.basis[j]).trace(),
                    InnerForm::NegKilling { .. } => -scale * (&self.ad[i] * &self.ad[j]).trace(),
                };
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((value - target).abs());
            }
        }
        worst
    }

    /// Killing form Gram matrix in the orthonormal basis.
    pub fn killing_gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| (&self.ad[i] * &self.ad[j]).trace())
    }

    /// Whether the inner form is a negative multiple of the Killing form (to `tol`, relative).
    pub fn is_negative_killing_multiple(&self, tol: f64) -> bool {
        let k = self.killing_gram();
        let c = -k.trace() / self.dim() as f64;
        if c <= tol {
            return false;
        }
        let defect = (k + DMatrix::identity(self.dim(), self.dim()) * c).amax();
        defect <= tol * c
    }
}

/// Gram-Schmidt in the order given, against the bilinear form whose Gram matrix is `gram`.
fn orthonormalize(raw: &[DMatrix<f64>], gram: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidSpec("basis is linearly dependent".into()))?;
    let l = chol.l();
    let l_inv = l
        .try_inverse()
        .ok_or_else(|| Error::InvalidSpec("basis is linearly dependent".into()))?;
    let d = raw.len();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut m = DMatrix::zeros(raw[0].nrows(), raw[0].ncols());
        for j in 0..=i {
            m += &raw[j] * l_inv[(i, j)];
        }
        out.push(m);
    }
    Ok(out)
}

/// An element of a Lie algebra, stored by its coefficients in the orthonormal basis.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    algebra: Arc<LieAlgebra>,
    coeffs: DVector<f64>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        *self.algebra == *other.algebra && self.coeffs == other.coeffs
    }
}

pub(crate) fn check_same(a: &LieAlgebra, b: &LieAlgebra) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch {
            left: a.name().to_string(),
            right: b.name().to_string(),
        })
    }
}

impl AlgebraElement {
    pub fn new(algebra: Arc<LieAlgebra>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != algebra.dim() {
            return Err(Error::InvalidSpec(format!(
                "expected {} coefficients, got {}",
                algebra.dim(),
                coeffs.len()
            )));
        }
        if !coeffs.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        Ok(Self { algebra, coeffs })
    }

    pub fn zero(algebra: Arc<LieAlgebra>) -> Self {
        let d = algebra.dim();
        Self { algebra, coeffs: DVector::zeros(d) }
    }

    pub fn basis_vector(algebra: Arc<LieAlgebra>, i: usize) -> Self {
        let d = algebra.dim();
        Self { algebra, coeffs: linalg::unit(d, i) }
    }

    pub fn from_matrix(algebra: Arc<LieAlgebra>, m: &DMatrix<f64>) -> Result<Self> {
        let coeffs = algebra.coeffs_of(m)?;
        Ok(Self { algebra, coeffs })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.algebra.matrix_of(self.coeffs.as_slice())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn with_coeffs(&self, coeffs: DVector<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.algebra.dim());
        Self { algebra: self.algebra.clone(), coeffs }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_coeffs(&self.coeffs * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(&self.algebra, &other.algebra)?;
        Ok(self.with_coeffs(&self.coeffs + &other.coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same(&self.algebra, &other.algebra)?;
        Ok(self.with_coeffs(&self.coeffs - &other.coeffs))
    }
}

/// `[x, y]`, the matrix commutator expressed in basis coefficients.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    check_same(&x.algebra, &y.algebra)?;
    Ok(x.with_coeffs(x.algebra.bracket_coeffs(&x.coeffs, &y.coeffs)))
}

/// The Ad-invariant inner product.
pub fn inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_same(&x.algebra, &y.algebra)?;
    Ok(x.coeffs.dot(&y.coeffs))
}

/// Orthogonal projection onto the span of an orthonormal list of elements.
pub fn project(x: &AlgebraElement, subspace: &[AlgebraElement]) -> Result<AlgebraElement> {
    for s in subspace {
        check_same(&x.algebra, &s.algebra)?;
    }
    let vs: Vec<DVector<f64>> = subspace.iter().map(|s| s.coeffs.clone()).collect();
    let defect = linalg::gram_defect(&vs);
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal { defect });
    }
    Ok(x.with_coeffs(linalg::project(&x.coeffs, &vs)))
}

/// Orthogonal decomposition `g = [g, g] + c(g)`.
#[derive(Debug, Clone)]
pub struct SubalgebraSplit {
    pub semisimple: Vec<DVector<f64>>,
    pub center: Vec<DVector<f64>>,
}

impl SubalgebraSplit {
    /// Whether every vector of `subspace` (orthonormal) contains the semisimple part.
    pub fn semisimple_defect_in(&self, subspace: &[DVector<f64>]) -> f64 {
        self.semisimple
            .iter()
            .map(|v| (v - linalg::project(v, subspace)).norm())
            .fold(0.0, f64::max)
    }
}

/// Center as the common kernel of all `ad(e_i)`, semisimple part as its complement.
pub fn split_center(algebra: &LieAlgebra) -> Result<SubalgebraSplit> {
    let d = algebra.dim();
    let mut stacked = DMatrix::zeros(d * d, d);
    for i in 0..d {
        stacked.view_mut((i * d, 0), (d, d)).copy_from(algebra.ad_basis(i));
    }
    let center = linalg::null_space(&stacked)?;
    let semisimple = linalg::complement(&center, d)?;
    Ok(SubalgebraSplit { semisimple, center })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::builders;

    #[test]
    fn so3_raw_generators_bracket_to_third() {
        let alg = builders::so(3, InnerForm::default()).unwrap().algebra().clone();
        let gens = builders::so3_generators();
        let x = AlgebraElement::from_matrix(alg.clone(), &gens[0]).unwrap();
        let y = AlgebraElement::from_matrix(alg.clone(), &gens[1]).unwrap();
        let z = bracket(&x, &y).unwrap();
        assert!((z.matrix() - &gens[2]).norm() < 1e-13);
    }

    #[test]
    fn so3_unscaled_generator_has_norm_two() {
        let alg = builders::so(3, InnerForm::default()).unwrap().algebra().clone();
        let gens = builders::so3_generators();
        let v = alg.matrix_inner(&gens[0], &gens[0]).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn bracket_is_alternating_and_abelian_for_torus() {
        let g = builders::so(3, InnerForm::default()).unwrap();
        let x = AlgebraElement::new(g.algebra().clone(), DVector::from_vec(vec![0.3, -1.0, 2.0]))
            .unwrap();
        assert!(bracket(&x, &x).unwrap().norm() < 1e-15);
        let t = builders::torus(3, InnerForm::default()).unwrap();
        let a = AlgebraElement::new(t.algebra().clone(), DVector::from_vec(vec![1.0, 2.0, 3.0]))
            .unwrap();
        let b = AlgebraElement::new(t.algebra().clone(), DVector::from_vec(vec![-1.0, 0.5, 0.0]))
            .unwrap();
        assert!(bracket(&a, &b).unwrap().norm() < 1e-15);
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = builders::so(3, InnerForm::default()).unwrap();
        let b = builders::su(2, InnerForm::default()).unwrap();
        let x = AlgebraElement::basis_vector(a.algebra().clone(), 0);
        let y = AlgebraElement::basis_vector(b.algebra().clone(), 0);
        assert!(matches!(bracket(&x, &y), Err(Error::AlgebraMismatch { .. })));
        assert!(matches!(inner(&x, &y), Err(Error::AlgebraMismatch { .. })));
    }

    #[test]
    fn projection_examples() {
        let g = builders::so(3, InnerForm::default()).unwrap();
        let alg = g.algebra().clone();
        let x = AlgebraElement::new(alg.clone(), DVector::from_vec(vec![1.0, 0.0, 2.0])).unwrap();
        let e3 = AlgebraElement::basis_vector(alg.clone(), 2);
        let p = project(&x, &[e3]).unwrap();
        assert_eq!(p.coeffs().as_slice(), &[0.0, 0.0, 2.0]);
        assert!(project(&x, &[]).unwrap().norm() == 0.0);
        let full: Vec<_> = (0..3).map(|i| AlgebraElement::basis_vector(alg.clone(), i)).collect();
        assert!((project(&x, &full).unwrap().coeffs() - x.coeffs()).norm() < 1e-15);
        let bad = x.clone();
        assert!(matches!(project(&x, &[bad]), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn center_splits() {
        let so3 = builders::so(3, InnerForm::default()).unwrap();
        let s = split_center(so3.algebra()).unwrap();
        assert_eq!((s.center.len(), s.semisimple.len()), (0, 3));

        let u2 = builders::u(2, InnerForm::default()).unwrap();
        let s = split_center(u2.algebra()).unwrap();
        assert_eq!((s.center.len(), s.semisimple.len()), (1, 3));
        // the center is spanned by i * I
        let c = u2.algebra().matrix_of(s.center[0].as_slice());
        let j = builders::complex_structure(2);
        let ratio = c[(2, 0)] / j[(2, 0)];
        assert!((c - j * ratio).norm() < 1e-12);

        let t = builders::torus(2, InnerForm::default()).unwrap();
        let s = split_center(t.algebra()).unwrap();
        assert_eq!((s.center.len(), s.semisimple.len()), (2, 0));
    }

    #[test]
    fn killing_form_requires_semisimple() {
        assert!(builders::u(2, InnerForm::NegKilling { scale: 1.0 }).is_err());
        let g = builders::su(2, InnerForm::NegKilling { scale: 1.0 }).unwrap();
        assert!(g.algebra().gram_defect() < 1e-12);
        assert!(g.algebra().is_negative_killing_multiple(1e-10));
    }
}
