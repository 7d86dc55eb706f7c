use std::sync::Arc;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::lie::algebra::{AlgebraElement, LieAlgebra};
use crate::linalg;

/// Default tolerance for group membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupKind {
    SpecialOrthogonal(usize),
    SpecialUnitary(usize),
    Unitary(usize),
    Torus(usize),
    Product(Vec<LieGroup>),
    /// Connected group generated by a user-supplied skew basis.
    Custom,
}

/// A compact connected matrix group, realized by real orthogonal matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LieGroup {
    kind: GroupKind,
    algebra: Arc<LieAlgebra>,
}

impl LieGroup {
    pub(crate) fn new(kind: GroupKind, algebra: LieAlgebra) -> Self {
        Self { kind, algebra: Arc::new(algebra) }
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn name(&self) -> &str {
        self.algebra.name()
    }

    pub fn matrix_size(&self) -> usize {
        self.algebra.matrix_size()
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.matrix_size())
    }

    /// Sum of the defects relevant to this group (orthogonality, determinant, block shape).
    pub fn membership_defect(&self, g: &DMatrix<f64>) -> f64 {
        let n = self.matrix_size();
        if g.nrows() != n || g.ncols() != n {
            return f64::INFINITY;
        }
        let orth = orthogonality_defect(g);
        match &self.kind {
            GroupKind::SpecialOrthogonal(_) | GroupKind::Custom => {
                orth + (g.determinant() - 1.0).abs()
            }
            GroupKind::Unitary(k) => orth + complex_structure_defect(g, *k),
            GroupKind::SpecialUnitary(k) => {
                let cdet = complex_determinant(g, *k);
                orth + complex_structure_defect(g, *k) + (cdet - Complex::new(1.0, 0.0)).norm()
            }
            GroupKind::Torus(k) => {
                let mut off = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        if i / 2 != j / 2 {
                            off = off.max(g[(i, j)].abs());
                        }
                    }
                }
                let mut shape = 0.0f64;
                for b in 0..*k {
                    let (c, s) = (g[(2 * b, 2 * b)], g[(2 * b + 1, 2 * b)]);
                    shape = shape
                        .max((g[(2 * b + 1, 2 * b + 1)] - c).abs())
                        .max((g[(2 * b, 2 * b + 1)] + s).abs());
                }
                orth + off + shape
            }
            GroupKind::Product(factors) => {
                let mut total = 0.0;
                let mut start = 0;
                for f in factors {
                    let m = f.matrix_size();
                    let block = g.view((start, start), (m, m)).into_owned();
                    total += f.membership_defect(&block);
                    for i in 0..n {
                        for j in start..start + m {
                            if i < start || i >= start + m {
                                total += g[(i, j)].abs() + g[(j, i)].abs();
                            }
                        }
                    }
                    start += m;
                }
                total
            }
        }
    }

    pub fn element(&self, m: DMatrix<f64>) -> Result<GroupElement> {
        let defect = self.membership_defect(&m);
        if defect > MEMBERSHIP_TOL {
            return Err(Error::NotInGroup { defect });
        }
        Ok(GroupElement { matrix: m })
    }
}

pub(crate) fn orthogonality_defect(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    (g.transpose() * g - DMatrix::<f64>::identity(n, n)).norm()
}

/// Complex structure `J = [[0, -I], [I, 0]]` on R^{2k}.
pub fn complex_structure(k: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(k + i, i)] = 1.0;
        j[(i, k + i)] = -1.0;
    }
    j
}

fn complex_structure_defect(g: &DMatrix<f64>, k: usize) -> f64 {
    let j = complex_structure(k);
    (g * &j - &j * g).norm()
}

/// Determinant of the complex matrix `A + iB` stored as `[[A, -B], [B, A]]`.
pub fn complex_determinant(g: &DMatrix<f64>, k: usize) -> Complex<f64> {
    let c = DMatrix::from_fn(k, k, |i, j| Complex::new(g[(i, j)], g[(k + i, j)]));
    c.determinant()
}

/// Realify a complex matrix: `A + iB -> [[A, -B], [B, A]]`.
pub fn realify(c: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let k = c.nrows();
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let z = c[(i, j)];
            m[(i, j)] = z.re;
            m[(k + i, k + j)] = z.re;
            m[(k + i, j)] = z.im;
            m[(i, k + j)] = -z.im;
        }
    }
    m
}

/// An element of a matrix group (a real orthogonal matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n) }
    }

    /// Wrap a matrix without checking membership.
    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }

    pub fn distance_to(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    /// Coefficients of `log(g)` in the algebra.
    pub fn log(&self, algebra: &Arc<LieAlgebra>) -> Result<AlgebraElement> {
        let l = linalg::logm(&self.matrix)?;
        AlgebraElement::from_matrix(algebra.clone(), &l)
    }
}

pub fn exp_map(x: &AlgebraElement) -> GroupElement {
    GroupElement { matrix: linalg::expm(&x.matrix()) }
}

/// `g x g^{-1}`.
pub fn adjoint(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
    let m = &g.matrix * x.matrix() * g.matrix.transpose();
    AlgebraElement::from_matrix(x.algebra().clone(), &m)
}

/// Matrix of `Ad_g` in the orthonormal basis.
pub fn adjoint_matrix(algebra: &LieAlgebra, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = algebra.dim();
    let mut out = DMatrix::zeros(d, d);
    let gt = g.transpose();
    for (i, e) in algebra.basis().iter().enumerate() {
        let c = algebra.coeffs_of(&(g * e * &gt))?;
        out.set_column(i, &c);
    }
    Ok(out)
}
