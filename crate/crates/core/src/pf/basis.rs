use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::algebra::LieAlgebra;
use crate::linalg;
use crate::path::discrete::{check_grid, t_mid, DiscretePath};

/// Orthonormal truncated basis of a tangent space at the zero path: constant
/// (horizontal) paths followed by fiber modes `-sqrt 2 cos(k pi t) e_a`, the
/// normalized `-Q'` for `Q = sin(k pi t) e_a`.
///
/// Column order: horizontal vectors, then for `k = 1..=modes`, for `a = 0..d`.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    algebra: Arc<LieAlgebra>,
    n: usize,
    modes: usize,
    horizontal: Vec<DVector<f64>>,
    /// `n*d x dim`, one flattened path per column.
    columns: DMatrix<f64>,
}

impl TangentBasis {
    /// `horizontal` must be orthonormal in `g`.
    pub fn new(algebra: Arc<LieAlgebra>, horizontal: &[DVector<f64>], modes: usize, n: usize) -> Result<Self> {
        check_grid(n)?;
        if modes >= 1 && n < 4 * modes {
            return Err(Error::TooFewGridPoints { n, required: 4 * modes });
        }
        let d = algebra.dim();
        if horizontal.iter().any(|x| x.len() != d) {
            return Err(Error::AlgebraMismatch {
                left: algebra.name().to_string(),
                right: "horizontal vector of wrong size".into(),
            });
        }
        let defect = linalg::gram_defect(horizontal);
        if defect > 1e-10 {
            return Err(Error::NotOrthonormal { defect });
        }
        let dim = horizontal.len() + modes * d;
        let mut columns = DMatrix::zeros(n * d, dim);
        for (j, x) in horizontal.iter().enumerate() {
            for i in 0..n {
                for a in 0..d {
                    columns[(i * d + a, j)] = x[a];
                }
            }
        }
        let h0 = horizontal.len();
        for k in 1..=modes {
            let profile: Vec<f64> =
                (0..n).map(|i| -(2f64).sqrt() * (k as f64 * PI * t_mid(n, i)).cos()).collect();
            for a in 0..d {
                let j = h0 + (k - 1) * d + a;
                for (i, p) in profile.iter().enumerate() {
                    columns[(i * d + a, j)] = *p;
                }
            }
        }
        Ok(Self { algebra, n, modes, horizontal: horizontal.to_vec(), columns })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn horizontal(&self) -> &[DVector<f64>] {
        &self.horizontal
    }

    pub fn horizontal_dim(&self) -> usize {
        self.horizontal.len()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let len = self.columns.nrows();
        &self.columns.as_slice()[j * len..(j + 1) * len]
    }

    pub fn vector(&self, j: usize) -> DiscretePath {
        DiscretePath::from_parts(self.algebra.clone(), self.n, self.column(j).to_vec())
    }

    /// `(k, a)` of a fiber column, `None` for horizontal columns.
    pub fn mode_of(&self, j: usize) -> Option<(usize, usize)> {
        let d = self.algebra.dim();
        let h0 = self.horizontal.len();
        (j >= h0).then(|| ((j - h0) / d + 1, (j - h0) % d))
    }

    /// L2 coefficients of a path on the basis.
    pub fn coefficients(&self, x: &DiscretePath) -> Result<DVector<f64>> {
        if x.n() != self.n || x.dim() != self.algebra.dim() {
            return Err(Error::GridMismatch { left: self.n, right: x.n() });
        }
        let v = DVector::from_column_slice(x.values());
        Ok(self.columns.tr_mul(&v) / self.n as f64)
    }

    /// `sum_j c_j b_j`.
    pub fn combine(&self, c: &DVector<f64>) -> DiscretePath {
        let v = &self.columns * c;
        DiscretePath::from_parts(self.algebra.clone(), self.n, v.as_slice().to_vec())
    }

    pub fn gram(&self) -> DMatrix<f64> {
        self.columns.tr_mul(&self.columns) / self.n as f64
    }

    pub fn gram_defect(&self) -> f64 {
        (self.gram() - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// Largest grid mean over the fiber modes.
    pub fn max_fiber_mean(&self) -> f64 {
        let d = self.algebra.dim();
        (self.horizontal.len()..self.dim())
            .map(|j| {
                let m = crate::path::discrete::mean_flat(self.column(j), self.n, d);
                m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
            })
            .fold(0.0, f64::max)
    }
}

/// Pure fiber basis: `modes * dim g` modes on an `n`-cell grid.
pub fn fiber_basis(algebra: Arc<LieAlgebra>, modes: usize, n: usize) -> Result<TangentBasis> {
    if modes == 0 {
        return Err(Error::InvalidSpec("at least one fiber mode is required".into()));
    }
    TangentBasis::new(algebra, &[], modes, n)
}
