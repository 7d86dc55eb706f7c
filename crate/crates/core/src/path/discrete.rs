use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lie::algebra::{check_same, AlgebraElement, LieAlgebra};

/// Grids are uniform and dyadic so that reversal `t -> 1 - t` maps cells to cells.
pub fn check_grid(n: usize) -> Result<()> {
    if n >= 2 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(n))
    }
}

/// Midpoint of cell `i` on an `n`-cell grid.
pub fn t_mid(n: usize, i: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// A piecewise-constant path `[0,1] -> g`, constant on each of `n` cells.
#[derive(Debug, Clone)]
pub struct DiscretePath {
    algebra: Arc<LieAlgebra>,
    n: usize,
    /// Row-major: cell `i` occupies `values[i*d .. (i+1)*d]`.
    values: Vec<f64>,
}

impl PartialEq for DiscretePath {
    fn eq(&self, other: &Self) -> bool {
        *self.algebra == *other.algebra && self.n == other.n && self.values == other.values
    }
}

impl DiscretePath {
    pub fn new(algebra: Arc<LieAlgebra>, n: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(n)?;
        let d = algebra.dim();
        if values.len() != n * d {
            return Err(Error::InvalidSpec(format!(
                "path needs {} values, got {}",
                n * d,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite path value".into()));
        }
        Ok(Self { algebra, n, values })
    }

    pub(crate) fn from_parts(algebra: Arc<LieAlgebra>, n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * algebra.dim());
        Self { algebra, n, values }
    }

    pub fn zeros(algebra: Arc<LieAlgebra>, n: usize) -> Result<Self> {
        check_grid(n)?;
        let d = algebra.dim();
        Ok(Self { algebra, n, values: vec![0.0; n * d] })
    }

    pub fn constant(x: &AlgebraElement, n: usize) -> Result<Self> {
        check_grid(n)?;
        let mut values = Vec::with_capacity(n * x.coeffs().len());
        for _ in 0..n {
            values.extend_from_slice(x.coeffs().as_slice());
        }
        Ok(Self { algebra: x.algebra().clone(), n, values })
    }

    /// Sample `f` at the cell midpoints.
    pub fn from_fn(
        algebra: Arc<LieAlgebra>,
        n: usize,
        f: impl Fn(f64) -> DVector<f64>,
    ) -> Result<Self> {
        check_grid(n)?;
        let d = algebra.dim();
        let mut values = Vec::with_capacity(n * d);
        for i in 0..n {
            let v = f(t_mid(n, i));
            if v.len() != d {
                return Err(Error::InvalidSpec("sample has the wrong dimension".into()));
            }
            values.extend_from_slice(v.as_slice());
        }
        Self::new(algebra, n, values)
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn value_element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::new(self.algebra.clone(), DVector::from_column_slice(self.value(i)))
            .expect("path values are finite and sized")
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self::from_parts(self.algebra.clone(), self.n, values)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_same(&self.algebra, &other.algebra)?;
        if self.n != other.n {
            return Err(Error::GridMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_values(self.values.iter().map(|v| v * s).collect())
    }

    /// Grid mean, i.e. the exact integral of the piecewise-constant path.
    pub fn mean(&self) -> DVector<f64> {
        DVector::from_vec(mean_flat(&self.values, self.n, self.dim()))
    }

    pub fn mean_element(&self) -> AlgebraElement {
        AlgebraElement::new(self.algebra.clone(), self.mean()).expect("finite mean")
    }

    /// Cell averages of `t -> int_0^t X`: `h (sum_{j<i} X_j + X_i / 2)`.
    pub fn prefix_integral(&self) -> Self {
        self.with_values(prefix_integral_flat(&self.values, self.n, self.dim()))
    }

    /// L2 norm, summed over mirrored cell pairs so that it is exactly reversal invariant.
    pub fn norm(&self) -> f64 {
        let d = self.dim();
        let cell = |i: usize| self.values[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>();
        let total: f64 = (0..self.n / 2).map(|i| cell(i) + cell(self.n - 1 - i)).sum();
        (total / self.n as f64).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn mean_flat(values: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d];
    for i in 0..n {
        for a in 0..d {
            m[a] += values[i * d + a];
        }
    }
    m.iter_mut().for_each(|v| *v /= n as f64);
    m
}

pub(crate) fn prefix_integral_flat(values: &[f64], n: usize, d: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut out = vec![0.0; n * d];
    let mut acc = vec![0.0; d];
    for i in 0..n {
        for a in 0..d {
            let x = values[i * d + a];
            out[i * d + a] = h * (acc[a] + 0.5 * x);
            acc[a] += x;
        }
    }
    out
}

/// `(1/n) sum_i <u_i, v_i>`.
pub fn l2_inner(u: &DiscretePath, v: &DiscretePath) -> Result<f64> {
    u.check_compatible(v)?;
    Ok(u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum::<f64>() / u.n as f64)
}

/// `u -> -u(1 - t)`.
pub fn canonical_reflection(u: &DiscretePath) -> DiscretePath {
    let d = u.dim();
    let n = u.n;
    let mut values = vec![0.0; n * d];
    for i in 0..n {
        let src = u.value(n - 1 - i);
        for a in 0..d {
            values[i * d + a] = -src[a];
        }
    }
    u.with_values(values)
}

/// Split into the mean (horizontal) and the zero-mean remainder (vertical).
pub fn split_horizontal(x: &DiscretePath) -> (AlgebraElement, DiscretePath) {
    let d = x.dim();
    let m = mean_flat(&x.values, x.n, d);
    let mut vertical = x.values.clone();
    for i in 0..x.n {
        for a in 0..d {
            vertical[i * d + a] -= m[a];
        }
    }
    let horizontal =
        AlgebraElement::new(x.algebra.clone(), DVector::from_vec(m)).expect("finite mean");
    (horizontal, x.with_values(vertical))
}
