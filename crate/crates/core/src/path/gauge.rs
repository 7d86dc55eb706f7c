use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::algebra::{check_same, LieAlgebra};
use crate::lie::group::{adjoint_matrix, GroupElement, LieGroup};
use crate::linalg;
use crate::path::discrete::{check_grid, DiscretePath};

/// Largest admissible rotation angle between consecutive nodes.
pub const MAX_STEP_ANGLE: f64 = FRAC_PI_4;

/// A gauge path `g: [0,1] -> G` stored at the nodes `t = i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePath {
    algebra: Arc<LieAlgebra>,
    nodes: Vec<DMatrix<f64>>,
}

impl GaugePath {
    pub fn new(group: &LieGroup, nodes: Vec<DMatrix<f64>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGrid(0));
        }
        check_grid(nodes.len() - 1)?;
        for g in &nodes {
            let defect = group.membership_defect(g);
            if defect > 1e-10 {
                return Err(Error::NotInGroup { defect });
            }
        }
        let path = Self { algebra: group.algebra().clone(), nodes };
        path.check_steps()?;
        Ok(path)
    }

    /// Internal constructor for nodes produced by exact group operations.
    pub(crate) fn from_nodes(algebra: Arc<LieAlgebra>, nodes: Vec<DMatrix<f64>>) -> Result<Self> {
        check_grid(nodes.len() - 1)?;
        let path = Self { algebra, nodes };
        path.check_steps()?;
        Ok(path)
    }

    fn check_steps(&self) -> Result<()> {
        for w in self.nodes.windows(2) {
            let step = linalg::rotation_angle(&(w[0].transpose() * &w[1]));
            if step > MAX_STEP_ANGLE {
                return Err(Error::RefineGrid { step });
            }
        }
        Ok(())
    }

    pub fn constant(group: &LieGroup, b: &GroupElement, n: usize) -> Result<Self> {
        check_grid(n)?;
        Self::new(group, vec![b.matrix.clone(); n + 1])
    }

    /// Nodes `g(i/n)` from a closure.
    pub fn from_fn(group: &LieGroup, n: usize, f: impl Fn(f64) -> DMatrix<f64>) -> Result<Self> {
        check_grid(n)?;
        Self::new(group, (0..=n).map(|i| f(i as f64 / n as f64)).collect())
    }

    /// `g(t) = exp(Z(t))` with `Z` given in basis coefficients.
    pub fn pointwise_exp(
        group: &LieGroup,
        n: usize,
        z: impl Fn(f64) -> DVector<f64>,
    ) -> Result<Self> {
        let alg = group.algebra().clone();
        Self::from_fn(group, n, |t| linalg::expm(&alg.matrix_of(z(t).as_slice())))
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[DMatrix<f64>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> GroupElement {
        GroupElement::from_matrix_unchecked(self.nodes[i].clone())
    }

    pub fn start(&self) -> GroupElement {
        self.node(0)
    }

    pub fn end(&self) -> GroupElement {
        self.node(self.n())
    }

    /// Geodesic midpoint of cell `i`: `g_i exp(log(g_i^{-1} g_{i+1}) / 2)`.
    pub fn midpoint(&self, i: usize) -> Result<DMatrix<f64>> {
        let g = &self.nodes[i];
        let l = linalg::logm(&(g.transpose() * &self.nodes[i + 1]))?;
        Ok(g * linalg::expm(&(l * 0.5)))
    }

    /// `g_#(t) = g(1 - t)`.
    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self { algebra: self.algebra.clone(), nodes }
    }

    /// Pointwise product `(g h)(t) = g(t) h(t)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_same(&self.algebra, &other.algebra)?;
        if self.n() != other.n() {
            return Err(Error::GridMismatch { left: self.n(), right: other.n() });
        }
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(a, b)| a * b).collect();
        Self::from_nodes(self.algebra.clone(), nodes)
    }

    /// Pointwise image under a group automorphism `a -> P a P^T`.
    pub fn map_ambient(&self, p: &DMatrix<f64>) -> Self {
        let pt = p.transpose();
        let nodes = self.nodes.iter().map(|g| p * g * &pt).collect();
        Self { algebra: self.algebra.clone(), nodes }
    }
}

fn check_pair(g: &GaugePath, u: &DiscretePath) -> Result<()> {
    check_same(g.algebra(), u.algebra())?;
    if g.n() != u.n() {
        return Err(Error::GridMismatch { left: g.n(), right: u.n() });
    }
    Ok(())
}

/// Gauge transformation `g * u = g u g^{-1} - g' g^{-1}`.
///
/// On cell `i` the transformed value is `log(g_i exp(h u_i) g_{i+1}^{-1}) / h`,
/// which is the unique piecewise-constant path whose cell propagators are
/// `g_i exp(h u_i) g_{i+1}^{-1}`. Agrees with the midpoint formula (see
/// [`gauge_act_midpoint`]) to `O(n^-2)` and makes `Phi(g * u) = g(0) Phi(u) g(1)^{-1}`
/// and `(gh) * u = g * (h * u)` hold exactly on the grid.
pub fn gauge_act(g: &GaugePath, u: &DiscretePath) -> Result<DiscretePath> {
    check_pair(g, u)?;
    let alg = u.algebra();
    let n = u.n();
    let h = u.step();
    let mut values = Vec::with_capacity(n * alg.dim());
    for i in 0..n {
        let step = linalg::expm(&(alg.matrix_of(u.value(i)) * h));
        let prop = &g.nodes[i] * step * g.nodes[i + 1].transpose();
        let angle = linalg::rotation_angle(&prop);
        if angle > 2.0 * MAX_STEP_ANGLE {
            return Err(Error::RefineGrid { step: angle });
        }
        let l = linalg::logm(&prop)?;
        let c = alg.coeffs_of(&l)?;
        values.extend(c.iter().map(|v| v / h));
    }
    DiscretePath::new(alg.clone(), n, values)
}

/// Literal gauge transformation: `m u m^{-1} - g'(m) m^{-1}` at the cell midpoints `m`,
/// with `g'` from the log-increment of the adjacent nodes.
pub fn gauge_act_midpoint(g: &GaugePath, u: &DiscretePath) -> Result<DiscretePath> {
    check_pair(g, u)?;
    let alg = u.algebra();
    let n = u.n();
    let mut values = Vec::with_capacity(n * alg.dim());
    for i in 0..n {
        let gi = &g.nodes[i];
        let l = linalg::logm(&(gi.transpose() * &g.nodes[i + 1]))?;
        let m = gi * linalg::expm(&(&l * 0.5));
        // m l m^{-1} = g_i l g_i^{-1} since m = g_i exp(l / 2)
        let v = &m * alg.matrix_of(u.value(i)) * m.transpose() - gi * &l * gi.transpose() * n as f64;
        values.extend(alg.coeffs_of(&v)?.iter());
    }
    DiscretePath::new(alg.clone(), n, values)
}

/// Differential of the gauge action on tangent vectors: `X -> g X g^{-1}` at the cell midpoints.
pub fn gauge_push_tangent(g: &GaugePath, x: &DiscretePath) -> Result<DiscretePath> {
    check_pair(g, x)?;
    let alg = x.algebra();
    let d = alg.dim();
    let mut values = Vec::with_capacity(x.n() * d);
    for i in 0..x.n() {
        let ad = adjoint_matrix(alg, &g.midpoint(i)?)?;
        values.extend((ad * DVector::from_column_slice(x.value(i))).iter());
    }
    DiscretePath::new(alg.clone(), x.n(), values)
}
