use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::algebra::LieAlgebra;
use crate::lie::group::GroupElement;
use crate::linalg;
use crate::path::discrete::{check_grid, DiscretePath};
use crate::path::gauge::{GaugePath, MAX_STEP_ANGLE};

/// `dexp^{-1}_{-theta}(u)` truncated after the second commutator, which is
/// enough for a fourth-order method.
fn dexpinv(alg: &LieAlgebra, theta: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    let c1 = alg.bracket_coeffs(theta, u);
    let c2 = alg.bracket_coeffs(theta, &c1);
    u + c1 * 0.5 + c2 / 12.0
}

/// One Runge-Kutta-Munthe-Kaas step for `E^{-1} E' = u`: returns the algebra
/// increment `theta` with `E(t + h) = E(t) exp(theta)`.
fn rkmk4_increment(
    alg: &LieAlgebra,
    h: f64,
    u0: &DVector<f64>,
    um: &DVector<f64>,
    u1: &DVector<f64>,
) -> DVector<f64> {
    let k1 = u0 * h;
    let k2 = dexpinv(alg, &(&k1 * 0.5), um) * h;
    let k3 = dexpinv(alg, &(&k2 * 0.5), um) * h;
    let k4 = dexpinv(alg, &k3, u1) * h;
    (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0
}

fn advance(alg: &LieAlgebra, y: &DMatrix<f64>, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
    let m = alg.matrix_of(theta.as_slice());
    let step = linalg::spectral_norm(&m);
    if step > MAX_STEP_ANGLE {
        return Err(Error::RefineGrid { step });
    }
    Ok(y * linalg::expm(&m))
}

/// Development `E_u` of a piecewise-constant path, `E(0) = e`.
///
/// Every RKMK stage sees the constant cell value, so each step is exactly
/// `exp(h u_i)` up to the accuracy of the matrix exponential.
pub fn develop(u: &DiscretePath) -> Result<GaugePath> {
    let alg = u.algebra();
    let n = u.n();
    let h = u.step();
    let size = alg.matrix_size();
    let mut nodes = Vec::with_capacity(n + 1);
    let mut y = DMatrix::identity(size, size);
    nodes.push(y.clone());
    for i in 0..n {
        let ui = DVector::from_column_slice(u.value(i));
        let theta = rkmk4_increment(alg, h, &ui, &ui, &ui);
        y = advance(alg, &y, &theta)?;
        nodes.push(y.clone());
    }
    GaugePath::from_nodes(alg.clone(), nodes)
}

/// Development of a smooth path given as a closure, with RKMK4 stages at
/// `t`, `t + h/2`, `t + h`. Returns the nodes `E(i/n)`.
pub fn develop_smooth(
    alg: &LieAlgebra,
    n: usize,
    u: impl Fn(f64) -> DVector<f64>,
) -> Result<Vec<DMatrix<f64>>> {
    check_grid(n)?;
    let h = 1.0 / n as f64;
    let size = alg.matrix_size();
    let mut nodes = Vec::with_capacity(n + 1);
    let mut y = DMatrix::identity(size, size);
    nodes.push(y.clone());
    for i in 0..n {
        let t = i as f64 * h;
        let theta = rkmk4_increment(alg, h, &u(t), &u(t + 0.5 * h), &u(t + h));
        y = advance(alg, &y, &theta)?;
        nodes.push(y.clone());
    }
    Ok(nodes)
}

/// `Phi(u) = E_u(1)`.
pub fn phi(u: &DiscretePath) -> Result<GroupElement> {
    Ok(develop(u)?.end())
}

/// Left-trivialized differential of the discrete `Phi` at `u`: the `d x n d`
/// matrix `J` with `Phi(u)^{-1} dPhi_u(Y) = J vec(Y)`.
///
/// Column block `i` is `h Ad(R_i^{-1}) (1 - e^{-ad A}) / ad A` with `A = h u_i`
/// and `R_i = exp(h u_{i+1}) ... exp(h u_{n-1})`.
pub fn phi_differential(u: &DiscretePath) -> Result<DMatrix<f64>> {
    let alg = u.algebra();
    let d = alg.dim();
    let n = u.n();
    let h = u.step();
    let size = alg.matrix_size();
    let mut j = DMatrix::zeros(d, n * d);
    let mut r = DMatrix::<f64>::identity(size, size);
    for i in (0..n).rev() {
        let ad = alg.ad_matrix(u.value(i)) * h;
        // (1 - e^{-ad}) / ad = sum_k (-ad)^k / (k+1)!
        let mut term = DMatrix::<f64>::identity(d, d);
        let mut series = term.clone();
        for k in 1..30 {
            term = -(&ad * &term) / (k as f64 + 1.0);
            series += &term;
            if term.amax() < 1e-18 {
                break;
            }
        }
        let ad_r = crate::lie::group::adjoint_matrix(alg, &r.transpose())?;
        j.view_mut((0, i * d), (d, d)).copy_from(&(ad_r * series * h));
        r = linalg::expm(&alg.matrix_of(&u.value(i).iter().map(|v| v * h).collect::<Vec<_>>())) * r;
    }
    Ok(j)
}
