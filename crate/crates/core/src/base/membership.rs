//! Numerical orbit membership: is `b` in `H . a = { b1 a b2^{-1} : (b1, b2) in H }`?

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::lie::algebra::LieAlgebra;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipOptions {
    /// Member iff the achieved distance is below this.
    pub tol: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self { tol: 1e-6, restarts: 8, max_iter: 500, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    Member { distance: f64 },
    /// Certified: every restart converged to a stationary point farther than `10 tol`.
    NonMember { distance: f64 },
    Inconclusive { distance: f64 },
}

impl Membership {
    pub fn distance(&self) -> f64 {
        match *self {
            Membership::Member { distance }
            | Membership::NonMember { distance }
            | Membership::Inconclusive { distance } => distance,
        }
    }

    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Riemannian distance `|log(b^{-1} p)|` in the algebra norm, falling back to
/// the chordal (Frobenius) distance when the logarithm is undefined.
pub fn group_distance(algebra: &LieAlgebra, p: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let rel = b.transpose() * p;
    match linalg::logm(&rel) {
        Ok(l) => {
            let (c, residual) = algebra.coeffs_with_residual(&l);
            if residual < 1e-8 * (1.0 + l.norm()) {
                c.norm()
            } else {
                (p - b).norm()
            }
        }
        Err(_) => (p - b).norm(),
    }
}

struct Run {
    distance: f64,
    stationary: bool,
}

/// Gauss-Newton on `|b1 a b2^T - b|_F^2` over `(b1, b2) = (B1 exp x, B2 exp y)`,
/// `(x, y)` in the span of `pairs`, with Armijo backtracking.
pub fn orbit_membership(
    algebra: &LieAlgebra,
    pairs: &[(DVector<f64>, DVector<f64>)],
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    opts: &MembershipOptions,
) -> Membership {
    let first = group_distance(algebra, a, b);
    if first < opts.tol * 1e-3 || pairs.is_empty() {
        return classify(first, true, opts);
    }
    let xs: Vec<DMatrix<f64>> = pairs.iter().map(|(x, _)| algebra.matrix_of(x.as_slice())).collect();
    let ys: Vec<DMatrix<f64>> = pairs.iter().map(|(_, y)| algebra.matrix_of(y.as_slice())).collect();
    let size = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = f64::INFINITY;
    let mut all_stationary = true;
    for restart in 0..opts.restarts.max(1) {
        let (b1, b2) = if restart == 0 {
            (DMatrix::identity(size, size), DMatrix::identity(size, size))
        } else {
            random_start(&xs, &ys, &mut rng)
        };
        let run = descend(algebra, &xs, &ys, a, b, b1, b2, opts.max_iter);
        best = best.min(run.distance);
        all_stationary &= run.stationary;
        if best < opts.tol * 1e-3 {
            break;
        }
    }
    classify(best, all_stationary, opts)
}

fn classify(distance: f64, stationary: bool, opts: &MembershipOptions) -> Membership {
    if distance < opts.tol {
        Membership::Member { distance }
    } else if distance > 10.0 * opts.tol && stationary {
        Membership::NonMember { distance }
    } else {
        Membership::Inconclusive { distance }
    }
}

fn random_start(
    xs: &[DMatrix<f64>],
    ys: &[DMatrix<f64>],
    rng: &mut ChaCha8Rng,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let c: Vec<f64> = (0..xs.len()).map(|_| rng.sample(StandardNormal)).collect();
    let x = combine(xs, &c, 1.0);
    let y = combine(ys, &c, 1.0);
    let size = linalg::spectral_norm(&x).max(linalg::spectral_norm(&y)).max(1e-12);
    let angle = rng.gen_range(0.0..std::f64::consts::PI);
    let s = angle / size;
    (linalg::expm(&(x * s)), linalg::expm(&(y * s)))
}

fn combine(ms: &[DMatrix<f64>], c: &[f64], s: f64) -> DMatrix<f64> {
    let n = ms[0].nrows();
    let mut out = DMatrix::zeros(n, n);
    for (m, ci) in ms.iter().zip(c) {
        out += m * (ci * s);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn descend(
    algebra: &LieAlgebra,
    xs: &[DMatrix<f64>],
    ys: &[DMatrix<f64>],
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    mut b1: DMatrix<f64>,
    mut b2: DMatrix<f64>,
    max_iter: usize,
) -> Run {
    let k = xs.len();
    let size = a.nrows();
    let mut stationary = false;
    for _ in 0..max_iter {
        let p = &b1 * a * b2.transpose();
        let r = &p - b;
        let f = r.norm_squared();
        if f < 1e-30 {
            stationary = true;
            break;
        }
        let mut jac = DMatrix::zeros(size * size, k);
        let left = &b1 * a;
        for j in 0..k {
            let col = &b1 * &xs[j] * a * b2.transpose() - &left * &ys[j] * b2.transpose();
            jac.set_column(j, &DVector::from_column_slice(col.as_slice()));
        }
        let rv = DVector::from_column_slice(r.as_slice());
        let grad = jac.transpose() * &rv;
        if grad.norm() < 1e-13 {
            stationary = true;
            break;
        }
        let mut delta = -linalg::svd(&jac).solve(&rv, 1e-12);
        let mut slope = 2.0 * grad.dot(&delta);
        if slope >= 0.0 {
            delta = -grad.clone();
            slope = -2.0 * grad.norm_squared();
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-12 {
            let nb1 = &b1 * linalg::expm(&combine(xs, delta.as_slice(), alpha));
            let nb2 = &b2 * linalg::expm(&combine(ys, delta.as_slice(), alpha));
            let nf = (&nb1 * a * nb2.transpose() - b).norm_squared();
            if nf <= f + 1e-4 * alpha * slope {
                let tiny = (f - nf).abs() <= 1e-15 * f.max(1e-300) && alpha * delta.norm() < 1e-12;
                b1 = nb1;
                b2 = nb2;
                accepted = true;
                if tiny {
                    stationary = true;
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted || stationary {
            // no descent is possible along the Gauss-Newton or gradient direction
            stationary = stationary || grad.norm() < 1e-8;
            break;
        }
    }
    if !stationary {
        let p = &b1 * a * b2.transpose();
        stationary = final_gradient(xs, ys, a, b, &b1, &b2, &p) < 1e-8;
    }
    let p = &b1 * a * b2.transpose();
    Run { distance: group_distance(algebra, &p, b), stationary }
}

fn final_gradient(
    xs: &[DMatrix<f64>],
    ys: &[DMatrix<f64>],
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    b1: &DMatrix<f64>,
    b2: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> f64 {
    let r = p - b;
    let mut g = 0.0f64;
    for (x, y) in xs.iter().zip(ys) {
        let col = b1 * x * a * b2.transpose() - b1 * a * y * b2.transpose();
        g += col.dot(&r).powi(2);
    }
    g.sqrt()
}
