//! Reference computations that share no formulas with the geometry modules:
//! finite differences of a level-set description and a grid-level fiber operator.

use nalgebra::{DMatrix, DVector};

use crate::base::orbit::{NSpec, OrbitGeometry};
use crate::error::{Error, Result};
use crate::lie::algebra::{check_same, LieAlgebra};
use crate::linalg;
use crate::path::develop::phi;
use crate::path::discrete::DiscretePath;

/// Default finite-difference step; halved once for Richardson extrapolation.
pub const FD_STEP: f64 = 1e-2;

/// `F: G -> T_e^perp N` vanishing on `N` near `e`, with `dF_e` the normal projection.
///
/// `F(p)` is the normal part of `log(exp(-x) p exp(y))`, where `(x, y)` in `h`
/// lifts the tangent vector `c` chosen so that the tangential part vanishes.
pub struct LevelSet<'a> {
    orbit: &'a OrbitGeometry,
}

impl<'a> LevelSet<'a> {
    pub fn new(orbit: &'a OrbitGeometry) -> Self {
        Self { orbit }
    }

    fn alg(&self) -> &LieAlgebra {
        self.orbit.group().algebra()
    }

    fn exp(&self, v: &DVector<f64>) -> DMatrix<f64> {
        linalg::expm(&self.alg().matrix_of(v.as_slice()))
    }

    /// Coordinates of `F(p)` on the orthonormal normal basis.
    pub fn eval(&self, p: &DMatrix<f64>) -> Result<DVector<f64>> {
        let d = self.alg().dim();
        let mut c = DVector::zeros(d);
        for _ in 0..100 {
            let (x, y) = self.orbit.lift(&c);
            let q = self.exp(&(-x)) * p * self.exp(&y);
            let (l, _) = self.alg().coeffs_with_residual(&linalg::logm(&q)?);
            let t = self.orbit.project_tangent(&l);
            if t.norm() <= 1e-16 * (1.0 + l.norm()) {
                let normal = self.orbit.normal();
                return Ok(DVector::from_iterator(normal.len(), normal.iter().map(|xi| xi.dot(&l))));
            }
            c += t;
        }
        Err(Error::Hypothesis("level-set projection did not converge".into()))
    }

    fn to_algebra(&self, coords: &DVector<f64>) -> DVector<f64> {
        let d = self.alg().dim();
        self.orbit.normal().iter().zip(coords.iter()).fold(DVector::zeros(d), |acc, (xi, c)| acc + xi * *c)
    }
}

fn richardson(coarse: DVector<f64>, fine: DVector<f64>) -> DVector<f64> {
    (fine * 4.0 - coarse) / 3.0
}

/// Second fundamental form of `N` at `e` from second differences of `F` along geodesics.
pub fn fd_sff_base(orbit: &OrbitGeometry, v: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    let f = LevelSet::new(orbit);
    let second = |z: &DVector<f64>, a: f64| -> Result<DVector<f64>> {
        Ok((f.eval(&f.exp(&(z * a)))? + f.eval(&f.exp(&(z * -a)))?) / (a * a))
    };
    let hess = |a: f64| -> Result<DVector<f64>> {
        Ok((second(&(v + w), a)? - second(&(v - w), a)?) / 4.0)
    };
    let h = richardson(hess(FD_STEP)?, hess(FD_STEP / 2.0)?);
    Ok(-f.to_algebra(&h))
}

/// Second fundamental form of `Phi^{-1}(N)` at the zero path from mixed second
/// differences of `F(Phi(u))` along `u = sX + tY`.
pub fn fd_sff_preimage(n_spec: &NSpec, x: &DiscretePath, y: &DiscretePath) -> Result<DVector<f64>> {
    check_same(x.algebra(), n_spec.group().algebra())?;
    let f = LevelSet::new(n_spec.orbit());
    let at = |s: f64, t: f64| -> Result<DVector<f64>> {
        let u = x.scaled(s).add(&y.scaled(t))?;
        f.eval(&phi(&u)?.matrix)
    };
    let hess = |a: f64| -> Result<DVector<f64>> {
        Ok((at(a, a)? - at(a, -a)? - at(-a, a)? + at(-a, -a)?) / (4.0 * a * a))
    };
    let h = richardson(hess(FD_STEP)?, hess(FD_STEP / 2.0)?);
    Ok(-f.to_algebra(&h))
}

/// Dense `nd x nd` matrix of the fiber operator on the grid:
/// `X -> P0 (h W (x) R) P0 X` with `W` the cell-averaged integration weights,
/// `R v = [v, xi]` and `P0` the removal of the grid mean.
pub fn grid_fiber_operator(alg: &LieAlgebra, xi: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let d = alg.dim();
    let h = 1.0 / n as f64;
    let mut r = DMatrix::zeros(d, d);
    for a in 0..d {
        let e = linalg::unit(d, a);
        r.set_column(a, &alg.bracket_coeffs(&e, xi));
    }
    let w = DMatrix::from_fn(n, n, |i, j| {
        if j < i {
            h
        } else if j == i {
            0.5 * h
        } else {
            0.0
        }
    });
    let p0 = DMatrix::identity(n, n) - DMatrix::from_element(n, n, h);
    let pw = &p0 * w * &p0;
    let mut k = DMatrix::zeros(n * d, n * d);
    for i in 0..n {
        for j in 0..n {
            let c = pw[(i, j)];
            if c != 0.0 {
                k.view_mut((i * d, j * d), (d, d)).copy_from(&(&r * c));
            }
        }
    }
    k
}

/// Eigenvalues of the symmetric part of the grid fiber operator, descending.
pub fn grid_fiber_eigenvalues(alg: &LieAlgebra, xi: &DVector<f64>, n: usize) -> Result<Vec<f64>> {
    let k = grid_fiber_operator(alg, xi, n);
    let sym = (&k + k.transpose()) * 0.5;
    linalg::symmetric_eigenvalues(&sym)
}
