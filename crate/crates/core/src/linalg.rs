//! Dense matrix helpers: exponential, logarithm and rank-revealing spans.
//!
//! Every group handled by this crate is represented by real orthogonal
//! matrices (complex groups are realified), so the inverse of a group
//! element is its transpose and the logarithm only has to cover normal
//! matrices with spectrum on the unit circle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values below this are treated as zero.
pub const RANK_ZERO: f64 = 1e-10;
/// Singular values above this are treated as nonzero; anything in between is ambiguous.
pub const RANK_NONZERO: f64 = 1e-6;

/// Matrix exponential.
///
/// 3x3 inputs use the Rodrigues formula and inputs with `x^2 = -theta^2 I`
/// (realified su(2), u(1)) use `cos(theta) I + sin(theta)/theta x`. Everything
/// else goes through scaling and squaring around a [6/6] Pade approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 3 && is_skew(a, 1e-13) {
        return rodrigues(a);
    }
    let sq = a * a;
    let theta2 = -sq.trace() / n as f64;
    if theta2 >= 0.0 {
        let mut defect = sq.clone();
        for i in 0..n {
            defect[(i, i)] += theta2;
        }
        if defect.norm() <= 1e-14 * (1.0 + theta2) {
            let theta = theta2.sqrt();
            let (s, c) = theta.sin_cos();
            let sinc = if theta < 1e-8 { 1.0 - theta2 / 6.0 } else { s / theta };
            return DMatrix::identity(n, n) * c + a * sinc;
        }
    }
    pade_expm(a)
}

fn is_skew(a: &DMatrix<f64>, tol: f64) -> bool {
    (a + a.transpose()).norm() <= tol * (1.0 + a.norm())
}

fn rodrigues(a: &DMatrix<f64>) -> DMatrix<f64> {
    let w = [a[(2, 1)], a[(0, 2)], a[(1, 0)]];
    let theta2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let theta = theta2.sqrt();
    let (s1, s2) = if theta < 1e-6 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    DMatrix::identity(3, 3) + a * s1 + (a * a) * s2
}

fn pade_expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const Q: usize = 6;
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);
    // c_k = (2q - k)! q! / ((2q)! k! (q - k)!)
    let mut c = [1.0; Q + 1];
    for k in 1..=Q {
        c[k] = c[k - 1] * ((Q - k + 1) as f64) / ((k * (2 * Q - k + 1)) as f64);
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let mut power = ident.clone();
    let mut num = ident.clone();
    let mut den = ident.clone();
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * *ck;
        if k % 2 == 0 {
            den += &power * *ck;
        } else {
            den -= &power * *ck;
        }
    }
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is well conditioned after scaling");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Principal logarithm of a real matrix with spectrum on the unit circle away from -1.
///
/// Uses inverse scaling and squaring: Denman-Beavers square roots until the
/// argument is close to the identity, then the `2 atanh` series.
pub fn logm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Logarithm("matrix is not square".into()));
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::Logarithm("matrix has non-finite entries".into()));
    }
    let ident = DMatrix::<f64>::identity(n, n);
    if svd(&(a + &ident)).s.min() < 1e-6 {
        return Err(Error::Logarithm("eigenvalue at -1, no principal logarithm".into()));
    }
    let mut y = a.clone();
    let mut roots = 0;
    while (&y - &ident).norm() > 0.25 {
        y = sqrtm(&y)?;
        roots += 1;
        if roots > 40 {
            return Err(Error::Logarithm("square-root cascade did not converge".into()));
        }
    }
    // log(y) = 2 atanh(z), z = (y - I)(y + I)^{-1}
    let denom = (&y + &ident)
        .try_inverse()
        .ok_or_else(|| Error::Logarithm("singular y + I".into()))?;
    let z = (&y - &ident) * denom;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..60 {
        term = &term * &z2;
        let contribution = &term / (2 * k + 1) as f64;
        let size = contribution.norm();
        sum += contribution;
        if size < 1e-18 {
            break;
        }
    }
    Ok(sum * 2.0 * 2f64.powi(roots))
}

/// Denman-Beavers iteration for the principal square root.
fn sqrtm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Logarithm("singular iterate in square root".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Logarithm("singular iterate in square root".into()))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let change = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Logarithm("square root diverged (eigenvalue near -1)".into()));
        }
        if change <= 1e-15 * (1.0 + y.norm()) {
            return Ok(y);
        }
    }
    Err(Error::Logarithm("square root did not converge".into()))
}

/// Orthonormal basis of the span of `vectors`, decided by SVD with a guard band.
///
/// Returns [`Error::DegenerateRank`] if any singular value falls inside
/// `[RANK_ZERO, RANK_NONZERO]`.
pub fn span_basis(vectors: &[DVector<f64>], dim: usize) -> Result<Vec<DVector<f64>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let m = DMatrix::from_columns(vectors);
    debug_assert_eq!(m.nrows(), dim);
    let Svd { u, s: sv, .. } = svd(&m);
    let mut out = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s > RANK_NONZERO {
            out.push(u.column(i).into_owned());
        } else if s >= RANK_ZERO {
            return Err(Error::DegenerateRank { sigma: s });
        }
    }
    Ok(canonical_signs(out))
}

/// Orthonormal basis of the kernel of `m` (columns index the domain).
pub fn null_space(m: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let dim = m.ncols();
    if dim == 0 {
        return Ok(Vec::new());
    }
    // pad with zero rows so the SVD returns a full set of right singular vectors
    let rows = m.nrows().max(dim);
    let mut padded = DMatrix::<f64>::zeros(rows, dim);
    padded.view_mut((0, 0), (m.nrows(), dim)).copy_from(m);
    let Svd { s: sv, v, .. } = svd(&padded);
    let mut out = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s < RANK_ZERO {
            out.push(v.column(i).into_owned());
        } else if s <= RANK_NONZERO {
            return Err(Error::DegenerateRank { sigma: s });
        }
    }
    Ok(canonical_signs(out))
}

/// Orthonormal basis of the orthogonal complement of an orthonormal family.
pub fn complement(basis: &[DVector<f64>], dim: usize) -> Result<Vec<DVector<f64>>> {
    if basis.is_empty() {
        return Ok((0..dim).map(|i| unit(dim, i)).collect());
    }
    let b = DMatrix::from_columns(basis);
    null_space(&b.transpose())
}

/// Orthogonal projection onto the span of an orthonormal family.
pub fn project(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for b in basis {
        out.axpy(b.dot(v), b, 1.0);
    }
    out
}

/// Largest deviation of the Gram matrix from the identity.
pub fn gram_defect(basis: &[DVector<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dot(b) - target).abs());
        }
    }
    worst
}

pub fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Flip each vector so that its largest-magnitude entry is positive.
/// SVD sign conventions are otherwise arbitrary, which would make reports
/// depend on LAPACK-level details.
fn canonical_signs(mut vs: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    for v in &mut vs {
        let mut best = 0usize;
        for i in 0..v.len() {
            if v[i].abs() > v[best].abs() + 1e-12 {
                best = i;
            }
        }
        if v[best] < 0.0 {
            *v *= -1.0;
        }
    }
    vs
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    svd(m).s.max()
}

/// Largest rotation angle of an orthogonal matrix, from `|Q - I|_2 = 2 sin(theta / 2)`.
pub fn rotation_angle(q: &DMatrix<f64>) -> f64 {
    let n = q.nrows();
    let s = spectral_norm(&(q - DMatrix::<f64>::identity(n, n)));
    2.0 * (0.5 * s).min(1.0).asin()
}

/// Moore-Penrose pseudo-inverse with the crate's rank cut.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = svd(m);
    let inv = d.s.map(|s| if s > RANK_NONZERO { 1.0 / s } else { 0.0 });
    &d.v * DMatrix::from_diagonal(&inv) * d.u.transpose()
}

/// Eigenvalues of a symmetric matrix, descending.
///
/// Householder tridiagonalization followed by implicit QL with Wilkinson
/// shifts. The implicit QR iteration of nalgebra's `SymmetricEigen` was seen
/// to stop with residuals near `1e-1` on shape-operator matrices.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let mut d: Vec<f64>;
    // e[i] couples i and i + 1; e[n - 1] = 0
    let mut e = vec![0.0; n];
    if n == 1 {
        d = vec![m[(0, 0)]];
    } else {
        let (_, diag, off) = nalgebra::SymmetricTridiagonal::new(m.clone()).unpack();
        d = diag.iter().copied().collect();
        e[..n - 1].copy_from_slice(off.as_slice());
    }
    // absolute floor so that clusters of (near) zero eigenvalues deflate
    let floor = f64::EPSILON * d.iter().zip(&e).fold(0.0f64, |m, (a, b)| m.max(a.abs() + b.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut k = l;
            while k + 1 < n {
                let dd = d[k].abs() + d[k + 1].abs();
                if e[k].abs() <= f64::EPSILON * dd || e[k].abs() <= floor {
                    break;
                }
                k += 1;
            }
            if k == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Eigen("implicit QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[k] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..k).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[k] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[k] = 0.0;
        }
    }
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Thin singular value decomposition `m = U diag(s) V^T`, `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// Least-squares solution with singular values below `cut` dropped.
    pub fn solve(&self, rhs: &DVector<f64>, cut: f64) -> DVector<f64> {
        let c = self.u.tr_mul(rhs);
        let scaled = DVector::from_fn(c.len(), |i, _| if self.s[i] > cut { c[i] / self.s[i] } else { 0.0 });
        &self.v * scaled
    }
}

/// One-sided Jacobi SVD.
///
/// nalgebra's bidiagonal SVD can return a factorization that is off by
/// `1e-2` when two singular values nearly coincide (seen on `I - Ad(a)` in
/// so(3)); the matrices here are small, so the slower method is used throughout.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    if m.nrows() < m.ncols() {
        let t = svd(&m.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let n = m.ncols();
    let mut w = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (a, b) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * a - s * b;
                        mat[(i, q)] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut u = DMatrix::zeros(m.nrows(), n);
    let mut vs = DMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / norms[j]));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd { u, s: DVector::from_iterator(n, order.iter().map(|&j| norms[j])), v: vs }
}
