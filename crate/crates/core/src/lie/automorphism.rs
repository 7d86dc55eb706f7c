use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::algebra::LieAlgebra;
use crate::lie::group::{orthogonality_defect, GroupElement, GroupKind, LieGroup};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub enum AutomorphismKind {
    /// `a -> b a b^{-1}` for a group element `b`.
    Conjugation,
    /// Entrywise complex conjugation of a (realified) unitary group.
    ComplexConjugation,
    /// `a -> P a P^T` for an orthogonal ambient matrix normalizing the group.
    Ambient(String),
}

/// An automorphism `a -> P a P^T` of a matrix group together with its differential.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismSpec {
    kind: AutomorphismKind,
    ambient: DMatrix<f64>,
    differential: DMatrix<f64>,
}

impl AutomorphismSpec {
    fn from_ambient(group: &LieGroup, kind: AutomorphismKind, p: DMatrix<f64>) -> Result<Self> {
        let n = group.matrix_size();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::InvalidSpec("automorphism matrix has the wrong size".into()));
        }
        let defect = orthogonality_defect(&p);
        if defect > 1e-10 {
            return Err(Error::InvalidSpec(format!(
                "automorphism matrix is not orthogonal (defect {defect:.3e})"
            )));
        }
        let differential = differential_of(group.algebra(), &p)?;
        Ok(Self { kind, ambient: p, differential })
    }

    pub fn conjugation(group: &LieGroup, b: &GroupElement) -> Result<Self> {
        let defect = group.membership_defect(&b.matrix);
        if defect > 1e-10 {
            return Err(Error::NotInGroup { defect });
        }
        Self::from_ambient(group, AutomorphismKind::Conjugation, b.matrix.clone())
    }

    pub fn complex_conjugation(group: &LieGroup) -> Result<Self> {
        let k = match group.kind() {
            GroupKind::SpecialUnitary(k) | GroupKind::Unitary(k) => *k,
            _ => {
                return Err(Error::InvalidSpec(
                    "complex conjugation needs a unitary or special unitary group".into(),
                ))
            }
        };
        let mut p = DMatrix::identity(2 * k, 2 * k);
        for i in k..2 * k {
            p[(i, i)] = -1.0;
        }
        Self::from_ambient(group, AutomorphismKind::ComplexConjugation, p)
    }

    pub fn ambient(group: &LieGroup, label: &str, p: DMatrix<f64>) -> Result<Self> {
        Self::from_ambient(group, AutomorphismKind::Ambient(label.to_string()), p)
    }

    pub fn kind(&self) -> &AutomorphismKind {
        &self.kind
    }

    pub fn ambient_matrix(&self) -> &DMatrix<f64> {
        &self.ambient
    }

    /// Matrix of the differential in the orthonormal algebra basis.
    pub fn differential(&self) -> &DMatrix<f64> {
        &self.differential
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        GroupElement::from_matrix_unchecked(&self.ambient * &g.matrix * self.ambient.transpose())
    }

    pub fn apply_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        &self.ambient * m * self.ambient.transpose()
    }

    pub fn apply_coeffs(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.differential * x
    }

    pub fn inverse(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            ambient: self.ambient.transpose(),
            differential: self.differential.transpose(),
        }
    }

    /// `|| d sigma^2 - I ||`.
    pub fn involution_defect(&self) -> f64 {
        let d = self.differential.nrows();
        (&self.differential * &self.differential - DMatrix::identity(d, d)).amax()
    }

    /// `|| d sigma^T d sigma - I ||`: failure to preserve the inner product.
    pub fn isometry_defect(&self) -> f64 {
        let d = self.differential.nrows();
        (self.differential.transpose() * &self.differential - DMatrix::identity(d, d)).amax()
    }

    /// Largest `|| d sigma [e_i, e_j] - [d sigma e_i, d sigma e_j] ||`.
    pub fn bracket_defect(&self, algebra: &LieAlgebra) -> f64 {
        let d = algebra.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let ei = linalg::unit(d, i);
                let ej = linalg::unit(d, j);
                let lhs = self.apply_coeffs(&algebra.bracket_coeffs(&ei, &ej));
                let rhs = algebra.bracket_coeffs(&self.apply_coeffs(&ei), &self.apply_coeffs(&ej));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }
}

fn differential_of(algebra: &LieAlgebra, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = algebra.dim();
    let mut out = DMatrix::zeros(d, d);
    let pt = p.transpose();
    for (i, e) in algebra.basis().iter().enumerate() {
        let c = algebra
            .coeffs_of(&(p * e * &pt))
            .map_err(|_| Error::InvalidSpec("matrix does not normalize the group".into()))?;
        out.set_column(i, &c);
    }
    Ok(out)
}

/// JSON form of an automorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AutomorphismDesc {
    ComplexConjugation,
    /// Conjugation by `exp(sum_i log[i] e_i)`.
    Conjugation { log: Vec<f64> },
    Ambient { label: String, matrix: Vec<Vec<f64>> },
}

impl AutomorphismDesc {
    pub fn build(&self, group: &LieGroup) -> Result<AutomorphismSpec> {
        match self {
            AutomorphismDesc::ComplexConjugation => AutomorphismSpec::complex_conjugation(group),
            AutomorphismDesc::Conjugation { log } => {
                if log.len() != group.dim() {
                    return Err(Error::Schema(format!(
                        "conjugation needs {} coefficients, got {}",
                        group.dim(),
                        log.len()
                    )));
                }
                let x = group.algebra().matrix_of(log);
                let b = GroupElement::from_matrix_unchecked(linalg::expm(&x));
                AutomorphismSpec::conjugation(group, &b)
            }
            AutomorphismDesc::Ambient { label, matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::Schema("ambient matrix must be square".into()));
                }
                let p = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                AutomorphismSpec::ambient(group, label, p)
            }
        }
    }
}
