use nalgebra::DVector;

use crate::base::membership::{orbit_membership, Membership, MembershipOptions};
use crate::error::{Error, Result};
use crate::lie::automorphism::AutomorphismSpec;
use crate::lie::group::{GroupElement, LieGroup};
use crate::linalg;
use crate::path::develop::phi;
use crate::path::discrete::DiscretePath;

/// `G/K` with the reductive split `g = k + m`.
#[derive(Debug, Clone)]
pub struct HomogeneousSetup {
    group: LieGroup,
    k_basis: Vec<DVector<f64>>,
    m_basis: Vec<DVector<f64>>,
    /// Declared Cartan involution when `(G, K)` is a symmetric pair.
    involution: Option<AutomorphismSpec>,
}

/// `Phi(u)` as a representative of the coset `Phi(u) K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetPoint {
    pub representative: GroupElement,
}

impl HomogeneousSetup {
    /// `K` is the connected subgroup generated by the span of `k_span`.
    pub fn new(group: LieGroup, k_span: &[DVector<f64>]) -> Result<Self> {
        let d = group.dim();
        if k_span.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidSpec("subalgebra vector has the wrong dimension".into()));
        }
        let k_basis = linalg::span_basis(k_span, d)?;
        let alg = group.algebra();
        for a in &k_basis {
            for b in &k_basis {
                let c = alg.bracket_coeffs(a, b);
                let defect = (&c - linalg::project(&c, &k_basis)).norm();
                if defect > 1e-10 {
                    return Err(Error::InvalidSpec(format!(
                        "k is not closed under the bracket (defect {defect:.3e})"
                    )));
                }
            }
        }
        let m_basis = linalg::complement(&k_basis, d)?;
        for a in &k_basis {
            for b in &m_basis {
                let c = alg.bracket_coeffs(a, b);
                let defect = linalg::project(&c, &k_basis).norm();
                if defect > 1e-10 {
                    return Err(Error::InvalidSpec(format!("[k, m] is not in m (defect {defect:.3e})")));
                }
            }
        }
        Ok(Self { group, k_basis, m_basis, involution: None })
    }

    /// `K = {e}`.
    pub fn trivial(group: LieGroup) -> Result<Self> {
        Self::new(group, &[])
    }

    /// Declare `(G, K)` a symmetric pair with involution `theta`: `d theta = +1` on `k`, `-1` on `m`.
    pub fn with_involution(mut self, theta: AutomorphismSpec) -> Result<Self> {
        let defect = theta.involution_defect();
        if defect > 1e-10 {
            return Err(Error::Hypothesis(format!("declared involution squares to {defect:.3e} off the identity")));
        }
        for k in &self.k_basis {
            let e = (theta.apply_coeffs(k) - k).norm();
            if e > 1e-10 {
                return Err(Error::Hypothesis("involution does not fix k".into()));
            }
        }
        for m in &self.m_basis {
            let e = (theta.apply_coeffs(m) + m).norm();
            if e > 1e-10 {
                return Err(Error::Hypothesis("involution does not negate m".into()));
            }
        }
        self.involution = Some(theta);
        Ok(self)
    }

    pub fn group(&self) -> &LieGroup {
        &self.group
    }

    pub fn k_basis(&self) -> &[DVector<f64>] {
        &self.k_basis
    }

    pub fn m_basis(&self) -> &[DVector<f64>] {
        &self.m_basis
    }

    pub fn involution(&self) -> Option<&AutomorphismSpec> {
        self.involution.as_ref()
    }

    pub fn project_k(&self, x: &DVector<f64>) -> DVector<f64> {
        linalg::project(x, &self.k_basis)
    }

    pub fn project_m(&self, x: &DVector<f64>) -> DVector<f64> {
        linalg::project(x, &self.m_basis)
    }

    /// Numerical test of `a in K` (distance below `opts.tol`).
    pub fn k_membership(&self, a: &GroupElement, opts: &MembershipOptions) -> Membership {
        let d = self.group.dim();
        // the {e} x K orbit of e is K itself
        let pairs: Vec<_> = self.k_basis.iter().map(|k| (DVector::zeros(d), k.clone())).collect();
        let e = self.group.identity().matrix;
        orbit_membership(self.group.algebra(), &pairs, &e, &a.matrix, opts)
    }

    pub fn phi_coset(&self, u: &DiscretePath) -> Result<CosetPoint> {
        Ok(CosetPoint { representative: phi(u)? })
    }

    /// `aK = bK` iff `a^{-1} b in K`, decided at tolerance `1e-8`.
    pub fn coset_equal(&self, a: &CosetPoint, b: &CosetPoint, seed: u64) -> Membership {
        let rel = a.representative.inverse().mul(&b.representative);
        let opts = MembershipOptions { tol: 1e-8, seed, ..MembershipOptions::default() };
        self.k_membership(&rel, &opts)
    }
}
