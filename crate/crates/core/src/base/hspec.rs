use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::base::membership::{orbit_membership, Membership, MembershipOptions};
use crate::error::{Error, Result};
use crate::lie::automorphism::AutomorphismSpec;
use crate::lie::group::{adjoint_matrix, GroupElement, LieGroup};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HKind {
    /// `K' x K`.
    Product,
    /// `G(sigma) = {(a, sigma(a))}`.
    TwistedDiagonal,
    /// `{(b, b)}`.
    Diagonal,
    Generated,
}

/// A closed connected subgroup `H` of `G x G`, acting on `G` by `(b1, b2) . a = b1 a b2^{-1}`.
#[derive(Debug, Clone)]
pub struct HSpec {
    kind: HKind,
    label: String,
    group: LieGroup,
    /// Orthonormal basis of `h` inside `g + g`.
    pairs: Vec<(DVector<f64>, DVector<f64>)>,
    sigma: Option<AutomorphismSpec>,
}

fn stack(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let d = x.len();
    DVector::from_fn(2 * d, |i, _| if i < d { x[i] } else { y[i - d] })
}

fn unstack(v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let d = v.len() / 2;
    (v.rows(0, d).into_owned(), v.rows(d, d).into_owned())
}

impl HSpec {
    fn build(
        kind: HKind,
        label: String,
        group: LieGroup,
        span: &[(DVector<f64>, DVector<f64>)],
        sigma: Option<AutomorphismSpec>,
    ) -> Result<Self> {
        let d = group.dim();
        if span.iter().any(|(x, y)| x.len() != d || y.len() != d) {
            return Err(Error::InvalidSpec("subalgebra pair has the wrong dimension".into()));
        }
        let stacked: Vec<_> = span.iter().map(|(x, y)| stack(x, y)).collect();
        let basis = linalg::span_basis(&stacked, 2 * d)?;
        let pairs: Vec<_> = basis.iter().map(unstack).collect();
        let h = Self { kind, label, group, pairs, sigma };
        let defect = h.closure_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidSpec(format!(
                "h is not closed under the bracket (defect {defect:.3e})"
            )));
        }
        Ok(h)
    }

    /// `K' x K` for the connected subgroups generated by the two spans.
    pub fn product(group: LieGroup, k1: &[DVector<f64>], k2: &[DVector<f64>]) -> Result<Self> {
        let d = group.dim();
        let mut span = Vec::new();
        for x in k1 {
            span.push((x.clone(), DVector::zeros(d)));
        }
        for y in k2 {
            span.push((DVector::zeros(d), y.clone()));
        }
        let label = format!("K'({})xK({}) in {}", k1.len(), k2.len(), group.name());
        Self::build(HKind::Product, label, group, &span, None)
    }

    /// `G(sigma)`. The automorphism need not be involutive.
    pub fn twisted_diagonal(group: LieGroup, sigma: AutomorphismSpec) -> Result<Self> {
        let d = group.dim();
        let span: Vec<_> = (0..d)
            .map(|i| {
                let e = linalg::unit(d, i);
                let s = sigma.apply_coeffs(&e);
                (e, s)
            })
            .collect();
        let label = format!("G(sigma) in {}", group.name());
        Self::build(HKind::TwistedDiagonal, label, group, &span, Some(sigma))
    }

    pub fn diagonal(group: LieGroup) -> Result<Self> {
        let d = group.dim();
        let span: Vec<_> = (0..d).map(|i| (linalg::unit(d, i), linalg::unit(d, i))).collect();
        let label = format!("diag {}", group.name());
        Self::build(HKind::Diagonal, label, group, &span, None)
    }

    pub fn generated(group: LieGroup, span: &[(DVector<f64>, DVector<f64>)]) -> Result<Self> {
        let label = format!("generated({}) in {}", span.len(), group.name());
        Self::build(HKind::Generated, label, group, span, None)
    }

    /// `H^a = (a, e)^{-1} H (a, e)`, so that `H . a = a (H^a . e)`.
    pub fn normalized(&self, a: &GroupElement) -> Result<Self> {
        let ad = adjoint_matrix(self.group.algebra(), &a.matrix.transpose())?;
        let span: Vec<_> = self.pairs.iter().map(|(x, y)| (&ad * x, y.clone())).collect();
        let mut h = Self::build(self.kind, format!("{}^a", self.label), self.group.clone(), &span, None)?;
        if a.distance_to(&self.group.identity()) == 0.0 {
            h.label = self.label.clone();
            h.sigma = self.sigma.clone();
        }
        Ok(h)
    }

    pub fn kind(&self) -> HKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn group(&self) -> &LieGroup {
        &self.group
    }

    pub fn pairs(&self) -> &[(DVector<f64>, DVector<f64>)] {
        &self.pairs
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn sigma(&self) -> Option<&AutomorphismSpec> {
        self.sigma.as_ref()
    }

    /// Distance of componentwise brackets from `h`.
    pub fn closure_defect(&self) -> f64 {
        let alg = self.group.algebra();
        let stacked: Vec<_> = self.pairs.iter().map(|(x, y)| stack(x, y)).collect();
        let mut worst = 0.0f64;
        for (x, y) in &self.pairs {
            for (z, w) in &self.pairs {
                let b = stack(&alg.bracket_coeffs(x, z), &alg.bracket_coeffs(y, w));
                worst = worst.max((&b - linalg::project(&b, &stacked)).norm());
            }
        }
        worst
    }

    pub fn contains_pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let v = stack(x, y);
        let stacked: Vec<_> = self.pairs.iter().map(|(x, y)| stack(x, y)).collect();
        (&v - linalg::project(&v, &stacked)).norm()
    }

    /// Random element of `h` with standard normal coefficients times `scale`.
    pub fn random_pair<R: Rng>(&self, rng: &mut R, scale: f64) -> (DVector<f64>, DVector<f64>) {
        let d = self.group.dim();
        let mut x = DVector::zeros(d);
        let mut y = DVector::zeros(d);
        for (px, py) in &self.pairs {
            let c: f64 = rng.sample::<f64, _>(StandardNormal) * scale;
            x.axpy(c, px, 1.0);
            y.axpy(c, py, 1.0);
        }
        (x, y)
    }

    /// Random element of `H` (compact connected groups are exhausted by `exp`).
    pub fn sample<R: Rng>(&self, rng: &mut R, scale: f64) -> (GroupElement, GroupElement) {
        let (x, y) = self.random_pair(rng, scale);
        let alg = self.group.algebra();
        (
            GroupElement::from_matrix_unchecked(linalg::expm(&alg.matrix_of(x.as_slice()))),
            GroupElement::from_matrix_unchecked(linalg::expm(&alg.matrix_of(y.as_slice()))),
        )
    }

    pub fn act(&self, b1: &GroupElement, b2: &GroupElement, a: &GroupElement) -> GroupElement {
        b1.mul(a).mul(&b2.inverse())
    }

    /// Is `b` in `H . a`?
    pub fn membership(&self, a: &GroupElement, b: &GroupElement, opts: &MembershipOptions) -> Membership {
        orbit_membership(self.group.algebra(), &self.pairs, &a.matrix, &b.matrix, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::InnerForm;
    use crate::lie::builders;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimensions() {
        let g = builders::so(3, InnerForm::default()).unwrap();
        let e3 = linalg::unit(3, 2);
        assert_eq!(HSpec::product(g.clone(), std::slice::from_ref(&e3), std::slice::from_ref(&e3)).unwrap().dim(), 2);
        assert_eq!(HSpec::diagonal(g.clone()).unwrap().dim(), 3);
        let bad = HSpec::product(g.clone(), &[linalg::unit(3, 0), linalg::unit(3, 1)], &[]);
        assert!(bad.is_err());
        let su2 = builders::su(2, InnerForm::default()).unwrap();
        let sigma = AutomorphismSpec::complex_conjugation(&su2).unwrap();
        let h = HSpec::twisted_diagonal(su2, sigma).unwrap();
        assert_eq!(h.dim(), 3);
        assert!(h.closure_defect() < 1e-12);
    }

    #[test]
    fn sampled_elements_act_within_the_orbit() {
        let g = builders::su(2, InnerForm::default()).unwrap();
        let h = HSpec::diagonal(g.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = crate::lie::exp_map(&crate::lie::AlgebraElement::basis_vector(g.algebra().clone(), 2).scaled(0.8));
        for _ in 0..5 {
            let (b1, b2) = h.sample(&mut rng, 1.0);
            assert!(b1.distance_to(&b2) < 1e-14);
            let b = h.act(&b1, &b2, &a);
            assert!(h.membership(&a, &b, &MembershipOptions::default()).is_member());
        }
    }

    #[test]
    fn normalization_conjugates_the_first_factor() {
        let g = builders::so(3, InnerForm::default()).unwrap();
        let h = HSpec::diagonal(g.clone()).unwrap();
        let a = crate::lie::exp_map(&crate::lie::AlgebraElement::basis_vector(g.algebra().clone(), 0).scaled(0.9));
        let ha = h.normalized(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // (a^{-1} b1 a, b2) . e = a^{-1} ((b1, b2) . a)
        let (b1, b2) = h.sample(&mut rng, 1.0);
        let lhs = a.inverse().mul(&h.act(&b1, &b2, &a));
        let e = g.identity();
        assert!(ha.membership(&e, &lhs, &MembershipOptions::default()).is_member());
    }
}
