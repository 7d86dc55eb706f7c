use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pf::operator::OperatorMatrix;

/// Eigenvalues below this fraction of the operator norm count as zero.
pub const ZERO_REL: f64 = 1e-10;
/// Exponents used for the zeta fit.
pub const ZETA_NODES: [f64; 4] = [1.5, 1.25, 1.125, 1.0625];
/// Relative tolerance for clustering equal eigenvalues in the f-trace.
pub const CLUSTER_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaFit {
    pub value: f64,
    pub nodes: Vec<f64>,
    /// `S(s) = sum lambda^s - sum |mu|^s` at each node.
    pub samples: Vec<f64>,
    /// `c0 + c1 (s-1) + c2 (s-1)^2`.
    pub coefficients: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTrace {
    pub value: f64,
    pub clusters: usize,
    /// Magnitude groups where `kappa` and `-kappa` have different multiplicities,
    /// so the partial sums depend on the tie rule.
    pub unbalanced_ties: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub modes: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    /// Values at `M/2, M, 2M`.
    pub values: [f64; 3],
    pub estimate: f64,
    /// `log2` of the ratio of successive differences; `None` once converged.
    pub order: Option<f64>,
    pub low_confidence: bool,
}

impl Richardson {
    pub fn from_values(values: [f64; 3]) -> Self {
        let [t1, t2, t3] = values;
        let (d1, d2) = (t2 - t1, t3 - t2);
        let floor = 1e-12 * (1.0 + t3.abs());
        if d1.abs() <= floor && d2.abs() <= floor {
            return Self { values, estimate: t3, order: None, low_confidence: false };
        }
        let ratio = d1 / d2;
        if !ratio.is_finite() || ratio <= 1.0 {
            // differences are not shrinking geometrically
            return Self { values, estimate: t3, order: None, low_confidence: true };
        }
        Self { values, estimate: t3 + d2 / (ratio - 1.0), order: Some(ratio.log2()), low_confidence: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub modes: [usize; 3],
    pub tr_r: Richardson,
    pub tr_zeta: Richardson,
    pub tr_f: Richardson,
    pub symmetry_defect: [f64; 3],
}

impl Extrapolation {
    pub fn low_confidence(&self) -> bool {
        self.tr_r.low_confidence || self.tr_zeta.low_confidence || self.tr_f.low_confidence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub label: String,
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub zero_threshold: f64,
    pub zero_count: usize,
    pub operator_symmetry_defect: f64,
    /// Greedy +- pairing defect over the nonzero spectrum.
    pub symmetry_defect: f64,
    pub tr_r: f64,
    /// Eigenvalues left over after rank pairing, summed.
    pub unpaired_tail: f64,
    pub tr_zeta: ZetaFit,
    pub tr_f: FTrace,
    pub truncation: Truncation,
    pub extrapolation: Option<Extrapolation>,
}

/// Positives and negatives in order of decreasing magnitude.
fn split_signs(eigs: &[f64], threshold: f64) -> (Vec<f64>, Vec<f64>) {
    let mut pos: Vec<f64> = eigs.iter().copied().filter(|v| *v > threshold).collect();
    let mut neg: Vec<f64> = eigs.iter().copied().filter(|v| *v < -threshold).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| a.total_cmp(b));
    (pos, neg)
}

/// Greedy pairing defect: `max |lambda_k + mu_k|`, unpaired eigenvalues counting in full.
pub fn pairing_defect(eigs: &[f64], threshold: f64) -> f64 {
    let (pos, neg) = split_signs(eigs, threshold);
    let mut worst = 0.0f64;
    for k in 0..pos.len().max(neg.len()) {
        let l = pos.get(k).copied().unwrap_or(0.0);
        let m = neg.get(k).copied().unwrap_or(0.0);
        worst = worst.max((l + m).abs());
    }
    worst
}

fn zeta_fit(pos: &[f64], neg: &[f64]) -> ZetaFit {
    let samples: Vec<f64> = ZETA_NODES
        .iter()
        .map(|&s| pos.iter().map(|l| l.powf(s)).sum::<f64>() - neg.iter().map(|m| m.abs().powf(s)).sum::<f64>())
        .collect();
    let a = DMatrix::from_fn(ZETA_NODES.len(), 3, |i, j| (ZETA_NODES[i] - 1.0).powi(j as i32));
    let b = DVector::from_vec(samples.clone());
    let c = (a.transpose() * &a).cholesky().expect("Vandermonde normal matrix is positive").solve(&(a.transpose() * &b));
    let max_residual = (&a * &c - &b).amax();
    ZetaFit {
        value: c[0],
        nodes: ZETA_NODES.to_vec(),
        samples,
        coefficients: c.iter().copied().collect(),
        max_residual,
    }
}

/// Distinct eigenvalues ordered by decreasing `|kappa|`, `kappa` before `-kappa`.
fn f_trace(pos: &[f64], neg: &[f64], tol: f64) -> FTrace {
    let mut all: Vec<f64> = pos.iter().chain(neg).copied().collect();
    all.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && (all[j] - all[i]).abs() <= tol {
            j += 1;
        }
        let mean = all[i..j].iter().sum::<f64>() / (j - i) as f64;
        clusters.push((mean, j - i));
        i = j;
    }
    // clusters with the same magnitude are adjacent after sorting
    let mut unbalanced = 0;
    let mut k = 0;
    while k < clusters.len() {
        if k + 1 < clusters.len()
            && (clusters[k].0.abs() - clusters[k + 1].0.abs()).abs() <= tol
            && clusters[k].0 * clusters[k + 1].0 < 0.0
        {
            if clusters[k].1 != clusters[k + 1].1 {
                unbalanced += 1;
            }
            k += 2;
        } else {
            k += 1;
        }
    }
    let value = clusters.iter().map(|(v, m)| v * *m as f64).sum();
    FTrace { value, clusters: clusters.len(), unbalanced_ties: unbalanced }
}

fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    crate::linalg::symmetric_eigenvalues(m)
}

/// Spectrum, pairing defect and the three regularized traces of a single truncation.
pub fn spectrum_and_traces(a: &OperatorMatrix) -> Result<SpectrumReport> {
    let eigs = eigenvalues(&a.entries)?;
    let scale = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = ZERO_REL * scale;
    let (pos, neg) = split_signs(&eigs, threshold);
    let paired = pos.len().min(neg.len());
    let tr_r = (0..paired).map(|k| pos[k] + neg[k]).sum();
    let unpaired_tail = pos[paired..].iter().chain(&neg[paired..]).sum();
    Ok(SpectrumReport {
        label: a.label.clone(),
        zero_count: eigs.len() - pos.len() - neg.len(),
        symmetry_defect: pairing_defect(&eigs, threshold),
        eigenvalues: eigs,
        zero_threshold: threshold,
        operator_symmetry_defect: a.symmetry_defect,
        tr_r,
        unpaired_tail,
        tr_zeta: zeta_fit(&pos, &neg),
        tr_f: f_trace(&pos, &neg, CLUSTER_REL * scale.max(f64::MIN_POSITIVE)),
        truncation: Truncation { modes: a.modes(), n: a.n() },
        extrapolation: None,
    })
}

/// Report at `modes` with traces extrapolated over `modes/2, modes, 2 modes`.
pub fn refined_spectrum(modes: usize, build: impl Fn(usize) -> Result<OperatorMatrix>) -> Result<SpectrumReport> {
    if modes < 2 || !modes.is_multiple_of(2) {
        return Err(Error::InvalidSpec(format!("mode count {modes} must be even and at least 2")));
    }
    let levels = [modes / 2, modes, 2 * modes];
    let mut reports = Vec::with_capacity(3);
    for m in levels {
        reports.push(spectrum_and_traces(&build(m)?)?);
    }
    let pick = |f: &dyn Fn(&SpectrumReport) -> f64| [f(&reports[0]), f(&reports[1]), f(&reports[2])];
    let extrapolation = Extrapolation {
        modes: levels,
        tr_r: Richardson::from_values(pick(&|r| r.tr_r)),
        tr_zeta: Richardson::from_values(pick(&|r| r.tr_zeta.value)),
        tr_f: Richardson::from_values(pick(&|r| r.tr_f.value)),
        symmetry_defect: pick(&|r| r.symmetry_defect),
    };
    let mut main = reports.swap_remove(1);
    main.extrapolation = Some(extrapolation);
    Ok(main)
}

impl SpectrumReport {
    /// Greedy partner index of each eigenvalue (by position in `eigenvalues`).
    pub fn partners(&self) -> Vec<Option<usize>> {
        let t = self.zero_threshold;
        let mut pos: Vec<usize> = (0..self.eigenvalues.len()).filter(|&i| self.eigenvalues[i] > t).collect();
        let mut neg: Vec<usize> = (0..self.eigenvalues.len()).filter(|&i| self.eigenvalues[i] < -t).collect();
        pos.sort_by(|&a, &b| self.eigenvalues[b].total_cmp(&self.eigenvalues[a]));
        neg.sort_by(|&a, &b| self.eigenvalues[a].total_cmp(&self.eigenvalues[b]));
        let mut out = vec![None; self.eigenvalues.len()];
        for (p, q) in pos.iter().zip(&neg) {
            out[*p] = Some(*q);
            out[*q] = Some(*p);
        }
        out
    }

    /// CSV with columns `index,eigenvalue,matched_partner,pair_defect`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue,matched_partner,pair_defect\n");
        for (i, p) in self.partners().iter().enumerate() {
            let v = self.eigenvalues[i];
            match p {
                Some(j) => {
                    let _ = writeln!(s, "{i},{v:e},{j},{:e}", (v + self.eigenvalues[*j]).abs());
                }
                None if v.abs() <= self.zero_threshold => {
                    let _ = writeln!(s, "{i},{v:e},,");
                }
                None => {
                    let _ = writeln!(s, "{i},{v:e},,{:e}", v.abs());
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_of(eigs: &[f64]) -> SpectrumReport {
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(eigs));
        let basis = crate::pf::basis::fiber_basis(
            crate::lie::builders::torus(1, crate::lie::InnerForm::default()).unwrap().algebra().clone(),
            eigs.len(),
            (4 * eigs.len()).next_power_of_two(),
        )
        .unwrap();
        let op = OperatorMatrix { label: "diag".into(), basis: std::sync::Arc::new(basis), entries: m, symmetry_defect: 0.0 };
        spectrum_and_traces(&op).unwrap()
    }

    #[test]
    fn symmetric_spectrum() {
        let r = report_of(&[1.0, -1.0, 2.0, -2.0]);
        assert_eq!(r.eigenvalues, vec![2.0, 1.0, -1.0, -2.0]);
        assert_eq!(r.tr_r, 0.0);
        assert_eq!(r.symmetry_defect, 0.0);
        assert!(r.tr_zeta.value.abs() < 1e-12);
        assert_eq!(r.tr_f.value, 0.0);
        assert_eq!(r.tr_f.clusters, 4);
    }

    #[test]
    fn multiplicity_mismatch() {
        let r = report_of(&[1.0, 1.0, -1.0]);
        assert_eq!(r.symmetry_defect, 1.0);
        assert_eq!(r.tr_r, 0.0);
        assert_eq!(r.unpaired_tail, 1.0);
        assert_eq!(r.tr_f.unbalanced_ties, 1);
        assert!((r.tr_zeta.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_fit_recovers_power_sums() {
        let r = report_of(&[0.9, -0.3, 0.5, 0.0]);
        assert_eq!(r.zero_count, 1);
        // least-squares value computed independently; the exact limit is 1.1
        assert!((r.tr_zeta.value - 1.1003879896870166).abs() < 1e-10);
        let csv = r.to_csv();
        assert!(csv.starts_with("index,eigenvalue,matched_partner,pair_defect\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn richardson() {
        let r = Richardson::from_values([1.0 + 1.0 / 4.0, 1.0 + 1.0 / 16.0, 1.0 + 1.0 / 64.0]);
        assert!((r.estimate - 1.0).abs() < 1e-14);
        assert!((r.order.unwrap() - 2.0).abs() < 1e-12);
        assert!(Richardson::from_values([1.0, 0.5, 1.0]).low_confidence);
        assert!(!Richardson::from_values([2.0, 2.0, 2.0]).low_confidence);
    }
}
