//! Constructors for the shipped groups and the JSON group description.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::algebra::{InnerForm, LieAlgebra};
use crate::lie::group::{realify, GroupKind, LieGroup};

pub use crate::lie::group::complex_structure;

/// Infinitesimal rotations about the x, y and z axes; `[L1, L2] = L3`.
pub fn so3_generators() -> Vec<DMatrix<f64>> {
    vec![
        DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    ]
}

/// Realified `-i sigma_k`, k = 1, 2, 3.
pub fn su2_pauli_generators() -> Vec<DMatrix<f64>> {
    su_raw(2)
}

fn so_raw(n: usize) -> Vec<DMatrix<f64>> {
    if n == 3 {
        return so3_generators();
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            m[(j, i)] = 1.0;
            m[(i, j)] = -1.0;
            out.push(m);
        }
    }
    out
}

fn su_raw(n: usize) -> Vec<DMatrix<f64>> {
    let zero = Complex::new(0.0, 0.0);
    let mut out = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = DMatrix::from_element(n, n, zero);
            sym[(j, k)] = Complex::new(0.0, -1.0);
            sym[(k, j)] = Complex::new(0.0, -1.0);
            out.push(realify(&sym));
            let mut anti = DMatrix::from_element(n, n, zero);
            anti[(k, j)] = Complex::new(1.0, 0.0);
            anti[(j, k)] = Complex::new(-1.0, 0.0);
            out.push(realify(&anti));
        }
    }
    for j in 0..n.saturating_sub(1) {
        let mut diag = DMatrix::from_element(n, n, zero);
        diag[(j, j)] = Complex::new(0.0, -1.0);
        diag[(j + 1, j + 1)] = Complex::new(0.0, 1.0);
        out.push(realify(&diag));
    }
    out
}

fn torus_raw(k: usize) -> Vec<DMatrix<f64>> {
    (0..k)
        .map(|b| {
            let mut m = DMatrix::zeros(2 * k, 2 * k);
            m[(2 * b + 1, 2 * b)] = 1.0;
            m[(2 * b, 2 * b + 1)] = -1.0;
            m
        })
        .collect()
}

/// Largest ambient matrix size a builder produces.
pub const MAX_MATRIX_SIZE: usize = 32;

pub fn so(n: usize, form: InnerForm) -> Result<LieGroup> {
    if !(2..=5).contains(&n) {
        return Err(Error::InvalidSpec(format!("SO(n) is shipped for 2 <= n <= 5, got {n}")));
    }
    let alg = LieAlgebra::from_matrices(&format!("so({n})"), so_raw(n), form)?;
    Ok(LieGroup::new(GroupKind::SpecialOrthogonal(n), alg))
}

pub fn su(n: usize, form: InnerForm) -> Result<LieGroup> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidSpec(format!("SU(n) is shipped for 2 <= n <= 3, got {n}")));
    }
    let alg = LieAlgebra::from_matrices(&format!("su({n})"), su_raw(n), form)?;
    Ok(LieGroup::new(GroupKind::SpecialUnitary(n), alg))
}

/// `U(n) = SU(n) x U(1)` locally; the centre `iI` is the last basis vector.
pub fn u(n: usize, form: InnerForm) -> Result<LieGroup> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidSpec(format!("U(n) is shipped for 1 <= n <= 3, got {n}")));
    }
    let mut raw = su_raw(n);
    raw.push(complex_structure(n));
    let alg = LieAlgebra::from_matrices(&format!("u({n})"), raw, form)?;
    Ok(LieGroup::new(GroupKind::Unitary(n), alg))
}

/// `U(1)^k` as 2x2 rotation blocks.
pub fn torus(k: usize, form: InnerForm) -> Result<LieGroup> {
    if !(1..=MAX_MATRIX_SIZE / 2).contains(&k) {
        return Err(Error::InvalidSpec(format!("torus rank must be in 1..={}, got {k}", MAX_MATRIX_SIZE / 2)));
    }
    let alg = LieAlgebra::from_matrices(&format!("t^{k}"), torus_raw(k), form)?;
    Ok(LieGroup::new(GroupKind::Torus(k), alg))
}

/// Block-diagonal product. The given inner form applies to the whole product.
pub fn product(factors: Vec<LieGroup>, form: InnerForm) -> Result<LieGroup> {
    if factors.len() < 2 {
        return Err(Error::InvalidSpec("a product needs at least two factors".into()));
    }
    let size: usize = factors.iter().map(|f| f.matrix_size()).sum();
    if size > MAX_MATRIX_SIZE {
        return Err(Error::InvalidSpec(format!("product matrices of size {size} exceed {MAX_MATRIX_SIZE}")));
    }
    let mut raw = Vec::new();
    let mut start = 0;
    for f in &factors {
        let m = f.matrix_size();
        for e in f.algebra().basis() {
            let mut big = DMatrix::zeros(size, size);
            big.view_mut((start, start), (m, m)).copy_from(e);
            raw.push(big);
        }
        start += m;
    }
    let name = factors.iter().map(|f| f.name().to_string()).collect::<Vec<_>>().join("+");
    let alg = LieAlgebra::from_matrices(&name, raw, form)?;
    Ok(LieGroup::new(GroupKind::Product(factors), alg))
}

/// Connected group generated by an arbitrary set of skew-symmetric matrices.
pub fn custom(name: &str, raw: Vec<DMatrix<f64>>, form: InnerForm) -> Result<LieGroup> {
    let alg = LieAlgebra::from_matrices(name, raw, form)?;
    Ok(LieGroup::new(GroupKind::Custom, alg))
}

/// JSON description of a group, e.g. `{"group": "SO", "n": 3, "inner_form": {"kind": "neg_trace", "scale": 1.0}}`.
///
/// `group` is one of `SO`, `SU`, `U`, `T`, `product` (with `factors`) or
/// `custom` (with `basis`, a list of square matrices given row by row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub inner_form: InnerForm,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GroupSpec {
    pub fn simple(group: &str, n: usize, inner_form: InnerForm) -> Self {
        Self {
            group: group.to_string(),
            n: Some(n),
            inner_form,
            factors: Vec::new(),
            basis: None,
            name: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<LieGroup> {
        let need_n = || {
            self.n.ok_or_else(|| Error::Schema(format!("group `{}` requires field `n`", self.group)))
        };
        match self.group.as_str() {
            "SO" => so(need_n()?, self.inner_form),
            "SU" => su(need_n()?, self.inner_form),
            "U" => u(need_n()?, self.inner_form),
            "T" => torus(need_n()?, self.inner_form),
            "product" => {
                let factors = self.factors.iter().map(|f| f.build()).collect::<Result<Vec<_>>>()?;
                product(factors, self.inner_form)
            }
            "custom" => {
                let basis = self
                    .basis
                    .as_ref()
                    .ok_or_else(|| Error::Schema("custom group requires `basis`".into()))?;
                let mut raw = Vec::with_capacity(basis.len());
                for rows in basis {
                    let n = rows.len();
                    if n == 0 || n > 16 || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::Schema("basis matrices must be square, 1..=16".into()));
                    }
                    raw.push(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
                }
                custom(self.name.as_deref().unwrap_or("custom"), raw, self.inner_form)
            }
            other => Err(Error::Schema(format!("unknown group `{other}`"))),
        }
    }
}
