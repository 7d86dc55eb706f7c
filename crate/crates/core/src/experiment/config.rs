use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::base::hspec::HSpec;
use crate::base::membership::MembershipOptions;
use crate::base::orbit::NSpec;
use crate::error::{Error, Result};
use crate::lie::automorphism::AutomorphismDesc;
use crate::lie::builders::GroupSpec;
use crate::lie::group::{GroupElement, LieGroup};
use crate::linalg;
use crate::path::discrete::check_grid;
use crate::path::homogeneous::HomogeneousSetup;
use crate::verdict::{ReflectionSpec, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Pipeline {
    FiberSpectrum,
    PreimageSpectrum,
    PghSpectrum,
    Austere,
    TotallyGeodesic,
    InverseClosed,
    Reflection,
    Minimality,
    OracleCompare,
    Catalog(String),
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fiber_spectrum" => Pipeline::FiberSpectrum,
            "preimage_spectrum" => Pipeline::PreimageSpectrum,
            "pgh_spectrum" => Pipeline::PghSpectrum,
            "austere" => Pipeline::Austere,
            "totally_geodesic" => Pipeline::TotallyGeodesic,
            "inverse_closed" => Pipeline::InverseClosed,
            "reflection" => Pipeline::Reflection,
            "minimality" => Pipeline::Minimality,
            "oracle_compare" => Pipeline::OracleCompare,
            other => match other.strip_prefix("catalog:") {
                Some(name) if !name.is_empty() => Pipeline::Catalog(name.to_string()),
                _ => return Err(Error::Schema(format!("unknown pipeline `{other}`"))),
            },
        })
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pipeline::FiberSpectrum => "fiber_spectrum",
            Pipeline::PreimageSpectrum => "preimage_spectrum",
            Pipeline::PghSpectrum => "pgh_spectrum",
            Pipeline::Austere => "austere",
            Pipeline::TotallyGeodesic => "totally_geodesic",
            Pipeline::InverseClosed => "inverse_closed",
            Pipeline::Reflection => "reflection",
            Pipeline::Minimality => "minimality",
            Pipeline::OracleCompare => "oracle_compare",
            Pipeline::Catalog(name) => return write!(f, "catalog:{name}"),
        };
        f.write_str(s)
    }
}

impl TryFrom<String> for Pipeline {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse().map_err(|_| format!("unknown pipeline `{s}`"))
    }
}

impl From<Pipeline> for String {
    fn from(p: Pipeline) -> String {
        p.to_string()
    }
}

/// Subgroup `H` of `G x G`; vectors are basis coefficients of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HDesc {
    Diagonal,
    /// `K1 x K2` from spanning sets of the two factors.
    Product {
        #[serde(default)]
        k1: Vec<Vec<f64>>,
        #[serde(default)]
        k2: Vec<Vec<f64>>,
    },
    TwistedDiagonal { sigma: AutomorphismDesc },
    Generated { pairs: Vec<(Vec<f64>, Vec<f64>)> },
}

/// Submanifold `N` of `G` (or of `G/K` for coset orbits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NDesc {
    /// `H . a` with `a = exp(point_log)`, identity when absent.
    BaseOrbit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point_log: Option<Vec<f64>>,
    },
    Subgroup { span: Vec<Vec<f64>> },
    WholeGroup,
    Point,
    /// `K' . aK` in `G/K`; needs `homogeneous`.
    CosetOrbit {
        k_prime: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point_log: Option<Vec<f64>>,
    },
}

/// `G/K` with an optional involution for symmetric pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousDesc {
    pub k: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<AutomorphismDesc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Spectral symmetry defect for austerity.
    pub symmetry: f64,
    /// Orbit membership distance.
    pub membership: f64,
    /// Formula against finite differences.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { symmetry: 1e-8, membership: 1e-8, oracle: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numeric {
    /// Grid cells, a power of two.
    pub n: usize,
    /// Fiber modes `M`; spectra are also computed at `M/2` and `2M`.
    pub modes: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for Numeric {
    fn default() -> Self {
        Self { n: 256, modes: 16, samples: 8, seed: 0, tolerances: Tolerances::default() }
    }
}

impl Numeric {
    pub fn validate(&self) -> Result<()> {
        check_grid(self.n).map_err(|e| Error::Schema(e.to_string()))?;
        if self.modes < 2 || !self.modes.is_multiple_of(2) {
            return Err(Error::Schema(format!("modes must be even and at least 2, got {}", self.modes)));
        }
        if self.n < 8 * self.modes {
            return Err(Error::Schema(format!(
                "n = {} is too small for 2M = {} modes (needs n >= {})",
                self.n,
                2 * self.modes,
                8 * self.modes
            )));
        }
        let t = &self.tolerances;
        if [t.symmetry, t.membership, t.oracle].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Schema("tolerances must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn membership(&self) -> MembershipOptions {
        MembershipOptions { tol: self.tolerances.membership, seed: self.seed, ..MembershipOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub pipeline: Pipeline,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_spec: Option<NDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<HomogeneousDesc>,
    /// Normal direction in basis coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflection: Option<ReflectionSpec>,
    /// Verdict every verdict item is expected to reach.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Verdict>,
    #[serde(default)]
    pub numeric: Numeric,
}

impl ExperimentConfig {
    pub fn new(pipeline: Pipeline, group: GroupSpec) -> Self {
        Self {
            label: None,
            pipeline,
            group: Some(group),
            h: None,
            n_spec: None,
            homogeneous: None,
            normal: None,
            reflection: None,
            expect: None,
            numeric: Numeric::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.numeric.validate()?;
        Ok(config)
    }
}

pub(crate) fn coeffs(v: &[f64], d: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != d {
        return Err(Error::Schema(format!("{what} needs {d} coefficients, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Schema(format!("{what} has non-finite coefficients")));
    }
    Ok(DVector::from_column_slice(v))
}

fn coeff_list(vs: &[Vec<f64>], d: usize, what: &str) -> Result<Vec<DVector<f64>>> {
    vs.iter().map(|v| coeffs(v, d, what)).collect()
}

fn element(group: &LieGroup, log: Option<&Vec<f64>>) -> Result<GroupElement> {
    match log {
        None => Ok(group.identity()),
        Some(v) => {
            let c = coeffs(v, group.dim(), "point_log")?;
            Ok(GroupElement::from_matrix_unchecked(linalg::expm(&group.algebra().matrix_of(c.as_slice()))))
        }
    }
}

/// Objects built from a config, shared by the pipelines.
#[derive(Debug, Clone)]
pub struct Context {
    pub group: LieGroup,
    pub h: Option<HSpec>,
    pub setup: Option<HomogeneousSetup>,
    pub n_spec: Option<NSpec>,
    pub normal: Option<DVector<f64>>,
}

impl Context {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let group = config
            .group
            .as_ref()
            .ok_or_else(|| Error::Schema("field `group` is required".into()))?
            .build()?;
        let d = group.dim();
        let h = match &config.h {
            None => None,
            Some(HDesc::Diagonal) => Some(HSpec::diagonal(group.clone())?),
            Some(HDesc::Product { k1, k2 }) => {
                Some(HSpec::product(group.clone(), &coeff_list(k1, d, "k1")?, &coeff_list(k2, d, "k2")?)?)
            }
            Some(HDesc::TwistedDiagonal { sigma }) => Some(HSpec::twisted_diagonal(group.clone(), sigma.build(&group)?)?),
            Some(HDesc::Generated { pairs }) => {
                let span = pairs
                    .iter()
                    .map(|(x, y)| Ok((coeffs(x, d, "pair")?, coeffs(y, d, "pair")?)))
                    .collect::<Result<Vec<_>>>()?;
                Some(HSpec::generated(group.clone(), &span)?)
            }
        };
        let setup = match &config.homogeneous {
            None => None,
            Some(desc) => {
                let s = HomogeneousSetup::new(group.clone(), &coeff_list(&desc.k, d, "k")?)?;
                Some(match &desc.involution {
                    Some(theta) => s.with_involution(theta.build(&group)?)?,
                    None => s,
                })
            }
        };
        let n_spec = match &config.n_spec {
            None => None,
            Some(NDesc::BaseOrbit { point_log }) => {
                let h = h.as_ref().ok_or_else(|| Error::Schema("base_orbit needs `h`".into()))?;
                Some(NSpec::base_orbit(h, &element(&group, point_log.as_ref())?)?)
            }
            Some(NDesc::Subgroup { span }) => Some(NSpec::subgroup(group.clone(), &coeff_list(span, d, "span")?)?),
            Some(NDesc::WholeGroup) => Some(NSpec::whole_group(group.clone())?),
            Some(NDesc::Point) => Some(NSpec::point(group.clone())?),
            Some(NDesc::CosetOrbit { k_prime, point_log }) => {
                let s = setup.as_ref().ok_or_else(|| Error::Schema("coset_orbit needs `homogeneous`".into()))?;
                Some(NSpec::coset_orbit(s, &coeff_list(k_prime, d, "k_prime")?, &element(&group, point_log.as_ref())?)?)
            }
        };
        let normal = config.normal.as_ref().map(|v| coeffs(v, d, "normal")).transpose()?;
        Ok(Self { group, h, setup, n_spec, normal })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_round_trips() {
        for s in ["fiber_spectrum", "oracle_compare", "catalog:fiber_su2"] {
            assert_eq!(s.parse::<Pipeline>().unwrap().to_string(), s);
        }
        assert!("catalog:".parse::<Pipeline>().is_err());
        assert!("spectrum".parse::<Pipeline>().is_err());
    }

    #[test]
    fn config_rejects_unknown_fields_and_bad_numerics() {
        let ok = r#"{"pipeline": "fiber_spectrum", "group": {"group": "SU", "n": 2}, "normal": [0, 0, 1]}"#;
        let c = ExperimentConfig::parse(ok).unwrap();
        assert_eq!(c.numeric, Numeric::default());
        assert!(ExperimentConfig::parse(&ok.replace("\"normal\"", "\"normals\"")).is_err());
        let bad = r#"{"pipeline": "austere", "numeric": {"n": 100}}"#;
        assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Schema(_))));
        let few = r#"{"pipeline": "austere", "numeric": {"n": 64, "modes": 16}}"#;
        assert!(matches!(ExperimentConfig::parse(few), Err(Error::Schema(_))));
    }

    #[test]
    fn context_checks_lengths() {
        let text = r#"{"pipeline": "totally_geodesic", "group": {"group": "SO", "n": 3},
                       "n_spec": {"kind": "subgroup", "span": [[0, 1]]}}"#;
        let c = ExperimentConfig::parse(text).unwrap();
        assert!(matches!(Context::build(&c), Err(Error::Schema(_))));
        let text = r#"{"pipeline": "totally_geodesic", "group": {"group": "SO", "n": 3},
                       "n_spec": {"kind": "base_orbit"}}"#;
        assert!(Context::build(&ExperimentConfig::parse(text).unwrap()).is_err());
    }
}
