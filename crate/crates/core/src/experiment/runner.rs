use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::base::orbit::{NSpec, OrbitGeometry};
use crate::error::{Error, Result};
use crate::experiment::catalog;
use crate::experiment::config::{Context, ExperimentConfig, Numeric, Pipeline};
use crate::experiment::report::{sha256_hex, versions, ResultItem, RunReport, Timing};
use crate::lie::algebra::AlgebraElement;
use crate::oracle::fd_sff_preimage;
use crate::path::discrete::{split_horizontal, DiscretePath};
use crate::pf::basis::{fiber_basis, TangentBasis};
use crate::pf::operator::{sff_preimage, shape_fiber, shape_pgh_orbit, shape_preimage};
use crate::pf::spectrum::{refined_spectrum, SpectrumReport};
use crate::verdict::{
    build_reflection, check_austere, check_inverse_closed, check_minimality, classify_fiber_tg,
    classify_totally_geodesic, verify_reflection, Evidence, ReflectionSpec, VerdictReport,
};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub timing: bool,
    /// Raw bytes of the config file, hashed into the report.
    pub source: Option<Vec<u8>>,
}

/// Run the configured pipeline. Schema problems are errors; numeric failures
/// become `error` items inside the report.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    config.numeric.validate()?;
    let mut results = match &config.pipeline {
        Pipeline::Catalog(name) => {
            let entry = catalog::find(name)?;
            // catalog entries carry their own numerics
            return run_catalog_entry(entry, None, opts);
        }
        _ => {
            let ctx = Context::build(config)?;
            contain(execute(config, &ctx))?
        }
    };
    results.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(finish(config.clone(), results, opts, start))
}

pub(crate) fn finish(config: ExperimentConfig, results: Vec<ResultItem>, opts: &RunOptions, start: Instant) -> RunReport {
    let mut input_hashes = std::collections::BTreeMap::new();
    input_hashes.insert("config".to_string(), sha256_hex(&serde_json::to_vec(&config).expect("configs serialize")));
    if let Some(src) = &opts.source {
        input_hashes.insert("config_file".to_string(), sha256_hex(src));
    }
    RunReport {
        config,
        results,
        versions: versions(),
        input_hashes,
        timing: opts.timing.then(|| Timing { seconds: start.elapsed().as_secs_f64() }),
    }
}

/// Run a catalog entry, optionally with replaced numerics.
pub fn run_catalog_entry(entry: &catalog::CatalogEntry, numeric: Option<Numeric>, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let mut config = entry.config();
    if let Some(n) = numeric {
        n.validate()?;
        config.numeric = n;
    }
    let mut results = match entry.builtin {
        Some(f) => contain(f(&config.numeric))?,
        None => {
            let ctx = Context::build(&config)?;
            contain(execute(&config, &ctx))?
        }
    };
    results.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(finish(config, results, opts, start))
}

/// Schema errors propagate; numeric errors become a single `error` item.
fn contain(r: Result<Vec<ResultItem>>) -> Result<Vec<ResultItem>> {
    match r {
        Ok(items) => Ok(items),
        Err(e @ Error::Schema(_)) => Err(e),
        Err(e) => Ok(vec![ResultItem::error("error", e.to_string())]),
    }
}

fn require<'a, T>(v: Option<&'a T>, what: &str) -> Result<&'a T> {
    v.ok_or_else(|| Error::Schema(format!("pipeline needs `{what}`")))
}

fn first_normal(orbit: &OrbitGeometry) -> Result<DVector<f64>> {
    orbit
        .normal()
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidSpec("submanifold has no normal directions".into()))
}

fn element(ctx: &Context, xi: DVector<f64>) -> Result<AlgebraElement> {
    AlgebraElement::new(ctx.group.algebra().clone(), xi)
}

/// Which operator a spectrum-based pipeline uses, in order of preference:
/// the preimage of `n_spec`, the `P(G, H)` orbit through the zero path, the fiber.
fn default_spectrum(ctx: &Context, num: &Numeric) -> Result<(String, SpectrumReport)> {
    if ctx.n_spec.is_some() {
        Ok(("preimage".into(), preimage_spectrum(ctx, num)?))
    } else if ctx.h.is_some() {
        Ok(("pgh".into(), pgh_spectrum(ctx, num)?))
    } else {
        Ok(("fiber".into(), fiber_spectrum(ctx, num)?))
    }
}

fn fiber_spectrum(ctx: &Context, num: &Numeric) -> Result<SpectrumReport> {
    let alg = ctx.group.algebra().clone();
    let xi = element(ctx, ctx.normal.clone().unwrap_or_else(|| crate::linalg::unit(alg.dim(), alg.dim() - 1)))?;
    refined_spectrum(num.modes, |m| shape_fiber(&xi, &Arc::new(fiber_basis(alg.clone(), m, num.n)?)))
}

fn preimage_spectrum(ctx: &Context, num: &Numeric) -> Result<SpectrumReport> {
    let n_spec = require(ctx.n_spec.as_ref(), "n_spec")?;
    let alg = ctx.group.algebra().clone();
    let xi = element(ctx, ctx.normal.clone().map_or_else(|| first_normal(n_spec.orbit()), Ok)?)?;
    refined_spectrum(num.modes, |m| {
        shape_preimage(n_spec, &xi, &Arc::new(TangentBasis::new(alg.clone(), n_spec.tangent(), m, num.n)?))
    })
}

fn pgh_spectrum(ctx: &Context, num: &Numeric) -> Result<SpectrumReport> {
    let h = require(ctx.h.as_ref(), "h")?;
    let orbit = OrbitGeometry::new(h.clone())?;
    let alg = ctx.group.algebra().clone();
    let xi = element(ctx, ctx.normal.clone().map_or_else(|| first_normal(&orbit), Ok)?)?;
    refined_spectrum(num.modes, |m| {
        shape_pgh_orbit(h, &xi, &Arc::new(TangentBasis::new(alg.clone(), orbit.tangent(), m, num.n)?))
    })
}

/// Random tangent vector of `Phi^{-1}(N)` at the zero path: constant part in
/// `T_e N` plus a smooth zero-mean part.
pub fn random_preimage_tangent<R: Rng>(n_spec: &NSpec, n: usize, rng: &mut R) -> Result<DiscretePath> {
    let alg = n_spec.group().algebra().clone();
    let d = alg.dim();
    let modes: Vec<DVector<f64>> =
        (0..3).map(|k| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal) / (k + 1) as f64)).collect();
    let smooth = DiscretePath::from_fn(alg.clone(), n, |t| {
        modes.iter().enumerate().fold(DVector::zeros(d), |acc, (k, c)| {
            acc + c * (std::f64::consts::PI * (k + 1) as f64 * t).cos()
        })
    })?;
    let (_, vertical) = split_horizontal(&smooth);
    let x = n_spec
        .tangent()
        .iter()
        .fold(DVector::zeros(d), |acc, t| acc + t * rng.sample::<f64, _>(StandardNormal));
    let horizontal = DiscretePath::constant(&AlgebraElement::new(alg, x)?, n)?;
    horizontal.add(&vertical)
}

/// Largest deviation between the closed-form sff of `Phi^{-1}(N)` and finite differences.
pub fn oracle_deviation(n_spec: &NSpec, n: usize, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x = random_preimage_tangent(n_spec, n, &mut rng)?;
        let y = random_preimage_tangent(n_spec, n, &mut rng)?;
        let exact = sff_preimage(n_spec, &x, &y)?;
        let fd = fd_sff_preimage(n_spec, &x, &y)?;
        worst = worst.max((exact - fd).amax());
    }
    Ok(worst)
}

fn execute(config: &ExperimentConfig, ctx: &Context) -> Result<Vec<ResultItem>> {
    let num = &config.numeric;
    let mopts = num.membership();
    Ok(match &config.pipeline {
        Pipeline::FiberSpectrum => vec![ResultItem::spectrum("fiber", fiber_spectrum(ctx, num)?)],
        Pipeline::PreimageSpectrum => vec![ResultItem::spectrum("preimage", preimage_spectrum(ctx, num)?)],
        Pipeline::PghSpectrum => vec![ResultItem::spectrum("pgh", pgh_spectrum(ctx, num)?)],
        Pipeline::Austere => {
            let (key, spectrum) = default_spectrum(ctx, num)?;
            let verdict = check_austere(&spectrum, num.tolerances.symmetry);
            vec![ResultItem::verdict("austere", verdict), ResultItem::spectrum(key, spectrum)]
        }
        Pipeline::TotallyGeodesic => {
            let verdict = match (&ctx.n_spec, &ctx.setup) {
                (Some(n_spec), _) => classify_totally_geodesic(n_spec, num.samples, &mopts, num.seed)?,
                (None, Some(setup)) => classify_fiber_tg(setup)?,
                (None, None) => return Err(Error::Schema("pipeline needs `n_spec` or `homogeneous`".into())),
            };
            vec![ResultItem::verdict("totally_geodesic", verdict)]
        }
        Pipeline::InverseClosed => {
            let h = require(ctx.h.as_ref(), "h")?;
            vec![ResultItem::verdict("inverse_closed", check_inverse_closed(h, num.samples, &mopts, num.seed))]
        }
        Pipeline::Reflection => {
            let h = require(ctx.h.as_ref(), "h")?;
            let spec = config.reflection.clone().unwrap_or(ReflectionSpec::Canonical);
            let candidate = build_reflection(&spec, &ctx.group, ctx.setup.as_ref(), &mopts)?;
            let orbit = OrbitGeometry::new(h.clone())?;
            let xi = element(ctx, ctx.normal.clone().map_or_else(|| first_normal(&orbit), Ok)?)?;
            let u = DiscretePath::zeros(ctx.group.algebra().clone(), num.n)?;
            let x = DiscretePath::constant(&xi, num.n)?;
            let verdict = verify_reflection(&candidate, h, &u, &x, num.samples, &mopts, num.seed)?;
            vec![ResultItem::verdict("reflection", verdict)]
        }
        Pipeline::Minimality => {
            let n_spec = require(ctx.n_spec.as_ref(), "n_spec")?;
            let dirs = match &ctx.normal {
                Some(xi) => vec![n_spec.normal_vector(xi.clone())?],
                None => n_spec
                    .normal()
                    .iter()
                    .map(|xi| n_spec.normal_vector(xi.clone()))
                    .collect::<Result<Vec<_>>>()?,
            };
            let (verdict, spectra) = check_minimality(n_spec, &dirs, num.modes, num.n)?;
            let mut items = vec![ResultItem::verdict("minimality", verdict)];
            items.extend(spectra.into_iter().enumerate().map(|(i, s)| ResultItem::spectrum(format!("direction_{i}"), s)));
            items
        }
        Pipeline::OracleCompare => {
            let n_spec = require(ctx.n_spec.as_ref(), "n_spec")?;
            let dev = oracle_deviation(n_spec, num.n, num.samples, num.seed)?;
            let verdict = VerdictReport::from_evidence(
                "oracle_agreement",
                vec![Evidence::at_most("max_deviation", dev, num.tolerances.oracle)],
                "closed-form second fundamental form of Phi^{-1}(N) against finite differences of a level-set description",
            );
            vec![ResultItem::verdict("oracle", verdict)]
        }
        Pipeline::Catalog(_) => unreachable!("catalog pipelines are resolved before execution"),
    })
}
