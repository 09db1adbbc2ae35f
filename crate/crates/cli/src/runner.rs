use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use ppl_core::covering::{build_instance, estimate_covering_probability, janson_check, sample_sf_d2_annulus, verify_appendix_hypotheses};
use ppl_core::exactlaw::{
    classify_regime, log_sf_cdf, origin_probability, predict_one_minus_supercritical,
    predict_regime_value, sf_inverse_level, solve_a_tau, Level, ModelParams, Regime, RegimeKind,
};
use ppl_core::mc::{self, Estimate};
use ppl_core::polysim::{in_hull, sample_poisson_ball_with, sf_dm_via_projection, support_value, volume_ratio_estimate};

use crate::config::{ExperimentConfig, Intensity, Kind};
use crate::error::{CliError, CliResult};
use crate::output;
use crate::stats::{gumbel_cdf, gumbel_statistic_1d_at, gumbel_statistic_md, ks_distance, median};

/// Values of h_{d,2} below r(τ) for this τ are censored in gumbel-md samples.
pub const CENSOR_TAU: f64 = 6.0;

const DEFAULT_TAUS: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or(Cell::Empty, Cell::Float)
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: String,
    pub config_hash: String,
    pub wall_clock_secs: f64,
    pub warnings: Vec<String>,
    /// Whether any statistic came from an approximate path.
    pub approximate: bool,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub wall_clock_secs: f64,
    pub version: String,
    pub config_hash: String,
    pub warnings: Vec<String>,
    pub approximate: bool,
}

impl ExperimentResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose `row` column equals `tag`.
    pub fn rows_tagged<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a Vec<Cell>> + 'a {
        let idx = self.column("row");
        self.rows.iter().filter(move |r| idx.is_some_and(|i| r[i] == Cell::Text(tag.to_string())))
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            config: self.config.clone(),
            seed: self.config.seed,
            version: self.version.clone(),
            config_hash: self.config_hash.clone(),
            wall_clock_secs: self.wall_clock_secs,
            warnings: self.warnings.clone(),
            approximate: self.approximate,
            columns: self.columns.clone(),
            rows: self.rows.len(),
        }
    }
}

/// sha256 of the canonical config JSON, ignoring the output path.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.out = None;
    let digest = Sha256::digest(c.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Per-dimension parameters shared by every kind.
struct Slice {
    params: ModelParams,
    regime: Regime,
}

impl Slice {
    fn prefix(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.params.d()),
            Cell::Float(self.params.l()),
            text(self.regime.kind().name()),
            Cell::Bool(self.params.hypothesis_h()),
        ]
    }
}

const PREFIX: [&str; 4] = ["d", "L", "regime", "h_surrogate"];

struct Ctx {
    rows: Vec<Vec<Cell>>,
    warnings: Vec<String>,
    approximate: bool,
}

impl Ctx {
    fn push(&mut self, slice: &Slice, cells: Vec<Cell>) {
        let mut row = slice.prefix();
        row.extend(cells);
        self.rows.push(row);
    }
}

fn resolve_regime(config: &ExperimentConfig, warnings: &mut Vec<String>) -> CliResult<Option<Regime>> {
    let f = |d: f64| config.intensity.l_at(d);
    let named = match config.intensity {
        Intensity::Explicit { .. } | Intensity::MeanCount { .. } => return Ok(None),
        Intensity::Subcritical(_) => Some(Regime::subcritical()),
        Intensity::Critical { x, .. } => Some(Regime::critical(x)?),
        Intensity::Supercritical(_) => Some(Regime::supercritical()),
        Intensity::VolumeCritical { .. } => None,
    };
    let classified = classify_regime(f);
    match (named, classified) {
        (Some(n), Ok(est)) => {
            if est.regime.kind() != n.kind() {
                warnings.push(format!(
                    "intensity recipe is labelled {} but L(d)/d classifies as {}",
                    n.kind().name(),
                    est.regime.kind().name()
                ));
            }
            Ok(Some(n))
        }
        (Some(n), Err(e)) => {
            warnings.push(format!("regime classification failed: {e}"));
            Ok(Some(n))
        }
        (None, Ok(est)) => Ok(Some(est.regime)),
        (None, Err(e)) => Err(e.into()),
    }
}

fn slices(config: &ExperimentConfig, warnings: &mut Vec<String>) -> CliResult<Vec<Slice>> {
    let recipe = resolve_regime(config, warnings)?;
    let mut out = Vec::with_capacity(config.d.len());
    for &d in &config.d {
        let l = config.intensity.l_at(d as f64);
        let params = ModelParams::new(d, l)?;
        // fixed L is normalized as critical with x = L/d
        let regime = match recipe {
            Some(r) => r,
            None => Regime::critical(l / d as f64)
                .map_err(|_| CliError::Config { field: "intensity".into(), msg: format!("L = {l} must be positive at d = {d}") })?,
        };
        if regime.kind() == RegimeKind::Subcritical && params.subcritical_warning() {
            warnings.push(format!("d = {d}: L = {l} is at most 2 ln d; subcritical normalizer is outside its range"));
        }
        out.push(Slice { params, regime });
    }
    Ok(out)
}

/// Common random numbers: replication i uses the same uniform at every d.
fn crn_uniforms(seed: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| mc::stream(seed, i as u64).random::<f64>()).collect()
}

fn exact_cdf(params: &ModelParams) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| log_sf_cdf(params, x.clamp(0.0, 1.0)).map(|v| v.exp()).unwrap_or(f64::NAN)
}

fn columns_for(kind: Kind) -> Vec<&'static str> {
    let tail: &[&str] = match kind {
        Kind::SfCdf => &["r", "log_cdf"],
        Kind::SfSample => &["row", "rep", "value"],
        Kind::Gumbel1d => &["row", "rep", "r", "value"],
        Kind::GumbelMd => &["row", "rep", "tau", "r", "value", "std_err", "reference"],
        Kind::PolysimCrosscheck => &["row", "rep", "value", "std_err", "reference"],
        Kind::CoveringCrosscheck => &["r", "p_polysim", "se_polysim", "p_covering", "se_covering", "z"],
        Kind::RegimesTable => &["quantity", "predicted", "median", "rel_err"],
        Kind::AppendixVerify => &[
            "row", "tau", "a", "r", "j", "inv_a", "inv_a_asymptotic", "sup_ratio", "ratio_ok", "w1",
            "w1_truncation", "w1_scaled", "decay",
        ],
        Kind::VolumeRatio => &["n_dirs", "estimate", "std_err", "e_minus_x"],
    };
    PREFIX.iter().chain(tail).copied().collect()
}

/// Run an experiment; when the config names an output path, also write
/// `<out>.csv` and `<out>.meta.json`.
pub fn run(config: &ExperimentConfig) -> CliResult<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let mut warnings = Vec::new();
    let slices = slices(config, &mut warnings)?;
    let mut ctx = Ctx { rows: Vec::new(), warnings, approximate: false };
    for slice in &slices {
        match config.kind {
            Kind::SfCdf => run_sf_cdf(config, slice, &mut ctx)?,
            Kind::SfSample => run_sf_sample(config, slice, &mut ctx)?,
            Kind::Gumbel1d => run_gumbel_1d(config, slice, &mut ctx)?,
            Kind::GumbelMd => run_gumbel_md(config, slice, &mut ctx)?,
            Kind::PolysimCrosscheck => run_polysim(config, slice, &mut ctx)?,
            Kind::CoveringCrosscheck => run_covering(config, slice, &mut ctx)?,
            Kind::RegimesTable => run_regimes(slice, &mut ctx)?,
            Kind::AppendixVerify => run_appendix(config, slice, &mut ctx)?,
            Kind::VolumeRatio => run_volume(config, slice, &mut ctx)?,
        }
    }
    let result = ExperimentResult {
        config: config.clone(),
        columns: columns_for(config.kind).into_iter().map(String::from).collect(),
        rows: ctx.rows,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config),
        warnings: ctx.warnings,
        approximate: ctx.approximate,
    };
    if let Some(out) = &config.out {
        output::write(&result, out)?;
    }
    Ok(result)
}

fn run_sf_cdf(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let grid: Vec<f64> = if config.r.is_empty() {
        (0..=100).map(|i| i as f64 / 100.0).collect()
    } else {
        config.r.clone()
    };
    for r in grid {
        let v = log_sf_cdf(&slice.params, r)?;
        ctx.push(slice, vec![Cell::Float(r), Cell::Float(v.ln())]);
    }
    Ok(())
}

fn exact_levels(config: &ExperimentConfig, params: &ModelParams) -> CliResult<Vec<Level>> {
    let us = crn_uniforms(config.seed, config.reps);
    let levels: ppl_core::Result<Vec<Level>> = us.par_iter().map(|&u| sf_inverse_level(params, u)).collect();
    Ok(levels?)
}

fn run_sf_sample(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let levels = exact_levels(config, &slice.params)?;
    let rs: Vec<f64> = levels.iter().map(Level::r).collect();
    for (i, &r) in rs.iter().enumerate() {
        ctx.push(slice, vec![text("sample"), Cell::Int(i as u64), Cell::Float(r)]);
    }
    ctx.push(slice, vec![text("median"), Cell::Empty, Cell::Float(median(&rs))]);
    let predicted = predict_regime_value(&slice.params, &slice.regime)?;
    ctx.push(slice, vec![text("predicted"), Cell::Empty, Cell::Float(predicted)]);
    Ok(())
}

fn run_gumbel_1d(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let levels = exact_levels(config, &slice.params)?;
    let stats: ppl_core::Result<Vec<f64>> =
        levels.iter().map(|lv| gumbel_statistic_1d_at(&slice.params, &slice.regime, lv)).collect();
    let stats = stats?;
    for (i, (lv, t)) in levels.iter().zip(&stats).enumerate() {
        ctx.push(slice, vec![text("sample"), Cell::Int(i as u64), Cell::Float(lv.r()), Cell::Float(*t)]);
    }
    let ks = ks_distance(&stats, gumbel_cdf)?;
    ctx.push(slice, vec![text("ks"), Cell::Empty, Cell::Empty, Cell::Float(ks)]);
    Ok(())
}

fn run_gumbel_md(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let params = &slice.params;
    let m = config.m;
    let taus: &[f64] = if config.tau.is_empty() { &DEFAULT_TAUS } else { &config.tau };
    let covers: CliResult<Vec<(f64, f64, Estimate, bool)>> = taus
        .par_iter()
        .map(|&tau| {
            let sol = solve_a_tau(params, m, tau)?;
            let inst = build_instance(params, m, sol.level.r())?;
            let est = estimate_covering_probability(&inst, config.reps, config.seed)?;
            Ok((tau, sol.level.r(), est.estimate, est.approximate))
        })
        .collect();
    for (tau, r, est, approx) in covers? {
        ctx.approximate |= approx;
        ctx.push(
            slice,
            vec![
                text("cover"),
                Cell::Empty,
                Cell::Float(tau),
                Cell::Float(r),
                Cell::Float(est.mean),
                Cell::Float(est.std_err),
                Cell::Float(gumbel_cdf(tau)),
            ],
        );
    }
    if m != 2 {
        ctx.warnings.push(format!("d = {}: statistic samples are only drawn for m = 2", params.d()));
        return Ok(());
    }
    let r_min = solve_a_tau(params, 2, CENSOR_TAU)?.level.r();
    let sample_seed = config.seed.wrapping_add(1);
    let draws: ppl_core::Result<Vec<Option<f64>>> = (0..config.reps)
        .into_par_iter()
        .map(|i| sample_sf_d2_annulus(params, r_min, &mut mc::stream(sample_seed, i as u64)))
        .collect();
    let mut stats = Vec::with_capacity(config.reps);
    for (i, h) in draws?.into_iter().enumerate() {
        let t = match h {
            Some(h) if h > 0.0 && h < 1.0 => gumbel_statistic_md(params, 2, h)?,
            _ => f64::INFINITY,
        };
        stats.push(t);
        ctx.push(
            slice,
            vec![text("sample"), Cell::Int(i as u64), Cell::Empty, opt(h), Cell::Float(t), Cell::Empty, Cell::Empty],
        );
    }
    let censored = stats.iter().filter(|t| t.is_infinite()).count();
    if censored > 0 {
        ctx.warnings.push(format!("d = {}: {censored} samples censored below r = {r_min}", params.d()));
    }
    let ks = ks_distance(&stats, gumbel_cdf)?;
    ctx.push(
        slice,
        vec![text("ks"), Cell::Empty, Cell::Empty, Cell::Float(r_min), Cell::Float(ks), Cell::Empty, Cell::Empty],
    );
    Ok(())
}

fn run_polysim(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let params = &slice.params;
    let d = params.d() as usize;
    let mut u = vec![0.0; d];
    u[0] = 1.0;
    let origin = vec![0.0; d];
    let draws: ppl_core::Result<Vec<(f64, bool)>> = (0..config.reps)
        .into_par_iter()
        .map(|i| {
            let cloud = sample_poisson_ball_with(d, params.l(), &mut mc::stream(config.seed, i as u64))?;
            let h = support_value(&cloud, &u)?;
            let inside = cloud.len() > d && in_hull(&cloud, &origin)?;
            Ok((h, inside))
        })
        .collect();
    let draws = draws?;
    let hs: Vec<f64> = draws.iter().map(|p| p.0).collect();
    for (i, &h) in hs.iter().enumerate() {
        ctx.push(slice, vec![text("sample"), Cell::Int(i as u64), Cell::Float(h), Cell::Empty, Cell::Empty]);
    }
    let ks = ks_distance(&hs, exact_cdf(params))?;
    ctx.push(slice, vec![text("ks"), Cell::Empty, Cell::Float(ks), Cell::Empty, Cell::Empty]);
    let hits = draws.iter().filter(|p| p.1).count();
    let est = Estimate::from_bernoulli(hits, config.reps);
    let exact = origin_probability(params);
    ctx.approximate |= exact.approximate;
    ctx.push(
        slice,
        vec![text("origin"), Cell::Empty, Cell::Float(est.mean), Cell::Float(est.std_err), Cell::Float(exact.value)],
    );
    Ok(())
}

fn run_covering(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    if config.m != 2 {
        return Err(CliError::Config { field: "m".into(), msg: "covering-crosscheck compares against projections and needs m = 2".into() });
    }
    if config.r.is_empty() {
        return Err(CliError::Config { field: "r".into(), msg: "covering-crosscheck needs at least one level".into() });
    }
    let params = &slice.params;
    let d = params.d() as usize;
    let inradii: ppl_core::Result<Vec<f64>> = (0..config.reps)
        .into_par_iter()
        .map(|i| {
            let cloud = sample_poisson_ball_with(d, params.l(), &mut mc::stream(config.seed, i as u64))?;
            sf_dm_via_projection(&cloud, 2)
        })
        .collect();
    let inradii = inradii?;
    let covering: CliResult<Vec<Estimate>> = config
        .r
        .par_iter()
        .map(|&r| {
            let inst = build_instance(params, 2, r)?;
            Ok(estimate_covering_probability(&inst, config.reps, config.seed.wrapping_add(1))?.estimate)
        })
        .collect();
    for (&r, cov) in config.r.iter().zip(covering?) {
        let hits = inradii.iter().filter(|&&h| h >= r).count();
        let poly = Estimate::from_bernoulli(hits, config.reps);
        ctx.push(
            slice,
            vec![
                Cell::Float(r),
                Cell::Float(poly.mean),
                Cell::Float(poly.std_err),
                Cell::Float(cov.mean),
                Cell::Float(cov.std_err),
                Cell::Float(poly.z_against(&cov)),
            ],
        );
    }
    Ok(())
}

fn run_regimes(slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let params = &slice.params;
    let med = sf_inverse_level(params, 0.5)?;
    let (quantity, predicted, observed) = if slice.regime.kind() == RegimeKind::Supercritical {
        ("1-h", predict_one_minus_supercritical(params), med.one_minus_r())
    } else {
        ("h", predict_regime_value(params, &slice.regime)?, med.r())
    };
    let rel = (observed - predicted) / predicted;
    ctx.push(slice, vec![text(quantity), Cell::Float(predicted), Cell::Float(observed), Cell::Float(rel)]);
    Ok(())
}

fn run_appendix(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let params = &slice.params;
    let m = config.m;
    let df = params.d() as f64;
    let taus: &[f64] = if config.tau.is_empty() { &DEFAULT_TAUS } else { &config.tau };
    let asymptotic = (df * (2.0 * params.l() / df).exp_m1()).sqrt();
    for &tau in taus {
        let j = janson_check(params, m, tau)?;
        let mut cells = vec![
            text("janson"),
            Cell::Float(tau),
            Cell::Float(j.a),
            Cell::Float(j.r),
            Cell::Float(j.j),
            Cell::Float(1.0 / j.a),
            Cell::Float(asymptotic),
        ];
        cells.extend(std::iter::repeat_n(Cell::Empty, 6));
        ctx.push(slice, cells);
    }
    let r = match slice.regime.x() {
        Some(x) if config.r.is_empty() => (-(-2.0 * x).exp_m1()).sqrt(),
        _ if !config.r.is_empty() => config.r[0],
        _ => solve_a_tau(params, m, 0.0)?.level.r(),
    };
    let rep = verify_appendix_hypotheses(params, m, r, config.w)?;
    let mut cells = vec![text("appendix"), Cell::Empty, Cell::Float(rep.a), Cell::Float(rep.r)];
    cells.extend(std::iter::repeat_n(Cell::Empty, 3));
    cells.extend([
        Cell::Float(rep.sup_ratio),
        Cell::Bool(rep.ratio_ok),
        Cell::Float(rep.w1),
        Cell::Float(rep.w1_truncation),
        Cell::Float(rep.w1_scaled),
        Cell::Float(rep.decay),
    ]);
    ctx.push(slice, cells);
    Ok(())
}

fn run_volume(config: &ExperimentConfig, slice: &Slice, ctx: &mut Ctx) -> CliResult<()> {
    let params = &slice.params;
    let est = volume_ratio_estimate(params.d() as usize, params.l(), config.dirs, config.reps, config.seed)?;
    let limit = match config.intensity {
        Intensity::VolumeCritical { x } => Some((-x).exp()),
        _ => None,
    };
    ctx.push(
        slice,
        vec![Cell::Int(config.dirs as u64), Cell::Float(est.mean), Cell::Float(est.std_err), opt(limit)],
    );
    Ok(())
}
