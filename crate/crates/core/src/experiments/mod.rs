//! Monte Carlo study harness: simulate, select `ĥ` by cross validation, and
//! compare `d_A` at `ĥ`, the plug-in `h₀` and the oracle `h*`.

pub mod output;
pub mod stats;

pub use output::{write_study, StudyFiles};
pub use stats::{quantile, Histogram, Quantiles};

use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::estimator::FitOptions;
use crate::grid::{BandwidthGrid, WeightFn};
use crate::kernel::{epanechnikov, Kernel};
use crate::likelihood::{objective_for, Objective};
use crate::model::{Family, Innovation, ModelSpec, ThetaBox};
use crate::presets::Preset;
use crate::processes::simulate_stream;
use crate::selection::{
    distance_da_table, grid_argmin, misspecified_target, plugin_h0, select_bandwidth_full, InfoMatrices, PluginResult,
    VTable,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    WellSpecified,
    /// Fit tvAR(1) to data from models (b) or (c).
    MisspecifiedToTvAr,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: Preset,
    pub n: usize,
    pub reps: usize,
    pub grid: BandwidthGrid,
    pub base_seed: u64,
    pub innovation: Innovation,
    pub mode: Mode,
    pub weight: WeightFn,
    pub kernel: Kernel,
    /// worker threads for replications; 0 uses the global pool
    pub workers: usize,
    pub fit: FitOptions,
}

impl ExperimentConfig {
    /// Defaults: 40-point log grid, Gaussian innovations, weight on `[0.05, 0.95]`.
    pub fn new(model: Preset, n: usize, reps: usize) -> Self {
        Self {
            model,
            n,
            reps,
            grid: BandwidthGrid::default(),
            base_seed: 0,
            innovation: Innovation::Gaussian,
            mode: Mode::WellSpecified,
            weight: WeightFn::default(),
            kernel: epanechnikov(),
            workers: 0,
            fit: FitOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("series length n = {} too short", self.n)));
        }
        if self.mode == Mode::MisspecifiedToTvAr && !matches!(self.model, Preset::B | Preset::C) {
            return Err(Error::InvalidArgument(format!(
                "misspecified mode needs model b or c, got {}",
                self.model
            )));
        }
        Ok(())
    }
}

/// Everything shared by the replications of one study.
pub struct StudyContext {
    pub config: ExperimentConfig,
    pub spec: ModelSpec,
    pub curve: ParamCurve,
    pub fitted: Family,
    pub objective: Box<dyn Objective>,
    pub bounds: ThetaBox,
    /// `θ₀`, or `θ₀^ms` in misspecified mode
    pub target: ParamCurve,
    pub info: InfoMatrices,
    pub table: VTable,
    pub plugin: Option<PluginResult>,
    /// why `plugin` is absent
    pub plugin_note: Option<String>,
}

impl StudyContext {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.model.spec(config.innovation);
        let curve = config.model.curve();
        spec.check_curve(&curve, config.n)?;
        let (fitted, target) = match config.mode {
            Mode::WellSpecified => (spec.family, curve.clone()),
            Mode::MisspecifiedToTvAr => (Family::TvAr { order: 1 }, misspecified_target(spec.family, &curve)?),
        };
        let info = InfoMatrices::for_family(fitted, config.innovation)?;
        let points = config.weight.indices(config.n);
        let table = info.v_table(&target, config.n, &points)?;
        let (plugin, plugin_note) = match (config.mode, config.model) {
            (Mode::MisspecifiedToTvAr, _) => (None, Some("no plug-in bandwidth under misspecification".to_string())),
            (_, Preset::D) => (None, Some("threshold model lacks the smoothness for a plug-in bandwidth".to_string())),
            _ => match plugin_h0(fitted, &target, &config.kernel, &config.weight, config.n, &info) {
                Ok(p) => (Some(p), None),
                Err(e) if e.is_numerical() => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            },
        };
        Ok(Self {
            objective: objective_for(fitted),
            bounds: ThetaBox::standard(fitted),
            config,
            spec,
            curve,
            fitted,
            target,
            info,
            table,
            plugin,
            plugin_note,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub rep_index: usize,
    pub failed: bool,
    pub h_hat: f64,
    pub h_star: f64,
    pub h_0: Option<f64>,
    pub d_a_hat: f64,
    /// at the grid point nearest `h₀`
    pub d_a_h0: Option<f64>,
    pub d_a_star: f64,
    /// grid bandwidths with `CV = +∞`
    pub poisoned: usize,
    /// full-sample fits that did not converge, summed over the grid
    pub nonconverged: usize,
    pub error: Option<String>,
    /// `d_A` at every grid bandwidth
    pub d_a_curve: Vec<f64>,
}

impl ReplicationResult {
    fn failure(rep_index: usize, h_0: Option<f64>, message: String) -> Self {
        Self {
            rep_index,
            failed: true,
            h_hat: f64::NAN,
            h_star: f64::NAN,
            h_0,
            d_a_hat: f64::NAN,
            d_a_h0: None,
            d_a_star: f64::NAN,
            poisoned: 0,
            nonconverged: 0,
            error: Some(message),
            d_a_curve: Vec::new(),
        }
    }

    /// `d_A(ĥ) / d_A(h*)`.
    pub fn ratio(&self) -> f64 {
        self.d_a_hat / self.d_a_star
    }
}

/// One replication, deterministic in `(base_seed, rep_index)`.
pub fn run_replication(ctx: &StudyContext, rep_index: usize) -> Result<ReplicationResult> {
    let cfg = &ctx.config;
    let h_0 = ctx.plugin.map(|p| p.h0);
    let series = match simulate_stream(&ctx.spec, &ctx.curve, cfg.n, cfg.base_seed, rep_index as u64) {
        Ok(s) => s,
        Err(e) if e.is_numerical() => return Ok(ReplicationResult::failure(rep_index, h_0, e.to_string())),
        Err(e) => return Err(e),
    };
    let selected = select_bandwidth_full(
        ctx.objective.as_ref(),
        &series.values,
        &cfg.kernel,
        &cfg.weight,
        &cfg.grid,
        &ctx.bounds,
        &cfg.fit,
    );
    let (mut report, evals) = match selected {
        Ok(r) => r,
        Err(e) if e.is_numerical() => return Ok(ReplicationResult::failure(rep_index, h_0, e.to_string())),
        Err(e) => return Err(e),
    };
    let d_a = evals
        .iter()
        .map(|e| distance_da_table(&e.fit, &ctx.target, &ctx.table))
        .collect::<Result<Vec<_>>>()?;
    report.set_distances(d_a.clone());
    let star = match grid_argmin(&d_a) {
        Some(i) => i,
        None => {
            return Ok(ReplicationResult::failure(
                rep_index,
                h_0,
                "d_A is infinite at every grid bandwidth".into(),
            ))
        }
    };
    let hat = report.h_hat_index();
    Ok(ReplicationResult {
        rep_index,
        failed: false,
        h_hat: report.h_hat,
        h_star: cfg.grid.points()[star],
        h_0,
        d_a_hat: d_a[hat],
        d_a_h0: h_0.map(|h| d_a[cfg.grid.nearest(h)]),
        d_a_star: d_a[star],
        poisoned: evals.iter().filter(|e| e.poisoned).count(),
        nonconverged: evals.iter().map(|e| e.fit.failures()).sum(),
        error: None,
        d_a_curve: d_a,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorQuantiles {
    pub cv: Option<Quantiles>,
    pub plugin: Option<Quantiles>,
    pub optimal: Option<Quantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub model: String,
    pub family: String,
    pub mode: Mode,
    pub innovation: String,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub successes: usize,
    pub failures: usize,
    pub h_0: Option<f64>,
    #[serde(rename = "V0")]
    pub v0: Option<f64>,
    #[serde(rename = "B0")]
    pub b0: Option<f64>,
    pub plugin_note: Option<String>,
    pub h_hat_histogram: Histogram,
    pub h_hat_quantiles: Option<Quantiles>,
    pub h_star_quantiles: Option<Quantiles>,
    pub d_a: SelectorQuantiles,
    pub median_ratio_cv_to_optimal: Option<f64>,
    pub grid: Vec<f64>,
    /// Monte Carlo mean of `d_A` per grid bandwidth over successful replications
    pub mean_d_a: Vec<f64>,
    pub risk_minimizing_h: Option<f64>,
}

pub struct StudyOutput {
    pub replications: Vec<ReplicationResult>,
    pub summary: StudySummary,
}

/// Aggregates in `rep_index` order; failed replications are counted and excluded.
pub fn summarize(ctx: &StudyContext, reps: &[ReplicationResult]) -> StudySummary {
    let cfg = &ctx.config;
    let ok: Vec<&ReplicationResult> = reps.iter().filter(|r| !r.failed).collect();
    let col = |f: &dyn Fn(&ReplicationResult) -> f64| -> Vec<f64> { ok.iter().map(|r| f(r)).collect() };
    let h_hat = col(&|r| r.h_hat);
    let ratios = col(&|r| r.ratio());
    let g = cfg.grid.points();
    let mean_d_a: Vec<f64> = (0..g.len())
        .map(|i| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| r.d_a_curve[i]).sum::<f64>() / ok.len() as f64
            }
        })
        .collect();
    StudySummary {
        model: ctx.config.model.to_string(),
        family: ctx.fitted.name(),
        mode: cfg.mode,
        innovation: cfg.innovation.name().to_string(),
        n: cfg.n,
        reps: reps.len(),
        base_seed: cfg.base_seed,
        successes: ok.len(),
        failures: reps.len() - ok.len(),
        h_0: ctx.plugin.map(|p| p.h0),
        v0: ctx.plugin.map(|p| p.v0),
        b0: ctx.plugin.map(|p| p.b0),
        plugin_note: ctx.plugin_note.clone(),
        h_hat_histogram: Histogram::new(&h_hat, cfg.grid.h_min(), cfg.grid.h_max(), HISTOGRAM_BINS),
        h_hat_quantiles: Quantiles::box_plot(&h_hat),
        h_star_quantiles: Quantiles::box_plot(&col(&|r| r.h_star)),
        d_a: SelectorQuantiles {
            cv: Quantiles::box_plot(&col(&|r| r.d_a_hat)),
            plugin: ctx
                .plugin
                .and_then(|_| Quantiles::box_plot(&ok.iter().filter_map(|r| r.d_a_h0).collect::<Vec<_>>())),
            optimal: Quantiles::box_plot(&col(&|r| r.d_a_star)),
        },
        median_ratio_cv_to_optimal: stats::median(&ratios),
        grid: g.to_vec(),
        risk_minimizing_h: grid_argmin(&mean_d_a).map(|i| g[i]),
        mean_d_a,
    }
}

/// Runs every replication (concurrently, `workers` threads) and aggregates.
pub fn run_study(config: ExperimentConfig) -> Result<StudyOutput> {
    let ctx = StudyContext::new(config)?;
    run_study_with(&ctx)
}

pub fn run_study_with(ctx: &StudyContext) -> Result<StudyOutput> {
    let reps = ctx.config.reps;
    let replications = with_workers(ctx.config.workers, || {
        (0..reps).into_par_iter().map(|i| run_replication(ctx, i)).collect::<Result<Vec<_>>>()
    })??;
    let summary = summarize(ctx, &replications);
    Ok(StudyOutput { replications, summary })
}

/// Runs `job` on a pool of `workers` threads (`0` keeps the global pool).
pub fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// The same study with the innovation law replaced.
pub fn run_robustness(config: ExperimentConfig, innovation: Innovation) -> Result<StudyOutput> {
    run_study(ExperimentConfig { innovation, ..config })
}
