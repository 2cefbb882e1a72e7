use crate::config::{ConfigError, Resolved, RunConfig, Source};
use lscv::estimator::{fit_curve, FitOptions};
use lscv::experiments::{run_study_with, with_workers, write_study, ExperimentConfig, Mode, StudyContext};
use lscv::likelihood::objective_for;
use lscv::presets::Preset;
use lscv::processes::{read_csv_file, simulate, write_csv_file};
use lscv::selection::{
    distance_da_table, misspecified_target, plugin_h0, select_bandwidth_full, InfoMatrices,
};
use lscv::{epanechnikov, Family, ModelSpec, ParamCurve, ThetaBox, WeightFn};
use std::fs;
use std::io::Write;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: e.0,
        }
    }
}

impl From<lscv::Error> for Failure {
    fn from(e: lscv::Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        lscv::Error::from(e).into()
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: msg.into(),
    }
}

fn source(r: &Resolved) -> Result<&Source, Failure> {
    r.source
        .as_ref()
        .ok_or_else(|| config_error("a model preset (`model`) or curve table (`table`) is required"))
}

/// Data-generating spec for a source, with the standard parameter box.
fn spec_for(src: &Source, r: &Resolved) -> Result<ModelSpec, Failure> {
    let spec = ModelSpec::standard(src.family(), r.innovation);
    spec.validate()?;
    Ok(spec)
}

struct Data {
    values: Vec<f64>,
    simulated: bool,
}

fn load_or_simulate(r: &Resolved) -> Result<Data, Failure> {
    if let Some(path) = &r.input {
        let values = read_csv_file(path).map_err(|e| Failure {
            message: format!("cannot read input {}: {e}", path.display()),
            ..Failure::from(e)
        })?;
        return Ok(Data {
            values,
            simulated: false,
        });
    }
    let src = source(r)?;
    let spec = spec_for(src, r)?;
    let series = simulate(&spec, &src.curve(), r.n, r.seed)?;
    Ok(Data {
        values: series.values,
        simulated: true,
    })
}

/// Fitted family and the curve the estimates should be compared with.
fn fitted(src: &Source, r: &Resolved) -> Result<(Family, ParamCurve), Failure> {
    match r.mode {
        Mode::WellSpecified => Ok((src.family(), src.curve())),
        Mode::MisspecifiedToTvAr => Ok((
            Family::TvAr { order: 1 },
            misspecified_target(src.family(), &src.curve())?,
        )),
    }
}

pub fn simulate_cmd(r: &Resolved) -> Result<(), Failure> {
    let src = source(r)?;
    let spec = spec_for(src, r)?;
    let series = simulate(&spec, &src.curve(), r.n, r.seed)?;
    fs::create_dir_all(&r.out)?;
    let path = r.out.join("series.csv");
    write_csv_file(&series.values, &path)?;
    println!("seed {}", r.seed);
    println!("wrote {} ({} rows)", path.display(), series.n);
    Ok(())
}

pub fn fit(r: &Resolved) -> Result<(), Failure> {
    let h = r.h.ok_or_else(|| config_error("`fit` needs a bandwidth (`h`)"))?;
    let src = source(r)?;
    let (family, _) = fitted(src, r)?;
    let data = load_or_simulate(r)?;
    let obj = objective_for(family);
    let fit = fit_curve(
        obj.as_ref(),
        &data.values,
        &epanechnikov(),
        h,
        &WeightFn::default(),
        &ThetaBox::standard(family),
        &FitOptions::default(),
    )?;
    fs::create_dir_all(&r.out)?;
    let path = r.out.join("fit.csv");
    let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
    fit.write_csv(&mut f)?;
    f.flush()?;
    if data.simulated {
        println!("seed {}", r.seed);
    }
    println!(
        "{} fit at h = {h}: {} points, {} not converged; wrote {}",
        family.name(),
        fit.len(),
        fit.failures(),
        path.display()
    );
    Ok(())
}

pub fn cv(r: &Resolved) -> Result<(), Failure> {
    let src = source(r)?;
    let (family, target) = fitted(src, r)?;
    let data = load_or_simulate(r)?;
    let kernel = epanechnikov();
    let weight = WeightFn::default();
    let obj = objective_for(family);
    let bounds = ThetaBox::standard(family);
    let plugin = if r.plugin {
        if r.mode == Mode::MisspecifiedToTvAr {
            return Err(config_error("no plug-in bandwidth under misspecification"));
        }
        let info = InfoMatrices::for_family(family, r.innovation)?;
        Some(plugin_h0(family, &target, &kernel, &weight, data.values.len(), &info)?)
    } else {
        None
    };
    let (mut report, evals) = with_workers(r.workers, || {
        select_bandwidth_full(
            obj.as_ref(),
            &data.values,
            &kernel,
            &weight,
            &r.grid,
            &bounds,
            &FitOptions::default(),
        )
    })??;
    if data.simulated {
        let info = InfoMatrices::for_family(family, r.innovation)?;
        let table = info.v_table(&target, data.values.len(), &weight.indices(data.values.len()))?;
        let d_a = evals
            .iter()
            .map(|e| distance_da_table(&e.fit, &target, &table))
            .collect::<lscv::Result<Vec<_>>>()?;
        report.set_distances(d_a);
    }
    if let Some(p) = &plugin {
        report.set_plugin(p);
    }
    fs::create_dir_all(&r.out)?;
    let csv = r.out.join("cv.csv");
    let mut f = std::io::BufWriter::new(fs::File::create(&csv)?);
    report.write_csv(&mut f)?;
    f.flush()?;
    let summary = r.out.join("summary.json");
    fs::write(&summary, report.summary_json()? + "\n")?;
    for e in &evals {
        for w in &e.warnings {
            eprintln!("warning: {w}");
        }
    }
    if data.simulated {
        println!("seed {}", r.seed);
    }
    println!("h_hat = {}", report.h_hat);
    if let Some(h) = report.h_star {
        println!("h_star = {h}");
    }
    if let Some(p) = &plugin {
        println!("h_0 = {}", p.h0);
    }
    println!("wrote {} and {}", csv.display(), summary.display());
    Ok(())
}

/// Runs a study and records the effective configuration as `run.toml`.
pub fn study(r: &Resolved, config: &RunConfig) -> Result<(), Failure> {
    let preset = match source(r)? {
        Source::Preset(p) => *p,
        Source::Table { .. } => return Err(config_error("`study` runs the presets a..d only; table curves are not supported")),
    };
    if r.out.join("replications.csv").exists() {
        return Err(config_error(format!(
            "{} already contains replications.csv; studies cannot be resumed, choose a fresh --out",
            r.out.display()
        )));
    }
    let cfg = ExperimentConfig {
        grid: r.grid.clone(),
        base_seed: r.seed,
        innovation: r.innovation,
        mode: r.mode,
        workers: r.workers,
        ..ExperimentConfig::new(preset, r.n, r.reps)
    };
    let ctx = StudyContext::new(cfg)?;
    let out = run_study_with(&ctx)?;
    let files = write_study(&r.out, &out)?;
    fs::write(r.out.join("run.toml"), config.to_toml())?;
    let s = &out.summary;
    println!("seed {}", r.seed);
    println!(
        "{} n = {}: {} of {} replications succeeded",
        Preset::to_string(&preset),
        s.n,
        s.successes,
        s.reps
    );
    if let Some(q) = &s.h_hat_quantiles {
        println!("median h_hat = {}", q.median());
    }
    if let Some(h0) = s.h_0 {
        println!("h_0 = {h0}");
    }
    println!("wrote {}", files.replications.display());
    Ok(())
}
