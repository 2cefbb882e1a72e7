//! Triangular-array simulation of the time-varying model families and of
//! their stationary (frozen-parameter) counterparts.
//!
//! Pre-sample states start at zero and the recursion is run for
//! [`BURN_IN`] steps with the coefficients frozen at `θ(0)` before `t = 1`.

use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::model::{Family, ModelSpec};
use crate::seed::stream;
use rand::Rng;
use sha2::{Digest, Sha256};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const BURN_IN: usize = 500;

#[derive(Clone, Debug)]
pub struct SimulatedSeries {
    pub n: usize,
    /// `values[t - 1] = X_{t,n}`
    pub values: Vec<f64>,
    pub spec: ModelSpec,
    pub curve: ParamCurve,
    pub seed: u64,
    pub stream: u64,
    /// `innovations[t - 1] = ε_t`
    pub innovations: Option<Vec<f64>>,
}

impl SimulatedSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Simulates the family named by `spec` with generator stream `(seed, 0)`.
pub fn simulate(spec: &ModelSpec, curve: &ParamCurve, n: usize, seed: u64) -> Result<SimulatedSeries> {
    simulate_stream(spec, curve, n, seed, 0)
}

/// As [`simulate`] but drawing from stream `index` of `seed`.
pub fn simulate_stream(
    spec: &ModelSpec,
    curve: &ParamCurve,
    n: usize,
    seed: u64,
    index: u64,
) -> Result<SimulatedSeries> {
    validate(spec, curve, n)?;
    let mut rng = stream(seed, index);
    let (values, innovations) = run(spec, curve, n, &mut rng);
    if let Some(t) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("simulation diverged at t = {}", t + 1)));
    }
    Ok(SimulatedSeries {
        n,
        values,
        spec: spec.clone(),
        curve: curve.clone(),
        seed,
        stream: index,
        innovations: Some(innovations),
    })
}

fn expect_family(spec: &ModelSpec, ok: bool, want: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "expected a {want} spec, got {}",
            spec.family.name()
        )))
    }
}

pub fn simulate_tvar(spec: &ModelSpec, curve: &ParamCurve, n: usize, seed: u64) -> Result<SimulatedSeries> {
    expect_family(spec, matches!(spec.family, Family::TvAr { .. }), "tvAR")?;
    simulate(spec, curve, n, seed)
}

pub fn simulate_tvma1(spec: &ModelSpec, curve: &ParamCurve, n: usize, seed: u64) -> Result<SimulatedSeries> {
    expect_family(spec, spec.family == Family::TvMa1, "tvMA(1)")?;
    simulate(spec, curve, n, seed)
}

pub fn simulate_tvarch(spec: &ModelSpec, curve: &ParamCurve, n: usize, seed: u64) -> Result<SimulatedSeries> {
    expect_family(spec, matches!(spec.family, Family::TvArch { .. }), "tvARCH")?;
    simulate(spec, curve, n, seed)
}

pub fn simulate_tvtar1(spec: &ModelSpec, curve: &ParamCurve, n: usize, seed: u64) -> Result<SimulatedSeries> {
    expect_family(spec, spec.family == Family::TvTar1, "tvTAR(1)")?;
    simulate(spec, curve, n, seed)
}

/// Stationary process `X̃_t(θ)` with frozen `θ`.
pub fn simulate_stationary(spec: &ModelSpec, theta: &[f64], n: usize, seed: u64) -> Result<SimulatedSeries> {
    simulate(spec, &ParamCurve::constant(theta), n, seed)
}

fn validate(spec: &ModelSpec, curve: &ParamCurve, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("series length must be positive".into()));
    }
    spec.validate()?;
    spec.check_curve(curve, n)?;
    let grid = (0..=n).map(|t| curve.eval(t as f64 / n as f64));
    match spec.family {
        Family::TvArch { order } => {
            let mut sup = vec![0.0f64; order];
            for theta in grid {
                if theta[0] <= 0.0 || theta.iter().any(|&a| a < 0.0) {
                    return Err(Error::InvalidArgument(
                        "ARCH coefficients must be nonnegative with positive intercept".into(),
                    ));
                }
                for (s, &a) in sup.iter_mut().zip(&theta[1..]) {
                    *s = s.max(a);
                }
            }
            let total: f64 = sup.iter().sum();
            if total >= 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "ARCH stability requires Σ sup a_i < 1, got {total}"
                )));
            }
        }
        Family::TvTar1 => {
            for theta in grid {
                if theta[0].abs() >= 1.0 || theta[1].abs() >= 1.0 {
                    return Err(Error::InvalidArgument(
                        "TAR coefficients must satisfy |a_i| < 1".into(),
                    ));
                }
            }
        }
        Family::TvAr { order } => {
            for theta in grid {
                if theta[order] <= 0.0 {
                    return Err(Error::InvalidArgument("σ(u) must be positive".into()));
                }
            }
        }
        Family::TvMa1 => {
            for theta in grid {
                if theta[1] <= 0.0 {
                    return Err(Error::InvalidArgument("σ(u) must be positive".into()));
                }
            }
        }
    }
    Ok(())
}

/// One step of the recursion. `hist[k]` holds `X_{t-1-k}`; `prev_scaled` is
/// `σ((t-1)/n) ε_{t-1}` (used by the MA family only).
#[inline]
fn step(family: Family, theta: &[f64], hist: &[f64], eps: f64, prev_scaled: f64) -> f64 {
    match family {
        Family::TvAr { order } => {
            let mut x = theta[order] * eps;
            for j in 0..order {
                x += theta[j] * hist[j];
            }
            x
        }
        Family::TvMa1 => theta[1] * eps + theta[0] * prev_scaled,
        Family::TvArch { order } => {
            let mut v = theta[0];
            for j in 0..order {
                v += theta[j + 1] * hist[j] * hist[j];
            }
            v.sqrt() * eps
        }
        Family::TvTar1 => {
            let y = hist[0];
            theta[0] * y.max(0.0) + theta[1] * (-y).max(0.0) + theta[2] * eps
        }
    }
}

fn scale_of(family: Family, theta: &[f64]) -> f64 {
    match family {
        Family::TvMa1 => theta[1],
        _ => 0.0,
    }
}

fn run<R: Rng + ?Sized>(spec: &ModelSpec, curve: &ParamCurve, n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let family = spec.family;
    let lags = family.max_lag().unwrap_or(1).max(1);
    let mut hist = vec![0.0; lags];
    let push = |hist: &mut Vec<f64>, x: f64| {
        hist.rotate_right(1);
        hist[0] = x;
    };
    let theta0 = curve.eval(0.0);
    let mut prev_scaled = 0.0;
    for _ in 0..BURN_IN {
        let eps = spec.innovation.sample(rng);
        let x = step(family, &theta0, &hist, eps, prev_scaled);
        prev_scaled = scale_of(family, &theta0) * eps;
        push(&mut hist, x);
    }
    let mut values = Vec::with_capacity(n);
    let mut innovations = Vec::with_capacity(n);
    for t in 1..=n {
        let theta = curve.eval(t as f64 / n as f64);
        let eps = spec.innovation.sample(rng);
        let x = step(family, &theta, &hist, eps, prev_scaled);
        prev_scaled = scale_of(family, &theta) * eps;
        push(&mut hist, x);
        values.push(x);
        innovations.push(eps);
    }
    (values, innovations)
}

/// First 8 bytes (little endian) of the SHA-256 of the spec's JSON form.
pub fn spec_hash(spec: &ModelSpec) -> u64 {
    let json = serde_json::to_vec(spec).expect("spec serializes");
    let digest = Sha256::digest(&json);
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Writes `t,u,x` rows.
pub fn write_csv<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let n = values.len();
    writeln!(out, "t,u,x")?;
    for (i, x) in values.iter().enumerate() {
        let t = i + 1;
        writeln!(out, "{t},{},{x}", t as f64 / n as f64)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(values: &[f64], path: &Path) -> Result<()> {
    write_csv(values, std::fs::File::create(path)?)
}

/// Reads the `x` column of a `t,u,x` file.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty series file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let x_col = cols
        .iter()
        .position(|c| *c == "x")
        .ok_or_else(|| Error::Parse("series file has no 'x' column".into()))?;
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let field = line
            .split(',')
            .nth(x_col)
            .ok_or_else(|| Error::Parse(format!("line {}: missing x field", lineno + 2)))?;
        let x: f64 = field
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad number '{field}'", lineno + 2)))?;
        if !x.is_finite() {
            return Err(Error::Parse(format!("line {}: non-finite value", lineno + 2)));
        }
        values.push(x);
    }
    if values.is_empty() {
        return Err(Error::Parse("series file has no observations".into()));
    }
    Ok(values)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<f64>> {
    read_csv(std::fs::File::open(path)?)
}

/// Binary cache: `n`, `seed`, spec hash (all u64 LE) followed by `n` f64 LE.
pub fn write_cache<W: Write>(series: &SimulatedSeries, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(&(series.n as u64).to_le_bytes())?;
    out.write_all(&series.seed.to_le_bytes())?;
    out.write_all(&spec_hash(&series.spec).to_le_bytes())?;
    for x in &series.values {
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CachedSeries {
    pub seed: u64,
    pub spec_hash: u64,
    pub values: Vec<f64>,
}

pub fn read_cache<R: Read>(mut input: R) -> Result<CachedSeries> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf)?;
    if buf.len() < 24 {
        return Err(Error::Parse("cache header truncated".into()));
    }
    let word = |i: usize| u64::from_le_bytes(buf[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let n = word(0) as usize;
    if buf.len() != 24 + 8 * n {
        return Err(Error::Parse(format!(
            "cache holds {} bytes, expected {} for n = {n}",
            buf.len(),
            24 + 8 * n
        )));
    }
    let values = (0..n).map(|i| f64::from_bits(word(3 + i))).collect();
    Ok(CachedSeries {
        seed: word(1),
        spec_hash: word(2),
        values,
    })
}
