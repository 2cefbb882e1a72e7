//! Cross-validation bandwidth choice, the distance `d_A` and the plug-in
//! bandwidth.
//!
//! `CV(h) = (1/n) Σ_s ℓ_{s,n}(θ̂_{h,−s}(s/n)) w(s/n)`, where `θ̂_{h,−s}` drops
//! the `s`-th likelihood term from the localized sum. `ĥ` is the grid argmin.

pub mod info;
pub mod plugin;

pub use info::{info_matrices_closed_form, InfoMatrices, InfoSource, VTable};
pub use plugin::{dm_star_star, h0_formula, plugin_h0, PluginResult};

use crate::curve::{Component, ParamCurve};
use crate::error::{Error, Result};
use crate::estimator::{fit_local, ArMoments, FitOptions, LocalFit, Method};
use crate::grid::{BandwidthGrid, WeightFn};
use crate::kernel::{check_bandwidth, Kernel};
use crate::likelihood::{Objective, TruncatedPast, Window};
use crate::model::{Family, ThetaBox};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// `CV(h)` together with the full-sample fits computed along the way.
#[derive(Clone, Debug)]
pub struct CvEvaluation {
    pub h: f64,
    /// `+∞` when poisoned
    pub value: f64,
    pub poisoned: bool,
    /// leave-one-out solves that failed or did not converge
    pub failures: usize,
    /// `θ̂_h(s/n)` at every weighted `s`
    pub fit: LocalFit,
    pub warnings: Vec<String>,
}

struct PointFit {
    full: Vec<f64>,
    full_converged: bool,
    full_iters: usize,
    loo: Vec<f64>,
    loo_converged: bool,
}

fn ar_point(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    h: f64,
    s: usize,
    order: usize,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<PointFit> {
    let n = xs.len();
    let u = s as f64 / n as f64;
    let window = Window::new(kernel, n, u, h)?;
    let mut moments = ArMoments::new(xs, &window, order);
    let solve = |m: &ArMoments, skip: Option<usize>, init: Option<&[f64]>| -> Result<(Vec<f64>, bool, usize)> {
        match m.solve(u) {
            Ok(th) if bounds.contains(&th) => Ok((th, true, 0)),
            Ok(th) => {
                let start = init.map(|t| t.to_vec()).unwrap_or(th);
                let newton = FitOptions {
                    method: Method::Newton,
                    ..*opts
                };
                let (t, d) = fit_local(obj, xs, kernel, u, h, skip, Some(&start), bounds, &newton)?;
                Ok((t, d.converged, d.iterations))
            }
            Err(e) => Err(e),
        }
    };
    let (full, full_converged, full_iters) = solve(&moments, None, None)?;
    moments.downdate(xs, s, window.weight(s));
    let (loo, loo_converged, _) = solve(&moments, Some(s), Some(&full))?;
    Ok(PointFit {
        full,
        full_converged,
        full_iters,
        loo,
        loo_converged,
    })
}

fn generic_point(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    h: f64,
    s: usize,
    prev: Option<&[f64]>,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<PointFit> {
    let u = s as f64 / xs.len() as f64;
    let (full, fd) = fit_local(obj, xs, kernel, u, h, None, prev, bounds, opts)?;
    let (loo, ld) = fit_local(obj, xs, kernel, u, h, Some(s), Some(&full), bounds, opts)?;
    Ok(PointFit {
        full,
        full_converged: fd.converged,
        full_iters: fd.iterations,
        loo,
        loo_converged: ld.converged,
    })
}

/// Evaluates `CV(h)` exactly, sweeping `s` through the weight support with
/// warm starts. Any failed or unconverged leave-one-out solve poisons `h`.
pub fn cv_evaluate(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    weight: &WeightFn,
    h: f64,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<CvEvaluation> {
    check_bandwidth(h)?;
    let n = xs.len();
    let points = weight.indices(n);
    let p = obj.dim();
    let ar_order = match (opts.method, obj.family()) {
        (Method::Auto, Family::TvAr { order }) => Some(order),
        _ => None,
    };
    let mut fit = LocalFit {
        h,
        n,
        eval_points: points.clone(),
        estimates: Vec::with_capacity(points.len()),
        converged: Vec::with_capacity(points.len()),
        newton_iters: Vec::with_capacity(points.len()),
    };
    let mut warnings = Vec::new();
    if points.is_empty() {
        warnings.push(format!("no observation of n = {n} falls inside the weight support"));
    }
    let mut sum = 0.0;
    let mut failures = 0;
    let mut prev: Option<Vec<f64>> = None;
    for &s in &points {
        let r = match ar_order {
            Some(order) => ar_point(obj, xs, kernel, h, s, order, bounds, opts),
            None => generic_point(obj, xs, kernel, h, s, prev.as_deref(), bounds, opts),
        };
        match r {
            Ok(pf) => {
                let term = obj.term(xs[s - 1], &TruncatedPast::new(xs, s), &pf.loo);
                match term {
                    Ok(acc) if pf.loo_converged && acc.value.is_finite() => sum += acc.value,
                    _ => failures += 1,
                }
                if pf.full_converged {
                    prev = Some(pf.full.clone());
                }
                fit.estimates.push(pf.full);
                fit.converged.push(pf.full_converged);
                fit.newton_iters.push(pf.full_iters);
            }
            Err(e) if e.is_numerical() => {
                failures += 1;
                fit.estimates.push(vec![f64::NAN; p]);
                fit.converged.push(false);
                fit.newton_iters.push(0);
            }
            Err(e) => return Err(e),
        }
    }
    let poisoned = failures > 0;
    if poisoned {
        warnings.push(format!("h = {h}: {failures} leave-one-out solves failed"));
    }
    Ok(CvEvaluation {
        h,
        value: if poisoned { f64::INFINITY } else { sum / n as f64 },
        poisoned,
        failures,
        fit,
        warnings,
    })
}

/// `CV(h)`; `+∞` for a poisoned bandwidth.
pub fn cv_functional(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    weight: &WeightFn,
    h: f64,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<f64> {
    Ok(cv_evaluate(obj, xs, kernel, weight, h, bounds, opts)?.value)
}

/// Index of the smallest value; ties go to the earlier (smaller-h) entry.
/// `None` if no value is finite.
pub fn grid_argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub n: usize,
    pub grid: Vec<f64>,
    pub cv_values: Vec<f64>,
    pub poisoned: Vec<bool>,
    pub h_hat: f64,
    pub h_star: Option<f64>,
    pub h_0: Option<f64>,
    pub v0: Option<f64>,
    pub b0: Option<f64>,
    pub d_a_values: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct Summary<'a> {
    n: usize,
    h_hat: f64,
    h_star: Option<f64>,
    h_0: Option<f64>,
    #[serde(rename = "V0")]
    v0: Option<f64>,
    #[serde(rename = "B0")]
    b0: Option<f64>,
    poisoned: Vec<f64>,
    grid: &'a [f64],
}

impl SelectionReport {
    /// Report from CV values on a grid.
    pub fn from_cv(n: usize, grid: &BandwidthGrid, cv_values: Vec<f64>, poisoned: Vec<bool>) -> Result<Self> {
        let i = grid_argmin(&cv_values).ok_or_else(|| Error::Domain("CV is infinite at every grid bandwidth".into()))?;
        Ok(Self {
            n,
            grid: grid.points().to_vec(),
            h_hat: grid.points()[i],
            cv_values,
            poisoned,
            h_star: None,
            h_0: None,
            v0: None,
            b0: None,
            d_a_values: None,
        })
    }

    pub fn h_hat_index(&self) -> usize {
        self.grid.iter().position(|&h| h == self.h_hat).unwrap_or(0)
    }

    /// Stores `d_A` per grid point and sets `h*` to its argmin.
    pub fn set_distances(&mut self, d_a: Vec<f64>) {
        self.h_star = grid_argmin(&d_a).map(|i| self.grid[i]);
        self.d_a_values = Some(d_a);
    }

    pub fn set_plugin(&mut self, plugin: &PluginResult) {
        self.h_0 = Some(plugin.h0);
        self.v0 = Some(plugin.v0);
        self.b0 = Some(plugin.b0);
    }

    /// Writes `h,CV,d_A` (empty `d_A` cells without a truth).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "h,CV,d_A")?;
        for (i, h) in self.grid.iter().enumerate() {
            let d = self
                .d_a_values
                .as_ref()
                .map(|d| d[i].to_string())
                .unwrap_or_default();
            writeln!(out, "{h},{},{d}", self.cv_values[i])?;
        }
        Ok(())
    }

    /// JSON object with `h_hat`, `h_star`, `h_0`, `V0`, `B0`.
    pub fn summary_json(&self) -> Result<String> {
        let s = Summary {
            n: self.n,
            h_hat: self.h_hat,
            h_star: self.h_star,
            h_0: self.h_0,
            v0: self.v0,
            b0: self.b0,
            poisoned: self
                .grid
                .iter()
                .zip(&self.poisoned)
                .filter(|(_, p)| **p)
                .map(|(h, _)| *h)
                .collect(),
            grid: &self.grid,
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }
}

/// CV over a grid, returning the per-`h` evaluations (in grid order) as well.
/// Bandwidths are processed concurrently.
pub fn select_bandwidth_full(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    weight: &WeightFn,
    grid: &BandwidthGrid,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<(SelectionReport, Vec<CvEvaluation>)> {
    let evals = grid
        .points()
        .par_iter()
        .map(|&h| cv_evaluate(obj, xs, kernel, weight, h, bounds, opts))
        .collect::<Result<Vec<_>>>()?;
    let report = SelectionReport::from_cv(
        xs.len(),
        grid,
        evals.iter().map(|e| e.value).collect(),
        evals.iter().map(|e| e.poisoned).collect(),
    )?;
    Ok((report, evals))
}

/// `ĥ = argmin_{h ∈ grid} CV(h)`.
pub fn select_bandwidth(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    weight: &WeightFn,
    grid: &BandwidthGrid,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<SelectionReport> {
    Ok(select_bandwidth_full(obj, xs, kernel, weight, grid, bounds, opts)?.0)
}

/// `d_A = (1/n) Σ_t |θ̂(t/n) − θ₀(t/n)|²_{V(θ₀(t/n))} w(t/n)` with a
/// precomputed `V` table. Non-finite estimates give `+∞`.
pub fn distance_da_table(fit: &LocalFit, truth: &ParamCurve, table: &VTable) -> Result<f64> {
    if fit.eval_points != table.points || fit.n != table.n {
        return Err(Error::InvalidArgument(
            "fit and information table use different evaluation points".into(),
        ));
    }
    let mut sum = 0.0;
    for (i, est) in fit.estimates.iter().enumerate() {
        if est.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let th0 = truth.eval(fit.u(i));
        let e = nalgebra::DVector::from_iterator(est.len(), est.iter().zip(&th0).map(|(a, b)| a - b));
        sum += (e.transpose() * &table.matrices[i] * &e)[(0, 0)];
    }
    Ok(sum / fit.n as f64)
}

/// [`distance_da_table`] building `V(θ₀(t/n))` on the fly.
pub fn distance_da(fit: &LocalFit, truth: &ParamCurve, info: &InfoMatrices, weight: &WeightFn) -> Result<f64> {
    let expected = weight.indices(fit.n);
    if fit.eval_points != expected {
        return Err(Error::InvalidArgument(
            "fit points differ from the weight support".into(),
        ));
    }
    let table = info.v_table(truth, fit.n, &fit.eval_points)?;
    distance_da_table(fit, truth, &table)
}

/// Pseudo-true tvAR(1) curve `θ₀^ms` for data from `source`.
pub fn misspecified_target(source: Family, curve: &ParamCurve) -> Result<ParamCurve> {
    if curve.dim() != source.dim() {
        return Err(Error::InvalidArgument(format!(
            "curve has {} components, {} needs {}",
            curve.dim(),
            source.dim(),
            source.dim()
        )));
    }
    let c = curve.clone();
    match source {
        Family::TvMa1 => {
            let c2 = curve.clone();
            ParamCurve::new(vec![
                Component::function(move |u| {
                    let a = c.eval(u)[0];
                    a / (1.0 + a * a)
                }),
                Component::function(move |u| {
                    let th = c2.eval(u);
                    let a2 = th[0] * th[0];
                    ((1.0 + a2 + a2 * a2) / (1.0 + a2)).sqrt() * th[1]
                }),
            ])
        }
        Family::TvArch { order: 1 } => ParamCurve::new(vec![
            Component::Constant(0.0),
            Component::function(move |u| {
                let th = c.eval(u);
                (th[0] / (1.0 - th[1])).sqrt()
            }),
        ]),
        other => Err(Error::Unsupported(format!(
            "no tvAR(1) misspecification target for {}",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn argmin_prefers_smaller_h_on_ties() {
        assert_eq!(grid_argmin(&[3.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(grid_argmin(&[f64::INFINITY, f64::NAN]), None);
        assert_eq!(grid_argmin(&[5.0]), Some(0));
    }

    #[test]
    fn misspecified_targets_match_closed_forms() {
        let ma = ParamCurve::constant(&[0.9, 0.8]);
        let t = misspecified_target(Family::TvMa1, &ma).unwrap().eval(0.3);
        assert_relative_eq!(t[0], 0.9 / 1.81, epsilon = 1e-12);
        assert_relative_eq!(t[1], (2.4661f64 / 1.81).sqrt() * 0.8, epsilon = 1e-12);
        let zero = ParamCurve::constant(&[0.0, 1.3]);
        assert_eq!(misspecified_target(Family::TvMa1, &zero).unwrap().eval(0.5), vec![0.0, 1.3]);
        let arch = ParamCurve::constant(&[0.4, 0.2]);
        let t = misspecified_target(Family::TvArch { order: 1 }, &arch).unwrap().eval(0.7);
        assert_eq!(t[0], 0.0);
        assert_relative_eq!(t[1], 0.5f64.sqrt(), epsilon = 1e-12);
        assert!(misspecified_target(Family::TvTar1, &ParamCurve::constant(&[0.1, 0.1, 1.0])).is_err());
    }
}
