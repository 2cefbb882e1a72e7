//! Local M-estimation `θ̂_h(u) = argmin_{θ∈Θ} L_{n,h}(u, θ)`.
//!
//! The generic path is a projected Newton method with Levenberg-style
//! Hessian regularization and Armijo backtracking. For tvAR(r) the weighted
//! normal equations give the minimizer directly.

use crate::error::{Error, Result};
use crate::grid::WeightFn;
use crate::kernel::Kernel;
use crate::likelihood::{Accum, Objective, Order, TruncatedPast, Window};
use crate::model::{Family, ThetaBox};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub reg_start: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 100,
            armijo: 1e-4,
            reg_start: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed form where available (tvAR), projected Newton otherwise.
    #[default]
    Auto,
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StartMode {
    /// Sequential sweep, each point started from its predecessor's estimate.
    #[default]
    Warm,
    /// Every point started from its own lattice search; points may run in parallel.
    Cold,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FitOptions {
    pub method: Method,
    pub start: StartMode,
    pub newton: NewtonOptions,
}

/// Side of the box a coordinate ended on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Free,
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of the projected gradient at the returned point
    pub grad_norm: f64,
    pub objective: f64,
    pub fallback_used: bool,
    pub closed_form: bool,
    pub bounds: Vec<Bound>,
    /// Raw gradient at the returned point (sign certifies KKT at active bounds).
    pub gradient: Vec<f64>,
}

/// One localized minimization problem.
pub struct LocalProblem<'a> {
    pub obj: &'a dyn Objective,
    pub xs: &'a [f64],
    pub window: Window,
    pub skip: Option<usize>,
    pub bounds: &'a ThetaBox,
}

impl<'a> LocalProblem<'a> {
    pub fn new(
        obj: &'a dyn Objective,
        xs: &'a [f64],
        kernel: &Kernel,
        u: f64,
        h: f64,
        skip: Option<usize>,
        bounds: &'a ThetaBox,
    ) -> Result<Self> {
        if bounds.dim() != obj.dim() {
            return Err(Error::InvalidArgument(format!(
                "box has dimension {}, objective {}",
                bounds.dim(),
                obj.dim()
            )));
        }
        let window = Window::new(kernel, xs.len(), u, h)?;
        Ok(Self {
            obj,
            xs,
            window,
            skip,
            bounds,
        })
    }

    pub fn eval(&self, theta: &[f64], order: Order) -> Result<Accum> {
        let mut acc = Accum::new(self.obj.dim());
        self.obj
            .accumulate(self.xs, &self.window, self.skip, theta, order, &mut acc)?;
        Ok(acc)
    }

    /// Number of terms with positive weight.
    pub fn effective_terms(&self) -> usize {
        let first = self.window.start.max(self.obj.first_index());
        (first..=self.window.end().min(self.xs.len()))
            .filter(|&t| Some(t) != self.skip && self.window.weight(t) > 0.0)
            .count()
    }

    fn check_degenerate(&self) -> Result<()> {
        let p = self.obj.dim();
        let m = self.effective_terms();
        if m < p + 1 {
            return Err(Error::DegenerateWindow {
                u: self.window.u,
                reason: format!("{m} weighted terms for {p} parameters"),
            });
        }
        Ok(())
    }
}

fn projected_gradient(theta: &[f64], grad: &[f64], b: &ThetaBox) -> Vec<f64> {
    theta
        .iter()
        .zip(grad)
        .enumerate()
        .map(|(i, (&x, &g))| {
            if (x <= b.lower[i] && g > 0.0) || (x >= b.upper[i] && g < 0.0) {
                0.0
            } else {
                g
            }
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn bound_flags(theta: &[f64], b: &ThetaBox) -> Vec<Bound> {
    theta
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x <= b.lower[i] {
                Bound::Lower
            } else if x >= b.upper[i] {
                Bound::Upper
            } else {
                Bound::Free
            }
        })
        .collect()
}

/// Newton direction on the free coordinates, regularizing `H + λI` with λ
/// doubling from `reg_start` until the Cholesky factorization succeeds.
fn newton_direction(acc: &Accum, free: &[usize], reg_start: f64) -> Option<Vec<f64>> {
    let p = acc.dim();
    let k = free.len();
    let hf = DMatrix::from_fn(k, k, |i, j| 0.5 * (acc.h(free[i], free[j]) + acc.h(free[j], free[i])));
    let gf = DVector::from_fn(k, |i, _| -acc.grad[free[i]]);
    let scale = hf.diagonal().iter().fold(1.0f64, |m, d| m.max(d.abs()));
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut m = hf.clone();
        for i in 0..k {
            m[(i, i)] += lambda;
        }
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&gf);
            if d.iter().all(|x| x.is_finite()) {
                let mut full = vec![0.0; p];
                for (i, &fi) in free.iter().enumerate() {
                    full[fi] = d[i];
                }
                return Some(full);
            }
        }
        lambda = if lambda == 0.0 { reg_start * scale } else { 2.0 * lambda };
    }
    None
}

/// Golden-section search on one coordinate over `[lo, hi]`.
fn golden_section(f: &dyn Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, iters: usize) -> Option<(f64, f64)> {
    const R: f64 = 0.618_033_988_749_895;
    let mut c = hi - R * (hi - lo);
    let mut d = lo + R * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - R * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + R * (hi - lo);
            fd = f(d)?;
        }
    }
    Some(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Coordinate-wise golden-section refinement; returns an improved point if any.
fn coordinate_refine(problem: &LocalProblem<'_>, theta: &[f64], f0: f64, scale: &[f64]) -> Option<(Vec<f64>, f64)> {
    let b = problem.bounds;
    let mut cur = theta.to_vec();
    let mut best = f0;
    for i in 0..cur.len() {
        let width = scale[i].abs().max(1e-3 * (b.upper[i] - b.lower[i]));
        let lo = (cur[i] - width).max(b.lower[i]);
        let hi = (cur[i] + width).min(b.upper[i]);
        if !(hi > lo) {
            continue;
        }
        let base = cur.clone();
        let line = |x: f64| -> Option<f64> {
            let mut th = base.clone();
            th[i] = x;
            problem.eval(&th, Order::Value).ok().map(|a| a.value).filter(|v| v.is_finite())
        };
        if let Some((x, fx)) = golden_section(&line, lo, hi, 60) {
            if fx < best {
                cur[i] = x;
                best = fx;
            }
        }
    }
    (best < f0).then_some((cur, best))
}

/// Projected Newton minimization of a localized objective over its box.
pub fn minimize(problem: &LocalProblem<'_>, theta_init: &[f64], opts: &NewtonOptions) -> Result<(Vec<f64>, Diagnostics)> {
    problem.check_degenerate()?;
    let b = problem.bounds;
    let mut theta = theta_init.to_vec();
    b.project(&mut theta);
    let mut acc = problem.eval(&theta, Order::Hessian)?;
    if !acc.value.is_finite() {
        return Err(Error::Domain(format!(
            "objective not finite at start {theta:?} (u = {})",
            problem.window.u
        )));
    }
    let mut iterations = 0;
    let mut fallback_used = false;
    let mut converged = false;
    while iterations < opts.max_iter {
        let pg = projected_gradient(&theta, &acc.grad, b);
        if inf_norm(&pg) <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let free: Vec<usize> = (0..theta.len()).filter(|&i| pg[i] != 0.0).collect();
        let dir = newton_direction(&acc, &free, opts.reg_start);
        let mut accepted = None;
        if let Some(dir) = &dir {
            let mut step = 1.0;
            for _ in 0..60 {
                let mut trial: Vec<f64> = theta.iter().zip(dir).map(|(x, d)| x + step * d).collect();
                b.project(&mut trial);
                if trial == theta {
                    break;
                }
                if let Ok(tacc) = problem.eval(&trial, Order::Hessian) {
                    if tacc.value.is_finite() {
                        let slope: f64 = acc
                            .grad
                            .iter()
                            .zip(trial.iter().zip(&theta))
                            .map(|(g, (t, x))| g * (t - x))
                            .sum();
                        let armijo_ok = tacc.value <= acc.value + opts.armijo * slope;
                        // roundoff regime: no measurable change but a smaller gradient
                        let flat = step == 1.0
                            && tacc.value <= acc.value + 1e-13 * (1.0 + acc.value.abs()).min(1e-1)
                            && inf_norm(&projected_gradient(&trial, &tacc.grad, b)) < inf_norm(&pg);
                        if armijo_ok || flat {
                            accepted = Some((trial, tacc));
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
        }
        match accepted {
            Some((t, a)) => {
                theta = t;
                acc = a;
            }
            None => {
                let scale = dir.unwrap_or_else(|| pg.clone());
                match coordinate_refine(problem, &theta, acc.value, &scale) {
                    Some((t, _)) => {
                        fallback_used = true;
                        theta = t;
                        acc = problem.eval(&theta, Order::Hessian)?;
                    }
                    None => break,
                }
            }
        }
    }
    let pg = projected_gradient(&theta, &acc.grad, b);
    let grad_norm = inf_norm(&pg);
    converged = converged || grad_norm <= opts.grad_tol;
    Ok((
        theta.clone(),
        Diagnostics {
            iterations,
            converged,
            grad_norm,
            objective: acc.value,
            fallback_used,
            closed_form: false,
            bounds: bound_flags(&theta, b),
            gradient: acc.grad,
        },
    ))
}

/// Best point of an `m^p` lattice inside the box (`m <= 8`, at most 4096
/// points). Ties go to the lexicographically smallest point.
pub fn lattice_start(problem: &LocalProblem<'_>) -> Result<Vec<f64>> {
    let b = problem.bounds;
    let p = b.dim();
    let mut m = 8usize;
    while m > 1 && m.pow(p as u32) > 4096 {
        m -= 1;
    }
    let axes: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..m)
                .map(|k| b.lower[i] + (k as f64 + 0.5) * (b.upper[i] - b.lower[i]) / m as f64)
                .collect()
        })
        .collect();
    let total = m.pow(p as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut theta = vec![0.0; p];
    for idx in 0..total {
        let mut rem = idx;
        for i in (0..p).rev() {
            theta[i] = axes[i][rem % m];
            rem /= m;
        }
        if let Ok(acc) = problem.eval(&theta, Order::Value) {
            if acc.value.is_finite() && best.as_ref().is_none_or(|(v, _)| acc.value < *v) {
                best = Some((acc.value, theta.clone()));
            }
        }
    }
    best.map(|(_, t)| t).ok_or_else(|| Error::Domain(format!(
        "objective undefined on the whole start lattice at u = {}",
        problem.window.u
    )))
}

/// Kernel-weighted second moments of the tvAR regression at one window.
#[derive(Clone, Debug)]
pub struct ArMoments {
    pub order: usize,
    pub mass: f64,
    pub count: usize,
    /// `Γ̂` row-major
    pub gamma: Vec<f64>,
    /// `γ̂`
    pub cross: Vec<f64>,
    pub sxx: f64,
}

impl ArMoments {
    /// Moments over `t = r+1..n` inside the window.
    pub fn new(xs: &[f64], window: &Window, order: usize) -> Self {
        let mut m = Self {
            order,
            mass: 0.0,
            count: 0,
            gamma: vec![0.0; order * order],
            cross: vec![0.0; order],
            sxx: 0.0,
        };
        let first = window.start.max(order + 1);
        for t in first..=window.end().min(xs.len()) {
            let w = window.weight(t);
            if w != 0.0 {
                m.add(xs, t, w);
            }
        }
        m
    }

    fn add(&mut self, xs: &[f64], t: usize, w: f64) {
        let r = self.order;
        let past = TruncatedPast::new(xs, t);
        let x = xs[t - 1];
        self.mass += w;
        self.count = if w > 0.0 { self.count + 1 } else { self.count - 1 };
        self.sxx += w * x * x;
        for i in 0..r {
            let zi = past.get(i + 1);
            self.cross[i] += w * x * zi;
            for j in 0..r {
                self.gamma[i * r + j] += w * zi * past.get(j + 1);
            }
        }
    }

    /// Rank-one removal of observation `t` with weight `w`.
    pub fn downdate(&mut self, xs: &[f64], t: usize, w: f64) {
        if w != 0.0 && t > self.order {
            self.add(xs, t, -w);
        }
    }

    /// `α̂ = Γ̂⁻¹γ̂`.
    pub fn solve_alpha(&self, u: f64) -> Result<Vec<f64>> {
        let r = self.order;
        if self.count < r + 1 || !(self.mass > 0.0) {
            return Err(Error::DegenerateWindow {
                u,
                reason: format!("{} weighted terms for {} coefficients", self.count, r),
            });
        }
        let g = DMatrix::from_row_slice(r, r, &self.gamma);
        let eig = g.clone().symmetric_eigen();
        let (lmin, lmax) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
        if !(lmin > 0.0) || lmax / lmin > 1e12 {
            return Err(Error::DegenerateWindow {
                u,
                reason: "weighted regressor matrix is singular".into(),
            });
        }
        let rhs = DVector::from_column_slice(&self.cross);
        let alpha = g.cholesky().map(|c| c.solve(&rhs)).ok_or_else(|| Error::DegenerateWindow {
            u,
            reason: "weighted regressor matrix is not positive definite".into(),
        })?;
        Ok(alpha.iter().copied().collect())
    }

    /// `(α̂, σ̂)` with `σ̂²` normalized by the kernel mass.
    pub fn solve(&self, u: f64) -> Result<Vec<f64>> {
        let r = self.order;
        if self.count < r + 2 {
            return Err(Error::DegenerateWindow {
                u,
                reason: format!("{} weighted terms for {} parameters", self.count, r + 1),
            });
        }
        let alpha = DVector::from_vec(self.solve_alpha(u)?);
        let g = DMatrix::from_row_slice(r, r, &self.gamma);
        let rhs = DVector::from_column_slice(&self.cross);
        let a_gamma_a = (alpha.transpose() * &g * &alpha)[(0, 0)];
        let rss = self.sxx - 2.0 * alpha.dot(&rhs) + a_gamma_a;
        let sigma2 = rss / self.mass;
        if !(sigma2 > 0.0) {
            return Err(Error::DegenerateWindow {
                u,
                reason: "zero weighted residual variance".into(),
            });
        }
        let mut theta: Vec<f64> = alpha.iter().copied().collect();
        theta.push(sigma2.sqrt());
        Ok(theta)
    }
}

/// Closed-form local tvAR(r) estimate: `α̂ = Γ̂⁻¹γ̂`, `σ̂²` the kernel-mass
/// normalized weighted residual sum of squares.
pub fn fit_tvar_closed_form(xs: &[f64], kernel: &Kernel, u: f64, h: f64, order: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::InvalidArgument("tvAR order must be positive".into()));
    }
    let window = Window::new(kernel, xs.len(), u, h)?;
    ArMoments::new(xs, &window, order).solve(u)
}

fn ar_order(obj: &dyn Objective) -> Option<usize> {
    match obj.family() {
        Family::TvAr { order } => Some(order),
        _ => None,
    }
}

fn closed_form_diagnostics(problem: &LocalProblem<'_>, theta: &[f64]) -> Result<Diagnostics> {
    let acc = problem.eval(theta, Order::Gradient)?;
    let grad_norm = acc.grad_inf_norm();
    Ok(Diagnostics {
        iterations: 0,
        converged: true,
        grad_norm,
        objective: acc.value,
        fallback_used: false,
        closed_form: true,
        bounds: bound_flags(theta, problem.bounds),
        gradient: acc.grad,
    })
}

/// Minimizes `L_{n,h}(u, ·)` (or its leave-`skip`-out version) over the box.
///
/// With [`Method::Auto`] a tvAR objective is solved in closed form whenever the
/// solution lies inside the box; otherwise projected Newton is started from
/// `theta_init` (or from a lattice search when `theta_init` is `None`).
pub fn fit_local(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    u: f64,
    h: f64,
    skip: Option<usize>,
    theta_init: Option<&[f64]>,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<(Vec<f64>, Diagnostics)> {
    let problem = LocalProblem::new(obj, xs, kernel, u, h, skip, bounds)?;
    if opts.method == Method::Auto {
        if let Some(order) = ar_order(obj) {
            let mut moments = ArMoments::new(xs, &problem.window, order);
            if let Some(s) = skip {
                moments.downdate(xs, s, problem.window.weight(s));
            }
            let theta = moments.solve(u)?;
            if bounds.contains(&theta) {
                let diag = closed_form_diagnostics(&problem, &theta)?;
                return Ok((theta, diag));
            }
            let mut start = theta;
            bounds.project(&mut start);
            return minimize(&problem, &start, &opts.newton);
        }
    }
    let start = match theta_init {
        Some(t) => t.to_vec(),
        None => lattice_start(&problem)?,
    };
    minimize(&problem, &start, &opts.newton)
}

/// Estimated curve at the points `t/n` inside a weight's support.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFit {
    pub h: f64,
    pub n: usize,
    /// time indices `t` (1-based); `u = t / n`
    pub eval_points: Vec<usize>,
    /// one row per evaluation point; NaN rows mark hard failures
    pub estimates: Vec<Vec<f64>>,
    pub converged: Vec<bool>,
    pub newton_iters: Vec<usize>,
}

impl LocalFit {
    pub fn len(&self) -> usize {
        self.eval_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eval_points.is_empty()
    }

    pub fn u(&self, i: usize) -> f64 {
        self.eval_points[i] as f64 / self.n as f64
    }

    pub fn failures(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    /// Writes `u,theta1..thetap,converged,iters`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let p = self.estimates.first().map_or(0, Vec::len);
        let mut header = String::from("u");
        for j in 1..=p {
            header.push_str(&format!(",theta{j}"));
        }
        header.push_str(",converged,iters");
        writeln!(out, "{header}")?;
        for i in 0..self.len() {
            let mut row = format!("{}", self.u(i));
            for v in &self.estimates[i] {
                row.push_str(&format!(",{v}"));
            }
            row.push_str(&format!(",{},{}", self.converged[i], self.newton_iters[i]));
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Fits the local estimator at every `t/n` with `weight(t/n) = 1`.
pub fn fit_curve(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    h: f64,
    weight: &WeightFn,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<LocalFit> {
    crate::kernel::check_bandwidth(h)?;
    let n = xs.len();
    let points = weight.indices(n);
    let p = obj.dim();
    let one = |t: usize, init: Option<&[f64]>| fit_local(obj, xs, kernel, t as f64 / n as f64, h, None, init, bounds, opts);
    let results: Vec<Result<(Vec<f64>, Diagnostics)>> = match opts.start {
        StartMode::Cold => points.par_iter().map(|&t| one(t, None)).collect(),
        StartMode::Warm => {
            let mut out = Vec::with_capacity(points.len());
            let mut prev: Option<Vec<f64>> = None;
            for &t in &points {
                let r = one(t, prev.as_deref());
                if let Ok((th, d)) = &r {
                    if d.converged {
                        prev = Some(th.clone());
                    }
                }
                out.push(r);
            }
            out
        }
    };
    let mut fit = LocalFit {
        h,
        n,
        eval_points: points,
        estimates: Vec::with_capacity(results.len()),
        converged: Vec::with_capacity(results.len()),
        newton_iters: Vec::with_capacity(results.len()),
    };
    for r in results {
        match r {
            Ok((th, d)) => {
                fit.estimates.push(th);
                fit.converged.push(d.converged);
                fit.newton_iters.push(d.iterations);
            }
            Err(e) if e.is_numerical() => {
                fit.estimates.push(vec![f64::NAN; p]);
                fit.converged.push(false);
                fit.newton_iters.push(0);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(fit)
}

/// `θ̂_{h,−s}(s/n)`, warm-started at the full-sample estimate `full`.
pub fn fit_leave_one_out(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    h: f64,
    s: usize,
    full: Option<&[f64]>,
    bounds: &ThetaBox,
    opts: &FitOptions,
) -> Result<(Vec<f64>, Diagnostics)> {
    if s == 0 || s > xs.len() {
        return Err(Error::InvalidArgument(format!(
            "leave-out index {s} outside 1..={}",
            xs.len()
        )));
    }
    fit_local(obj, xs, kernel, s as f64 / xs.len() as f64, h, Some(s), full, bounds, opts)
}
