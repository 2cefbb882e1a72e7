//! Conditional Gaussian objectives `ℓ(x, y, θ)` with analytic derivatives and
//! their kernel-localized sums `L_{n,h}(u, θ)` and `L_{n,h,-s}(u, θ)`.
//!
//! Finite-lag families (tvAR(r), tvARCH(r), tvTAR(1)) contribute terms for
//! `t > r` only; the tvMA(1) objective uses the zero-padded observed past.

use crate::error::{Error, Result};
use crate::kernel::{check_bandwidth, Kernel};
use crate::model::Family;

/// Filter coefficients of the MA(1) inverse are dropped once `|α|^k` falls below this.
pub const MA_TRUNCATION: f64 = 1e-12;

const HALF_LN_TAU: f64 = 0.918_938_533_204_672_8;

/// Which derivatives an evaluation must produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Running weighted sum of `ℓ`, `∇ℓ` and `∇²ℓ` (row-major `p × p`).
#[derive(Clone, Debug, PartialEq)]
pub struct Accum {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    p: usize,
}

impl Accum {
    pub fn new(p: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; p],
            hess: vec![0.0; p * p],
            p,
        }
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn reset(&mut self) {
        self.value = 0.0;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        self.hess.iter_mut().for_each(|g| *g = 0.0);
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.p + j]
    }

    #[inline]
    fn add_h(&mut self, i: usize, j: usize, v: f64) {
        self.hess[i * self.p + j] += v;
    }

    pub fn grad_inf_norm(&self) -> f64 {
        self.grad.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// `Y^c_{t-1} = (X_{t-1}, ..., X_1, 0, 0, ...)`.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedPast<'a> {
    xs: &'a [f64],
    t: usize,
}

impl<'a> TruncatedPast<'a> {
    /// Past of observation `t` (1-based) in `xs`.
    pub fn new(xs: &'a [f64], t: usize) -> Self {
        Self { xs, t }
    }

    /// Explicit past: `values[0] = X_{t-1}`, `values[1] = X_{t-2}`, ...
    pub fn from_values(values: &'a [f64]) -> Self {
        Self {
            xs: values,
            t: usize::MAX,
        }
    }

    /// `k`-th lag (`k >= 1`); zero beyond the available history.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        if self.t == usize::MAX {
            return if k >= 1 && k <= self.xs.len() {
                self.xs[k - 1]
            } else {
                0.0
            };
        }
        if k >= 1 && k < self.t {
            self.xs[self.t - 1 - k]
        } else {
            0.0
        }
    }

    /// Number of observed lags.
    pub fn available(&self) -> usize {
        if self.t == usize::MAX {
            self.xs.len()
        } else {
            self.t.saturating_sub(1)
        }
    }
}

/// Kernel weights `K_h(t/n - u) / n` for the `t` of one localized sum.
#[derive(Clone, Debug)]
pub struct Window {
    pub n: usize,
    pub u: f64,
    pub h: f64,
    /// first `t` (1-based) covered by `weights`
    pub start: usize,
    pub weights: Vec<f64>,
}

impl Window {
    pub fn new(kernel: &Kernel, n: usize, u: f64, h: f64) -> Result<Self> {
        check_bandwidth(h)?;
        let range = kernel.support(n, u, h);
        let start = *range.start();
        let nf = n as f64;
        let weights = range
            .map(|t| kernel.at(t, n, u, h) / nf)
            .collect();
        Ok(Self {
            n,
            u,
            h,
            start,
            weights,
        })
    }

    #[inline]
    pub fn weight(&self, t: usize) -> f64 {
        if t < self.start {
            return 0.0;
        }
        self.weights.get(t - self.start).copied().unwrap_or(0.0)
    }

    /// Last `t` covered (`start - 1` when empty).
    pub fn end(&self) -> usize {
        self.start + self.weights.len() - 1
    }

    /// `(1/n) Σ K_h` over the window.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Per-observation objective with analytic gradient and Hessian.
pub trait Objective: Send + Sync {
    fn family(&self) -> Family;

    fn dim(&self) -> usize {
        self.family().dim()
    }

    /// First observation index contributing a term.
    fn first_index(&self) -> usize {
        self.family().max_lag().unwrap_or(0) + 1
    }

    /// Adds `weight · (ℓ, ∇ℓ, ∇²ℓ)` at one observation.
    fn add_term(
        &self,
        x: f64,
        past: &TruncatedPast<'_>,
        theta: &[f64],
        weight: f64,
        order: Order,
        acc: &mut Accum,
    ) -> Result<()>;

    /// Adds the weighted terms of every `t` in `window` except `skip`.
    fn accumulate(
        &self,
        xs: &[f64],
        window: &Window,
        skip: Option<usize>,
        theta: &[f64],
        order: Order,
        acc: &mut Accum,
    ) -> Result<()> {
        let first = window.start.max(self.first_index());
        for t in first..=window.end().min(xs.len()) {
            if Some(t) == skip {
                continue;
            }
            let w = window.weight(t);
            if w == 0.0 {
                continue;
            }
            self.add_term(xs[t - 1], &TruncatedPast::new(xs, t), theta, w, order, acc)?;
        }
        Ok(())
    }

    /// Value, gradient and Hessian at a single observation.
    fn term(&self, x: f64, past: &TruncatedPast<'_>, theta: &[f64]) -> Result<Accum> {
        let mut acc = Accum::new(self.dim());
        self.add_term(x, past, theta, 1.0, Order::Hessian, &mut acc)?;
        Ok(acc)
    }
}

pub fn objective_for(family: Family) -> Box<dyn Objective> {
    match family {
        Family::TvAr { order } => Box::new(ArObjective { order }),
        Family::TvMa1 => Box::new(Ma1Objective),
        Family::TvArch { order } => Box::new(ArchObjective { order }),
        Family::TvTar1 => Box::new(Tar1Objective),
    }
}

fn check_dim(theta: &[f64], p: usize) -> Result<()> {
    if theta.len() != p {
        return Err(Error::InvalidArgument(format!(
            "expected {p} parameters, got {}",
            theta.len()
        )));
    }
    Ok(())
}

/// Gaussian conditional-mean term with regressors `z` and coefficients
/// `theta[..q]`, scale `theta[q]`.
#[inline]
fn add_mean_term(x: f64, z: &[f64], theta: &[f64], weight: f64, order: Order, acc: &mut Accum) -> Result<()> {
    let q = z.len();
    let sigma = theta[q];
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("σ must be positive, got {sigma}")));
    }
    let mut e = x;
    for j in 0..q {
        e -= theta[j] * z[j];
    }
    let s2 = sigma * sigma;
    let e2 = e * e;
    acc.value += weight * (HALF_LN_TAU + sigma.ln() + e2 / (2.0 * s2));
    if order >= Order::Gradient {
        let ws2 = weight / s2;
        for j in 0..q {
            acc.grad[j] -= ws2 * e * z[j];
        }
        acc.grad[q] += weight * (1.0 / sigma - e2 / (s2 * sigma));
    }
    if order == Order::Hessian {
        let ws2 = weight / s2;
        let cross = 2.0 * weight * e / (s2 * sigma);
        for i in 0..q {
            for j in 0..q {
                acc.add_h(i, j, ws2 * z[i] * z[j]);
            }
            acc.add_h(i, q, cross * z[i]);
            acc.add_h(q, i, cross * z[i]);
        }
        acc.add_h(q, q, weight * (-1.0 / s2 + 3.0 * e2 / (s2 * s2)));
    }
    Ok(())
}

/// `ℓ = ½ log(2πσ²) + (x − Σ α_j y_j)² / (2σ²)`, θ = (α_1..α_r, σ).
#[derive(Clone, Copy, Debug)]
pub struct ArObjective {
    pub order: usize,
}

impl Objective for ArObjective {
    fn family(&self) -> Family {
        Family::TvAr { order: self.order }
    }

    fn add_term(&self, x: f64, past: &TruncatedPast<'_>, theta: &[f64], weight: f64, order: Order, acc: &mut Accum) -> Result<()> {
        check_dim(theta, self.order + 1)?;
        if self.order == 1 {
            return add_mean_term(x, &[past.get(1)], theta, weight, order, acc);
        }
        let z: Vec<f64> = (1..=self.order).map(|k| past.get(k)).collect();
        add_mean_term(x, &z, theta, weight, order, acc)
    }
}

/// Threshold AR(1): regressors `(y⁺, y⁻)`, θ = (a_1, a_2, σ).
#[derive(Clone, Copy, Debug)]
pub struct Tar1Objective;

impl Objective for Tar1Objective {
    fn family(&self) -> Family {
        Family::TvTar1
    }

    fn add_term(&self, x: f64, past: &TruncatedPast<'_>, theta: &[f64], weight: f64, order: Order, acc: &mut Accum) -> Result<()> {
        check_dim(theta, 3)?;
        let y = past.get(1);
        add_mean_term(x, &[y.max(0.0), (-y).max(0.0)], theta, weight, order, acc)
    }
}

/// Conditional variance `v = a_0 + Σ a_i y_i²`; `ℓ = ½ log(2πv) + x²/(2v)`.
#[derive(Clone, Copy, Debug)]
pub struct ArchObjective {
    pub order: usize,
}

impl Objective for ArchObjective {
    fn family(&self) -> Family {
        Family::TvArch { order: self.order }
    }

    fn add_term(&self, x: f64, past: &TruncatedPast<'_>, theta: &[f64], weight: f64, order: Order, acc: &mut Accum) -> Result<()> {
        let p = self.order + 1;
        check_dim(theta, p)?;
        let mut mu = [0.0f64; 8];
        let mut mu_vec;
        let mu: &mut [f64] = if p <= 8 {
            &mut mu[..p]
        } else {
            mu_vec = vec![0.0; p];
            &mut mu_vec
        };
        mu[0] = 1.0;
        let mut v = theta[0];
        for i in 1..p {
            let y = past.get(i);
            mu[i] = y * y;
            v += theta[i] * mu[i];
        }
        if !(v > 0.0) {
            return Err(Error::Domain(format!("conditional variance must be positive, got {v}")));
        }
        let x2 = x * x;
        acc.value += weight * (HALF_LN_TAU + 0.5 * v.ln() + x2 / (2.0 * v));
        if order >= Order::Gradient {
            let g = weight * (v - x2) / (2.0 * v * v);
            for i in 0..p {
                acc.grad[i] += g * mu[i];
            }
        }
        if order == Order::Hessian {
            let c = weight * (2.0 * x2 - v) / (2.0 * v * v * v);
            for i in 0..p {
                for j in 0..p {
                    acc.add_h(i, j, c * mu[i] * mu[j]);
                }
            }
        }
        Ok(())
    }
}

/// Number of inverse-filter lags kept for coefficient `alpha`.
pub fn ma_truncation_lag(alpha: f64) -> usize {
    let a = alpha.abs();
    if a == 0.0 {
        0
    } else if a >= 1.0 {
        usize::MAX
    } else {
        (MA_TRUNCATION.ln() / a.ln()).ceil() as usize
    }
}

/// Coefficients `γ_θ(k) = (−α)^k / σ`, `k = 0..len`.
pub fn ma_inverse_filter(alpha: f64, sigma: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut c = 1.0 / sigma;
    for _ in 0..len {
        out.push(c);
        c *= -alpha;
    }
    out
}

/// Gaussian MA(1) term from the prediction error `e` and its α-derivatives.
#[inline]
fn add_ma_term(e: f64, de: f64, d2e: f64, sigma: f64, weight: f64, order: Order, acc: &mut Accum) {
    let s2 = sigma * sigma;
    let e2 = e * e;
    acc.value += weight * (HALF_LN_TAU + sigma.ln() + e2 / (2.0 * s2));
    if order >= Order::Gradient {
        acc.grad[0] += weight * e * de / s2;
        acc.grad[1] += weight * (1.0 / sigma - e2 / (s2 * sigma));
    }
    if order == Order::Hessian {
        let cross = -2.0 * weight * e * de / (s2 * sigma);
        acc.add_h(0, 0, weight * (de * de + e * d2e) / s2);
        acc.add_h(0, 1, cross);
        acc.add_h(1, 0, cross);
        acc.add_h(1, 1, weight * (-1.0 / s2 + 3.0 * e2 / (s2 * s2)));
    }
}

fn check_ma(theta: &[f64]) -> Result<()> {
    check_dim(theta, 2)?;
    if !(theta[0].abs() < 1.0) {
        return Err(Error::Domain(format!(
            "MA coefficient must satisfy |α| < 1, got {}",
            theta[0]
        )));
    }
    if !(theta[1] > 0.0) {
        return Err(Error::Domain(format!("σ must be positive, got {}", theta[1])));
    }
    Ok(())
}

/// Inverse-filter likelihood of the MA(1) model, θ = (α, σ).
///
/// The prediction error is `e_t = Σ_k (−α)^k X_{t−k}` over the zero-padded
/// past, truncated once `|α|^k < 1e-12`.
#[derive(Clone, Copy, Debug)]
pub struct Ma1Objective;

impl Objective for Ma1Objective {
    fn family(&self) -> Family {
        Family::TvMa1
    }

    fn first_index(&self) -> usize {
        1
    }

    fn add_term(&self, x: f64, past: &TruncatedPast<'_>, theta: &[f64], weight: f64, order: Order, acc: &mut Accum) -> Result<()> {
        check_ma(theta)?;
        let alpha = theta[0];
        let lags = ma_truncation_lag(alpha).min(past.available());
        // e = Σ c_k z_k, de/dα = Σ k c_{k-1} (−1) z_k ..., with c_k = (−α)^k
        let (mut e, mut de, mut d2e) = (x, 0.0, 0.0);
        let mut c_km2 = 0.0; // (−α)^{k−2}
        let mut c_km1 = 1.0; // (−α)^{k−1}
        for k in 1..=lags {
            let z = past.get(k);
            let kf = k as f64;
            let c_k = -alpha * c_km1;
            e += c_k * z;
            de -= kf * c_km1 * z;
            if k >= 2 {
                d2e += kf * (kf - 1.0) * c_km2 * z;
            }
            c_km2 = c_km1;
            c_km1 = c_k;
        }
        add_ma_term(e, de, d2e, theta[1], weight, order, acc);
        Ok(())
    }

    /// Runs `e_t = X_t − α e_{t−1}` (and its α-derivatives) forward from far
    /// enough before the window that every dropped filter term is below the
    /// truncation threshold.
    fn accumulate(&self, xs: &[f64], window: &Window, skip: Option<usize>, theta: &[f64], order: Order, acc: &mut Accum) -> Result<()> {
        check_ma(theta)?;
        let alpha = theta[0];
        let end = window.end().min(xs.len());
        if window.weights.is_empty() || end < window.start {
            return Ok(());
        }
        let lag = ma_truncation_lag(alpha);
        let from = window.start.saturating_sub(lag).max(1);
        let (mut e, mut de, mut d2e) = (0.0f64, 0.0f64, 0.0f64);
        for t in from..=end {
            let x = xs[t - 1];
            let d2e_new = -2.0 * de - alpha * d2e;
            let de_new = -e - alpha * de;
            e = x - alpha * e;
            de = de_new;
            d2e = d2e_new;
            if t < window.start || Some(t) == skip {
                continue;
            }
            let w = window.weight(t);
            if w != 0.0 {
                add_ma_term(e, de, d2e, theta[1], w, order, acc);
            }
        }
        Ok(())
    }
}

/// `ℓ` for tvAR(r) at one observation; `past.get(j)` is `y_j`.
pub fn ell_tvar(x: f64, past: &TruncatedPast<'_>, theta: &[f64]) -> Result<f64> {
    if theta.len() < 2 {
        return Err(Error::InvalidArgument("tvAR needs at least (α_1, σ)".into()));
    }
    Ok(ArObjective { order: theta.len() - 1 }.term(x, past, theta)?.value)
}

pub fn ell_tvma1(x: f64, past: &TruncatedPast<'_>, theta: &[f64]) -> Result<f64> {
    Ok(Ma1Objective.term(x, past, theta)?.value)
}

pub fn ell_tvarch(x: f64, past: &TruncatedPast<'_>, theta: &[f64]) -> Result<f64> {
    if theta.len() < 2 {
        return Err(Error::InvalidArgument("tvARCH needs at least (a_0, a_1)".into()));
    }
    Ok(ArchObjective { order: theta.len() - 1 }.term(x, past, theta)?.value)
}

pub fn ell_tvtar1(x: f64, past: &TruncatedPast<'_>, theta: &[f64]) -> Result<f64> {
    Ok(Tar1Objective.term(x, past, theta)?.value)
}

/// Localized objective and derivatives, `(1/n) Σ_{t≠s} K_h(t/n − u) ℓ_{t,n}(θ)`.
pub fn local_likelihood_derivs(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    u: f64,
    h: f64,
    theta: &[f64],
    leave_out: Option<usize>,
    order: Order,
) -> Result<Accum> {
    if let Some(s) = leave_out {
        if s == 0 || s > xs.len() {
            return Err(Error::InvalidArgument(format!(
                "leave-out index {s} outside 1..={}",
                xs.len()
            )));
        }
    }
    let window = Window::new(kernel, xs.len(), u, h)?;
    let mut acc = Accum::new(obj.dim());
    obj.accumulate(xs, &window, leave_out, theta, order, &mut acc)?;
    Ok(acc)
}

/// `L_{n,h}(u, θ)`, or `L_{n,h,−s}(u, θ)` when `leave_out = Some(s)`.
pub fn local_likelihood(
    obj: &dyn Objective,
    xs: &[f64],
    kernel: &Kernel,
    u: f64,
    h: f64,
    theta: &[f64],
    leave_out: Option<usize>,
) -> Result<f64> {
    Ok(local_likelihood_derivs(obj, xs, kernel, u, h, theta, leave_out, Order::Value)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::epanechnikov;
    use std::f64::consts::TAU;

    #[test]
    fn half_log_two_pi() {
        assert!((HALF_LN_TAU - 0.5 * TAU.ln()).abs() < 1e-15);
    }

    #[test]
    fn ar_point_values() {
        let zero = [0.0];
        let past = TruncatedPast::from_values(&zero);
        let v = ell_tvar(0.0, &past, &[0.0, 1.0]).unwrap();
        assert!((v - 0.918_938_5).abs() < 1e-7);
        let one = [1.0];
        let v = ell_tvar(1.0, &TruncatedPast::from_values(&one), &[1.0, 1.0]).unwrap();
        assert!((v - HALF_LN_TAU).abs() < 1e-15);
        assert!(ell_tvar(1.0, &past, &[0.2, 0.0]).is_err());
        assert!(ell_tvar(1.0, &past, &[0.2, -1.0]).is_err());
    }

    #[test]
    fn ma_reduces_to_white_noise() {
        let past_vals = [0.3, -1.2, 2.0];
        let past = TruncatedPast::from_values(&past_vals);
        let (x, sigma) = (0.7, 0.8);
        let v = ell_tvma1(x, &past, &[0.0, sigma]).unwrap();
        let expected = 0.5 * (TAU * sigma * sigma).ln() + x * x / (2.0 * sigma * sigma);
        assert!((v - expected).abs() < 1e-14);
        assert!(ell_tvma1(x, &past, &[1.0, sigma]).is_err());
        assert!(ell_tvma1(x, &past, &[-1.3, sigma]).is_err());
    }

    #[test]
    fn ma_filter_coefficients() {
        assert_eq!(ma_inverse_filter(0.5, 1.0, 4), vec![1.0, -0.5, 0.25, -0.125]);
        // Fourier inversion of 1 / (σ (1 + α e^{-iλ})) on a fine grid
        let (alpha, sigma) = (0.5, 1.0);
        let m = 4096;
        for k in 0..6 {
            let mut re = 0.0;
            for j in 0..m {
                let lam = TAU * j as f64 / m as f64;
                let (c, s) = (lam.cos(), lam.sin());
                // 1 / (1 + α e^{-iλ}) = (1 + α cos λ + i α sin λ) / |.|²
                let denom = (1.0 + alpha * c).powi(2) + (alpha * s).powi(2);
                let (fr, fi) = ((1.0 + alpha * c) / denom, alpha * s / denom);
                // coefficient of e^{-ikλ}: (1/2π) ∫ F(λ) e^{ikλ}
                re += fr * (k as f64 * lam).cos() - fi * (k as f64 * lam).sin();
            }
            let coef = re / m as f64 / sigma;
            assert!((coef - ma_inverse_filter(alpha, sigma, 6)[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn ma_truncation_tail() {
        assert_eq!(ma_truncation_lag(0.0), 0);
        let k = ma_truncation_lag(0.9);
        assert!(0.9f64.powi(k as i32) < 1e-12);
        assert!(0.9f64.powi(k as i32 - 1) >= 1e-12);
        // with |past| <= 1 the discarded tail is below |α|^k / (1 − |α|)
        let tail = 0.9f64.powi(k as i32) / (1.0 - 0.9);
        assert!(tail < 1e-11);
    }

    #[test]
    fn arch_and_tar_values() {
        let zero = [0.0];
        let past = TruncatedPast::from_values(&zero);
        let (x, a0) = (0.4, 0.3);
        let v = ell_tvarch(x, &past, &[a0, 0.2]).unwrap();
        assert!((v - (0.5 * (TAU * a0).ln() + x * x / (2.0 * a0))).abs() < 1e-14);
        let neg = [-2.0];
        let past = TruncatedPast::from_values(&neg);
        // regressors (0, 2): only a_2 matters
        let a = ell_tvtar1(1.0, &past, &[0.7, 0.5, 1.0]).unwrap();
        let b = ell_tvtar1(1.0, &past, &[-0.3, 0.5, 1.0]).unwrap();
        assert_eq!(a, b);
        assert!((a - HALF_LN_TAU).abs() < 1e-15);
        // a_1 = a_2 = c reduces to c |y|
        let pos = [2.0];
        let c = ell_tvtar1(1.0, &TruncatedPast::from_values(&pos), &[0.5, 0.5, 1.0]).unwrap();
        assert!((c - a).abs() < 1e-15);
    }

    #[test]
    fn truncated_past_zero_pads() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let p = TruncatedPast::new(&xs, 3);
        assert_eq!(p.get(1), 2.0);
        assert_eq!(p.get(2), 1.0);
        assert_eq!(p.get(3), 0.0);
        assert_eq!(p.get(100), 0.0);
        assert_eq!(p.available(), 2);
    }

    #[test]
    fn single_term_sum() {
        let k = epanechnikov();
        let xs = [0.8];
        let obj = Ma1Objective;
        let theta = [0.3, 1.1];
        let l = local_likelihood(&obj, &xs, &k, 1.0, 0.5, &theta, None).unwrap();
        let single = ell_tvma1(0.8, &TruncatedPast::new(&xs, 1), &theta).unwrap();
        assert!((l - k.scaled(0.0, 0.5) * single).abs() < 1e-14);
    }

    #[test]
    fn leave_out_of_zero_weight_term_is_identity() {
        let k = epanechnikov();
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let obj = ArObjective { order: 1 };
        let theta = [0.2, 1.3];
        let full = local_likelihood(&obj, &xs, &k, 0.5, 0.1, &theta, None).unwrap();
        let loo = local_likelihood(&obj, &xs, &k, 0.5, 0.1, &theta, Some(90)).unwrap();
        assert_eq!(full, loo);
        assert!(local_likelihood(&obj, &xs, &k, 0.5, 0.1, &theta, Some(0)).is_err());
        assert!(local_likelihood(&obj, &xs, &k, 0.5, 0.1, &theta, Some(101)).is_err());
    }
}
