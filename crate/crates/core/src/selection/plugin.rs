//! Asymptotically optimal bandwidth `h₀ = (V₀ μ_K / (B₀ d_K²))^{1/5} n^{−1/5}`.

use super::info::InfoMatrices;
use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::grid::WeightFn;
use crate::kernel::Kernel;
use crate::model::Family;
use serde::{Deserialize, Serialize};

/// Simpson nodes used for `V₀` and `B₀`.
pub const QUADRATURE_POINTS: usize = 2001;
/// Central-difference step for `∂_u V(θ₀(u))`.
pub const P_STEP: f64 = 1e-3;
/// `B₀` at or below this is treated as zero.
pub const B0_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PluginResult {
    pub h0: f64,
    pub v0: f64,
    pub b0: f64,
}

/// Composite Simpson rule on `points` (odd) equally spaced nodes.
pub fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
    let m = if points.is_multiple_of(2) { points } else { points - 1 }.max(2);
    let step = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * step);
    }
    acc * step / 3.0
}

fn simpson_result(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, points: usize) -> Result<f64> {
    let mut err = None;
    let value = simpson(
        |u| match f(u) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        points,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `d_M**(h) = μ_K V₀/(nh) + h⁴ d_K² B₀ / 4`.
pub fn dm_star_star(h: f64, n: usize, v0: f64, b0: f64, kernel: &Kernel) -> f64 {
    kernel.mu_k * v0 / (n as f64 * h) + h.powi(4) / 4.0 * kernel.d_k * kernel.d_k * b0
}

/// Minimizer of [`dm_star_star`].
pub fn h0_formula(v0: f64, b0: f64, kernel: &Kernel, n: usize) -> Result<f64> {
    if !(b0 > B0_TOLERANCE) {
        return Err(Error::DegenerateBias { b0 });
    }
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(Error::Domain(format!("asymptotic variance V0 = {v0} must be positive and finite")));
    }
    Ok((v0 * kernel.mu_k / (b0 * kernel.d_k * kernel.d_k)).powf(0.2) * (n as f64).powf(-0.2))
}

/// `V₀ = ∫ tr{V⁻¹I}(θ₀(u)) w(u) du`.
pub fn asymptotic_variance(truth: &ParamCurve, weight: &WeightFn, info: &InfoMatrices) -> Result<f64> {
    let (a, b) = weight.support();
    simpson_result(
        |u| {
            let (v, i) = info.both(&truth.eval(u))?;
            let vinv = v.try_inverse().ok_or_else(|| Error::Domain(format!("V singular at u = {u}")))?;
            Ok((vinv * i).trace())
        },
        a,
        b,
        QUADRATURE_POINTS,
    )
}

/// Squared-bias integrand `|E ∂²_u ∇ℓ|²_{V⁻¹}` at `u`.
pub fn bias_integrand(family: Family, truth: &ParamCurve, info: &InfoMatrices, u: f64) -> Result<f64> {
    let th = truth.eval(u);
    let d1 = truth.eval_d1(u);
    let d2 = truth.eval_d2(u);
    match family {
        Family::TvAr { order: 1 } | Family::TvMa1 => {
            let (a, s) = (th[0], th[1]);
            let (da, ds) = (d1[0], d1[1]);
            let one_m = 1.0 - a * a;
            let inner = if family == Family::TvMa1 {
                2.0 * (-a * da * da / one_m + 2.0 * da * ds / s)
            } else {
                4.0 * (a * da * da / one_m + da * ds / s)
            };
            let first = d2[0] + inner;
            let second = d2[1] + s * (da * da / one_m + (ds / s).powi(2));
            Ok(first * first / one_m + 2.0 / (s * s) * second * second)
        }
        Family::TvArch { .. } => {
            let v = info.v(&th)?;
            let vp = info.v(&truth.eval(u + P_STEP))?;
            let vm = info.v(&truth.eval(u - P_STEP))?;
            let p = (vp - vm) / (2.0 * P_STEP);
            let dth = nalgebra::DVector::from_vec(d1);
            let w = v
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Domain(format!("V not positive definite at u = {u}")))?
                .solve(&(p * &dth));
            let b = nalgebra::DVector::from_vec(d2) + w * 2.0;
            Ok((b.transpose() * v * &b)[(0, 0)])
        }
        other => Err(Error::Unsupported(format!(
            "no plug-in bias formula for {}",
            other.name()
        ))),
    }
}

/// `B₀ = ∫ |E ∂²_u ∇ℓ|²_{V⁻¹} w(u) du`.
pub fn asymptotic_bias(family: Family, truth: &ParamCurve, weight: &WeightFn, info: &InfoMatrices) -> Result<f64> {
    let (a, b) = weight.support();
    simpson_result(|u| bias_integrand(family, truth, info, u), a, b, QUADRATURE_POINTS)
}

/// Plug-in bandwidth `h₀` and its constants.
pub fn plugin_h0(
    family: Family,
    truth: &ParamCurve,
    kernel: &Kernel,
    weight: &WeightFn,
    n: usize,
    info: &InfoMatrices,
) -> Result<PluginResult> {
    if info.family != family {
        return Err(Error::InvalidArgument(format!(
            "information matrices are for {}, not {}",
            info.family.name(),
            family.name()
        )));
    }
    let b0 = asymptotic_bias(family, truth, weight, info)?;
    if !(b0 > B0_TOLERANCE) {
        return Err(Error::DegenerateBias { b0 });
    }
    let v0 = asymptotic_variance(truth, weight, info)?;
    Ok(PluginResult {
        h0: h0_formula(v0, b0, kernel, n)?,
        v0,
        b0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::epanechnikov;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 5);
        assert_relative_eq!(v, 4.0 - 4.0 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn h0_minimizes_dm_star_star() {
        let k = epanechnikov();
        let (v0, b0, n) = (1.8, 9000.0, 500);
        let h0 = h0_formula(v0, b0, &k, n).unwrap();
        // first-order condition −μ_K V₀/(n h²) + h³ d_K² B₀ = 0
        let slope = -k.mu_k * v0 / (n as f64 * h0 * h0) + h0.powi(3) * k.d_k * k.d_k * b0;
        assert!(slope.abs() < 1e-9 * k.mu_k * v0 / (n as f64 * h0 * h0));
        for f in [0.9, 1.1] {
            assert!(dm_star_star(h0 * f, n, v0, b0, &k) > dm_star_star(h0, n, v0, b0, &k));
        }
    }

    #[test]
    fn zero_bias_is_degenerate() {
        assert!(matches!(
            h0_formula(1.0, 0.0, &epanechnikov(), 100),
            Err(Error::DegenerateBias { .. })
        ));
    }
}
