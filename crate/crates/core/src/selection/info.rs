//! Expected Hessian `V(θ)` and score covariance `I(θ)` of the per-observation
//! objective under the stationary approximation.

use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::model::{Family, Innovation};
use crate::processes::BURN_IN;
use crate::seed::stream;
use nalgebra::DMatrix;
use std::sync::Arc;

pub const DEFAULT_MC_SIZE: usize = 20_000;
pub const DEFAULT_MC_SEED: u64 = 0x05ee_d1f0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfoSource {
    ClosedForm,
    MonteCarlo { n_mc: usize, seed: u64 },
}

/// `θ ↦ (V(θ), I(θ))` for one family and innovation law.
///
/// Monte Carlo expectations reuse one innovation path for every `θ`, so
/// differences in `θ` are taken with common random numbers.
#[derive(Clone, Debug)]
pub struct InfoMatrices {
    pub family: Family,
    pub innovation: Innovation,
    pub source: InfoSource,
    eps: Option<Arc<Vec<f64>>>,
}

impl InfoMatrices {
    /// Closed forms for tvAR(r) and tvMA(1).
    pub fn closed_form(family: Family, innovation: Innovation) -> Result<Self> {
        match family {
            Family::TvAr { .. } | Family::TvMa1 => Ok(Self {
                family,
                innovation,
                source: InfoSource::ClosedForm,
                eps: None,
            }),
            _ => Err(Error::Unsupported(format!(
                "no closed-form information matrices for {}",
                family.name()
            ))),
        }
    }

    /// Monte Carlo expectations over a stationary path of length `n_mc`.
    pub fn monte_carlo(family: Family, innovation: Innovation, n_mc: usize, seed: u64) -> Result<Self> {
        if n_mc < 10 {
            return Err(Error::InvalidArgument(format!("Monte Carlo size {n_mc} too small")));
        }
        let mut rng = stream(seed, 0);
        let eps: Vec<f64> = (0..n_mc + BURN_IN).map(|_| innovation.sample(&mut rng)).collect();
        Ok(Self {
            family,
            innovation,
            source: InfoSource::MonteCarlo { n_mc, seed },
            eps: Some(Arc::new(eps)),
        })
    }

    /// Closed form where one exists, Monte Carlo with default size otherwise.
    pub fn for_family(family: Family, innovation: Innovation) -> Result<Self> {
        Self::closed_form(family, innovation)
            .or_else(|_| Self::monte_carlo(family, innovation, DEFAULT_MC_SIZE, DEFAULT_MC_SEED))
    }

    pub fn v(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.both(theta)?.0)
    }

    pub fn i(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.both(theta)?.1)
    }

    /// `(V(θ), I(θ))`.
    pub fn both(&self, theta: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        if theta.len() != self.family.dim() {
            return Err(Error::InvalidArgument(format!(
                "θ has length {}, {} needs {}",
                theta.len(),
                self.family.name(),
                self.family.dim()
            )));
        }
        let m3 = self.innovation.third_moment();
        let m4 = self.innovation.fourth_moment();
        match (self.family, &self.eps) {
            (Family::TvAr { order }, None) => {
                let sigma = theta[order];
                check_sigma(sigma)?;
                let gamma = ar_autocovariances(&theta[..order], sigma, order)?;
                let w = DMatrix::from_fn(order, order, |i, j| gamma[i.abs_diff(j)]);
                Ok(mean_model(&w, &vec![0.0; order], sigma, m3, m4))
            }
            (Family::TvMa1, None) => {
                let (a, sigma) = (theta[0], theta[1]);
                check_sigma(sigma)?;
                if a.abs() >= 1.0 {
                    return Err(Error::Domain(format!("MA coefficient {a} not invertible")));
                }
                let v = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / (1.0 - a * a), 2.0 / (sigma * sigma)]));
                let mut i = v.clone();
                i[(1, 1)] = (m4 - 1.0) / (sigma * sigma);
                Ok((v, i))
            }
            (Family::TvArch { order }, Some(eps)) => {
                let v = arch_v(theta, order, eps)?;
                let i = &v * ((m4 - 1.0) / 2.0);
                Ok((v, i))
            }
            (Family::TvTar1, Some(eps)) => {
                let sigma = theta[2];
                check_sigma(sigma)?;
                let (w, mean) = tar_moments(theta[0], theta[1], sigma, eps)?;
                Ok(mean_model(&w, &mean, sigma, m3, m4))
            }
            (Family::TvAr { .. } | Family::TvMa1, Some(_)) => {
                Self::closed_form(self.family, self.innovation)?.both(theta)
            }
            (family, None) => Err(Error::Unsupported(format!(
                "{} needs Monte Carlo information matrices",
                family.name()
            ))),
        }
    }

    /// `V(θ₀(t/n))` at each `t` in `points`.
    pub fn v_table(&self, curve: &ParamCurve, n: usize, points: &[usize]) -> Result<VTable> {
        let matrices = points
            .iter()
            .map(|&t| self.v(&curve.eval(t as f64 / n as f64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(VTable {
            n,
            points: points.to_vec(),
            matrices,
        })
    }
}

/// Precomputed `V(θ₀(t/n))` along a curve.
#[derive(Clone, Debug)]
pub struct VTable {
    pub n: usize,
    pub points: Vec<usize>,
    pub matrices: Vec<DMatrix<f64>>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("scale {sigma} must be positive")))
    }
}

/// `V = σ⁻² diag(W, 2)`, `I = σ⁻² [[W, Eε³·Eμ], [·, Eε⁴ − 1]]`.
fn mean_model(w: &DMatrix<f64>, mean: &[f64], sigma: f64, m3: f64, m4: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let r = w.nrows();
    let s2 = sigma * sigma;
    let mut v = DMatrix::zeros(r + 1, r + 1);
    v.view_mut((0, 0), (r, r)).copy_from(&(w / s2));
    v[(r, r)] = 2.0 / s2;
    let mut i = v.clone();
    i[(r, r)] = (m4 - 1.0) / s2;
    for j in 0..r {
        i[(j, r)] = m3 * mean[j] / s2;
        i[(r, j)] = i[(j, r)];
    }
    (v, i)
}

/// Autocovariances `γ(0..=max_lag)` of the causal AR recursion
/// `X_t = Σ α_j X_{t−j} + σε_t`, from its MA(∞) weights.
pub fn ar_autocovariances(alpha: &[f64], sigma: f64, max_lag: usize) -> Result<Vec<f64>> {
    let r = alpha.len();
    let mut psi = vec![1.0];
    loop {
        let j = psi.len();
        let next: f64 = (1..=r.min(j)).map(|i| alpha[i - 1] * psi[j - i]).sum();
        psi.push(next);
        if !next.is_finite() || next.abs() > 1e12 || j > 1_000_000 {
            return Err(Error::Domain(format!("AR coefficients {alpha:?} are not stationary")));
        }
        if j >= r.max(1) && psi[psi.len() - r.max(1)..].iter().all(|x| x.abs() < 1e-15) {
            break;
        }
    }
    Ok((0..=max_lag)
        .map(|k| sigma * sigma * psi.iter().zip(psi.iter().skip(k)).map(|(a, b)| a * b).sum::<f64>())
        .collect())
}

/// `V = ½ E[μμ'/v²]` with `μ = (1, X²_{t−1}, …)` and `v = θ'μ`.
fn arch_v(theta: &[f64], order: usize, eps: &[f64]) -> Result<DMatrix<f64>> {
    if theta[0] <= 0.0 || theta[1..].iter().any(|&a| a < 0.0) || theta[1..].iter().sum::<f64>() >= 1.0 {
        return Err(Error::Domain(format!("ARCH parameters {theta:?} outside the stationary region")));
    }
    let p = order + 1;
    let mut sq = vec![0.0; order];
    let mut acc = DMatrix::zeros(p, p);
    let mut mu = vec![0.0; p];
    mu[0] = 1.0;
    for (k, &e) in eps.iter().enumerate() {
        mu[1..].copy_from_slice(&sq);
        let v: f64 = theta.iter().zip(&mu).map(|(a, m)| a * m).sum();
        if k >= BURN_IN {
            let inv = 1.0 / (v * v);
            for i in 0..p {
                for j in 0..p {
                    acc[(i, j)] += mu[i] * mu[j] * inv;
                }
            }
        }
        let x2 = v * e * e;
        if order > 0 {
            sq.rotate_right(1);
            sq[0] = x2;
        }
    }
    Ok(acc / (2.0 * (eps.len() - BURN_IN) as f64))
}

/// `(E[μμ'], E[μ])` for `μ = (X⁺_{t−1}, X⁻_{t−1})` of the stationary TAR(1).
fn tar_moments(a1: f64, a2: f64, sigma: f64, eps: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if a1.abs() >= 1.0 || a2.abs() >= 1.0 {
        return Err(Error::Domain(format!("TAR coefficients ({a1}, {a2}) not stable")));
    }
    let mut x: f64 = 0.0;
    let mut w = DMatrix::zeros(2, 2);
    let mut mean = vec![0.0; 2];
    for (k, &e) in eps.iter().enumerate() {
        let mu = [x.max(0.0), (-x).max(0.0)];
        if k >= BURN_IN {
            for i in 0..2 {
                mean[i] += mu[i];
                for j in 0..2 {
                    w[(i, j)] += mu[i] * mu[j];
                }
            }
        }
        x = a1 * mu[0] + a2 * mu[1] + sigma * e;
    }
    let m = (eps.len() - BURN_IN) as f64;
    mean.iter_mut().for_each(|v| *v /= m);
    Ok((w / m, mean))
}

/// `(V, I)` for a family at one `θ` from the closed forms (Gaussian innovations
/// unless `innovation` says otherwise).
pub fn info_matrices_closed_form(family: Family, theta: &[f64], innovation: Innovation) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    InfoMatrices::closed_form(family, innovation)?.both(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ar1_closed_form_entries() {
        let (v, i) = info_matrices_closed_form(Family::TvAr { order: 1 }, &[0.0, 1.0], Innovation::Gaussian).unwrap();
        assert_relative_eq!(v[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(v[(1, 1)], 2.0, epsilon = 1e-14);
        assert_eq!(v[(0, 1)], 0.0);
        assert_eq!(v, i);
        let v = InfoMatrices::closed_form(Family::TvAr { order: 1 }, Innovation::Gaussian)
            .unwrap()
            .v(&[0.5, 0.8])
            .unwrap();
        assert_relative_eq!(v[(0, 0)], 1.0 / 0.75, epsilon = 1e-12);
        assert_relative_eq!(v[(1, 1)], 2.0 / 0.64, epsilon = 1e-12);
    }

    #[test]
    fn ar2_autocovariances_solve_yule_walker() {
        let (a1, a2) = (0.5, -0.3);
        let g = ar_autocovariances(&[a1, a2], 1.0, 2).unwrap();
        assert_relative_eq!(g[1], a1 * g[0] + a2 * g[1], epsilon = 1e-12);
        assert_relative_eq!(g[2], a1 * g[1] + a2 * g[0], epsilon = 1e-12);
        assert_relative_eq!(g[0], a1 * g[1] + a2 * g[2] + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn explosive_ar_is_rejected() {
        assert!(ar_autocovariances(&[1.2], 1.0, 1).is_err());
    }

    #[test]
    fn non_gaussian_fourth_moment_enters_sigma_entry() {
        let (_, i) = info_matrices_closed_form(Family::TvMa1, &[0.3, 2.0], Innovation::Uniform).unwrap();
        assert_relative_eq!(i[(1, 1)], 0.8 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn arch_requires_monte_carlo() {
        assert!(InfoMatrices::closed_form(Family::TvArch { order: 1 }, Innovation::Gaussian).is_err());
        let info = InfoMatrices::for_family(Family::TvArch { order: 1 }, Innovation::Gaussian).unwrap();
        let (v, i) = info.both(&[0.4, 0.2]).unwrap();
        assert_relative_eq!(v, i, epsilon = 1e-12);
        assert!(v.clone().symmetric_eigen().eigenvalues.min() > 0.0);
        assert_relative_eq!(v[(0, 1)], v[(1, 0)]);
    }

    #[test]
    fn tar_with_equal_coefficients_has_symmetric_w() {
        let info = InfoMatrices::monte_carlo(Family::TvTar1, Innovation::Gaussian, 100_000, 3).unwrap();
        let (v, i) = info.both(&[0.0, 0.0, 1.0]).unwrap();
        // X = ε: E[(ε⁺)²] = 1/2, E[ε⁺ε⁻] = 0
        assert!((v[(0, 0)] - 0.5).abs() < 0.02);
        assert_eq!(v[(0, 1)], 0.0);
        assert_relative_eq!(v[(2, 2)], 2.0);
        assert!(i[(0, 2)].abs() < 1e-12);
    }
}
