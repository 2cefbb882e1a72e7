//! Localizing kernels and the rescaled weights `K_h(t/n - u)`.

use crate::error::{Error, Result};
use std::ops::RangeInclusive;

/// A symmetric kernel supported on `[-1/2, 1/2]` together with its moment constants.
#[derive(Clone, Copy)]
pub struct Kernel {
    name: &'static str,
    density: fn(f64) -> f64,
    /// `∫ K(x)^2 dx`
    pub mu_k: f64,
    /// `∫ x^2 K(x) dx`
    pub d_k: f64,
    /// Lipschitz constant of `K`.
    pub lipschitz: f64,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("mu_k", &self.mu_k)
            .field("d_k", &self.d_k)
            .finish()
    }
}

fn epanechnikov_density(x: f64) -> f64 {
    if x.abs() >= 0.5 {
        0.0
    } else {
        1.5 * (1.0 - 4.0 * x * x)
    }
}

/// `K(x) = 3/2 (1 - (2x)^2)` on `[-1/2, 1/2]`.
pub fn epanechnikov() -> Kernel {
    Kernel {
        name: "epanechnikov",
        density: epanechnikov_density,
        mu_k: 1.2,
        d_k: 0.05,
        lipschitz: 6.0,
    }
}

impl Default for Kernel {
    fn default() -> Self {
        epanechnikov()
    }
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        self.name
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// `K_h(x) = K(x / h) / h`.
    #[inline]
    pub fn scaled(&self, x: f64, h: f64) -> f64 {
        (self.density)(x / h) / h
    }

    /// `K_h(t/n - u)`, with the argument formed as `(t - nu) / (nh)` so that
    /// support endpoints land exactly on `±1/2`.
    #[inline]
    pub fn at(&self, t: usize, n: usize, u: f64, h: f64) -> f64 {
        let nf = n as f64;
        (self.density)((t as f64 - nf * u) / (nf * h)) / h
    }

    /// Indices `t` (1-based) whose weight `K_h(t/n - u)` can be nonzero.
    ///
    /// The range may be empty (`start > end`).
    #[allow(clippy::reversed_empty_ranges)]
    pub fn support(&self, n: usize, u: f64, h: f64) -> RangeInclusive<usize> {
        let nf = n as f64;
        let lo = ((u - 0.5 * h) * nf).floor().max(1.0);
        let hi = ((u + 0.5 * h) * nf).ceil().min(nf);
        if hi < lo || n == 0 {
            return 1..=0;
        }
        (lo as usize)..=(hi as usize)
    }

    /// Dense weight vector: entry `t - 1` holds `K_h(t/n - u)`.
    pub fn weights(&self, n: usize, u: f64, h: f64) -> Result<Vec<f64>> {
        check_bandwidth(h)?;
        let mut w = vec![0.0; n];
        for t in self.support(n, u, h) {
            w[t - 1] = self.at(t, n, u, h);
        }
        Ok(w)
    }
}

pub(crate) fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must lie in (0, 1), got {h}"
        )));
    }
    Ok(())
}

/// Free-function form of [`Kernel::weights`].
pub fn kernel_weights(kernel: &Kernel, n: usize, u: f64, h: f64) -> Result<Vec<f64>> {
    kernel.weights(n, u, h)
}
