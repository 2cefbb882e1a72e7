//! Weight functions over rescaled time and bandwidth grids.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Indicator of the closed interval `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFn {
    a: f64,
    b: f64,
}

impl WeightFn {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
            return Err(Error::InvalidArgument(format!(
                "weight support must satisfy 0 <= a < b <= 1, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, u: f64) -> f64 {
        if self.contains(u) {
            1.0
        } else {
            0.0
        }
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.a && u <= self.b
    }

    /// Time indices `t` (1-based) with `t/n` in the support, in increasing order.
    pub fn indices(&self, n: usize) -> Vec<usize> {
        (1..=n).filter(|&t| self.contains(t as f64 / n as f64)).collect()
    }

    pub fn measure(&self) -> f64 {
        self.b - self.a
    }
}

impl Default for WeightFn {
    /// `1_[0.05, 0.95]`
    fn default() -> Self {
        Self { a: 0.05, b: 0.95 }
    }
}

/// Indicator weight `1_[a, b]`.
pub fn make_weight(a: f64, b: f64) -> Result<WeightFn> {
    WeightFn::new(a, b)
}

pub const DEFAULT_GRID_POINTS: usize = 40;
pub const DEFAULT_H_MIN: f64 = 0.01;
pub const DEFAULT_H_MAX: f64 = 0.99;

/// Finite, strictly increasing set of candidate bandwidths in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    points: Vec<f64>,
}

impl BandwidthGrid {
    /// A grid from explicit points. A single point is accepted so callers can
    /// evaluate one bandwidth through the same pipeline.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("bandwidth grid is empty".into()));
        }
        if points.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return Err(Error::InvalidArgument(
                "bandwidth grid points must lie in (0, 1)".into(),
            ));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "bandwidth grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `count` logarithmically spaced points from `h_min` to `h_max` inclusive.
    pub fn log_spaced(h_min: f64, h_max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument(
                "a log-spaced grid needs at least 2 points".into(),
            ));
        }
        if !(h_min > 0.0 && h_min < h_max && h_max < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grid bounds must satisfy 0 < min < max < 1, got {h_min}:{h_max}"
            )));
        }
        let (lo, hi) = (h_min.ln(), h_max.ln());
        let mut points: Vec<f64> = (0..count)
            .map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp())
            .collect();
        points[0] = h_min;
        points[count - 1] = h_max;
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn h_min(&self) -> f64 {
        self.points[0]
    }

    pub fn h_max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index of the grid point closest to `h` on the log scale.
    pub fn nearest(&self, h: f64) -> usize {
        let target = h.ln();
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if (p.ln() - target).abs() < (self.points[best].ln() - target).abs() {
                best = i;
            }
        }
        best
    }
}

impl Default for BandwidthGrid {
    fn default() -> Self {
        Self::log_spaced(DEFAULT_H_MIN, DEFAULT_H_MAX, DEFAULT_GRID_POINTS)
            .expect("default grid is valid")
    }
}
