//! Bandwidth selection by quasi-leave-one-out cross validation for local
//! likelihood estimators of locally stationary time series.
//!
//! The crate covers time-varying AR(r), MA(1), ARCH(r) and threshold AR(1)
//! models: simulation of triangular arrays, kernel-localized Gaussian
//! objectives, local M-estimation by projected Newton (with a closed form for
//! tvAR), the cross-validation functional, the information-weighted distance
//! `d_A`, the asymptotically optimal plug-in bandwidth and a Monte Carlo
//! study harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod curve;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod grid;
pub mod kernel;
pub mod likelihood;
pub mod model;
pub mod presets;
pub mod processes;
pub mod seed;
pub mod selection;

pub use curve::{Component, CubicSpline, ParamCurve};
pub use error::{Error, Result};
pub use grid::{make_weight, BandwidthGrid, WeightFn};
pub use kernel::{epanechnikov, kernel_weights, Kernel};
pub use model::{Family, Innovation, ModelSpec, ThetaBox};
pub use seed::SeedPolicy;
