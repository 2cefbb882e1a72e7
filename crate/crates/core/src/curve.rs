//! Parameter curves `θ(u)` on rescaled time `u ∈ [0, 1]`.

use crate::error::{Error, Result};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

/// Step used when a component has no analytic derivative.
pub const FD_STEP: f64 = 1e-4;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One coordinate of a parameter curve.
#[derive(Clone)]
pub enum Component {
    Constant(f64),
    /// `amplitude * sin(2π frequency u + phase) + offset`
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    Spline(CubicSpline),
    /// Arbitrary function; derivatives by central differences with step [`FD_STEP`].
    Function(ScalarFn),
}

impl fmt::Debug for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Constant(c) => write!(f, "Constant({c})"),
            Component::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => write!(
                f,
                "Sinusoid({amplitude} sin(2π·{frequency}u + {phase}) + {offset})"
            ),
            Component::Spline(s) => write!(f, "Spline({} knots)", s.knots.len()),
            Component::Function(_) => write!(f, "Function"),
        }
    }
}

impl Component {
    pub fn sin(amplitude: f64, offset: f64) -> Self {
        Component::Sinusoid {
            amplitude,
            frequency: 1.0,
            phase: 0.0,
            offset,
        }
    }

    pub fn cos(amplitude: f64, offset: f64) -> Self {
        Component::Sinusoid {
            amplitude,
            frequency: 1.0,
            phase: std::f64::consts::FRAC_PI_2,
            offset,
        }
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Component::Function(Arc::new(f))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Component::Constant(c) => *c,
            Component::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => amplitude * (TAU * frequency * u + phase).sin() + offset,
            Component::Spline(s) => s.eval(u),
            Component::Function(f) => f(u),
        }
    }

    pub fn d1(&self, u: f64) -> f64 {
        match self {
            Component::Constant(_) => 0.0,
            Component::Sinusoid {
                amplitude,
                frequency,
                phase,
                ..
            } => amplitude * TAU * frequency * (TAU * frequency * u + phase).cos(),
            Component::Spline(s) => s.d1(u),
            Component::Function(f) => (f(u + FD_STEP) - f(u - FD_STEP)) / (2.0 * FD_STEP),
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        match self {
            Component::Constant(_) => 0.0,
            Component::Sinusoid {
                amplitude,
                frequency,
                phase,
                ..
            } => {
                let w = TAU * frequency;
                -amplitude * w * w * (w * u + phase).sin()
            }
            Component::Spline(s) => s.d2(u),
            Component::Function(f) => {
                (f(u + FD_STEP) - 2.0 * f(u) + f(u - FD_STEP)) / (FD_STEP * FD_STEP)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Component::Constant(_))
    }
}

/// A vector-valued curve `u ↦ θ(u) ∈ R^p`.
#[derive(Clone, Debug)]
pub struct ParamCurve {
    components: Vec<Component>,
}

impl ParamCurve {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "parameter curve needs at least one component".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn constant(theta: &[f64]) -> Self {
        Self {
            components: theta.iter().map(|&c| Component::Constant(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(u)).collect()
    }

    pub fn eval_d1(&self, u: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.d1(u)).collect()
    }

    pub fn eval_d2(&self, u: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.d2(u)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Component::is_constant)
    }
}

/// Natural cubic spline through `(knots[i], values[i])`.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = knots.len();
        if k < 2 || values.len() != k {
            return Err(Error::InvalidArgument(format!(
                "spline needs >= 2 knots and matching values (got {} knots, {} values)",
                k,
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "spline knots must be strictly increasing".into(),
            ));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("spline table contains non-finite entries".into()));
        }
        let mut m = vec![0.0; k];
        if k > 2 {
            // Thomas algorithm for the interior second derivatives.
            let inner = k - 2;
            let mut diag = vec![0.0; inner];
            let mut upper = vec![0.0; inner];
            let mut rhs = vec![0.0; inner];
            for i in 1..k - 1 {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] =
                    6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for i in 1..inner {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[inner] = rhs[inner - 1] / diag[inner - 1];
            for i in (0..inner - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { knots, values, m })
    }

    fn segment(&self, u: f64) -> usize {
        let k = self.knots.len();
        match self.knots.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(k - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(k - 2),
        }
    }

    fn coeffs(&self, u: f64) -> (f64, f64, f64, usize) {
        let i = self.segment(u);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - u) / h;
        let b = (u - self.knots[i]) / h;
        (a, b, h, i)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (a, b, h, i) = self.coeffs(u);
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn d1(&self, u: f64) -> f64 {
        let (a, b, h, i) = self.coeffs(u);
        (self.values[i + 1] - self.values[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn d2(&self, u: f64) -> f64 {
        let (a, b, _, i) = self.coeffs(u);
        a * self.m[i] + b * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_a() -> ParamCurve {
        ParamCurve::new(vec![Component::sin(0.9, 0.0), Component::sin(0.3, 0.5)]).unwrap()
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let c = model_a();
        let step = 1e-5;
        for &u in &[0.1, 0.27, 0.5, 0.83] {
            let d1 = c.eval_d1(u);
            let d2 = c.eval_d2(u);
            let (p, m) = (c.eval(u + step), c.eval(u - step));
            let (dp, dm) = (c.eval_d1(u + step), c.eval_d1(u - step));
            for j in 0..2 {
                let fd1 = (p[j] - m[j]) / (2.0 * step);
                let fd2 = (dp[j] - dm[j]) / (2.0 * step);
                assert!((fd1 - d1[j]).abs() <= 1e-5 * d1[j].abs().max(1.0));
                assert!((fd2 - d2[j]).abs() <= 1e-5 * d2[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn cosine_component() {
        let c = Component::cos(0.5, 0.0);
        assert!((c.eval(0.0) - 0.5).abs() < 1e-15);
        assert!(c.eval(0.25).abs() < 1e-15);
    }

    #[test]
    fn function_component_differences() {
        let c = Component::function(|u| u.powi(3));
        assert!((c.d1(0.5) - 0.75).abs() < 1e-7);
        assert!((c.d2(0.5) - 3.0).abs() < 1e-5);
    }

    #[test]
    fn spline_interpolates_and_reproduces_lines() {
        let knots: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let line: Vec<f64> = knots.iter().map(|u| 2.0 * u - 1.0).collect();
        let s = CubicSpline::new(knots.clone(), line).unwrap();
        for &u in &[0.0, 0.05, 0.33, 0.999, 1.0] {
            assert!((s.eval(u) - (2.0 * u - 1.0)).abs() < 1e-12);
            assert!((s.d1(u) - 2.0).abs() < 1e-12);
            assert!(s.d2(u).abs() < 1e-12);
        }
        let vals: Vec<f64> = knots.iter().map(|u| (TAU * u).sin()).collect();
        let s = CubicSpline::new(knots.clone(), vals.clone()).unwrap();
        for (k, v) in knots.iter().zip(&vals) {
            assert!((s.eval(*k) - v).abs() < 1e-12);
        }
        assert!((s.eval(0.25) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn spline_rejects_bad_tables() {
        assert!(CubicSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn constant_curve() {
        let c = ParamCurve::constant(&[0.5, 1.0]);
        assert!(c.is_constant());
        assert_eq!(c.eval(0.3), vec![0.5, 1.0]);
        assert_eq!(c.eval_d2(0.3), vec![0.0, 0.0]);
        assert!(!model_a().is_constant());
    }
}
