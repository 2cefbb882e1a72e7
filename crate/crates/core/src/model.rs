//! Model families, parameter boxes and innovation distributions.

use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `X_t = Σ_j α_j X_{t-j} + σ ε_t`, θ = (α_1..α_r, σ)
    TvAr { order: usize },
    /// `X_t = σ(t/n) ε_t + α(t/n) σ((t-1)/n) ε_{t-1}`, θ = (α, σ)
    TvMa1,
    /// `X_t = (a_0 + Σ_i a_i X_{t-i}^2)^{1/2} ε_t`, θ = (a_0..a_r)
    TvArch { order: usize },
    /// `X_t = a_1 X_{t-1}^+ + a_2 X_{t-1}^- + σ ε_t`, θ = (a_1, a_2, σ)
    TvTar1,
}

impl Family {
    pub fn dim(&self) -> usize {
        match *self {
            Family::TvAr { order } => order + 1,
            Family::TvMa1 => 2,
            Family::TvArch { order } => order + 1,
            Family::TvTar1 => 3,
        }
    }

    /// Number of lagged values the conditional objective looks at, `None` for
    /// an infinite past.
    pub fn max_lag(&self) -> Option<usize> {
        match *self {
            Family::TvAr { order } | Family::TvArch { order } => Some(order),
            Family::TvMa1 => None,
            Family::TvTar1 => Some(1),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Family::TvAr { order } => format!("tvAR({order})"),
            Family::TvMa1 => "tvMA(1)".into(),
            Family::TvArch { order } => format!("tvARCH({order})"),
            Family::TvTar1 => "tvTAR(1)".into(),
        }
    }

    /// Parses `tvar<r>`, `tvma1`, `tvarch<r>` or `tvtar1` (case and
    /// punctuation insensitive, so `tvAR(2)` also works).
    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let order = |rest: &str| -> Result<usize> {
            rest.parse::<usize>()
                .ok()
                .filter(|&r| r > 0)
                .ok_or_else(|| Error::Parse(format!("bad model order in `{s}`")))
        };
        let family = if let Some(rest) = key.strip_prefix("tvarch") {
            Family::TvArch { order: order(rest)? }
        } else if let Some(rest) = key.strip_prefix("tvar") {
            Family::TvAr { order: order(rest)? }
        } else if key == "tvma1" {
            Family::TvMa1
        } else if key == "tvtar1" {
            Family::TvTar1
        } else {
            return Err(Error::Parse(format!(
                "unknown family `{s}` (expected tvar<r>, tvma1, tvarch<r> or tvtar1)"
            )));
        };
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::TvAr { order: 0 } | Family::TvArch { order: 0 } => Err(
                Error::InvalidArgument("autoregressive order must be positive".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Innovation law of `ε_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Innovation {
    Gaussian,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// `Exp(1) - 1`.
    Exponential,
    /// Pareto(scale 1, `shape`) shifted to mean zero; variance left unstandardized.
    Pareto { shape: f64 },
}

/// Magnitude cap on Pareto draws.
pub const PARETO_CLAMP: f64 = 1e6;

impl Innovation {
    pub fn pareto() -> Self {
        Innovation::Pareto { shape: 2.5 }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Innovation::Gaussian => StandardNormal.sample(rng),
            Innovation::Uniform => {
                let v: f64 = rng.random();
                3f64.sqrt() * (2.0 * v - 1.0)
            }
            Innovation::Exponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            Innovation::Pareto { shape } => {
                // inverse cdf on (0, 1]
                let v: f64 = 1.0 - rng.random::<f64>();
                let x = v.powf(-1.0 / shape);
                (x - shape / (shape - 1.0)).min(PARETO_CLAMP)
            }
        }
    }

    /// `E ε^3`
    pub fn third_moment(&self) -> f64 {
        match *self {
            Innovation::Gaussian | Innovation::Uniform => 0.0,
            Innovation::Exponential => 2.0,
            Innovation::Pareto { .. } => f64::NAN,
        }
    }

    /// `E ε^4`; infinite for Pareto with shape <= 4.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            Innovation::Gaussian => 3.0,
            Innovation::Uniform => 1.8,
            Innovation::Exponential => 9.0,
            Innovation::Pareto { shape } if shape <= 4.0 => f64::INFINITY,
            Innovation::Pareto { .. } => f64::NAN,
        }
    }

    pub fn is_standardized(&self) -> bool {
        !matches!(self, Innovation::Pareto { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Innovation::Gaussian => "gaussian",
            Innovation::Uniform => "uniform",
            Innovation::Exponential => "exponential",
            Innovation::Pareto { .. } => "pareto",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Innovation::Gaussian),
            "uniform" => Ok(Innovation::Uniform),
            "exponential" => Ok(Innovation::Exponential),
            "pareto" => Ok(Innovation::pareto()),
            other => Err(Error::InvalidArgument(format!("unknown innovation '{other}'"))),
        }
    }
}

/// Per-coordinate closed intervals defining the parameter space Θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ThetaBox {
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::InvalidArgument(
                "box intervals must be finite with lower < upper".into(),
            ));
        }
        Ok(Self {
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }

    pub fn project(&self, theta: &mut [f64]) {
        for (x, (&lo, &hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(lo, hi);
        }
    }

    /// Conventional box for a family: coefficients in `[-0.99, 0.99]`, scales in
    /// `[0.01, 5]`, ARCH intercept in `[0.01, 5]` and ARCH slopes in `[0.001, 0.99]`.
    pub fn standard(family: Family) -> Self {
        let bounds: Vec<(f64, f64)> = match family {
            Family::TvAr { order } => {
                let mut b = vec![(-0.99, 0.99); order];
                b.push((0.01, 5.0));
                b
            }
            Family::TvMa1 => vec![(-0.99, 0.99), (0.01, 5.0)],
            Family::TvArch { order } => {
                let mut b = vec![(0.01, 5.0)];
                b.extend(std::iter::repeat_n((0.001, 0.99), order));
                b
            }
            Family::TvTar1 => vec![(-0.99, 0.99), (-0.99, 0.99), (0.01, 5.0)],
        };
        Self::new(&bounds).expect("standard box is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub theta_box: ThetaBox,
    pub innovation: Innovation,
}

impl ModelSpec {
    pub fn new(family: Family, theta_box: ThetaBox, innovation: Innovation) -> Result<Self> {
        family.validate()?;
        let spec = Self {
            family,
            theta_box,
            innovation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn standard(family: Family, innovation: Innovation) -> Self {
        Self {
            family,
            theta_box: ThetaBox::standard(family),
            innovation,
        }
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.family.dim();
        if self.theta_box.dim() != p {
            return Err(Error::InvalidArgument(format!(
                "{} needs a {p}-dimensional box, got {}",
                self.family.name(),
                self.theta_box.dim()
            )));
        }
        let (lo, hi) = (&self.theta_box.lower, &self.theta_box.upper);
        match self.family {
            Family::TvAr { .. } | Family::TvTar1 => {
                if lo[p - 1] <= 0.0 {
                    return Err(Error::InvalidArgument("σ lower bound must be positive".into()));
                }
            }
            Family::TvMa1 => {
                if lo[0] <= -1.0 || hi[0] >= 1.0 {
                    return Err(Error::InvalidArgument("MA coefficient interval must lie in (-1, 1)".into()));
                }
                if lo[1] <= 0.0 {
                    return Err(Error::InvalidArgument("σ lower bound must be positive".into()));
                }
            }
            Family::TvArch { .. } => {
                if lo[0] <= 0.0 || lo[1..].iter().any(|&l| l < 0.0) {
                    return Err(Error::InvalidArgument(
                        "ARCH intercept lower bound must be positive and slope bounds nonnegative"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Checks that `curve` has the right dimension and stays inside Θ at every
    /// `t/n`, `t = 0..=n`.
    pub fn check_curve(&self, curve: &ParamCurve, n: usize) -> Result<()> {
        if curve.dim() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} needs a {}-dimensional curve, got {}",
                self.family.name(),
                self.dim(),
                curve.dim()
            )));
        }
        let denom = n.max(1) as f64;
        for t in 0..=n {
            let u = t as f64 / denom;
            let theta = curve.eval(u);
            for (i, &x) in theta.iter().enumerate() {
                let (lo, hi) = (self.theta_box.lower[i], self.theta_box.upper[i]);
                if !(x >= lo && x <= hi) {
                    return Err(Error::OutsideParameterSpace {
                        index: i,
                        value: x,
                        lo,
                        hi,
                        u,
                    });
                }
            }
        }
        Ok(())
    }
}
