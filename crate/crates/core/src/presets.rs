//! The four benchmark models.
//!
//! * (a) tvAR(1): `α(u) = 0.9 sin 2πu`, `σ(u) = 0.3 sin 2πu + 0.5`
//! * (b) tvMA(1): same curves as (a)
//! * (c) tvARCH(1): `a₀(u) = 0.2 sin 2πu + 0.4`, `a₁(u) = 0.1 sin 2πu + 0.2`
//! * (d) tvTAR(1): `a₁(u) = 0.4 sin 2πu`, `a₂(u) = 0.5 cos 2πu`, `σ ≡ 1`

use crate::curve::{Component, ParamCurve};
use crate::error::{Error, Result};
use crate::model::{Family, Innovation, ModelSpec};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    A,
    B,
    C,
    D,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::A, Preset::B, Preset::C, Preset::D];

    pub fn family(self) -> Family {
        match self {
            Preset::A => Family::TvAr { order: 1 },
            Preset::B => Family::TvMa1,
            Preset::C => Family::TvArch { order: 1 },
            Preset::D => Family::TvTar1,
        }
    }

    pub fn curve(self) -> ParamCurve {
        let comps = match self {
            Preset::A | Preset::B => vec![Component::sin(0.9, 0.0), Component::sin(0.3, 0.5)],
            Preset::C => vec![Component::sin(0.2, 0.4), Component::sin(0.1, 0.2)],
            Preset::D => vec![
                Component::sin(0.4, 0.0),
                Component::cos(0.5, 0.0),
                Component::Constant(1.0),
            ],
        };
        ParamCurve::new(comps).expect("preset curves are nonempty")
    }

    pub fn spec(self, innovation: Innovation) -> ModelSpec {
        ModelSpec::standard(self.family(), innovation)
    }

    pub fn letter(self) -> char {
        match self {
            Preset::A => 'a',
            Preset::B => 'b',
            Preset::C => 'c',
            Preset::D => 'd',
        }
    }

    /// Accepts `a` and `model-a` (any case).
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.strip_prefix("model-").unwrap_or(&lower) {
            "a" => Ok(Preset::A),
            "b" => Ok(Preset::B),
            "c" => Ok(Preset::C),
            "d" => Ok(Preset::D),
            _ => Err(Error::Parse(format!(
                "unknown model preset `{s}` (expected a, b, c or d)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model-{}", self.letter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_accepts_both_spellings() {
        assert_eq!(Preset::parse("b").unwrap(), Preset::B);
        assert_eq!(Preset::parse("Model-D").unwrap(), Preset::D);
        assert!(Preset::parse("model-e").is_err());
    }

    #[test]
    fn curves_stay_inside_the_standard_boxes() {
        for p in Preset::ALL {
            let spec = p.spec(Innovation::Gaussian);
            spec.check_curve(&p.curve(), 1000).unwrap();
        }
    }

    #[test]
    fn curve_values() {
        let a = Preset::A.curve().eval(0.25);
        assert!((a[0] - 0.9).abs() < 1e-12 && (a[1] - 0.8).abs() < 1e-12);
        let d = Preset::D.curve().eval(0.0);
        assert!(d[0].abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-12 && d[2] == 1.0);
    }
}
