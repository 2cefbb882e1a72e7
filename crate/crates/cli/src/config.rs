//! Declarative run configuration (TOML) merged with command-line flags.

use lscv::experiments::Mode;
use lscv::presets::Preset;
use lscv::{BandwidthGrid, Component, CubicSpline, Family, Innovation, ParamCurve};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_N: usize = 500;
pub const DEFAULT_REPS: usize = 200;
pub const DEFAULT_OUT: &str = "lscv-out";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// preset `a`..`d` (or `model-a`..`model-d`)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// sampled curve table, used instead of a preset
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<CurveTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub misspecified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub innovation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plugin: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Parameter curves sampled at `knots`, one row of `values` per component,
/// joined by natural cubic splines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveTable {
    pub family: String,
    pub knots: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(key: &str, msg: impl std::fmt::Display) -> Result<T, ConfigError> {
    Err(ConfigError(format!("config key `{key}`: {msg}")))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {}", e.to_string().trim())))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: RunConfig) -> RunConfig {
        RunConfig {
            model: other.model.or(self.model),
            table: other.table.or(self.table),
            n: other.n.or(self.n),
            reps: other.reps.or(self.reps),
            seed: other.seed.or(self.seed),
            workers: other.workers.or(self.workers),
            out: other.out.or(self.out),
            misspecified: other.misspecified.or(self.misspecified),
            innovation: other.innovation.or(self.innovation),
            grid: other.grid.or(self.grid),
            h: other.h.or(self.h),
            input: other.input.or(self.input),
            plugin: other.plugin.or(self.plugin),
        }
    }

    /// Validates every key before anything runs.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let source = match (&self.model, &self.table) {
            (Some(_), Some(_)) => return err("table", "give either `model` or `table`, not both"),
            (Some(m), None) => match Preset::parse(m) {
                Ok(p) => Some(Source::Preset(p)),
                Err(e) => return err("model", e),
            },
            (None, Some(t)) => Some(t.resolve()?),
            (None, None) => None,
        };
        let n = self.n.unwrap_or(DEFAULT_N);
        if n < 2 {
            return err("n", format!("series length {n} is too short"));
        }
        let reps = self.reps.unwrap_or(DEFAULT_REPS);
        if reps == 0 {
            return err("reps", "need at least one replication");
        }
        let innovation = match &self.innovation {
            None => Innovation::Gaussian,
            Some(s) => match Innovation::parse(s) {
                Ok(i) => i,
                Err(e) => return err("innovation", e),
            },
        };
        let grid = match self.grid {
            None => BandwidthGrid::default(),
            Some(g) if g.points == 1 && g.min == g.max => match BandwidthGrid::from_points(vec![g.min]) {
                Ok(grid) => grid,
                Err(e) => return err("grid", e),
            },
            Some(g) => match BandwidthGrid::log_spaced(g.min, g.max, g.points) {
                Ok(grid) => grid,
                Err(e) => return err("grid", e),
            },
        };
        if let Some(h) = self.h {
            if !(h > 0.0 && h < 1.0) {
                return err("h", format!("bandwidth {h} must lie in (0, 1)"));
            }
        }
        let misspecified = self.misspecified.unwrap_or(false);
        if misspecified {
            let ok = matches!(
                source.as_ref().map(Source::family),
                Some(Family::TvMa1) | Some(Family::TvArch { order: 1 })
            );
            if !ok {
                return err("misspecified", "needs tvMA(1) or tvARCH(1) data (model b or c)");
            }
        }
        Ok(Resolved {
            source,
            n,
            reps,
            seed: self.seed.unwrap_or(0),
            workers: self.workers.unwrap_or(0),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            mode: if misspecified {
                Mode::MisspecifiedToTvAr
            } else {
                Mode::WellSpecified
            },
            innovation,
            grid,
            h: self.h,
            input: self.input.clone(),
            plugin: self.plugin.unwrap_or(false),
        })
    }
}

impl CurveTable {
    fn resolve(&self) -> Result<Source, ConfigError> {
        let family = match Family::parse(&self.family) {
            Ok(f) => f,
            Err(e) => return err("table.family", e),
        };
        if self.values.len() != family.dim() {
            return err(
                "table.values",
                format!("{} rows given, {} needs {}", self.values.len(), family.name(), family.dim()),
            );
        }
        let mut comps = Vec::with_capacity(self.values.len());
        for row in &self.values {
            match CubicSpline::new(self.knots.clone(), row.clone()) {
                Ok(s) => comps.push(Component::Spline(s)),
                Err(e) => return err("table.values", e),
            }
        }
        let curve = ParamCurve::new(comps).or_else(|e| err("table", e))?;
        Ok(Source::Table { family, curve })
    }
}

/// `MIN:MAX:POINTS`.
pub fn parse_grid(s: &str) -> Result<GridConfig, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected MIN:MAX:POINTS, got `{s}`"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in grid"));
    Ok(GridConfig {
        min: num(parts[0])?,
        max: num(parts[1])?,
        points: parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("bad point count `{}` in grid", parts[2]))?,
    })
}

#[derive(Clone, Debug)]
pub enum Source {
    Preset(Preset),
    Table { family: Family, curve: ParamCurve },
}

impl Source {
    pub fn family(&self) -> Family {
        match self {
            Source::Preset(p) => p.family(),
            Source::Table { family, .. } => *family,
        }
    }

    pub fn curve(&self) -> ParamCurve {
        match self {
            Source::Preset(p) => p.curve(),
            Source::Table { curve, .. } => curve.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Resolved {
    pub source: Option<Source>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub mode: Mode,
    pub innovation: Innovation,
    pub grid: BandwidthGrid,
    pub h: Option<f64>,
    pub input: Option<PathBuf>,
    pub plugin: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig {
            model: Some("a".into()),
            n: Some(200),
            seed: Some(7),
            grid: Some(GridConfig {
                min: 0.05,
                max: 0.9,
                points: 5,
            }),
            table: None,
            ..Default::default()
        };
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::from_toml("model = \"a\"\nbandwidth = 0.1\n").unwrap_err();
        assert!(e.0.contains("bandwidth"), "{e}");
    }

    #[test]
    fn validation_names_the_key() {
        let cfg = RunConfig::from_toml("model = \"e\"").unwrap();
        assert!(cfg.resolve().unwrap_err().0.contains("`model`"));
        let cfg = RunConfig::from_toml("h = 1.5").unwrap();
        assert!(cfg.resolve().unwrap_err().0.contains("`h`"));
        let cfg = RunConfig::from_toml("model = \"a\"\nmisspecified = true").unwrap();
        assert!(cfg.resolve().unwrap_err().0.contains("`misspecified`"));
    }

    #[test]
    fn grid_flag() {
        assert_eq!(
            parse_grid("0.01:0.5:10").unwrap(),
            GridConfig {
                min: 0.01,
                max: 0.5,
                points: 10
            }
        );
        assert!(parse_grid("0.1:0.2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml("n = 100\nseed = 3").unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        let m = file.merge(flags);
        assert_eq!((m.n, m.seed), (Some(100), Some(9)));
    }

    #[test]
    fn table_curves() {
        let cfg = RunConfig::from_toml(
            "[table]\nfamily = \"tvar1\"\nknots = [0.0, 0.5, 1.0]\nvalues = [[0.1, 0.2, 0.1], [1.0, 1.0, 1.0]]\n",
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        let src = r.source.unwrap();
        assert_eq!(src.family(), Family::TvAr { order: 1 });
        assert!((src.curve().eval(0.5)[0] - 0.2).abs() < 1e-12);
    }
}
