//! Run configuration: JSON on disk, `key=value` overrides on top.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::GridConfig;
use crate::params::ModelParams;
use crate::solvers::{ContinuationSchedule, GroundStateOptions};

pub const OUTPUT_DIR_ENV: &str = "QNLS_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Qp,
    Astar,
    Solve,
    Excited,
    ScanCritical,
    Concentrate,
    Gncheck,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Qp => "qp",
            Command::Astar => "astar",
            Command::Solve => "solve",
            Command::Excited => "excited",
            Command::ScanCritical => "scan-critical",
            Command::Concentrate => "concentrate",
            Command::Gncheck => "gncheck",
        }
    }
}

/// Model parameters as written in a config; which ones are required depends
/// on the command.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub dim: Option<usize>,
    pub p: Option<f64>,
    pub a: Option<f64>,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    /// `mu` values of the continuation, largest first.
    pub schedule: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
    pub seed_profile: Option<PathBuf>,
    /// Node count for `excited`.
    pub k: Option<usize>,
    /// Absolute masses for `scan-critical`; defaults to `mass_factors * a_*`.
    pub masses: Option<Vec<f64>>,
    pub mass_factors: Option<Vec<f64>>,
    /// `delta` values for `concentrate`.
    pub offsets: Option<Vec<f64>>,
    /// Random seed for `gncheck`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overrides: Overrides,
}

/// Named tolerances and constants.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub final_tolerance: Option<f64>,
    pub stage_tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub eta: Option<f64>,
    pub rearrange_every: Option<usize>,
    /// Constant `c` in `w_n(x) = (c eps_n)^N u_n^2(c eps_n x)`.
    pub rescaling_constant: Option<f64>,
    pub gn_tolerance: Option<f64>,
    pub gn_fields: Option<usize>,
    /// Half-width of the `s` range in `fiber.dat`.
    pub fiber_range: Option<f64>,
}

pub const DEFAULT_MASS_FACTORS: [f64; 3] = [0.9, 1.0, 1.5];
pub const DEFAULT_OFFSETS: [f64; 4] = [0.5, 0.25, 0.1, 0.05];
pub const DEFAULT_GN_FIELDS: usize = 100;
pub const DEFAULT_GN_TOLERANCE: f64 = 1e-2;
pub const DEFAULT_FIBER_RANGE: f64 = 3.0;

const TOP_LEVEL: [&str; 12] = [
    "command",
    "params",
    "grid",
    "schedule",
    "output_dir",
    "seed_profile",
    "k",
    "masses",
    "mass_factors",
    "offsets",
    "seed",
    "overrides",
];

fn missing(field: &str, command: Command) -> Error {
    Error::Config(format!("`{field}` is required by `{}`", command.as_str()))
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, overrides)
    }

    /// Parses `text` after applying `key=value` overrides. A dotted key
    /// addresses a nested field (`params.a=1.1`); a bare key that is not a
    /// top-level field names an entry of `overrides`. Values are read as
    /// JSON, falling back to a plain string.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form key=value")))?;
            let key = key.trim();
            let parsed = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
            let path: Vec<&str> = if key.contains('.') || TOP_LEVEL.contains(&key) {
                key.split('.').collect()
            } else {
                vec!["overrides", key]
            };
            set_path(&mut value, &path, parsed)?;
        }
        let config: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        let c = self.command;
        if self.params.dim.is_none() {
            return Err(missing("params.N", c));
        }
        match c {
            Command::Qp | Command::Gncheck if self.params.p.is_none() => return Err(missing("params.p", c)),
            Command::Solve | Command::Excited if self.params.p.is_none() => return Err(missing("params.p", c)),
            Command::Solve | Command::Excited if self.params.a.is_none() => return Err(missing("params.a", c)),
            Command::Excited if self.k.is_none() => return Err(missing("k", c)),
            _ => {}
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.params.dim.expect("checked on load")
    }

    /// Model parameters with unset `theta`/`mu` at their defaults and unset
    /// `p`/`a` at `fallback`.
    pub fn model_params(&self, p: f64, a: f64) -> ModelParams {
        let mut m = ModelParams::new(self.dim(), self.params.p.unwrap_or(p), self.params.a.unwrap_or(a));
        if let Some(theta) = self.params.theta {
            m = m.with_theta(theta);
        }
        if let Some(mu) = self.params.mu {
            m = m.with_mu(mu);
        }
        m
    }

    pub fn schedule(&self) -> ContinuationSchedule {
        let mut s = ContinuationSchedule::default();
        if let Some(mu) = &self.schedule {
            s.mu_values = mu.clone();
        }
        let o = &self.overrides;
        if let Some(v) = o.final_tolerance {
            s.final_tolerance = v;
        }
        if let Some(v) = o.stage_tolerance {
            s.stage_tolerance = v;
        }
        if let Some(v) = o.max_iterations {
            s.max_iterations = v;
        }
        if let Some(v) = o.eta {
            s.eta = v;
        }
        if let Some(v) = o.rearrange_every {
            s.rearrange_every = v;
        }
        s
    }

    pub fn ground_options(&self) -> Result<GroundStateOptions> {
        let seed = match &self.seed_profile {
            Some(path) => Some(crate::grid::load_profile_csv(path, self.dim())?),
            None => None,
        };
        Ok(GroundStateOptions {
            grid: self.grid,
            schedule: self.schedule(),
            seed,
        })
    }

    /// `output_dir`, or the `QNLS_OUTPUT_DIR` environment variable.
    pub fn output_dir(&self) -> Result<PathBuf> {
        match &self.output_dir {
            Some(dir) => Ok(dir.clone()),
            None => std::env::var_os(OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .ok_or_else(|| Error::Config(format!("`output_dir` is unset and {OUTPUT_DIR_ENV} is not defined"))),
        }
    }
}

fn set_path(value: &mut Value, path: &[&str], new: Value) -> Result<()> {
    let mut cur = value;
    for (i, key) in path.iter().enumerate() {
        let obj = match cur {
            Value::Object(map) => map,
            Value::Null => {
                *cur = Value::Object(Default::default());
                cur.as_object_mut().expect("just created")
            }
            _ => {
                return Err(Error::Config(format!(
                    "override path `{}` runs through a non-object",
                    path.join(".")
                )))
            }
        };
        if i + 1 == path.len() {
            obj.insert(key.to_string(), new);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    Err(Error::Config("empty override key".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"{"command": "solve", "params": {"N": 2, "p": 7, "a": 1}, "output_dir": "out"}"#;

    #[test]
    fn overrides_reach_nested_and_named_fields() {
        let c = RunConfig::from_json(SOLVE, &["params.a=1.5".into(), "max_iterations=10".into()]).unwrap();
        assert_eq!(c.params.a, Some(1.5));
        assert_eq!(c.overrides.max_iterations, Some(10));
        assert_eq!(c.schedule().max_iterations, 10);
    }

    #[test]
    fn missing_fields_are_named() {
        let err =
            RunConfig::from_json(r#"{"command": "excited", "params": {"N": 2, "p": 7, "a": 1}}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("`k`"));
        let err = RunConfig::from_json(SOLVE, &["bogus=1".into()]).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
