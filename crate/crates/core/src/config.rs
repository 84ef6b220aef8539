//! `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment. Keys not present keep
//! their defaults, unknown keys are rejected. When `dt` is absent the step
//! is derived from the resolved parameters (500 steps per period of the
//! fastest frequency).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::dynamics::Integration;
use crate::error::{Error, Result};
use crate::measures::{AnalysisOptions, DEFAULT_STEADY_TOL};
use crate::model::{default_params, SystemParams};

/// Every accepted key, in canonical order.
pub const KEYS: [&str; 16] = [
    "delta1",
    "delta2",
    "omega1",
    "omega2",
    "g",
    "gamma",
    "kappa",
    "E",
    "lambda",
    "A_c",
    "omega_c",
    "n_bath",
    "dt",
    "t_end",
    "transient_fraction",
    "record_stride",
];

pub const DEFAULT_T_END: f64 = 3000.0;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.6;
pub const DEFAULT_RECORD_STRIDE: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    /// Explicit step; `None` derives it from `params`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub transient_fraction: f64,
    pub record_stride: usize,
    lines: HashMap<&'static str, usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: default_params(),
            dt: None,
            t_end: DEFAULT_T_END,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            record_stride: DEFAULT_RECORD_STRIDE,
            lines: HashMap::new(),
        }
    }
}

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

impl RunConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::ConfigParse {
                    line: Some(line),
                    key: None,
                    msg: format!("expected `key = value`, got `{body}`"),
                });
            };
            cfg.set_at(key.trim(), value.trim(), Some(line))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply a `KEY=VALUE` override (as given to `--set`).
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::ConfigParse {
                line: None,
                key: None,
                msg: format!("override must be KEY=VALUE, got `{assignment}`"),
            });
        };
        self.set_at(key.trim(), value.trim(), None)?;
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_at(key, value, None)
    }

    fn set_at(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<()> {
        let Some(key) = canonical(key) else {
            return Err(Error::config(line, key, "unknown key"));
        };
        if key == "record_stride" {
            self.record_stride = value
                .parse()
                .map_err(|_| Error::config(line, key, format!("expected a positive integer, got `{value}`")))?;
        } else {
            let v: f64 = value
                .parse()
                .map_err(|_| Error::config(line, key, format!("expected a number, got `{value}`")))?;
            let p = &mut self.params;
            match key {
                "delta1" => p.delta1 = v,
                "delta2" => p.delta2 = v,
                "omega1" => p.omega1 = v,
                "omega2" => p.omega2 = v,
                "g" => p.g = v,
                "gamma" => p.gamma = v,
                "kappa" => p.kappa = v,
                "E" => p.drive = v,
                "lambda" => p.lambda = v,
                "A_c" => p.mod_amp = v,
                "omega_c" => p.mod_freq = v,
                "n_bath" => p.n_bath = v,
                "dt" => self.dt = Some(v),
                "t_end" => self.t_end = v,
                "transient_fraction" => self.transient_fraction = v,
                _ => unreachable!("key list and match arms disagree on `{key}`"),
            }
        }
        match line {
            Some(l) => self.lines.insert(key, l),
            None => self.lines.remove(key),
        };
        Ok(())
    }

    fn invalid(&self, key: &'static str, msg: impl Into<String>) -> Error {
        Error::config(self.lines.get(key).copied(), key, msg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Err(Error::InvalidParam { name, reason }) = self.params.validate() {
            return Err(self.invalid(name, reason));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(self.invalid("dt", format!("must be > 0, got {dt}")));
            }
        }
        let dt = self.dt();
        if !(self.t_end.is_finite() && self.t_end >= dt) {
            return Err(self.invalid("t_end", format!("must be >= dt ({dt}), got {}", self.t_end)));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(self.invalid(
                "transient_fraction",
                format!("must be in [0, 1), got {}", self.transient_fraction),
            ));
        }
        if self.record_stride == 0 {
            return Err(self.invalid("record_stride", "must be >= 1"));
        }
        Ok(())
    }

    /// Integration step in effect for `self.params`.
    pub fn dt(&self) -> f64 {
        self.dt_for(&self.params)
    }

    /// Integration step for a (possibly modified) parameter set.
    pub fn dt_for(&self, params: &SystemParams) -> f64 {
        self.dt.unwrap_or_else(|| params.default_dt())
    }

    pub fn integration(&self) -> Integration {
        self.integration_for(&self.params)
    }

    pub fn integration_for(&self, params: &SystemParams) -> Integration {
        Integration {
            t_end: self.t_end,
            dt: self.dt_for(params),
            record_stride: self.record_stride,
        }
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            transient_fraction: self.transient_fraction,
            steady_tol: DEFAULT_STEADY_TOL,
        }
    }

    /// Every key with its resolved value; `dt` is resolved against `params`.
    pub fn snapshot(&self) -> BTreeMap<&'static str, f64> {
        let p = &self.params;
        let values = [
            p.delta1,
            p.delta2,
            p.omega1,
            p.omega2,
            p.g,
            p.gamma,
            p.kappa,
            p.drive,
            p.lambda,
            p.mod_amp,
            p.mod_freq,
            p.n_bath,
            self.dt(),
            self.t_end,
            self.transient_fraction,
            self.record_stride as f64,
        ];
        KEYS.into_iter().zip(values).collect()
    }

    /// Config text that parses back to this configuration. `dt` is written
    /// only when it was set explicitly.
    pub fn to_config_text(&self) -> String {
        let snap = self.snapshot();
        KEYS.iter()
            .filter_map(|k| match *k {
                "record_stride" => Some(format!("{k} = {}\n", self.record_stride)),
                "dt" => self.dt.map(|dt| format!("{k} = {dt:?}\n")),
                _ => Some(format!("{k} = {:?}\n", snap[k])),
            })
            .collect()
    }
}
