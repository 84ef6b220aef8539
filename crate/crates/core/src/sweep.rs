//! One-parameter sweeps and the parameter sets of each reproduced figure.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{simulate, stability_scan, Integration, Trajectory};
use crate::error::{Error, Result};
use crate::measures::{analyze, Analysis, AnalysisOptions, DEFAULT_STEADY_TOL};
use crate::model::{default_params, CovMatrix, SystemParams};

/// Every run must cover at least this many modulation periods.
pub const MIN_PERIODS: f64 = 50.0;
/// Drift-matrix samples per stability scan.
pub const STABILITY_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "A_c")]
    ModAmp,
    #[serde(rename = "omega_c")]
    ModFreq,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::ModAmp => "A_c",
            SweepParam::ModFreq => "omega_c",
        }
    }

    pub fn apply(self, params: &mut SystemParams, value: f64) {
        match self {
            SweepParam::Lambda => params.lambda = value,
            SweepParam::ModAmp => params.mod_amp = value,
            SweepParam::ModFreq => params.mod_freq = value,
        }
    }

    pub fn get(self, params: &SystemParams) -> f64 {
        match self {
            SweepParam::Lambda => params.lambda,
            SweepParam::ModAmp => params.mod_amp,
            SweepParam::ModFreq => params.mod_freq,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepParam::Lambda),
            "A_c" => Ok(SweepParam::ModAmp),
            "omega_c" => Ok(SweepParam::ModFreq),
            other => Err(Error::ConfigParse {
                line: None,
                key: Some(other.to_string()),
                msg: "sweep parameter must be one of lambda, A_c, omega_c".into(),
            }),
        }
    }
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n)
            .map(|i| {
                if i == n - 1 {
                    to
                } else {
                    from + (to - from) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub t_end: f64,
    /// `None` derives the step per point from its own parameters.
    pub dt: Option<f64>,
    pub record_stride: usize,
    pub transient_fraction: f64,
    pub steady_tol: f64,
}

impl SweepSpec {
    /// Sweep over `values` with numerics and base parameters from `cfg`.
    pub fn from_config(cfg: &RunConfig, param: SweepParam, values: Vec<f64>) -> Self {
        SweepSpec {
            base: cfg.params,
            param,
            values,
            t_end: cfg.t_end,
            dt: cfg.dt,
            record_stride: cfg.record_stride,
            transient_fraction: cfg.transient_fraction,
            steady_tol: DEFAULT_STEADY_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParam { name: "values", reason });
        if self.values.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return bad(format!("non-finite value {v}"));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return bad("values must be strictly increasing".into());
        }
        self.base.validate()?;
        Integration {
            t_end: self.t_end,
            dt: self.dt.unwrap_or(self.base.default_dt()),
            record_stride: self.record_stride,
        }
        .validate()
    }

    pub fn params_at(&self, value: f64) -> SystemParams {
        let mut p = self.base;
        self.param.apply(&mut p, value);
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed { code: &'static str, message: String },
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Failed { code, .. } => f.write_str(code),
        }
    }
}

/// Steady-window summary of one parameter point. Numeric fields are NaN on
/// failed rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param_name: &'static str,
    pub param_value: f64,
    pub avg_s_q: f64,
    pub avg_s_phi: f64,
    pub avg_s_p: f64,
    pub avg_s_anti: f64,
    pub avg_s_c: f64,
    pub phi: f64,
    pub steady_reached: bool,
    pub max_real_eig: f64,
    pub status: RowStatus,
}

impl SweepRow {
    fn failed(param: SweepParam, value: f64, err: &Error) -> Self {
        SweepRow {
            param_name: param.name(),
            param_value: value,
            avg_s_q: f64::NAN,
            avg_s_phi: f64::NAN,
            avg_s_p: f64::NAN,
            avg_s_anti: f64::NAN,
            avg_s_c: f64::NAN,
            phi: f64::NAN,
            steady_reached: false,
            max_real_eig: f64::NAN,
            status: RowStatus::Failed {
                code: err.code(),
                message: err.to_string(),
            },
        }
    }
}

/// Full single-point result: the analysis plus the worst stability sample.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub params: SystemParams,
    pub analysis: Analysis,
    pub max_real_eig: f64,
    pub all_negative: bool,
}

/// Simulate and analyze one parameter set from the vacuum initial state.
pub fn run_point(params: &SystemParams, ctl: Integration, opts: &AnalysisOptions) -> Result<PointResult> {
    params.validate()?;
    let needed = MIN_PERIODS * params.mod_period();
    if ctl.t_end < needed {
        return Err(Error::TooShort {
            needed,
            available: ctl.t_end,
        });
    }
    let traj = simulate(params, &CovMatrix::vacuum(), ctl)?;
    summarize(&traj, opts)
}

/// Measures, steady state and stability of an existing trajectory.
pub fn summarize(traj: &Trajectory, opts: &AnalysisOptions) -> Result<PointResult> {
    let params = &traj.params;
    let analysis = analyze(traj, opts)?;
    let report = stability_scan(params, traj, STABILITY_SAMPLES);
    let max_real_eig = report.max_real_eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PointResult {
        params: *params,
        analysis,
        max_real_eig,
        all_negative: report.all_negative,
    })
}

fn row_from(param: SweepParam, value: f64, r: &PointResult) -> SweepRow {
    let a = &r.analysis.averages;
    SweepRow {
        param_name: param.name(),
        param_value: value,
        avg_s_q: a.s_q,
        avg_s_phi: a.s_phi,
        avg_s_p: a.s_p,
        avg_s_anti: a.s_anti,
        avg_s_c: a.s_c,
        phi: r.analysis.phi,
        steady_reached: r.analysis.steady.reached,
        max_real_eig: r.max_real_eig,
        status: RowStatus::Ok,
    }
}

impl SweepSpec {
    fn row(&self, value: f64) -> SweepRow {
        let params = self.params_at(value);
        let ctl = Integration {
            t_end: self.t_end,
            dt: self.dt.unwrap_or_else(|| params.default_dt()),
            record_stride: self.record_stride,
        };
        let opts = AnalysisOptions {
            transient_fraction: self.transient_fraction,
            steady_tol: self.steady_tol,
        };
        match run_point(&params, ctl, &opts) {
            Ok(r) => row_from(self.param, value, &r),
            Err(e) => SweepRow::failed(self.param, value, &e),
        }
    }
}

/// Run every point of `spec` on a pool of `jobs` workers (0 = available
/// parallelism). Rows come back in value order; per-point failures are
/// reported in the row instead of aborting the sweep.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParam {
            name: "jobs",
            reason: e.to_string(),
        })?;
    Ok(pool.install(|| spec.values.par_iter().map(|&v| spec.row(v)).collect()))
}

/// A reproduced figure: fixed overrides on the baseline, plus an optional sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRecipe {
    pub name: &'static str,
    pub overrides: Vec<(SweepParam, f64)>,
    pub sweep: Option<(SweepParam, Vec<f64>)>,
}

pub const RECIPES: [&str; 7] = ["fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6"];

/// Grid sizes for the swept figures.
pub const FIG4_POINTS: usize = 30;
pub const FIG6_POINTS: usize = 25;

pub fn figure_recipe(name: &str) -> Result<FigureRecipe> {
    use SweepParam::*;
    let fixed = |l: f64, a: f64, w: f64| vec![(Lambda, l), (ModAmp, a), (ModFreq, w)];
    let (name, overrides, sweep) = match name {
        "fig2" => ("fig2", fixed(0.03, 2.0, 3.0), None),
        "fig3" => ("fig3", fixed(0.14, 1.0, 2.0), None),
        "fig4a" => (
            "fig4a",
            vec![(ModAmp, 2.0), (ModFreq, 3.0)],
            Some((Lambda, linspace(0.005, 0.15, FIG4_POINTS))),
        ),
        "fig4b" => (
            "fig4b",
            vec![(Lambda, 0.03), (ModFreq, 3.0)],
            Some((ModAmp, linspace(0.0, 3.0, FIG4_POINTS))),
        ),
        "fig5a" => ("fig5a", fixed(0.3, 1.5, 2.0), None),
        "fig5b" => ("fig5b", fixed(0.2, 1.0, 2.0), None),
        "fig6" => (
            "fig6",
            vec![(Lambda, 0.14), (ModAmp, 1.0)],
            Some((ModFreq, linspace(1.5, 4.0, FIG6_POINTS))),
        ),
        other => return Err(Error::UnknownRecipe(other.to_string())),
    };
    Ok(FigureRecipe { name, overrides, sweep })
}

impl FigureRecipe {
    /// `base` with this figure's fixed parameters substituted.
    pub fn params(&self, base: &SystemParams) -> SystemParams {
        let mut p = *base;
        for &(param, v) in &self.overrides {
            param.apply(&mut p, v);
        }
        p
    }

    /// The baseline-derived parameter set.
    pub fn default_params(&self) -> SystemParams {
        self.params(&default_params())
    }

    /// Sweep over this figure's grid, or a one-point λ "sweep" for fixed
    /// figures, with numerics from `cfg`.
    pub fn sweep_spec(&self, cfg: &RunConfig) -> SweepSpec {
        let base = self.params(&cfg.params);
        let (param, values) = match &self.sweep {
            Some((param, values)) => (*param, values.clone()),
            None => (SweepParam::Lambda, vec![base.lambda]),
        };
        SweepSpec {
            base,
            ..SweepSpec::from_config(cfg, param, values)
        }
    }
}
