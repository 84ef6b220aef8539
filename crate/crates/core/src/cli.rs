//! Subcommand implementations behind the `optosync` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::RunConfig;
use crate::dynamics::{simulate, stability_scan, StabilityReport};
use crate::error::{Error, Result};
use crate::model::CovMatrix;
use crate::output::{
    now_rfc3339, write_json, write_measures_csv, write_sweep_csv, write_trajectory_csv, RunManifest, SteadySummary,
};
use crate::sweep::{figure_recipe, linspace, run_sweep, summarize, SweepParam, SweepRow, SweepSpec};

pub const TOOL: &str = "optosync";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolve a configuration: file (or defaults), then `--set` overrides in order.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    for o in overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn manifest(cfg: &RunConfig, command_line: &str, started: String, outputs: Vec<String>) -> RunManifest {
    RunManifest {
        tool: TOOL,
        version: VERSION,
        command_line: command_line.to_string(),
        config: cfg.snapshot(),
        config_text: cfg.to_config_text(),
        extra: BTreeMap::new(),
        started,
        finished: now_rfc3339(),
        outputs,
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub summary: SteadySummary,
    pub outputs: Vec<PathBuf>,
}

/// `simulate`: trajectory.csv, measures.csv, steady.json, manifest.json.
pub fn cmd_simulate(
    config: Option<&Path>,
    overrides: &[String],
    out_dir: &Path,
    command_line: &str,
) -> Result<SimulateOutcome> {
    let started = now_rfc3339();
    let cfg = load_config(config, overrides)?;
    std::fs::create_dir_all(out_dir)?;

    let traj = simulate(&cfg.params, &CovMatrix::vacuum(), cfg.integration())?;
    let point = summarize(&traj, &cfg.analysis_options())?;
    let summary = SteadySummary::new(&point.analysis, point.max_real_eig, point.all_negative);

    let names = ["trajectory.csv", "measures.csv", "steady.json"];
    write_trajectory_csv(&out_dir.join(names[0]), &traj)?;
    write_measures_csv(&out_dir.join(names[1]), &point.analysis.series)?;
    write_json(&out_dir.join(names[2]), &summary)?;

    let m = manifest(
        &cfg,
        command_line,
        started,
        names.iter().map(|s| s.to_string()).collect(),
    );
    write_json(&out_dir.join("manifest.json"), &m)?;

    let mut outputs: Vec<PathBuf> = names.iter().map(|n| out_dir.join(n)).collect();
    outputs.push(out_dir.join("manifest.json"));
    Ok(SimulateOutcome { summary, outputs })
}

/// How the sweep grid is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepRequest {
    Recipe(String),
    Range {
        param: String,
        from: f64,
        to: f64,
        steps: usize,
    },
}

/// `sweep`: sweep.csv and manifest.json.
pub fn cmd_sweep(
    config: Option<&Path>,
    overrides: &[String],
    request: &SweepRequest,
    jobs: usize,
    out_dir: &Path,
    command_line: &str,
) -> Result<Vec<SweepRow>> {
    let started = now_rfc3339();
    let cfg = load_config(config, overrides)?;
    let (spec, label): (SweepSpec, serde_json::Value) = match request {
        SweepRequest::Recipe(name) => {
            let recipe = figure_recipe(name)?;
            (recipe.sweep_spec(&cfg), json!({ "recipe": recipe.name }))
        }
        SweepRequest::Range { param, from, to, steps } => {
            let param: SweepParam = param.parse()?;
            if *steps == 0 {
                return Err(Error::ConfigParse {
                    line: None,
                    key: Some("steps".into()),
                    msg: "must be >= 1".into(),
                });
            }
            let values = linspace(*from, *to, *steps);
            (
                SweepSpec::from_config(&cfg, param, values),
                json!({ "param": param.name(), "from": from, "to": to, "steps": steps }),
            )
        }
    };
    std::fs::create_dir_all(out_dir)?;
    let rows = run_sweep(&spec, jobs)?;
    write_sweep_csv(&out_dir.join("sweep.csv"), &rows)?;

    // Snapshot the base the sweep actually ran from (recipe overrides applied).
    let mut base_cfg = cfg.clone();
    base_cfg.params = spec.base;
    let mut m = manifest(&base_cfg, command_line, started, vec!["sweep.csv".into()]);
    m.extra.insert("sweep", label);
    m.extra.insert("values", json!(spec.values));
    m.extra.insert("dt_per_point", json!(cfg.dt.is_none()));
    m.extra.insert("jobs", json!(jobs));
    write_json(&out_dir.join("manifest.json"), &m)?;
    Ok(rows)
}

/// `stability`: eigenvalue scan over the final modulation period.
pub fn cmd_stability(config: Option<&Path>, overrides: &[String], samples: usize) -> Result<StabilityReport> {
    let cfg = load_config(config, overrides)?;
    let traj = simulate(&cfg.params, &CovMatrix::vacuum(), cfg.integration())?;
    Ok(stability_scan(&cfg.params, &traj, samples))
}
