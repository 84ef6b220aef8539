//! CSV and JSON artifacts.
//!
//! Floats are written in shortest round-trip form (`{:?}`), so parsing a
//! field recovers the in-memory value exactly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::measures::{Analysis, Averages, MeasureSeries, SteadyStateInfo};
use crate::model::{CovMatrix, Matrix8, MeanState, DIM};
use crate::sweep::SweepRow;

pub const MEAN_COLUMNS: [&str; DIM] = ["q1", "p1", "re_a1", "im_a1", "q2", "p2", "re_a2", "im_a2"];

pub const MEASURE_COLUMNS: [&str; 13] = [
    "t",
    "s_q",
    "s_phi",
    "s_p",
    "s_anti",
    "s_c",
    "phi1",
    "phi2",
    "phi",
    "avg_s_q",
    "avg_s_phi",
    "avg_s_p",
    "avg_s_anti",
];

pub const SWEEP_COLUMNS: [&str; 11] = [
    "param_name",
    "param_value",
    "avg_s_q",
    "avg_s_phi",
    "avg_s_p",
    "avg_s_anti",
    "avg_s_c",
    "phi",
    "steady_reached",
    "max_real_eig",
    "status",
];

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `t`, the eight mean components, then `v{i}{j}` for 1 <= i <= j <= 8.
pub fn trajectory_header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(MEAN_COLUMNS.iter().map(|s| s.to_string()));
    for i in 1..=DIM {
        for j in i..=DIM {
            h.push(format!("v{i}{j}"));
        }
    }
    h
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trajectory_header())?;
    let mut rec = Vec::with_capacity(1 + DIM + 36);
    for ((t, m), v) in traj.times.iter().zip(&traj.means).zip(&traj.covs) {
        rec.clear();
        rec.push(num(*t));
        rec.extend(m.to_array().into_iter().map(num));
        rec.extend(v.upper_triangle().map(num));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of `trajectory.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub mean: MeanState,
    pub cov: CovMatrix,
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectorySample>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| crate::error::Error::ConfigParse {
                    line: rec.position().map(|p| p.line() as usize),
                    key: None,
                    msg: format!("bad number `{f}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let mut cov = Matrix8::zeros();
        let mut k = 1 + DIM;
        for i in 0..DIM {
            for j in i..DIM {
                cov[(i, j)] = vals[k];
                cov[(j, i)] = vals[k];
                k += 1;
            }
        }
        out.push(TrajectorySample {
            t: vals[0],
            mean: MeanState::from_array(std::array::from_fn(|i| vals[1 + i])),
            cov: CovMatrix(cov),
        });
    }
    Ok(out)
}

pub fn write_measures_csv(path: &Path, s: &MeasureSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MEASURE_COLUMNS)?;
    for i in 0..s.times.len() {
        let ph = s.phase[i];
        let row = [
            s.times[i],
            s.s_q[i],
            s.s_phi[i],
            s.s_p[i],
            s.s_anti[i],
            s.s_c[i],
            ph.phi1,
            ph.phi2,
            ph.phi,
            s.avg_s_q[i],
            s.avg_s_phi[i],
            s.avg_s_p[i],
            s.avg_s_anti[i],
        ];
        w.write_record(row.iter().map(|x| num(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.param_name.to_string(),
            num(r.param_value),
            num(r.avg_s_q),
            num(r.avg_s_phi),
            num(r.avg_s_p),
            num(r.avg_s_anti),
            num(r.avg_s_c),
            num(r.phi),
            r.steady_reached.to_string(),
            num(r.max_real_eig),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of `steady.json`.
#[derive(Debug, Clone, Serialize)]
pub struct SteadySummary {
    pub steady: SteadyStateInfo,
    pub phi: f64,
    pub phi_over_pi: f64,
    pub window: (f64, f64),
    pub averages: Averages,
    pub max_real_eig: f64,
    pub all_negative: bool,
}

impl SteadySummary {
    pub fn new(a: &Analysis, max_real_eig: f64, all_negative: bool) -> Self {
        SteadySummary {
            steady: a.steady,
            phi: a.phi,
            phi_over_pi: a.phi / std::f64::consts::PI,
            window: a.window,
            averages: a.averages,
            max_real_eig,
            all_negative,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Provenance record written next to every set of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: String,
    /// Every config key with its resolved value.
    pub config: BTreeMap<&'static str, f64>,
    /// The same configuration as parseable config text.
    pub config_text: String,
    /// Additional inputs (recipe, sweep grid, worker count).
    #[serde(flatten)]
    pub extra: BTreeMap<&'static str, serde_json::Value>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
