//! Synchronization measures evaluated on covariance matrices and trajectories.
//!
//! All closed forms use the fluctuation basis of [`crate::model::idx`]. The
//! φ-rotated quadratures of subsystem j are
//! `q_j^φ = q_j cos φ_j + p_j sin φ_j`, `p_j^φ = p_j cos φ_j − q_j sin φ_j`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::{idx::*, CovMatrix, MeanState, SystemParams};

/// Below this magnitude both mean quadratures count as the phase-space origin.
pub const PHASE_EPS: f64 = 1e-12;
/// Denominators at or below this are rejected as unphysical.
pub const DENOM_EPS: f64 = 1e-15;
/// Default threshold on the period-to-period residual of the mean state.
pub const DEFAULT_STEADY_TOL: f64 = 1e-3;
/// Longest orbit searched for, in modulation periods.
pub const MAX_PERIOD_MULTIPLE: usize = 8;

/// Wrap an angle into [0, 2π).
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Phase of the point (q, p) in [0, 2π), quadrant-correct.
pub fn phase_of(q: f64, p: f64) -> Result<f64> {
    if q.abs() < PHASE_EPS && p.abs() < PHASE_EPS {
        return Err(Error::DegeneratePhase { time: None });
    }
    Ok(wrap_angle(p.atan2(q)))
}

/// Circular mean arg(Σ e^{iθ}) in [0, 2π); `None` for an empty slice or a
/// resultant of zero length.
pub fn circular_mean(angles: &[f64]) -> Option<f64> {
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    if angles.is_empty() || (s == 0.0 && c == 0.0) {
        None
    } else {
        Some(wrap_angle(s.atan2(c)))
    }
}

fn invert(den: f64) -> Result<f64> {
    if den > DENOM_EPS {
        Ok(1.0 / den)
    } else {
        Err(Error::NonPositiveDenominator { value: den })
    }
}

fn local_sum(v: &CovMatrix) -> f64 {
    v.get(Q1, Q1) + v.get(P1, P1) + v.get(Q2, Q2) + v.get(P2, P2)
}

/// ⟨δq_-²⟩ + ⟨δp_-²⟩.
pub fn s_q_denominator(v: &CovMatrix) -> f64 {
    0.5 * (local_sum(v) - v.get(Q1, Q2) - v.get(Q2, Q1) - v.get(P2, P1) - v.get(P1, P2))
}

/// Pure quantum complete synchronization.
pub fn s_q(v: &CovMatrix) -> Result<f64> {
    invert(s_q_denominator(v))
}

/// ⟨δq_-^φ²⟩ + ⟨δp_-^φ²⟩ for relative phase `phi` = φ₂ − φ₁.
pub fn s_phi_denominator(v: &CovMatrix, phi: f64) -> f64 {
    let (sin, cos) = phi.sin_cos();
    0.5 * (local_sum(v) + 2.0 * v.get(P1, Q2) * sin
        - 2.0 * v.get(Q1, P2) * sin
        - 2.0 * v.get(P1, P2) * cos
        - 2.0 * v.get(Q1, Q2) * cos)
}

/// Pure quantum φ-synchronization.
pub fn s_phi(v: &CovMatrix, phi: f64) -> Result<f64> {
    invert(s_phi_denominator(v, phi))
}

/// 2⟨δp_-^φ²⟩ for subsystem phases `phi1`, `phi2`.
pub fn s_p_denominator(v: &CovMatrix, phi1: f64, phi2: f64) -> f64 {
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    v.get(Q1, Q1) * s1 * s1 + v.get(P1, P1) * c1 * c1 + v.get(Q2, Q2) * s2 * s2 + v.get(P2, P2) * c2 * c2
        - 2.0 * v.get(Q1, P1) * s1 * c1
        - 2.0 * v.get(Q1, Q2) * s1 * s2
        + 2.0 * v.get(Q1, P2) * s1 * c2
        + 2.0 * v.get(P1, Q2) * c1 * s2
        - 2.0 * v.get(P1, P2) * c1 * c2
        - 2.0 * v.get(Q2, P2) * c2 * s2
}

/// Quantum phase synchronization; not bounded by 1.
pub fn s_p(v: &CovMatrix, phi1: f64, phi2: f64) -> Result<f64> {
    invert(s_p_denominator(v, phi1, phi2))
}

/// Quantum anti-synchronization, S_q^φ at φ = π, written out so the cross
/// terms enter with exact unit weight.
pub fn s_anti(v: &CovMatrix) -> Result<f64> {
    invert(0.5 * (local_sum(v) + 2.0 * v.get(P1, P2) + 2.0 * v.get(Q1, Q2)))
}

/// Squared mean errors ⟨q_-⟩² + ⟨p_-⟩².
fn mean_error_sq(m: &MeanState) -> f64 {
    let dq = FRAC_1_SQRT_2 * (m.q1 - m.q2);
    let dp = FRAC_1_SQRT_2 * (m.p1 - m.p2);
    dq * dq + dp * dp
}

/// Complete synchronization including the classical mean error.
pub fn s_c(mean: &MeanState, v: &CovMatrix) -> Result<f64> {
    invert(mean_error_sq(mean) + s_q_denominator(v))
}

/// S_c at every aligned sample.
pub fn s_c_series(means: &[MeanState], covs: &[CovMatrix]) -> Result<Vec<f64>> {
    if means.is_empty() || means.len() != covs.len() {
        return Err(Error::EmptyWindow);
    }
    means.iter().zip(covs).map(|(m, v)| s_c(m, v)).collect()
}

/// φ-synchronization with the mean φ-errors kept, using the subsystem phases
/// `phi1`, `phi2` for the mean part and φ₂ − φ₁ for the fluctuations.
pub fn s_phi_full(mean: &MeanState, v: &CovMatrix, phi1: f64, phi2: f64) -> Result<f64> {
    let rot = |q: f64, p: f64, a: f64| {
        let (s, c) = a.sin_cos();
        (q * c + p * s, p * c - q * s)
    };
    let (q1, p1) = rot(mean.q1, mean.p1, phi1);
    let (q2, p2) = rot(mean.q2, mean.p2, phi2);
    let dq = FRAC_1_SQRT_2 * (q1 - q2);
    let dp = FRAC_1_SQRT_2 * (p1 - p2);
    invert(dq * dq + dp * dp + s_phi_denominator(v, phi2 - phi1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseInfo {
    pub phi1: f64,
    pub phi2: f64,
    /// φ₂ − φ₁ wrapped into [0, 2π).
    pub phi: f64,
}

impl PhaseInfo {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        PhaseInfo {
            phi1,
            phi2,
            phi: wrap_angle(phi2 - phi1),
        }
    }

    pub fn from_mean(m: &MeanState) -> Result<Self> {
        Ok(Self::new(phase_of(m.q1, m.p1)?, phase_of(m.q2, m.p2)?))
    }
}

/// Per-sample phases over `window` (inclusive) and their circular-mean
/// phase difference.
pub fn phase_series(traj: &Trajectory, window: (f64, f64)) -> Result<(Vec<PhaseInfo>, f64)> {
    let (lo, hi) = sample_range(traj, window)?;
    let phases = (lo..=hi)
        .map(|i| {
            PhaseInfo::from_mean(&traj.means[i]).map_err(|_| Error::DegeneratePhase {
                time: Some(traj.times[i]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let diffs: Vec<f64> = phases.iter().map(|p| p.phi).collect();
    let phi = circular_mean(&diffs).ok_or(Error::EmptyWindow)?;
    Ok((phases, phi))
}

fn sample_range(traj: &Trajectory, (t0, t1): (f64, f64)) -> Result<(usize, usize)> {
    let eps = 1e-9 * traj.sample_spacing();
    let lo = traj.times.partition_point(|&t| t < t0 - eps);
    let hi = traj.times.partition_point(|&t| t <= t1 + eps);
    if t1 < t0 || lo >= hi {
        return Err(Error::EmptyWindow);
    }
    Ok((lo, hi - 1))
}

fn lerp_at(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
    let (t0, t1) = (times[i - 1], times[i]);
    let w = (t - t0) / (t1 - t0);
    values[i - 1] + w * (values[i] - values[i - 1])
}

/// Trapezoidal mean of a sampled series over `[t0, t1]`, with linear
/// interpolation at window edges that fall between samples.
pub fn time_average(times: &[f64], values: &[f64], (t0, t1): (f64, f64)) -> Result<f64> {
    let n = times.len().min(values.len());
    if n < 2 || t0.is_nan() || t1.is_nan() || t1 <= t0 {
        return Err(Error::EmptyWindow);
    }
    let (times, values) = (&times[..n], &values[..n]);
    let span = times[n - 1] - times[0];
    let tol = 1e-9 * span.max(1.0);
    if t0 < times[0] - tol || t1 > times[n - 1] + tol {
        return Err(Error::EmptyWindow);
    }
    let (t0, t1) = (t0.max(times[0]), t1.min(times[n - 1]));

    let mut pts = vec![(t0, lerp_at(times, values, t0))];
    let inner = times.partition_point(|&t| t <= t0)..times.partition_point(|&t| t < t1);
    pts.extend(inner.map(|i| (times[i], values[i])));
    pts.push((t1, lerp_at(times, values, t1)));

    let area: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(area / (t1 - t0))
}

/// Cumulative trapezoidal mean from the first sample; the first entry is the
/// first value itself.
pub fn running_average(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut area = 0.0;
    for i in 0..values.len() {
        if i == 0 {
            out.push(values[0]);
            continue;
        }
        area += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        out.push(area / (times[i] - times[0]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyStateInfo {
    pub reached: bool,
    pub onset_time: f64,
    /// Period of the detected orbit: the smallest multiple of 2π/ω_c (up to
    /// [`MAX_PERIOD_MULTIPLE`]) over which the mean state repeats.
    pub period_used: f64,
    /// Number of modulation periods in `period_used`.
    pub period_multiple: usize,
    pub residual: f64,
}

fn l2(a: &[f64; 8]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Distance between the mean state at sample `i` and one `lag` later,
/// relative to max(1, ‖s(t_i)‖).
fn lag_residuals(traj: &Trajectory, lag: f64) -> Vec<f64> {
    let t_last = traj.t_final();
    let h = traj.sample_spacing();
    let arrays: Vec<[f64; 8]> = traj.means.iter().map(MeanState::to_array).collect();
    let mut out = Vec::new();
    for (i, &t) in traj.times.iter().enumerate() {
        let target = t + lag;
        if target > t_last + 1e-9 * h {
            break;
        }
        let pos = (target - traj.times[0]) / h;
        let j = (pos.floor() as usize).min(arrays.len() - 1);
        let w = (pos - j as f64).clamp(0.0, 1.0);
        let later: [f64; 8] = if w < 1e-9 || j + 1 >= arrays.len() {
            arrays[j]
        } else {
            std::array::from_fn(|k| arrays[j][k] + w * (arrays[j + 1][k] - arrays[j][k]))
        };
        let diff: [f64; 8] = std::array::from_fn(|k| later[k] - arrays[i][k]);
        out.push(l2(&diff) / l2(&arrays[i]).max(1.0));
    }
    out
}

/// Locate the onset of a periodic orbit of the mean state.
pub fn detect_steady_state(traj: &Trajectory, params: &SystemParams, steady_tol: f64) -> Result<SteadyStateInfo> {
    let t_mod = params.mod_period();
    let span = traj.t_final() - traj.times.first().copied().unwrap_or(0.0);
    if traj.len() < 2 || span < 10.0 * t_mod * (1.0 - 1e-9) {
        return Err(Error::TooShort {
            needed: 10.0 * t_mod,
            available: span,
        });
    }

    let mut best: Option<SteadyStateInfo> = None;
    for k in 1..=MAX_PERIOD_MULTIPLE {
        let lag = k as f64 * t_mod;
        // Needs the final two periods' comparisons plus one more period.
        if 3.0 * lag > span + 1e-9 {
            break;
        }
        let r = lag_residuals(traj, lag);
        let from = traj.index_at(traj.t_final() - 3.0 * lag).min(r.len() - 1);
        let residual = r[from..].iter().copied().fold(0.0, f64::max);
        let reached = residual < steady_tol;
        let onset_time = if reached {
            let tail = r.iter().rposition(|&x| x >= steady_tol).map_or(0, |i| i + 1);
            traj.times[tail]
        } else {
            traj.t_final()
        };
        let info = SteadyStateInfo {
            reached,
            onset_time,
            period_used: lag,
            period_multiple: k,
            residual,
        };
        if reached {
            return Ok(info);
        }
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(info);
        }
    }
    best.ok_or(Error::TooShort {
        needed: 3.0 * t_mod,
        available: span,
    })
}

/// Controls for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Leading fraction of the run excluded from steady-window averages.
    pub transient_fraction: f64,
    pub steady_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            transient_fraction: 0.6,
            steady_tol: DEFAULT_STEADY_TOL,
        }
    }
}

/// Steady averaging window: drop the transient fraction, then keep the
/// largest whole number of `period`s that ends at the final sample.
pub fn averaging_window(traj: &Trajectory, period: f64, transient_fraction: f64) -> Result<(f64, f64)> {
    let t_end = traj.t_final();
    let t0 = traj.times.first().copied().unwrap_or(0.0);
    let available = t_end - (t0 + transient_fraction * (t_end - t0));
    let whole = (available / period + 1e-9).floor();
    if whole < 1.0 {
        return Err(Error::TooShort {
            needed: period,
            available,
        });
    }
    Ok((t_end - whole * period, t_end))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub s_q: Vec<f64>,
    pub s_phi: Vec<f64>,
    pub s_p: Vec<f64>,
    pub s_anti: Vec<f64>,
    pub s_c: Vec<f64>,
    /// Per-sample phases; samples at the phase-space origin report 0.
    pub phase: Vec<PhaseInfo>,
    pub avg_s_q: Vec<f64>,
    pub avg_s_phi: Vec<f64>,
    pub avg_s_p: Vec<f64>,
    pub avg_s_anti: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub s_q: f64,
    pub s_phi: f64,
    pub s_p: f64,
    pub s_anti: f64,
    pub s_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub steady: SteadyStateInfo,
    /// Summary phase difference over the steady window; also the φ used for
    /// every sample of `series.s_phi`.
    pub phi: f64,
    pub window: (f64, f64),
    pub averages: Averages,
    #[serde(skip)]
    pub series: MeasureSeries,
}

/// Evaluate every measure along a trajectory.
pub fn analyze(traj: &Trajectory, opts: &AnalysisOptions) -> Result<Analysis> {
    let params = &traj.params;
    let steady = detect_steady_state(traj, params, opts.steady_tol)?;
    let period = if steady.reached {
        steady.period_used
    } else {
        params.mod_period()
    };
    let window = averaging_window(traj, period, opts.transient_fraction)?;
    let (_, phi) = phase_series(traj, window)?;

    let n = traj.len();
    let mut series = MeasureSeries {
        times: traj.times.clone(),
        ..Default::default()
    };
    for i in 0..n {
        let (m, v) = (&traj.means[i], &traj.covs[i]);
        let ph = PhaseInfo::from_mean(m).unwrap_or(PhaseInfo::new(0.0, 0.0));
        series.s_q.push(s_q(v)?);
        series.s_phi.push(s_phi(v, phi)?);
        series.s_p.push(s_p(v, ph.phi1, ph.phi2)?);
        series.s_anti.push(s_anti(v)?);
        series.s_c.push(s_c(m, v)?);
        series.phase.push(ph);
    }
    series.avg_s_q = running_average(&series.times, &series.s_q);
    series.avg_s_phi = running_average(&series.times, &series.s_phi);
    series.avg_s_p = running_average(&series.times, &series.s_p);
    series.avg_s_anti = running_average(&series.times, &series.s_anti);

    let avg = |v: &[f64]| time_average(&series.times, v, window);
    let averages = Averages {
        s_q: avg(&series.s_q)?,
        s_phi: avg(&series.s_phi)?,
        s_p: avg(&series.s_p)?,
        s_anti: avg(&series.s_anti)?,
        s_c: avg(&series.s_c)?,
    };
    Ok(Analysis {
        steady,
        phi,
        window,
        averages,
        series,
    })
}
