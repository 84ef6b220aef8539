//! Lockstep RK4 integration of the mean-field equations and the covariance
//! (Lyapunov) equation, plus eigenvalue-based stability diagnostics.

use nalgebra::linalg::Schur;
use nalgebra::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{drift_matrix, idx, noise_matrix, CovMatrix, Matrix8, MeanState, SystemParams, Vector8, DIM};

type State = [f64; DIM];

/// Time derivative of the mean state.
pub fn mean_rhs(params: &SystemParams, s: &MeanState, t: f64) -> MeanState {
    MeanState::from_array(mean_rhs_array(params, &s.to_array(), t))
}

fn mean_rhs_array(p: &SystemParams, s: &State, t: f64) -> State {
    let mut d = [0.0; DIM];
    let a = [(s[idx::X1], s[idx::Y1]), (s[idx::X2], s[idx::Y2])];
    for j in 0..2 {
        let off = 4 * j;
        let omega = if j == 0 { p.omega1 } else { p.omega2 };
        let (q, mom) = (s[off], s[off + 1]);
        let (re, im) = a[j];
        let (re_other, im_other) = a[1 - j];
        let det = p.modulated_detuning(j + 1, t);

        d[off] = omega * mom;
        d[off + 1] = -omega * q - p.gamma * mom + p.g * (re * re + im * im);
        // ȧ = −(κ − iΔ(t)) a + i g q a + E − iλ a'
        let rot = det + p.g * q;
        d[off + 2] = -p.kappa * re - rot * im + p.drive + p.lambda * im_other;
        d[off + 3] = -p.kappa * im + rot * re - p.lambda * re_other;
    }
    d
}

/// Right-hand side of the covariance equation: M V + V Mᵀ + N.
pub fn cov_rhs(m: &Matrix8, v: &Matrix8, n: &Matrix8) -> Matrix8 {
    let mv = m * v;
    mv + mv.transpose() + n
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub means: Vec<MeanState>,
    #[serde(skip)]
    pub covs: Vec<CovMatrix>,
    pub params: SystemParams,
    pub dt: f64,
    pub record_stride: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing between recorded samples.
    pub fn sample_spacing(&self) -> f64 {
        self.dt * self.record_stride as f64
    }

    pub fn t_final(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Index of the first sample with time >= `t` (clamped to the last sample).
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t).min(self.len().saturating_sub(1))
    }
}

/// Integration controls for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub t_end: f64,
    pub dt: f64,
    pub record_stride: usize,
}

impl Integration {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParam { name, reason });
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", format!("must be > 0, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return bad("t_end", format!("must be >= dt, got {}", self.t_end));
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be >= 1".into());
        }
        Ok(())
    }

    /// Number of RK4 steps: the smallest multiple of `record_stride` covering
    /// `t_end`, so the final step is always a recorded sample.
    pub fn n_steps(&self) -> usize {
        let raw = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        raw.div_ceil(self.record_stride) * self.record_stride
    }
}

/// Integrate from the zero mean state and covariance `v0`.
pub fn simulate(params: &SystemParams, v0: &CovMatrix, ctl: Integration) -> Result<Trajectory> {
    params.validate()?;
    ctl.validate()?;

    let n_steps = ctl.n_steps();
    let n_rec = n_steps / ctl.record_stride + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_rec),
        means: Vec::with_capacity(n_rec),
        covs: Vec::with_capacity(n_rec),
        params: *params,
        dt: ctl.dt,
        record_stride: ctl.record_stride,
    };

    let noise = noise_matrix(params);
    let mut mean: State = [0.0; DIM];
    let mut cov = v0.0;
    traj.times.push(0.0);
    traj.means.push(MeanState::from_array(mean));
    traj.covs.push(CovMatrix(cov));

    let dt = ctl.dt;
    for step in 1..=n_steps {
        let t = (step - 1) as f64 * dt;
        rk4_step(params, &noise, &mut mean, &mut cov, t, dt);
        cov = (cov + cov.transpose()) * 0.5;

        let t_new = step as f64 * dt;
        if !(mean.iter().all(|v| v.is_finite()) && cov.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite { time: t_new });
        }
        if step % ctl.record_stride == 0 {
            traj.times.push(t_new);
            traj.means.push(MeanState::from_array(mean));
            traj.covs.push(CovMatrix(cov));
        }
    }
    Ok(traj)
}

fn rk4_step(p: &SystemParams, noise: &Matrix8, mean: &mut State, cov: &mut Matrix8, t: f64, dt: f64) {
    let stage = |s: &State, v: &Matrix8, ts: f64| -> (State, Matrix8) {
        let m = drift_matrix(p, &MeanState::from_array(*s), ts);
        (mean_rhs_array(p, s, ts), cov_rhs(&m, v, noise))
    };
    let shift = |s: &State, k: &State, h: f64| -> State { std::array::from_fn(|i| s[i] + h * k[i]) };

    let half = 0.5 * dt;
    let (k1, l1) = stage(mean, cov, t);
    let (k2, l2) = stage(&shift(mean, &k1, half), &(*cov + l1 * half), t + half);
    let (k3, l3) = stage(&shift(mean, &k2, half), &(*cov + l2 * half), t + half);
    let (k4, l4) = stage(&shift(mean, &k3, dt), &(*cov + l3 * dt), t + dt);

    let w = dt / 6.0;
    for i in 0..DIM {
        mean[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    *cov += (l1 + (l2 + l3) * 2.0 + l4) * w;
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub sample_times: Vec<f64>,
    pub max_real_eig: Vec<f64>,
    pub all_negative: bool,
}

/// Largest real part among the eigenvalues of `m`. Real parts within
/// round-off of zero (relative to ‖m‖) are reported as exactly 0; NaN if the
/// Schur iteration does not converge.
pub fn max_real_eigenvalue(m: &Matrix8) -> f64 {
    // Schur iteration can stall on exactly lossless generators; a fixed
    // orthogonal similarity breaks their zero pattern without moving the spectrum.
    let Some(schur) = Schur::try_new(*m, f64::EPSILON, 20_000).or_else(|| {
        let h = reflector();
        Schur::try_new(h * m * h, f64::EPSILON, 20_000)
    }) else {
        return f64::NAN;
    };
    let eigs: nalgebra::SVector<Complex<f64>, DIM> = schur.complex_eigenvalues();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let max = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max.abs() <= 1e-12 * scale {
        0.0
    } else {
        max
    }
}

fn reflector() -> Matrix8 {
    let v = Vector8::from_fn(|i, _| 0.37 + 0.11 * i as f64 + 0.05 * ((i * i) as f64).sin()).normalize();
    Matrix8::identity() - v * v.transpose() * 2.0
}

/// Evaluate M(t) at up to `n_samples` recorded times spread evenly over the
/// final modulation period of `traj`.
pub fn stability_scan(params: &SystemParams, traj: &Trajectory, n_samples: usize) -> StabilityReport {
    let n_samples = n_samples.max(1);
    let last = traj.len().saturating_sub(1);
    let first = traj.index_at(traj.t_final() - params.mod_period());
    let available = last - first + 1;
    let picks: Vec<usize> = if n_samples >= available {
        (first..=last).collect()
    } else if n_samples == 1 {
        vec![last]
    } else {
        (0..n_samples)
            .map(|k| first + (k * (available - 1)) / (n_samples - 1))
            .collect()
    };

    let mut report = StabilityReport {
        sample_times: Vec::with_capacity(picks.len()),
        max_real_eig: Vec::with_capacity(picks.len()),
        all_negative: true,
    };
    for i in picks {
        let t = traj.times[i];
        let re = max_real_eigenvalue(&drift_matrix(params, &traj.means[i], t));
        report.all_negative &= re < 0.0;
        report.sample_times.push(t);
        report.max_real_eig.push(re);
    }
    report
}
