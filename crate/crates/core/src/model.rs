//! Physical parameters and the linearized fluctuation generator of two
//! fiber-coupled optomechanical cavities with periodically modulated detuning.
//!
//! Units: ħ = k_B = 1 and every rate is measured in units of the first
//! cavity's detuning (Δ₁ = 1). Quadratures follow the convention in which a
//! vacuum (or ground) state has variance ½ per quadrature.
//!
//! Fluctuation basis, in index order:
//! `(δq₁, δp₁, δx₁, δy₁, δq₂, δp₂, δx₂, δy₂)`.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension of the fluctuation phase space (two mechanical + two optical modes).
pub const DIM: usize = 8;

pub type Matrix8 = SMatrix<f64, DIM, DIM>;
pub type Vector8 = SVector<f64, DIM>;

/// Index of each quadrature in the fluctuation vector and in [`MeanState`]'s array form.
pub mod idx {
    pub const Q1: usize = 0;
    pub const P1: usize = 1;
    pub const X1: usize = 2;
    pub const Y1: usize = 3;
    pub const Q2: usize = 4;
    pub const P2: usize = 5;
    pub const X2: usize = 6;
    pub const Y2: usize = 7;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Optical detuning Δ₁.
    pub delta1: f64,
    /// Optical detuning Δ₂.
    pub delta2: f64,
    /// Mechanical frequency ω₁.
    pub omega1: f64,
    /// Mechanical frequency ω₂.
    pub omega2: f64,
    /// Single-photon optomechanical coupling.
    pub g: f64,
    /// Mechanical damping rate.
    pub gamma: f64,
    /// Cavity loss rate.
    pub kappa: f64,
    /// Coherent drive amplitude E.
    #[serde(rename = "E")]
    pub drive: f64,
    /// Fiber (photon hopping) coupling between the two cavities.
    pub lambda: f64,
    /// Detuning modulation depth A_c.
    #[serde(rename = "A_c")]
    pub mod_amp: f64,
    /// Detuning modulation frequency ω_c.
    #[serde(rename = "omega_c")]
    pub mod_freq: f64,
    /// Mean thermal occupation of both mechanical baths.
    pub n_bath: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        default_params()
    }
}

/// Baseline parameter set: the in-phase synchronization regime.
pub fn default_params() -> SystemParams {
    SystemParams {
        delta1: 1.0,
        delta2: 1.005,
        omega1: 1.0,
        omega2: 1.005,
        g: 0.005,
        gamma: 0.005,
        kappa: 0.15,
        drive: 100.0,
        lambda: 0.03,
        mod_amp: 2.0,
        mod_freq: 3.0,
        n_bath: 0.0,
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite, got {v}"),
                })
            }
        }
        fn positive(name: &'static str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: format!("must be > 0, got {v}"),
                })
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: format!("must be >= 0, got {v}"),
                })
            }
        }

        finite("delta1", self.delta1)?;
        finite("delta2", self.delta2)?;
        positive("omega1", self.omega1)?;
        positive("omega2", self.omega2)?;
        finite("g", self.g)?;
        // Lossless configurations are admitted so marginal stability can be probed.
        non_negative("gamma", self.gamma)?;
        non_negative("kappa", self.kappa)?;
        non_negative("E", self.drive)?;
        finite("lambda", self.lambda)?;
        non_negative("A_c", self.mod_amp)?;
        positive("omega_c", self.mod_freq)?;
        non_negative("n_bath", self.n_bath)?;
        Ok(())
    }

    /// One period of the detuning modulation, 2π/ω_c.
    pub fn mod_period(&self) -> f64 {
        std::f64::consts::TAU / self.mod_freq
    }

    /// Largest angular frequency present in the model.
    pub fn max_frequency(&self) -> f64 {
        [
            self.mod_freq,
            self.omega1,
            self.omega2,
            self.delta1.abs(),
            self.delta2.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Default step: 500 steps per period of the fastest frequency.
    pub fn default_dt(&self) -> f64 {
        std::f64::consts::TAU / (500.0 * self.max_frequency())
    }

    /// Modulated detuning Δ_j[1 + A_c cos(ω_c t)] of cavity `j` (1 or 2).
    #[inline]
    pub fn modulated_detuning(&self, j: usize, t: f64) -> f64 {
        let delta = if j == 1 { self.delta1 } else { self.delta2 };
        delta * (1.0 + self.mod_amp * (self.mod_freq * t).cos())
    }
}

/// Mean values of the mechanical quadratures and intracavity fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanState {
    pub q1: f64,
    pub p1: f64,
    pub re_a1: f64,
    pub im_a1: f64,
    pub q2: f64,
    pub p2: f64,
    pub re_a2: f64,
    pub im_a2: f64,
}

impl MeanState {
    pub fn from_array(a: [f64; DIM]) -> Self {
        MeanState {
            q1: a[0],
            p1: a[1],
            re_a1: a[2],
            im_a1: a[3],
            q2: a[4],
            p2: a[5],
            re_a2: a[6],
            im_a2: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; DIM] {
        [
            self.q1, self.p1, self.re_a1, self.im_a1, self.q2, self.p2, self.re_a2, self.im_a2,
        ]
    }

    /// `(⟨q_j⟩, ⟨p_j⟩)` of subsystem `j` (1 or 2).
    pub fn mechanics(&self, j: usize) -> (f64, f64) {
        if j == 1 {
            (self.q1, self.p1)
        } else {
            (self.q2, self.p2)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Symmetrized second moments V_ij = ½⟨u_i u_j + u_j u_i⟩ of the fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix(pub Matrix8);

impl CovMatrix {
    /// Vacuum cavity fields and ground-state mechanics: ½·I.
    pub fn vacuum() -> Self {
        CovMatrix(Matrix8::identity() * 0.5)
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn symmetrize(&mut self) {
        self.0 = (self.0 + self.0.transpose()) * 0.5;
    }

    /// Largest |V_ij − V_ji|.
    pub fn asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).amax()
    }

    /// The 36 entries with `i <= j`, row-major.
    pub fn upper_triangle(&self) -> impl Iterator<Item = f64> + '_ {
        (0..DIM).flat_map(move |i| (i..DIM).map(move |j| self.0[(i, j)]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Matrix8> for CovMatrix {
    fn from(m: Matrix8) -> Self {
        CovMatrix(m)
    }
}

/// Time-dependent drift matrix M(t) of the linearized fluctuation dynamics,
/// evaluated around the mean state `s`.
pub fn drift_matrix(params: &SystemParams, s: &MeanState, t: f64) -> Matrix8 {
    let sqrt2g = std::f64::consts::SQRT_2 * params.g;
    let mut m = Matrix8::zeros();
    for (j, off) in [(1usize, 0usize), (2, 4)] {
        let omega = if j == 1 { params.omega1 } else { params.omega2 };
        let (q, _) = s.mechanics(j);
        let (re_a, im_a) = if j == 1 { (s.re_a1, s.im_a1) } else { (s.re_a2, s.im_a2) };
        let f = params.modulated_detuning(j, t) + params.g * q;

        m[(off, off + 1)] = omega;

        m[(off + 1, off)] = -omega;
        m[(off + 1, off + 1)] = -params.gamma;
        m[(off + 1, off + 2)] = sqrt2g * re_a;
        m[(off + 1, off + 3)] = sqrt2g * im_a;

        m[(off + 2, off)] = -sqrt2g * im_a;
        m[(off + 2, off + 2)] = -params.kappa;
        m[(off + 2, off + 3)] = -f;

        m[(off + 3, off)] = sqrt2g * re_a;
        m[(off + 3, off + 2)] = f;
        m[(off + 3, off + 3)] = -params.kappa;
    }
    // Fiber coupling: the M₀ block sits in both off-diagonal positions.
    for (r, c) in [(idx::X1, idx::Y2), (idx::X2, idx::Y1)] {
        m[(r, c)] = params.lambda;
        m[(c, r)] = -params.lambda;
    }
    m
}

/// Diffusion matrix of the input noises: diag(0, γ(2n̄+1), κ, κ, 0, γ(2n̄+1), κ, κ).
pub fn noise_matrix(params: &SystemParams) -> Matrix8 {
    let mech = params.gamma * (2.0 * params.n_bath + 1.0);
    let k = params.kappa;
    Matrix8::from_diagonal(&Vector8::from([0.0, mech, k, k, 0.0, mech, k, k]))
}
