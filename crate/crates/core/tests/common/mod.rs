//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use optosync::dynamics::{simulate, Integration};
use optosync::model::{CovMatrix, Matrix8, SystemParams, Vector8, DIM};

/// Solve M V + V Mᵀ + N = 0 as a 64-dimensional linear system.
pub fn lyapunov_direct(m: &Matrix8, n: &Matrix8) -> Matrix8 {
    let d = DIM * DIM;
    let mut a = DMatrix::<f64>::zeros(d, d);
    // Column-major vec: vec(MV) = (I⊗M) vec V, vec(VMᵀ) = (M⊗I) vec V.
    for i in 0..DIM {
        for j in 0..DIM {
            let row = i + DIM * j;
            for k in 0..DIM {
                a[(row, k + DIM * j)] += m[(i, k)];
                a[(row, i + DIM * k)] += m[(j, k)];
            }
        }
    }
    let b = DVector::from_iterator(d, n.iter().map(|x| -x));
    let x = a.lu().solve(&b).expect("Lyapunov system is singular");
    Matrix8::from_iterator(x.iter().copied())
}

/// a(t) = a_ss (1 − e^{−(κ − iΔ) t}) from a(0) = 0.
pub fn cavity_exact(p: &SystemParams, t: f64) -> (f64, f64) {
    let den = p.kappa * p.kappa + p.delta1 * p.delta1;
    let (ar, ai) = (p.drive * p.kappa / den, p.drive * p.delta1 / den);
    let decay = (-p.kappa * t).exp();
    let (s, c) = (p.delta1 * t).sin_cos();
    let (er, ei) = (1.0 - decay * c, -decay * s);
    (ar * er - ai * ei, ar * ei + ai * er)
}

pub fn max_cavity_error(p: &SystemParams, dt: f64, t_end: f64) -> f64 {
    let traj = simulate(
        p,
        &CovMatrix::vacuum(),
        Integration {
            t_end,
            dt,
            record_stride: 1,
        },
    )
    .unwrap();
    traj.times
        .iter()
        .zip(&traj.means)
        .map(|(&t, m)| {
            let (re, im) = cavity_exact(p, t);
            (m.re_a1 - re).abs().max((m.im_a1 - im).abs())
        })
        .fold(0.0, f64::max)
}

pub fn random_cov(rng: &mut impl Rng) -> CovMatrix {
    let a = Matrix8::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    CovMatrix(a * a.transpose() / 8.0 + Matrix8::identity() * 0.05)
}

/// Coefficients of δq_-^φ and δp_-^φ for subsystem phases φ₁, φ₂.
pub fn error_operators(phi1: f64, phi2: f64) -> (Vector8, Vector8) {
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    let mut q = Vector8::zeros();
    let mut p = Vector8::zeros();
    // q_j^φ = q_j cos φ_j + p_j sin φ_j,  p_j^φ = p_j cos φ_j − q_j sin φ_j
    q[0] = c1;
    q[1] = s1;
    q[4] = -c2;
    q[5] = -s2;
    p[0] = -s1;
    p[1] = c1;
    p[4] = s2;
    p[5] = -c2;
    (q * FRAC_1_SQRT_2, p * FRAC_1_SQRT_2)
}

pub fn variance(v: &CovMatrix, c: &Vector8) -> f64 {
    let mut acc = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            acc += c[i] * v.get(i, j) * c[j];
        }
    }
    acc
}

pub fn brute_phi(v: &CovMatrix, phi1: f64, phi2: f64) -> f64 {
    let (q, p) = error_operators(phi1, phi2);
    1.0 / (variance(v, &q) + variance(v, &p))
}

pub fn brute_p(v: &CovMatrix, phi1: f64, phi2: f64) -> f64 {
    let (_, p) = error_operators(phi1, phi2);
    1.0 / (2.0 * variance(v, &p))
}
