//! A two-dimensional single-layer network with zero-one activations.
//!
//! Neuron `i` has weight `(sin θ_i, cos θ_i)` with `θ_i ∈ [0, π]`, and the
//! network averages `φ(x · w_i)` with `φ(a) = 1` for `a > 0`, else `0`.
//! The squared loss between two such networks, written with the kernel
//! `1 - |θ - ω|/π`, is the energy distance between the angle measures
//! divided by `π`.
//!
//! The kernel as written is twice the Monte Carlo expectation of
//! `φ(x·w) φ(x·v)` for `x` uniform on the unit circle, which equals
//! `(π - |θ - ω|)/(2π)`; [`population_loss_mc`] therefore estimates half of
//! [`population_loss_analytic`].

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{ensure_same_len, RecoveryError, Result};

/// Polar angles of the neuron weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronAngles {
    angles: Vec<f64>,
}

impl NeuronAngles {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(RecoveryError::InvalidArgument("a network needs at least one neuron".into()));
        }
        if let Some(bad) = angles.iter().find(|a| !(0.0..=PI).contains(*a)) {
            return Err(RecoveryError::InvalidArgument(format!("angle {bad} lies outside [0, π]")));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: f64,
    pub samples: usize,
}

fn unit(angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [s, c]
}

pub fn network_output(x: [f64; 2], weights: &NeuronAngles) -> f64 {
    let active = weights
        .angles()
        .iter()
        .filter(|&&a| {
            let w = unit(a);
            x[0] * w[0] + x[1] * w[1] > 0.0
        })
        .count();
    active as f64 / weights.len() as f64
}

/// `1 - |θ - ω|/π` for angles in `[0, π]`.
pub fn arccos_kernel(theta: f64, omega: f64) -> f64 {
    1.0 - (theta - omega).abs() / PI
}

/// `1 - arccos(u(θ)·u(ω))/π` evaluated through the weight vectors.
pub fn arccos_kernel_geometric(theta: f64, omega: f64) -> f64 {
    let (a, b) = (unit(theta), unit(omega));
    let dot = (a[0] * b[0] + a[1] * b[1]).clamp(-1.0, 1.0);
    1.0 - dot.acos() / PI
}

/// `(1/n²) Σ_{i,j} [k(v_i, v_j) - 2 k(v_i, w_j) + k(w_i, w_j)]`.
pub fn population_loss_analytic(v: &NeuronAngles, w: &NeuronAngles) -> Result<f64> {
    ensure_same_len(v.len(), w.len())?;
    let double = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .map(|&x| b.iter().map(|&y| arccos_kernel(x, y)).sum::<f64>())
            .sum()
    };
    let (va, wa) = (v.angles(), w.angles());
    let n = v.len() as f64;
    Ok((double(va, va) - 2.0 * double(va, wa) + double(wa, wa)) / (n * n))
}

/// Mean of `(f_v(x) - f_w(x))²` over `x = (sin r, cos r)`, `r ~ U[0, 2π)`.
pub fn population_loss_mc<R: Rng + ?Sized>(
    v: &NeuronAngles,
    w: &NeuronAngles,
    samples: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    ensure_same_len(v.len(), w.len())?;
    if samples == 0 {
        return Err(RecoveryError::InvalidArgument("at least one sample is required".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let x = unit(rng.gen_range(0.0..2.0 * PI));
        let diff = network_output(x, v) - network_output(x, w);
        let loss = diff * diff;
        sum += loss;
        sum_sq += loss * loss;
    }
    let count = samples as f64;
    let mean = sum / count;
    let stderr = if samples > 1 {
        let variance = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
        (variance / count).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloEstimate { mean, stderr, samples })
}
