//! Energy distance between uniform measures on the line and normalized
//! particle gradient descent on it.

use crate::error::{ensure_same_len, RecoveryError, Result};
use crate::measures::{min_separation, winf_distance, SparseMeasure1D};

/// Value of the energy distance; always nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EnergyValue {
    pub value: f64,
}

/// Positions of all particles at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iter: usize,
    pub positions: Vec<f64>,
    /// W∞ distance to the target, when the target is known.
    pub winf: Option<f64>,
}

/// Sampled history of a particle run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub gamma: f64,
    /// Number of update steps actually performed.
    pub iterations: usize,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

/// Energy distance `2E|X-Y| - E|X-X'| - E|Y-Y'|` between two uniform
/// measures with the same number of points.
///
/// Evaluated through the identity `E = 2 ∫ (F - G)^2 dx` for the two
/// step-function CDFs, which costs one merge of the sorted supports and is
/// exactly zero when the multisets agree.
pub fn energy_distance(nu: &SparseMeasure1D, mu: &SparseMeasure1D) -> Result<EnergyValue> {
    ensure_same_len(nu.len(), mu.len())?;
    let n = nu.len();
    let mut events: Vec<(f64, i64)> = nu
        .support()
        .iter()
        .map(|&x| (x, 1))
        .chain(mu.support().iter().map(|&x| (x, -1)))
        .collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));

    // `balance` is n·(F - G) on the gap to the right of the current event.
    let mut balance: i64 = 0;
    let mut acc = 0.0;
    for pair in events.windows(2) {
        balance += pair[0].1;
        if balance != 0 {
            acc += (balance * balance) as f64 * (pair[1].0 - pair[0].0);
        }
    }
    Ok(EnergyValue {
        value: 2.0 * acc / (n * n) as f64,
    })
}

fn sign(x: f64) -> i64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Integer numerator `Σ_j sign(v_i - w_j) - Σ_j sign(v_i - v_j)` of the
/// partial derivative with respect to particle `i`, with `sign(0) = 0`.
pub fn sign_balance(nu: &SparseMeasure1D, mu: &SparseMeasure1D, i: usize) -> Result<i64> {
    ensure_same_len(nu.len(), mu.len())?;
    let v = nu.support();
    let vi = *v.get(i).ok_or_else(|| {
        RecoveryError::InvalidArgument(format!("particle index {i} out of range for n = {}", v.len()))
    })?;
    let cross: i64 = mu.support().iter().map(|&w| sign(vi - w)).sum();
    Ok(cross - self_balance(v, vi))
}

/// `Σ_j sign(x - v_j)` over the current particles.
pub(crate) fn self_balance(particles: &[f64], x: f64) -> i64 {
    particles.iter().map(|&vj| sign(x - vj)).sum()
}

/// Partial derivative of the energy distance with respect to particle `i`:
/// `(2/n²) · sign_balance`.
pub fn subgradient(nu: &SparseMeasure1D, mu: &SparseMeasure1D, i: usize) -> Result<f64> {
    let n = nu.len() as f64;
    Ok(2.0 * sign_balance(nu, mu, i)? as f64 / (n * n))
}

/// One synchronous normalized step: every particle moves by `gamma` against
/// the sign of its partial derivative; particles with zero derivative stay.
pub fn gd_step(nu: &SparseMeasure1D, mu: &SparseMeasure1D, gamma: f64) -> Result<SparseMeasure1D> {
    ensure_same_len(nu.len(), mu.len())?;
    check_gamma(gamma)?;
    let next = (0..nu.len())
        .map(|i| {
            let vi = nu.support()[i];
            let balance = sign_balance(nu, mu, i)?;
            Ok(vi - gamma * balance.signum() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    SparseMeasure1D::new(next)
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(RecoveryError::InvalidArgument(format!(
            "stepsize must be positive and finite, got {gamma}"
        )))
    }
}

/// Runs normalized particle descent from `init` towards `mu`.
///
/// Stops as soon as the W∞ distance drops to `gamma` or after `max_iters`
/// steps. Every iterate is recorded, starting with the initial one.
pub fn particle_gd(
    init: &SparseMeasure1D,
    mu: &SparseMeasure1D,
    gamma: f64,
    max_iters: usize,
) -> Result<Trajectory> {
    ensure_same_len(init.len(), mu.len())?;
    check_gamma(gamma)?;
    if init.len() >= 2 && !min_separation(init)?.is_distinct() {
        return Err(RecoveryError::NotDistinct);
    }

    let mut current = init.clone();
    let mut snapshots = Vec::new();
    let mut iter = 0;
    loop {
        let winf = winf_distance(&current, mu)?;
        snapshots.push(Snapshot {
            iter,
            positions: current.support().to_vec(),
            winf: Some(winf),
        });
        if winf <= gamma || iter >= max_iters {
            break;
        }
        current = gd_step(&current, mu, gamma)?;
        iter += 1;
    }
    Ok(Trajectory {
        snapshots,
        gamma,
        iterations: iter,
    })
}

/// Number of steps after which the W∞ guarantee `≤ gamma` must hold.
pub fn convergence_budget(init: &SparseMeasure1D, mu: &SparseMeasure1D, gamma: f64) -> Result<usize> {
    check_gamma(gamma)?;
    Ok((winf_distance(init, mu)? / gamma).floor() as usize + 1)
}
