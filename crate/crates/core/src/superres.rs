//! Spike recovery on `[0, π]` from Fourier moments by approximate
//! subgradient descent on the energy distance.
//!
//! The cross interaction with the unknown measure is estimated from its
//! moments; the self interaction between particles is computed exactly.
//! Each particle then takes a normalized step of length `gamma`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;

use crate::energy::{check_gamma, self_balance, Snapshot, Trajectory};
use crate::error::{RecoveryError, Result};
use crate::fourier::{sign_series_coeffs, CrossTermEvaluator, MomentVector};
use crate::measures::{min_separation, winf_distance, SparseMeasure1D};

/// Directions with magnitude below this are treated as zero.
pub const ZERO_DIRECTION_TOL: f64 = 1e-12;

/// Positions evaluated ahead of a moving particle on a cache miss.
const LOOKAHEAD: usize = 16;

/// Maximum number of draws in the rejection samplers.
const MAX_DRAWS: usize = 100;

/// Whether a parameter bundle follows the guaranteed schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    Theory,
    Empirical,
}

impl ScheduleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleMode::Theory => "theory",
            ScheduleMode::Empirical => "empirical",
        }
    }
}

/// Stepsize, moment count and iteration count for one recovery run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub gamma: f64,
    pub moments: usize,
    pub iterations: usize,
    /// Known minimum separation of the spikes, if any.
    pub separation: Option<f64>,
    /// Target accuracy, if any.
    pub accuracy: Option<f64>,
    pub mode: ScheduleMode,
}

/// `⌈800 n / γ⌉`, the moment count that carries the accuracy guarantee.
pub fn theory_moment_count(n: usize, gamma: f64) -> usize {
    (800.0 * n as f64 / gamma).ceil() as usize
}

/// `⌊200π / γ⌋ + 1`, enough steps to cross `[0, π]` with room to settle.
pub fn theory_iterations(gamma: f64) -> usize {
    (200.0 * PI / gamma).floor() as usize + 1
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(RecoveryError::InvalidArgument(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

impl RecoveryConfig {
    /// Theory schedule for a given stepsize.
    pub fn theory(n: usize, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(RecoveryError::InvalidArgument("n must be at least 1".into()));
        }
        positive("gamma", gamma)?;
        Ok(Self {
            gamma,
            moments: theory_moment_count(n, gamma),
            iterations: theory_iterations(gamma),
            separation: None,
            accuracy: None,
            mode: ScheduleMode::Theory,
        })
    }

    /// User-chosen parameters without an accuracy guarantee.
    pub fn empirical(gamma: f64, moments: usize, iterations: usize) -> Result<Self> {
        positive("gamma", gamma)?;
        if moments == 0 {
            return Err(RecoveryError::InvalidArgument("moment count must be at least 1".into()));
        }
        Ok(Self {
            gamma,
            moments,
            iterations,
            separation: None,
            accuracy: None,
            mode: ScheduleMode::Empirical,
        })
    }
}

/// Theory parameters for `n` spikes separated by `separation`, recovered to
/// accuracy `accuracy`: `γ = min(ε/3, ℓ)` with the matching `m` and `k`.
pub fn default_params(n: usize, separation: f64, accuracy: f64) -> Result<RecoveryConfig> {
    positive("separation", separation)?;
    positive("accuracy", accuracy)?;
    let gamma = (accuracy / 3.0).min(separation);
    let mut config = RecoveryConfig::theory(n, gamma)?;
    config.separation = Some(separation);
    config.accuracy = Some(accuracy);
    Ok(config)
}

/// `n` pairwise distinct points drawn uniformly from `[0, π]`.
pub fn init_particles<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SparseMeasure1D> {
    if n == 0 {
        return Err(RecoveryError::InvalidArgument("n must be at least 1".into()));
    }
    for _ in 0..MAX_DRAWS {
        let points: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=PI)).collect();
        let measure = SparseMeasure1D::new(points)?;
        if measure.is_distinct() {
            return Ok(measure);
        }
    }
    Err(RecoveryError::Numerical(format!(
        "could not draw {n} distinct points in {MAX_DRAWS} attempts"
    )))
}

/// `n` points uniform on `[0, π]` with pairwise gaps of at least `separation`,
/// by rejection.
pub fn sample_separated_spikes<R: Rng + ?Sized>(
    n: usize,
    separation: f64,
    rng: &mut R,
) -> Result<SparseMeasure1D> {
    positive("separation", separation)?;
    if n >= 2 && separation * (n - 1) as f64 > PI {
        return Err(RecoveryError::InvalidArgument(format!(
            "{n} points cannot be {separation} apart inside [0, π]"
        )));
    }
    let attempts = MAX_DRAWS * 100;
    for _ in 0..attempts {
        let measure = init_particles(n, rng)?;
        if n < 2 || min_separation(&measure)?.min_separation >= separation {
            return Ok(measure);
        }
    }
    Err(RecoveryError::Numerical(format!(
        "rejection sampling of {n} spikes with separation {separation} gave up after {attempts} draws"
    )))
}

/// Knobs that affect what is recorded, not the iterates.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Snapshot every `stride` iterations; defaults to `⌈k/500⌉`.
    pub stride: Option<usize>,
    /// Ground truth for W∞ bookkeeping.
    pub truth: Option<SparseMeasure1D>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub final_measure: SparseMeasure1D,
    pub trajectory: Trajectory,
    /// W∞ distance between the final iterate and the truth, when supplied.
    pub matched_error: Option<f64>,
    /// Number of distinct positions at which the moment term was evaluated,
    /// including look-ahead positions that were never visited.
    pub distinct_evaluations: usize,
}

pub fn recover_1d(
    phimu: &MomentVector,
    n: usize,
    init: &SparseMeasure1D,
    config: &RecoveryConfig,
) -> Result<RecoveryResult> {
    recover_1d_with(phimu, n, init, config, &RunOptions::default())
}

/// Runs `config.iterations` synchronous steps of moment-based descent.
///
/// The moment term depends only on a particle's position, and particles move
/// on a lattice of spacing `gamma`, so its values are memoized by the exact
/// bit pattern of the position.
pub fn recover_1d_with(
    phimu: &MomentVector,
    n: usize,
    init: &SparseMeasure1D,
    config: &RecoveryConfig,
    options: &RunOptions,
) -> Result<RecoveryResult> {
    check_gamma(config.gamma)?;
    if phimu.n() != n || init.len() != n {
        return Err(RecoveryError::SizeMismatch {
            left: init.len(),
            right: phimu.n(),
        });
    }
    if phimu.m() != config.moments {
        return Err(RecoveryError::SizeMismatch {
            left: phimu.m(),
            right: config.moments,
        });
    }
    if let Some(bad) = init.support().iter().find(|&&v| !(0.0..=PI).contains(&v)) {
        return Err(RecoveryError::InvalidArgument(format!(
            "initial particle {bad} lies outside [0, π]"
        )));
    }
    if n >= 2 && !min_separation(init)?.is_distinct() {
        return Err(RecoveryError::NotDistinct);
    }
    if let Some(truth) = &options.truth {
        if truth.len() != n {
            return Err(RecoveryError::SizeMismatch {
                left: truth.len(),
                right: n,
            });
        }
    }

    let coeffs = sign_series_coeffs(config.moments)?;
    let evaluator = CrossTermEvaluator::new(phimu, &coeffs)?;
    let k = config.iterations;
    let stride = options.stride.unwrap_or_else(|| k.div_ceil(500)).max(1);
    let gamma = config.gamma;

    let snapshot = |iter: usize, positions: &[f64]| -> Result<Snapshot> {
        let winf = match &options.truth {
            Some(truth) => Some(winf_distance(&SparseMeasure1D::new(positions.to_vec())?, truth)?),
            None => None,
        };
        Ok(Snapshot {
            iter,
            positions: positions.to_vec(),
            winf,
        })
    };

    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut positions = init.support().to_vec();
    let mut headings = vec![0.0; n];
    let mut snapshots = vec![snapshot(0, &positions)?];
    let mut pending: Vec<f64> = Vec::new();
    let step = |v: f64, heading: f64| (v - gamma * heading).clamp(0.0, PI);

    for iter in 1..=k {
        pending.clear();
        for (&v, &heading) in positions.iter().zip(&headings) {
            if cache.contains_key(&v.to_bits()) {
                continue;
            }
            // A particle that missed the cache is usually mid-transit; the
            // positions it will visit if it keeps its heading are computed
            // with the same arithmetic and share one pass over the weights.
            let mut p = v;
            for ahead in 0..=LOOKAHEAD {
                if ahead > 0 {
                    if heading == 0.0 {
                        break;
                    }
                    p = step(p, heading);
                }
                if !cache.contains_key(&p.to_bits()) && !pending.iter().any(|q| q.to_bits() == p.to_bits()) {
                    pending.push(p);
                }
            }
        }
        if !pending.is_empty() {
            for (&v, value) in pending.iter().zip(evaluator.eval_many(&pending)) {
                cache.insert(v.to_bits(), value);
            }
        }

        for (v, heading) in positions.iter().zip(headings.iter_mut()) {
            let direction = cache[&v.to_bits()] - self_balance(&positions, *v) as f64;
            *heading = if direction.abs() < ZERO_DIRECTION_TOL {
                0.0
            } else {
                direction.signum()
            };
        }
        for (v, &heading) in positions.iter_mut().zip(&headings) {
            if heading != 0.0 {
                *v = step(*v, heading);
            }
        }

        if iter % stride == 0 || iter == k {
            snapshots.push(snapshot(iter, &positions)?);
        }
    }

    let final_measure = SparseMeasure1D::new(positions)?;
    let matched_error = match &options.truth {
        Some(truth) => Some(winf_distance(&final_measure, truth)?),
        None => None,
    };
    Ok(RecoveryResult {
        final_measure,
        trajectory: Trajectory {
            snapshots,
            gamma,
            iterations: k,
        },
        matched_error,
        distinct_evaluations: cache.len(),
    })
}
