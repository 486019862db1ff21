use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde_json::Value;
use sparse_recover::energy::{convergence_budget, energy_distance, particle_gd, Trajectory};
use sparse_recover::fourier::{
    feature_count_for_order, gibbs_error_bound, moments, truncated_sign, NEAR_ORIGIN_BOUND,
};
use sparse_recover::highdim::{
    beta_of, recover_nd_deterministic, recover_nd_randomized, sample_box_cloud, sample_sphere_cloud, BetaSource,
    NdOptions, Schedule, DEFAULT_BETA_CONSTANT,
};
use sparse_recover::measures::SparseMeasure1D;
use sparse_recover::neural::{population_loss_analytic, population_loss_mc, NeuronAngles};
use sparse_recover::superres::{
    default_params, init_particles, recover_1d_with, sample_separated_spikes, theory_iterations, RecoveryConfig,
    RunOptions, ScheduleMode,
};
use sparse_recover::{seeded_rng, SeededRng};

use crate::output::{emit_clouds, emit_table, emit_trajectory, Summary};
use crate::spec::{BetaChoice, CommandKind, ExperimentSpec, Mode, Variant};
use crate::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const SUMMARY_FILE: &str = "summary.json";

const BOUNDS_GRID: usize = 10_000;
const BOUNDS_BANDS: usize = 8;
const BOUNDS_MIN_DELTA: f64 = 1e-3;
const BOUNDS_HEADER: &str = "check,abs_delta_lo,abs_delta_hi,points,max_value,worst_ratio,violations,status";

#[derive(Debug)]
pub struct RunOutput {
    pub summary: Summary,
    /// The CSV written next to the summary.
    pub table_path: PathBuf,
    pub summary_path: PathBuf,
    /// Human-readable lines for the terminal.
    pub report: Vec<String>,
}

/// Executes `spec` and writes its outputs into `spec.out_dir`.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    validate(spec)?;
    fs::create_dir_all(&spec.out_dir).map_err(|source| CliError::Io {
        path: spec.out_dir.clone(),
        source,
    })?;
    let started = Instant::now();
    let mut rng = seeded_rng(spec.seed);
    let mut summary = Summary::default();
    summary
        .set("command", spec.command.name())
        .set("seed", spec.seed)
        .set("mode", mode_of(spec).as_str());

    let (table_path, report) = match spec.command {
        CommandKind::EnergyGd => energy_gd(spec, &mut rng, &mut summary)?,
        CommandKind::Recover1d => recover1d(spec, &mut rng, &mut summary)?,
        CommandKind::Recoverd => recoverd(spec, &mut rng, &mut summary)?,
        CommandKind::NnDemo => nn_demo(spec, &mut rng, &mut summary)?,
        CommandKind::BoundsCheck => bounds_check(spec, &mut summary)?,
    };

    summary.set_f64("wall_clock_seconds", started.elapsed().as_secs_f64());
    let summary_path = spec.out_dir.join(SUMMARY_FILE);
    summary.write(&summary_path)?;
    Ok(RunOutput {
        summary,
        table_path,
        summary_path,
        report,
    })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn validate(spec: &ExperimentSpec) -> Result<(), CliError> {
    let positive = [
        ("gamma", spec.gamma),
        ("ell", spec.ell),
        ("eps", spec.eps),
        ("beta", spec.beta),
    ];
    if let Some((name, value)) = positive
        .iter()
        .find_map(|&(name, v)| v.filter(|x| !(*x > 0.0 && x.is_finite())).map(|x| (name, x)))
    {
        return Err(usage(format!("--{name} must be positive and finite, got {value}")));
    }
    let counts = [
        ("n", spec.n),
        ("d", spec.d),
        ("m", spec.m),
        ("k", spec.k),
        ("samples", spec.samples),
        ("mB", spec.m_b),
    ];
    if let Some((name, _)) = counts.iter().find(|(_, v)| *v == Some(0)) {
        return Err(usage(format!("--{name} must be at least 1")));
    }
    if let Some(kappa) = spec.kappa {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(usage(format!("--kappa must lie in (0, 1), got {kappa}")));
        }
    }
    if spec.threads == 0 {
        return Err(usage("thread count must be at least 1"));
    }
    let scheduled = matches!(spec.command, CommandKind::Recover1d | CommandKind::Recoverd);
    if spec.mode.is_some() && !scheduled {
        return Err(usage(format!("--mode does not apply to {}", spec.command.name())));
    }
    if mode_of(spec) == ScheduleMode::Theory && (spec.m.is_some() || spec.k.is_some()) && scheduled {
        return Err(usage("--m and --k are fixed by the theory schedule; pass --mode empirical to set them"));
    }
    Ok(())
}

fn mode_of(spec: &ExperimentSpec) -> ScheduleMode {
    spec.mode.unwrap_or(Mode::Theory).into()
}

fn energy_gd(
    spec: &ExperimentSpec,
    rng: &mut SeededRng,
    summary: &mut Summary,
) -> Result<(PathBuf, Vec<String>), CliError> {
    let n = spec.n.unwrap_or(5);
    let gamma = spec.gamma.unwrap_or(0.01);
    let truth = init_particles(n, rng)?;
    let init = init_particles(n, rng)?;
    let budget = convergence_budget(&init, &truth, gamma)?;
    let max_iters = spec.k.unwrap_or(budget);
    let traj = particle_gd(&init, &truth, gamma, max_iters)?;
    let initial = traj.snapshots[0].winf.unwrap_or(f64::NAN);
    let last = traj.last().and_then(|s| s.winf).unwrap_or(f64::NAN);

    let path = spec.out_dir.join(TRAJECTORY_FILE);
    emit_trajectory(&traj, &path)?;
    summary
        .set("n", n)
        .set_f64("gamma", gamma)
        .set("k", max_iters)
        .set("iteration_budget", budget)
        .set("iterations", traj.iterations)
        .set_f64("initial_winf", initial)
        .set_f64("matched_error", last)
        .set("converged", last <= gamma);
    let report = vec![format!(
        "energy-gd: W∞ {initial:.6} -> {last:.6} in {} of {budget} budgeted steps",
        traj.iterations
    )];
    Ok((path, report))
}

fn recover1d(
    spec: &ExperimentSpec,
    rng: &mut SeededRng,
    summary: &mut Summary,
) -> Result<(PathBuf, Vec<String>), CliError> {
    let n = spec.n.unwrap_or(10);
    let config = match mode_of(spec) {
        ScheduleMode::Theory => match (spec.ell, spec.eps) {
            (Some(ell), Some(eps)) => {
                if spec.gamma.is_some() {
                    return Err(usage("--gamma is derived from --ell and --eps in theory mode"));
                }
                default_params(n, ell, eps)?
            }
            (None, Some(_)) => return Err(usage("--eps needs --ell to derive the theory schedule")),
            _ => RecoveryConfig::theory(n, spec.gamma.unwrap_or(0.01))?,
        },
        ScheduleMode::Empirical => {
            let gamma = spec.gamma.unwrap_or(0.01);
            RecoveryConfig::empirical(gamma, spec.m.unwrap_or(200), spec.k.unwrap_or_else(|| theory_iterations(gamma)))?
        }
    };
    let truth = match spec.ell {
        Some(ell) => sample_separated_spikes(n, ell, rng)?,
        None => init_particles(n, rng)?,
    };
    let init = init_particles(n, rng)?;
    let phimu = moments(&truth, config.moments)?;
    let options = RunOptions {
        stride: None,
        truth: Some(truth),
    };
    let result = recover_1d_with(&phimu, n, &init, &config, &options)?;

    let path = spec.out_dir.join(TRAJECTORY_FILE);
    emit_trajectory(&result.trajectory, &path)?;
    summary
        .set("n", n)
        .set_f64("gamma", config.gamma)
        .set("m", config.moments)
        .set("k", config.iterations)
        .set_opt_f64("ell", spec.ell)
        .set_opt_f64("eps", config.accuracy.or(spec.eps))
        .set_opt_f64("matched_error", result.matched_error)
        .set("distinct_evaluations", result.distinct_evaluations)
        .set("snapshots", result.trajectory.snapshots.len());
    let report = vec![format!(
        "recover1d ({}): n {n}, γ {}, m {}, k {} -> matched error {:.6}",
        config.mode.as_str(),
        config.gamma,
        config.moments,
        config.iterations,
        result.matched_error.unwrap_or(f64::NAN)
    )];
    Ok((path, report))
}

fn nd_options(spec: &ExperimentSpec, gamma: f64) -> NdOptions {
    let schedule = match mode_of(spec) {
        ScheduleMode::Theory => Schedule::Theory,
        ScheduleMode::Empirical => Schedule::Empirical {
            moments: spec.m.unwrap_or(200),
            iterations: spec.k.unwrap_or_else(|| theory_iterations(gamma)),
        },
    };
    NdOptions {
        schedule,
        threads: spec.threads,
        ..NdOptions::default()
    }
}

fn recoverd(
    spec: &ExperimentSpec,
    rng: &mut SeededRng,
    summary: &mut Summary,
) -> Result<(PathBuf, Vec<String>), CliError> {
    let n = spec.n.unwrap_or(4);
    let d = spec.d.unwrap_or(3);
    let eps = spec.eps.unwrap_or(0.05);
    summary
        .set("n", n)
        .set("d", d)
        .set_f64("eps", eps)
        .set("threads", spec.threads);
    let path = spec.out_dir.join(TRAJECTORY_FILE);

    match spec.variant {
        Variant::Deterministic => {
            let beta = spec.beta.unwrap_or(0.25);
            let truth = sample_box_cloud(n, d, beta, rng)?;
            let options = nd_options(spec, sparse_recover::highdim::nd_stepsize(beta, eps));
            let result = recover_nd_deterministic(&truth, beta, eps, rng, &options)?;
            emit_clouds(&[(0, &truth), (result.config.iterations, &result.cloud)], &path)?;
            summary
                .set("variant", "deterministic")
                .set_f64("beta", beta)
                .set_opt_f64("true_beta", if n >= 2 && d >= 2 { Some(beta_of(&truth)?.beta) } else { None })
                .set_f64("gamma", result.config.gamma)
                .set("m", result.config.moments)
                .set("k", result.config.iterations)
                .set("instances", result.instances.len())
                .set("glue_matches", result.gluing.len())
                .set_f64("matched_error", result.matched_error)
                .set("matched_error_norm", "max");
            let report = vec![format!(
                "recoverd (deterministic): n {n}, d {d}, β {beta}, ε {eps} -> max-norm matched error {:.6}",
                result.matched_error
            )];
            Ok((path, report))
        }
        Variant::Randomized => {
            let ell = spec.ell.unwrap_or(0.5);
            let kappa = spec.kappa.unwrap_or(0.2);
            let source = match spec.beta_source {
                BetaChoice::Exact => BetaSource::Exact,
                BetaChoice::Formula => BetaSource::Formula {
                    constant: DEFAULT_BETA_CONSTANT,
                },
            };
            let truth = sample_sphere_cloud(n, d, ell, rng)?;
            let options = nd_options(spec, eps / d as f64);
            let result = recover_nd_randomized(&truth, ell, kappa, eps, source, rng, &options)?;
            emit_clouds(&[(0, &truth), (result.inner.config.iterations, &result.cloud)], &path)?;
            summary
                .set("variant", "randomized")
                .set_f64("ell", ell)
                .set_f64("kappa", kappa)
                .set(
                    "beta_source",
                    match spec.beta_source {
                        BetaChoice::Exact => "exact",
                        BetaChoice::Formula => "formula",
                    },
                )
                .set_f64("beta", result.beta)
                .set_f64("projection_norm", result.projection.spectral_norm)
                .set_f64("projection_inverse_norm", result.projection.inverse_norm)
                .set("projection_attempts", result.projection.attempts)
                .set_f64("gamma", result.inner.config.gamma)
                .set("m", result.inner.config.moments)
                .set("k", result.inner.config.iterations)
                .set("glue_matches", result.inner.gluing.len())
                .set_f64("matched_error", result.matched_error)
                .set("matched_error_norm", "euclidean");
            let report = vec![format!(
                "recoverd (randomized): n {n}, d {d}, ℓ {ell}, κ {kappa}, ε {eps} -> Euclidean matched error {:.6}",
                result.matched_error
            )];
            Ok((path, report))
        }
    }
}

fn clamped_angles(positions: &[f64]) -> Result<NeuronAngles, CliError> {
    Ok(NeuronAngles::new(positions.iter().map(|x| x.clamp(0.0, PI)).collect())?)
}

fn nn_demo(
    spec: &ExperimentSpec,
    rng: &mut SeededRng,
    summary: &mut Summary,
) -> Result<(PathBuf, Vec<String>), CliError> {
    let n = spec.n.unwrap_or(3);
    let gamma = spec.gamma.unwrap_or(0.01);
    let samples = spec.samples.unwrap_or(100_000);
    let teacher = init_particles(n, rng)?;
    let student = init_particles(n, rng)?;
    let budget = convergence_budget(&student, &teacher, gamma)?;
    let traj = particle_gd(&student, &teacher, gamma, spec.k.unwrap_or(budget))?;

    let teacher_angles = NeuronAngles::new(teacher.support().to_vec())?;
    let loss_at = |positions: &[f64]| -> Result<f64, CliError> {
        Ok(population_loss_analytic(&clamped_angles(positions)?, &teacher_angles)?)
    };
    let initial = &traj.snapshots[0];
    let loss_initial = loss_at(&initial.positions)?;
    let final_positions = &traj.last().expect("descent records its start").positions;
    let loss_final = loss_at(final_positions)?;
    let energy_initial = energy_distance(&student, &teacher)?.value;
    let identity_gap = identity_gap(&traj, &teacher, &loss_at)?;
    let estimate = population_loss_mc(&clamped_angles(&initial.positions)?, &teacher_angles, samples, rng)?;

    let path = spec.out_dir.join(TRAJECTORY_FILE);
    emit_trajectory(&traj, &path)?;
    summary
        .set("n", n)
        .set_f64("gamma", gamma)
        .set("k", traj.iterations)
        .set("samples", samples)
        .set_f64("loss_initial", loss_initial)
        .set_f64("loss_final", loss_final)
        .set_f64("energy_initial", energy_initial)
        .set_f64("max_identity_gap", identity_gap)
        .set_f64("mc_mean", estimate.mean)
        .set_f64("mc_stderr", estimate.stderr)
        .set_f64("mc_to_loss_ratio", estimate.mean / loss_initial)
        .set_opt_f64("matched_error", traj.last().and_then(|s| s.winf));
    let report = vec![
        format!("nn-demo: loss {loss_initial:.6} -> {loss_final:.6} over {} steps", traj.iterations),
        format!(
            "nn-demo: Monte Carlo {:.6} ± {:.6} at the start (ratio to loss {:.4})",
            estimate.mean,
            estimate.stderr,
            estimate.mean / loss_initial
        ),
    ];
    Ok((path, report))
}

/// Largest `|π L - E|` over snapshots lying inside `[0, π]`.
fn identity_gap(
    traj: &Trajectory,
    teacher: &SparseMeasure1D,
    loss_at: &dyn Fn(&[f64]) -> Result<f64, CliError>,
) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots {
        if snap.positions.iter().all(|x| (0.0..=PI).contains(x)) {
            let energy = energy_distance(&SparseMeasure1D::new(snap.positions.clone())?, teacher)?.value;
            worst = worst.max((PI * loss_at(&snap.positions)? - energy).abs());
        }
    }
    Ok(worst)
}

fn bounds_check(spec: &ExperimentSpec, summary: &mut Summary) -> Result<(PathBuf, Vec<String>), CliError> {
    let order = spec.m_b.unwrap_or(64);
    let m = feature_count_for_order(order);
    let grid: Vec<f64> = (0..=BOUNDS_GRID)
        .map(|i| -PI + 2.0 * PI * i as f64 / BOUNDS_GRID as f64)
        .collect();

    let mut rows = Vec::new();
    let mut report = vec![format!(
        "{:<11} {:>8} {:>8} {:>6} {:>10} {:>10} {:>5}  status",
        "check", "|Δ| lo", "|Δ| hi", "points", "max", "ratio", "viol"
    )];
    let mut violations_total = 0;
    let width = PI / BOUNDS_BANDS as f64;
    for band in 0..BOUNDS_BANDS {
        let (lo, hi) = (band as f64 * width, (band + 1) as f64 * width);
        let last = band + 1 == BOUNDS_BANDS;
        let points: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|d| {
                let a = d.abs();
                a >= BOUNDS_MIN_DELTA && a >= lo && (a < hi || (last && a <= hi))
            })
            .collect();
        let mut max_error: f64 = 0.0;
        let mut worst_ratio: f64 = 0.0;
        let mut violations = 0;
        for &delta in &points {
            let error = (truncated_sign(delta, m) - delta.signum()).abs();
            let bound = gibbs_error_bound(delta, order);
            max_error = max_error.max(error);
            worst_ratio = worst_ratio.max(error / bound);
            if error > bound {
                violations += 1;
            }
        }
        violations_total += violations;
        push_row(&mut rows, &mut report, "sign_error", lo, hi, points.len(), max_error, worst_ratio, violations);
    }

    let near: Vec<f64> = grid.iter().copied().filter(|d| d.abs() <= PI / 4.0).collect();
    let peak = near.iter().map(|&d| truncated_sign(d, m).abs()).fold(0.0, f64::max);
    let near_violations = near
        .iter()
        .filter(|&&d| truncated_sign(d, m).abs() > NEAR_ORIGIN_BOUND)
        .count();
    violations_total += near_violations;
    push_row(
        &mut rows,
        &mut report,
        "near_origin",
        0.0,
        PI / 4.0,
        near.len(),
        peak,
        peak / NEAR_ORIGIN_BOUND,
        near_violations,
    );

    let path = spec.out_dir.join(BOUNDS_FILE);
    emit_table(BOUNDS_HEADER, &rows, &path)?;
    summary
        .set("m_b", order)
        .set("m", m)
        .set("grid_points", BOUNDS_GRID + 1)
        .set_f64("min_abs_delta", BOUNDS_MIN_DELTA)
        .set("violations", violations_total)
        .set("all_pass", violations_total == 0)
        .set("matched_error", Value::Null);
    Ok((path, report))
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    rows: &mut Vec<String>,
    report: &mut Vec<String>,
    check: &str,
    lo: f64,
    hi: f64,
    points: usize,
    max_value: f64,
    worst_ratio: f64,
    violations: usize,
) {
    let status = if violations == 0 { "PASS" } else { "FAIL" };
    rows.push(format!(
        "{check},{lo:.16e},{hi:.16e},{points},{max_value:.16e},{worst_ratio:.16e},{violations},{status}"
    ));
    report.push(format!(
        "{check:<11} {lo:>8.4} {hi:>8.4} {points:>6} {max_value:>10.6} {worst_ratio:>10.4} {violations:>5}  {status}"
    ));
}
