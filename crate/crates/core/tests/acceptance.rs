//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;

use sparse_recover::energy::{
    convergence_budget, energy_distance, gd_step, particle_gd, subgradient,
};
use sparse_recover::fourier::{
    approx_cross_subgradient, approx_sign, feature_count_for_order, gibbs_error_bound, moments,
    sign_series_coeffs, truncated_sign, NEAR_ORIGIN_BOUND,
};
use sparse_recover::highdim::{
    beta_of, recover_nd_deterministic, recover_nd_randomized, sample_sphere_cloud, BetaSource,
    NdOptions, PointCloudND, Schedule, DEFAULT_GLUE_FRACTION,
};
use sparse_recover::measures::{winf_bruteforce, winf_distance, SparseMeasure1D};
use sparse_recover::neural::{population_loss_analytic, population_loss_mc, NeuronAngles};
use sparse_recover::seeded_rng;
use sparse_recover::superres::{
    default_params, init_particles, recover_1d_with, sample_separated_spikes, theory_iterations,
    RecoveryConfig, RunOptions,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn measure(v: Vec<f64>) -> SparseMeasure1D {
    SparseMeasure1D::new(v).expect("finite support")
}

fn uniform(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=PI)).collect()
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn figure_one() -> Outcome {
    let start = Instant::now();
    let truth = init_particles(5, &mut seeded_rng(1)).unwrap();
    let init = init_particles(5, &mut seeded_rng(2)).unwrap();
    let gamma = 0.01;
    let budget = convergence_budget(&init, &truth, gamma).unwrap();
    let traj = particle_gd(&init, &truth, gamma, budget).unwrap();
    let elapsed = start.elapsed();
    let final_winf = traj.last().unwrap().winf.unwrap();
    let pass = final_winf <= gamma
        && traj.iterations <= budget
        && budget <= 315
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "final W∞ {final_winf:.3e} after {} of {budget} allowed steps in {elapsed:.2?}",
            traj.iterations
        ),
    )
}

fn contraction() -> Outcome {
    let mut rng = seeded_rng(20);
    let mut steps = 0usize;
    let mut violations = 0usize;
    for trial in 0..100 {
        let n = rng.gen_range(2..=10);
        let gamma = if trial % 2 == 0 { 0.05 } else { 0.01 };
        let truth = measure(uniform(n, &mut rng));
        let init = init_particles(n, &mut rng).unwrap();
        let budget = convergence_budget(&init, &truth, gamma).unwrap();
        let mut current = init;
        let mut winf = winf_distance(&current, &truth).unwrap();
        for _ in 0..budget {
            let next = gd_step(&current, &truth, gamma).unwrap();
            let next_winf = winf_distance(&next, &truth).unwrap();
            if next_winf > (winf - gamma).max(gamma) + 1e-12 {
                violations += 1;
            }
            steps += 1;
            current = next;
            winf = next_winf;
        }
    }
    outcome(violations == 0, format!("{violations} violations over {steps} steps in 100 instances"))
}

fn figure_two() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(7);
    let truth = measure(uniform(10, &mut rng));
    let init = init_particles(10, &mut rng).unwrap();
    let gamma = 0.01;
    let config = RecoveryConfig::empirical(gamma, 200, theory_iterations(gamma)).unwrap();
    let phimu = moments(&truth, config.moments).unwrap();
    let options = RunOptions {
        stride: None,
        truth: Some(truth),
    };
    let result = recover_1d_with(&phimu, 10, &init, &config, &options).unwrap();
    let elapsed = start.elapsed();
    let err = result.matched_error.unwrap();
    outcome(
        err <= 0.05 && elapsed < Duration::from_secs(10),
        format!("matched error {err:.4} after {} steps in {elapsed:.2?}", config.iterations),
    )
}

fn theorem_two() -> Outcome {
    let accuracy = 0.15;
    let separation = 0.3;
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut failures = Vec::new();
    for n in [2usize, 3] {
        for seed in 0..10u64 {
            let start = Instant::now();
            let mut rng = seeded_rng(400 + seed);
            let truth = sample_separated_spikes(n, separation, &mut rng).unwrap();
            let init = init_particles(n, &mut rng).unwrap();
            let config = default_params(n, separation, accuracy).unwrap();
            let phimu = moments(&truth, config.moments).unwrap();
            let options = RunOptions {
                stride: Some(config.iterations),
                truth: Some(truth),
            };
            let err = recover_1d_with(&phimu, n, &init, &config, &options)
                .unwrap()
                .matched_error
                .unwrap();
            slowest = slowest.max(start.elapsed());
            worst = worst.max(err);
            if err > accuracy {
                failures.push(format!("n={n} seed={seed} err={err:.4}"));
            }
        }
    }
    outcome(
        failures.is_empty() && slowest < Duration::from_secs(120),
        format!(
            "worst matched error {worst:.4} (ε = {accuracy}), slowest run {slowest:.2?}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    )
}

fn gibbs_bounds() -> Outcome {
    let points = 10_000;
    let grid = |i: usize| -PI + 2.0 * PI * i as f64 / (points - 1) as f64;
    let mut first = Vec::new();
    for order in [16usize, 64, 256] {
        let m = feature_count_for_order(order);
        let mut violations = 0;
        let mut farthest_from_end: f64 = 0.0;
        for i in 0..points {
            let delta = grid(i);
            if delta.abs() < 1e-3 {
                continue;
            }
            let err = (truncated_sign(delta, m) - delta.signum()).abs();
            if err > gibbs_error_bound(delta, order) {
                violations += 1;
                farthest_from_end = farthest_from_end.max(PI - delta.abs());
            }
        }
        first.push((order, violations, farthest_from_end));
    }
    let mut second = Vec::new();
    for order in [13usize, 20, 50] {
        let m = feature_count_for_order(order);
        let peak = (0..points)
            .map(|i| -PI / 4.0 + PI / 2.0 * i as f64 / (points - 1) as f64)
            .map(|delta| truncated_sign(delta, m).abs())
            .fold(0.0, f64::max);
        second.push((order, peak));
    }
    let pass = first.iter().all(|&(_, v, _)| v == 0) && second.iter().all(|&(_, p)| p <= NEAR_ORIGIN_BOUND);
    let first_text: Vec<String> = first
        .iter()
        .map(|(o, v, d)| {
            if *v == 0 {
                format!("m_B={o}: 0 violations")
            } else {
                format!("m_B={o}: {v} violations, all within {d:.3} of ±π")
            }
        })
        .collect();
    let second_text: Vec<String> = second.iter().map(|(o, p)| format!("m_B={o}: max|g| {p:.4}")).collect();
    outcome(pass, format!("error bound [{}]; near-origin bound [{}]", first_text.join("; "), second_text.join("; ")))
}

fn feature_identity() -> Outcome {
    let mut rng = seeded_rng(60);
    let coeffs = sign_series_coeffs(feature_count_for_order(64)).unwrap();
    let mut worst_pair: f64 = 0.0;
    for _ in 0..1000 {
        let (v, w) = (rng.gen_range(0.0..=PI), rng.gen_range(0.0..=PI));
        worst_pair = worst_pair.max((approx_sign(v, w, &coeffs) - truncated_sign(v - w, coeffs.m())).abs());
    }
    let mut worst_sum: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let support = uniform(n, &mut rng);
        let phimu = moments(&measure(support.clone()), coeffs.m()).unwrap();
        let v = rng.gen_range(0.0..=PI);
        let direct: f64 = support.iter().map(|&w| approx_sign(v, w, &coeffs)).sum();
        worst_sum = worst_sum.max((approx_cross_subgradient(v, &phimu, &coeffs).unwrap() - direct).abs());
    }
    outcome(
        worst_pair <= 1e-12 && worst_sum <= 1e-10,
        format!("pairwise max gap {worst_pair:.2e}, moment-sum max gap {worst_sum:.2e}"),
    )
}

fn transport_oracle() -> Outcome {
    let mut rng = seeded_rng(70);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=7);
        let a = measure(uniform(n, &mut rng));
        let b = measure(uniform(n, &mut rng));
        if winf_distance(&a, &b).unwrap() != winf_bruteforce(&a, &b).unwrap() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in 200 instances"))
}

fn finite_differences() -> Outcome {
    let mut rng = seeded_rng(80);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 500 {
        let n = rng.gen_range(1..=6);
        let v = uniform(n, &mut rng);
        let w = uniform(n, &mut rng);
        let i = rng.gen_range(0..n);
        let clearance = v
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x)
            .chain(&w)
            .map(|x| (x - v[i]).abs())
            .fold(f64::INFINITY, f64::min);
        if clearance <= 10.0 * h {
            continue;
        }
        let shifted = |delta: f64| {
            let mut moved = v.clone();
            moved[i] += delta;
            energy_distance(&measure(moved), &measure(w.clone())).unwrap().value
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let exact = subgradient(&measure(v.clone()), &measure(w.clone()), i).unwrap();
        worst = worst.max((fd - exact).abs());
        checked += 1;
    }
    outcome(worst <= 1e-6, format!("max |finite difference - subgradient| = {worst:.2e} over 500 points"))
}

fn hand_truth() -> PointCloudND {
    PointCloudND::from_rows(&[
        vec![-0.8, 0.35, 0.6],
        vec![0.45, 0.1, 0.95],
        vec![-0.5, -0.25, -0.2],
        vec![0.7, -0.5, 0.2],
    ])
    .unwrap()
}

fn deterministic_nd() -> Outcome {
    let start = Instant::now();
    let truth = hand_truth();
    let beta = 0.25;
    let accuracy = 0.05;
    let options = NdOptions {
        schedule: Schedule::Theory,
        threads: threads(),
        glue_fraction: DEFAULT_GLUE_FRACTION,
    };
    let measured_beta = beta_of(&truth).unwrap().beta;
    match recover_nd_deterministic(&truth, beta, accuracy, &mut seeded_rng(90), &options) {
        Ok(result) => {
            let elapsed = start.elapsed();
            outcome(
                result.matched_error <= accuracy && elapsed < Duration::from_secs(30),
                format!(
                    "β of truth {measured_beta:.6}, ∞-norm matched error {:.4}, γ {:.5}, m {}, k {}, {elapsed:.2?}",
                    result.matched_error, result.config.gamma, result.config.moments, result.config.iterations
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn randomized_nd() -> Outcome {
    let (n, d) = (4, 3);
    let separation = 0.5;
    let kappa = 0.2;
    let accuracy = 0.05;
    let options = NdOptions {
        schedule: Schedule::Theory,
        threads: threads(),
        glue_fraction: DEFAULT_GLUE_FRACTION,
    };
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 1..=5u64 {
        let start = Instant::now();
        let mut rng = seeded_rng(1000 + seed);
        let truth = sample_sphere_cloud(n, d, separation, &mut rng).unwrap();
        match recover_nd_randomized(&truth, separation, kappa, accuracy, BetaSource::Exact, &mut rng, &options) {
            Ok(r) => {
                let elapsed = start.elapsed();
                let ok = r.matched_error <= 10.0 * accuracy && elapsed < Duration::from_secs(60);
                pass &= ok;
                lines.push(format!(
                    "seed {seed}: err {:.4}, β {:.4}, ‖Z‖ {:.2}, ‖Z⁻¹‖ {:.2}, {elapsed:.1?}",
                    r.matched_error, r.beta, r.projection.spectral_norm, r.projection.inverse_norm
                ));
            }
            Err(e) => {
                pass = false;
                lines.push(format!("seed {seed}: {e}"));
            }
        }
    }
    outcome(pass, lines.join("; "))
}

fn proposition_one() -> Outcome {
    let mut rng = seeded_rng(110);
    let mut worst_identity: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=6);
        let (v, w) = (uniform(n, &mut rng), uniform(n, &mut rng));
        let loss = population_loss_analytic(&NeuronAngles::new(v.clone()).unwrap(), &NeuronAngles::new(w.clone()).unwrap()).unwrap();
        let energy = energy_distance(&measure(v), &measure(w)).unwrap().value;
        worst_identity = worst_identity.max((PI * loss - energy).abs());
    }

    let mut mc_failures = 0;
    let mut worst_z: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=6);
        let v = NeuronAngles::new(uniform(n, &mut rng)).unwrap();
        let w = NeuronAngles::new(uniform(n, &mut rng)).unwrap();
        let analytic = population_loss_analytic(&v, &w).unwrap();
        let est = population_loss_mc(&v, &w, 100_000, &mut rng).unwrap();
        let gap = (est.mean - analytic).abs();
        if gap > 4.0 * est.stderr {
            mc_failures += 1;
        }
        if est.stderr > 0.0 {
            worst_z = worst_z.max(gap / est.stderr);
        }
    }
    outcome(
        worst_identity <= 1e-10 && mc_failures == 0,
        format!(
            "max |πL - E| = {worst_identity:.2e}; Monte Carlo outside 4·stderr on {mc_failures}/20 trials (worst {worst_z:.1} stderr)"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("particle descent, five spikes, γ = 0.01", figure_one),
        ("one-step contraction of particle descent", contraction),
        ("moment recovery, n = 10, γ = 0.01, m = 200", figure_two),
        ("moment recovery under the theory schedule", theorem_two),
        ("truncated sign series error bounds", gibbs_bounds),
        ("feature identity and linearity", feature_identity),
        ("sorting transport versus brute force", transport_oracle),
        ("subgradient versus finite differences", finite_differences),
        ("deterministic recovery in three dimensions", deterministic_nd),
        ("randomized recovery on the sphere", randomized_nd),
        ("network loss versus energy distance", proposition_one),
    ];
    let mut failed = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| outcome(false, "panicked"));
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {}",
            idx + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
