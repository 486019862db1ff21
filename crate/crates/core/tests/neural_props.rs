use std::f64::consts::PI;

use proptest::prelude::*;
use sparse_recover::energy::{energy_distance, particle_gd};
use sparse_recover::measures::SparseMeasure1D;
use sparse_recover::neural::{
    arccos_kernel, arccos_kernel_geometric, population_loss_analytic, population_loss_mc, NeuronAngles,
};
use sparse_recover::seeded_rng;

fn angles(v: &[f64]) -> NeuronAngles {
    NeuronAngles::new(v.to_vec()).unwrap()
}

fn measure(v: &[f64]) -> SparseMeasure1D {
    SparseMeasure1D::new(v.to_vec()).unwrap()
}

fn loss(v: &[f64], w: &[f64]) -> f64 {
    population_loss_analytic(&angles(v), &angles(w)).unwrap()
}

fn configs(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(0.0..=PI, n), prop::collection::vec(0.0..=PI, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scaled_loss_is_the_energy_distance((v, w) in configs(6)) {
        let energy = energy_distance(&measure(&v), &measure(&w)).unwrap().value;
        prop_assert!((PI * loss(&v, &w) - energy).abs() <= 1e-10);
    }

    #[test]
    fn kernel_forms_agree(theta in 0.0..=PI, omega in 0.0..=PI) {
        prop_assert!((arccos_kernel(theta, omega) - arccos_kernel_geometric(theta, omega)).abs() <= 1e-7);
    }

    /// Along descent the loss tracks the energy distance, which is at most
    /// twice the W∞ distance, so it ends below `2γ/π`.
    #[test]
    fn descent_on_angles_drives_the_loss_down((v, w) in configs(6), coarse in any::<bool>()) {
        prop_assume!(v.len() == 1 || SparseMeasure1D::new(v.clone()).unwrap().is_distinct());
        let gamma = if coarse { 0.05 } else { 0.01 };
        let traj = particle_gd(&measure(&v), &measure(&w), gamma, 2000).unwrap();
        for snap in &traj.snapshots {
            let clamped: Vec<f64> = snap.positions.iter().map(|x| x.clamp(0.0, PI)).collect();
            let l = loss(&clamped, &w);
            let e = energy_distance(&measure(&snap.positions), &measure(&w)).unwrap().value;
            prop_assert!(l <= 2.0 * snap.winf.unwrap() / PI + 1e-12);
            if clamped == snap.positions {
                prop_assert!((PI * l - e).abs() <= 1e-10);
            }
        }
        let last = traj.last().unwrap();
        let clamped: Vec<f64> = last.positions.iter().map(|x| x.clamp(0.0, PI)).collect();
        prop_assert!(loss(&clamped, &w) <= 2.0 * gamma / PI + 1e-12);
    }
}

#[test]
fn loss_can_rise_during_descent() {
    let (v, w) = ([2.3, 3.0], [1.8, 1.9]);
    let traj = particle_gd(&measure(&v), &measure(&w), 0.25, 100).unwrap();
    let losses: Vec<f64> = traj.snapshots.iter().map(|s| loss(&s.positions, &w)).collect();
    assert!(losses.windows(2).any(|p| p[1] > p[0] + 1e-3), "{losses:?}");
    assert!(losses.last().unwrap() < &losses[0]);
}

#[test]
fn monte_carlo_estimates_half_the_loss() {
    let mut rng = seeded_rng(2024);
    for trial in 0..20 {
        let n = 1 + trial % 6;
        let v: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.0..=PI)).collect();
        let w: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.0..=PI)).collect();
        let estimate = population_loss_mc(&angles(&v), &angles(&w), 100_000, &mut rng).unwrap();
        let half = loss(&v, &w) / 2.0;
        assert!(
            (estimate.mean - half).abs() <= 4.0 * estimate.stderr + 1e-12,
            "trial {trial}: mean {} vs {half} (stderr {})",
            estimate.mean,
            estimate.stderr
        );
    }
}
