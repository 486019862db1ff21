use std::f64::consts::PI;

use proptest::prelude::*;
use sparse_recover::fourier::{
    approx_cross_subgradient, approx_sign, feature_count_for_order, gibbs_error_bound, moments,
    sign_series_coeffs, truncated_sign, CrossTermEvaluator, NEAR_ORIGIN_BOUND,
};
use sparse_recover::measures::SparseMeasure1D;

const GRID: usize = 10_000;

fn sign_error(delta: f64, order: usize) -> f64 {
    (truncated_sign(delta, feature_count_for_order(order)) - delta.signum()).abs()
}

fn grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..=GRID).map(move |i| lo + (hi - lo) * i as f64 / GRID as f64)
}

/// The series is symmetric about `π/2`, so the bound only has room to hold
/// away from `±π`; this window keeps a `0.1` margin.
#[test]
fn gibbs_bound_holds_away_from_the_endpoints() {
    for order in [16, 64, 256] {
        for delta in grid(-(PI - 0.1), PI - 0.1).filter(|d| d.abs() >= 1e-3) {
            let err = sign_error(delta, order);
            let bound = gibbs_error_bound(delta, order);
            assert!(err <= bound, "m_B {order}, Δ {delta}: {err} > {bound}");
        }
    }
}

#[test]
fn gibbs_bound_fails_next_to_pi() {
    for order in [16, 64, 256] {
        let delta = PI - 1e-3;
        let err = sign_error(delta, order);
        assert!(err > gibbs_error_bound(delta, order), "m_B {order}: {err}");
        let mirrored = truncated_sign(PI - delta, feature_count_for_order(order));
        assert!((truncated_sign(delta, feature_count_for_order(order)) - mirrored).abs() < 1e-9);
    }
}

#[test]
fn series_is_bounded_near_the_origin() {
    for order in [13, 20, 50] {
        let worst = grid(-PI / 4.0, PI / 4.0)
            .map(|d| truncated_sign(d, feature_count_for_order(order)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= NEAR_ORIGIN_BOUND, "m_B {order}: {worst}");
        assert!(worst > 1.0);
    }
}

fn spikes(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=PI, 1..=max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn feature_inner_product_is_truncated_sign(v in 0.0..=PI, w in 0.0..=PI, m in 1usize..300) {
        let coeffs = sign_series_coeffs(m).unwrap();
        let lhs = approx_sign(v, w, &coeffs);
        prop_assert!((lhs - truncated_sign(v - w, m)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bound_holds_at_random_points(delta in 1e-3..(PI - 0.1), negate in any::<bool>(), pick in 0usize..3) {
        let order = [16, 64, 256][pick];
        let delta = if negate { -delta } else { delta };
        prop_assert!(sign_error(delta, order) <= gibbs_error_bound(delta, order));
    }

    #[test]
    fn cross_term_is_linear_in_the_measure(support in spikes(8), v in 0.0..=PI, m in 1usize..400) {
        let mu = SparseMeasure1D::new(support.clone()).unwrap();
        let coeffs = sign_series_coeffs(m).unwrap();
        let phimu = moments(&mu, m).unwrap();
        let total = approx_cross_subgradient(v, &phimu, &coeffs).unwrap();
        let by_spike: f64 = support.iter().map(|&w| approx_sign(v, w, &coeffs)).sum();
        prop_assert!((total - by_spike).abs() <= 1e-10, "{} vs {}", total, by_spike);

        let fast = CrossTermEvaluator::new(&phimu, &coeffs).unwrap();
        prop_assert!((fast.eval(v) - total).abs() <= 1e-10);
    }
}
