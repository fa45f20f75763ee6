use gslab::classify::{classify_function, Verdict};
use gslab::exactform::{
    finite_n_limit_convergence, nu_f, number_expectations, poisson_limit, resolvent_expectation, LimitQuery, ResolventQuery,
};
use gslab::fit::log_spaced_counts;
use gslab::groundstate::{GroundStateModel, RegionSpec, SampledWaveFunction, ScalingFamily};
use proptest::prelude::*;
use statrs::distribution::{Binomial, Discrete, Poisson};

fn gaussian() -> GroundStateModel<f64> {
    GroundStateModel::gaussian(1.0, 1, 1.0).unwrap()
}

#[test]
fn agrees_with_statrs_binomial() {
    for &n in &[1u64, 7, 50, 400, 3000] {
        for &p in &[0.01, 0.3, 0.5, 0.92] {
            for &mu in &[0.1, 1.0, 25.0] {
                let dist = Binomial::new(p, n).unwrap();
                let oracle: f64 = (0..=n).map(|k| dist.pmf(k) / (mu + k as f64)).sum();
                let v = resolvent_expectation(&ResolventQuery::new(n, p, mu).unwrap()).unwrap();
                // statrs builds the pmf from log-gamma, good to about 1e-12 relative
                assert!((v - oracle).abs() <= 1e-10 * oracle, "n={n} p={p} mu={mu}: {v} vs {oracle}");
            }
        }
    }
    // 50-digit reference for the worst case above
    let v: f64 = resolvent_expectation(&ResolventQuery::new(3000, 0.01, 0.1).unwrap()).unwrap();
    assert!((v - 0.034391489770838772982).abs() <= 1e-14 * v);
}

#[test]
fn poisson_mean_is_nu() {
    for &nu in &[0.3, 1.0, 7.5, 40.0, 150.0] {
        let dist = Poisson::new(nu).unwrap();
        let top = (nu + 40.0 * nu.sqrt() + 40.0) as u64;
        let mean: f64 = (0..=top).map(|k| k as f64 * dist.pmf(k)).sum();
        assert!((mean - nu).abs() <= 1e-10 * nu.max(1.0), "nu = {nu}");
        let oracle: f64 = (0..=top).map(|k| dist.pmf(k) / (2.0 + k as f64)).sum();
        let r = poisson_limit(&LimitQuery::new(nu, 2.0).unwrap()).unwrap();
        assert!((r.series - oracle).abs() <= 1e-12);
    }
}

#[test]
fn homogeneous_condensate_density() {
    let g = gaussian();
    let g0 = g.value_at_origin();
    for &(a, b) in &[(-1.0, 1.0), (0.0, 0.5), (-3.0, 2.0)] {
        for &sigma in &[0.1, 1.0, 3.0] {
            let o = RegionSpec::interval(a, b).unwrap();
            let f = SampledWaveFunction::indicator(o.clone(), 401).unwrap();
            let want = sigma * g0 * g0 * o.volume();
            assert!((nu_f(&g, &f, sigma) - want).abs() <= 1e-8 * want.max(1.0));
        }
    }
}

#[test]
fn regular_functions_converge_to_inverse_mu() {
    let g = gaussian();
    let family = ScalingFamily::new(1.0, 1.0).unwrap();
    let o = RegionSpec::interval(-1.0, 1.0).unwrap();
    let odd = SampledWaveFunction::from_real_fn(o, 401, |x: &[f64]| x[0]).unwrap().normalized().unwrap();
    let grid = log_spaced_counts(10, 10_000, 13);
    assert_eq!(classify_function(&g, &odd, &family, &grid).unwrap().verdict, Verdict::Regular);
    for row in finite_n_limit_convergence(&g, &odd, &family, 2.0, &[10, 1000, 100_000]).unwrap() {
        assert!((row.limit - 0.5).abs() < 1e-15 && row.gap < 1e-15);
    }
}

#[test]
fn singular_functions_drive_the_resolvent_to_zero() {
    let g = gaussian();
    let family = ScalingFamily::new(0.01, 3.0).unwrap();
    let f = SampledWaveFunction::indicator(RegionSpec::interval(0.0, 1.0).unwrap(), 201).unwrap();
    let report = classify_function(&g, &f, &family, &log_spaced_counts(10, 100_000, 13)).unwrap();
    assert_eq!(report.verdict, Verdict::SingularOverlap);
    let values: Vec<f64> = report
        .nu_sequence
        .iter()
        .map(|r| resolvent_expectation(&ResolventQuery::new(r.n, r.p, 1.0).unwrap()).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert!(values[values.len() - 1] < 0.2 * values[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn value_lies_in_range(n in 0u64..200_000, p in 0.0f64..=1.0, mu in 1e-3f64..1e3) {
        let v = resolvent_expectation(&ResolventQuery::new(n, p, mu).unwrap()).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!(mu * v <= 1.0 + 1e-14);
    }

    #[test]
    fn parts_add_up(n in 1u64..10_000, lambda in 1e-3f64..2.0, a in -2.0f64..0.0, w in 0.1f64..2.0) {
        let o = RegionSpec::interval(a, a + w).unwrap();
        let e = number_expectations(&gaussian(), n, lambda, &o).unwrap();
        prop_assert_eq!(e.total, e.condensate + e.regular);
    }
}
