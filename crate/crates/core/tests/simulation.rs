use gmwmx::simulation::{
    run_monte_carlo, simulate_noise, simulate_replication, simulate_series, ScenarioConfig, SimMethod,
};
use gmwmx::stochastic::StochasticModel;
use gmwmx::wavelet::{wv_of_series, OmegaKind};
use gmwmx::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn summaries_do_not_depend_on_worker_count() {
    let cfg = ScenarioConfig {
        name: "determinism".into(),
        years: 5.5,
        n_reps: 12,
        gap_fraction: 0.05,
        offsets_per_5yr: 1,
        methods: vec![SimMethod::Gmwmx1, SimMethod::Gmwmx2],
        ..Default::default()
    };
    let one = run_monte_carlo(&cfg, 1).unwrap();
    let many = run_monte_carlo(&cfg, 8).unwrap();
    assert_eq!(one.summary.to_json(), many.summary.to_json());
    assert_eq!(one.summary.to_csv(), many.summary.to_csv());
    assert_eq!(many.timing.workers, 8);
}

#[test]
fn generator_matches_theoretical_wavelet_variance() {
    let model = StochasticModel::power_law(10.0, 0.4).plus(&StochasticModel::white(15.0));
    let (n, reps, levels) = (1024, 400, 7);
    let mut sums = vec![0.0; levels];
    let mut squares = vec![0.0; levels];
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(rep);
        let x = simulate_noise(&model, n, &mut rng).unwrap();
        let nu = wv_of_series(&x, Some(levels), OmegaKind::Identity, 0.0).unwrap().nu_hat;
        for j in 0..levels {
            sums[j] += nu[j];
            squares[j] += nu[j] * nu[j];
        }
    }
    let truth = model.theoretical_wv(levels).unwrap();
    for j in 0..levels {
        let mean = sums[j] / reps as f64;
        let var = squares[j] / reps as f64 - mean * mean;
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - truth[j]).abs() <= 3.0 * se,
            "scale {}: mean {mean} truth {} se {se}",
            j + 1,
            truth[j]
        );
    }
}

#[test]
fn empirical_wv_converges_with_length() {
    let model = StochasticModel::power_law(10.0, 0.4).plus(&StochasticModel::white(15.0));
    let truth = model.theoretical_wv(4).unwrap();
    let reps = 40;
    let mut errors = Vec::new();
    for n in [1 << 10, 1 << 12, 1 << 14] {
        let mut total = 0.0;
        for rep in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + rep);
            let x = simulate_noise(&model, n, &mut rng).unwrap();
            let nu = wv_of_series(&x, Some(4), OmegaKind::Identity, 0.0).unwrap().nu_hat;
            total += nu.iter().zip(&truth).map(|(a, b)| ((a - b) / b).powi(2)).sum::<f64>();
        }
        errors.push(total / reps as f64);
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn oversized_grids_are_refused() {
    let cfg = ScenarioConfig {
        years: 50.0,
        ..Default::default()
    };
    assert!(matches!(simulate_series(&cfg, 0), Err(Error::SimulationCap { cap: 16384, .. })));
}

#[test]
fn gapped_replications_keep_span_and_offsets() {
    let cfg = ScenarioConfig {
        gap_fraction: 0.05,
        offsets_per_5yr: 1,
        ..Default::default()
    };
    let (full, truth) = simulate_series(&cfg, 7).unwrap();
    let (gapped, same) = simulate_replication(&cfg, 7).unwrap();
    assert_eq!(truth, same);
    assert_eq!(gapped.len(), full.len() - (0.05 * full.len() as f64).floor() as usize);
    assert_eq!(gapped.epochs[0], full.epochs[0]);
    assert_eq!(gapped.epochs.last(), full.epochs.last());
    assert_eq!(truth.offset_epochs.len(), 2);
    for (t, v) in gapped.epochs.iter().zip(&gapped.values) {
        let i = (t - full.epochs[0]) as usize;
        assert_eq!(*v, full.values[i]);
    }
}

#[test]
fn excessive_failures_abort_the_run() {
    // a white-only series is too short for three scales of a three-parameter
    // family, so every replication fails
    let cfg = ScenarioConfig {
        n: Some(8),
        n_reps: 4,
        ..Default::default()
    };
    assert!(matches!(
        run_monte_carlo(&cfg, 1),
        Err(Error::TooManyFailures { failed: 4, total: 4 })
    ));
}

#[test]
fn matern_noise_keeps_functional_coverage() {
    let cfg = ScenarioConfig {
        name: "matern".into(),
        n_reps: 500,
        noise: StochasticModel::matern(10.0, 0.1, 1.0).plus(&StochasticModel::white(15.0)),
        methods: vec![SimMethod::Gmwmx1],
        ..Default::default()
    };
    let run = run_monte_carlo(&cfg, 1).unwrap();
    let m = run.summary.method(SimMethod::Gmwmx1).unwrap();
    for name in ["a", "b", "c1", "d1"] {
        let p = m.param(name).unwrap();
        let cov = p.coverage.unwrap();
        assert!((0.92..=0.98).contains(&cov), "{name}: coverage {cov}");
    }
}
