//! Shared inputs for the criterion benches under `benches/`.

use gmwmx::simulation::simulate_series;
use gmwmx::{build_design_matrix, DesignMatrix, FunctionalSpec, ScenarioConfig, StochasticModel};

/// Noise model of the nominal scenario.
pub fn nominal_noise() -> StochasticModel {
    StochasticModel::power_law(10.0, 0.4).plus(&StochasticModel::white(15.0))
}

/// One nominal replication of length `n` with its estimation design.
pub fn nominal_series(n: usize) -> (Vec<f64>, DesignMatrix) {
    let cfg = ScenarioConfig {
        n: Some(n),
        ..ScenarioConfig::default()
    };
    let (ts, _) = simulate_series(&cfg, 0).expect("nominal scenario simulates");
    let spec = FunctionalSpec::linear(cfg.start_epoch).with_harmonics(&cfg.harmonics);
    let design = build_design_matrix(&ts.epochs, &spec).expect("design builds");
    (ts.values, design)
}
