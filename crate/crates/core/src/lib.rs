//! Joint estimation of trajectory and correlated-noise parameters in daily
//! GNSS position series by wavelet-variance moment matching (GMWMX).

pub mod error;
pub mod estimators;
pub mod functional;
pub mod io;
pub mod likelihood;
pub mod linalg;
pub mod optim;
pub mod simulation;
pub mod special;
pub mod stochastic;
pub mod wavelet;

pub use error::{Error, Result};
pub use functional::{build_design_matrix, evaluate_mean, DesignMatrix, FunctionalSpec};
pub use io::{FileFormat, ParseError, PosComponent, TimeSeries, Units};
pub use stochastic::{Component, ComponentKind, ModelFamily, StochasticModel};
pub use wavelet::{OmegaKind, WvEstimate};
pub use estimators::{
    confidence_interval, gls, gmwm_fit, gmwmx, ols, EstimationResult, GmwmFit, GmwmOptions, Method, Timing,
};
pub use likelihood::{efficiency_gap, gaussian_loglik, mle_estimate, mle_fit, LikelihoodEngine, MleFit, MleOptions};
pub use simulation::{run_monte_carlo, simulate_series, McRun, McSummary, ScenarioConfig, SimMethod};
