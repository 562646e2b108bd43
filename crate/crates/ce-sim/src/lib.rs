//! Experiment harness for the constant-envelope precoder in `ce-core`:
//! seeded Rayleigh channel and symbol generation, Monte-Carlo rate
//! bounds, symbol-energy optimization, minimum-power bisection, and the
//! configuration-driven sweep runner behind the `ce-sim` binary.

pub mod channel;
pub mod config;
pub mod rate;
pub mod selfcheck;
pub mod sweep;

pub use channel::{sample_channel, sample_symbols, streams, SeedSpec};
pub use config::{parse_config, ConfigError, ExperimentSpec, SweepMode};
pub use rate::{
    db_to_linear, estimate_mui_covariance, linear_to_db, rate_from_eigenvalues, rate_lower_bound,
    MuiCovariance, RateConfig, RateError, RateEvaluator,
};
pub use sweep::{csv_body, render_csv, run_sweep, SweepRow, CSV_HEADER};
