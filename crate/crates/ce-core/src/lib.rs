//! Constant-envelope (CE) multi-user MIMO downlink precoding.
//!
//! Each base-station antenna transmits a unit-magnitude complex sample
//! `e^{jθ_i[t]}`; only the phase angles carry the precoded waveform. This
//! crate holds the frequency-selective signal model (received signal,
//! residual objective, multi-user interference) and the cyclic
//! coordinate-descent solver that picks the phase angles under a bound
//! `|θ_i[t] − θ_i[t−1]| ≤ απ` on the phase change between consecutive
//! channel uses.
//!
//! The crate is `no_std` (with `alloc`); IO, channel sampling and the
//! Monte-Carlo rate machinery live in the companion `ce-sim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod model;
pub mod solver;

pub use model::{
    mui, noiseless_rx, objective, ChannelRealization, Complex64, Dimensions, ModelError,
    PhaseSchedule, PrecoderConfig, ResidualState, SymbolFrame,
};
pub use solver::{
    apply_update, coordinate_update, coordinate_update_with_rule, init_residuals, init_schedule,
    residual_drift, solve, SolveReport, UpdateRule,
};
