//! Shared fixtures for the criterion benches.

use ymqm_core::ModelParams;

/// Mid-range two-dimensional parameters, `z = 1/2`.
pub fn mid_params() -> ModelParams {
    ModelParams::n2(1.0, 1.0, 1.0, 1.0).expect("valid parameters")
}
