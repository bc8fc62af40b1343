// Validation rejects NaN through negated comparisons such as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod error;
pub mod levy;
pub mod model;
pub mod normal;
pub mod phase_type;
pub mod quad;
pub mod ruin;
pub mod simulator;
pub mod verify;

pub use allocation::{
    allocate_asymptotic, allocate_gradient, allocate_sup_location, allocate_sup_location_with,
    allocate_time_of_ruin, allocate_time_of_ruin_with, AllocationMethod, AllocationReport,
    Diagnostics, Engine,
};
pub use error::{Result, RiskError};
pub use levy::{
    cramer_root, cramer_root_generic, levy_exponent_aggregate, tilt, LevyExponent, TiltedParams,
};
pub use model::*;
pub use ruin::{
    dynamic_var, expected_ruin_time_given_ruin, ruin_prob, ruin_prob_with, RuinMethod, RuinResult,
};
pub use simulator::{SimConfig, SimEstimate};
