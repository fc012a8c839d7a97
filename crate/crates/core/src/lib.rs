//! Rate maximization for fluid-antenna (movable-antenna) MIMO links driven by
//! statistical channel state information.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: scenario parameters, far-field geometry, field-response
//!   vectors/matrices, channel assembly and the deterministic (Jensen) upper
//!   bound on the ergodic rate.
//! - [`optimizer`]: closed-form transmit covariance, per-antenna position
//!   subproblems solved by minorization-maximization, and the alternating
//!   outer loop.
//! - [`evaluation`]: Monte Carlo ergodic rate, baseline layouts (FPA/RFA) and
//!   gain computations.
//! - [`experiments`]: config parsing and the convergence / SNR / region
//!   sweeps that write CSV.
//!
//! All rates are in bits/s/Hz (base-2 logarithm).

pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod rng;

pub use error::{Error, Result};
pub use evaluation::{
    build_baseline_layout, ergodic_rate_mc, relative_gain, sample_path_matrix, BaselineKind,
    ErgodicRateEstimate,
};
pub use model::{
    assemble_channel, field_matrices, propagation_delta, rx_field_vector, tx_field_vector,
    upper_bound_rate, AntennaLayout, PathAngles, PathResponseMatrix, Point, Side, SystemParams,
    TransmitCovariance,
};
pub use optimizer::{alternate_optimize, update_covariance, SolveTrace, SolverConfig};
