//! Statevector simulation and estimation toolkit for random-injection and
//! conditional-payoff quantum circuits.
//!
//! The crate is organized as four layers:
//! - [`sim`]: dense statevector engine (gates, marginals, seeded sampling);
//! - [`circuits`]: builders for the thread/injection/payoff circuits and the
//!   Grover operator;
//! - [`estimate`]: exact, shot-based, and maximum-likelihood amplitude
//!   estimators plus the classical oracles and convergence benchmark;
//! - [`payoff`]: classical PF/LM references, calibration modes, and error
//!   reports.

pub mod circuits;
pub mod error;
pub mod estimate;
pub mod payoff;
pub mod sim;

pub use circuits::{
    build_grover_operator, build_lm_rotations, build_payoff_circuit, build_pf_switch,
    build_random_injection, build_thread_function, build_thread_superposition, load_distribution,
    shift_distribution, BooleanThreadFunction, PriceDistribution, RegisterLayout, PRICE_LEVELS,
    STRIKE_BASE,
};
pub use error::{Error, Result};
pub use estimate::{
    convergence_experiment, exact_amplitude, grid_sampling_exact, log_log_slope,
    mc_random_injection, mlae_estimate, sampled_amplitude, ConvergencePoint, ConvergenceResult,
    MlaeConfig, MlaeEstimate,
};
pub use payoff::{
    compute_lm_reference, compute_pf_reference, flip_error_statistic, lm_weighted_average,
    payoff_report, pf_weighted_average, strike_report, value_map, CalibrationMode, EstimateReport,
    EstimationMethod, PayoffParams,
};
pub use sim::{Circuit, GateKind, GateOp, Histogram, StateVector, MAX_QUBITS};
