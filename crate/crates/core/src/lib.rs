//! Repeated games with memory-n stochastic strategies.
//!
//! The crate builds the Markov chain over histories of joint states, solves
//! for its stationary distribution (exactly or by simulation), and analyses
//! strategies through their Press–Dyson tensors: checking that they average
//! to zero, detecting zero-determinant strategies over the payoff-product
//! basis, and constructing strategies that enforce a given relation.

pub mod catalog;
pub mod error;
pub mod feasible;
pub mod game;
pub mod history;
pub mod markov;
pub mod relation;
pub mod simulate;
pub mod strategy;
pub mod sweep;
pub mod zd;

pub use error::{Result, ZdError};
pub use feasible::{feasible_from_coefficients, feasible_strategy_for, Feasibility, FeasibleStrategy, ScaleInterval};
pub use game::{GameSpec, PdGame};
pub use history::{HistoryLayout, StateLayout};
pub use markov::{
    align_memory, build_kernel, stationary_exact, stationary_power, Method, MultiplicityReport, StationaryDistribution,
    StationaryOutcome, TransitionKernel,
};
pub use relation::{correlation, correlations, verify_relation, CorrelationSet, PayoffRelation};
pub use simulate::{simulate, InitialCondition, Trajectory, TrajectoryStats};
pub use strategy::{validate_strategy, validate_table, Strategy, StrategyFile, ValidationReport, Violation};
pub use sweep::{q_grid, sweep_point, PointSource, SweepMode, SweepPoint, SweepSettings};
pub use zd::{akin_residual, detect_zd, detect_zd_memory_n, press_dyson, PressDysonTensor, ZdCertificate, ZdOutcome};
