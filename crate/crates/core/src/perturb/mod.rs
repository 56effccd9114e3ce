//! First-order perturbation series `y = y0 + εy1`: order splitting,
//! constant-coefficient forced solves, initial-value fitting and residual
//! checks.

mod bbm;
mod forced;
mod series;
mod split;

use thiserror::Error;

use crate::expr::ExprError;

pub use bbm::{bbm_first_integral, bbm_harmonic_series, bbm_printed_series, BbmHarmonic};
pub use forced::{solve_forced, ForcedLinearODE, RootStructure};
pub use series::{
    apply_ics, invariant_solution, solve_ivp, verify_series, ConstValue, InitialCondition, NumericGrid,
    SeriesResidual, SeriesSolution, VerifyMode,
};
pub use split::{split_orders, OrderSplit};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PerturbError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("characteristic polynomial has roots outside {{0, ±i·m}}: {0}")]
    UnsupportedRoots(String),
    #[error("forcing must be a function of x only: {0}")]
    InvalidForcing(String),
    #[error("zeta0 must have the form y - h(x): {0}")]
    NotAffineInY(String),
    #[error("initial conditions are inconsistent at order eps^{order}")]
    Inconsistent { order: u8 },
    #[error("initial conditions leave {free:?} undetermined at order eps^{order}")]
    Underdetermined { order: u8, free: Vec<String> },
    #[error("expected {expected} initial conditions, got {got}")]
    IcCount { expected: usize, got: usize },
    #[error("invalid initial condition: {0}")]
    InvalidIc(String),
    #[error("unsupported equation: {0}")]
    UnsupportedEquation(String),
    #[error("parameter outside the admissible range: {0}")]
    OutOfRange(String),
    #[error("non-finite residual at x = {0}")]
    NonFinite(f64),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}
