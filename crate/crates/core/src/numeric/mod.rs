//! Dormand–Prince 5(4) integration of perturbed initial-value problems and
//! comparison against closed-form series.

mod compare;
mod dopri;
mod tableau;

use thiserror::Error;

use crate::expr::ExprError;
use crate::perturb::PerturbError;

pub use compare::{compare, fit_scaling, log_log_slope, scaling_exponent, ComparisonReport, ScalingFit, ScalingOptions};
pub use dopri::{integrate, integrate_fixed, AstOde, DenseStep, FnSystem, IvpSpec, OdeSystem, ScalarOde, Trajectory};
pub use tableau::{dopri5, ButcherTableau};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepSizeUnderflow { x: f64, h: f64 },
    #[error("non-finite state at x = {0}")]
    NonFiniteState(f64),
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("grid point {0} lies outside the integrated span")]
    GridOutsideSpan(f64),
}
