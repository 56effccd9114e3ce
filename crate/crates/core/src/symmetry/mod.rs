//! Exact and first-order approximate symmetries of scalar ODEs
//! `y^(n) = f0 + ε f1`.
//!
//! Every determining equation goes through the evolutionary form
//! `ζ = η − y'ξ`: the generator is a symmetry iff
//! `Dⁿζ − Σⱼ ∂f/∂y^(j) · Dʲζ` vanishes on solutions, modulo ε².

mod ansatz;
mod classify;
mod determining;
mod generator;

use thiserror::Error;

use crate::expr::ExprError;
use crate::linsolve::LinsolveError;

pub use ansatz::{instantiate as instantiate_ansatz, AnsatzSpec};
pub use classify::{
    classify_stability, counterpart_source, generator_coordinates, linearized_operator,
    local_counterpart, solve_approx, solve_exact, ApproxSymmetries, StabilityReport, StableEntry,
};
pub use determining::{check_symmetry, determining_expr, prolong, Residual};
pub use generator::{EvolutionaryGenerator, NamedGenerator, PerturbedODE, PointGenerator};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SymmetryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Linsolve(#[from] LinsolveError),
    #[error("invalid ODE: {0}")]
    InvalidOde(String),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("{0} is not an exact symmetry of the unperturbed equation")]
    NotExactSymmetry(String),
    #[error("no solution within the ansatz ({0}); enlarge the basis")]
    NoSolutionInAnsatz(String),
    #[error("supplied basis does not span the exact symmetry algebra: {0}")]
    BasisMismatch(String),
}
