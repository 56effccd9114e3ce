//! Canonical expression algebra over jet variables.
//!
//! Expressions enter as text, become an [`Ast`], and are brought into the
//! canonical fragment ([`CanonExpr`]) whenever they consist of rational
//! constants, declared unknowns, integer powers of `x` and of jet variables,
//! `sin`/`cos` of integer multiples of `x`, and at most one power of `ε`.

mod ast;
mod canon;
mod canonicalize;
mod linform;
mod parse;

use thiserror::Error;

pub use ast::{Ast, Env, Func};
pub use canon::{coeff_f64, jet_name, CanonExpr, EvalPoint, Monomial, Trig};
pub use canonicalize::{
    canonicalize, canonicalize_truncated, canonicalize_with, Bindings, EpsPolicy,
};
pub use linform::{
    fmt_rational, int, parse_rational, rat, rational_to_f64, LinForm, Rational, UnknownSym,
};
pub use parse::{parse, parse_in, Scope};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("`{subtree}` is outside the canonical fragment: {reason}")]
    NotCanonical { subtree: String, reason: String },
    #[error("product of two expressions that both carry unknown coefficients")]
    NonlinearUnknowns,
    #[error("eps^2 term produced where truncation was not requested")]
    EpsOverflow,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no value supplied for `{0}`")]
    MissingValue(String),
    #[error("cannot differentiate `{0}`")]
    NotDifferentiable(String),
}

/// Parses and canonicalizes in one step.
pub fn canon_from_str(text: &str, bindings: &Bindings) -> Result<CanonExpr, ExprError> {
    canonicalize(&parse(text)?, bindings)
}

/// Parses with ε² truncation enabled.
pub fn canon_from_str_truncated(text: &str, bindings: &Bindings) -> Result<CanonExpr, ExprError> {
    canonicalize_truncated(&parse(text)?, bindings)
}
