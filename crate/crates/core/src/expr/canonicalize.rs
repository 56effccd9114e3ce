use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::ast::{small_integer, Ast, Func};
use super::canon::{CanonExpr, Trig};
use super::linform::{Rational, UnknownSym};
use super::ExprError;

/// Numeric parameter values (e.g. `c = 1/2`); constants not listed become
/// unknown symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    pub params: BTreeMap<String, Rational>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn with(mut self, name: &str, value: Rational) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsPolicy {
    /// ε² and higher powers are an error.
    Strict,
    /// ε² and higher powers are dropped.
    Truncate,
}

/// Canonical form of `e`; fails with `NotCanonical` outside the fragment.
pub fn canonicalize(e: &Ast, bindings: &Bindings) -> Result<CanonExpr, ExprError> {
    canonicalize_with(e, bindings, EpsPolicy::Strict)
}

pub fn canonicalize_truncated(e: &Ast, bindings: &Bindings) -> Result<CanonExpr, ExprError> {
    canonicalize_with(e, bindings, EpsPolicy::Truncate)
}

pub fn canonicalize_with(
    e: &Ast,
    bindings: &Bindings,
    policy: EpsPolicy,
) -> Result<CanonExpr, ExprError> {
    Canonicalizer { bindings, policy }.run(e)
}

struct Canonicalizer<'a> {
    bindings: &'a Bindings,
    policy: EpsPolicy,
}

fn not_canonical(e: &Ast, reason: &str) -> ExprError {
    ExprError::NotCanonical {
        subtree: e.to_string(),
        reason: reason.to_string(),
    }
}

impl Canonicalizer<'_> {
    fn mul(&self, a: &CanonExpr, b: &CanonExpr, at: &Ast) -> Result<CanonExpr, ExprError> {
        let r = match self.policy {
            EpsPolicy::Strict => a.mul_strict(b),
            EpsPolicy::Truncate => a.mul(b),
        };
        r.map_err(|err| match err {
            ExprError::EpsOverflow => not_canonical(at, "eps^2 term before truncation"),
            other => other,
        })
    }

    fn run(&self, e: &Ast) -> Result<CanonExpr, ExprError> {
        match e {
            Ast::Num(r) => Ok(CanonExpr::constant(r.clone())),
            Ast::Const(name) => {
                if let Some(v) = self.bindings.params.get(name) {
                    Ok(CanonExpr::constant(v.clone()))
                } else if name == "pi" {
                    Err(not_canonical(e, "irrational constant"))
                } else {
                    Ok(CanonExpr::unknown(UnknownSym::new(name.clone())))
                }
            }
            Ast::Indep => Ok(CanonExpr::x()),
            Ast::Jet(j) => Ok(CanonExpr::jet(*j)),
            Ast::Eps => Ok(CanonExpr::eps()),
            Ast::Neg(a) => Ok(self.run(a)?.neg()),
            Ast::Add(a, b) => Ok(self.run(a)?.add(&self.run(b)?)),
            Ast::Sub(a, b) => Ok(self.run(a)?.sub(&self.run(b)?)),
            Ast::Mul(a, b) => self.mul(&self.run(a)?, &self.run(b)?, e),
            Ast::Div(a, b) => {
                let num = self.run(a)?;
                let den = self.run(b)?;
                match den.as_constant() {
                    Some(d) if !d.is_zero() => Ok(num.scale(&d.recip())),
                    Some(_) => Err(ExprError::Domain(format!("division by zero in {e}"))),
                    None => Err(not_canonical(e, "division by a non-constant")),
                }
            }
            Ast::Pow(a, b) => {
                let base = self.run(a)?;
                let exp = self
                    .run(b)?
                    .as_constant()
                    .and_then(|r| small_integer(&r))
                    .ok_or_else(|| not_canonical(e, "exponent is not an integer constant"))?;
                if exp >= 0 {
                    let mut acc = CanonExpr::one();
                    for _ in 0..exp {
                        acc = self.mul(&acc, &base, e)?;
                    }
                    return Ok(acc);
                }
                match base.as_constant() {
                    Some(r) if !r.is_zero() => {
                        let inv = r.recip();
                        Ok(CanonExpr::constant(num_traits::pow(inv, (-exp) as usize)))
                    }
                    Some(_) => Err(ExprError::Domain(format!(
                        "zero to a negative power in {e}"
                    ))),
                    None => Err(not_canonical(e, "negative power of a non-constant")),
                }
            }
            Ast::Call(func, a) => {
                let arg = self.run(a)?;
                match func {
                    Func::Sqrt => {
                        let r = arg
                            .as_constant()
                            .ok_or_else(|| not_canonical(e, "sqrt of a non-constant"))?;
                        exact_sqrt(&r)
                            .ok_or_else(|| not_canonical(e, "sqrt of a non-square rational"))
                    }
                    Func::Sin | Func::Cos => {
                        let (sign, m) = integer_frequency(&arg).ok_or_else(|| {
                            not_canonical(e, "frequency is not an integer multiple of x")
                        })?;
                        Ok(match (func, m) {
                            (Func::Sin, 0) => CanonExpr::zero(),
                            (Func::Cos, 0) => CanonExpr::one(),
                            (Func::Sin, m) => CanonExpr::trig(Trig::Sin(m))
                                .scale(&Rational::from_integer(sign.into())),
                            (_, m) => CanonExpr::trig(Trig::Cos(m)),
                        })
                    }
                }
            }
        }
    }
}

/// `arg = k·x` with integer `k`; returns `(sign(k), |k|)`, with `(1, 0)` for `arg = 0`.
fn integer_frequency(arg: &CanonExpr) -> Option<(i64, u32)> {
    if arg.is_zero() {
        return Some((1, 0));
    }
    if arg.len() != 1 {
        return None;
    }
    let (m, c) = arg.terms().next()?;
    if m.xpow != 1 || m.trig != Trig::None || !m.jet.is_empty() || m.eps != 0 {
        return None;
    }
    let k = small_integer(c.as_constant()?)?;
    let mag = u32::try_from(k.unsigned_abs()).ok()?;
    Some((k.signum(), mag))
}

fn exact_sqrt(r: &Rational) -> Option<CanonExpr> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(CanonExpr::constant(Rational::new(n, d)))
    } else {
        None
    }
}
