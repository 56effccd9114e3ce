use std::fmt;

use crate::expr::{CanonExpr, ExprError, Rational};
use crate::symmetry::PerturbedODE;

/// `G(y0 + εy1) = eq0(y0) + ε·eq1(y0, y1) + O(ε²)` with
/// `eq1 = Σ_j coeffs[j](y0)·y1^(j) + rest(y0)`.
///
/// `eq0`, `coeffs` and `rest` are written in the jet variables of `y0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderSplit {
    order: u32,
    eq0: CanonExpr,
    coeffs: Vec<CanonExpr>,
    rest: CanonExpr,
}

/// Splits `y^(n) − f0 − εf1`.
pub fn split_orders(ode: &PerturbedODE) -> OrderSplit {
    OrderSplit::from_relation(&ode.equation())
}

impl OrderSplit {
    /// Splits an arbitrary relation `G0 + εG1 = 0` (e.g. a first integral).
    pub fn from_relation(g: &CanonExpr) -> OrderSplit {
        let (g0, g1) = g.split_eps();
        let order = g0.max_jet_order().max(g1.max_jet_order()).unwrap_or(0);
        let coeffs = (0..=order).map(|j| g0.partial_jet(j)).collect();
        OrderSplit {
            order,
            eq0: g0,
            coeffs,
            rest: g1,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eq0(&self) -> &CanonExpr {
        &self.eq0
    }

    /// Coefficient of `y1^(j)` in `eq1`, for `j = 0..=order`.
    pub fn coeffs(&self) -> &[CanonExpr] {
        &self.coeffs
    }

    /// The `y1`-free part of `eq1`.
    pub fn rest(&self) -> &CanonExpr {
        &self.rest
    }

    /// `(a_0, …, a_n)` when `eq0 = Σ a_j y^(j)` with rational `a_j`.
    pub fn linear_constant_coefficients(&self) -> Option<Vec<Rational>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.as_constant()?);
        }
        let mut rebuilt = CanonExpr::zero();
        for (j, a) in out.iter().enumerate() {
            rebuilt = rebuilt.add(&CanonExpr::jet(j as u32).scale(a));
        }
        (rebuilt == self.eq0).then_some(out)
    }

    pub fn order0_residual(&self, y0: &CanonExpr) -> Result<CanonExpr, ExprError> {
        self.eq0.compose(y0)
    }

    pub fn order1_residual(&self, y0: &CanonExpr, y1: &CanonExpr) -> Result<CanonExpr, ExprError> {
        let mut acc = self.rest.compose(y0)?;
        let mut dj = y1.clone();
        for c in &self.coeffs {
            if !c.is_zero() {
                acc = acc.add(&c.compose(y0)?.mul(&dj)?);
            }
            dj = dj.partial_x();
        }
        Ok(acc)
    }

    /// `eq1` with `y1` jets renamed, e.g. `(2*y0')*y1' + (…)`.
    pub fn eq1_string(&self) -> String {
        let mut parts = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = rename(&crate::expr::jet_name(j as u32), "y1");
            match c.as_constant() {
                Some(r) if r == Rational::from_integer(1.into()) => parts.push(v),
                _ => parts.push(format!("({})*{v}", rename(&c.to_string(), "y0"))),
            }
        }
        if !self.rest.is_zero() {
            parts.push(format!("({})", rename(&self.rest.to_string(), "y0")));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn eq0_string(&self) -> String {
        rename(&self.eq0.to_string(), "y0")
    }
}

fn rename(printed: &str, name: &str) -> String {
    printed.replace('y', name)
}

impl fmt::Display for OrderSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0; {} = 0", self.eq0_string(), self.eq1_string())
    }
}
