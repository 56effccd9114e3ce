use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{canon_from_str, Bindings, CanonExpr, Rational, UnknownSym};

use super::SymmetryError;

/// Scalar ODE `y^(n) = f0 + ε f1`, with `f0`, `f1` in `(x, y, …, y^(n-1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedODE {
    order: u32,
    f0: CanonExpr,
    f1: CanonExpr,
}

impl PerturbedODE {
    pub fn new(order: u32, f0: CanonExpr, f1: CanonExpr) -> Result<Self, SymmetryError> {
        if order == 0 {
            return Err(SymmetryError::InvalidOde("order must be at least 1".into()));
        }
        for (name, f) in [("f0", &f0), ("f1", &f1)] {
            if f.has_eps() {
                return Err(SymmetryError::InvalidOde(format!(
                    "{name} must not contain eps"
                )));
            }
            if f.max_jet_order().is_some_and(|j| j >= order) {
                return Err(SymmetryError::InvalidOde(format!(
                    "{name} depends on a derivative of order >= {order}"
                )));
            }
            if f.has_unknowns() {
                return Err(SymmetryError::InvalidOde(format!(
                    "{name} contains undetermined constants: {f}"
                )));
            }
        }
        Ok(PerturbedODE { order, f0, f1 })
    }

    pub fn parse(
        order: u32,
        f0: &str,
        f1: &str,
        bindings: &Bindings,
    ) -> Result<Self, SymmetryError> {
        let f0 = canon_from_str(f0, bindings)?;
        let f1 = canon_from_str(f1, bindings)?;
        PerturbedODE::new(order, f0, f1)
    }

    pub fn unperturbed(order: u32, f0: CanonExpr) -> Result<Self, SymmetryError> {
        PerturbedODE::new(order, f0, CanonExpr::zero())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn f0(&self) -> &CanonExpr {
        &self.f0
    }

    pub fn f1(&self) -> &CanonExpr {
        &self.f1
    }

    /// `f0 + ε f1`.
    pub fn rhs(&self) -> CanonExpr {
        CanonExpr::from_eps_parts(&self.f0, &self.f1).expect("f0, f1 carry no unknowns")
    }

    /// The equation with `f1` dropped.
    pub fn to_unperturbed(&self) -> PerturbedODE {
        PerturbedODE {
            order: self.order,
            f0: self.f0.clone(),
            f1: CanonExpr::zero(),
        }
    }

    /// `y^(n) − f0 − ε f1` as a jet-space expression.
    pub fn equation(&self) -> CanonExpr {
        CanonExpr::jet(self.order).sub(&self.rhs())
    }
}

impl fmt::Display for PerturbedODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", crate::expr::jet_name(self.order), self.f0)?;
        if !self.f1.is_zero() {
            write!(f, " + eps*({})", self.f1)?;
        }
        Ok(())
    }
}

/// `X = (ξ0 + εξ1) ∂x + (η0 + εη1) ∂y` with components in `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PointGenerator {
    pub xi0: CanonExpr,
    pub eta0: CanonExpr,
    pub xi1: CanonExpr,
    pub eta1: CanonExpr,
}

fn check_point_component(name: &str, e: &CanonExpr) -> Result<(), SymmetryError> {
    if e.has_eps() {
        return Err(SymmetryError::InvalidGenerator(format!(
            "{name} must not contain eps"
        )));
    }
    if e.max_jet_order().is_some_and(|j| j > 0) {
        return Err(SymmetryError::InvalidGenerator(format!(
            "{name} of a point generator depends on derivatives"
        )));
    }
    Ok(())
}

impl PointGenerator {
    pub fn new(
        xi0: CanonExpr,
        eta0: CanonExpr,
        xi1: CanonExpr,
        eta1: CanonExpr,
    ) -> Result<Self, SymmetryError> {
        for (n, e) in [
            ("xi0", &xi0),
            ("eta0", &eta0),
            ("xi1", &xi1),
            ("eta1", &eta1),
        ] {
            check_point_component(n, e)?;
        }
        Ok(PointGenerator {
            xi0,
            eta0,
            xi1,
            eta1,
        })
    }

    /// Unperturbed generator `ξ ∂x + η ∂y`.
    pub fn exact(xi: CanonExpr, eta: CanonExpr) -> Result<Self, SymmetryError> {
        PointGenerator::new(xi, eta, CanonExpr::zero(), CanonExpr::zero())
    }

    pub fn parse(
        xi0: &str,
        eta0: &str,
        xi1: &str,
        eta1: &str,
        b: &Bindings,
    ) -> Result<Self, SymmetryError> {
        PointGenerator::new(
            canon_from_str(xi0, b)?,
            canon_from_str(eta0, b)?,
            canon_from_str(xi1, b)?,
            canon_from_str(eta1, b)?,
        )
    }

    pub fn components(&self) -> [&CanonExpr; 4] {
        [&self.xi0, &self.eta0, &self.xi1, &self.eta1]
    }

    pub fn zeroth_order(&self) -> PointGenerator {
        PointGenerator {
            xi0: self.xi0.clone(),
            eta0: self.eta0.clone(),
            xi1: CanonExpr::zero(),
            eta1: CanonExpr::zero(),
        }
    }

    pub fn has_zeroth_order(&self) -> bool {
        !self.xi0.is_zero() || !self.eta0.is_zero()
    }

    /// `ζk = ηk − y'·ξk`.
    pub fn to_evolutionary(&self) -> EvolutionaryGenerator {
        let yp = CanonExpr::jet(1);
        let z = |eta: &CanonExpr, xi: &CanonExpr| -> CanonExpr {
            eta.sub(&xi.mul(&yp).expect("y' carries no unknowns"))
        };
        EvolutionaryGenerator {
            zeta0: z(&self.eta0, &self.xi0),
            zeta1: z(&self.eta1, &self.xi1),
        }
    }

    pub fn add(&self, other: &PointGenerator) -> PointGenerator {
        PointGenerator {
            xi0: self.xi0.add(&other.xi0),
            eta0: self.eta0.add(&other.eta0),
            xi1: self.xi1.add(&other.xi1),
            eta1: self.eta1.add(&other.eta1),
        }
    }

    pub fn scale(&self, r: &Rational) -> PointGenerator {
        PointGenerator {
            xi0: self.xi0.scale(r),
            eta0: self.eta0.scale(r),
            xi1: self.xi1.scale(r),
            eta1: self.eta1.scale(r),
        }
    }

    pub fn substitute_unknowns(&self, values: &BTreeMap<UnknownSym, Rational>) -> PointGenerator {
        PointGenerator {
            xi0: self.xi0.substitute_unknowns(values),
            eta0: self.eta0.substitute_unknowns(values),
            xi1: self.xi1.substitute_unknowns(values),
            eta1: self.eta1.substitute_unknowns(values),
        }
    }

    /// Vector-field spelling, e.g. `(1)*d/dx + eps*((1)*d/dy)`.
    pub fn field_string(&self) -> String {
        fn part(xi: &CanonExpr, eta: &CanonExpr) -> String {
            let mut out = Vec::new();
            if !xi.is_zero() {
                out.push(format!("({xi})*d/dx"));
            }
            if !eta.is_zero() {
                out.push(format!("({eta})*d/dy"));
            }
            if out.is_empty() {
                "0".into()
            } else {
                out.join(" + ")
            }
        }
        let p0 = part(&self.xi0, &self.eta0);
        if self.xi1.is_zero() && self.eta1.is_zero() {
            p0
        } else {
            format!("{p0} + eps*({})", part(&self.xi1, &self.eta1))
        }
    }
}

impl fmt::Display for PointGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field_string())
    }
}

/// A point generator with a user-facing label (`X5`, ...).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGenerator {
    pub name: String,
    pub generator: PointGenerator,
}

/// `X̂ = (ζ0 + εζ1) ∂y` with components in `(x, y, …, y^(n-1))`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EvolutionaryGenerator {
    pub zeta0: CanonExpr,
    pub zeta1: CanonExpr,
}

impl EvolutionaryGenerator {
    pub fn new(zeta0: CanonExpr, zeta1: CanonExpr) -> Result<Self, SymmetryError> {
        for (n, e) in [("zeta0", &zeta0), ("zeta1", &zeta1)] {
            if e.has_eps() {
                return Err(SymmetryError::InvalidGenerator(format!(
                    "{n} must not contain eps"
                )));
            }
        }
        Ok(EvolutionaryGenerator { zeta0, zeta1 })
    }

    pub fn parse(zeta0: &str, zeta1: &str, b: &Bindings) -> Result<Self, SymmetryError> {
        EvolutionaryGenerator::new(canon_from_str(zeta0, b)?, canon_from_str(zeta1, b)?)
    }

    /// Checks the jet-order bound `< order` of the equation it is used with.
    pub fn check_order(&self, order: u32) -> Result<(), SymmetryError> {
        for (n, e) in [("zeta0", &self.zeta0), ("zeta1", &self.zeta1)] {
            if e.max_jet_order().is_some_and(|j| j >= order) {
                return Err(SymmetryError::InvalidGenerator(format!(
                    "{n} depends on derivatives of order >= {order}"
                )));
            }
        }
        Ok(())
    }

    /// `ζ0 + ε ζ1` as one expression.
    pub fn combined(&self) -> Result<CanonExpr, SymmetryError> {
        Ok(CanonExpr::from_eps_parts(&self.zeta0, &self.zeta1)?)
    }

    pub fn add(&self, other: &EvolutionaryGenerator) -> EvolutionaryGenerator {
        EvolutionaryGenerator {
            zeta0: self.zeta0.add(&other.zeta0),
            zeta1: self.zeta1.add(&other.zeta1),
        }
    }

    pub fn scale(&self, r: &Rational) -> EvolutionaryGenerator {
        EvolutionaryGenerator {
            zeta0: self.zeta0.scale(r),
            zeta1: self.zeta1.scale(r),
        }
    }
}

impl fmt::Display for EvolutionaryGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zeta1.is_zero() {
            write!(f, "({})*d/dy", self.zeta0)
        } else {
            write!(f, "({} + eps*({}))*d/dy", self.zeta0, self.zeta1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Bindings {
        Bindings::default()
    }

    #[test]
    fn evolutionary_form_examples() {
        let x8 = PointGenerator::parse("0", "y", "0", "0", &b()).unwrap();
        assert_eq!(
            x8.to_evolutionary().zeta0,
            canon_from_str("y", &b()).unwrap()
        );

        let x1 = PointGenerator::parse("-y*cos(x)", "y^2*sin(x)", "0", "0", &b()).unwrap();
        assert_eq!(
            x1.to_evolutionary().zeta0,
            canon_from_str("y^2*sin(x) + y*y'*cos(x)", &b()).unwrap()
        );

        let x5 = PointGenerator::parse("1", "0", "0", "0", &b()).unwrap();
        assert_eq!(
            x5.to_evolutionary().zeta0,
            canon_from_str("-y'", &b()).unwrap()
        );
    }

    #[test]
    fn point_generator_rejects_derivatives() {
        assert!(PointGenerator::parse("y'", "0", "0", "0", &b()).is_err());
        assert!(PointGenerator::parse("eps", "0", "0", "0", &b()).is_err());
    }

    #[test]
    fn ode_validation() {
        assert!(PerturbedODE::parse(2, "-y", "x + 1 + y^2", &b()).is_ok());
        assert!(PerturbedODE::parse(2, "-y''", "0", &b()).is_err());
        assert!(PerturbedODE::parse(2, "-y + eps", "0", &b()).is_err());
        assert!(PerturbedODE::parse(0, "y", "0", &b()).is_err());
    }
}
