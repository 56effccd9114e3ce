use crate::expr::CanonExpr;

use super::{EvolutionaryGenerator, PerturbedODE, PointGenerator, SymmetryError};

/// Evolutionary prolongation `ζ^(k) = D^k ζ`, unrestricted.
pub fn prolong(zeta: &CanonExpr, k: u32) -> CanonExpr {
    zeta.total_derivative_n(k)
}

/// `Dⁿζ − Σⱼ ∂f/∂y^(j) · Dʲζ` restricted to `y^(n) = f0 + εf1`, modulo ε².
///
/// Vanishes identically iff `g` is an (approximate) symmetry.
pub fn determining_expr(
    ode: &PerturbedODE,
    g: &EvolutionaryGenerator,
) -> Result<CanonExpr, SymmetryError> {
    let n = ode.order();
    let zeta = g.combined()?;
    let f = ode.rhs();
    let mut expr = prolong(&zeta, n);
    let mut dj = zeta.clone();
    for j in 0..n {
        let fj = f.partial_jet(j);
        if !fj.is_zero() {
            expr = expr.sub(&fj.mul(&dj)?);
        }
        dj = dj.total_derivative();
    }
    Ok(expr.substitute_jet(n, &f)?)
}

/// ε⁰ and ε¹ parts of the determining expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub order0: CanonExpr,
    pub order1: CanonExpr,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.order0.is_zero() && self.order1.is_zero()
    }
}

/// Either kind of generator, for [`check_symmetry`].
pub trait AsEvolutionary {
    fn evolutionary(&self) -> EvolutionaryGenerator;
}

impl AsEvolutionary for PointGenerator {
    fn evolutionary(&self) -> EvolutionaryGenerator {
        self.to_evolutionary()
    }
}

impl AsEvolutionary for EvolutionaryGenerator {
    fn evolutionary(&self) -> EvolutionaryGenerator {
        self.clone()
    }
}

pub fn check_symmetry(
    ode: &PerturbedODE,
    g: &impl AsEvolutionary,
) -> Result<Residual, SymmetryError> {
    let e = determining_expr(ode, &g.evolutionary())?;
    let (order0, order1) = e.split_eps();
    Ok(Residual { order0, order1 })
}
