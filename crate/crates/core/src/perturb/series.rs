use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;

use crate::expr::{
    canon_from_str, canonicalize, jet_name, parse, rational_to_f64, Ast, Bindings, CanonExpr, Env, EvalPoint,
    LinForm, Rational, Trig, UnknownSym,
};
use crate::linsolve::{self, LinearSystem, LinsolveError, Row};
use crate::symmetry::{EvolutionaryGenerator, PerturbedODE};

use super::forced::{solve_forced, ForcedLinearODE};
use super::split::{split_orders, OrderSplit};
use super::PerturbError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstValue {
    Value(Rational),
    Free,
}

/// `y0(x) + ε·y1(x)` with a table of named constants.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSolution {
    pub y0: Ast,
    pub y1: Ast,
    pub constants: BTreeMap<String, ConstValue>,
}

impl SeriesSolution {
    /// Unknown coefficients of the inputs become free constants.
    pub fn from_canon(y0: &CanonExpr, y1: &CanonExpr) -> SeriesSolution {
        let constants = y0
            .unknowns()
            .into_iter()
            .chain(y1.unknowns())
            .map(|u| (u.name().to_string(), ConstValue::Free))
            .collect();
        SeriesSolution {
            y0: y0.to_ast(),
            y1: y1.to_ast(),
            constants,
        }
    }

    pub fn parse(y0: &str, y1: &str) -> Result<SeriesSolution, PerturbError> {
        Ok(SeriesSolution {
            y0: parse(y0)?,
            y1: parse(y1)?,
            constants: BTreeMap::new(),
        })
    }

    /// Splits a single `… + eps*(…)` expression; must be canonicalizable.
    pub fn parse_combined(text: &str, bindings: &Bindings) -> Result<SeriesSolution, PerturbError> {
        let (y0, y1) = canon_from_str(text, bindings)?.split_eps();
        Ok(SeriesSolution::from_canon(&y0, &y1))
    }

    pub fn with_constant(mut self, name: &str, value: ConstValue) -> SeriesSolution {
        self.constants.insert(name.to_string(), value);
        self
    }

    fn bindings(&self) -> Bindings {
        let mut b = Bindings::default();
        for (k, v) in &self.constants {
            if let ConstValue::Value(r) = v {
                b = b.with(k, r.clone());
            }
        }
        b
    }

    fn numeric_constants(&self) -> BTreeMap<String, f64> {
        self.constants
            .iter()
            .filter_map(|(k, v)| match v {
                ConstValue::Value(r) => Some((k.clone(), rational_to_f64(r))),
                ConstValue::Free => None,
            })
            .collect()
    }

    /// Canonical `(y0, y1)`; free constants stay as unknown coefficients.
    pub fn canonical(&self) -> Result<(CanonExpr, CanonExpr), PerturbError> {
        let b = self.bindings();
        Ok((canonicalize(&self.y0, &b)?, canonicalize(&self.y1, &b)?))
    }

    /// `y0 + ε y1` evaluated at `(x, ε)`.
    pub fn eval(&self, x: f64, eps: f64) -> Result<f64, PerturbError> {
        let mut env = Env::at(x);
        env.consts = self.numeric_constants();
        Ok(self.y0.eval(&env)? + eps * self.y1.eval(&env)?)
    }

    /// `d^k/dx^k (y0 + ε y1)` at `(x, ε)`, for `k = 0..=order`.
    pub fn eval_derivatives(&self, order: u32, x: f64, eps: f64) -> Result<Vec<f64>, PerturbError> {
        let d0 = derivatives(&self.y0, order)?;
        let d1 = derivatives(&self.y1, order)?;
        let mut env = Env::at(x);
        env.consts = self.numeric_constants();
        d0.iter()
            .zip(&d1)
            .map(|(a, b)| Ok(a.eval(&env)? + eps * b.eval(&env)?))
            .collect()
    }
}

impl fmt::Display for SeriesSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y1.is_zero_literal() {
            write!(f, "{}", self.y0)
        } else {
            write!(f, "{} + eps*({})", self.y0, self.y1)
        }
    }
}

fn derivatives(a: &Ast, order: u32) -> Result<Vec<Ast>, PerturbError> {
    let mut out = vec![a.clone()];
    for _ in 0..order {
        let next = out.last().expect("non-empty").derivative()?;
        out.push(next);
    }
    Ok(out)
}

/// `y^(order)(0) = value0 + ε·value1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialCondition {
    pub order: u32,
    pub value0: Rational,
    pub value1: Rational,
}

impl InitialCondition {
    pub fn new(order: u32, value0: Rational, value1: Rational) -> Self {
        InitialCondition { order, value0, value1 }
    }

    /// Parses a value such as `1 + 2*eps` or `5/4 - 5*eps/8`.
    pub fn parse(order: u32, value: &str, bindings: &Bindings) -> Result<Self, PerturbError> {
        let (v0, v1) = canon_from_str(value, bindings)?.split_eps();
        match (v0.as_constant(), v1.as_constant()) {
            (Some(a), Some(b)) => Ok(InitialCondition::new(order, a, b)),
            _ => Err(PerturbError::InvalidIc(format!("`{value}` is not a constant"))),
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = jet_name(self.order);
        let v0 = crate::expr::fmt_rational(&self.value0);
        if self.value1.is_zero() {
            write!(f, "{name}(0) = {v0}")
        } else {
            write!(f, "{name}(0) = {v0} + eps*({})", crate::expr::fmt_rational(&self.value1))
        }
    }
}

/// Exact value of an x-only expression at x = 0.
fn value_at_zero(e: &CanonExpr) -> Result<LinForm, PerturbError> {
    let mut acc = LinForm::zero();
    for (m, c) in e.terms() {
        if !m.jet.is_empty() || m.eps > 0 {
            return Err(PerturbError::UnsupportedEquation(format!("{e} is not a function of x")));
        }
        if m.xpow == 0 && !matches!(m.trig, Trig::Sin(_)) {
            acc.add_assign(c);
        }
    }
    Ok(acc)
}

/// Fits the unknown coefficients of `e` to `e^(k)(0) = v_k`.
fn fit_order(
    e: &CanonExpr,
    conditions: &[(u32, Rational)],
    order: u8,
) -> Result<(CanonExpr, BTreeMap<UnknownSym, Rational>), PerturbError> {
    let unknowns: Vec<UnknownSym> = e.unknowns().into_iter().collect();
    let mut sys = LinearSystem::new(unknowns.clone());
    for (k, v) in conditions {
        let mut d = e.clone();
        for _ in 0..*k {
            d = d.partial_x();
        }
        let lhs = value_at_zero(&d)?;
        let rhs = v - lhs.constant_part();
        let row = Row::new(lhs.unknown_terms().clone(), rhs);
        if unknowns.is_empty() || row.coeffs.is_empty() {
            if !row.rhs.is_zero() {
                return Err(PerturbError::Inconsistent { order });
            }
            continue;
        }
        sys.push(row);
    }
    if unknowns.is_empty() {
        return Ok((e.clone(), BTreeMap::new()));
    }
    let sol = match linsolve::solve(&sys) {
        Ok(sol) => sol,
        Err(LinsolveError::Inconsistent { .. }) => return Err(PerturbError::Inconsistent { order }),
    };
    if sol.nullity() > 0 {
        return Err(PerturbError::Underdetermined {
            order,
            free: sol.free.iter().map(|u| u.name().to_string()).collect(),
        });
    }
    Ok((e.substitute_unknowns(&sol.particular), sol.particular))
}

/// Fits the free constants of a family order by order: ε⁰ conditions fix
/// the constants in `y0` (affine there), whose values are bound into `y1`
/// before it is canonicalized; ε¹ conditions fix the rest. Conditions are imposed at x = 0.
pub fn apply_ics(family: &SeriesSolution, ics: &[InitialCondition]) -> Result<SeriesSolution, PerturbError> {
    let mut b = family.bindings();
    let y0 = canonicalize(&family.y0, &b)?;
    let c0: Vec<(u32, Rational)> = ics.iter().map(|c| (c.order, c.value0.clone())).collect();
    let c1: Vec<(u32, Rational)> = ics.iter().map(|c| (c.order, c.value1.clone())).collect();

    let (fitted0, values) = fit_order(&y0, &c0, 0)?;
    // y1 may be nonlinear in the constants of y0 (e.g. C1²); bind them first
    for (u, v) in &values {
        b = b.with(u.name(), v.clone());
    }
    let y1 = canonicalize(&family.y1, &b)?;
    let (fitted1, _) = fit_order(&y1, &c1, 1)?;

    let mut out = SeriesSolution::from_canon(&fitted0, &fitted1);
    for (k, v) in &family.constants {
        if let ConstValue::Value(_) = v {
            out.constants.insert(k.clone(), v.clone());
        }
    }
    Ok(out)
}

/// Solves `y^(n) = f0 + εf1` through first order in ε with initial data at
/// x = 0. Requires `y^(n) − f0` linear with constant coefficients (roots in
/// `{0, ±i·m}`) so that both orders reduce to forced linear problems.
pub fn solve_ivp(ode: &PerturbedODE, ics: &[InitialCondition]) -> Result<SeriesSolution, PerturbError> {
    let n = ode.order() as usize;
    if ics.len() != n {
        return Err(PerturbError::IcCount {
            expected: n,
            got: ics.len(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for ic in ics {
        if ic.order as usize >= n || !seen.insert(ic.order) {
            return Err(PerturbError::InvalidIc(format!(
                "conditions must fix y, …, {} once each",
                jet_name(ode.order() - 1)
            )));
        }
    }
    let split = split_orders(ode);
    let coeffs = split.linear_constant_coefficients().ok_or_else(|| {
        PerturbError::UnsupportedEquation(format!(
            "{} is not linear with constant coefficients",
            split.eq0_string()
        ))
    })?;
    let p0 = ForcedLinearODE::homogeneous(coeffs.clone())?;
    let basis = p0.homogeneous_basis();
    let family = |particular: CanonExpr, prefix: &str| -> CanonExpr {
        let mut e = particular;
        for (i, b) in basis.iter().enumerate() {
            let u = UnknownSym::new(format!("{prefix}{i}"));
            e = e.add(&b.times_unknown(&u).expect("basis is unknown-free"));
        }
        e
    };

    let c0: Vec<(u32, Rational)> = ics.iter().map(|c| (c.order, c.value0.clone())).collect();
    let (y0, _) = fit_order(&family(CanonExpr::zero(), "k"), &c0, 0)?;
    let forcing = split.rest().compose(&y0)?.neg();
    let particular = solve_forced(&ForcedLinearODE::new(coeffs, forcing)?)?;
    let c1: Vec<(u32, Rational)> = ics.iter().map(|c| (c.order, c.value1.clone())).collect();
    let (y1, _) = fit_order(&family(particular, "l"), &c1, 1)?;

    let r0 = split.order0_residual(&y0)?;
    let r1 = split.order1_residual(&y0, &y1)?;
    if !r0.is_zero() || !r1.is_zero() {
        return Err(PerturbError::SelfCheck(format!("series residuals ({r0}, {r1})")));
    }
    Ok(SeriesSolution::from_canon(&y0, &y1))
}

/// Approximately invariant solution of `(ζ0 + εζ1)∂y` with `ζ0 = y − h(x)`:
/// `y0 = h`, `y1 = −ζ1(x, h, h', …)`.
pub fn invariant_solution(g: &EvolutionaryGenerator) -> Result<SeriesSolution, PerturbError> {
    let zeta0 = &g.zeta0;
    let h = CanonExpr::y().sub(zeta0);
    if h.has_jets() || h.has_unknowns() {
        return Err(PerturbError::NotAffineInY(zeta0.to_string()));
    }
    let y1 = g.zeta1.compose(&h)?.neg();
    if y1.has_unknowns() {
        return Err(PerturbError::NotAffineInY(format!("zeta1 {} has free coefficients", g.zeta1)));
    }
    Ok(SeriesSolution::from_canon(&h, &y1))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for NumericGrid {
    fn default() -> Self {
        NumericGrid {
            start: 0.0,
            end: 10.0,
            step: 0.01,
        }
    }
}

impl NumericGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step).round().max(0.0) as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VerifyMode {
    Symbolic,
    Numeric(NumericGrid),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesResidual {
    Symbolic { order0: CanonExpr, order1: CanonExpr },
    Numeric { max_order0: f64, max_order1: f64, points: usize },
}

impl SeriesResidual {
    pub fn is_zero(&self) -> bool {
        match self {
            SeriesResidual::Symbolic { order0, order1 } => order0.is_zero() && order1.is_zero(),
            SeriesResidual::Numeric { max_order0, max_order1, .. } => *max_order0 == 0.0 && *max_order1 == 0.0,
        }
    }

    /// Symbolic residuals must vanish; numeric ones must stay below `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        match self {
            SeriesResidual::Symbolic { .. } => self.is_zero(),
            SeriesResidual::Numeric { max_order0, max_order1, .. } => *max_order0 <= tol && *max_order1 <= tol,
        }
    }
}

impl fmt::Display for SeriesResidual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesResidual::Symbolic { order0, order1 } => write!(f, "({order0}, {order1})"),
            SeriesResidual::Numeric {
                max_order0,
                max_order1,
                points,
            } => write!(f, "max |r0| = {max_order0:e}, max |r1| = {max_order1:e} over {points} points"),
        }
    }
}

/// Residuals of both order equations for a candidate series.
///
/// Constants of `s` with values also supply numeric values for unknown
/// coefficients of `split` (e.g. a first-integral constant).
pub fn verify_series(split: &OrderSplit, s: &SeriesSolution, mode: VerifyMode) -> Result<SeriesResidual, PerturbError> {
    match mode {
        VerifyMode::Symbolic => {
            let (y0, y1) = s.canonical()?;
            let values: BTreeMap<UnknownSym, Rational> = s
                .constants
                .iter()
                .filter_map(|(k, v)| match v {
                    ConstValue::Value(r) => Some((UnknownSym::new(k.clone()), r.clone())),
                    ConstValue::Free => None,
                })
                .collect();
            Ok(SeriesResidual::Symbolic {
                order0: split.order0_residual(&y0)?.substitute_unknowns(&values),
                order1: split.order1_residual(&y0, &y1)?.substitute_unknowns(&values),
            })
        }
        VerifyMode::Numeric(grid) => {
            let n = split.order();
            let d0 = derivatives(&s.y0, n)?;
            let d1 = derivatives(&s.y1, n)?;
            let consts = s.numeric_constants();
            let points = grid.points();
            let per_point: Result<Vec<(f64, f64)>, PerturbError> = points
                .par_iter()
                .map(|&x| {
                    let mut env = Env::at(x);
                    env.consts = consts.clone();
                    let j0: Vec<f64> = d0.iter().map(|a| a.eval(&env)).collect::<Result<_, _>>()?;
                    let j1: Vec<f64> = d1.iter().map(|a| a.eval(&env)).collect::<Result<_, _>>()?;
                    let pt = EvalPoint {
                        x,
                        eps: 0.0,
                        jets: &j0,
                        unknowns: &consts,
                    };
                    let r0 = split.eq0().eval(&pt)?;
                    let mut r1 = split.rest().eval(&pt)?;
                    for (c, v) in split.coeffs().iter().zip(&j1) {
                        r1 += c.eval(&pt)? * v;
                    }
                    if !r0.is_finite() || !r1.is_finite() {
                        return Err(PerturbError::NonFinite(x));
                    }
                    Ok((r0.abs(), r1.abs()))
                })
                .collect();
            let per_point = per_point?;
            let max0 = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
            let max1 = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
            Ok(SeriesResidual::Numeric {
                max_order0: max0,
                max_order1: max1,
                points: points.len(),
            })
        }
    }
}
