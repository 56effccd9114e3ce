//! Approximate integrating factors `μ0 + εμ1` of `y'' = f0 + εf1` and the
//! first integrals they produce.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::expr::{canon_from_str, Bindings, CanonExpr, ExprError, Monomial, Rational, Trig, UnknownSym};
use crate::linsolve::{self, LinearSystem, LinsolveError, Row};
use crate::symmetry::{AnsatzSpec, PerturbedODE};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IntFactorError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("integrating factors are defined for second-order equations only (got order {0})")]
    Order(u32),
    #[error("invalid integrating factor: {0}")]
    InvalidFactor(String),
    #[error("not an approximate integrating factor; residuals: {0}")]
    NotAFactor(String),
    #[error("no first integral within the ansatz ({0} candidate terms)")]
    NoSolutionInAnsatz(usize),
}

/// `μ = μ0 + εμ1` with components in `(x, y, y')`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntegratingFactor {
    pub mu0: CanonExpr,
    pub mu1: CanonExpr,
}

impl IntegratingFactor {
    pub fn new(mu0: CanonExpr, mu1: CanonExpr) -> Result<Self, IntFactorError> {
        for (n, e) in [("mu0", &mu0), ("mu1", &mu1)] {
            if e.has_eps() {
                return Err(IntFactorError::InvalidFactor(format!("{n} must not contain eps")));
            }
            if e.max_jet_order().is_some_and(|j| j > 1) {
                return Err(IntFactorError::InvalidFactor(format!("{n} depends on y'' or higher")));
            }
        }
        Ok(IntegratingFactor { mu0, mu1 })
    }

    /// Splits a single ε-expression such as `(1+eps)*y'`.
    pub fn parse(text: &str, b: &Bindings) -> Result<Self, IntFactorError> {
        let (mu0, mu1) = canon_from_str(text, b)?.split_eps();
        IntegratingFactor::new(mu0, mu1)
    }

    pub fn combined(&self) -> CanonExpr {
        CanonExpr::from_eps_parts(&self.mu0, &self.mu1).expect("factor carries no unknowns")
    }
}

impl fmt::Display for IntegratingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mu1.is_zero() {
            write!(f, "{}", self.mu0)
        } else {
            write!(f, "{} + eps*({})", self.mu0, self.mu1)
        }
    }
}

/// The four determining residuals of a candidate factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorResiduals(pub [CanonExpr; 4]);

impl FactorResiduals {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(CanonExpr::is_zero)
    }
}

impl fmt::Display for FactorResiduals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn require_second_order(ode: &PerturbedODE) -> Result<(), IntFactorError> {
    if ode.order() != 2 {
        return Err(IntFactorError::Order(ode.order()));
    }
    Ok(())
}

fn dx(e: &CanonExpr) -> CanonExpr {
    e.partial_x()
}
fn dy(e: &CanonExpr) -> CanonExpr {
    e.partial_jet(0)
}
fn dp(e: &CanonExpr) -> CanonExpr {
    e.partial_jet(1)
}

/// `y'·a_{yy'} + a_{xy'} + 2a_y + (a f0)_{y'y'}`.
fn first_condition(a: &CanonExpr, af0: &CanonExpr, yp: &CanonExpr) -> Result<CanonExpr, ExprError> {
    Ok(yp
        .mul(&dp(&dy(a)))?
        .add(&dp(&dx(a)))
        .add(&dy(a).scale(&Rational::from_integer(2.into())))
        .add(&dp(&dp(af0))))
}

/// `y'²a_yy + 2y'a_xy + a_xx + y'(a f0)_{yy'} + (a f0)_{xy'} − (a f0)_y`.
fn second_condition(a: &CanonExpr, af0: &CanonExpr, yp: &CanonExpr) -> Result<CanonExpr, ExprError> {
    let yp2 = yp.mul(yp)?;
    Ok(yp2
        .mul(&dy(&dy(a)))?
        .add(&yp.mul(&dx(&dy(a)))?.scale(&Rational::from_integer(2.into())))
        .add(&dx(&dx(a)))
        .add(&yp.mul(&dp(&dy(af0)))?)
        .add(&dp(&dx(af0)))
        .sub(&dy(af0)))
}

fn residuals_unchecked(ode: &PerturbedODE, mu: &IntegratingFactor) -> Result<FactorResiduals, ExprError> {
    let yp = CanonExpr::jet(1);
    let (f0, f1) = (ode.f0(), ode.f1());
    let m0f0 = mu.mu0.mul(f0)?;
    let m1f0 = mu.mu1.mul(f0)?;
    let m0f1 = mu.mu0.mul(f1)?;

    let r0 = first_condition(&mu.mu0, &m0f0, &yp)?;
    let r1 = second_condition(&mu.mu0, &m0f0, &yp)?;
    let r2 = first_condition(&mu.mu1, &m1f0, &yp)?.add(&dp(&dp(&m0f1)));
    let r3 = second_condition(&mu.mu1, &m1f0, &yp)?
        .sub(&dy(&m0f1))
        .add(&yp.mul(&dp(&dy(&m0f1)))?)
        .add(&dp(&dx(&m0f1)));
    Ok(FactorResiduals([r0, r1, r2, r3]))
}

/// Evaluates the four integrating-factor conditions literally.
pub fn check_factor(ode: &PerturbedODE, mu: &IntegratingFactor) -> Result<FactorResiduals, IntFactorError> {
    require_second_order(ode)?;
    Ok(residuals_unchecked(ode, mu)?)
}

/// Basis of all factors with `μ0, μ1` in the span of the ansatz terms of
/// jet order ≤ 1.
pub fn solve_factor(ode: &PerturbedODE, ansatz: &AnsatzSpec) -> Result<Vec<IntegratingFactor>, IntFactorError> {
    require_second_order(ode)?;
    let terms = ansatz.evolutionary_terms(2);
    if terms.is_empty() {
        return Ok(Vec::new());
    }
    let (mu0, s0) = crate::symmetry::instantiate_ansatz(&terms, "m");
    let (mu1, s1) = crate::symmetry::instantiate_ansatz(&terms, "n");
    let template = IntegratingFactor { mu0, mu1 };
    let res = residuals_unchecked(ode, &template)?;
    let unknowns: Vec<UnknownSym> = s0.into_iter().chain(s1).collect();
    let mut sys = LinearSystem::new(unknowns);
    for r in &res.0 {
        sys.push_expr(r);
    }
    let sol = match linsolve::solve(&sys) {
        Ok(sol) => sol,
        Err(LinsolveError::Inconsistent { .. }) => unreachable!("homogeneous system"),
    };
    Ok(sol
        .nullspace
        .iter()
        .map(|v| IntegratingFactor {
            mu0: template.mu0.substitute_unknowns(v),
            mu1: template.mu1.substitute_unknowns(v),
        })
        .collect())
}

/// `ψ0 + εψ1` with `Dψ = λ·μ·(y'' − f0 − εf1)` modulo ε².
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstIntegral {
    pub psi0: CanonExpr,
    pub psi1: CanonExpr,
    pub lambda: Rational,
}

impl FirstIntegral {
    pub fn combined(&self) -> CanonExpr {
        CanonExpr::from_eps_parts(&self.psi0, &self.psi1).expect("first integral carries no unknowns")
    }

    /// `Dψ` restricted to solutions; zero for a genuine first integral.
    pub fn derivative_on_solutions(&self, ode: &PerturbedODE) -> Result<CanonExpr, IntFactorError> {
        Ok(self.combined().total_derivative().substitute_jet(ode.order(), &ode.rhs())?)
    }

    /// `Dψ − λμ(y'' − f)` as a jet-space identity.
    pub fn identity_residual(&self, ode: &PerturbedODE, mu: &IntegratingFactor) -> Result<CanonExpr, IntFactorError> {
        let rhs = mu.combined().mul(&ode.equation())?.scale(&self.lambda);
        Ok(self.combined().total_derivative().sub(&rhs))
    }

    /// The reduced first-order equation `ψ = constant`.
    pub fn reduced_ode(&self, constant: &str) -> String {
        if self.psi1.is_zero() {
            format!("{} = {constant}", self.psi0)
        } else {
            format!("{} + eps*({}) = {constant}", self.psi0, self.psi1)
        }
    }
}

impl fmt::Display for FirstIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.reduced_ode("C1"))
    }
}

/// Default ψ candidates: `x^k · t · y^a · y'^b` with `t` from the trig
/// factors of the target, `k ≤ 1 + max x-power`, `1 ≤ a + b ≤ 1 + max
/// jet degree` (or `a + b = 0` with `k ≥ 1`).
fn auto_psi_terms(target: &CanonExpr) -> Vec<CanonExpr> {
    let mut trig: BTreeSet<Trig> = BTreeSet::new();
    trig.insert(Trig::None);
    let (mut maxk, mut deg) = (0u32, 0u32);
    for (m, _) in target.terms() {
        trig.insert(m.trig);
        maxk = maxk.max(m.xpow);
        let d: u32 = m.jet.iter().filter(|(j, _)| **j <= 1).map(|(_, e)| *e).sum();
        deg = deg.max(d);
    }
    let mut out = Vec::new();
    for k in 0..=maxk + 1 {
        for t in &trig {
            for total in 0..=deg + 1 {
                for a in 0..=total {
                    let b = total - a;
                    if total == 0 && k == 0 && *t == Trig::None {
                        continue;
                    }
                    let mut m = Monomial::one();
                    m.xpow = k;
                    m.trig = *t;
                    if a > 0 {
                        m.jet.insert(0, a);
                    }
                    if b > 0 {
                        m.jet.insert(1, b);
                    }
                    out.push(CanonExpr::monomial(m));
                }
            }
        }
    }
    out
}

/// Solves `Dψ = λ·μ·(y'' − f)` over a finite ψ-ansatz.
///
/// λ is fixed by giving the highest-`y'`-power term of ψ0 coefficient 1.
/// `psi_ansatz` with explicit monomials overrides the automatic candidates.
pub fn find_first_integral(
    ode: &PerturbedODE,
    mu: &IntegratingFactor,
    psi_ansatz: Option<&AnsatzSpec>,
) -> Result<FirstIntegral, IntFactorError> {
    let res = check_factor(ode, mu)?;
    if !res.is_zero() {
        return Err(IntFactorError::NotAFactor(res.to_string()));
    }
    let target = mu.combined().mul(&ode.equation())?;
    let terms = match psi_ansatz.and_then(|a| a.monomials.as_ref()) {
        Some(m) => m.iter().filter(|e| e.max_jet_order().unwrap_or(0) <= 1).cloned().collect(),
        None => auto_psi_terms(&target),
    };
    let (psi0, s0) = crate::symmetry::instantiate_ansatz(&terms, "a");
    let (psi1, s1) = crate::symmetry::instantiate_ansatz(&terms, "b");
    let lambda = UnknownSym::new("lambda");
    let psi = CanonExpr::from_eps_parts(&psi0, &psi1)?;
    let e = psi.total_derivative().sub(&target.times_unknown(&lambda)?);

    let unknowns: Vec<UnknownSym> = s0.iter().chain(&s1).cloned().chain([lambda.clone()]).collect();
    let mut sys = linsolve::split_with(&e, &unknowns);
    let mut one = std::collections::BTreeMap::new();
    one.insert(lambda.clone(), Rational::one());
    sys.push(Row::new(one, Rational::one()));
    let sol = linsolve::solve(&sys).map_err(|_| IntFactorError::NoSolutionInAnsatz(terms.len()))?;

    let v = &sol.particular;
    let (p0, p1) = (psi0.substitute_unknowns(v), psi1.substitute_unknowns(v));
    let lead = p0
        .terms()
        .filter(|(_, c)| !c.is_zero())
        .max_by_key(|(m, _)| (m.jet_exponent(1), (*m).clone()))
        .map(|(_, c)| c.as_constant().expect("solved coefficients are constant"))
        .ok_or(IntFactorError::NoSolutionInAnsatz(terms.len()))?;
    let s = Rational::one() / lead.clone();
    Ok(FirstIntegral {
        psi0: p0.scale(&s),
        psi1: p1.scale(&s),
        lambda: s,
    })
}
