use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::expr::{CanonExpr, Rational, UnknownSym};
use crate::linsolve::{self, LinearSystem, LinsolveError, Row, SolutionSpace};

use super::ansatz::{instantiate, AnsatzSpec};
use super::determining::{check_symmetry, determining_expr, AsEvolutionary};
use super::{EvolutionaryGenerator, NamedGenerator, PerturbedODE, PointGenerator, SymmetryError};

/// Exact point symmetries of `y^(n) = f0` (the `f1` part of `ode` is ignored)
/// within the ansatz; one generator per nullspace basis vector.
pub fn solve_exact(
    ode: &PerturbedODE,
    ansatz: &AnsatzSpec,
) -> Result<Vec<PointGenerator>, SymmetryError> {
    let exact = ode.to_unperturbed();
    let terms = ansatz.point_terms();
    let (xi, xi_syms) = instantiate(&terms, "xi");
    let (eta, eta_syms) = instantiate(&terms, "eta");
    let template = PointGenerator::exact(xi, eta)?;
    let e = determining_expr(&exact, &template.to_evolutionary())?;
    let unknowns: Vec<UnknownSym> = xi_syms.into_iter().chain(eta_syms).collect();
    let sol = linsolve::solve(&linsolve::split_with(&e, &unknowns))?;
    Ok(sol
        .nullspace
        .iter()
        .map(|v| template.substitute_unknowns(v))
        .collect())
}

/// Result of the first-order approximate point symmetry computation.
#[derive(Clone, Debug)]
pub struct ApproxSymmetries {
    /// Exact generators `X_k` of the unperturbed equation, weighted by `C_k`.
    pub exact_basis: Vec<NamedGenerator>,
    pub coefficients: Vec<UnknownSym>,
    /// Basis of the whole approximate symmetry space.
    pub generators: Vec<PointGenerator>,
    /// `ε·X` directions (no zeroth-order part).
    pub trivial: Vec<PointGenerator>,
    /// Directions with a zeroth-order part, one per free `C_k`.
    pub nontrivial: Vec<PointGenerator>,
    /// Coefficients `C_k` forced to zero.
    pub constraints: Vec<UnknownSym>,
    pub solution: SolutionSpace,
    system: LinearSystem,
    template: PointGenerator,
}

fn name_basis(gens: Vec<PointGenerator>) -> Vec<NamedGenerator> {
    gens.into_iter()
        .enumerate()
        .map(|(i, g)| NamedGenerator {
            name: format!("X{}", i + 1),
            generator: g,
        })
        .collect()
}

fn generator_system(
    gens: &[&PointGenerator],
    target: &PointGenerator,
) -> (LinearSystem, Vec<UnknownSym>) {
    let syms: Vec<UnknownSym> = (0..gens.len())
        .map(|i| UnknownSym::new(format!("w{i}")))
        .collect();
    let mut sys = LinearSystem::new(syms.clone());
    for k in 0..4 {
        let mut e = target.components()[k].neg();
        for (g, s) in gens.iter().zip(&syms) {
            e = e.add(
                &g.components()[k]
                    .times_unknown(s)
                    .expect("generators are unknown-free"),
            );
        }
        sys.push_expr(&e);
    }
    (sys, syms)
}

/// Coordinates of `target` in the span of `basis`, if it is a member.
pub fn generator_coordinates(
    basis: &[&PointGenerator],
    target: &PointGenerator,
) -> Option<Vec<Rational>> {
    let (sys, syms) = generator_system(basis, target);
    let sol = linsolve::solve(&sys).ok()?;
    Some(syms.iter().map(|s| sol.particular[s].clone()).collect())
}

fn independent(gens: &[&PointGenerator]) -> bool {
    let (sys, _) = generator_system(gens, &PointGenerator::default());
    linsolve::solve(&sys)
        .map(|s| s.nullity() == 0)
        .unwrap_or(false)
}

/// Checks that a user-supplied exact basis consists of independent exact
/// symmetries spanning everything the ansatz finds.
fn validate_basis(
    ode: &PerturbedODE,
    ansatz: &AnsatzSpec,
    basis: &[NamedGenerator],
) -> Result<(), SymmetryError> {
    let exact = ode.to_unperturbed();
    for b in basis {
        if b.generator.xi1.is_zero() && b.generator.eta1.is_zero() {
            let r = check_symmetry(&exact, &b.generator)?;
            if !r.order0.is_zero() {
                return Err(SymmetryError::NotExactSymmetry(b.name.clone()));
            }
        } else {
            return Err(SymmetryError::BasisMismatch(format!(
                "{} has an eps part",
                b.name
            )));
        }
    }
    let refs: Vec<&PointGenerator> = basis.iter().map(|b| &b.generator).collect();
    if !independent(&refs) {
        return Err(SymmetryError::BasisMismatch(
            "generators are linearly dependent".into(),
        ));
    }
    for (i, g) in solve_exact(ode, ansatz)?.iter().enumerate() {
        if generator_coordinates(&refs, g).is_none() {
            return Err(SymmetryError::BasisMismatch(format!(
                "computed generator #{} ({g}) is outside the supplied span",
                i + 1
            )));
        }
    }
    Ok(())
}

/// First-order approximate point symmetries `X⁰ + εX¹`.
///
/// `X⁰ = Σ C_k X_k` ranges over the exact algebra (the ε⁰ block, solved
/// first); `X¹` over the ansatz. The ε¹ block is then linear in `(X¹, C)`.
/// Pass `basis` to fix the labelling of the exact algebra; otherwise the
/// computed basis is labelled `X1, X2, …`.
pub fn solve_approx(
    ode: &PerturbedODE,
    ansatz: &AnsatzSpec,
    basis: Option<&[NamedGenerator]>,
) -> Result<ApproxSymmetries, SymmetryError> {
    let exact_basis = match basis {
        Some(b) => {
            validate_basis(ode, ansatz, b)?;
            b.to_vec()
        }
        None => name_basis(solve_exact(ode, ansatz)?),
    };
    let coefficients: Vec<UnknownSym> = (1..=exact_basis.len())
        .map(|k| UnknownSym::new(format!("C{k}")))
        .collect();

    let mut x0 = PointGenerator::default();
    for (b, c) in exact_basis.iter().zip(&coefficients) {
        let g = &b.generator;
        x0.xi0 = x0.xi0.add(&g.xi0.times_unknown(c)?);
        x0.eta0 = x0.eta0.add(&g.eta0.times_unknown(c)?);
    }
    let terms = ansatz.point_terms();
    let (xi1, p) = instantiate(&terms, "p");
    let (eta1, q) = instantiate(&terms, "q");
    let template = PointGenerator::new(x0.xi0, x0.eta0, xi1, eta1)?;

    let e = determining_expr(ode, &template.to_evolutionary())?;
    let (order0, order1) = e.split_eps();
    if !order0.is_zero() {
        return Err(SymmetryError::NotExactSymmetry(
            "supplied basis combination".into(),
        ));
    }
    let unknowns: Vec<UnknownSym> = p
        .into_iter()
        .chain(q)
        .chain(coefficients.iter().cloned())
        .collect();
    let system = linsolve::split_with(&order1, &unknowns);
    let solution = linsolve::solve(&system)?;

    let generators: Vec<PointGenerator> = solution
        .nullspace
        .iter()
        .map(|v| template.substitute_unknowns(v))
        .collect();
    let (nontrivial, trivial): (Vec<_>, Vec<_>) = generators
        .iter()
        .cloned()
        .partition(|g| g.has_zeroth_order());
    let constraints = solution
        .forced_zero
        .iter()
        .filter(|u| coefficients.contains(u))
        .cloned()
        .collect();

    Ok(ApproxSymmetries {
        exact_basis,
        coefficients,
        generators,
        trivial,
        nontrivial,
        constraints,
        solution,
        system,
        template,
    })
}

impl ApproxSymmetries {
    /// Completion `X_k + εX¹` of the k-th exact generator, if it is stable.
    pub fn completion(&self, k: usize) -> Option<PointGenerator> {
        let mut sys = self.system.clone();
        for (j, c) in self.coefficients.iter().enumerate() {
            let mut coeffs = BTreeMap::new();
            coeffs.insert(c.clone(), Rational::one());
            let rhs = if j == k {
                Rational::one()
            } else {
                Rational::zero()
            };
            sys.push(Row::new(coeffs, rhs));
        }
        match linsolve::solve(&sys) {
            Ok(sol) => Some(self.template.substitute_unknowns(&sol.particular)),
            Err(LinsolveError::Inconsistent { .. }) => None,
        }
    }

    /// Whether `g` is an approximate symmetry in the computed span.
    pub fn contains(&self, g: &PointGenerator) -> bool {
        let refs: Vec<&PointGenerator> = self.generators.iter().collect();
        generator_coordinates(&refs, g).is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableEntry {
    pub name: String,
    pub completed: PointGenerator,
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub exact_basis: Vec<NamedGenerator>,
    pub stable: Vec<StableEntry>,
    pub unstable: Vec<String>,
    pub constraints: Vec<String>,
    pub approx: ApproxSymmetries,
}

impl StabilityReport {
    pub fn inherits_all(&self) -> bool {
        self.unstable.is_empty()
    }
}

/// Splits the exact basis into stable and unstable generators.
///
/// A basis element is stable iff it is the zeroth-order part of some
/// approximate point symmetry; membership is decided exactly by linsolve.
pub fn classify_stability(
    ode: &PerturbedODE,
    ansatz: &AnsatzSpec,
    basis: Option<&[NamedGenerator]>,
) -> Result<StabilityReport, SymmetryError> {
    let approx = solve_approx(ode, ansatz, basis)?;
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for (k, b) in approx.exact_basis.iter().enumerate() {
        match approx.completion(k) {
            Some(completed) => stable.push(StableEntry {
                name: b.name.clone(),
                completed,
            }),
            None => unstable.push(b.name.clone()),
        }
    }
    let constraints = approx
        .constraints
        .iter()
        .map(|c| c.name().to_string())
        .collect();
    Ok(StabilityReport {
        exact_basis: approx.exact_basis.clone(),
        stable,
        unstable,
        constraints,
        approx,
    })
}

/// Source term `S` of the order-ε equation for `ζ1`: the ε-part of the
/// determining expression with `ζ1 = 0`. The equation reads `L(ζ1) = −S`,
/// `L` being the linearized unperturbed operator restricted to solutions.
pub fn counterpart_source(
    ode: &PerturbedODE,
    zeta0: &CanonExpr,
) -> Result<CanonExpr, SymmetryError> {
    let g = EvolutionaryGenerator::new(zeta0.clone(), CanonExpr::zero())?;
    Ok(determining_expr(ode, &g)?.eps_part(1))
}

/// `L(ζ1)`: the linearized unperturbed operator applied to `zeta1` and
/// restricted to solutions of the unperturbed equation.
pub fn linearized_operator(
    ode: &PerturbedODE,
    zeta1: &CanonExpr,
) -> Result<CanonExpr, SymmetryError> {
    let g = EvolutionaryGenerator::new(zeta1.clone(), CanonExpr::zero())?;
    Ok(determining_expr(&ode.to_unperturbed(), &g)?)
}

/// Higher-order approximate symmetry `(ζ0 + εζ1) ∂y` extending an exact
/// symmetry `g0` of the unperturbed equation.
///
/// `ζ1` ranges over the evolutionary ansatz; the particular solution with
/// every free coefficient set to zero is returned.
pub fn local_counterpart(
    ode: &PerturbedODE,
    g0: &impl AsEvolutionary,
    ansatz: &AnsatzSpec,
) -> Result<EvolutionaryGenerator, SymmetryError> {
    let zeta0 = g0.evolutionary().zeta0;
    let base = EvolutionaryGenerator::new(zeta0.clone(), CanonExpr::zero())?;
    base.check_order(ode.order())?;
    let exact = check_symmetry(&ode.to_unperturbed(), &base)?;
    if !exact.order0.is_zero() {
        return Err(SymmetryError::NotExactSymmetry(format!("({zeta0})*d/dy")));
    }
    let terms = ansatz.evolutionary_terms(ode.order());
    let (zeta1, syms) = instantiate(&terms, "r");
    let template = EvolutionaryGenerator::new(zeta0.clone(), zeta1)?;
    let e = determining_expr(ode, &template)?;
    let system = linsolve::split_with(&e.eps_part(1), &syms);
    match linsolve::solve(&system) {
        Ok(sol) => Ok(EvolutionaryGenerator {
            zeta0,
            zeta1: template.zeta1.substitute_unknowns(&sol.particular),
        }),
        Err(LinsolveError::Inconsistent { certificate }) => Err(SymmetryError::NoSolutionInAnsatz(
            format!("{} candidate terms, reduced row {certificate}", terms.len()),
        )),
    }
}
