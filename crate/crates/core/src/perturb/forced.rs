use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{fmt_rational, CanonExpr, Rational, Trig, UnknownSym};
use crate::linsolve;

use super::PerturbError;

/// Multiplicities of the admissible characteristic roots.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RootStructure {
    /// Multiplicity of the root 0.
    pub zero: u32,
    /// `m ↦ multiplicity` of the pair `±i·m`.
    pub oscillatory: BTreeMap<u32, u32>,
}

impl RootStructure {
    pub fn multiplicity(&self, frequency: u32) -> u32 {
        if frequency == 0 {
            self.zero
        } else {
            self.oscillatory.get(&frequency).copied().unwrap_or(0)
        }
    }
}

/// `p(D) y = forcing` with `p(D) = Σ c_j D^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcedLinearODE {
    char_coeffs: Vec<Rational>,
    forcing: CanonExpr,
    roots: RootStructure,
}

/// Exact quotient `q / d` (ascending coefficients), if the division is exact.
fn divide_exact(q: &[Rational], d: &[Rational]) -> Option<Vec<Rational>> {
    let mut rem = q.to_vec();
    let dn = d.len() - 1;
    if rem.len() <= dn {
        return None;
    }
    let mut quot = vec![Rational::zero(); rem.len() - dn];
    for k in (0..quot.len()).rev() {
        let c = &rem[k + dn] / &d[dn];
        for (i, di) in d.iter().enumerate() {
            rem[k + i] = &rem[k + i] - &c * di;
        }
        quot[k] = c;
    }
    rem.iter().all(Zero::is_zero).then_some(quot)
}

fn poly_string(c: &[Rational]) -> String {
    let parts: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(j, a)| format!("{}*s^{j}", fmt_rational(a)))
        .collect();
    parts.join(" + ")
}

fn factor_roots(c: &[Rational]) -> Result<RootStructure, PerturbError> {
    let mut roots = RootStructure::default();
    let mut q: Vec<Rational> = c.to_vec();
    while q.len() > 1 && q[0].is_zero() {
        q.remove(0);
        roots.zero += 1;
    }
    let unsupported = || PerturbError::UnsupportedRoots(poly_string(c));
    if q.len() == 1 {
        return Ok(roots);
    }
    let ratio = (&q[0] / &q[q.len() - 1]).abs();
    let bound = ratio.to_f64().map(|r| r.sqrt().floor() as u64 + 1).unwrap_or(0).min(1 << 20);
    for m in 1..=bound as u32 {
        let m2 = Rational::from_integer((m as i64 * m as i64).into());
        let d = [m2, Rational::zero(), Rational::one()];
        while q.len() > 1 {
            match divide_exact(&q, &d) {
                Some(next) => {
                    q = next;
                    *roots.oscillatory.entry(m).or_insert(0) += 1;
                }
                None => break,
            }
        }
        if q.len() == 1 {
            return Ok(roots);
        }
    }
    Err(unsupported())
}

impl ForcedLinearODE {
    pub fn new(char_coeffs: Vec<Rational>, forcing: CanonExpr) -> Result<Self, PerturbError> {
        let mut char_coeffs = char_coeffs;
        while char_coeffs.last().is_some_and(Zero::is_zero) {
            char_coeffs.pop();
        }
        if char_coeffs.len() < 2 {
            return Err(PerturbError::UnsupportedEquation("operator has order 0".into()));
        }
        if forcing.has_jets() || forcing.has_eps() || forcing.has_unknowns() {
            return Err(PerturbError::InvalidForcing(forcing.to_string()));
        }
        let roots = factor_roots(&char_coeffs)?;
        Ok(ForcedLinearODE {
            char_coeffs,
            forcing,
            roots,
        })
    }

    pub fn homogeneous(char_coeffs: Vec<Rational>) -> Result<Self, PerturbError> {
        ForcedLinearODE::new(char_coeffs, CanonExpr::zero())
    }

    pub fn order(&self) -> u32 {
        (self.char_coeffs.len() - 1) as u32
    }

    pub fn char_coeffs(&self) -> &[Rational] {
        &self.char_coeffs
    }

    pub fn forcing(&self) -> &CanonExpr {
        &self.forcing
    }

    pub fn roots(&self) -> &RootStructure {
        &self.roots
    }

    /// `p(D) y` for a function of x (linear unknown coefficients allowed).
    pub fn apply(&self, y: &CanonExpr) -> CanonExpr {
        let mut acc = CanonExpr::zero();
        let mut d = y.clone();
        for c in &self.char_coeffs {
            if !c.is_zero() {
                acc = acc.add(&d.scale(c));
            }
            d = d.partial_x();
        }
        acc
    }

    /// Real fundamental system: `x^k` for the root 0, then `x^k sin mx`,
    /// `x^k cos mx` by increasing m.
    pub fn homogeneous_basis(&self) -> Vec<CanonExpr> {
        let mut out: Vec<CanonExpr> = (0..self.roots.zero).map(CanonExpr::x_pow).collect();
        for (m, mult) in &self.roots.oscillatory {
            for k in 0..*mult {
                let xk = CanonExpr::x_pow(k);
                out.push(xk.mul(&CanonExpr::sin(*m)).expect("unknown-free"));
                out.push(xk.mul(&CanonExpr::cos(*m)).expect("unknown-free"));
            }
        }
        out
    }
}

/// Particular solution by undetermined coefficients; resonant terms are
/// multiplied by `x^s`, `s` the multiplicity of the hit root. No
/// homogeneous part is added.
pub fn solve_forced(p: &ForcedLinearODE) -> Result<CanonExpr, PerturbError> {
    let mut degree: BTreeMap<u32, u32> = BTreeMap::new();
    for (m, _) in p.forcing.terms() {
        let e = degree.entry(m.trig.frequency()).or_insert(0);
        *e = (*e).max(m.xpow);
    }
    let mut candidates = Vec::new();
    for (w, k) in &degree {
        let s = p.roots.multiplicity(*w);
        let trig: Vec<Trig> = if *w == 0 {
            vec![Trig::None]
        } else {
            vec![Trig::Sin(*w), Trig::Cos(*w)]
        };
        for j in 0..=*k {
            for t in &trig {
                candidates.push(
                    CanonExpr::x_pow(j + s)
                        .mul(&CanonExpr::trig(*t))
                        .expect("unknown-free"),
                );
            }
        }
    }
    let mut ansatz = CanonExpr::zero();
    let mut syms = Vec::new();
    for (i, t) in candidates.iter().enumerate() {
        let u = UnknownSym::new(format!("u{i}"));
        ansatz = ansatz.add(&t.times_unknown(&u)?);
        syms.push(u);
    }
    let residual = p.apply(&ansatz).sub(&p.forcing);
    let sol = linsolve::solve(&linsolve::split_with(&residual, &syms))
        .map_err(|e| PerturbError::SelfCheck(format!("undetermined coefficients: {e}")))?;
    let y = ansatz.substitute_unknowns(&sol.particular);
    let check = p.apply(&y).sub(&p.forcing);
    if !check.is_zero() {
        return Err(PerturbError::SelfCheck(format!("p(D)y - forcing = {check}")));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canon_from_str, int, Bindings};

    fn c(s: &str) -> CanonExpr {
        canon_from_str(s, &Bindings::default()).unwrap()
    }

    #[test]
    fn boussinesq_order_one() {
        let p = ForcedLinearODE::new(vec![int(1), int(0), int(1)], c("x + 2 + sin(2*x)")).unwrap();
        assert_eq!(solve_forced(&p).unwrap(), c("x + 2 - sin(2*x)/3"));
    }

    #[test]
    fn third_order_with_zero_root() {
        let p = ForcedLinearODE::new(vec![int(0), int(1), int(0), int(1)], c("-75/32*sin(2*x)")).unwrap();
        assert_eq!(solve_forced(&p).unwrap(), c("-25/64*cos(2*x)"));
        assert_eq!(p.roots().zero, 1);
    }

    #[test]
    fn resonance() {
        let p = ForcedLinearODE::new(vec![int(1), int(0), int(1)], c("sin(x)")).unwrap();
        assert_eq!(solve_forced(&p).unwrap(), c("-x/2*cos(x)"));
        // constant forcing on a zero root
        let q = ForcedLinearODE::new(vec![int(0), int(1), int(0), int(1)], c("3")).unwrap();
        assert_eq!(solve_forced(&q).unwrap(), c("3*x"));
    }

    #[test]
    fn root_validation() {
        assert!(matches!(
            ForcedLinearODE::homogeneous(vec![int(-1), int(0), int(1)]),
            Err(PerturbError::UnsupportedRoots(_))
        ));
        assert!(matches!(
            ForcedLinearODE::homogeneous(vec![int(1), int(1)]),
            Err(PerturbError::UnsupportedRoots(_))
        ));
        let r = ForcedLinearODE::homogeneous(vec![int(4), int(0), int(5), int(0), int(1)]).unwrap();
        assert_eq!(r.roots().oscillatory.keys().copied().collect::<Vec<_>>(), [1, 2]);
        let double = ForcedLinearODE::homogeneous(vec![int(1), int(0), int(2), int(0), int(1)]).unwrap();
        assert_eq!(double.roots().oscillatory[&1], 2);
        assert_eq!(double.homogeneous_basis().len(), 4);
    }

    #[test]
    fn forcing_must_be_x_only() {
        assert!(ForcedLinearODE::new(vec![int(1), int(0), int(1)], c("y")).is_err());
    }
}
