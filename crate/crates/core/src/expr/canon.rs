use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::linform::{fmt_rational, int, rational_to_f64, LinForm, Rational, UnknownSym};
use super::ExprError;

/// Trigonometric factor of a term; the argument is `m·x` with `m > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trig {
    None,
    Sin(u32),
    Cos(u32),
}

impl Trig {
    /// `sin(k·x)` for any integer `k`, as `(sign, factor)`; `None` when it vanishes.
    fn sin_of(k: i64) -> Option<(i64, Trig)> {
        match k.cmp(&0) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some((1, Trig::Sin(k as u32))),
            std::cmp::Ordering::Less => Some((-1, Trig::Sin((-k) as u32))),
        }
    }

    fn cos_of(k: i64) -> (i64, Trig) {
        if k == 0 {
            (1, Trig::None)
        } else {
            (1, Trig::Cos(k.unsigned_abs() as u32))
        }
    }

    /// Linearizes a product of two trig factors into a sum (product-to-sum).
    pub fn product(self, other: Trig) -> Vec<(Rational, Trig)> {
        let half = Rational::new(1.into(), 2.into());
        let mut out = Vec::with_capacity(2);
        let push_sin = |k: i64, w: &Rational, out: &mut Vec<(Rational, Trig)>| {
            if let Some((s, t)) = Trig::sin_of(k) {
                out.push((w * int(s), t));
            }
        };
        match (self, other) {
            (Trig::None, t) | (t, Trig::None) => out.push((Rational::one(), t)),
            (Trig::Sin(a), Trig::Sin(b)) => {
                let (a, b) = (a as i64, b as i64);
                let (_, t1) = Trig::cos_of(a - b);
                let (_, t2) = Trig::cos_of(a + b);
                out.push((half.clone(), t1));
                out.push((-half, t2));
            }
            (Trig::Cos(a), Trig::Cos(b)) => {
                let (a, b) = (a as i64, b as i64);
                let (_, t1) = Trig::cos_of(a - b);
                let (_, t2) = Trig::cos_of(a + b);
                out.push((half.clone(), t1));
                out.push((half, t2));
            }
            (Trig::Sin(a), Trig::Cos(b)) | (Trig::Cos(b), Trig::Sin(a)) => {
                let (a, b) = (a as i64, b as i64);
                push_sin(a + b, &half, &mut out);
                push_sin(a - b, &half, &mut out);
            }
        }
        out
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Trig::None => 1.0,
            Trig::Sin(m) => (m as f64 * x).sin(),
            Trig::Cos(m) => (m as f64 * x).cos(),
        }
    }

    pub fn frequency(self) -> u32 {
        match self {
            Trig::None => 0,
            Trig::Sin(m) | Trig::Cos(m) => m,
        }
    }
}

/// Jet monomial `ε^e · ∏ (y^(j))^a_j · trig(m x) · x^k` without its coefficient.
///
/// Field order fixes the canonical term order `(eps, jet, trig, xpow)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub eps: u8,
    pub jet: BTreeMap<u32, u32>,
    pub trig: Trig,
    pub xpow: u32,
}

impl Default for Trig {
    fn default() -> Self {
        Trig::None
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn jet_power(order: u32, exp: u32) -> Self {
        let mut m = Monomial::default();
        if exp > 0 {
            m.jet.insert(order, exp);
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.eps == 0 && self.jet.is_empty() && self.trig == Trig::None && self.xpow == 0
    }

    pub fn max_jet_order(&self) -> Option<u32> {
        self.jet.keys().next_back().copied()
    }

    /// Total degree in the jet variables.
    pub fn jet_degree(&self) -> u32 {
        self.jet.values().sum()
    }

    pub fn jet_exponent(&self, order: u32) -> u32 {
        self.jet.get(&order).copied().unwrap_or(0)
    }

    fn times_jet(&self, order: u32) -> Monomial {
        let mut m = self.clone();
        *m.jet.entry(order).or_insert(0) += 1;
        m
    }

    /// Product of the non-trig parts; `None` when the ε power reaches 2.
    fn merge_without_trig(&self, other: &Monomial) -> Option<Monomial> {
        let eps = self.eps + other.eps;
        if eps >= 2 {
            return None;
        }
        let mut jet = self.jet.clone();
        for (o, e) in &other.jet {
            *jet.entry(*o).or_insert(0) += e;
        }
        Some(Monomial {
            eps,
            jet,
            trig: Trig::None,
            xpow: self.xpow + other.xpow,
        })
    }

    pub fn eval(&self, pt: &EvalPoint<'_>) -> Result<f64, ExprError> {
        let mut v = pt.x.powi(self.xpow as i32) * self.trig.eval(pt.x);
        if self.eps == 1 {
            v *= pt.eps;
        }
        for (o, e) in &self.jet {
            let y = pt
                .jets
                .get(*o as usize)
                .ok_or_else(|| ExprError::MissingValue(jet_name(*o)))?;
            v *= y.powi(*e as i32);
        }
        Ok(v)
    }

    fn factors(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.xpow == 1 {
            out.push("x".to_string());
        } else if self.xpow > 1 {
            out.push(format!("x^{}", self.xpow));
        }
        match self.trig {
            Trig::None => {}
            Trig::Sin(1) => out.push("sin(x)".into()),
            Trig::Cos(1) => out.push("cos(x)".into()),
            Trig::Sin(m) => out.push(format!("sin({m}*x)")),
            Trig::Cos(m) => out.push(format!("cos({m}*x)")),
        }
        for (o, e) in &self.jet {
            let name = jet_name(*o);
            if *e == 1 {
                out.push(name);
            } else {
                out.push(format!("{name}^{e}"));
            }
        }
        if self.eps == 1 {
            out.push("eps".into());
        }
        out
    }
}

/// Grammar spelling of the jet variable of order `j`.
pub fn jet_name(order: u32) -> String {
    match order {
        0 => "y".into(),
        1..=3 => format!("y{}", "'".repeat(order as usize)),
        k => format!("y^({k})"),
    }
}

/// Numeric evaluation point for canonical expressions.
#[derive(Clone, Debug)]
pub struct EvalPoint<'a> {
    pub x: f64,
    pub eps: f64,
    pub jets: &'a [f64],
    pub unknowns: &'a BTreeMap<String, f64>,
}

/// Canonical sum of terms `coeff · monomial` with affine-rational coefficients.
///
/// Structural equality decides semantic equality inside the fragment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CanonExpr {
    terms: BTreeMap<Monomial, LinForm>,
}

impl CanonExpr {
    pub fn zero() -> Self {
        CanonExpr::default()
    }

    pub fn one() -> Self {
        CanonExpr::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        CanonExpr::term(LinForm::constant(r), Monomial::one())
    }

    pub fn integer(n: i64) -> Self {
        CanonExpr::constant(int(n))
    }

    pub fn term(coeff: LinForm, mono: Monomial) -> Self {
        let mut e = CanonExpr::zero();
        e.add_term(mono, &coeff);
        e
    }

    pub fn monomial(mono: Monomial) -> Self {
        CanonExpr::term(LinForm::constant(Rational::one()), mono)
    }

    pub fn x() -> Self {
        CanonExpr::monomial(Monomial {
            xpow: 1,
            ..Monomial::default()
        })
    }

    pub fn x_pow(k: u32) -> Self {
        CanonExpr::monomial(Monomial {
            xpow: k,
            ..Monomial::default()
        })
    }

    /// The jet variable `y^(order)`.
    pub fn jet(order: u32) -> Self {
        CanonExpr::monomial(Monomial::jet_power(order, 1))
    }

    pub fn y() -> Self {
        CanonExpr::jet(0)
    }

    pub fn eps() -> Self {
        CanonExpr::monomial(Monomial {
            eps: 1,
            ..Monomial::default()
        })
    }

    pub fn sin(m: u32) -> Self {
        CanonExpr::trig(Trig::Sin(m))
    }

    pub fn cos(m: u32) -> Self {
        CanonExpr::trig(Trig::Cos(m))
    }

    pub fn trig(t: Trig) -> Self {
        if matches!(t, Trig::Sin(0)) {
            return CanonExpr::zero();
        }
        let t = if matches!(t, Trig::Cos(0)) {
            Trig::None
        } else {
            t
        };
        CanonExpr::monomial(Monomial {
            trig: t,
            ..Monomial::default()
        })
    }

    pub fn unknown(sym: UnknownSym) -> Self {
        CanonExpr::term(LinForm::unknown(sym), Monomial::one())
    }

    fn add_term(&mut self, mono: Monomial, coeff: &LinForm) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(c) => {
                c.add_assign(coeff);
                if c.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coeff.clone());
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LinForm)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Option<&LinForm> {
        self.terms.get(mono)
    }

    /// Rational value when the expression is a bare constant (or zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                if m.is_one() {
                    c.as_constant().cloned()
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn has_unknowns(&self) -> bool {
        self.terms.values().any(LinForm::has_unknowns)
    }

    pub fn unknowns(&self) -> BTreeSet<UnknownSym> {
        self.terms
            .values()
            .flat_map(|c| c.unknown_terms().keys().cloned())
            .collect()
    }

    pub fn max_jet_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(Monomial::max_jet_order).max()
    }

    pub fn has_eps(&self) -> bool {
        self.terms.keys().any(|m| m.eps > 0)
    }

    pub fn has_jets(&self) -> bool {
        self.terms.keys().any(|m| !m.jet.is_empty())
    }

    pub fn has_x(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.xpow > 0 || m.trig != Trig::None)
    }

    pub fn add(&self, other: &CanonExpr) -> CanonExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &CanonExpr) -> CanonExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CanonExpr {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, r: &Rational) -> CanonExpr {
        if r.is_zero() {
            return CanonExpr::zero();
        }
        CanonExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.scale(r)))
                .collect(),
        }
    }

    /// Multiplies every coefficient (which must be unknown-free) by an unknown.
    pub fn times_unknown(&self, sym: &UnknownSym) -> Result<CanonExpr, ExprError> {
        self.mul(&CanonExpr::unknown(sym.clone()))
    }

    /// Distributing product with trig linearization and ε² truncation.
    pub fn mul(&self, other: &CanonExpr) -> Result<CanonExpr, ExprError> {
        self.mul_impl(other, true)
    }

    /// Product that refuses to drop ε² terms instead of truncating them.
    pub(crate) fn mul_strict(&self, other: &CanonExpr) -> Result<CanonExpr, ExprError> {
        self.mul_impl(other, false)
    }

    fn mul_impl(&self, other: &CanonExpr, truncate: bool) -> Result<CanonExpr, ExprError> {
        let mut out = CanonExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let coeff = ca.mul(cb)?;
                let Some(base) = ma.merge_without_trig(mb) else {
                    if truncate {
                        continue;
                    }
                    return Err(ExprError::EpsOverflow);
                };
                for (w, t) in ma.trig.product(mb.trig) {
                    let mut m = base.clone();
                    m.trig = t;
                    out.add_term(m, &coeff.scale(&w));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<CanonExpr, ExprError> {
        let mut acc = CanonExpr::one();
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Coefficient of `ε^k` (k = 0 or 1), with the ε factor removed.
    pub fn eps_part(&self, k: u8) -> CanonExpr {
        CanonExpr {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.eps == k)
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.eps = 0;
                    (m, c.clone())
                })
                .collect(),
        }
    }

    pub fn split_eps(&self) -> (CanonExpr, CanonExpr) {
        (self.eps_part(0), self.eps_part(1))
    }

    /// `a + ε b` from its two ε-graded parts (ε already absent from both).
    pub fn from_eps_parts(order0: &CanonExpr, order1: &CanonExpr) -> Result<CanonExpr, ExprError> {
        Ok(order0.add(&order1.mul(&CanonExpr::eps())?))
    }

    /// ∂/∂x acting on the explicit x-dependence only.
    pub fn partial_x(&self) -> CanonExpr {
        let mut out = CanonExpr::zero();
        for (m, c) in &self.terms {
            if m.xpow > 0 {
                let mut d = m.clone();
                d.xpow -= 1;
                out.add_term(d, &c.scale(&int(m.xpow as i64)));
            }
            match m.trig {
                Trig::None => {}
                Trig::Sin(k) => {
                    let mut d = m.clone();
                    d.trig = Trig::Cos(k);
                    out.add_term(d, &c.scale(&int(k as i64)));
                }
                Trig::Cos(k) => {
                    let mut d = m.clone();
                    d.trig = Trig::Sin(k);
                    out.add_term(d, &c.scale(&int(-(k as i64))));
                }
            }
        }
        out
    }

    /// ∂/∂y^(order), treating jet variables as independent coordinates.
    pub fn partial_jet(&self, order: u32) -> CanonExpr {
        let mut out = CanonExpr::zero();
        for (m, c) in &self.terms {
            let e = m.jet_exponent(order);
            if e == 0 {
                continue;
            }
            let mut d = m.clone();
            if e == 1 {
                d.jet.remove(&order);
            } else {
                d.jet.insert(order, e - 1);
            }
            out.add_term(d, &c.scale(&int(e as i64)));
        }
        out
    }

    /// ∂/∂ε.
    pub fn partial_eps(&self) -> CanonExpr {
        self.eps_part(1)
    }

    /// Total derivative `D = ∂x + Σ y^(j+1) ∂/∂y^(j)`.
    pub fn total_derivative(&self) -> CanonExpr {
        let mut out = self.partial_x();
        let orders: BTreeSet<u32> = self
            .terms
            .keys()
            .flat_map(|m| m.jet.keys().copied())
            .collect();
        for j in orders {
            for (m, c) in &self.partial_jet(j).terms {
                out.add_term(m.times_jet(j + 1), c);
            }
        }
        out
    }

    pub fn total_derivative_n(&self, n: u32) -> CanonExpr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.total_derivative();
        }
        e
    }

    /// Replaces selected jet variables by expressions; `replacement(j)` returns
    /// `Some(r)` for every order to be replaced.
    pub fn replace_jets<'r>(
        &self,
        replacement: impl Fn(u32) -> Option<&'r CanonExpr>,
    ) -> Result<CanonExpr, ExprError> {
        let mut out = CanonExpr::zero();
        let mut pow_cache: BTreeMap<(u32, u32), CanonExpr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut kept = m.clone();
            let mut factor = CanonExpr::one();
            for (o, e) in &m.jet {
                if let Some(r) = replacement(*o) {
                    kept.jet.remove(o);
                    let p = match pow_cache.get(&(*o, *e)) {
                        Some(p) => p.clone(),
                        None => {
                            let p = r.pow(*e)?;
                            pow_cache.insert((*o, *e), p.clone());
                            p
                        }
                    };
                    factor = factor.mul(&p)?;
                }
            }
            let head = CanonExpr::term(c.clone(), kept);
            out = out.add(&head.mul(&factor)?);
        }
        Ok(out)
    }

    /// Restriction to solutions of `y^(n) = r`: replaces `y^(n)` by `r` and
    /// every `y^(n+k)` by the k-th total derivative of `r`, itself restricted,
    /// until no jet order ≥ n remains. ε² is truncated.
    pub fn substitute_jet(&self, n: u32, r: &CanonExpr) -> Result<CanonExpr, ExprError> {
        let Some(top) = self.max_jet_order() else {
            return Ok(self.clone());
        };
        if top < n {
            return Ok(self.clone());
        }
        let mut chain: Vec<CanonExpr> = vec![r.clone()];
        for _ in n..top {
            let last = chain.last().expect("chain starts non-empty");
            let d = last.total_derivative();
            let restricted = d.replace_jets(|o| if o == n { Some(r) } else { None })?;
            chain.push(restricted);
        }
        self.replace_jets(|o| {
            if o >= n {
                chain.get((o - n) as usize)
            } else {
                None
            }
        })
    }

    /// Composition with a function of x: every `y^(j)` becomes the j-th
    /// x-derivative of `y`. `y` may carry ε; products truncate at ε².
    pub fn compose(&self, y: &CanonExpr) -> Result<CanonExpr, ExprError> {
        let Some(top) = self.max_jet_order() else {
            return Ok(self.clone());
        };
        let mut derivs = vec![y.clone()];
        for _ in 0..top {
            let next = derivs.last().expect("non-empty").partial_x();
            derivs.push(next);
        }
        self.replace_jets(|o| derivs.get(o as usize))
    }

    pub fn substitute_unknowns(&self, values: &BTreeMap<UnknownSym, Rational>) -> CanonExpr {
        let mut out = CanonExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.substitute(values));
        }
        out
    }

    /// Drops every ε-carrying term (evaluation at ε = 0).
    pub fn at_eps_zero(&self) -> CanonExpr {
        self.eps_part(0)
    }

    pub fn eval(&self, pt: &EvalPoint<'_>) -> Result<f64, ExprError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            acc += c.eval(pt.unknowns)? * m.eval(pt)?;
        }
        Ok(acc)
    }

    /// Multiplies by a rational so that every coefficient becomes an integer
    /// with gcd 1 and the first term is positive. Unknown-free input only.
    pub fn primitive_part(&self) -> CanonExpr {
        use num_integer::Integer;
        let mut lcm = num_bigint::BigInt::one();
        let mut gcd = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            if let Some(r) = c.as_constant() {
                lcm = lcm.lcm(r.denom());
            }
        }
        for c in self.terms.values() {
            if let Some(r) = c.as_constant() {
                let n = (r * Rational::from_integer(lcm.clone())).to_integer();
                gcd = gcd.gcd(&n);
            }
        }
        if gcd.is_zero() {
            return self.clone();
        }
        let mut factor = Rational::new(lcm, gcd);
        if let Some(first) = self.terms.values().next().and_then(|c| c.as_constant()) {
            if first.is_negative() {
                factor = -factor;
            }
        }
        self.scale(&factor)
    }
}

impl fmt::Display for CanonExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let factors = m.factors();
            let (negative, coeff_text) = match c.as_constant() {
                Some(r) => {
                    let mag = r.abs();
                    let text = if mag.is_one() && !factors.is_empty() {
                        None
                    } else {
                        Some(fmt_rational(&mag))
                    };
                    (r.is_negative(), text)
                }
                None => (false, Some(format!("({c})"))),
            };
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else if negative {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if let Some(t) = coeff_text {
                parts.push(t);
            }
            parts.extend(factors);
            f.write_str(&parts.join("*"))?;
            first = false;
        }
        Ok(())
    }
}

/// Numeric value of an unknown-free coefficient.
pub fn coeff_f64(c: &LinForm) -> Option<f64> {
    c.as_constant().map(rational_to_f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::linform::rat;

    fn y() -> CanonExpr {
        CanonExpr::y()
    }
    fn yp() -> CanonExpr {
        CanonExpr::jet(1)
    }

    #[test]
    fn sin_squared_linearizes() {
        let s = CanonExpr::sin(1);
        let sq = s.mul(&s).unwrap();
        let expected = CanonExpr::constant(rat(1, 2)).sub(&CanonExpr::cos(2).scale(&rat(1, 2)));
        assert_eq!(sq, expected);
    }

    #[test]
    fn sin_cos_product() {
        let p = CanonExpr::sin(1).mul(&CanonExpr::cos(1)).unwrap();
        assert_eq!(p, CanonExpr::sin(2).scale(&rat(1, 2)));
    }

    #[test]
    fn mixed_product_merges_jets() {
        let a = y().mul(&CanonExpr::sin(1)).unwrap();
        let b = yp().mul(&CanonExpr::cos(1)).unwrap();
        let p = a.mul(&b).unwrap();
        let expected = y()
            .mul(&yp())
            .unwrap()
            .mul(&CanonExpr::sin(2))
            .unwrap()
            .scale(&rat(1, 2));
        assert_eq!(p, expected);
    }

    #[test]
    fn eps_squared_truncates() {
        let e = CanonExpr::eps();
        assert!(e.mul(&e.mul(&y()).unwrap()).unwrap().is_zero());
        assert!(matches!(e.mul_strict(&e), Err(ExprError::EpsOverflow)));
    }

    #[test]
    fn additive_inverse() {
        assert!(y().add(&y().neg()).is_zero());
    }

    #[test]
    fn partial_x_of_x_cos_2x() {
        let e = CanonExpr::x().mul(&CanonExpr::cos(2)).unwrap();
        let expected = CanonExpr::cos(2).sub(
            &CanonExpr::x()
                .mul(&CanonExpr::sin(2))
                .unwrap()
                .scale(&int(2)),
        );
        assert_eq!(e.partial_x(), expected);
    }

    #[test]
    fn partial_jet_of_cubic() {
        let e = yp().pow(3).unwrap().scale(&rat(2, 3));
        assert_eq!(e.partial_jet(1), yp().pow(2).unwrap().scale(&int(2)));
        let f = y().pow(2).unwrap().mul(&CanonExpr::sin(1)).unwrap();
        assert_eq!(
            f.partial_jet(0),
            y().mul(&CanonExpr::sin(1)).unwrap().scale(&int(2))
        );
    }

    #[test]
    fn total_derivative_examples() {
        let d = yp().pow(2).unwrap().total_derivative();
        assert_eq!(d, yp().mul(&CanonExpr::jet(2)).unwrap().scale(&int(2)));

        let e = y().pow(2).unwrap().mul(&CanonExpr::sin(1)).unwrap();
        let expected = y().pow(2).unwrap().mul(&CanonExpr::cos(1)).unwrap().add(
            &y().mul(&yp())
                .unwrap()
                .mul(&CanonExpr::sin(1))
                .unwrap()
                .scale(&int(2)),
        );
        assert_eq!(e.total_derivative(), expected);
    }

    #[test]
    fn substitute_second_order_into_third() {
        // y''' with y'' := -y + eps(x + 1 + y^2)
        let r = y().neg().add(
            &CanonExpr::eps()
                .mul(
                    &CanonExpr::x()
                        .add(&CanonExpr::one())
                        .add(&y().pow(2).unwrap()),
                )
                .unwrap(),
        );
        let out = CanonExpr::jet(3).substitute_jet(2, &r).unwrap();
        // hand expansion: -y' + eps(1 + 2 y y')
        let expected = yp().neg().add(
            &CanonExpr::eps()
                .mul(&CanonExpr::one().add(&y().mul(&yp()).unwrap().scale(&int(2))))
                .unwrap(),
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn substitute_zero_kills_term() {
        let e = CanonExpr::jet(2).mul(&yp()).unwrap();
        assert!(e.substitute_jet(2, &CanonExpr::zero()).unwrap().is_zero());
    }

    #[test]
    fn display_orders_terms() {
        let e = CanonExpr::eps()
            .add(&yp().scale(&rat(2, 3)))
            .add(&CanonExpr::sin(2).neg());
        assert_eq!(e.to_string(), "-sin(2*x) + 2/3*y' + eps");
    }

    #[test]
    fn primitive_part_clears_denominators() {
        let e = yp().scale(&rat(-2, 3)).add(&y().scale(&rat(4, 9)));
        let p = e.primitive_part();
        assert_eq!(p, y().scale(&int(2)).sub(&yp().scale(&int(3))));
    }
}
