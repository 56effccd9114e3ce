//! Exact rational linear algebra for coefficient matching.
//!
//! A [`CanonExpr`] whose coefficients are affine in unknowns vanishes
//! identically iff every coefficient vanishes; [`split`] turns it into one
//! row per monomial and [`solve`] runs Gauss–Jordan elimination over the
//! rationals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::expr::{fmt_rational, CanonExpr, Rational, UnknownSym};

/// One equation `Σ coeffs[u]·u = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Row {
    pub coeffs: BTreeMap<UnknownSym, Rational>,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: BTreeMap<UnknownSym, Rational>, rhs: Rational) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Row { coeffs, rhs }
    }

    /// Scales so the first nonzero coefficient is 1 (used for deduplication).
    fn normalized(&self) -> Row {
        match self.coeffs.values().next() {
            Some(lead) => {
                let inv = lead.recip();
                Row {
                    coeffs: self
                        .coeffs
                        .iter()
                        .map(|(u, c)| (u.clone(), c * &inv))
                        .collect(),
                    rhs: &self.rhs * &inv,
                }
            }
            None => self.clone(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty() && self.rhs.is_zero()
    }

    /// Left side minus right side at the given point.
    pub fn residual(&self, values: &BTreeMap<UnknownSym, Rational>) -> Rational {
        let mut acc = -self.rhs.clone();
        for (u, c) in &self.coeffs {
            if let Some(v) = values.get(u) {
                acc += c * v;
            }
        }
        acc
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 = {}", fmt_rational(&self.rhs));
        }
        let mut first = true;
        for (u, c) in &self.coeffs {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            if mag.is_one() {
                write!(f, "{u}")?;
            } else {
                write!(f, "{}*{u}", fmt_rational(&mag))?;
            }
            first = false;
        }
        write!(f, " = {}", fmt_rational(&self.rhs))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    unknowns: Vec<UnknownSym>,
    rows: Vec<Row>,
    seen: BTreeSet<Row>,
}

impl LinearSystem {
    /// Empty system over the given unknowns, in declaration order.
    pub fn new(unknowns: Vec<UnknownSym>) -> Self {
        LinearSystem {
            unknowns,
            rows: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    pub fn unknowns(&self) -> &[UnknownSym] {
        &self.unknowns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn declare(&mut self, u: UnknownSym) {
        if !self.unknowns.contains(&u) {
            self.unknowns.push(u);
        }
    }

    /// Adds a row, declaring any new unknowns; duplicates and `0 = 0` are skipped.
    pub fn push(&mut self, row: Row) {
        if row.is_trivial() {
            return;
        }
        for u in row.coeffs.keys() {
            self.declare(u.clone());
        }
        let key = row.normalized();
        if self.seen.insert(key) {
            self.rows.push(row);
        }
    }

    /// Adds one row per monomial of `e` (its coefficient must vanish).
    pub fn push_expr(&mut self, e: &CanonExpr) {
        for (_, coeff) in e.terms() {
            let row = Row::new(
                coeff.unknown_terms().clone(),
                -coeff.constant_part().clone(),
            );
            self.push(row);
        }
    }

    pub fn extend(&mut self, other: &LinearSystem) {
        for u in &other.unknowns {
            self.declare(u.clone());
        }
        for r in &other.rows {
            self.push(r.clone());
        }
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.unknowns.iter().map(|u| u.name()).collect();
        writeln!(f, "unknowns: {}", names.join(", "))?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

/// Splits `e = 0` into one linear equation per independent monomial.
///
/// Unknowns are declared in natural order; use [`split_with`] to fix the
/// declaration order explicitly.
pub fn split(e: &CanonExpr) -> LinearSystem {
    split_with(e, &e.unknowns().into_iter().collect::<Vec<_>>())
}

pub fn split_with(e: &CanonExpr, unknowns: &[UnknownSym]) -> LinearSystem {
    let mut s = LinearSystem::new(unknowns.to_vec());
    s.push_expr(e);
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    pub unknowns: Vec<UnknownSym>,
    pub rank: usize,
    /// Free variables set to zero.
    pub particular: BTreeMap<UnknownSym, Rational>,
    /// One vector per free variable (in declaration order), that variable set to 1.
    pub nullspace: Vec<BTreeMap<UnknownSym, Rational>>,
    /// Unknowns equal to zero in every solution.
    pub forced_zero: Vec<UnknownSym>,
    pub free: Vec<UnknownSym>,
}

impl SolutionSpace {
    pub fn nullity(&self) -> usize {
        self.nullspace.len()
    }

    /// `particular + Σ weights[i]·nullspace[i]`.
    pub fn combine(&self, weights: &[Rational]) -> BTreeMap<UnknownSym, Rational> {
        let mut out = self.particular.clone();
        for (w, v) in weights.iter().zip(&self.nullspace) {
            for (u, c) in v {
                let e = out.entry(u.clone()).or_insert_with(Rational::zero);
                *e += w * c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LinsolveError {
    #[error("inconsistent system; reduced row {certificate}")]
    Inconsistent { certificate: Row },
}

fn pivot_cost(r: &Rational) -> num_bigint::BigInt {
    (r.numer() * r.denom()).abs()
}

/// Exact Gauss–Jordan elimination.
pub fn solve(s: &LinearSystem) -> Result<SolutionSpace, LinsolveError> {
    let n = s.unknowns.len();
    let index: BTreeMap<&UnknownSym, usize> =
        s.unknowns.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let mut m: Vec<Vec<Rational>> = s
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![Rational::zero(); n + 1];
            for (u, c) in &r.coeffs {
                v[index[u]] = c.clone();
            }
            v[n] = r.rhs.clone();
            v
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m.len() {
            break;
        }
        let best = (row..m.len())
            .filter(|&i| !m[i][col].is_zero())
            .min_by(|&a, &b| {
                pivot_cost(&m[a][col])
                    .cmp(&pivot_cost(&m[b][col]))
                    .then(a.cmp(&b))
            });
        let Some(p) = best else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (dst, src) in r.iter_mut().zip(&pivot_row).skip(col) {
                if !src.is_zero() {
                    *dst -= &f * src;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }

    for r in &m[row..] {
        if !r[n].is_zero() {
            return Err(LinsolveError::Inconsistent {
                certificate: Row::new(BTreeMap::new(), r[n].clone()),
            });
        }
    }

    let rank = pivots.len();
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_set.contains(c)).collect();

    let mut particular = BTreeMap::new();
    for (r, &c) in pivots.iter().enumerate() {
        particular.insert(s.unknowns[c].clone(), m[r][n].clone());
    }
    for &c in &free_cols {
        particular.insert(s.unknowns[c].clone(), Rational::zero());
    }

    let mut nullspace = Vec::with_capacity(free_cols.len());
    for &f in &free_cols {
        let mut v: BTreeMap<UnknownSym, Rational> = s
            .unknowns
            .iter()
            .map(|u| (u.clone(), Rational::zero()))
            .collect();
        v.insert(s.unknowns[f].clone(), Rational::one());
        for (r, &c) in pivots.iter().enumerate() {
            if !m[r][f].is_zero() {
                v.insert(s.unknowns[c].clone(), -m[r][f].clone());
            }
        }
        nullspace.push(v);
    }

    let forced_zero = pivots
        .iter()
        .enumerate()
        .filter(|(r, _)| m[*r][n].is_zero() && free_cols.iter().all(|&f| m[*r][f].is_zero()))
        .map(|(_, &c)| s.unknowns[c].clone())
        .collect();

    Ok(SolutionSpace {
        unknowns: s.unknowns.clone(),
        rank,
        particular,
        nullspace,
        forced_zero,
        free: free_cols.iter().map(|&c| s.unknowns[c].clone()).collect(),
    })
}

/// Coefficients expressing `target` as a rational combination of `basis`, if
/// it lies in their span. All expressions must be unknown-free.
pub fn span_coordinates(basis: &[Vec<CanonExpr>], target: &[CanonExpr]) -> Option<Vec<Rational>> {
    let syms: Vec<UnknownSym> = (0..basis.len())
        .map(|i| UnknownSym::new(format!("w{i}")))
        .collect();
    let mut sys = LinearSystem::new(syms.clone());
    for (k, t) in target.iter().enumerate() {
        let mut e = t.neg();
        for (b, s) in basis.iter().zip(&syms) {
            let comp = b.get(k).cloned().unwrap_or_default();
            e = e.add(&comp.times_unknown(s).ok()?);
        }
        sys.push_expr(&e);
    }
    let sol = solve(&sys).ok()?;
    Some(syms.iter().map(|s| sol.particular[s].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canon_from_str, int, rat, Bindings};

    fn u(name: &str) -> UnknownSym {
        UnknownSym::new(name)
    }

    fn row(pairs: &[(&str, i64)], rhs: i64) -> Row {
        Row::new(
            pairs.iter().map(|(n, c)| (u(n), int(*c))).collect(),
            int(rhs),
        )
    }

    #[test]
    fn split_by_monomial() {
        let e = canon_from_str("(C1+C2)*y + (C1-C2)*sin(x)", &Bindings::default()).unwrap();
        let s = split(&e);
        assert_eq!(s.rows().len(), 2);
        let sol = solve(&s).unwrap();
        assert_eq!(sol.forced_zero, vec![u("C1"), u("C2")]);
        assert_eq!(sol.nullity(), 0);
    }

    #[test]
    fn two_by_two() {
        let mut s = LinearSystem::new(vec![u("x"), u("y")]);
        s.push(row(&[("x", 1), ("y", 1)], 2));
        s.push(row(&[("x", 1), ("y", -1)], 0));
        let sol = solve(&s).unwrap();
        assert_eq!(sol.particular[&u("x")], int(1));
        assert_eq!(sol.particular[&u("y")], int(1));
        assert!(sol.nullspace.is_empty());
    }

    #[test]
    fn inconsistent_system_has_certificate() {
        let mut s = LinearSystem::new(vec![u("a")]);
        s.push(row(&[("a", 1)], 1));
        s.push(row(&[("a", 2)], 3));
        match solve(&s) {
            Err(LinsolveError::Inconsistent { certificate }) => {
                assert!(certificate.coeffs.is_empty());
                // pivot on a = 1, then 3 - 2*1
                assert_eq!(certificate.rhs, int(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_rows_are_dropped() {
        let mut s = LinearSystem::new(vec![u("a"), u("b")]);
        s.push(row(&[("a", 1), ("b", 2)], 0));
        s.push(row(&[("a", 3), ("b", 6)], 0));
        assert_eq!(s.rows().len(), 1);
    }

    #[test]
    fn nullspace_follows_declaration_order() {
        // a + b + c = 0 with a declared first: a is the pivot, b and c free.
        let mut s = LinearSystem::new(vec![u("a"), u("b"), u("c")]);
        s.push(row(&[("a", 1), ("b", 1), ("c", 1)], 0));
        let sol = solve(&s).unwrap();
        assert_eq!(sol.free, vec![u("b"), u("c")]);
        assert_eq!(sol.nullspace[0][&u("b")], int(1));
        assert_eq!(sol.nullspace[0][&u("a")], int(-1));
        assert_eq!(sol.rank + sol.nullity(), 3);
    }

    #[test]
    fn span_membership() {
        let b = Bindings::default();
        let basis = vec![
            vec![canon_from_str("sin(x)", &b).unwrap()],
            vec![canon_from_str("cos(x)", &b).unwrap()],
        ];
        let t = vec![canon_from_str("2*sin(x) - 1/3*cos(x)", &b).unwrap()];
        assert_eq!(span_coordinates(&basis, &t), Some(vec![int(2), rat(-1, 3)]));
        let off = vec![canon_from_str("sin(2*x)", &b).unwrap()];
        assert_eq!(span_coordinates(&basis, &off), None);
    }
}
