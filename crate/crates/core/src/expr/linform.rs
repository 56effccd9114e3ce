use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExprError;

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Builds `num/den` as an exact rational.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator overflowed f64 on their own
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    decimal_to_rational(t)
}

pub(crate) fn decimal_to_rational(t: &str) -> Option<Rational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(n, d);
    Some(if neg { -r } else { r })
}

/// Name of an undetermined coefficient (`C1`, `a7`, `xi0_3`, ...).
///
/// Ordered naturally: alphabetic prefix first, then the trailing integer
/// numerically, so `C2 < C10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnknownSym(String);

impl UnknownSym {
    pub fn new(name: impl Into<String>) -> Self {
        UnknownSym(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    fn natural_key(&self) -> (&str, Option<u64>) {
        let s = self.0.as_str();
        let split = s
            .char_indices()
            .rev()
            .take_while(|(_, c)| c.is_ascii_digit())
            .last()
            .map(|(i, _)| i);
        match split {
            Some(i) if i > 0 => (&s[..i], s[i..].parse().ok()),
            _ => (s, None),
        }
    }
}

impl Ord for UnknownSym {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, na) = self.natural_key();
        let (pb, nb) = other.natural_key();
        pa.cmp(pb)
            .then(na.cmp(&nb))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for UnknownSym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for UnknownSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Affine form `constant + Σ coeff·unknown` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LinForm {
    constant: Rational,
    terms: BTreeMap<UnknownSym, Rational>,
}

impl LinForm {
    pub fn zero() -> Self {
        LinForm::default()
    }

    pub fn constant(value: Rational) -> Self {
        LinForm {
            constant: value,
            terms: BTreeMap::new(),
        }
    }

    pub fn unknown(sym: UnknownSym) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(sym, Rational::one());
        LinForm {
            constant: Rational::zero(),
            terms,
        }
    }

    pub fn from_parts(constant: Rational, terms: BTreeMap<UnknownSym, Rational>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LinForm { constant, terms }
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn unknown_terms(&self) -> &BTreeMap<UnknownSym, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn has_unknowns(&self) -> bool {
        !self.terms.is_empty()
    }

    /// The rational value when no unknowns are present.
    pub fn as_constant(&self) -> Option<&Rational> {
        if self.terms.is_empty() {
            Some(&self.constant)
        } else {
            None
        }
    }

    pub fn add_assign(&mut self, other: &LinForm) {
        self.constant += &other.constant;
        for (sym, c) in &other.terms {
            let entry = self.terms.entry(sym.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                self.terms.remove(sym);
            }
        }
    }

    pub fn add(&self, other: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn neg(&self) -> LinForm {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, r: &Rational) -> LinForm {
        if r.is_zero() {
            return LinForm::zero();
        }
        LinForm {
            constant: &self.constant * r,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * r)).collect(),
        }
    }

    /// Product of two forms; defined only when at most one carries unknowns.
    pub fn mul(&self, other: &LinForm) -> Result<LinForm, ExprError> {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), _) => Ok(other.scale(a)),
            (_, Some(b)) => Ok(self.scale(b)),
            _ => Err(ExprError::NonlinearUnknowns),
        }
    }

    /// Replaces the listed unknowns by values; others are kept.
    pub fn substitute(&self, values: &BTreeMap<UnknownSym, Rational>) -> LinForm {
        let mut out = LinForm::constant(self.constant.clone());
        for (sym, c) in &self.terms {
            match values.get(sym) {
                Some(v) => out.constant += c * v,
                None => {
                    out.terms.insert(sym.clone(), c.clone());
                }
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn eval(&self, values: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
        let mut acc = rational_to_f64(&self.constant);
        for (sym, c) in &self.terms {
            let v = values
                .get(sym.name())
                .ok_or_else(|| ExprError::MissingValue(sym.name().to_string()))?;
            acc += rational_to_f64(c) * v;
        }
        Ok(acc)
    }

    /// True when the form is a single positive rational without unknowns.
    pub fn is_positive_constant(&self) -> bool {
        self.terms.is_empty() && self.constant.is_positive()
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str(&fmt_rational(&self.constant));
        }
        let mut first = true;
        for (sym, c) in &self.terms {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if mag.is_one() {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{}*{sym}", fmt_rational(&mag))?;
            }
            first = false;
        }
        if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() {
                "-"
            } else {
                "+"
            };
            write!(f, " {sign} {}", fmt_rational(&self.constant.abs()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_ordering_of_unknowns() {
        let mut v = vec![
            UnknownSym::new("C10"),
            UnknownSym::new("C2"),
            UnknownSym::new("a1"),
            UnknownSym::new("C1"),
        ];
        v.sort();
        let names: Vec<_> = v.iter().map(|s| s.name()).collect();
        assert_eq!(names, ["C1", "C2", "C10", "a1"]);
    }

    #[test]
    fn cancellation_removes_entries() {
        let c1 = LinForm::unknown(UnknownSym::new("C1"));
        let sum = c1.add(&c1.neg());
        assert!(sum.is_zero());
        assert!(sum.unknown_terms().is_empty());
    }

    #[test]
    fn product_of_two_unknown_forms_is_rejected() {
        let a = LinForm::unknown(UnknownSym::new("C1"));
        let b = LinForm::unknown(UnknownSym::new("C2"));
        assert!(matches!(a.mul(&b), Err(ExprError::NonlinearUnknowns)));
        let k = LinForm::constant(rat(2, 3));
        assert_eq!(
            a.mul(&k).unwrap().unknown_terms()[&UnknownSym::new("C1")],
            rat(2, 3)
        );
    }

    #[test]
    fn rational_text_forms() {
        assert_eq!(parse_rational("2/3"), Some(rat(2, 3)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(fmt_rational(&rat(-4, 6)), "-2/3");
    }

    #[test]
    fn display_mixed_form() {
        let mut t = BTreeMap::new();
        t.insert(UnknownSym::new("C1"), int(1));
        t.insert(UnknownSym::new("C2"), rat(-1, 2));
        let f = LinForm::from_parts(int(3), t);
        assert_eq!(f.to_string(), "C1 - 1/2*C2 + 3");
    }
}
