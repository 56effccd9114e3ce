use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::canon::{jet_name, CanonExpr, Monomial, Trig};
use super::linform::{int, rational_to_f64, Rational};
use super::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree as written; may hold irrational constants and frequencies
/// that the canonical form cannot represent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ast {
    /// Integer or finite-decimal literal.
    Num(Rational),
    /// Named constant (`c`, `C1`, `pi`, ...).
    Const(String),
    /// The independent variable (`x`, also spelled `z`).
    Indep,
    /// Jet variable `y^(j)`.
    Jet(u32),
    Eps,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

/// Variable values for [`Ast::eval`].
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub x: Option<f64>,
    pub eps: Option<f64>,
    pub jets: Vec<f64>,
    pub consts: BTreeMap<String, f64>,
}

impl Env {
    pub fn at(x: f64) -> Self {
        Env {
            x: Some(x),
            ..Env::default()
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_jets(mut self, jets: Vec<f64>) -> Self {
        self.jets = jets;
        self
    }

    pub fn with_const(mut self, name: &str, value: f64) -> Self {
        self.consts.insert(name.to_string(), value);
        self
    }
}

impl Ast {
    pub fn num(n: i64) -> Ast {
        Ast::Num(int(n))
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Ast::Num(r) if r.is_zero())
    }

    fn is_one_literal(&self) -> bool {
        matches!(self, Ast::Num(r) if r.is_one())
    }

    pub fn add(a: Ast, b: Ast) -> Ast {
        if a.is_zero_literal() {
            return b;
        }
        if b.is_zero_literal() {
            return a;
        }
        Ast::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Ast, b: Ast) -> Ast {
        if b.is_zero_literal() {
            return a;
        }
        if a.is_zero_literal() {
            return Ast::neg(b);
        }
        Ast::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Ast, b: Ast) -> Ast {
        if a.is_zero_literal() || b.is_zero_literal() {
            return Ast::num(0);
        }
        if a.is_one_literal() {
            return b;
        }
        if b.is_one_literal() {
            return a;
        }
        Ast::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Ast, b: Ast) -> Ast {
        if b.is_one_literal() {
            return a;
        }
        Ast::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Ast) -> Ast {
        match a {
            Ast::Num(r) if r.is_zero() => Ast::Num(r),
            Ast::Neg(inner) => *inner,
            other => Ast::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Ast, b: Ast) -> Ast {
        if b.is_one_literal() {
            return a;
        }
        Ast::Pow(Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Ast) -> Ast {
        Ast::Call(f, Box::new(a))
    }

    /// A rational literal spelled through the grammar (`p` or `p/q`).
    pub fn rational(r: &Rational) -> Ast {
        let mag = r.abs();
        let lit = if mag.is_integer() {
            Ast::Num(mag)
        } else {
            Ast::div(
                Ast::Num(Rational::from_integer(mag.numer().clone())),
                Ast::Num(Rational::from_integer(mag.denom().clone())),
            )
        };
        if r.is_negative() {
            Ast::neg(lit)
        } else {
            lit
        }
    }

    /// Whether the tree mentions the independent variable or any jet variable.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Ast::Indep | Ast::Jet(_) => true,
            Ast::Num(_) | Ast::Const(_) | Ast::Eps => false,
            Ast::Neg(a) | Ast::Call(_, a) => a.depends_on_x(),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Pow(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    pub fn max_jet_order(&self) -> Option<u32> {
        match self {
            Ast::Jet(j) => Some(*j),
            Ast::Num(_) | Ast::Const(_) | Ast::Eps | Ast::Indep => None,
            Ast::Neg(a) | Ast::Call(_, a) => a.max_jet_order(),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Pow(a, b) => {
                a.max_jet_order().max(b.max_jet_order())
            }
        }
    }

    /// Replaces named constants by literal subtrees.
    pub fn bind(&self, values: &BTreeMap<String, Ast>) -> Ast {
        let rec = |a: &Ast| Box::new(a.bind(values));
        match self {
            Ast::Const(name) => values.get(name).cloned().unwrap_or_else(|| self.clone()),
            Ast::Num(_) | Ast::Indep | Ast::Jet(_) | Ast::Eps => self.clone(),
            Ast::Neg(a) => Ast::Neg(rec(a)),
            Ast::Call(f, a) => Ast::Call(*f, rec(a)),
            Ast::Add(a, b) => Ast::Add(rec(a), rec(b)),
            Ast::Sub(a, b) => Ast::Sub(rec(a), rec(b)),
            Ast::Mul(a, b) => Ast::Mul(rec(a), rec(b)),
            Ast::Div(a, b) => Ast::Div(rec(a), rec(b)),
            Ast::Pow(a, b) => Ast::Pow(rec(a), rec(b)),
        }
    }

    /// Replaces every `Eps` leaf by the given subtree.
    pub fn replace_eps(&self, with: &Ast) -> Ast {
        let rec = |a: &Ast| Box::new(a.replace_eps(with));
        match self {
            Ast::Eps => with.clone(),
            Ast::Num(_) | Ast::Const(_) | Ast::Indep | Ast::Jet(_) => self.clone(),
            Ast::Neg(a) => Ast::Neg(rec(a)),
            Ast::Call(f, a) => Ast::Call(*f, rec(a)),
            Ast::Add(a, b) => Ast::Add(rec(a), rec(b)),
            Ast::Sub(a, b) => Ast::Sub(rec(a), rec(b)),
            Ast::Mul(a, b) => Ast::Mul(rec(a), rec(b)),
            Ast::Div(a, b) => Ast::Div(rec(a), rec(b)),
            Ast::Pow(a, b) => Ast::Pow(rec(a), rec(b)),
        }
    }

    /// Replaces the independent variable by `with` (e.g. `x -> w*x`).
    pub fn substitute_indep(&self, with: &Ast) -> Ast {
        let rec = |a: &Ast| Box::new(a.substitute_indep(with));
        match self {
            Ast::Indep => with.clone(),
            Ast::Num(_) | Ast::Const(_) | Ast::Eps | Ast::Jet(_) => self.clone(),
            Ast::Neg(a) => Ast::Neg(rec(a)),
            Ast::Call(f, a) => Ast::Call(*f, rec(a)),
            Ast::Add(a, b) => Ast::Add(rec(a), rec(b)),
            Ast::Sub(a, b) => Ast::Sub(rec(a), rec(b)),
            Ast::Mul(a, b) => Ast::Mul(rec(a), rec(b)),
            Ast::Div(a, b) => Ast::Div(rec(a), rec(b)),
            Ast::Pow(a, b) => Ast::Pow(rec(a), rec(b)),
        }
    }

    /// IEEE double evaluation.
    pub fn eval(&self, env: &Env) -> Result<f64, ExprError> {
        Ok(match self {
            Ast::Num(r) => rational_to_f64(r),
            Ast::Const(name) => match env.consts.get(name) {
                Some(v) => *v,
                None if name == "pi" => std::f64::consts::PI,
                None => return Err(ExprError::MissingValue(name.clone())),
            },
            Ast::Indep => env.x.ok_or_else(|| ExprError::MissingValue("x".into()))?,
            Ast::Jet(j) => *env
                .jets
                .get(*j as usize)
                .ok_or_else(|| ExprError::MissingValue(jet_name(*j)))?,
            Ast::Eps => env
                .eps
                .ok_or_else(|| ExprError::MissingValue("eps".into()))?,
            Ast::Neg(a) => -a.eval(env)?,
            Ast::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Ast::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Ast::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Ast::Div(a, b) => {
                let d = b.eval(env)?;
                if d == 0.0 {
                    return Err(ExprError::Domain(format!("division by zero in {self}")));
                }
                a.eval(env)? / d
            }
            Ast::Pow(a, b) => {
                let base = a.eval(env)?;
                let exp = b.eval(env)?;
                if exp.fract() == 0.0 && exp.abs() < i32::MAX as f64 {
                    if base == 0.0 && exp < 0.0 {
                        return Err(ExprError::Domain(format!(
                            "zero to a negative power in {self}"
                        )));
                    }
                    base.powi(exp as i32)
                } else {
                    if base < 0.0 {
                        return Err(ExprError::Domain(format!(
                            "fractional power of a negative base in {self}"
                        )));
                    }
                    base.powf(exp)
                }
            }
            Ast::Call(f, a) => {
                let v = a.eval(env)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(ExprError::Domain(format!("sqrt of negative value {v}")));
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    /// Total derivative in the independent variable (`Jet(j)` maps to
    /// `Jet(j+1)`). Exponents must be free of x and jets.
    pub fn derivative(&self) -> Result<Ast, ExprError> {
        Ok(match self {
            Ast::Num(_) | Ast::Const(_) | Ast::Eps => Ast::num(0),
            Ast::Indep => Ast::num(1),
            Ast::Jet(j) => Ast::Jet(j + 1),
            Ast::Neg(a) => Ast::neg(a.derivative()?),
            Ast::Add(a, b) => Ast::add(a.derivative()?, b.derivative()?),
            Ast::Sub(a, b) => Ast::sub(a.derivative()?, b.derivative()?),
            Ast::Mul(a, b) => Ast::add(
                Ast::mul(a.derivative()?, (**b).clone()),
                Ast::mul((**a).clone(), b.derivative()?),
            ),
            Ast::Div(a, b) => {
                let da = a.derivative()?;
                let db = b.derivative()?;
                if db.is_zero_literal() {
                    Ast::div(da, (**b).clone())
                } else {
                    Ast::div(
                        Ast::sub(Ast::mul(da, (**b).clone()), Ast::mul((**a).clone(), db)),
                        Ast::pow((**b).clone(), Ast::num(2)),
                    )
                }
            }
            Ast::Pow(a, b) => {
                if b.depends_on_x() {
                    return Err(ExprError::NotDifferentiable(self.to_string()));
                }
                let da = a.derivative()?;
                if da.is_zero_literal() {
                    return Ok(Ast::num(0));
                }
                let reduced = match &**b {
                    Ast::Num(r) => Ast::Num(r - Rational::one()),
                    other => Ast::sub(other.clone(), Ast::num(1)),
                };
                Ast::mul(
                    Ast::mul((**b).clone(), Ast::pow((**a).clone(), reduced)),
                    da,
                )
            }
            Ast::Call(f, a) => {
                let da = a.derivative()?;
                if da.is_zero_literal() {
                    return Ok(Ast::num(0));
                }
                let outer = match f {
                    Func::Sin => Ast::call(Func::Cos, (**a).clone()),
                    Func::Cos => Ast::neg(Ast::call(Func::Sin, (**a).clone())),
                    Func::Sqrt => Ast::div(Ast::num(1), Ast::mul(Ast::num(2), self.clone())),
                };
                Ast::mul(outer, da)
            }
        })
    }

    pub fn derivative_n(&self, n: u32) -> Result<Ast, ExprError> {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.derivative()?;
        }
        Ok(e)
    }

    fn precedence(&self) -> u8 {
        match self {
            Ast::Add(..) | Ast::Sub(..) => 1,
            Ast::Mul(..) | Ast::Div(..) => 2,
            Ast::Neg(_) => 3,
            Ast::Pow(..) => 4,
            Ast::Num(r) if !r.is_integer() || r.is_negative() => 2,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Ast, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn fmt_literal(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    // finite decimals print as decimals, everything else as p/q
    let mut d = r.denom().clone();
    let two = num_bigint::BigInt::from(2);
    let five = num_bigint::BigInt::from(5);
    let mut places = 0u32;
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        places = twos.max(fives);
    }
    if places == 0 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let scaled = r * Rational::from_integer(num_traits::pow(
        num_bigint::BigInt::from(10),
        places as usize,
    ));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let width = places as usize + 1;
    let padded = format!("{digits:0>width$}");
    let (w, fr) = padded.split_at(padded.len() - places as usize);
    format!("{}{w}.{fr}", if neg { "-" } else { "" })
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(r) => f.write_str(&fmt_literal(r)),
            Ast::Const(name) => f.write_str(name),
            Ast::Indep => f.write_str("x"),
            Ast::Jet(j) => f.write_str(&jet_name(*j)),
            Ast::Eps => f.write_str("eps"),
            Ast::Neg(a) => {
                f.write_str("-")?;
                write_operand(f, a, 3)
            }
            Ast::Add(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" + ")?;
                write_operand(f, b, 2)
            }
            Ast::Sub(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" - ")?;
                write_operand(f, b, 2)
            }
            Ast::Mul(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str("*")?;
                write_operand(f, b, 3)
            }
            Ast::Div(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str("/")?;
                write_operand(f, b, 3)
            }
            Ast::Pow(a, b) => {
                // a jet of order >= 4 already ends in "^(k)"
                let base_needs_parens = a.precedence() <= 4 || matches!(**a, Ast::Jet(j) if j >= 4);
                if base_needs_parens {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str("^")?;
                write_operand(f, b, 4)
            }
            Ast::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl CanonExpr {
    /// Equivalent expression tree; printing it yields the canonical text.
    pub fn to_ast(&self) -> Ast {
        let mut acc: Option<Ast> = None;
        for (m, c) in self.terms() {
            let (neg, coeff) = match c.as_constant() {
                Some(r) => (r.is_negative(), Some(Ast::rational(&r.abs()))),
                None => (false, Some(linform_ast(c))),
            };
            let mut factors: Vec<Ast> = Vec::new();
            if let Some(k) = coeff {
                factors.push(k);
            }
            factors.extend(monomial_factors(m));
            let mut term = factors
                .into_iter()
                .reduce(Ast::mul)
                .unwrap_or_else(|| Ast::num(1));
            acc = Some(match acc {
                None => {
                    if neg {
                        term = Ast::neg(term);
                    }
                    term
                }
                Some(prev) => {
                    if neg {
                        Ast::Sub(Box::new(prev), Box::new(term))
                    } else {
                        Ast::Add(Box::new(prev), Box::new(term))
                    }
                }
            });
        }
        acc.unwrap_or_else(|| Ast::num(0))
    }
}

fn monomial_factors(m: &Monomial) -> Vec<Ast> {
    let mut out = Vec::new();
    if m.xpow > 0 {
        out.push(Ast::pow(Ast::Indep, Ast::num(m.xpow as i64)));
    }
    match m.trig {
        Trig::None => {}
        Trig::Sin(k) => out.push(Ast::call(
            Func::Sin,
            Ast::mul(Ast::num(k as i64), Ast::Indep),
        )),
        Trig::Cos(k) => out.push(Ast::call(
            Func::Cos,
            Ast::mul(Ast::num(k as i64), Ast::Indep),
        )),
    }
    for (o, e) in &m.jet {
        out.push(Ast::pow(Ast::Jet(*o), Ast::num(*e as i64)));
    }
    if m.eps == 1 {
        out.push(Ast::Eps);
    }
    out
}

fn linform_ast(c: &super::LinForm) -> Ast {
    let mut acc: Option<Ast> = None;
    let push = |acc: &mut Option<Ast>, r: &Rational, atom: Option<Ast>| {
        let mag = Ast::rational(&r.abs());
        let t = match atom {
            Some(a) => Ast::mul(mag, a),
            None => mag,
        };
        *acc = Some(match acc.take() {
            None if r.is_negative() => Ast::neg(t),
            None => t,
            Some(p) if r.is_negative() => Ast::Sub(Box::new(p), Box::new(t)),
            Some(p) => Ast::Add(Box::new(p), Box::new(t)),
        });
    };
    for (sym, r) in c.unknown_terms() {
        push(&mut acc, r, Some(Ast::Const(sym.name().to_string())));
    }
    if !c.constant_part().is_zero() {
        push(&mut acc, c.constant_part(), None);
    }
    acc.unwrap_or_else(|| Ast::num(0))
}

/// Converts a rational to a small integer when it is one.
pub(crate) fn small_integer(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}
