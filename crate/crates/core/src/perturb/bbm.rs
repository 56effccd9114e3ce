//! Harmonic series for the integrated BBM travelling-wave equation
//! `y'' = ((c−1)/c)·y − ε·3/(4c)·(y² − 1)` and its first integral.

use num_traits::{One, Signed, Zero};

use crate::expr::{canon_from_str, fmt_rational, parse, Ast, Bindings, CanonExpr, Func, Rational};

use super::forced::{solve_forced, ForcedLinearODE};
use super::series::{ConstValue, SeriesSolution};
use super::PerturbError;

/// `ψ − C1` for the first integral obtained with `μ = (1+ε)y'`; `C1` stays
/// an unknown coefficient.
pub fn bbm_first_integral(c: &Rational) -> Result<CanonExpr, PerturbError> {
    let b = Bindings::default().with("c", c.clone());
    Ok(canon_from_str(
        "y'^2 + (1-c)/c*y^2 + eps*(y'^2 + (1-c)/c*y^2 - 3*y/(2*c) + y^3/(2*c)) - C1",
        &b,
    )?)
}

fn check_speed(c: &Rational) -> Result<(), PerturbError> {
    if !c.is_positive() || *c >= Rational::one() {
        return Err(PerturbError::OutOfRange(format!(
            "c = {} (bounded oscillatory solutions need 0 < c < 1)",
            fmt_rational(c)
        )));
    }
    Ok(())
}

/// Exact square root of a non-negative rational, if it has one.
fn rational_sqrt(r: &Rational) -> Option<Rational> {
    let (n, d) = (r.numer(), r.denom());
    if n.is_negative() {
        return None;
    }
    let (sn, sd) = (num_integer::Roots::sqrt(n), num_integer::Roots::sqrt(d));
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Rational::new(sn, sd))
}

/// The harmonic series with amplitude `A`, phase 0, built in `θ = ωz`,
/// `ω² = (1−c)/c`.
#[derive(Clone, Debug, PartialEq)]
pub struct BbmHarmonic {
    pub series: SeriesSolution,
    /// `ω²`.
    pub omega_squared: Rational,
    /// `y1` as a function of θ.
    pub y1_theta: CanonExpr,
    /// Value of the first-integral constant, `A²(1−c)/c`.
    pub c1: Rational,
}

/// Series `y0 = A sin θ`, `y1 = Y1(θ)`.
///
/// `Y1` solves `Y1'' + Y1 = −3/(4(1−c))·(A² sin²θ − 1)` (the order-ε equation
/// in θ) plus the multiple of `sin θ` that makes the order-ε part of the
/// first integral vanish with `C1 = A²(1−c)/c`. The `cos θ` mode is left at 0.
pub fn bbm_harmonic_series(c: &Rational, amplitude: &Rational) -> Result<BbmHarmonic, PerturbError> {
    check_speed(c)?;
    if amplitude.is_zero() {
        return Err(PerturbError::OutOfRange("amplitude must be nonzero".into()));
    }
    let one = Rational::one();
    let k = (&one - c) / c;
    let a = amplitude.clone();
    let y0 = CanonExpr::sin(1).scale(&a);

    let kk = Rational::from_integer(3.into()) / (Rational::from_integer(4.into()) * (&one - c));
    let forcing = y0.mul(&y0)?.sub(&CanonExpr::one()).scale(&-kk);
    let particular = solve_forced(&ForcedLinearODE::new(vec![one.clone(), Rational::zero(), one.clone()], forcing)?)?;

    // order-ε part of the first integral in θ (d/dz = ω d/dθ, ω² = k)
    let two = Rational::from_integer(2.into());
    let y0p = y0.partial_x();
    let free_part = y0p
        .mul(&y0p)?
        .add(&y0.mul(&y0)?)
        .scale(&k)
        .sub(&y0.scale(&(Rational::from_integer(3.into()) / (&two * c))))
        .add(&y0.pow(3)?.scale(&(&one / (&two * c))));
    let eval_relation = |y1: &CanonExpr| -> Result<CanonExpr, PerturbError> {
        let linear = y0p.mul(&y1.partial_x())?.add(&y0.mul(y1)?).scale(&(&two * &k));
        Ok(linear.add(&free_part))
    };
    let base = eval_relation(&particular)?;
    let r = base
        .as_constant()
        .ok_or_else(|| PerturbError::SelfCheck(format!("first-integral remainder {base} is not constant")))?;
    let beta = -r / (&two * &a * &k);
    let y1_theta = particular.add(&CanonExpr::sin(1).scale(&beta));
    let check = eval_relation(&y1_theta)?;
    if !check.is_zero() {
        return Err(PerturbError::SelfCheck(format!("first-integral remainder {check}")));
    }

    let omega = match rational_sqrt(&k) {
        Some(w) => Ast::rational(&w),
        None => Ast::call(Func::Sqrt, Ast::rational(&k)),
    };
    let theta = Ast::mul(omega, Ast::Indep);
    let c1 = &a * &a * &k;
    let series = SeriesSolution {
        y0: y0.to_ast().substitute_indep(&theta),
        y1: y1_theta.to_ast().substitute_indep(&theta),
        constants: Default::default(),
    }
    .with_constant("C1", ConstValue::Value(c1.clone()));
    Ok(BbmHarmonic {
        series,
        omega_squared: k,
        y1_theta,
        c1,
    })
}

const PRINTED_Y0: &str = "(C1*c^2 + 1)*sin(sqrt((1-c)/c)*(z - C2))";
const PRINTED_Y1: &str = "1/(16*c*(1-c)^2)*(4*sqrt(c*(1-c))*(C1*c^(5/2) - C1*c^(3/2) + c^(1/2) - 1)\
*sin(sqrt((1-c)/c)*(z - C2)) - (C1*c^2 + 1)*cos(sqrt((1-c)/c)*(z - C2))^2 \
+ 16*C3*c*(1-c)^2*cos(sqrt((1-c)/c)*(z - C2)) - C1^2*c^4 - 2*C1*c^2 - 12*c^2 + 12*c - 1)";

/// The closed form as printed in the source, with its own amplitude
/// constant set from `A = C1·c² + 1`, `C2 = 0` and the `cos` mode `C3`.
/// The first-integral constant is set to `A²(1−c)/c` as for
/// [`bbm_harmonic_series`].
pub fn bbm_printed_series(c: &Rational, amplitude: &Rational, c3: &Rational) -> Result<SeriesSolution, PerturbError> {
    check_speed(c)?;
    let one = Rational::one();
    let amp_const = (amplitude - &one) / (c * c);
    let mut values = std::collections::BTreeMap::new();
    values.insert("c".to_string(), Ast::rational(c));
    values.insert("C1".to_string(), Ast::rational(&amp_const));
    values.insert("C2".to_string(), Ast::num(0));
    values.insert("C3".to_string(), Ast::rational(c3));
    let k = (&one - c) / c;
    Ok(SeriesSolution {
        y0: parse(PRINTED_Y0)?.bind(&values),
        y1: parse(PRINTED_Y1)?.bind(&values),
        constants: Default::default(),
    }
    .with_constant("C1", ConstValue::Value(amplitude * amplitude * k)))
}
