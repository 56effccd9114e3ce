//! Shared randomized-algebra oracle: complex evaluation of a raw term list.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;
use symmflow::expr::{rat, CanonExpr, EvalPoint};

/// `coeff · x^p · y^a · y'^b · trig(m x) · ε^e`.
#[derive(Clone, Debug)]
pub struct Term {
    pub num: i64,
    pub den: i64,
    pub xpow: u32,
    pub y: u32,
    pub yp: u32,
    pub trig: (u8, u32),
    pub eps: bool,
}

pub fn term(allow_eps: bool) -> impl Strategy<Value = Term> {
    (-9i64..=9, 1i64..=4, 0u32..=2, 0u32..=2, 0u32..=2, (0u8..3, 1u32..=3), any::<bool>()).prop_map(
        move |(num, den, xpow, y, yp, trig, eps)| Term {
            num,
            den,
            xpow,
            y,
            yp,
            trig,
            eps: eps && allow_eps,
        },
    )
}

pub fn poly(allow_eps: bool) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(term(allow_eps), 1..5)
}

pub fn build(terms: &[Term]) -> CanonExpr {
    let mut acc = CanonExpr::zero();
    for t in terms {
        let mut e = CanonExpr::constant(rat(t.num, t.den))
            .mul(&CanonExpr::x_pow(t.xpow))
            .unwrap()
            .mul(&CanonExpr::y().pow(t.y).unwrap())
            .unwrap()
            .mul(&CanonExpr::jet(1).pow(t.yp).unwrap())
            .unwrap();
        e = match t.trig {
            (1, m) => e.mul(&CanonExpr::sin(m)).unwrap(),
            (2, m) => e.mul(&CanonExpr::cos(m)).unwrap(),
            _ => e,
        };
        if t.eps {
            e = e.mul(&CanonExpr::eps()).unwrap();
        }
        acc = acc.add(&e);
    }
    acc
}

/// Direct complex evaluation of the raw terms; returns (value, Σ|term|).
pub fn raw_eval(terms: &[Term], x: Complex64, eps: f64, y: Complex64, yp: Complex64) -> (Complex64, f64) {
    let mut v = Complex64::zero();
    let mut scale = 0.0;
    for t in terms {
        let mut p = Complex64::new(t.num as f64 / t.den as f64, 0.0) * x.powu(t.xpow) * y.powu(t.y) * yp.powu(t.yp);
        p *= match t.trig {
            (1, m) => (x * m as f64).sin(),
            (2, m) => (x * m as f64).cos(),
            _ => Complex64::new(1.0, 0.0),
        };
        if t.eps {
            p *= eps;
        }
        scale += p.norm();
        v += p;
    }
    (v, scale)
}

pub fn engine_eval(e: &CanonExpr, x: f64, eps: f64, jets: &[f64]) -> f64 {
    let unknowns = BTreeMap::new();
    e.eval(&EvalPoint { x, eps, jets, unknowns: &unknowns }).unwrap()
}

pub fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

/// Trajectory `y = k·e^{αx}`: jets are `k α^j e^{αx}`.
pub fn traj(k: f64, alpha: f64, x: Complex64, j: u32) -> Complex64 {
    (x * alpha).exp() * k * alpha.powi(j as i32)
}

pub const H: f64 = 1e-30;

/// One randomized case: `a` may carry ε, `b` may not.
pub fn algebra_inputs() -> impl Strategy<Value = (Vec<Term>, Vec<Term>, f64, f64, f64, f64)> {
    (poly(true), poly(false), -2.0f64..2.0, -0.5f64..0.5, -1.5f64..1.5, -1.0f64..1.0)
}

/// add, mul, total derivative and ∂x against direct sampling at 1e-12.
pub fn algebra_case(a: &[Term], b: &[Term], x: f64, eps: f64, k: f64, alpha: f64) -> Result<(), String> {
    let (ea, eb) = (build(a), build(b));
    let xc = Complex64::new(x, 0.0);
    let (y, yp, ypp) = (traj(k, alpha, xc, 0), traj(k, alpha, xc, 1), traj(k, alpha, xc, 2));
    let jets = [y.re, yp.re, ypp.re];
    let (va, sa) = raw_eval(a, xc, eps, y, yp);
    let (vb, sb) = raw_eval(b, xc, eps, y, yp);

    let sum = engine_eval(&ea.add(&eb), x, eps, &jets);
    if !close(sum, va.re + vb.re, sa + sb) {
        return Err(format!("add {sum} vs {}", va.re + vb.re));
    }
    let prod = engine_eval(&ea.mul(&eb).map_err(|e| e.to_string())?, x, eps, &jets);
    if !close(prod, va.re * vb.re, sa * sb) {
        return Err(format!("mul {prod} vs {}", va.re * vb.re));
    }
    // total derivative along the trajectory, by complex step
    let xs = Complex64::new(x, H);
    let (fs, ss) = raw_eval(a, xs, eps, traj(k, alpha, xs, 0), traj(k, alpha, xs, 1));
    let scale = ss * (1.0 + alpha.abs()) * 12.0;
    let dt = engine_eval(&ea.total_derivative(), x, eps, &jets);
    if !close(dt, fs.im / H, scale) {
        return Err(format!("D {dt} vs {}", fs.im / H));
    }
    // partial in x with jets frozen
    let (fx, _) = raw_eval(a, xs, eps, y, yp);
    let px = engine_eval(&ea.partial_x(), x, eps, &jets);
    if !close(px, fx.im / H, scale) {
        return Err(format!("d/dx {px} vs {}", fx.im / H));
    }
    Ok(())
}
