//! Randomized consistency checks with oracles that do not go through the
//! canonical algebra: complex-step differentiation of the raw term list,
//! Cramer's rule with Laplace determinants, and text round trips.

mod common;

use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use symmflow::expr::{canon_from_str, int, rat, rational_to_f64, Bindings, Rational, UnknownSym};
use symmflow::linsolve::{solve, LinearSystem, LinsolveError, Row};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_algebra_matches_sampling((a, b, x, eps, k, alpha) in algebra_inputs()) {
        if let Err(e) = algebra_case(&a, &b, x, eps, k, alpha) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn text_round_trip(a in poly(true)) {
        let b = Bindings::default();
        let built = build(&a);
        prop_assert_eq!(&canon_from_str(&text(&a), &b).unwrap(), &built);
        prop_assert_eq!(canon_from_str(&built.to_string(), &b).unwrap(), built);
    }
}

fn text(terms: &[Term]) -> String {
    let parts: Vec<String> = terms
        .iter()
        .map(|t| {
            let mut s = format!("({}/{})*x^{}*y^{}*y'^{}", t.num, t.den, t.xpow, t.y, t.yp);
            match t.trig {
                (1, m) => s.push_str(&format!("*sin({m}*x)")),
                (2, m) => s.push_str(&format!("*cos({m}*x)")),
                _ => {}
            }
            if t.eps {
                s.push_str("*eps");
            }
            s
        })
        .collect();
    parts.join(" + ")
}

fn det(m: &[Vec<Rational>]) -> Rational {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = Rational::zero();
    for j in 0..m.len() {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let t = &m[0][j] * det(&minor);
        if j % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

fn system(a: &[Vec<i64>], rhs: &[i64]) -> (LinearSystem, Vec<UnknownSym>) {
    let u: Vec<UnknownSym> = (0..a[0].len()).map(|i| UnknownSym::new(format!("u{i}"))).collect();
    let mut s = LinearSystem::new(u.clone());
    for (row, r) in a.iter().zip(rhs) {
        let coeffs = u.iter().cloned().zip(row.iter().map(|&v| int(v))).collect();
        s.push(Row::new(coeffs, int(*r)));
    }
    (s, u)
}

fn square(n: usize) -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>)> {
    (
        prop::collection::vec(prop::collection::vec(-6i64..=6, n), n),
        prop::collection::vec(-10i64..=10, n),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gauss_jordan_agrees_with_cramer((a, rhs) in (2usize..=4).prop_flat_map(square)) {
        let m: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        let d = det(&m);
        let (s, u) = system(&a, &rhs);
        match solve(&s) {
            Ok(sol) => {
                // every returned solution satisfies every row exactly
                for r in s.rows() {
                    prop_assert!(r.residual(&sol.particular).is_zero());
                }
                for v in &sol.nullspace {
                    for r in s.rows() {
                        prop_assert_eq!(r.residual(v), -r.rhs.clone());
                    }
                }
                if !d.is_zero() {
                    prop_assert_eq!(sol.nullity(), 0);
                    for (j, uj) in u.iter().enumerate() {
                        let mj: Vec<Vec<Rational>> = m
                            .iter()
                            .zip(&rhs)
                            .map(|(row, &b)| {
                                let mut row = row.clone();
                                row[j] = int(b);
                                row
                            })
                            .collect();
                        let expect = det(&mj) / &d;
                        let got = sol.particular.get(uj).cloned().unwrap_or_else(Rational::zero);
                        prop_assert_eq!(got, expect);
                    }
                } else {
                    prop_assert!(sol.nullity() >= 1);
                }
            }
            Err(LinsolveError::Inconsistent { certificate }) => {
                prop_assert!(d.is_zero());
                prop_assert!(certificate.coeffs.is_empty() && !certificate.rhs.is_zero());
            }
        }
    }
}

#[test]
fn cramer_oracle_sanity() {
    let m = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
    assert_eq!(det(&m), int(5));
    assert!((rational_to_f64(&rat(1, 3)) - 1.0 / 3.0).abs() < 1e-16);
}
