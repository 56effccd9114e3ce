use num_traits::Zero;

use crate::expr::{fmt_rational, rat, rational_to_f64, Rational};

/// Explicit Runge–Kutta pair stored as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ButcherTableau {
    pub c: Vec<Rational>,
    /// Strictly lower-triangular rows, `a[i].len() == i`.
    pub a: Vec<Vec<Rational>>,
    /// Propagating (5th-order) weights.
    pub b: Vec<Rational>,
    /// Embedded (4th-order) weights.
    pub b_hat: Vec<Rational>,
}

fn r(n: i64, d: i64) -> Rational {
    rat(n, d)
}

/// Dormand–Prince 5(4), FSAL: the last stage row equals `b`.
pub fn dopri5() -> ButcherTableau {
    let a = vec![
        vec![],
        vec![r(1, 5)],
        vec![r(3, 40), r(9, 40)],
        vec![r(44, 45), r(-56, 15), r(32, 9)],
        vec![r(19372, 6561), r(-25360, 2187), r(64448, 6561), r(-212, 729)],
        vec![r(9017, 3168), r(-355, 33), r(46732, 5247), r(49, 176), r(-5103, 18656)],
        vec![r(35, 384), r(0, 1), r(500, 1113), r(125, 192), r(-2187, 6784), r(11, 84)],
    ];
    ButcherTableau {
        c: vec![r(0, 1), r(1, 5), r(3, 10), r(4, 5), r(8, 9), r(1, 1), r(1, 1)],
        a,
        b: vec![r(35, 384), r(0, 1), r(500, 1113), r(125, 192), r(-2187, 6784), r(11, 84), r(0, 1)],
        b_hat: vec![
            r(5179, 57600),
            r(0, 1),
            r(7571, 16695),
            r(393, 640),
            r(-92097, 339200),
            r(187, 2100),
            r(1, 40),
        ],
    }
}

/// Continuous-extension weights for the dense output of [`dopri5`].
pub(crate) fn dopri5_dense() -> [Rational; 7] {
    [
        Rational::new((-12715105075i64).into(), 11282082432i64.into()),
        r(0, 1),
        Rational::new(87487479700i64.into(), 32700410799i64.into()),
        Rational::new((-10690763975i64).into(), 1880347072i64.into()),
        Rational::new(701980252875i64.into(), 199316789632i64.into()),
        Rational::new((-1453857185i64).into(), 822651844i64.into()),
        Rational::new(69997945i64.into(), 29380423i64.into()),
    ]
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// `Σ_j a_ij = c_i` for every row.
    pub fn check_row_sums(&self) -> Result<(), String> {
        if self.a.len() != self.stages() || self.b.len() != self.stages() || self.b_hat.len() != self.stages() {
            return Err("stage counts disagree".into());
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != i {
                return Err(format!("row {i} is not strictly lower triangular"));
            }
            let s = row.iter().fold(Rational::zero(), |acc, v| acc + v);
            if s != self.c[i] {
                return Err(format!("row {i}: sum {} != c = {}", fmt_rational(&s), fmt_rational(&self.c[i])));
            }
        }
        Ok(())
    }

    /// Order conditions up to `order` (at most 4) for the given weights.
    pub fn check_order(&self, weights: &[Rational], order: u32) -> Result<(), String> {
        let s = self.stages();
        let dot = |u: &[Rational], v: &[Rational]| u.iter().zip(v).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
        let pow = |k: i32| -> Vec<Rational> { self.c.iter().map(|c| num_traits::pow(c.clone(), k as usize)).collect() };
        let amul = |v: &[Rational]| -> Vec<Rational> {
            (0..s).map(|i| dot(&self.a[i], &v[..i])).collect()
        };
        let hadamard = |u: &[Rational], v: &[Rational]| -> Vec<Rational> { u.iter().zip(v).map(|(p, q)| p * q).collect() };
        let ones = vec![Rational::from_integer(1.into()); s];
        let c1 = pow(1);
        let mut conds: Vec<(&str, Rational, Rational)> = Vec::new();
        if order >= 1 {
            conds.push(("b.1", dot(weights, &ones), r(1, 1)));
        }
        if order >= 2 {
            conds.push(("b.c", dot(weights, &c1), r(1, 2)));
        }
        if order >= 3 {
            conds.push(("b.c^2", dot(weights, &pow(2)), r(1, 3)));
            conds.push(("b.Ac", dot(weights, &amul(&c1)), r(1, 6)));
        }
        if order >= 4 {
            conds.push(("b.c^3", dot(weights, &pow(3)), r(1, 4)));
            conds.push(("b.(c*Ac)", dot(weights, &hadamard(&c1, &amul(&c1))), r(1, 8)));
            conds.push(("b.Ac^2", dot(weights, &amul(&pow(2))), r(1, 12)));
            conds.push(("b.AAc", dot(weights, &amul(&amul(&c1))), r(1, 24)));
        }
        for (name, got, want) in conds {
            if got != want {
                return Err(format!("{name} = {} (expected {})", fmt_rational(&got), fmt_rational(&want)));
            }
        }
        Ok(())
    }

    pub(crate) fn to_f64(&self) -> Tableau64 {
        let v = |x: &[Rational]| x.iter().map(rational_to_f64).collect::<Vec<_>>();
        Tableau64 {
            c: v(&self.c),
            a: self.a.iter().map(|row| v(row)).collect(),
            e: self.b.iter().zip(&self.b_hat).map(|(p, q)| rational_to_f64(&(p - q))).collect(),
        }
    }
}

pub(crate) struct Tableau64 {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    /// `b − b̂`.
    pub e: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_sums_exact() {
        dopri5().check_row_sums().unwrap();
    }

    #[test]
    fn order_conditions() {
        let t = dopri5();
        t.check_order(&t.b, 4).unwrap();
        t.check_order(&t.b_hat, 4).unwrap();
        // quadrature condition of order 5 holds for b only
        let q5 = |w: &[Rational]| {
            w.iter()
                .zip(&t.c)
                .fold(Rational::zero(), |acc, (b, c)| acc + b * num_traits::pow(c.clone(), 4))
        };
        assert_eq!(q5(&t.b), r(1, 5));
        assert_ne!(q5(&t.b_hat), r(1, 5));
    }

    #[test]
    fn fsal_row() {
        let t = dopri5();
        assert_eq!(&t.a[6][..], &t.b[..6]);
        assert!(t.b[6].is_zero());
    }

    #[test]
    fn broken_tableau_is_caught() {
        let mut t = dopri5();
        t.a[3][1] = r(-55, 15);
        assert!(t.check_row_sums().is_err());
        let mut u = dopri5();
        u.b.swap(2, 3);
        assert!(u.check_order(&u.b, 2).is_err());
    }

    #[test]
    fn dense_weights_sum_to_zero() {
        // θ-polynomial correction vanishes at the step ends only if Σ d_i = 0
        let s = dopri5_dense().iter().fold(Rational::zero(), |acc, v| acc + v);
        assert!(s.is_zero());
    }
}
