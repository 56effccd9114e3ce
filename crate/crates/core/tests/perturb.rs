use proptest::prelude::*;
use symmflow::expr::{canon_from_str, int, rat, Bindings, CanonExpr, Rational};
use symmflow::perturb::*;
use symmflow::symmetry::{EvolutionaryGenerator, PerturbedODE};

fn b() -> Bindings {
    Bindings::default()
}

fn c(s: &str) -> CanonExpr {
    canon_from_str(s, &b()).unwrap()
}

fn boussinesq() -> PerturbedODE {
    PerturbedODE::parse(2, "-y", "x + 1 + y^2", &b()).unwrap()
}

const IF35: &str = "C1*sin(x) + C2*cos(x) + eps*(x + 1 + ((C1^2 - C2^2)*cos(x)^2 - C1*C2*sin(2*x) + C1^2 + 2*C2^2)/3)";
const ZETA1: &str = "2*y'^2/3 + y^2/3 - x - 1 - C1*(2/3*y*sin(x) + 4/3*y'*cos(x)) - C2*(2/3*y*cos(x) - 4/3*y'*sin(x))";

fn at(c1: i64, c2: i64) -> Bindings {
    b().with("C1", int(c1)).with("C2", int(c2))
}

#[test]
fn general_boussinesq_series() {
    let split = split_orders(&boussinesq());
    for (c1, c2) in [(1, 1), (2, -1), (0, 3), (1, 0)] {
        let s = SeriesSolution::parse_combined(IF35, &at(c1, c2)).unwrap();
        let r = verify_series(&split, &s, VerifyMode::Symbolic).unwrap();
        assert!(r.is_zero(), "({c1}, {c2}): {r}");
        let n = verify_series(&split, &s, VerifyMode::Numeric(NumericGrid::default())).unwrap();
        assert!(n.passes(1e-10), "{n}");
    }
}

#[test]
fn invariant_solution_matches_general_series_modulo_homogeneous() {
    let split = split_orders(&boussinesq());
    for (c1, c2) in [(1, 1), (0, 1), (2, -1)] {
        let g = EvolutionaryGenerator::parse("y - C1*sin(x) - C2*cos(x)", ZETA1, &at(c1, c2)).unwrap();
        let s = invariant_solution(&g).unwrap();
        assert!(verify_series(&split, &s, VerifyMode::Symbolic).unwrap().is_zero());
        let (y0, y1) = s.canonical().unwrap();
        // ζ0(x, y0) = 0 and ζ0_y·y1 + ζ1(x, y0, y0') = 0
        assert!(g.zeta0.compose(&y0).unwrap().is_zero());
        assert!(y1.add(&g.zeta1.compose(&y0).unwrap()).is_zero());
        let (p0, p1) = SeriesSolution::parse_combined(IF35, &at(c1, c2)).unwrap().canonical().unwrap();
        assert_eq!(y0, p0);
        let d = y1.sub(&p1);
        assert!(d.partial_x().partial_x().add(&d).is_zero(), "difference {d}");
    }
}

#[test]
fn cos_generator_example() {
    let g = EvolutionaryGenerator::parse("y - cos(x)", ZETA1, &at(0, 1)).unwrap();
    let s = invariant_solution(&g).unwrap();
    let (y0, y1) = s.canonical().unwrap();
    assert_eq!(y0, c("cos(x)"));
    let expected = g.zeta1.compose(&c("cos(x)")).unwrap().neg();
    assert_eq!(y1, expected);
    assert!(verify_series(&split_orders(&boussinesq()), &s, VerifyMode::Symbolic).unwrap().is_zero());
}

#[test]
fn boussinesq_particular_solution() {
    let ics = [
        InitialCondition::parse(0, "1 + 2*eps", &b()).unwrap(),
        InitialCondition::parse(1, "1 + eps/3", &b()).unwrap(),
    ];
    let s = solve_ivp(&boussinesq(), &ics).unwrap();
    let expected = c("sin(x) + cos(x) + eps*(x + 2 - sin(2*x)/3)").split_eps();
    assert_eq!(s.canonical().unwrap(), expected);
    // conditions re-evaluate exactly
    let (y0, y1) = s.canonical().unwrap();
    let full = CanonExpr::from_eps_parts(&y0, &y1).unwrap();
    assert_eq!(value_at_zero(&full), c("1 + 2*eps"));
    assert_eq!(value_at_zero(&full.partial_x()), c("1 + eps/3"));
}

fn value_at_zero(e: &CanonExpr) -> CanonExpr {
    let mut acc = CanonExpr::zero();
    for (m, coeff) in e.terms() {
        if m.xpow == 0 && !matches!(m.trig, symmflow::expr::Trig::Sin(_)) {
            let mut mono = symmflow::expr::Monomial::one();
            mono.eps = m.eps;
            acc = acc.add(&CanonExpr::term(coeff.clone(), mono));
        }
    }
    acc
}

#[test]
fn bbm_third_order_particular_solution() {
    let bb = b().with("c", rat(1, 2));
    let ode = PerturbedODE::parse(3, "-(1-c)/c*y'", "-3/(2*c)*y*y'", &bb).unwrap();
    let ics = [
        InitialCondition::parse(0, "-eps/16", &bb).unwrap(),
        InitialCondition::parse(1, "5/4 - 5*eps/8", &bb).unwrap(),
        InitialCondition::parse(2, "25*eps/16", &bb).unwrap(),
    ];
    let s = solve_ivp(&ode, &ics).unwrap();
    let expected = c("5/4*sin(x) + eps*(23 - 25*cos(x)^2 - 20*sin(x))/32").split_eps();
    assert_eq!(s.canonical().unwrap(), expected);
}

#[test]
fn first_integral_split_at_half_speed() {
    let split = OrderSplit::from_relation(&bbm_first_integral(&rat(1, 2)).unwrap());
    let bb = b().with("c", rat(1, 2));
    assert_eq!(split.eq0(), &canon_from_str("y'^2 + (1-c)/c*y^2 - C1", &bb).unwrap());
    assert_eq!(split.coeffs()[0], canon_from_str("2*(1-c)/c*y", &bb).unwrap());
    assert_eq!(split.coeffs()[1], c("2*y'"));
    assert_eq!(
        split.rest(),
        &canon_from_str("y'^2 + (1-c)/c*y^2 - 3*y/(2*c) + y^3/(2*c)", &bb).unwrap()
    );
}

#[test]
fn unsupported_order_zero_equation() {
    let ode = PerturbedODE::parse(2, "-y^3", "0", &b()).unwrap();
    let ics = [InitialCondition::new(0, int(0), int(0)), InitialCondition::new(1, int(1), int(0))];
    assert!(matches!(solve_ivp(&ode, &ics), Err(PerturbError::UnsupportedEquation(_))));
}

fn forcing_strategy() -> impl Strategy<Value = CanonExpr> {
    prop::collection::vec((-5i64..=5, 0u32..=2, 0u32..=3, 0u8..3), 1..5).prop_map(|terms| {
        let mut e = CanonExpr::zero();
        for (k, xp, m, kind) in terms {
            let t = match (kind, m) {
                (_, 0) | (0, _) => CanonExpr::one(),
                (1, m) => CanonExpr::sin(m),
                (_, m) => CanonExpr::cos(m),
            };
            e = e.add(&CanonExpr::x_pow(xp).mul(&t).unwrap().scale(&Rational::from_integer(k.into())));
        }
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn forced_solutions_satisfy_their_equation(f in forcing_strategy(), which in 0usize..3) {
        let coeffs = match which {
            0 => vec![int(1), int(0), int(1)],
            1 => vec![int(0), int(1), int(0), int(1)],
            _ => vec![int(4), int(0), int(5), int(0), int(1)],
        };
        let p = ForcedLinearODE::new(coeffs, f.clone()).unwrap();
        let y = solve_forced(&p).unwrap();
        prop_assert_eq!(p.apply(&y), f);
    }
}
