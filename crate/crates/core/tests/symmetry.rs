use symmflow::expr::{canon_from_str, Bindings, CanonExpr};
use symmflow::symmetry::*;

fn c(s: &str) -> CanonExpr {
    canon_from_str(s, &Bindings::default()).unwrap()
}

fn boussinesq() -> PerturbedODE {
    PerturbedODE::parse(2, "-y", "x + 1 + y^2", &Bindings::default()).unwrap()
}

fn pg(xi0: &str, eta0: &str, xi1: &str, eta1: &str) -> PointGenerator {
    PointGenerator::parse(xi0, eta0, xi1, eta1, &Bindings::default()).unwrap()
}

fn evo(z0: &str, z1: &str) -> EvolutionaryGenerator {
    EvolutionaryGenerator::parse(z0, z1, &Bindings::default()).unwrap()
}

fn reference_basis() -> Vec<NamedGenerator> {
    [
        ("-y*cos(x)", "y^2*sin(x)"),
        ("y*sin(x)", "y^2*cos(x)"),
        ("sin(2*x)", "y*cos(2*x)"),
        ("-cos(2*x)", "y*sin(2*x)"),
        ("1", "0"),
        ("0", "sin(x)"),
        ("0", "cos(x)"),
        ("0", "y"),
    ]
    .iter()
    .enumerate()
    .map(|(i, (xi, eta))| NamedGenerator {
        name: format!("X{}", i + 1),
        generator: pg(xi, eta, "0", "0"),
    })
    .collect()
}

#[test]
fn linear_oscillator_has_eight_symmetries() {
    let gens = solve_exact(&boussinesq(), &AnsatzSpec::default()).unwrap();
    assert_eq!(gens.len(), 8);
    let refs: Vec<&PointGenerator> = gens.iter().collect();
    for b in reference_basis() {
        assert!(
            generator_coordinates(&refs, &b.generator).is_some(),
            "{}",
            b.name
        );
    }
}

#[test]
fn boussinesq_stability_table() {
    let basis = reference_basis();
    let r = classify_stability(&boussinesq(), &AnsatzSpec::default(), Some(&basis)).unwrap();
    assert_eq!(r.constraints, ["C1", "C2", "C3", "C4", "C8"]);
    let stable: Vec<&str> = r.stable.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(stable, ["X5", "X6", "X7"]);
    assert_eq!(r.unstable, ["X1", "X2", "X3", "X4", "X8"]);
    assert_eq!(r.approx.nontrivial.len(), 3);
    assert_eq!(r.approx.trivial.len(), 8);
    for g in &r.approx.generators {
        assert!(check_symmetry(&boussinesq(), g).unwrap().is_zero());
    }
}

#[test]
fn nontrivial_generators_match_reference_modulo_trivial() {
    let r = solve_approx(
        &boussinesq(),
        &AnsatzSpec::default(),
        Some(&reference_basis()),
    )
    .unwrap();
    let x9 = pg("1", "0", "0", "1");
    let x10 = pg("0", "sin(x)", "-4/3*cos(x)", "2/3*y*sin(x)");
    let x11 = pg("0", "cos(x)", "4/3*sin(x)", "2/3*y*cos(x)");
    for g in [&x9, &x10, &x11] {
        assert!(check_symmetry(&boussinesq(), g).unwrap().is_zero(), "{g}");
        assert!(r.contains(g), "{g}");
    }
    // a wrong coefficient is rejected
    assert!(!r.contains(&pg("0", "sin(x)", "-1*cos(x)", "2/3*y*sin(x)")));
}

#[test]
fn zeta1_source_term() {
    let ode = boussinesq();
    let s = counterpart_source(&ode, &c("y^2*sin(x) + y*y'*cos(x)")).unwrap();
    assert_eq!(s, c("((3*y^2 + 3*x + 3)*y' + y)*cos(x) - 2*y^3*sin(x)"));
    let z1 = c("(2/3*y'^3 + (y^2 - x - 1)*y' - y)*cos(x) - 2*(x + 1)*y*sin(x)");
    assert_eq!(linearized_operator(&ode, &z1).unwrap(), s.neg());
}

#[test]
fn higher_order_counterparts() {
    let cases = [
        (
            "y^2*sin(x) + y*y'*cos(x)",
            "(2/3*y'^3 + (y^2 - x - 1)*y' - y)*cos(x) - 2*(x + 1)*y*sin(x)",
        ),
        (
            "y^2*cos(x) - y*y'*sin(x)",
            "(-2/3*y'^3 + (-y^2 + x + 1)*y' + y)*sin(x) - 2*(x + 1)*y*cos(x)",
        ),
        (
            "y*cos(2*x) - y'*sin(2*x)",
            "(y^2/3 - 2*y'^2 - x - 1)*cos(2*x) + (-8/3*y*y' + 1)*sin(2*x)",
        ),
        (
            "y*sin(2*x) + y'*cos(2*x)",
            "(y^2/3 - 2*y'^2 - x - 1)*sin(2*x) + (8/3*y*y' - 1)*cos(2*x)",
        ),
        ("y", "2*y'^2/3 + y^2/3 - x - 1"),
        ("sin(x)", "2/3*y*sin(x) + 4/3*y'*cos(x)"),
        ("cos(x)", "2/3*y*cos(x) - 4/3*y'*sin(x)"),
    ];
    for (z0, z1) in cases {
        let g = evo(z0, z1);
        assert!(check_symmetry(&boussinesq(), &g).unwrap().is_zero(), "{g}");
        let found = local_counterpart(&boussinesq(), &g, &AnsatzSpec::default()).unwrap();
        assert!(
            check_symmetry(&boussinesq(), &found).unwrap().is_zero(),
            "{found}"
        );
        // difference of two ζ¹ solves the homogeneous equation
        let diff =
            EvolutionaryGenerator::new(found.zeta1.sub(&g.zeta1), CanonExpr::zero()).unwrap();
        let unpert = boussinesq().to_unperturbed();
        assert!(check_symmetry(&unpert, &diff).unwrap().is_zero());
    }
}

#[test]
fn unperturbed_problem_inherits_everything() {
    let ode = boussinesq().to_unperturbed();
    let r = classify_stability(&ode, &AnsatzSpec::default(), None).unwrap();
    assert!(r.inherits_all());
    assert!(r.constraints.is_empty());
}

#[test]
fn mismatched_basis_is_rejected() {
    let mut basis = reference_basis();
    basis.pop();
    assert!(matches!(
        solve_approx(&boussinesq(), &AnsatzSpec::default(), Some(&basis)),
        Err(SymmetryError::BasisMismatch(_))
    ));
}
