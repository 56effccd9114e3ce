use symmflow::expr::Bindings;
use symmflow::numeric::*;
use symmflow::perturb::{NumericGrid, SeriesSolution};
use symmflow::symmetry::PerturbedODE;

fn boussinesq() -> PerturbedODE {
    PerturbedODE::parse(2, "-y", "x + 1 + y^2", &Bindings::default()).unwrap()
}

fn bbm_third_order() -> PerturbedODE {
    // c = 1/2
    PerturbedODE::parse(3, "-y'", "-3*y*y'", &Bindings::default()).unwrap()
}

fn boussinesq_series() -> SeriesSolution {
    SeriesSolution::parse("sin(x) + cos(x)", "x + 2 - sin(2*x)/3").unwrap()
}

fn bbm_series() -> SeriesSolution {
    SeriesSolution::parse("5/4*sin(x)", "(23 - 25*cos(x)^2 - 20*sin(x))/32").unwrap()
}

#[test]
fn energy_is_conserved_on_the_oscillator() {
    let ode = PerturbedODE::parse(2, "-y", "0", &Bindings::default()).unwrap();
    let t = integrate(&ScalarOde::new(ode, 0.0), &IvpSpec::new(0.0, 10.0, vec![0.0, 1.0], 1e-10)).unwrap();
    for x in NumericGrid::default().points() {
        let u = t.eval(x).unwrap();
        assert!((u[0] * u[0] + u[1] * u[1] - 1.0).abs() <= 1e-6, "x = {x}");
    }
}

#[test]
fn boussinesq_error_scales_quadratically() {
    let fit = scaling_exponent(
        &boussinesq(),
        &boussinesq_series(),
        &[0.02, 0.06, 0.1],
        &NumericGrid::default(),
        &ScalingOptions::default(),
    )
    .unwrap();
    let p = fit.exponent.unwrap();
    assert!((1.7..=2.3).contains(&p), "{fit:?}");
}

#[test]
fn bbm_error_scales_quadratically() {
    let fit = scaling_exponent(
        &bbm_third_order(),
        &bbm_series(),
        &[0.01, 0.05],
        &NumericGrid::default(),
        &ScalingOptions::default(),
    )
    .unwrap();
    let p = fit.exponent.unwrap();
    assert!((1.7..=2.3).contains(&p), "{fit:?}");
}

#[test]
fn halving_tolerance_does_not_inflate_the_comparison_error() {
    let grid = NumericGrid::default();
    for (ode, closed, eps) in [
        (boussinesq(), boussinesq_series(), 0.02),
        (boussinesq(), boussinesq_series(), 0.1),
        (bbm_third_order(), bbm_series(), 0.05),
    ] {
        let initial = closed.eval_derivatives(ode.order() - 1, 0.0, eps).unwrap();
        let sys = ScalarOde::new(ode.clone(), eps);
        let mut last: Option<f64> = None;
        for tol in [1e-8, 5e-9, 2.5e-9, 1.25e-9] {
            let t = integrate(&sys, &IvpSpec::new(0.0, 10.0, initial.clone(), tol)).unwrap();
            let e = compare(&t, &closed, eps, &grid).unwrap().max_abs_error;
            if let Some(prev) = last {
                assert!(e <= 1.1 * prev, "tol {tol}: {e} vs {prev}");
            }
            last = Some(e);
        }
    }
}

#[test]
fn comparison_csv_round_trips() {
    let eps = 0.05;
    let closed = bbm_series();
    let initial = closed.eval_derivatives(2, 0.0, eps).unwrap();
    let t = integrate(&ScalarOde::new(bbm_third_order(), eps), &IvpSpec::new(0.0, 10.0, initial, 1e-10)).unwrap();
    let r = compare(&t, &closed, eps, &NumericGrid::default()).unwrap();
    let csv = r.csv();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), r.grid.len());
    for (row, (a, n)) in rows.iter().zip(r.approx.iter().zip(&r.numeric)) {
        assert_eq!(row[1], *a);
        assert_eq!(row[2], *n);
    }
    let max = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    assert_eq!(max, r.max_abs_error);
}

#[test]
fn fixed_step_convergence_on_growth() {
    let sys = FnSystem { dim: 1, f: |_x: f64, u: &[f64], du: &mut [f64]| du[0] = u[0] };
    let errs: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&n| (integrate_fixed(&sys, 0.0, 1.0, &[1.0], n).unwrap()[0] - std::f64::consts::E).abs())
        .collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 4.0, "{errs:?}");
    }
}
