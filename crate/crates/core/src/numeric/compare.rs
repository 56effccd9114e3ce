use std::fmt::Write as _;

use rayon::prelude::*;

use crate::perturb::{NumericGrid, SeriesSolution};
use crate::symmetry::PerturbedODE;

use super::dopri::{integrate, IvpSpec, ScalarOde, Trajectory};
use super::NumericError;

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub grid: Vec<f64>,
    pub approx: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_abs_error: f64,
    /// Grid point where the maximum is attained (first one on ties).
    pub error_at: f64,
}

impl ComparisonReport {
    /// `x,approx,numeric,abs_error` rows, 17 significant digits, LF endings.
    pub fn csv(&self) -> String {
        let mut out = String::from("x,approx,numeric,abs_error\n");
        for ((x, a), n) in self.grid.iter().zip(&self.approx).zip(&self.numeric) {
            let _ = writeln!(out, "{x:.16e},{a:.16e},{n:.16e},{:.16e}", (a - n).abs());
        }
        out
    }
}

/// Grid points, with float overshoot of the last point pulled back onto the
/// trajectory end.
fn grid_points(traj: &Trajectory, grid: &NumericGrid) -> Result<Vec<f64>, NumericError> {
    let slack = 1e-9 * (traj.end() - traj.start()).abs();
    let mut pts = grid.points();
    if pts.is_empty() || !(grid.step > 0.0) {
        return Err(NumericError::InvalidSpec(format!("empty grid {grid:?}")));
    }
    for p in &mut pts {
        if !traj.covers(*p) {
            let nearest = if (*p - traj.end()).abs() < (*p - traj.start()).abs() { traj.end() } else { traj.start() };
            if (*p - nearest).abs() > slack {
                return Err(NumericError::GridOutsideSpan(*p));
            }
            *p = nearest;
        }
    }
    Ok(pts)
}

/// Closed form vs. dense output on `grid`.
pub fn compare(
    traj: &Trajectory,
    closed: &SeriesSolution,
    eps: f64,
    grid: &NumericGrid,
) -> Result<ComparisonReport, NumericError> {
    let grid = grid_points(traj, grid)?;
    let approx: Vec<f64> = grid.iter().map(|&x| closed.eval(x, eps)).collect::<Result<_, _>>()?;
    let numeric: Vec<f64> = grid
        .iter()
        .map(|&x| traj.eval(x).expect("grid checked against span")[0])
        .collect();
    let mut max_abs_error = 0.0;
    let mut error_at = grid[0];
    for ((x, a), n) in grid.iter().zip(&approx).zip(&numeric) {
        let e = (a - n).abs();
        if !e.is_finite() {
            return Err(NumericError::NonFiniteState(*x));
        }
        if e > max_abs_error {
            max_abs_error = e;
            error_at = *x;
        }
    }
    Ok(ComparisonReport {
        grid,
        approx,
        numeric,
        max_abs_error,
        error_at,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingOptions {
    pub tol: f64,
    /// Errors at or below this are treated as integrator noise.
    pub noise_floor: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            tol: 1e-12,
            noise_floor: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    /// `(ε, max error)` per run, in input order.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` vs `log ε`; `None` when degenerate.
    pub exponent: Option<f64>,
    pub degenerate: bool,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (sxx > 0.0 && slope.is_finite()).then_some(slope)
}

/// Integrates `ode` for each ε from the closed form's own initial data at
/// `grid.start` and fits the error exponent.
pub fn scaling_exponent(
    ode: &PerturbedODE,
    closed: &SeriesSolution,
    eps_list: &[f64],
    grid: &NumericGrid,
    opts: &ScalingOptions,
) -> Result<ScalingFit, NumericError> {
    if eps_list.len() < 2 {
        return Err(NumericError::InvalidSpec("need at least two eps values".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(NumericError::InvalidSpec("eps values must be positive".into()));
    }
    let errors: Vec<(f64, f64)> = eps_list
        .par_iter()
        .map(|&eps| {
            let initial = closed.eval_derivatives(ode.order() - 1, grid.start, eps)?;
            let sys = ScalarOde::new(ode.clone(), eps);
            let traj = integrate(&sys, &IvpSpec::new(grid.start, grid.end, initial, opts.tol))?;
            Ok((eps, compare(&traj, closed, eps, grid)?.max_abs_error))
        })
        .collect::<Result<_, NumericError>>()?;
    Ok(fit_scaling(errors, opts.noise_floor))
}

/// Fit over precomputed `(ε, max error)` pairs; degenerate when any error is
/// at or below `noise_floor` or the ε values coincide.
pub fn fit_scaling(errors: Vec<(f64, f64)>, noise_floor: f64) -> ScalingFit {
    let noisy = errors.len() < 2 || errors.iter().any(|(_, e)| *e <= noise_floor);
    let exponent = if noisy { None } else { log_log_slope(&errors) };
    ScalingFit {
        degenerate: exponent.is_none(),
        exponent,
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.4].iter().map(|e| (*e, 3.0 * e * e)).collect();
        assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&[(0.1, 1.0), (0.1, 2.0)]).is_none());
    }

    #[test]
    fn exact_sine() {
        let ode = PerturbedODE::parse(2, "-y", "0", &Bindings::default()).unwrap();
        let traj = integrate(&ScalarOde::new(ode, 0.0), &IvpSpec::new(0.0, 10.0, vec![0.0, 1.0], 1e-10)).unwrap();
        let closed = SeriesSolution::parse("sin(x)", "0").unwrap();
        let r = compare(&traj, &closed, 0.0, &NumericGrid::default()).unwrap();
        assert!(r.max_abs_error <= 1e-7, "{}", r.max_abs_error);
        assert_eq!(r.grid.len(), 1001);
        let worst = r
            .grid
            .iter()
            .zip(r.approx.iter().zip(&r.numeric))
            .map(|(_, (a, n))| (a - n).abs())
            .fold(0.0, f64::max);
        assert_eq!(worst, r.max_abs_error);
    }

    #[test]
    fn csv_layout() {
        let r = ComparisonReport {
            grid: vec![0.0, 0.5],
            approx: vec![1.0, 0.1],
            numeric: vec![1.0, 0.3],
            max_abs_error: 0.2,
            error_at: 0.5,
        };
        let csv = r.csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,approx,numeric,abs_error");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0");
        assert!(!csv.contains('\r'));
        let v: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 0.3);
    }

    #[test]
    fn grid_outside_span() {
        let ode = PerturbedODE::parse(2, "-y", "0", &Bindings::default()).unwrap();
        let traj = integrate(&ScalarOde::new(ode, 0.0), &IvpSpec::new(0.0, 1.0, vec![0.0, 1.0], 1e-8)).unwrap();
        let closed = SeriesSolution::parse("sin(x)", "0").unwrap();
        assert!(matches!(
            compare(&traj, &closed, 0.0, &NumericGrid::default()),
            Err(NumericError::GridOutsideSpan(_))
        ));
    }

    #[test]
    fn unperturbed_exact_is_degenerate() {
        let ode = PerturbedODE::parse(2, "-y", "0", &Bindings::default()).unwrap();
        let closed = SeriesSolution::parse("sin(x)", "0").unwrap();
        let fit = scaling_exponent(&ode, &closed, &[0.01, 0.1], &NumericGrid::default(), &ScalingOptions::default()).unwrap();
        assert!(fit.degenerate && fit.exponent.is_none(), "{fit:?}");
    }
}
