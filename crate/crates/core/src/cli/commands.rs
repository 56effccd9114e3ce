use rayon::prelude::*;
use serde_json::{json, Value};

use crate::expr::{canon_from_str, fmt_rational, rational_to_f64};
use crate::intfactor::{check_factor, find_first_integral, solve_factor, IntegratingFactor};
use crate::numeric::{compare, fit_scaling, integrate, IvpSpec, ScalarOde, ScalingOptions};
use crate::perturb::{solve_ivp, split_orders, verify_series, SeriesSolution, VerifyMode};
use crate::problem::{ProblemError, ProblemFile, ValidateSpec};
use crate::symmetry::{
    check_symmetry, classify_stability, counterpart_source, generator_coordinates, local_counterpart, solve_exact,
    EvolutionaryGenerator, PerturbedODE, PointGenerator,
};

use super::report::{exact_json, point_json, sha256_hex, Audit};
use super::{CliError, Command, Options};

type Outcome = (Value, Audit, Vec<(String, String)>);

pub(super) fn dispatch(cmd: &Command, p: &ProblemFile, opts: &Options) -> Result<Outcome, CliError> {
    match cmd {
        Command::Symmetries => symmetries(p),
        Command::Approx => approx(p),
        Command::Counterpart { selector } => counterpart(p, selector),
        Command::IntFactor {
            check,
            first_integral,
            solve,
        } => intfactor(p, check.as_deref(), *first_integral, *solve),
        Command::Solve => solve(p),
        Command::Validate => validate(p, opts),
    }
}

fn ode_string(ode: &PerturbedODE) -> String {
    format!("{} = {}", crate::expr::jet_name(ode.order()), ode.rhs())
}

fn symmetries(p: &ProblemFile) -> Result<Outcome, CliError> {
    let ode = p.ode()?;
    let ansatz = p.ansatz()?;
    let gens = solve_exact(&ode, &ansatz)?;
    let mut audit = Audit::default();
    let unperturbed = ode.to_unperturbed();
    for (i, g) in gens.iter().enumerate() {
        let r = check_symmetry(&unperturbed, g)?;
        audit.record(format!("generator[{i}]"), "exact determining equation", r.is_zero());
    }
    let mut coords = Vec::new();
    if let Some(basis) = p.basis()? {
        let refs: Vec<&PointGenerator> = gens.iter().collect();
        for b in &basis {
            let c = generator_coordinates(&refs, &b.generator);
            audit.record(b.name.clone(), "member of the computed span", c.is_some());
            coords.push(json!({
                "name": b.name,
                "coordinates": c.map(|v| v.iter().map(fmt_rational).collect::<Vec<_>>()),
            }));
        }
    }
    let outputs = json!({
        "ode": ode_string(&unperturbed),
        "point_terms": ansatz.point_terms().len(),
        "dimension": gens.len(),
        "generators": gens.iter().map(exact_json).collect::<Vec<_>>(),
        "basis_coordinates": coords,
    });
    Ok((outputs, audit, Vec::new()))
}

fn approx(p: &ProblemFile) -> Result<Outcome, CliError> {
    let ode = p.ode()?;
    let ansatz = p.ansatz()?;
    let basis = p.basis()?;
    let r = classify_stability(&ode, &ansatz, basis.as_deref())?;
    let mut audit = Audit::default();
    for (i, g) in r.approx.generators.iter().enumerate() {
        let res = check_symmetry(&ode, g)?;
        audit.record(format!("generator[{i}]"), "approximate determining equation", res.is_zero());
    }
    for s in &r.stable {
        let res = check_symmetry(&ode, &s.completed)?;
        audit.record(format!("{} completion", s.name), "approximate determining equation", res.is_zero());
    }
    let outputs = json!({
        "ode": ode_string(&ode),
        "point_terms": ansatz.point_terms().len(),
        "exact_basis": r.exact_basis.iter().map(|b| json!({"name": b.name, "xi": b.generator.xi0.to_string(), "eta": b.generator.eta0.to_string()})).collect::<Vec<_>>(),
        "constraints": r.constraints,
        "stable": r.stable.iter().map(|s| json!({"name": s.name, "completion": point_json(&s.completed)})).collect::<Vec<_>>(),
        "unstable": r.unstable,
        "dimension": r.approx.generators.len(),
        "trivial": r.approx.trivial.len(),
        "nontrivial": r.approx.nontrivial.iter().map(point_json).collect::<Vec<_>>(),
    });
    Ok((outputs, audit, Vec::new()))
}

fn counterpart(p: &ProblemFile, selector: &str) -> Result<Outcome, CliError> {
    let ode = p.ode()?;
    let ansatz = p.ansatz()?;
    let named = p
        .basis()?
        .and_then(|b| b.into_iter().find(|g| g.name == selector))
        .map(|g| g.generator.to_evolutionary().zeta0);
    let zeta0 = match named {
        Some(z) => z,
        None => canon_from_str(selector, &p.bindings()?).map_err(|error| ProblemError::Expr {
            field: "selector".into(),
            error,
        })?,
    };
    let g0 = EvolutionaryGenerator::new(zeta0.clone(), crate::expr::CanonExpr::zero())?;
    let found = local_counterpart(&ode, &g0, &ansatz)?;
    let source = counterpart_source(&ode, &zeta0)?;
    let mut audit = Audit::default();
    audit.record(
        "counterpart",
        "approximate determining equation",
        check_symmetry(&ode, &found)?.is_zero(),
    );
    let outputs = json!({
        "ode": ode_string(&ode),
        "selector": selector,
        "zeta0": found.zeta0.to_string(),
        "zeta1": found.zeta1.to_string(),
        "source": source.to_string(),
        "generator": found.to_string(),
        "note": "zeta1 is determined up to a solution of the homogeneous order-eps equation; free coefficients are set to 0",
    });
    Ok((outputs, audit, Vec::new()))
}

fn factor_json(mu: &IntegratingFactor) -> Value {
    json!({"mu0": mu.mu0.to_string(), "mu1": mu.mu1.to_string(), "factor": mu.to_string()})
}

fn intfactor(p: &ProblemFile, check: Option<&str>, want_fi: bool, want_solve: bool) -> Result<Outcome, CliError> {
    let ode = p.ode()?;
    let spec = p.intfactor.clone().unwrap_or_default();
    let factor_text = check.map(str::to_string).or(spec.factor.clone());
    // no flags: check and integrate the configured factor, or search for one
    let (do_check, do_fi, do_solve) = if check.is_none() && !want_fi && !want_solve {
        (factor_text.is_some(), factor_text.is_some(), factor_text.is_none())
    } else {
        (check.is_some(), want_fi, want_solve)
    };
    let mut audit = Audit::default();
    let mut outputs = serde_json::Map::new();
    outputs.insert("ode".into(), json!(ode_string(&ode)));
    let factor = match (&factor_text, do_check || do_fi) {
        (Some(t), true) => Some(p.factor(t)?),
        (None, true) => return Err(CliError::config("no integrating factor given (--check or intfactor.factor)")),
        _ => None,
    };
    if do_check {
        let mu = factor.as_ref().expect("set above");
        let res = check_factor(&ode, mu)?;
        audit.record(mu.to_string(), "integrating-factor conditions", res.is_zero());
        outputs.insert(
            "check".into(),
            json!({
                "factor": factor_json(mu),
                "residuals": res.0.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "is_factor": res.is_zero(),
            }),
        );
    }
    if do_fi {
        let mu = factor.as_ref().expect("set above");
        let psi_ansatz = match &spec.psi_ansatz {
            Some(cfg) => Some(p.ansatz_from("intfactor.psi_ansatz", Some(cfg))?),
            None => None,
        };
        let fi = find_first_integral(&ode, mu, psi_ansatz.as_ref())?;
        let id = fi.identity_residual(&ode, mu)?;
        let on_solutions = fi.derivative_on_solutions(&ode)?;
        audit.record("first integral", "D(psi) - lambda*mu*(equation) = 0", id.is_zero());
        audit.record("first integral", "D(psi) = 0 on solutions", on_solutions.is_zero());
        outputs.insert(
            "first_integral".into(),
            json!({
                "factor": factor_json(mu),
                "psi0": fi.psi0.to_string(),
                "psi1": fi.psi1.to_string(),
                "lambda": fmt_rational(&fi.lambda),
                "reduced": fi.reduced_ode("C1"),
                "derivative_on_solutions": on_solutions.to_string(),
            }),
        );
    }
    if do_solve {
        let ansatz = p.ansatz_from("intfactor.ansatz", spec.ansatz.as_ref())?;
        let found = solve_factor(&ode, &ansatz)?;
        for (i, mu) in found.iter().enumerate() {
            audit.record(format!("factor[{i}]"), "integrating-factor conditions", check_factor(&ode, mu)?.is_zero());
        }
        outputs.insert(
            "solve".into(),
            json!({
                "dimension": found.len(),
                "factors": found.iter().map(factor_json).collect::<Vec<_>>(),
            }),
        );
    }
    Ok((Value::Object(outputs), audit, Vec::new()))
}

fn series_json(s: &SeriesSolution) -> Value {
    json!({"y0": s.y0.to_string(), "y1": s.y1.to_string(), "series": s.to_string()})
}

fn solve_series(p: &ProblemFile) -> Result<(PerturbedODE, SeriesSolution, Audit, Value), CliError> {
    let ode = p.solve_ode()?;
    let ics = p.ics()?;
    let s = solve_ivp(&ode, &ics)?;
    let split = split_orders(&ode);
    let mut audit = Audit::default();
    let r = verify_series(&split, &s, VerifyMode::Symbolic)?;
    audit.record("series", "symbolic residual (0, 0)", r.is_zero());
    // re-evaluate the initial data at two ε values
    let n = ode.order();
    let mut ics_ok = true;
    for eps in [0.0, 0.5] {
        let d = s.eval_derivatives(n - 1, 0.0, eps)?;
        for ic in &ics {
            let want = rational_to_f64(&ic.value0) + eps * rational_to_f64(&ic.value1);
            ics_ok &= (d[ic.order as usize] - want).abs() <= 1e-12 * (1.0 + want.abs());
        }
    }
    audit.record("series", "initial conditions", ics_ok);
    let (y0, y1) = s.canonical()?;
    let outputs = json!({
        "ode": ode_string(&ode),
        "eq0": format!("{} = 0", split.eq0_string()),
        "eq1": format!("{} = 0", split.eq1_string()),
        "ics": ics.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "solution": series_json(&s),
        "canonical": {"y0": y0.to_string(), "y1": y1.to_string()},
        "residual": r.to_string(),
    });
    Ok((ode, s, audit, outputs))
}

fn solve(p: &ProblemFile) -> Result<Outcome, CliError> {
    let (_, _, audit, outputs) = solve_series(p)?;
    Ok((outputs, audit, Vec::new()))
}

fn csv_name(problem: &str, eps: f64) -> String {
    let stem = if problem.is_empty() { "problem" } else { problem };
    format!("{stem}_eps{eps}.csv")
}

fn validate(p: &ProblemFile, opts: &Options) -> Result<Outcome, CliError> {
    let spec = p.validate.clone().unwrap_or_else(ValidateSpec::default);
    let eps_list = opts.eps.clone().unwrap_or_else(|| spec.eps.clone());
    if eps_list.is_empty() {
        return Err(CliError::config("empty eps list"));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(CliError::config("eps values must be finite and non-negative"));
    }
    let tol = opts.tol.unwrap_or(spec.tol);
    if !(tol > 0.0) {
        return Err(CliError::config("tolerance must be positive"));
    }
    let grid = opts.grid.unwrap_or_else(|| spec.grid);
    let mut audit = Audit::default();
    let ode = p.solve_ode()?;
    let closed = match p.closed_form()? {
        Some(c) => c,
        None => {
            let (_, s, a, _) = solve_series(p)?;
            audit.0.extend(a.0);
            s
        }
    };
    let split = split_orders(&ode);
    if let Ok(r) = verify_series(&split, &closed, VerifyMode::Symbolic) {
        audit.record("closed form", "symbolic residual (0, 0)", r.is_zero());
    }
    let ics = if p.solve.is_some() { Some(p.ics()?) } else { None };
    let n = ode.order() as usize;
    let initial_for = |eps: f64| -> Result<Vec<f64>, CliError> {
        match &ics {
            Some(ics) => {
                let mut v = vec![f64::NAN; n];
                for ic in ics {
                    if let Some(slot) = v.get_mut(ic.order as usize) {
                        *slot = rational_to_f64(&ic.value0) + eps * rational_to_f64(&ic.value1);
                    }
                }
                if v.iter().any(|x| x.is_nan()) {
                    return Err(CliError::config(format!("initial conditions must fix y .. y^({})", n - 1)));
                }
                Ok(v)
            }
            None => Ok(closed.eval_derivatives(ode.order() - 1, grid.start, eps)?),
        }
    };
    let scaling_eps = opts.eps.clone().or(spec.scaling_eps.clone()).unwrap_or_else(|| eps_list.clone());
    let mut all: Vec<f64> = eps_list.clone();
    for e in &scaling_eps {
        if !all.contains(e) {
            all.push(*e);
        }
    }
    let runs: Vec<(f64, crate::numeric::ComparisonReport, usize, usize)> = all
        .par_iter()
        .map(|&eps| {
            let sys = ScalarOde::new(ode.clone(), eps);
            let traj = integrate(&sys, &IvpSpec::new(grid.start, grid.end, initial_for(eps)?, tol))?;
            let report = compare(&traj, &closed, eps, &grid)?;
            Ok((eps, report, traj.accepted, traj.rejected))
        })
        .collect::<Result<_, CliError>>()?;
    let mut artifacts = Vec::new();
    let mut comparisons = Vec::new();
    for (eps, report, accepted, rejected) in &runs {
        if !eps_list.contains(eps) {
            continue;
        }
        let recomputed = report
            .approx
            .iter()
            .zip(&report.numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        audit.record(format!("eps = {eps}"), "max error equals grid maximum", recomputed == report.max_abs_error);
        let csv = report.csv();
        let name = csv_name(&p.name, *eps);
        comparisons.push(json!({
            "eps": eps,
            "max_abs_error": report.max_abs_error,
            "error_at": report.error_at,
            "points": report.grid.len(),
            "accepted_steps": accepted,
            "rejected_steps": rejected,
            "csv": name,
            "csv_sha256": sha256_hex(csv.as_bytes()),
        }));
        artifacts.push((name, csv));
    }
    let errors: Vec<(f64, f64)> = scaling_eps
        .iter()
        .filter_map(|e| runs.iter().find(|r| r.0 == *e).map(|r| (*e, r.1.max_abs_error)))
        .collect();
    let scaling = if errors.len() >= 2 && errors.iter().all(|(e, _)| *e > 0.0) {
        let fit = fit_scaling(errors, ScalingOptions::default().noise_floor.max(100.0 * tol));
        json!({
            "eps": fit.errors.iter().map(|e| e.0).collect::<Vec<_>>(),
            "max_errors": fit.errors.iter().map(|e| e.1).collect::<Vec<_>>(),
            "exponent": fit.exponent,
            "degenerate": fit.degenerate,
        })
    } else {
        Value::Null
    };
    let outputs = json!({
        "ode": ode_string(&ode),
        "closed": series_json(&closed),
        "tol": tol,
        "grid": {"start": grid.start, "end": grid.end, "step": grid.step},
        "comparisons": comparisons,
        "scaling": scaling,
    });
    Ok((outputs, audit, artifacts))
}
