//! Problem files: JSON descriptions of an ODE and the inputs of each command.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::expr::{canon_from_str, parse_rational, Bindings, CanonExpr, ExprError};
use crate::intfactor::IntegratingFactor;
use crate::perturb::{InitialCondition, NumericGrid, PerturbError, SeriesSolution};
use crate::symmetry::{AnsatzSpec, NamedGenerator, PerturbedODE, PointGenerator};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: String,
    /// Named rational parameters, e.g. `"c": "1/2"`.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    pub ode: OdeSpec,
    #[serde(default)]
    pub ansatz: Option<AnsatzConfig>,
    /// Named exact generators of the unperturbed equation.
    #[serde(default)]
    pub basis: Vec<GeneratorSpec>,
    #[serde(default)]
    pub intfactor: Option<IntFactorSpec>,
    #[serde(default)]
    pub solve: Option<SolveSpec>,
    #[serde(default)]
    pub validate: Option<ValidateSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub order: u32,
    pub f0: String,
    #[serde(default = "zero_text")]
    pub f1: String,
}

fn zero_text() -> String {
    "0".into()
}

/// Partial override of [`AnsatzSpec::default`]; `"preset": "empty"` starts
/// from the empty ansatz instead.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub x_basis: Option<Vec<String>>,
    #[serde(default)]
    pub y_degree: Option<u32>,
    #[serde(default)]
    pub evo_x_basis: Option<Vec<String>>,
    #[serde(default)]
    pub jet_degree: Option<u32>,
    #[serde(default)]
    pub jet_order: Option<u32>,
    #[serde(default)]
    pub monomials: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub xi: String,
    pub eta: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntFactorSpec {
    #[serde(default)]
    pub factor: Option<String>,
    #[serde(default)]
    pub ansatz: Option<AnsatzConfig>,
    #[serde(default)]
    pub psi_ansatz: Option<AnsatzConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSpec {
    pub order: u32,
    pub value: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    /// Equation used for the series solve when it differs from `ode`.
    #[serde(default)]
    pub ode: Option<OdeSpec>,
    pub ics: Vec<IcSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    /// `y0 + eps*y1`; when absent the `solve` result is used.
    #[serde(default)]
    pub closed: Option<String>,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// ε values for the scaling fit; defaults to `eps`.
    #[serde(default)]
    pub scaling_eps: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub grid: NumericGrid,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec {
            closed: None,
            eps: Vec::new(),
            scaling_eps: None,
            tol: default_tol(),
            grid: NumericGrid::default(),
        }
    }
}

/// Failure to turn a problem file into domain objects. `field` locates the
/// offending entry (`ode.f1`, `basis[2].eta`, ...).
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    Json(String),
    Expr { field: String, error: ExprError },
    Invalid { field: String, message: String },
}

impl std::fmt::Display for ProblemError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemError::Json(m) => write!(f, "problem file: {m}"),
            ProblemError::Expr { field, error } => write!(f, "{field}: {error}"),
            ProblemError::Invalid { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

impl std::error::Error for ProblemError {}

fn invalid(field: &str, message: impl std::fmt::Display) -> ProblemError {
    ProblemError::Invalid {
        field: field.to_string(),
        message: message.to_string(),
    }
}

fn perturb_error(field: &str, e: PerturbError) -> ProblemError {
    match e {
        PerturbError::Expr(error) => ProblemError::Expr {
            field: field.to_string(),
            error,
        },
        other => invalid(field, other),
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile, ProblemError> {
        serde_json::from_str(text).map_err(|e| ProblemError::Json(e.to_string()))
    }

    pub fn bindings(&self) -> Result<Bindings, ProblemError> {
        let mut b = Bindings::default();
        for (k, v) in &self.params {
            let r = parse_rational(v).ok_or_else(|| invalid(&format!("params.{k}"), format!("`{v}` is not a rational")))?;
            b = b.with(k, r);
        }
        Ok(b)
    }

    fn expr(&self, field: &str, text: &str) -> Result<CanonExpr, ProblemError> {
        canon_from_str(text, &self.bindings()?).map_err(|error| ProblemError::Expr {
            field: field.to_string(),
            error,
        })
    }

    fn build_ode(&self, field: &str, spec: &OdeSpec) -> Result<PerturbedODE, ProblemError> {
        let f0 = self.expr(&format!("{field}.f0"), &spec.f0)?;
        let f1 = self.expr(&format!("{field}.f1"), &spec.f1)?;
        PerturbedODE::new(spec.order, f0, f1).map_err(|e| invalid(field, e))
    }

    pub fn ode(&self) -> Result<PerturbedODE, ProblemError> {
        self.build_ode("ode", &self.ode)
    }

    /// Equation for `solve`/`validate`: `solve.ode` if given, else `ode`.
    pub fn solve_ode(&self) -> Result<PerturbedODE, ProblemError> {
        match self.solve.as_ref().and_then(|s| s.ode.as_ref()) {
            Some(spec) => self.build_ode("solve.ode", spec),
            None => self.ode(),
        }
    }

    pub fn ansatz_from(&self, field: &str, cfg: Option<&AnsatzConfig>) -> Result<AnsatzSpec, ProblemError> {
        let Some(cfg) = cfg else {
            return Ok(AnsatzSpec::default());
        };
        let mut a = match cfg.preset.as_deref() {
            None | Some("default") => AnsatzSpec::default(),
            Some("empty") => AnsatzSpec::empty(),
            Some(other) => return Err(invalid(&format!("{field}.preset"), format!("unknown preset `{other}`"))),
        };
        let list = |name: &str, items: &[String]| -> Result<Vec<CanonExpr>, ProblemError> {
            items
                .iter()
                .enumerate()
                .map(|(i, t)| self.expr(&format!("{field}.{name}[{i}]"), t))
                .collect()
        };
        if let Some(v) = &cfg.x_basis {
            a.x_basis = list("x_basis", v)?;
        }
        if let Some(v) = cfg.y_degree {
            a.y_degree = v;
        }
        if let Some(v) = &cfg.evo_x_basis {
            a.evo_x_basis = list("evo_x_basis", v)?;
        }
        if let Some(v) = cfg.jet_degree {
            a.jet_degree = v;
        }
        if cfg.jet_order.is_some() {
            a.jet_order = cfg.jet_order;
        }
        if let Some(v) = &cfg.monomials {
            a.monomials = Some(list("monomials", v)?);
        }
        Ok(a)
    }

    pub fn ansatz(&self) -> Result<AnsatzSpec, ProblemError> {
        self.ansatz_from("ansatz", self.ansatz.as_ref())
    }

    pub fn basis(&self) -> Result<Option<Vec<NamedGenerator>>, ProblemError> {
        if self.basis.is_empty() {
            return Ok(None);
        }
        let mut out = Vec::new();
        for (i, g) in self.basis.iter().enumerate() {
            let field = format!("basis[{i}]");
            let xi = self.expr(&format!("{field}.xi"), &g.xi)?;
            let eta = self.expr(&format!("{field}.eta"), &g.eta)?;
            let generator = PointGenerator::exact(xi, eta).map_err(|e| invalid(&field, e))?;
            if out.iter().any(|n: &NamedGenerator| n.name == g.name) {
                return Err(invalid(&field, format!("duplicate name `{}`", g.name)));
            }
            out.push(NamedGenerator {
                name: g.name.clone(),
                generator,
            });
        }
        Ok(Some(out))
    }

    pub fn factor(&self, text: &str) -> Result<IntegratingFactor, ProblemError> {
        IntegratingFactor::parse(text, &self.bindings()?).map_err(|e| match e {
            crate::intfactor::IntFactorError::Expr(error) => ProblemError::Expr {
                field: "factor".into(),
                error,
            },
            other => invalid("factor", other),
        })
    }

    pub fn ics(&self) -> Result<Vec<InitialCondition>, ProblemError> {
        let spec = self.solve.as_ref().ok_or_else(|| invalid("solve", "section missing"))?;
        let b = self.bindings()?;
        spec.ics
            .iter()
            .enumerate()
            .map(|(i, ic)| {
                InitialCondition::parse(ic.order, &ic.value, &b).map_err(|e| perturb_error(&format!("solve.ics[{i}]"), e))
            })
            .collect()
    }

    pub fn closed_form(&self) -> Result<Option<SeriesSolution>, ProblemError> {
        match self.validate.as_ref().and_then(|v| v.closed.as_ref()) {
            Some(text) => SeriesSolution::parse_combined(text, &self.bindings()?)
                .map(Some)
                .map_err(|e| perturb_error("validate.closed", e)),
            None => Ok(None),
        }
    }
}
