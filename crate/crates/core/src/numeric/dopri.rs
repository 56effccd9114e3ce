use crate::expr::{rational_to_f64, Ast, Env, EvalPoint};
use crate::symmetry::PerturbedODE;

use super::tableau::{dopri5, dopri5_dense, Tableau64};
use super::NumericError;

/// First-order system `u' = F(x, u)`.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, u: &[f64], du: &mut [f64]) -> Result<(), NumericError>;
}

/// `y^(n) = f0 + ε f1` as a system in `(y, y', …, y^(n-1))`.
#[derive(Clone, Debug)]
pub struct ScalarOde {
    pub ode: PerturbedODE,
    pub eps: f64,
}

impl ScalarOde {
    pub fn new(ode: PerturbedODE, eps: f64) -> Self {
        ScalarOde { ode, eps }
    }
}

impl OdeSystem for ScalarOde {
    fn dim(&self) -> usize {
        self.ode.order() as usize
    }

    fn rhs(&self, x: f64, u: &[f64], du: &mut [f64]) -> Result<(), NumericError> {
        let n = u.len();
        du[..n - 1].copy_from_slice(&u[1..]);
        let empty = Default::default();
        let pt = EvalPoint {
            x,
            eps: self.eps,
            jets: u,
            unknowns: &empty,
        };
        du[n - 1] = self.ode.f0().eval(&pt)? + self.eps * self.ode.f1().eval(&pt)?;
        Ok(())
    }
}

/// `y^(n) = rhs` for a right side outside the canonical fragment.
#[derive(Clone, Debug)]
pub struct AstOde {
    pub order: u32,
    pub rhs: Ast,
    pub eps: f64,
}

impl OdeSystem for AstOde {
    fn dim(&self) -> usize {
        self.order as usize
    }

    fn rhs(&self, x: f64, u: &[f64], du: &mut [f64]) -> Result<(), NumericError> {
        let n = u.len();
        du[..n - 1].copy_from_slice(&u[1..]);
        du[n - 1] = self.rhs.eval(&Env::at(x).with_eps(self.eps).with_jets(u.to_vec()))?;
        Ok(())
    }
}

/// Closure-backed system.
pub struct FnSystem<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, x: f64, u: &[f64], du: &mut [f64]) -> Result<(), NumericError> {
        (self.f)(x, u, du);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IvpSpec {
    pub x0: f64,
    pub x1: f64,
    pub initial: Vec<f64>,
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl IvpSpec {
    pub fn new(x0: f64, x1: f64, initial: Vec<f64>, tol: f64) -> Self {
        IvpSpec {
            x0,
            x1,
            initial,
            atol: tol,
            rtol: tol,
            max_steps: 1_000_000,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), NumericError> {
        if !(self.x0.is_finite() && self.x1.is_finite()) || self.x0 == self.x1 {
            return Err(NumericError::InvalidSpec(format!("degenerate span [{}, {}]", self.x0, self.x1)));
        }
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return Err(NumericError::InvalidSpec("tolerances must be positive".into()));
        }
        if self.initial.len() != dim {
            return Err(NumericError::InvalidSpec(format!(
                "expected {dim} initial values, got {}",
                self.initial.len()
            )));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState(self.x0));
        }
        Ok(())
    }
}

/// One accepted step with its quartic interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseStep {
    pub x: f64,
    pub h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let t = (x - self.x) / self.h;
        let t1 = 1.0 - t;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        (0..r1.len())
            .map(|i| r1[i] + t * (r2[i] + t1 * (r3[i] + t * (r4[i] + t1 * r5[i]))))
            .collect()
    }

    fn contains(&self, x: f64) -> bool {
        let (lo, hi) = if self.h > 0.0 { (self.x, self.x + self.h) } else { (self.x + self.h, self.x) };
        (lo..=hi).contains(&x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
    pub steps: Vec<DenseStep>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.xs[0]
    }

    pub fn end(&self) -> f64 {
        *self.xs.last().expect("non-empty")
    }

    pub fn covers(&self, x: f64) -> bool {
        let (a, b) = (self.start().min(self.end()), self.start().max(self.end()));
        (a..=b).contains(&x)
    }

    /// Dense-output state at `x`, or `None` outside the span.
    pub fn eval(&self, x: f64) -> Option<Vec<f64>> {
        if !self.covers(x) {
            return None;
        }
        let forward = self.end() >= self.start();
        let idx = self
            .steps
            .partition_point(|s| if forward { s.x + s.h < x } else { s.x + s.h > x })
            .min(self.steps.len() - 1);
        let step = &self.steps[idx];
        debug_assert!(step.contains(x));
        Some(step.eval(x))
    }
}

fn weighted_error(e: &[f64], y: &[f64], y_new: &[f64], atol: f64, rtol: f64) -> f64 {
    e.iter()
        .zip(y.iter().zip(y_new))
        .map(|(ei, (a, b))| ei.abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

struct Stepper<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    t: Tableau64,
    d: Vec<f64>,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    fn new(sys: &'a S) -> Self {
        let n = sys.dim();
        let t = dopri5().to_f64();
        let k = vec![vec![0.0; n]; t.c.len()];
        Stepper {
            sys,
            d: dopri5_dense().iter().map(rational_to_f64).collect(),
            t,
            k,
            tmp: vec![0.0; n],
        }
    }

    /// Stages 2..7 from `k[0] = F(x, y)`; returns the 5th-order update and
    /// the embedded error vector. `k[6]` ends up as `F(x+h, y_new)`.
    fn attempt(&mut self, x: f64, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>), NumericError> {
        let n = y.len();
        for i in 1..self.t.c.len() {
            for m in 0..n {
                let mut acc = 0.0;
                for (j, a) in self.t.a[i].iter().enumerate() {
                    acc += a * self.k[j][m];
                }
                self.tmp[m] = y[m] + h * acc;
            }
            self.sys.rhs(x + self.t.c[i] * h, &self.tmp, &mut self.k[i])?;
        }
        // last stage is evaluated at y_new (FSAL)
        let y_new = self.tmp.clone();
        let err: Vec<f64> = (0..n)
            .map(|m| h * self.t.e.iter().zip(&self.k).map(|(e, k)| e * k[m]).sum::<f64>())
            .collect();
        Ok((y_new, err))
    }

    fn dense(&self, x: f64, y: &[f64], y_new: &[f64], h: f64) -> DenseStep {
        let n = y.len();
        let ydiff: Vec<f64> = (0..n).map(|m| y_new[m] - y[m]).collect();
        let bspl: Vec<f64> = (0..n).map(|m| h * self.k[0][m] - ydiff[m]).collect();
        let r4: Vec<f64> = (0..n).map(|m| ydiff[m] - h * self.k[6][m] - bspl[m]).collect();
        let r5: Vec<f64> = (0..n)
            .map(|m| h * self.d.iter().zip(&self.k).map(|(d, k)| d * k[m]).sum::<f64>())
            .collect();
        DenseStep {
            x,
            h,
            rcont: [y.to_vec(), ydiff, bspl, r4, r5],
        }
    }
}

/// Adaptive Dormand–Prince 5(4) with per-component error
/// `|err_i| ≤ atol + rtol·max(|y_i|, |y_new,i|)`.
pub fn integrate<S: OdeSystem + ?Sized>(sys: &S, ivp: &IvpSpec) -> Result<Trajectory, NumericError> {
    ivp.validate(sys.dim())?;
    let mut st = Stepper::new(sys);
    let span = ivp.x1 - ivp.x0;
    let dir = span.signum();
    let mut x = ivp.x0;
    let mut y = ivp.initial.clone();
    let mut h = 0.01 * span;
    sys.rhs(x, &y, &mut st.k[0])?;
    let mut traj = Trajectory {
        xs: vec![x],
        states: vec![y.clone()],
        accepted: 0,
        rejected: 0,
        steps: Vec::new(),
    };
    let mut last_rejected = false;
    while (ivp.x1 - x) * dir > 0.0 {
        if traj.accepted + traj.rejected >= ivp.max_steps {
            return Err(NumericError::TooManySteps(ivp.max_steps));
        }
        let last = (x + h - ivp.x1) * dir >= 0.0;
        if last {
            h = ivp.x1 - x;
        }
        if h.abs() <= 16.0 * f64::EPSILON * x.abs().max(1.0) {
            return Err(NumericError::StepSizeUnderflow { x, h });
        }
        let (y_new, err) = st.attempt(x, &y, h)?;
        if y_new.iter().chain(&st.k[6]).any(|v| !v.is_finite()) {
            // treat as a failed step; the underflow check ends true blow-ups
            traj.rejected += 1;
            last_rejected = true;
            h *= 0.2;
            continue;
        }
        let e = weighted_error(&err, &y, &y_new, ivp.atol, ivp.rtol);
        let mut factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if e <= 1.0 {
            traj.steps.push(st.dense(x, &y, &y_new, h));
            x = if last { ivp.x1 } else { x + h };
            y = y_new;
            st.k.swap(0, 6);
            traj.accepted += 1;
            traj.xs.push(x);
            traj.states.push(y.clone());
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
        } else {
            traj.rejected += 1;
            last_rejected = true;
            factor = factor.min(1.0);
        }
        h *= factor;
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(NumericError::NonFiniteState(x));
    }
    Ok(traj)
}

/// `steps` fixed steps of the 5th-order formula; returns the final state.
pub fn integrate_fixed<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: f64,
    x1: f64,
    initial: &[f64],
    steps: usize,
) -> Result<Vec<f64>, NumericError> {
    if steps == 0 || initial.len() != sys.dim() {
        return Err(NumericError::InvalidSpec("need at least one step and a full initial state".into()));
    }
    let mut st = Stepper::new(sys);
    let h = (x1 - x0) / steps as f64;
    let mut y = initial.to_vec();
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        sys.rhs(x, &y, &mut st.k[0])?;
        y = st.attempt(x, &y, h)?.0;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState(x + h));
        }
    }
    Ok(y)
}
