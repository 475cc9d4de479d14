//! Numerical propagation, conservation drift and the closed-form solutions of
//! the oscillator and time-dependent Kepler problems.

mod integrator;
mod solutions;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{CatalogError, DriftCase, FirstIntegral};
use crate::conditions::{ConditionError, DynSystem};
use crate::symexpr::{Compiled, Expr, Node, SymError};

pub use integrator::{aux_nodes, integrate, AuxNode, IntegratorConfig};
pub use solutions::{
    kepler_orbit, oscillator_solution, oscillator_solution_residual, polar_reduction, compare_oscillator,
    OrbitCheck, OrbitSolution, OscillatorComparison, PolarPoint, PolarTrajectory,
};

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite field value at t = {t}")]
    NonFinite { t: f64 },
    #[error("singularity at t = {t}: {what}")]
    Singular { t: f64, what: String },
    #[error("integral {integral} does not belong to the integrated system")]
    FamilyMismatch { integral: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub aux: Vec<f64>,
}

impl State {
    pub fn new(t: f64, q: Vec<f64>, v: Vec<f64>) -> Self {
        State { t, q, v, aux: Vec::new() }
    }

    pub fn with_aux(mut self, aux: Vec<f64>) -> Self {
        self.aux = aux;
        self
    }

    /// Slot vector (t, q, v, aux) matching the compiled layout.
    pub fn slots(&self) -> Vec<f64> {
        let mut x = vec![self.t];
        x.extend(&self.q);
        x.extend(&self.v);
        x.extend(&self.aux);
        x
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dim: usize,
    pub aux_names: Vec<String>,
    pub states: Vec<State>,
    pub stats: Stats,
    /// Acceleration field that produced the trajectory.
    pub accel: Vec<Expr>,
}

impl Trajectory {
    fn new(dim: usize, aux_names: Vec<String>, cfg: &IntegratorConfig) -> Self {
        Trajectory {
            dim,
            aux_names,
            states: Vec::new(),
            stats: Stats { rtol: cfg.rtol, atol: cfg.atol, ..Default::default() },
            accel: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, y: &[f64]) {
        let d = self.dim;
        self.states.push(State { t, q: y[..d].to_vec(), v: y[d..2 * d].to_vec(), aux: y[2 * d..].to_vec() });
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has its initial state")
    }

    pub fn slot_names(&self) -> Vec<String> {
        let mut s = vec!["t".to_string()];
        s.extend((1..=self.dim).map(|i| format!("q{i}")));
        s.extend((1..=self.dim).map(|i| format!("v{i}")));
        s.extend(self.aux_names.iter().cloned());
        s
    }

    /// Values of `e` at every recorded state.
    pub fn evaluate(&self, e: &Expr) -> Result<Vec<f64>, DynamicsError> {
        let c = Compiled::new(e, &self.slot_names())?;
        Ok(self.states.iter().map(|s| c.eval(&s.slots())).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DynamicsError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.slot_names())?;
        for s in &self.states {
            wr.write_record(s.slots().iter().map(|x| format!("{x:.16e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Integrate `sys` with the quadrature nodes needed by `exprs` and by the
/// field itself; every node starts at 0.
pub fn integrate_for(
    sys: &DynSystem,
    exprs: &[&Expr],
    s0: &State,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    let accel = sys.acceleration();
    let mut all: Vec<&Expr> = accel.iter().collect();
    all.extend_from_slice(exprs);
    let aux = aux_nodes(&all);
    let start = s0.clone().with_aux(vec![0.0; aux.len()]);
    let mut tr = integrate(sys, &aux, &start, t_end, cfg, &[])?;
    tr.accel = accel;
    Ok(tr)
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub integral: String,
    pub family: String,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tol: f64,
    pub interval: (f64, f64),
}

fn drift_of(values: &[f64]) -> Result<(f64, f64), DynamicsError> {
    let i0 = values[0];
    let mut max_abs: f64 = 0.0;
    for v in values {
        if !v.is_finite() {
            return Err(DynamicsError::Precondition("integral is not finite along the trajectory".into()));
        }
        max_abs = max_abs.max((v - i0).abs());
    }
    Ok((max_abs, max_abs / (1.0 + i0.abs())))
}

/// max |I(t) − I(t0)| and the same divided by 1 + |I(t0)|.
pub fn drift(i: &FirstIntegral, traj: &Trajectory) -> Result<DriftReport, DynamicsError> {
    if traj.accel != i.family.system.acceleration() {
        return Err(DynamicsError::FamilyMismatch { integral: i.name.clone() });
    }
    let (max_abs, max_rel) = drift_of(&traj.evaluate(&i.expr)?)?;
    Ok(DriftReport {
        integral: i.name.clone(),
        family: i.family.label.clone(),
        max_abs,
        max_rel,
        tol: traj.stats.rtol,
        interval: (traj.states[0].t, traj.last().t),
    })
}

/// Give each opaque function with a rule a distinct name.
fn rename_funcs(e: &Expr, suffix: &str) -> Expr {
    let mut funcs = Vec::new();
    e.visit(&mut |n| {
        if let Node::Func(f) = n.node() {
            if f.deriv.is_some() && !funcs.contains(n) {
                funcs.push(n.clone());
            }
        }
    });
    let pairs: Vec<(Expr, Expr)> = funcs
        .into_iter()
        .map(|n| {
            let Node::Func(f) = n.node() else { unreachable!() };
            let renamed = Expr::func(&format!("{}{suffix}", f.name), f.arg.clone(), f.deriv.clone());
            (n, renamed)
        })
        .collect();
    e.subs_many(&pairs)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbedDrift {
    pub param: String,
    pub max_rel: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftCaseReport {
    pub id: String,
    pub nominal: DriftReport,
    pub perturbed: Vec<PerturbedDrift>,
    pub steps: usize,
}

/// Integrate one manifest case and measure the drift of its integral and of
/// every single-parameter perturbation along the same trajectory.
pub fn run_drift_case(case: &DriftCase, cfg: &IntegratorConfig) -> Result<DriftCaseReport, DynamicsError> {
    let nominal = case.integral()?;
    let perturbed: Vec<(String, Expr)> = case
        .perturbed()?
        .into_iter()
        .enumerate()
        .map(|(n, (p, i))| (p, rename_funcs(&i.expr, &format!("~{n}"))))
        .collect();
    let mut exprs = vec![&nominal.expr];
    exprs.extend(perturbed.iter().map(|(_, e)| e));
    let s0 = State::new(case.interval.0, case.q0.clone(), case.v0.clone());
    let traj = integrate_for(&nominal.family.system, &exprs, &s0, case.interval.1, cfg)?;
    let report = drift(&nominal, &traj)?;
    let mut out = Vec::new();
    for (p, e) in &perturbed {
        let (_, max_rel) = drift_of(&traj.evaluate(e)?)?;
        out.push(PerturbedDrift { param: p.clone(), max_rel });
    }
    Ok(DriftCaseReport { id: case.id.clone(), nominal: report, perturbed: out, steps: traj.stats.steps })
}

/// All cases in parallel; the result keeps the input order.
pub fn run_drift_suite(cases: &[DriftCase], cfg: &IntegratorConfig) -> Vec<Result<DriftCaseReport, DynamicsError>> {
    cases.par_iter().map(|c| run_drift_case(c, cfg)).collect()
}

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, DynamicsError> {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, DynamicsError> {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return Err(DynamicsError::Quadrature(format!("non-finite integrand near {m}")));
        }
        if depth == 0 || delta.abs() <= 15.0 * tol {
            if depth == 0 && delta.abs() > 15.0 * tol {
                return Err(DynamicsError::Quadrature(format!("no convergence near {m}")));
            }
            return Ok(left + right + delta / 15.0);
        }
        Ok(rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)?
            + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 40)
}
