//! Dormand–Prince 5(4) with PI step-size control.

use super::{DynamicsError, State, Trajectory};
use crate::conditions::DynSystem;
use crate::symexpr::{Compiled, Expr, FORMAL_ARG};

#[derive(Clone, Debug, serde::Serialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Abort when |q| drops below this for potentials singular at the origin.
    pub r_min: f64,
    pub max_steps: usize,
    pub safety: f64,
    pub max_growth: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rtol: 1e-12, atol: 1e-12, r_min: 1e-3, max_steps: 2_000_000, safety: 0.9, max_growth: 5.0 }
    }
}

impl IntegratorConfig {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        IntegratorConfig { rtol, atol, ..Default::default() }
    }
}

/// A quantity advanced by quadrature alongside the motion: d(name)/dt = rate.
#[derive(Clone, Debug)]
pub struct AuxNode {
    pub name: String,
    pub rate: Expr,
}

/// Opaque functions of t with a derivative rule, found in `exprs` and in
/// the rules themselves.
pub fn aux_nodes(exprs: &[&Expr]) -> Vec<AuxNode> {
    let mut out: Vec<AuxNode> = Vec::new();
    let mut queue: Vec<Expr> = exprs.iter().map(|e| (*e).clone()).collect();
    while let Some(e) = queue.pop() {
        e.visit(&mut |n| {
            if let crate::symexpr::Node::Func(f) = n.node() {
                if f.arg == crate::symexpr::sym_t() && !out.iter().any(|a| a.name == f.name) {
                    if let Some(d) = &f.deriv {
                        let rate = d.subs(&Expr::sym(FORMAL_ARG), &f.arg);
                        queue.push(rate.clone());
                        out.push(AuxNode { name: f.name.clone(), rate });
                    }
                }
            }
        });
    }
    out
}

pub(crate) fn slot_names(dim: usize, aux: &[AuxNode]) -> Vec<String> {
    let mut s = vec!["t".to_string()];
    s.extend((1..=dim).map(|i| format!("q{i}")));
    s.extend((1..=dim).map(|i| format!("v{i}")));
    s.extend(aux.iter().map(|a| a.name.clone()));
    s
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

struct Field {
    dim: usize,
    accel: Vec<Compiled>,
    rates: Vec<Compiled>,
    guard_radius: bool,
    r_min: f64,
    buf: std::cell::RefCell<Vec<f64>>,
}

impl Field {
    fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), DynamicsError> {
        let d = self.dim;
        if self.guard_radius {
            let r = y[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
            if r < self.r_min {
                return Err(DynamicsError::Singular { t, what: format!("r = {r:e} below {:e}", self.r_min) });
            }
        }
        let mut x = self.buf.borrow_mut();
        x[0] = t;
        x[1..].copy_from_slice(y);
        out[..d].copy_from_slice(&y[d..2 * d]);
        for (i, a) in self.accel.iter().enumerate() {
            out[d + i] = a.eval(&x);
        }
        for (i, r) in self.rates.iter().enumerate() {
            out[2 * d + i] = r.eval(&x);
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite { t });
        }
        Ok(())
    }
}

fn err_norm(e: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = e.len() as f64;
    let s: f64 = e
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(ei, (a, b))| {
            let sc = cfg.atol + cfg.rtol * a.abs().max(b.abs());
            (ei / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrate from `s0` to `t_end`. With `outputs` empty every accepted step is
/// recorded; otherwise steps are shortened to land on each requested time.
pub fn integrate(
    sys: &DynSystem,
    aux: &[AuxNode],
    s0: &State,
    t_end: f64,
    cfg: &IntegratorConfig,
    outputs: &[f64],
) -> Result<Trajectory, DynamicsError> {
    let d = sys.dim;
    if s0.q.len() != d || s0.v.len() != d || s0.aux.len() != aux.len() {
        return Err(DynamicsError::Precondition("initial state does not match the system".into()));
    }
    if !(t_end > s0.t) {
        return Err(DynamicsError::Precondition("t_end must exceed the initial time".into()));
    }
    if !(cfg.rtol > 0.0 && cfg.atol > 0.0) {
        return Err(DynamicsError::Precondition("tolerances must be positive".into()));
    }
    let slots = slot_names(d, aux);
    let accel = sys.acceleration().iter().map(|e| Compiled::new(e, &slots)).collect::<Result<Vec<_>, _>>()?;
    let rates = aux.iter().map(|a| Compiled::new(&a.rate, &slots)).collect::<Result<Vec<_>, _>>()?;
    let field = Field {
        dim: d,
        accel,
        rates,
        guard_radius: sys.nu.as_ref().is_some_and(|nu| *nu > crate::symexpr::rat_int(-2)),
        r_min: cfg.r_min,
        buf: std::cell::RefCell::new(vec![0.0; slots.len()]),
    };
    let n = 2 * d + aux.len();
    let mut y: Vec<f64> = s0.q.iter().chain(&s0.v).chain(&s0.aux).copied().collect();
    let mut t = s0.t;
    let mut k = vec![vec![0.0; n]; 7];
    field.eval(t, &y, &mut k[0])?;

    let mut targets: Vec<f64> = outputs.iter().copied().filter(|x| *x > t && *x <= t_end).collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if targets.last().map_or(true, |x| *x < t_end) && !outputs.is_empty() {
        targets.push(t_end);
    }
    let mut next_target = 0;

    // initial step from the scale of y and y'
    let norm = |v: &[f64]| {
        (v.iter().zip(&y).map(|(a, b)| (a / (cfg.atol + cfg.rtol * b.abs())).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let (d0, d1) = (norm(&y), norm(&k[0]));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_end - t).max(1e-10);

    let mut traj = Trajectory::new(d, aux.iter().map(|a| a.name.clone()).collect(), cfg);
    traj.push(t, &y);
    let mut err_prev: f64 = 1e-4;
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut errv = vec![0.0; n];
    let (beta, alpha) = (0.04, 0.2 - 0.75 * 0.04);
    loop {
        if traj.stats.steps + traj.stats.rejected >= cfg.max_steps {
            return Err(DynamicsError::StepUnderflow { t, h });
        }
        let stop = if outputs.is_empty() { t_end } else { targets[next_target] };
        let mut h_step = h;
        let mut clipped = false;
        if t + h_step >= stop {
            h_step = stop - t;
            clipped = true;
        }
        if h_step < 1e-14 * t.abs().max(1.0) {
            return Err(DynamicsError::StepUnderflow { t, h: h_step });
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h_step * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            field.eval(t + C[s] * h_step, &ytmp, &mut tail[0])?;
        }
        // stage 7 was evaluated at the 5th-order solution
        ynew.copy_from_slice(&ytmp);
        for i in 0..n {
            errv[i] = h_step * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
        }
        let err = err_norm(&errv, &y, &ynew, cfg);
        if err <= 1.0 {
            t = if clipped { stop } else { t + h_step };
            y.copy_from_slice(&ynew);
            let last = k[6].clone();
            k[0] = last;
            traj.stats.steps += 1;
            let fac = if err == 0.0 {
                cfg.max_growth
            } else {
                (cfg.safety * err.powf(-alpha) * err_prev.powf(beta)).clamp(0.2, cfg.max_growth)
            };
            err_prev = err.max(1e-4);
            if outputs.is_empty() || clipped {
                traj.push(t, &y);
            }
            if clipped && !outputs.is_empty() {
                next_target += 1;
            }
            if (outputs.is_empty() && t >= t_end) || (!outputs.is_empty() && next_target >= targets.len()) {
                break;
            }
            h = if clipped { h.max(h_step) } else { h_step * fac };
        } else {
            traj.stats.rejected += 1;
            let fac = (cfg.safety * err.powf(-alpha)).clamp(0.2, 1.0);
            h = h_step * fac;
        }
    }
    Ok(traj)
}
