//! Closed-form solutions and their numeric cross-checks.

use nalgebra::{Rotation3, Unit, Vector3};
use serde::Serialize;

use super::{integrate, quadrature, DynamicsError, IntegratorConfig, State, Trajectory};
use crate::catalog::{kepler_time_dependent, linear_pair, oscillator_omega, OscillatorSpec};
use crate::conditions::DynSystem;
use crate::symexpr::{all_zero, rat_int, rat_to_f64, Compiled, Expr, Rat, Strategy, Verdict};

const QUAD_TOL: f64 = 1e-13;

fn numeric(e: &Expr, what: &str) -> Result<f64, DynamicsError> {
    let c = Compiled::new(e, &["t".to_string()])
        .map_err(|_| DynamicsError::Precondition(format!("{what} must be a function of t only")))?;
    Ok(c.eval(&[0.0]))
}

fn time_function(e: &Expr, what: &str) -> Result<Compiled, DynamicsError> {
    Compiled::new(e, &["t".to_string()])
        .map_err(|_| DynamicsError::Precondition(format!("{what} must be a function of t only")))
}

fn pair_parts(spec: &OscillatorSpec) -> Result<(Expr, Expr, Expr), DynamicsError> {
    let (Some(c0), Some(h), Some(theta)) = (spec.c0(), spec.amplitude(), spec.theta()) else {
        return Err(DynamicsError::Precondition("the solution needs a family with c0".into()));
    };
    Ok((c0.clone(), h, theta))
}

/// q_i(t) = (h/s)(I41_i sinθ − I42_i cosθ) with h² = f, s = (c0/2)^(1/2) and θ' = s/f.
pub fn oscillator_solution(spec: &OscillatorSpec, i41: &[Expr], i42: &[Expr]) -> Result<Vec<Expr>, DynamicsError> {
    let (c0, h, theta) = pair_parts(spec)?;
    if let Some(c) = c0.as_num() {
        if *c <= rat_int(0) {
            return Err(DynamicsError::Precondition("c0 must be positive".into()));
        }
    }
    if i41.len() != i42.len() {
        return Err(DynamicsError::Precondition("constant vectors differ in length".into()));
    }
    let amp = h / (c0 * Expr::frac(1, 2)).sqrt();
    Ok(i41.iter().zip(i42).map(|(a, b)| &amp * (a * theta.sin() - b * theta.cos())).collect())
}

/// Substitute the closed form with symbolic constants into q̈ = 2ωq.
pub fn oscillator_solution_residual(spec: &OscillatorSpec, dim: usize) -> Result<Verdict, DynamicsError> {
    let c41: Vec<Expr> = (1..=dim).map(|i| Expr::sym(&format!("C41_{i}"))).collect();
    let c42: Vec<Expr> = (1..=dim).map(|i| Expr::sym(&format!("C42_{i}"))).collect();
    let sol = oscillator_solution(spec, &c41, &c42)?;
    let omega = oscillator_omega(spec);
    let res: Vec<Expr> = sol.iter().map(|x| x.diff_n("t", 2) - Expr::int(2) * &omega * x).collect();
    Ok(all_zero(&res, Strategy::Algebraic)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillatorComparison {
    pub i41: Vec<f64>,
    pub i42: Vec<f64>,
    /// max |q_closed − q_numeric| over the samples.
    pub max_error: f64,
    /// max |θ_aux − θ_quadrature|.
    pub theta_error: f64,
    pub samples: usize,
}

/// Integrate q̈ = 2ωq from (q0, v0), fix the constants at t0 with θ(t0) = 0 and
/// compare the closed form (θ by quadrature) with the numeric path.
pub fn compare_oscillator(
    spec: &OscillatorSpec,
    q0: &[f64],
    v0: &[f64],
    interval: (f64, f64),
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<OscillatorComparison, DynamicsError> {
    let (c0, h, theta) = pair_parts(spec)?;
    let c0v = numeric(&c0, "c0")?;
    if !(c0v > 0.0) {
        return Err(DynamicsError::Precondition("c0 must be positive".into()));
    }
    let dim = q0.len();
    if !(1..=3).contains(&dim) || v0.len() != dim {
        return Err(DynamicsError::Precondition("initial state dimension".into()));
    }
    let sys = DynSystem::kepler_in(dim, rat_int(-2), oscillator_omega(spec))?;
    let aux = super::aux_nodes(&[&theta]);
    let (t0, t1) = interval;
    let outputs: Vec<f64> = (1..=samples).map(|n| t0 + (t1 - t0) * n as f64 / samples as f64).collect();
    let s0 = State::new(t0, q0.to_vec(), v0.to_vec()).with_aux(vec![0.0; aux.len()]);
    let traj = integrate(&sys, &aux, &s0, t1, cfg, &outputs)?;

    let (i41e, i42e) = linear_pair(&h, &c0, &theta);
    let slots = traj.slot_names();
    let x0 = traj.states[0].slots();
    let eval0 = |e: &Expr| -> Result<f64, DynamicsError> { Ok(Compiled::new(e, &slots)?.eval(&x0)) };
    let i41 = i41e[..dim].iter().map(eval0).collect::<Result<Vec<_>, _>>()?;
    let i42 = i42e[..dim].iter().map(eval0).collect::<Result<Vec<_>, _>>()?;

    let rate = time_function(&aux[0].rate, "theta rate")?;
    let amp = time_function(&(h / (c0 * Expr::frac(1, 2)).sqrt()), "amplitude")?;
    let theta_slot = 1 + 2 * dim;
    let (mut th, mut t_prev) = (0.0, t0);
    let (mut max_error, mut theta_error): (f64, f64) = (0.0, 0.0);
    for st in &traj.states {
        th += quadrature(&|t| rate.eval(&[t]), t_prev, st.t, QUAD_TOL)?;
        t_prev = st.t;
        theta_error = theta_error.max((st.slots()[theta_slot] - th).abs());
        let a = amp.eval(&[st.t]);
        for i in 0..dim {
            let closed = a * (i41[i] * th.sin() - i42[i] * th.cos());
            max_error = max_error.max((closed - st.q[i]).abs());
        }
    }
    Ok(OscillatorComparison { i41, i42, max_error, theta_error, samples: traj.states.len() })
}

/// Conic data of the ω = k/(b0 + b1 t) Kepler problem in the z = 0 plane.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSolution {
    pub b0: f64,
    pub b1: f64,
    pub k: f64,
    pub t0: f64,
    pub q0: [f64; 3],
    pub v0: [f64; 3],
    pub l3: f64,
    pub e2: f64,
    pub a1: f64,
    pub a2: f64,
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip)]
    system: DynSystem,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCheck {
    /// max relative |r_closed(θ(t)) − r(t)| with θ(t) from inverting the θ quadrature.
    pub max_rel_r_error: f64,
    /// Same with the numerically observed polar angle.
    pub max_rel_r_error_observed_theta: f64,
    pub max_theta_error: f64,
    /// max relative deviation of r²θ̇ from L3.
    pub max_rel_l3_error: f64,
    /// max relative error of 1/r written through the θ integral (b1 ≠ 0 only).
    pub max_rel_integral_form_error: Option<f64>,
    pub samples: usize,
}

fn polar_angle_unwrapped(states: &[State]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(states.len());
    for s in states {
        let raw = s.q[1].atan2(s.q[0]);
        let th = match out.last() {
            None => raw,
            Some(prev) => {
                let two_pi = std::f64::consts::TAU;
                raw + two_pi * ((prev - raw) / two_pi).round()
            }
        };
        out.push(th);
    }
    out
}

/// Conserved values from the initial state, evaluated with the catalog expressions.
pub fn kepler_orbit(b0: &Rat, b1: &Rat, k: &Rat, t0: f64, q0: [f64; 3], v0: [f64; 3]) -> Result<OrbitSolution, DynamicsError> {
    if q0[2] != 0.0 || v0[2] != 0.0 {
        return Err(DynamicsError::Precondition("initial state must lie in the z = 0 plane".into()));
    }
    let td = kepler_time_dependent(&Expr::num(b0.clone()), &Expr::num(b1.clone()), &Expr::num(k.clone()))?;
    let slots: Vec<String> = ["t", "q1", "q2", "q3", "v1", "v2", "v3"].iter().map(|s| s.to_string()).collect();
    let x0 = State::new(t0, q0.to_vec(), v0.to_vec()).slots();
    let ev = |e: &Expr| -> Result<f64, DynamicsError> { Ok(Compiled::new(e, &slots)?.eval(&x0)) };
    let (b0f, b1f, kf) = (rat_to_f64(b0), rat_to_f64(b1), rat_to_f64(k));
    if b0f + b1f * t0 == 0.0 {
        return Err(DynamicsError::Singular { t: t0, what: "b0 + b1 t vanishes".into() });
    }
    let l3 = ev(&td.l[2].expr)?;
    if l3.abs() < 1e-12 {
        return Err(DynamicsError::Precondition("L3 = 0: radial orbit".into()));
    }
    let e2 = ev(&td.e2.expr)?;
    let (a1, a2) = (ev(&td.a[0].expr)?, ev(&td.a[1].expr)?);
    let (k1, k2) = (a1 / kf, a2 / kf);
    Ok(OrbitSolution {
        b0: b0f,
        b1: b1f,
        k: kf,
        t0,
        q0,
        v0,
        l3,
        e2,
        a1,
        a2,
        k1,
        k2,
        alpha: k1.hypot(k2),
        beta: k2.atan2(k1),
        system: td.e2.family.system.clone(),
    })
}

impl OrbitSolution {
    fn lin(&self, t: f64) -> f64 {
        self.b0 + self.b1 * t
    }

    fn denom(&self, theta: f64) -> f64 {
        1.0 + self.k1 * theta.cos() + self.k2 * theta.sin()
    }

    /// r = L3²(b0 + b1 t) / (k (1 + k1 cosθ + k2 sinθ)).
    pub fn radius(&self, theta: f64, t: f64) -> f64 {
        self.l3 * self.l3 * self.lin(t) / (self.k * self.denom(theta))
    }

    pub fn conic(&self) -> &'static str {
        match self.alpha {
            a if a < 1e-12 => "circle",
            a if a < 1.0 - 1e-12 => "ellipse",
            a if a <= 1.0 + 1e-12 => "parabola",
            _ => "hyperbola",
        }
    }

    /// |2 E2 L3² − k²(α² − 1)| / k².
    pub fn energy_relation_residual(&self) -> f64 {
        (2.0 * self.e2 * self.l3 * self.l3 - self.k * self.k * (self.alpha * self.alpha - 1.0)).abs() / (self.k * self.k)
    }

    /// ∫ k²/(L3³ (b0 + b1 τ)²) dτ from t0 to t.
    fn theta_target(&self, t: f64) -> f64 {
        let c = self.k * self.k / self.l3.powi(3);
        if self.b1 == 0.0 {
            c * (t - self.t0) / (self.b0 * self.b0)
        } else {
            c / self.b1 * (1.0 / self.lin(self.t0) - 1.0 / self.lin(t))
        }
    }

    pub fn integrate(&self, t_end: f64, samples: usize, cfg: &IntegratorConfig) -> Result<Trajectory, DynamicsError> {
        if self.lin(self.t0).signum() != self.lin(t_end).signum() || self.lin(t_end) == 0.0 {
            return Err(DynamicsError::Singular { t: -self.b0 / self.b1, what: "b0 + b1 t vanishes".into() });
        }
        let outputs: Vec<f64> =
            (1..=samples).map(|n| self.t0 + (t_end - self.t0) * n as f64 / samples as f64).collect();
        let s0 = State::new(self.t0, self.q0.to_vec(), self.v0.to_vec());
        let mut tr = integrate(&self.system, &[], &s0, t_end, cfg, &outputs)?;
        tr.accel = self.system.acceleration();
        Ok(tr)
    }

    /// Compare the conic reconstruction with a numeric trajectory of the same data.
    pub fn validate(&self, traj: &Trajectory) -> Result<OrbitCheck, DynamicsError> {
        let observed = polar_angle_unwrapped(&traj.states);
        let g = |th: f64| self.denom(th).powi(-2);
        let theta0 = observed[0];
        let (mut th_pred, mut g_acc) = (theta0, 0.0);
        let (mut max_r, mut max_r_obs, mut max_th, mut max_l3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut max_int: f64 = 0.0;
        let (mut g_obs, mut th_obs_prev) = (0.0, theta0);
        let f0 = if self.b1 != 0.0 { -self.k * self.k / (self.b1 * self.l3.powi(3) * self.lin(self.t0)) } else { 0.0 };
        for (s, &th_obs) in traj.states.iter().zip(&observed) {
            let target = self.theta_target(s.t);
            // Newton on G(θ) = target, G(θ) = ∫_{θ0}^{θ} g
            let mut th = th_pred;
            let mut gth = g_acc;
            for _ in 0..60 {
                let step = (gth - target) / g(th);
                if !step.is_finite() {
                    return Err(DynamicsError::Quadrature("orbit angle inversion diverged".into()));
                }
                let next = th - step;
                gth += quadrature(&g, th, next, QUAD_TOL)?;
                th = next;
                if step.abs() < 1e-14 * (1.0 + th.abs()) {
                    break;
                }
            }
            th_pred = th;
            g_acc = gth;
            let r = s.q[0].hypot(s.q[1]);
            max_r = max_r.max((self.radius(th, s.t) - r).abs() / r);
            max_r_obs = max_r_obs.max((self.radius(th_obs, s.t) - r).abs() / r);
            max_th = max_th.max((th - th_obs).abs());
            let l = s.q[0] * s.v[1] - s.q[1] * s.v[0];
            max_l3 = max_l3.max((l - self.l3).abs() / self.l3.abs());
            g_obs += quadrature(&g, th_obs_prev, th_obs, QUAD_TOL)?;
            th_obs_prev = th_obs;
            if self.b1 != 0.0 {
                let inv_r = -(self.b1 * self.l3 / self.k) * self.denom(th_obs) * (g_obs + f0);
                max_int = max_int.max((inv_r * r - 1.0).abs());
            }
        }
        Ok(OrbitCheck {
            max_rel_r_error: max_r,
            max_rel_r_error_observed_theta: max_r_obs,
            max_theta_error: max_th,
            max_rel_l3_error: max_l3,
            max_rel_integral_form_error: (self.b1 != 0.0).then_some(max_int),
            samples: traj.states.len(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarPoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
    /// Out-of-plane residue in the rotated frame.
    pub z: f64,
    pub z_dot: f64,
}

#[derive(Clone, Debug)]
pub struct PolarTrajectory {
    /// Maps original coordinates to the frame with L along +z.
    pub rotation: Rotation3<f64>,
    pub points: Vec<PolarPoint>,
}

impl PolarTrajectory {
    pub fn to_cartesian(&self) -> Vec<State> {
        let inv = self.rotation.inverse();
        self.points
            .iter()
            .map(|p| {
                let (s, c) = p.theta.sin_cos();
                let qr = Vector3::new(p.r * c, p.r * s, p.z);
                let vr = Vector3::new(p.r_dot * c - p.r * p.theta_dot * s, p.r_dot * s + p.r * p.theta_dot * c, p.z_dot);
                let (qo, vo) = (inv * qr, inv * vr);
                State::new(p.t, qo.iter().copied().collect(), vo.iter().copied().collect())
            })
            .collect()
    }
}

/// Rotate a 3d trajectory so its initial angular momentum points along +z and
/// express it in plane polar coordinates.
pub fn polar_reduction(traj: &Trajectory) -> Result<PolarTrajectory, DynamicsError> {
    if traj.dim != 3 || traj.states.is_empty() {
        return Err(DynamicsError::Precondition("polar reduction needs a 3d trajectory".into()));
    }
    let s0 = &traj.states[0];
    let (q0, v0) = (Vector3::from_column_slice(&s0.q), Vector3::from_column_slice(&s0.v));
    let l = q0.cross(&v0);
    if l.norm() < 1e-12 * (1.0 + q0.norm() * v0.norm()) {
        return Err(DynamicsError::Precondition("angular momentum vanishes".into()));
    }
    let z = Vector3::z();
    let rotation = Rotation3::rotation_between(&l, &z)
        .unwrap_or_else(|| Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::x()), std::f64::consts::PI));
    let mut points: Vec<PolarPoint> = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let qr = rotation * Vector3::from_column_slice(&s.q);
        let vr = rotation * Vector3::from_column_slice(&s.v);
        let r = qr.x.hypot(qr.y);
        let raw = qr.y.atan2(qr.x);
        let theta = match points.last() {
            None => raw,
            Some(p) => raw + std::f64::consts::TAU * ((p.theta - raw) / std::f64::consts::TAU).round(),
        };
        points.push(PolarPoint {
            t: s.t,
            r,
            theta,
            r_dot: (qr.x * vr.x + qr.y * vr.y) / r,
            theta_dot: (qr.x * vr.y - qr.y * vr.x) / (r * r),
            z: qr.z,
            z_dot: vr.z,
        });
    }
    Ok(PolarTrajectory { rotation, points })
}
