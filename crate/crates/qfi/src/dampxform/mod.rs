//! Removing linear damping by a change of time variable, and the integrable
//! members of the 1d family ẍ = −ω(t) x^μ + φ(t) ẋ.
//!
//! Expressions "in s" use the symbol `s` for the new time and `xs` for dx/ds;
//! x itself is the coordinate `q1`.

mod lane_emden;

use num_traits::One;
use serde::Serialize;

use crate::catalog::{family, integral, CatalogError, FirstIntegral, Kind};
use crate::conditions::{ConditionError, DynSystem};
use crate::dynamics::{integrate, aux_nodes, quadrature, DynamicsError, IntegratorConfig, State};
use crate::symexpr::{
    evaluate, is_identically_zero, q, rat, rat_int, sym_t, v, Binding, Compiled, Expr, Rat, Strategy,
    SymError, Value, Verdict, FORMAL_ARG,
};

pub use lane_emden::{lane_emden, LaneEmden, LaneEmdenCase};

#[derive(Debug, thiserror::Error)]
pub enum DampError {
    #[error("mu = -1 is excluded")]
    MuMinusOne,
    #[error("c1, c2, c3 are all zero")]
    AllZero,
    #[error("auxiliary function violates {ode}")]
    AuxCondition { ode: String, verdict: Verdict },
    #[error("no closed-form inverse t(s) for this damping")]
    NoClosedForm,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub fn sym_s() -> Expr {
    Expr::sym("s")
}

/// dx/ds in s-space expressions.
pub fn sym_xs() -> Expr {
    Expr::sym("xs")
}

fn to_formal(e: &Expr) -> Expr {
    e.subs(&sym_t(), &Expr::sym(FORMAL_ARG))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DampingShape {
    None,
    Constant,
    InversePower,
    General,
}

/// s(t) = ∫ e^{∫φ dt} dt together with the maps between ω(t) and ω̄(s).
#[derive(Clone, Debug)]
pub struct Reparam {
    pub phi: Expr,
    /// Time at which ∫φ dt vanishes.
    pub t0: Rat,
    pub shape: DampingShape,
    /// e^{∫φ dt} = ds/dt.
    pub e_int: Expr,
    pub s: Expr,
    /// t as a function of the symbol `s`, when available.
    pub t_of_s: Option<Expr>,
}

fn exact_value(e: &Expr, t: &Rat) -> Option<Rat> {
    match evaluate(e, &Binding::new().set_exact("t", t.clone())).ok()? {
        Value::Exact(r) => Some(r),
        Value::Float(_) => None,
    }
}

/// Closed forms for φ = 0, φ = c and φ = −k/t, with ∫φ dt and s both zero at t0;
/// otherwise both are opaque quadrature nodes named `Phi` and `s`.
pub fn reparameterize(phi: &Expr, t0: &Rat) -> Result<Reparam, DampError> {
    let t = sym_t();
    let t0e = Expr::num(t0.clone());
    let plain = phi.func_names().is_empty() && phi.symbols().iter().all(|s| s == "t");
    let base = |shape, e_int, s, t_of_s| Reparam { phi: phi.clone(), t0: t0.clone(), shape, e_int, s, t_of_s };
    if phi.is_zero() {
        return Ok(base(DampingShape::None, Expr::one(), &t - &t0e, Some(sym_s() + &t0e)));
    }
    if let Some(c) = phi.as_num() {
        let ce = Expr::num(c.clone());
        let e_int = (&ce * (&t - &t0e)).exp();
        let s = (&e_int - Expr::one()) / &ce;
        let t_of_s = &t0e + (Expr::one() + &ce * sym_s()).ln() / &ce;
        return Ok(base(DampingShape::Constant, e_int, s, Some(t_of_s)));
    }
    if plain {
        let pt = phi * &t;
        let constant = is_identically_zero(&pt.diff("t"), Strategy::Exact).map(|v| v.is_zero()).unwrap_or(false);
        if constant {
            if let Some(mk) = exact_value(&pt, &rat_int(1)) {
                if *t0 <= rat_int(0) {
                    return Err(DampError::Precondition("phi = -k/t needs t0 > 0".into()));
                }
                let k = -mk;
                let e_int = (&t / &t0e).pow(-k.clone());
                let (s, t_of_s) = if k.is_one() {
                    (&t0e * (&t / &t0e).ln(), &t0e * (sym_s() / &t0e).exp())
                } else {
                    let one_k = Rat::one() - &k;
                    let ok = Expr::num(one_k.clone());
                    let s = t0e.pow(k.clone()) * (t.pow(one_k.clone()) - t0e.pow(one_k.clone())) / &ok;
                    let inv = (t0e.pow(one_k.clone()) + &ok * t0e.pow(-k.clone()) * sym_s()).pow(Rat::one() / one_k);
                    (s, inv)
                };
                return Ok(base(DampingShape::InversePower, e_int, s, Some(t_of_s)));
            }
        }
    }
    let phi_node = Expr::func("Phi", Expr::sym(FORMAL_ARG), Some(to_formal(phi)));
    let big_phi = Expr::func_of_t("Phi", Some(to_formal(phi)));
    let s = Expr::func_of_t("s", Some(phi_node.exp()));
    Ok(base(DampingShape::General, big_phi.exp(), s, None))
}

impl Reparam {
    /// φ = −k/t with e^{∫φ} = t^{−k} and s = M(t) = t^{1−k}/(1−k) (ln t for k = 1).
    pub fn power_law(k: &Rat) -> Reparam {
        let t = sym_t();
        let (s, t_of_s) = if k.is_one() {
            (t.ln(), sym_s().exp())
        } else {
            let one_k = Rat::one() - k;
            let ok = Expr::num(one_k.clone());
            (t.pow(one_k.clone()) / &ok, (&ok * sym_s()).pow(Rat::one() / one_k))
        };
        Reparam {
            phi: -(Expr::num(k.clone()) / &t),
            t0: rat_int(1),
            shape: DampingShape::InversePower,
            e_int: t.pow(-k.clone()),
            s,
            t_of_s: Some(t_of_s),
        }
    }

    pub fn dt_ds(&self) -> Expr {
        self.e_int.recip()
    }

    /// ω(t) = ω̄(s(t)) e^{2∫φ dt}.
    pub fn omega_from_bar(&self, omega_bar: &Expr) -> Expr {
        omega_bar.subs(&sym_s(), &self.s) * self.e_int.powi(2)
    }

    /// ω̄(s) = ω(t(s)) (dt/ds)².
    pub fn omega_bar_from(&self, omega: &Expr) -> Result<Expr, DampError> {
        let ts = self.t_of_s.as_ref().ok_or(DampError::NoClosedForm)?;
        Ok(omega.subs(&sym_t(), ts) / self.e_int.subs(&sym_t(), ts).powi(2))
    }

    /// Rewrite an expression in (s, x, dx/ds) in terms of (t, x, ẋ).
    pub fn to_time(&self, e: &Expr) -> Expr {
        e.subs_many(&[(sym_s(), self.s.clone()), (sym_xs(), v(1) * self.dt_ds())])
    }

    /// Check that ∫φ dt is finite on [t0, t1] by quadrature.
    pub fn check_interval(&self, t0: f64, t1: f64) -> Result<(), DampError> {
        let c = Compiled::new(&self.phi, &["t".to_string()])
            .map_err(|_| DampError::Precondition("phi must be a function of t only".into()))?;
        let v = quadrature(&|t| c.eval(&[t]), t0, t1, 1e-10)
            .map_err(|e| DampError::Precondition(format!("phi is not integrable on [{t0}, {t1}]: {e}")))?;
        if !v.is_finite() {
            return Err(DampError::Precondition(format!("phi is not integrable on [{t0}, {t1}]")));
        }
        Ok(())
    }
}

/// Parameters of the general family: K11 = c1 + c2 s + c3 s².
#[derive(Clone, Debug)]
pub struct NonlinFamily {
    pub mu: Rat,
    pub reparam: Reparam,
    pub c: [Expr; 3],
}

/// ω(t), ω̄(s) and the integral, with the integral's family carrying the damped system.
#[derive(Clone, Debug)]
pub struct NonlinQfi {
    pub omega: Expr,
    pub omega_bar: Expr,
    pub integral: FirstIntegral,
}

fn check_mu(mu: &Rat) -> Result<(), DampError> {
    if *mu == rat_int(-1) {
        Err(DampError::MuMinusOne)
    } else {
        Ok(())
    }
}

fn k11(c: &[Expr; 3]) -> Expr {
    &c[0] + &c[1] * sym_s() + &c[2] * sym_s().powi(2)
}

fn finish(
    name: &str,
    label: &str,
    mu: &Rat,
    reparam: &Reparam,
    omega_bar: Expr,
    i_s: &Expr,
    params: &[(&str, &Expr)],
) -> Result<NonlinQfi, DampError> {
    let omega = reparam.omega_from_bar(&omega_bar);
    let sys = DynSystem::nonlinear(mu.clone(), omega.clone(), reparam.phi.clone())?;
    let mut ps: Vec<(&str, &Expr)> = vec![("phi", &reparam.phi)];
    ps.extend_from_slice(params);
    let fam = family(label, None, &ps, sys);
    let integral = integral(name, reparam.to_time(i_s), &fam, Kind::Quadratic);
    Ok(NonlinQfi { omega, omega_bar, integral })
}

/// ω̄ = K11^{−(μ+3)/2} and I = K11 xs² − K11' x xs + 2/(μ+1) K11^{−(μ+1)/2} x^{μ+1} + c3 x².
pub fn nonlin_qfi_general(fam: &NonlinFamily) -> Result<NonlinQfi, DampError> {
    check_mu(&fam.mu)?;
    if fam.c.iter().all(|c| c.is_zero()) {
        return Err(DampError::AllZero);
    }
    let mu = &fam.mu;
    let k = k11(&fam.c);
    let x = q(1);
    let mu1 = mu + Rat::one();
    let omega_bar = k.pow(-(mu + rat_int(3)) / rat_int(2));
    let i_s = &k * sym_xs().powi(2) - k.diff("s") * &x * sym_xs()
        + Expr::num(rat_int(2) / &mu1) * k.pow(-&mu1 / rat_int(2)) * x.pow(mu1.clone())
        + &fam.c[2] * x.powi(2);
    let mu_e = Expr::num(mu.clone());
    finish(
        "I",
        "damped-power",
        mu,
        &fam.reparam,
        omega_bar,
        &i_s,
        &[("mu", &mu_e), ("c1", &fam.c[0]), ("c2", &fam.c[1]), ("c3", &fam.c[2])],
    )
}

fn require_zero(residual: &Expr, ode: &str) -> Result<(), DampError> {
    let verdict = is_identically_zero(residual, Strategy::Auto)?;
    if verdict.is_zero() {
        Ok(())
    } else {
        Err(DampError::AuxCondition { ode: ode.into(), verdict })
    }
}

/// μ = 0 with a supplied b1(s) and ω̄(s); the condition b1'' = 2ω̄'K11 + 3ω̄K11'
/// is verified first. ∫ b1 ω̄ ds is carried as the quadrature node `Nb`.
pub fn nonlin_qfi_mu0(
    reparam: &Reparam,
    c: &[Expr; 3],
    b1: &Expr,
    omega_bar: &Expr,
) -> Result<NonlinQfi, DampError> {
    let k = k11(c);
    let ode = "b1'' = 2 omega_bar' K11 + 3 omega_bar K11'";
    require_zero(
        &(b1.diff_n("s", 2) - Expr::int(2) * omega_bar.diff("s") * &k - Expr::int(3) * omega_bar * k.diff("s")),
        ode,
    )?;
    let x = q(1);
    let xs = sym_xs();
    let source = b1 * omega_bar;
    let tail = if is_identically_zero(&source, Strategy::Auto)?.is_zero() {
        None
    } else {
        // d/dt ∫ b1 ω̄ ds = (b1 ω̄)(s(t)) e^{∫φ}
        let rate = source.subs(&sym_s(), &reparam.s) * &reparam.e_int;
        Some(Expr::func_of_t("Nb", Some(to_formal(&rate))))
    };
    let i_s = &k * xs.powi(2) - k.diff("s") * &x * &xs + b1 * &xs + &c[2] * x.powi(2)
        + Expr::int(2) * omega_bar * &k * &x
        - b1.diff("s") * &x;
    let mut out = finish(
        "I",
        "damped-constant-force",
        &rat_int(0),
        reparam,
        omega_bar.clone(),
        &i_s,
        &[("c1", &c[0]), ("c2", &c[1]), ("c3", &c[2]), ("b1", b1)],
    )?;
    if let Some(node) = tail {
        out.integral.expr = &out.integral.expr + node;
    }
    Ok(out)
}

/// μ = 1: ω(t) = −ρ̈/ρ + φ ρ̇/ρ + ρ⁻⁴ e^{2∫φ} and x(t) = ρ(A sinθ + B cosθ),
/// θ̇ = ρ⁻² e^{∫φ}.
#[derive(Clone, Debug)]
pub struct Mu1Solution {
    pub rho: Expr,
    pub omega: Expr,
    pub theta: Expr,
    /// In the symbols `A` and `B`.
    pub solution: Expr,
    pub system: DynSystem,
}

pub fn nonlin_qfi_mu1(rho: &Expr, reparam: &Reparam) -> Result<Mu1Solution, DampError> {
    if rho.is_zero() {
        return Err(DampError::Precondition("rho must be nonzero".into()));
    }
    let phi = &reparam.phi;
    let omega =
        -(rho.diff_n("t", 2) / rho) + phi * rho.diff("t") / rho + rho.powi(-4) * reparam.e_int.powi(2);
    let theta = Expr::func_of_t("theta", Some(to_formal(&(rho.powi(-2) * &reparam.e_int))));
    let solution = rho * (Expr::sym("A") * theta.sin() + Expr::sym("B") * theta.cos());
    let system = DynSystem::nonlinear(rat_int(1), omega.clone(), phi.clone())?;
    Ok(Mu1Solution { rho: rho.clone(), omega, theta, solution, system })
}

impl Mu1Solution {
    /// ẍ + ωx − φẋ with the closed form substituted.
    pub fn residual(&self) -> Result<Verdict, DampError> {
        let x = &self.solution;
        let phi = self.system.phi.clone().unwrap_or_else(Expr::zero);
        let r = x.diff_n("t", 2) + &self.omega * x - phi * x.diff("t");
        Ok(is_identically_zero(&r, Strategy::Algebraic)?)
    }

    /// Integrate from (x0, v0) at t0 and return max |x_closed − x_numeric|, with
    /// θ and any damping nodes advanced as auxiliary state from zero.
    pub fn compare(&self, x0: f64, v0: f64, interval: (f64, f64), samples: usize, cfg: &IntegratorConfig) -> Result<f64, DampError> {
        let accel = self.system.acceleration();
        let aux = aux_nodes(&[&accel[0], &self.theta]);
        let (t0, t1) = interval;
        let outputs: Vec<f64> = (1..=samples).map(|n| t0 + (t1 - t0) * n as f64 / samples as f64).collect();
        let s0 = State::new(t0, vec![x0], vec![v0]).with_aux(vec![0.0; aux.len()]);
        let traj = integrate(&self.system, &aux, &s0, t1, cfg, &outputs)?;
        let slots = traj.slot_names();
        let compile = |e: &Expr| Compiled::new(e, &slots).map_err(DampError::from);
        let rho = compile(&self.rho)?;
        let rho_dot = compile(&self.rho.diff("t"))?;
        let theta_dot = compile(&self.theta.diff("t"))?;
        let theta = compile(&self.theta)?;
        let first = traj.states[0].slots();
        // x(t0) = ρ B, ẋ(t0) = ρ̇ B + ρ θ̇ A since θ(t0) = 0
        let b = x0 / rho.eval(&first);
        let a = (v0 - rho_dot.eval(&first) * b) / (rho.eval(&first) * theta_dot.eval(&first));
        let mut err: f64 = 0.0;
        for s in &traj.states {
            let x = s.slots();
            let th = theta.eval(&x);
            let closed = rho.eval(&x) * (a * th.sin() + b * th.cos());
            err = err.max((closed - s.q[0]).abs());
        }
        Ok(err)
    }
}

/// μ = 2 with a supplied K11(s); K11''' = 2(c4 + c5 s) K11^{−5/2} is verified first.
pub fn nonlin_qfi_mu2(reparam: &Reparam, k11: &Expr, c4: &Expr, c5: &Expr) -> Result<NonlinQfi, DampError> {
    let lin = c4 + c5 * sym_s();
    let ode = "K11''' = 2 (c4 + c5 s) K11^(-5/2)";
    require_zero(&(k11.diff_n("s", 3) - Expr::int(2) * &lin * k11.pow(rat(-5, 2))), ode)?;
    let x = q(1);
    let xs = sym_xs();
    let i_s = k11 * xs.powi(2) - k11.diff("s") * &x * &xs + &lin * &xs
        + Expr::frac(2, 3) * k11.pow(rat(-3, 2)) * x.powi(3)
        + Expr::frac(1, 2) * k11.diff_n("s", 2) * x.powi(2)
        - c5 * &x;
    finish(
        "I",
        "damped-quadratic-force",
        &rat_int(2),
        reparam,
        k11.pow(rat(-5, 2)),
        &i_s,
        &[("K11", k11), ("c4", c4), ("c5", c5)],
    )
}
