//! Quadratic integrals generated by point symmetries, three cases.

use serde::Serialize;

use super::{determining_residuals, ConditionError, ConditionResult, DeterminingReport, DynSystem, QFICandidate};
use crate::geometry::symmetrized_gradient;
use crate::symexpr::{sum, Expr, Rat, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NoetherCase {
    /// K_ab = (−ψt + c)δ_ab with K_a a homothetic vector.
    Homothetic,
    /// K_a = −M(t) S_,a with S_,ab = ψ δ_ab.
    GradientHomothetic,
    /// K_a = −M(t) V_,a with V_,ab = ψ δ_ab.
    PotentialHomothetic,
}

/// Free functions and constants of the three cases. Unused fields are ignored.
#[derive(Clone, Debug)]
pub struct NoetherData {
    pub psi: Rat,
    /// Potential V(q) with Q^a = V_,a.
    pub potential: Expr,
    /// Case 1: c in N = −ψt + c.
    pub c: Rat,
    /// Case 1: the homothetic vector K_a.
    pub ka: Vec<Expr>,
    /// N(t), M(t), C(t).
    pub n: Expr,
    pub m: Expr,
    pub cfun: Expr,
    /// Case 2: S(q).
    pub s: Expr,
    /// c1, c2 (case 1); d1, m, k (case 2); d2, k (case 3).
    pub c1: Rat,
    pub c2: Rat,
    pub d1: Rat,
    pub d2: Rat,
    pub mconst: Rat,
    pub k: Rat,
}

impl NoetherData {
    pub fn new(potential: Expr) -> Self {
        let z = Rat::from_integer(0.into());
        NoetherData {
            psi: z.clone(),
            potential,
            c: z.clone(),
            ka: Vec::new(),
            n: Expr::zero(),
            m: Expr::zero(),
            cfun: Expr::zero(),
            s: Expr::zero(),
            c1: z.clone(),
            c2: z.clone(),
            d1: z.clone(),
            d2: z.clone(),
            mconst: z.clone(),
            k: z,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NoetherReport {
    pub case: NoetherCase,
    pub conditions: Vec<ConditionResult>,
    pub passed: bool,
    #[serde(skip)]
    pub candidate: Option<QFICandidate>,
    pub residuals: Option<DeterminingReport>,
}

impl NoetherReport {
    pub fn first_failure(&self) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| !c.holds)
    }
}

fn num(r: &Rat) -> Expr {
    Expr::num(r.clone())
}

fn grad(e: &Expr, dim: usize) -> Vec<Expr> {
    (1..=dim).map(|i| e.diff(&format!("q{i}"))).collect()
}

fn hessian_minus(e: &Expr, psi: &Rat, dim: usize) -> Vec<Expr> {
    let g = grad(e, dim);
    let mut out = Vec::new();
    for a in 0..dim {
        for b in a..dim {
            let h = g[a].diff(&format!("q{}", b + 1));
            out.push(if a == b { h - num(psi) } else { h });
        }
    }
    out
}

fn dot(a: &[Expr], b: &[Expr]) -> Expr {
    sum(a.iter().zip(b).map(|(x, y)| x * y))
}

fn scalar_tensor(f: &Expr, dim: usize) -> Vec<Vec<Expr>> {
    (0..dim).map(|a| (0..dim).map(|b| if a == b { f.clone() } else { Expr::zero() }).collect()).collect()
}

/// Check the constraint list of the selected case and build its integral.
pub fn point_noether_case(
    case: NoetherCase,
    d: &NoetherData,
    sys: &DynSystem,
    strategy: Strategy,
) -> Result<NoetherReport, ConditionError> {
    let dim = sys.dim;
    let w = &sys.omega;
    let w_t = w.diff("t");
    let vgrad = grad(&d.potential, dim);
    let mut conds = Vec::new();
    let gradient: Vec<Expr> = (0..dim).map(|a| &sys.q[a] - &vgrad[a]).collect();
    conds.push(ConditionResult::check("gradient-potential", None, &gradient, strategy)?);

    let candidate = match case {
        NoetherCase::Homothetic => {
            if d.ka.len() != dim {
                return Err(ConditionError::Dimension(format!("homothetic vector has {} components", d.ka.len())));
            }
            let n = num(&d.c) - num(&d.psi) * crate::symexpr::sym_t();
            let g = symmetrized_gradient(&d.ka);
            let mut hv = Vec::new();
            for a in 0..dim {
                for b in a..dim {
                    hv.push(if a == b { &g[a][b] - num(&d.psi) } else { g[a][b].clone() });
                }
            }
            conds.push(ConditionResult::check("homothetic-vector", None, &hv, strategy)?);
            conds.push(ConditionResult::check(
                "omega-log-derivative",
                None,
                &[Expr::int(2) * &w_t * &n - num(&d.c1) * w],
                strategy,
            )?);
            conds.push(ConditionResult::check("scalar-time-derivative", None, &[d.m.diff("t") - num(&d.c2) * w], strategy)?);
            let pc = dot(&d.ka, &vgrad) + (Expr::int(2) * num(&d.psi) - num(&d.c1)) * &d.potential - num(&d.c2);
            conds.push(ConditionResult::check("potential-constraint", None, &[pc], strategy)?);
            QFICandidate {
                kab: scalar_tensor(&n, dim),
                ka: d.ka.clone(),
                k: Expr::int(2) * w * &n * &d.potential + &d.m,
            }
        }
        NoetherCase::GradientHomothetic => {
            conds.push(ConditionResult::check("hessian-homothety", None, &hessian_minus(&d.s, &d.psi, dim), strategy)?);
            conds.push(ConditionResult::check("n-derivative", None, &[d.n.diff("t") - num(&d.psi) * &d.m], strategy)?);
            conds.push(ConditionResult::check(
                "omega-log-derivative",
                None,
                &[Expr::int(2) * &w_t * &d.n - num(&d.d1) * w * &d.m],
                strategy,
            )?);
            conds.push(ConditionResult::check(
                "m-second-derivative",
                None,
                &[d.m.diff_n("t", 2) - num(&d.mconst) * w * &d.m],
                strategy,
            )?);
            conds.push(ConditionResult::check("c-derivative", None, &[d.cfun.diff("t") - num(&d.k) * w * &d.m], strategy)?);
            let sg = grad(&d.s, dim);
            let pc = dot(&sg, &vgrad)
                + (Expr::int(2) * num(&d.psi) + num(&d.d1)) * &d.potential
                + num(&d.mconst) * &d.s
                + num(&d.k);
            conds.push(ConditionResult::check("potential-constraint", None, &[pc], strategy)?);
            QFICandidate {
                kab: scalar_tensor(&d.n, dim),
                ka: sg.iter().map(|x| -(&d.m * x)).collect(),
                k: Expr::int(2) * w * &d.n * &d.potential + d.m.diff("t") * &d.s + &d.cfun,
            }
        }
        NoetherCase::PotentialHomothetic => {
            conds.push(ConditionResult::check(
                "potential-hessian",
                None,
                &hessian_minus(&d.potential, &d.psi, dim),
                strategy,
            )?);
            conds.push(ConditionResult::check("n-derivative", None, &[d.n.diff("t") - num(&d.psi) * &d.m], strategy)?);
            conds.push(ConditionResult::check(
                "omega-log-derivative",
                None,
                &[d.m.diff_n("t", 2) + Expr::int(2) * &w_t * &d.n - num(&d.d2) * w * &d.m],
                strategy,
            )?);
            conds.push(ConditionResult::check("c-derivative", None, &[d.cfun.diff("t") - num(&d.k) * w * &d.m], strategy)?);
            let pc = dot(&vgrad, &vgrad) + (Expr::int(2) * num(&d.psi) + num(&d.d2)) * &d.potential + num(&d.k);
            conds.push(ConditionResult::check("potential-constraint", None, &[pc], strategy)?);
            QFICandidate {
                kab: scalar_tensor(&d.n, dim),
                ka: vgrad.iter().map(|x| -(&d.m * x)).collect(),
                k: (Expr::int(2) * w * &d.n + d.m.diff("t")) * &d.potential + &d.cfun,
            }
        }
    };
    let passed = conds.iter().all(|c| c.holds);
    let (candidate, residuals) = if passed {
        let r = determining_residuals(&candidate, sys, strategy)?;
        (Some(candidate), Some(r))
    } else {
        (None, None)
    };
    Ok(NoetherReport { case, conditions: conds, passed, candidate, residuals })
}
