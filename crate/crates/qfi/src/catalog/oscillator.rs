//! The ν = −2 oscillator with time-dependent frequency: Λ_ij, the linear
//! integrals I_4i, I41_i, I42_i and the Lewis invariant.

use num_traits::Zero;

use super::{family, integral, CatalogError, FirstIntegral, Kind, Relation};
use crate::conditions::DynSystem;
use crate::symexpr::{is_identically_zero, q, rat_int, v, Expr, Strategy};

/// Parameterizations of the oscillator frequency.
#[derive(Clone, Debug)]
pub enum OscillatorSpec {
    /// ω = f''/(4f) − f'²/(8f²) − c0/(4f²).
    F { f: Expr, c0: Expr },
    /// Same frequency with the Killing-tensor coefficient a3 named directly.
    A3 { a3: Expr, c0: Expr },
    /// f = ρ²: ω = ρ''/(2ρ) − c0/(4ρ⁴).
    Rho { rho: Expr, c0: Expr },
    /// ω = g''/(2g).
    G { g: Expr },
}

impl OscillatorSpec {
    pub(crate) fn c0(&self) -> Option<&Expr> {
        match self {
            OscillatorSpec::F { c0, .. } | OscillatorSpec::A3 { c0, .. } | OscillatorSpec::Rho { c0, .. } => Some(c0),
            OscillatorSpec::G { .. } => None,
        }
    }

    /// h with h² = f, used by the linear integrals.
    pub(crate) fn amplitude(&self) -> Option<Expr> {
        match self {
            OscillatorSpec::F { f, .. } => Some(f.sqrt()),
            OscillatorSpec::A3 { a3, .. } => Some(a3.sqrt()),
            OscillatorSpec::Rho { rho, .. } => Some(rho.clone()),
            OscillatorSpec::G { .. } => None,
        }
    }

    pub(crate) fn amplitude_sq(&self) -> Option<Expr> {
        match self {
            OscillatorSpec::F { f, .. } => Some(f.clone()),
            OscillatorSpec::A3 { a3, .. } => Some(a3.clone()),
            OscillatorSpec::Rho { rho, .. } => Some(rho.powi(2)),
            OscillatorSpec::G { .. } => None,
        }
    }

    /// θ(t) as an opaque function with θ' = (c0/2)^(1/2)/f.
    pub fn theta(&self) -> Option<Expr> {
        let s = (self.c0()? * Expr::frac(1, 2)).sqrt();
        Some(Expr::func_of_t("theta", Some(s / self.amplitude_sq()?)))
    }
}

fn nonzero(e: &Expr, what: &str) -> Result<(), CatalogError> {
    if e.is_zero() || is_identically_zero(e, Strategy::Auto)?.is_zero() {
        return Err(CatalogError::Degenerate(format!("{what} vanishes")));
    }
    Ok(())
}

fn omega_from_a3(a3: &Expr, c0: &Expr) -> Expr {
    let d1 = a3.diff("t");
    let d2 = d1.diff("t");
    &d2 / (Expr::int(4) * a3) - d1.powi(2) / (Expr::int(8) * a3.powi(2)) - c0 / (Expr::int(4) * a3.powi(2))
}

pub fn oscillator_omega(spec: &OscillatorSpec) -> Expr {
    match spec {
        OscillatorSpec::F { f, c0 } => omega_from_a3(f, c0),
        OscillatorSpec::A3 { a3, c0 } => omega_from_a3(a3, c0),
        OscillatorSpec::Rho { rho, c0 } => {
            rho.diff_n("t", 2) / (Expr::int(2) * rho) - c0 / (Expr::int(4) * rho.powi(4))
        }
        OscillatorSpec::G { g } => g.diff_n("t", 2) / (Expr::int(2) * g),
    }
}

fn system(spec: &OscillatorSpec) -> Result<DynSystem, CatalogError> {
    Ok(DynSystem::kepler(rat_int(-2), oscillator_omega(spec))?)
}

/// Λ_ij = a3(q̇_i q̇_j − 2ω q_i q_j) − a3' q_(i q̇_j) + a3''/2 q_i q_j.
pub(crate) fn lambda_expr(a3: &Expr, omega: &Expr, i: usize, j: usize) -> Expr {
    let d1 = a3.diff("t");
    let d2 = d1.diff("t");
    a3 * (v(i) * v(j) - Expr::int(2) * omega * q(i) * q(j)) - Expr::frac(1, 2) * d1 * (q(i) * v(j) + q(j) * v(i))
        + Expr::frac(1, 2) * d2 * q(i) * q(j)
}

/// The symmetric tensor Λ (3×3). For `Rho` the coefficient is a3 = −ρ².
pub fn oscillator_lambda(spec: &OscillatorSpec) -> Result<Vec<Vec<FirstIntegral>>, CatalogError> {
    let (a3, c0) = match spec {
        OscillatorSpec::F { f, c0 } => (f.clone(), c0),
        OscillatorSpec::A3 { a3, c0 } => (a3.clone(), c0),
        OscillatorSpec::Rho { rho, c0 } => (-rho.powi(2), c0),
        OscillatorSpec::G { .. } => return Err(CatalogError::Degenerate("the g family has no tensor invariant".into())),
    };
    nonzero(&a3, "a3")?;
    let omega = oscillator_omega(spec);
    let fam = family("quadratic-invariant", Some(rat_int(-2)), &[("a3", &a3), ("c0", c0)], system(spec)?);
    Ok((1..=3)
        .map(|i| {
            (1..=3)
                .map(|j| {
                    let (a, b) = (i.min(j), i.max(j));
                    integral(format!("Lambda{a}{b}"), lambda_expr(&a3, &omega, a, b), &fam, Kind::Quadratic)
                })
                .collect()
        })
        .collect())
}

#[derive(Clone, Debug)]
pub enum OscillatorLinear {
    /// I_4i = g q̇_i − g' q_i.
    Single(Vec<FirstIntegral>),
    Pair { i41: Vec<FirstIntegral>, i42: Vec<FirstIntegral>, theta: Expr },
}

/// I41_i and I42_i for amplitude h (h² = f) and angle θ.
pub fn linear_pair(h: &Expr, c0: &Expr, theta: &Expr) -> (Vec<Expr>, Vec<Expr>) {
    let s = (c0 * Expr::frac(1, 2)).sqrt();
    let hd = h.diff("t");
    let (sn, cs) = (theta.sin(), theta.cos());
    let mut i41 = Vec::new();
    let mut i42 = Vec::new();
    for i in 1..=3 {
        let a = &s * q(i) / h;
        let b = h * v(i) - &hd * q(i);
        i41.push(&a * &sn + &b * &cs);
        i42.push(-(&a * &cs) + &b * &sn);
    }
    (i41, i42)
}

fn check_c0(c0: &Expr) -> Result<(), CatalogError> {
    if let Some(c) = c0.as_num() {
        if *c <= num_rational::BigRational::zero() {
            return Err(CatalogError::Degenerate("c0 must be positive for a real angle".into()));
        }
    }
    Ok(())
}

pub fn oscillator_linear(spec: &OscillatorSpec) -> Result<OscillatorLinear, CatalogError> {
    if let OscillatorSpec::G { g } = spec {
        nonzero(g, "g")?;
        let fam = family("linear-invariant", Some(rat_int(-2)), &[("g", g)], system(spec)?);
        let gd = g.diff("t");
        let out = (1..=3).map(|i| integral(format!("I4_{i}"), g * v(i) - &gd * q(i), &fam, Kind::Linear)).collect();
        return Ok(OscillatorLinear::Single(out));
    }
    let c0 = spec.c0().expect("c0 family");
    check_c0(c0)?;
    let f = spec.amplitude_sq().expect("amplitude");
    nonzero(&f, "f")?;
    let h = spec.amplitude().expect("amplitude");
    let theta = spec.theta().expect("theta");
    let fam = family("quadratic-invariant", Some(rat_int(-2)), &[("f", &f), ("c0", c0)], system(spec)?);
    let (a, b) = linear_pair(&h, c0, &theta);
    let wrap = |v: Vec<Expr>, tag: &str| {
        v.into_iter()
            .enumerate()
            .map(|(i, e)| integral(format!("{tag}_{}", i + 1), e, &fam, Kind::Linear))
            .collect::<Vec<_>>()
    };
    Ok(OscillatorLinear::Pair { i41: wrap(a, "I41"), i42: wrap(b, "I42"), theta })
}

/// Phase-space identities among Λ, I41, I42 and L_ij with θ a free symbol.
pub fn oscillator_relations(spec: &OscillatorSpec) -> Result<Vec<Relation>, CatalogError> {
    let c0 = spec.c0().ok_or_else(|| CatalogError::Degenerate("the g family has no paired integrals".into()))?;
    let f = spec.amplitude_sq().expect("amplitude");
    let h = spec.amplitude().expect("amplitude");
    let theta = Expr::sym("theta");
    let (i41, i42) = linear_pair(&h, c0, &theta);
    let omega = oscillator_omega(spec);
    let s = (c0 * Expr::frac(1, 2)).sqrt();
    let lt = super::angular_momentum_tensor();
    let mut prod = Vec::new();
    let mut wedge = Vec::new();
    for i in 1..=3 {
        for j in i..=3 {
            prod.push(lambda_expr(&f, &omega, i, j) - (&i41[i - 1] * &i41[j - 1] + &i42[i - 1] * &i42[j - 1]));
            if j > i {
                let w = &i41[i - 1] * &i42[j - 1] - &i41[j - 1] * &i42[i - 1];
                wedge.push(&lt[i - 1][j - 1] - w / &s);
            }
        }
    }
    let dtheta = (0..3).map(|i| i42[i].diff("theta") - &i41[i]).collect();
    Ok(vec![
        Relation::new("Lambda_ij = I41_i I41_j + I42_i I42_j", prod),
        Relation::new("L_ij = (2/c0)^(1/2) (I41_i I42_j - I41_j I42_i)", wedge),
        Relation::new("dI42_i/dtheta = I41_i", dtheta),
    ])
}

fn lewis_expr(x: &Expr, xd: &Expr, rho: &Expr, rhod: &Expr, c0: &Expr) -> Expr {
    Expr::frac(1, 2) * (x * rhod - rho * xd).powi(2) + c0 * Expr::frac(1, 4) * (x / rho).powi(2)
}

/// Lewis invariant of ẍ = −ψ²x coupled to ρ'' = −ψ²ρ + c0/(2ρ³), with (x, ρ) = (q1, q2).
pub fn lewis_invariant(psi: &Expr, c0: &Expr) -> Result<FirstIntegral, CatalogError> {
    nonzero(psi, "psi")?;
    let p2 = psi.powi(2);
    let accel = vec![-(&p2 * q(1)), -(&p2 * q(2)) + c0 / (Expr::int(2) * q(2).powi(3))];
    let sys = DynSystem::explicit(2, accel)?;
    let fam = family("coupled-amplitude", None, &[("psi", psi), ("c0", c0)], sys);
    Ok(integral("Lewis", lewis_expr(&q(1), &v(1), &q(2), &v(2), c0), &fam, Kind::Quadratic))
}

/// Lewis invariant for a prescribed amplitude ρ(t); the frequency is ψ² = c0/(2ρ⁴) − ρ''/ρ.
pub fn lewis_invariant_for(rho: &Expr, c0: &Expr) -> Result<FirstIntegral, CatalogError> {
    nonzero(rho, "rho")?;
    let spec = OscillatorSpec::Rho { rho: rho.clone(), c0: c0.clone() };
    let sys = DynSystem::kepler_in(1, rat_int(-2), oscillator_omega(&spec))?;
    let fam = family("prescribed-amplitude", Some(rat_int(-2)), &[("rho", rho), ("c0", c0)], sys);
    let e = lewis_expr(&q(1), &v(1), rho, &rho.diff("t"), c0);
    Ok(integral("Lewis", e, &fam, Kind::Quadratic))
}
