//! Integrals of V = −ω(t)/r^ν: angular momentum, the constant-ω table, J_ν,
//! the time-dependent Kepler integrals E₂, A_i, E₃.

use num_traits::Zero;

use super::{cyc, family, integral, qdotv, quadratic, r, r2, speed2, CatalogError, FirstIntegral, Kind, Relation};
use crate::conditions::{radius_pow, DynSystem};
use crate::symexpr::{is_identically_zero, q, rat, rat_int, rat_string, sym_t, v, Expr, Rat, Strategy};

/// Names accepted by [`constant_omega_integral`] with a representative ν.
pub const CONSTANT_OMEGA_NAMES: &[(&str, &str)] = &[
    ("H", "1"),
    ("B11", "-2"),
    ("B12", "-2"),
    ("B13", "-2"),
    ("B22", "-2"),
    ("B23", "-2"),
    ("B33", "-2"),
    ("I31+", "-2"),
    ("I32+", "-2"),
    ("I33+", "-2"),
    ("I31-", "-2"),
    ("I32-", "-2"),
    ("I33-", "-2"),
    ("I31c", "-2"),
    ("I32c", "-2"),
    ("I33c", "-2"),
    ("I31s", "-2"),
    ("I32s", "-2"),
    ("I33s", "-2"),
    ("R1", "1"),
    ("R2", "1"),
    ("R3", "1"),
    ("I1", "2"),
    ("I2", "2"),
];

fn lin_l(i: usize) -> Expr {
    let (a, b) = (cyc(i + 1), cyc(i + 2));
    q(a) * v(b) - q(b) * v(a)
}

/// L_i = q_{i+1} q̇_{i+2} − q_{i+2} q̇_{i+1}, conserved for every ω and ν.
pub fn angular_momentum(i: usize, nu: Rat, omega: Expr) -> Result<FirstIntegral, CatalogError> {
    if !(1..=3).contains(&i) {
        return Err(CatalogError::Unknown(format!("L{i}")));
    }
    let sys = DynSystem::kepler(nu.clone(), omega.clone())?;
    let fam = family("arbitrary", Some(nu), &[("omega", &omega)], sys);
    Ok(integral(format!("L{i}"), lin_l(i), &fam, Kind::Linear))
}

/// L_ij = q_i q̇_j − q_j q̇_i (indices 0-based in the returned matrix).
pub fn angular_momentum_tensor() -> Vec<Vec<Expr>> {
    (1..=3).map(|i| (1..=3).map(|j| q(i) * v(j) - q(j) * v(i)).collect()).collect()
}

fn energy(nu: &Rat, omega: &Expr) -> Expr {
    Expr::frac(1, 2) * speed2() - omega * radius_pow(3, -nu.clone())
}

fn incompatible(name: &str, nu: &Rat) -> CatalogError {
    CatalogError::Incompatible { name: name.into(), nu: rat_string(nu) }
}

fn index_of(name: &str, prefix: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let i: usize = rest.get(..1)?.parse().ok()?;
    (1..=3).contains(&i).then_some(i)
}

/// Integrals of the constant-ω systems: H, B_ij, I₃ₐ±, the real pair I₃ₐc/I₃ₐs,
/// R_i and I₁, I₂.
pub fn constant_omega_integral(name: &str, nu: &Rat, k: &Expr) -> Result<FirstIntegral, CatalogError> {
    let sys = DynSystem::kepler(nu.clone(), k.clone())?;
    let fam = family("constant", Some(nu.clone()), &[("k", k)], sys);
    let osc = *nu == rat_int(-2);
    let t = sym_t();
    if name == "H" {
        return Ok(integral("H", energy(nu, k), &fam, Kind::Quadratic));
    }
    if let Some(rest) = name.strip_prefix('B') {
        let ij: Vec<usize> = rest.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
        if ij.len() != 2 || rest.len() != 2 || !ij.iter().all(|i| (1..=3).contains(i)) {
            return Err(CatalogError::Unknown(name.into()));
        }
        if !osc {
            return Err(incompatible(name, nu));
        }
        let (i, j) = (ij[0], ij[1]);
        let e = v(i) * v(j) - Expr::int(2) * k * q(i) * q(j);
        return Ok(integral(name, e, &fam, Kind::Quadratic));
    }
    if let Some(a) = index_of(name, "I3") {
        let suffix = &name[3..];
        if !osc {
            return Err(incompatible(name, nu));
        }
        let kv = k.as_num().ok_or_else(|| CatalogError::Degenerate(format!("{name} needs a numeric k")))?;
        let expr = match suffix {
            "+" | "-" => {
                if *kv <= Rat::zero() {
                    return Err(CatalogError::Degenerate(format!("{name} needs k > 0")));
                }
                let s = Expr::num(kv * rat_int(2)).sqrt();
                let sg = if suffix == "+" { Expr::one() } else { Expr::int(-1) };
                (&sg * &s * &t).exp() * (v(a) - &sg * &s * q(a))
            }
            "c" | "s" => {
                if *kv >= Rat::zero() {
                    return Err(CatalogError::Degenerate(format!("{name} needs k < 0")));
                }
                let s = Expr::num(-kv * rat_int(2)).sqrt();
                let th = &s * &t;
                if suffix == "c" {
                    th.cos() * v(a) + &s * th.sin() * q(a)
                } else {
                    th.sin() * v(a) - &s * th.cos() * q(a)
                }
            }
            _ => return Err(CatalogError::Unknown(name.into())),
        };
        return Ok(integral(name, expr, &fam, Kind::Linear));
    }
    if let Some(i) = index_of(name, "R") {
        if name.len() != 2 {
            return Err(CatalogError::Unknown(name.into()));
        }
        if *nu != rat_int(1) {
            return Err(incompatible(name, nu));
        }
        let e = speed2() * q(i) - qdotv() * v(i) - k * q(i) / r();
        return Ok(integral(name, e, &fam, Kind::Quadratic));
    }
    if name == "I1" || name == "I2" {
        if *nu != rat_int(2) {
            return Err(incompatible(name, nu));
        }
        let h = energy(nu, k);
        let e = if name == "I1" {
            -(h * t.powi(2)) + &t * qdotv() - Expr::frac(1, 2) * r2()
        } else {
            -(h * &t) + Expr::frac(1, 2) * qdotv()
        };
        return Ok(integral(name, e, &fam, Kind::Quadratic));
    }
    Err(CatalogError::Unknown(name.into()))
}

fn nonzero(e: &Expr, what: &str) -> Result<(), CatalogError> {
    if e.is_zero() || is_identically_zero(e, Strategy::Auto)?.is_zero() {
        return Err(CatalogError::Degenerate(format!("{what} vanishes")));
    }
    Ok(())
}

/// J_ν, conserved under ω = k (b0 + b1 t + b2 t²)^((ν−2)/2).
pub fn j_nu(nu: &Rat, b0: &Expr, b1: &Expr, b2: &Expr, k: &Expr) -> Result<FirstIntegral, CatalogError> {
    if nu.is_zero() {
        return Err(incompatible("J", nu));
    }
    let p = quadratic(b0, b1, b2);
    nonzero(&p, "b0 + b1 t + b2 t^2")?;
    let e = nu - rat_int(2);
    let omega = if e.is_zero() { k.clone() } else { k * p.pow(e / rat_int(2)) };
    let sys = DynSystem::kepler(nu.clone(), omega.clone())?;
    let fam = family("power-of-quadratic", Some(nu.clone()), &[("b0", b0), ("b1", b1), ("b2", b2), ("k", k)], sys);
    let t = sym_t();
    let expr = &p * energy(nu, &omega) - Expr::frac(1, 2) * (b1 + Expr::int(2) * b2 * &t) * qdotv()
        + Expr::frac(1, 2) * b2 * r2();
    Ok(integral("J", expr, &fam, Kind::Quadratic))
}

/// Integrals of the Kepler problem with ω = c11/(b0 + b1 t).
#[derive(Clone, Debug)]
pub struct KeplerTimeDependent {
    pub e2: FirstIntegral,
    pub a: Vec<FirstIntegral>,
    pub l: Vec<FirstIntegral>,
    pub r_tilde: Vec<Expr>,
    pub c11: Expr,
}

impl KeplerTimeDependent {
    /// A·L = 0 and 2 E₂ L² + c11² = A².
    pub fn relations(&self) -> Vec<Relation> {
        let dot = crate::symexpr::sum((0..3).map(|i| &self.a[i].expr * &self.l[i].expr));
        let l2 = crate::symexpr::sum(self.l.iter().map(|x| x.expr.powi(2)));
        let a2 = crate::symexpr::sum(self.a.iter().map(|x| x.expr.powi(2)));
        vec![
            Relation::new("A.L = 0", vec![dot]),
            Relation::new("2 E2 L^2 + c11^2 = A^2", vec![Expr::int(2) * &self.e2.expr * l2 + self.c11.powi(2) - a2]),
        ]
    }
}

pub fn kepler_time_dependent(b0: &Expr, b1: &Expr, c11: &Expr) -> Result<KeplerTimeDependent, CatalogError> {
    nonzero(c11, "c11")?;
    let t = sym_t();
    let lin = b0 + b1 * &t;
    nonzero(&lin, "b0 + b1 t")?;
    let omega = c11 / &lin;
    let one = rat_int(1);
    let sys = DynSystem::kepler(one.clone(), omega)?;
    let fam = family("inverse-linear", Some(one), &[("b0", b0), ("b1", b1), ("c11", c11)], sys);
    let e2 = lin.powi(2) * (Expr::frac(1, 2) * speed2() - c11 / (r() * &lin)) - b1 * &lin * qdotv()
        + Expr::frac(1, 2) * b1.powi(2) * r2();
    let r_tilde: Vec<Expr> =
        (1..=3).map(|i| speed2() * q(i) - qdotv() * v(i) - c11 * q(i) / (r() * &lin)).collect();
    let a = (1..=3)
        .map(|i| {
            let e = &lin * &r_tilde[i - 1] + b1 * (q(cyc(i + 2)) * lin_l(i + 1) - q(cyc(i + 1)) * lin_l(i + 2));
            integral(format!("A{i}"), e, &fam, Kind::Quadratic)
        })
        .collect();
    let l = (1..=3).map(|i| integral(format!("L{i}"), lin_l(i), &fam, Kind::Linear)).collect();
    Ok(KeplerTimeDependent { e2: integral("E2", e2, &fam, Kind::Quadratic), a, l, r_tilde, c11: c11.clone() })
}

/// E₃, conserved under ω = k (b0 + b1 t + b2 t²)^(−1/2).
pub fn kepler_e3(b0: &Expr, b1: &Expr, b2: &Expr, k: &Expr) -> Result<FirstIntegral, CatalogError> {
    nonzero(k, "k")?;
    let p = quadratic(b0, b1, b2);
    nonzero(&p, "b0 + b1 t + b2 t^2")?;
    let omega = k * p.pow(rat(-1, 2));
    let one = rat_int(1);
    let sys = DynSystem::kepler(one.clone(), omega)?;
    let fam = family("inverse-sqrt-quadratic", Some(one), &[("b0", b0), ("b1", b1), ("b2", b2), ("k", k)], sys);
    let t = sym_t();
    let e = &p * (Expr::frac(1, 2) * speed2() - k / (r() * p.sqrt()))
        - Expr::frac(1, 2) * (b1 + Expr::int(2) * b2 * &t) * qdotv()
        + Expr::frac(1, 2) * b2 * r2();
    Ok(integral("E3", e, &fam, Kind::Quadratic))
}

/// Compact Kepler energy built from ω alone:
/// k²[(½|v|² − ω/r)/ω² − ½ (ω⁻²)' q·v + (ω⁻²)'' r²/4].
pub fn e_mu_compact(omega: &Expr, k: &Expr) -> Result<FirstIntegral, CatalogError> {
    nonzero(k, "k")?;
    let one = rat_int(1);
    let sys = DynSystem::kepler(one.clone(), omega.clone())?;
    let fam = family("compact", Some(one), &[("k", k)], sys);
    let w2 = omega.powi(-2);
    let e = k.powi(2)
        * (&w2 * (Expr::frac(1, 2) * speed2() - omega / r()) - Expr::frac(1, 2) * w2.diff("t") * qdotv()
            + Expr::frac(1, 4) * w2.diff_n("t", 2) * r2());
    Ok(integral("E", e, &fam, Kind::Quadratic))
}
