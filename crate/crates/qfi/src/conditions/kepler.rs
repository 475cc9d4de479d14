//! Reduction of the 20-parameter Killing-tensor ansatz for the generalized
//! Kepler potential V = −ω(t)/r^ν: which parameters survive and which ω admit
//! quadratic integrals.

use num_traits::{One, Zero};
use serde::Serialize;

use super::ConditionError;
use crate::symexpr::{is_identically_zero, rat_int, rat_string, sym_t, Expr, Rat, Strategy};

/// An admissible ω together with the ODE it must satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaFamily {
    pub name: String,
    #[serde(serialize_with = "as_text")]
    pub omega: Expr,
    /// The defining relation, as text.
    pub relation: String,
    /// The relation evaluated on the family; should vanish.
    #[serde(skip)]
    pub residual: Expr,
    pub satisfied: bool,
    /// Parameters of the Killing tensor left free in this branch.
    pub surviving: Vec<String>,
}

fn as_text<S: serde::Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct KeplerReductionReport {
    #[serde(serialize_with = "rat_text")]
    pub nu: Rat,
    pub branch: &'static str,
    /// Parameters forced to vanish, as indices into a1..a20.
    pub vanishing: Vec<usize>,
    /// Pairs forced equal.
    pub equal: Vec<(usize, usize)>,
    /// Parameters constrained to be at most linear in t.
    pub linear_in_t: Vec<usize>,
    pub families: Vec<OmegaFamily>,
}

fn rat_text<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_string(r))
}

fn p(name: &str) -> Expr {
    Expr::sym(name)
}

fn quadratic() -> Expr {
    let t = sym_t();
    p("b0") + p("b1") * &t + p("b2") * t.powi(2)
}

fn family(name: &str, omega: Expr, relation: &str, residual: Expr, surviving: &[&str]) -> Result<OmegaFamily, ConditionError> {
    let satisfied = is_identically_zero(&residual, Strategy::Auto)?.is_zero();
    Ok(OmegaFamily {
        name: name.into(),
        omega,
        relation: relation.into(),
        residual,
        satisfied,
        surviving: surviving.iter().map(|s| s.to_string()).collect(),
    })
}

/// ω = k (b0 + b1 t + b2 t²)^((ν−2)/2), with a3 the quadratic.
pub fn omega_nu(nu: &Rat) -> Expr {
    let e = nu - rat_int(2);
    if e.is_zero() {
        p("k")
    } else {
        p("k") * quadratic().pow(e / rat_int(2))
    }
}

/// ω = f''/(4f) − f'²/(8f²) − c0/(4f²) for an opaque f(t).
pub fn omega_from_quadratic_invariant(f: &Expr) -> Expr {
    let f1 = f.diff("t");
    let f2 = f1.diff("t");
    &f2 / (Expr::int(4) * f) - f1.powi(2) / (Expr::int(8) * f.powi(2)) - p("c0") / (Expr::int(4) * f.powi(2))
}

/// Classify the constraints and the admissible ω for exponent ν.
pub fn kepler_reduction(nu: &Rat) -> Result<KeplerReductionReport, ConditionError> {
    if nu.is_zero() {
        return Err(ConditionError::Precondition("ν must be nonzero".into()));
    }
    let one = Rat::one();
    let kepler = *nu == one;
    let oscillator = *nu == rat_int(-2);

    let mut vanishing = vec![16, 18];
    let mut equal = vec![(2, 12), (5, 8), (11, 15)];
    let mut linear_in_t = Vec::new();
    if kepler {
        linear_in_t.extend([2, 5, 11]);
    } else {
        vanishing.extend([2, 5, 8, 11, 12, 15]);
    }
    if !oscillator {
        vanishing.extend([17, 19, 20]);
        equal.extend([(3, 9), (3, 13)]);
    }
    vanishing.sort_unstable();
    equal.retain(|(a, b)| !(vanishing.contains(a) && vanishing.contains(b)));

    let t = sym_t();
    let w = Expr::func_of_t("w", None);
    let mut families = Vec::new();
    // a3 = 0 leaves ω free with only the angular-momentum products
    families.push(family("arbitrary", w.clone(), "a3 = 0", Expr::zero(), &["c1..c9"])?);

    let branch;
    if kepler {
        branch = "kepler";
        let lin = p("b0") + p("b1") * &t;
        let w2 = p("c11") / &lin;
        // a2 = b0 + b1 t keeps a2 ω constant and a3 = a2² keeps a3 ω² constant
        let r2 = (&lin * &w2 - p("c11")).diff("t") + (lin.powi(2) * w2.powi(2)).diff("t");
        families.push(family(
            "inverse-linear",
            w2,
            "a2 ω = c11, a3 ω² = c10, a2'' = 0, a3''' = 0",
            r2,
            &["a2", "a3", "a5", "a11", "c1..c9"],
        )?);
        let w3 = p("k") * quadratic().pow(Rat::new((-1).into(), 2.into()));
        let r3 = (quadratic() * w3.powi(2)).diff("t") + quadratic().diff_n("t", 3);
        families.push(family("inverse-sqrt-quadratic", w3, "a3 ω² = c10, a3''' = 0", r3, &["a3", "c1..c9"])?);
    } else if oscillator {
        branch = "oscillator";
        let f = Expr::func_of_t("f", None);
        let w3 = omega_from_quadratic_invariant(&f);
        let f1 = f.diff("t");
        let ode = f.diff_n("t", 3) - Expr::int(8) * &w3 * &f1 - Expr::int(4) * w3.diff("t") * &f;
        families.push(family(
            "quadratic-invariant",
            w3.clone(),
            "a3''' - 8 ω a3' - 4 ω' a3 = 0 with a3 = f",
            ode,
            &["a3", "a9", "a13", "a17", "a19", "a20"],
        )?);
        let first = &f * f.diff_n("t", 2) - Expr::frac(1, 2) * f1.powi(2) - Expr::int(4) * &w3 * f.powi(2) - p("c0");
        families.push(family(
            "quadratic-invariant-first-integral",
            w3,
            "a3 a3'' - a3'^2/2 - 4 ω a3² = c0",
            first,
            &["a3", "c0"],
        )?);
        let g = Expr::func_of_t("g", None);
        let wl = g.diff_n("t", 2) / (Expr::int(2) * &g);
        let r = g.diff_n("t", 2) - Expr::int(2) * &wl * &g;
        families.push(family("linear-invariant", wl, "σ4'' - 2 ω σ4 = 0 with σ4 = g", r, &["σ4", "τ4", "η4"])?);
    } else {
        branch = "general";
    }

    // a3 quadratic in t with (ν−2) ω a3' − 2 ω' a3 = 0 holds for every ν
    let wn = omega_nu(nu);
    let a3 = quadratic();
    let rn = Expr::num(nu - rat_int(2)) * &wn * a3.diff("t") - Expr::int(2) * wn.diff("t") * &a3 + a3.diff_n("t", 3);
    let name = if *nu == rat_int(2) { "constant" } else { "power-of-quadratic" };
    families.push(family(name, wn, "(ν-2) ω a3' - 2 ω' a3 = 0, a3''' = 0", rn, &["a3", "c1..c9"])?);

    Ok(KeplerReductionReport { nu: nu.clone(), branch, vanishing, equal, linear_in_t, families })
}
