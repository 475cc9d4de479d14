//! Named first integrals of the generalized Kepler family, each tied to the
//! ω family under which it is conserved, and the identities relating them.

mod kepler;
mod manifest;
mod oscillator;

use serde::Serialize;

use crate::conditions::{time_derivative, ConditionError, DynSystem};
use crate::symexpr::{
    is_identically_zero, q, radius, rat_string, sum, sym_t, v, Expr, Rat, Strategy, SymError, Verdict,
};

pub use kepler::{
    angular_momentum, angular_momentum_tensor, e_mu_compact, j_nu, kepler_e3, kepler_time_dependent,
    constant_omega_integral, KeplerTimeDependent, CONSTANT_OMEGA_NAMES,
};
pub use manifest::{drift_manifest, perturb, DriftCase, Params};
pub use oscillator::{
    lewis_invariant, lewis_invariant_for, linear_pair, oscillator_lambda, oscillator_linear, oscillator_omega, oscillator_relations,
    OscillatorLinear, OscillatorSpec,
};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("integral {name} is not available for nu = {nu}")]
    Incompatible { name: String, nu: String },
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("unknown integral '{0}'")]
    Unknown(String),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Linear,
    Quadratic,
}

/// The ω family an integral belongs to, with its parameter bindings.
#[derive(Clone, Debug)]
pub struct Family {
    pub label: String,
    pub nu: Option<Rat>,
    pub params: Vec<(String, Expr)>,
    pub system: DynSystem,
}

#[derive(Clone, Debug)]
pub struct FirstIntegral {
    pub name: String,
    pub expr: Expr,
    pub family: Family,
    pub kind: Kind,
}

impl FirstIntegral {
    pub fn derivative(&self) -> Expr {
        time_derivative(&self.expr, &self.family.system)
    }

    pub fn conserved(&self, strategy: Strategy) -> Result<Verdict, CatalogError> {
        Ok(is_identically_zero(&self.derivative(), strategy)?)
    }

    pub fn omega(&self) -> &Expr {
        &self.family.system.omega
    }

    pub fn summary(&self) -> CatalogEntry {
        CatalogEntry {
            name: self.name.clone(),
            kind: self.kind,
            nu: self.family.nu.as_ref().map(rat_string),
            family: self.family.label.clone(),
            omega: self.family.system.omega.to_string(),
            params: self.family.params.iter().map(|(n, _)| n.clone()).collect(),
            expr: self.expr.to_string(),
        }
    }
}

/// One line of the JSON catalog listing.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub kind: Kind,
    pub nu: Option<String>,
    pub family: String,
    pub omega: String,
    pub params: Vec<String>,
    pub expr: String,
}

/// A phase-space identity among integrals: every residual must vanish.
#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub residuals: Vec<Expr>,
}

impl Relation {
    pub fn new(name: &str, residuals: Vec<Expr>) -> Self {
        Relation { name: name.into(), residuals }
    }

    pub fn check(&self, strategy: Strategy) -> Result<Verdict, CatalogError> {
        Ok(crate::symexpr::all_zero(&self.residuals, strategy)?)
    }
}

pub(crate) fn family(label: &str, nu: Option<Rat>, params: &[(&str, &Expr)], system: DynSystem) -> Family {
    Family {
        label: label.into(),
        nu,
        params: params.iter().map(|(n, e)| (n.to_string(), (*e).clone())).collect(),
        system,
    }
}

pub(crate) fn integral(name: impl Into<String>, expr: Expr, family: &Family, kind: Kind) -> FirstIntegral {
    FirstIntegral { name: name.into(), expr, family: family.clone(), kind }
}

pub(crate) fn speed2() -> Expr {
    sum((1..=3).map(|i| v(i).powi(2)))
}

pub(crate) fn qdotv() -> Expr {
    sum((1..=3).map(|i| q(i) * v(i)))
}

pub(crate) fn r2() -> Expr {
    sum((1..=3).map(|i| q(i).powi(2)))
}

pub(crate) fn r() -> Expr {
    radius(3)
}

/// Cyclic index in 1..=3.
pub(crate) fn cyc(i: usize) -> usize {
    (i - 1) % 3 + 1
}

pub(crate) fn quadratic(b0: &Expr, b1: &Expr, b2: &Expr) -> Expr {
    let t = sym_t();
    b0 + b1 * &t + b2 * t.powi(2)
}

/// Every catalog integral built with symbolic parameters, for listings.
pub fn catalog_listing() -> Result<Vec<CatalogEntry>, CatalogError> {
    let s = Expr::sym;
    let mut out = Vec::new();
    let arbitrary = Expr::func_of_t("w", None);
    for i in 1..=3 {
        out.push(angular_momentum(i, Rat::from_integer(1.into()), arbitrary.clone())?.summary());
    }
    for (name, nu) in CONSTANT_OMEGA_NAMES {
        let nu = crate::symexpr::parse_rat(nu).expect("catalog nu");
        let k = if name.starts_with("I3") && name.ends_with(['c', 's']) {
            Expr::int(-1)
        } else if name.starts_with("I3") {
            Expr::int(1)
        } else {
            s("k")
        };
        out.push(constant_omega_integral(name, &nu, &k)?.summary());
    }
    out.push(j_nu(&Rat::from_integer(3.into()), &s("b0"), &s("b1"), &s("b2"), &s("k"))?.summary());
    let td = kepler_time_dependent(&s("b0"), &s("b1"), &s("c11"))?;
    out.push(td.e2.summary());
    out.extend(td.a.iter().map(|a| a.summary()));
    out.push(kepler_e3(&s("b0"), &s("b1"), &s("b2"), &s("k"))?.summary());
    let f = Expr::func_of_t("f", None);
    let spec = OscillatorSpec::F { f: f.clone(), c0: s("c0") };
    for row in oscillator_lambda(&spec)? {
        out.extend(row.into_iter().map(|x| x.summary()));
    }
    if let OscillatorLinear::Pair { i41, i42, .. } = oscillator_linear(&spec)? {
        out.extend(i41.iter().chain(&i42).map(|x| x.summary()));
    }
    if let OscillatorLinear::Single(i4) = oscillator_linear(&OscillatorSpec::G { g: Expr::func_of_t("g", None) })? {
        out.extend(i4.iter().map(|x| x.summary()));
    }
    out.push(lewis_invariant(&Expr::func_of_t("psi", None), &s("c0"))?.summary());
    // the off-diagonal duplicates of symmetric tensors are dropped
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|e| seen.insert(e.name.clone()));
    Ok(out)
}

/// Numerical rank of the (q, v) gradients of `exprs` at random points.
///
/// Opaque functions and leftover symbols are drawn at random as well.
pub fn gradient_rank(exprs: &[Expr], dim: usize, points: usize, seed: u64) -> Result<usize, CatalogError> {
    use rand::{Rng, SeedableRng};
    let mut vars: Vec<String> = Vec::new();
    for i in 1..=dim {
        vars.push(format!("q{i}"));
    }
    for i in 1..=dim {
        vars.push(format!("v{i}"));
    }
    let grads: Vec<Vec<Expr>> = exprs.iter().map(|e| vars.iter().map(|x| e.diff(x)).collect()).collect();
    let mut names = std::collections::BTreeSet::new();
    for g in grads.iter().flatten() {
        names.extend(g.symbols());
        names.extend(g.func_names());
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..points {
        let mut b = crate::symexpr::Binding::new();
        for n in &names {
            let mut x: f64 = rng.gen_range(0.5..1.5);
            if crate::symexpr::is_coordinate_name(n) && rng.gen_bool(0.5) {
                x = -x;
            }
            b.insert(n, x);
            b.insert_func(n, x);
        }
        let rows = grads
            .iter()
            .map(|row| row.iter().map(|g| crate::symexpr::eval_f64(g, &b)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        best = best.max(crate::linalg::float_rank(&rows, 1e-9));
    }
    Ok(best)
}
