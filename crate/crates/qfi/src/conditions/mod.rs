//! Determining equations for quadratic first integrals and the structured
//! condition lists of the point-Noether cases, the polynomial-in-time theorem
//! and the Kepler reduction.

mod kepler;
mod noether;
mod theorem;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{kt_residual, GeometryError};
use crate::symexpr::{
    is_identically_zero, parse, parse_rat, pow, q, sum, sym_t, v, Expr, Rat, Strategy, SymError, Verdict,
};

pub use kepler::{kepler_reduction, KeplerReductionReport, OmegaFamily};
pub use noether::{point_noether_case, NoetherCase, NoetherData};
pub use theorem::{
    ie_search, theorem1_check_ie, theorem1_check_in, IeSearchConfig, IeSearchReport, Theorem1Data, Theorem1Report,
};

#[derive(Debug, thiserror::Error)]
pub enum ConditionError {
    #[error("omega vanishes identically")]
    ZeroOmega,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("expression is not quadratic in the velocities: {0}")]
    NotQuadratic(String),
    #[error("unsupported system: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// q̈ = −ω(t) Q(q) + φ(t) q̇, or an explicitly given acceleration field.
#[derive(Clone, Debug)]
pub struct DynSystem {
    pub dim: usize,
    pub omega: Expr,
    pub q: Vec<Expr>,
    pub nu: Option<Rat>,
    pub phi: Option<Expr>,
    pub mu: Option<Rat>,
    explicit: Option<Vec<Expr>>,
}

/// (Σ q_i²)^(e/2)
pub fn radius_pow(dim: usize, e: Rat) -> Expr {
    let r2 = sum((1..=dim).map(|i| q(i).powi(2)));
    pow(r2, e / Rat::from_integer(2.into()))
}

impl DynSystem {
    pub fn new(dim: usize, omega: Expr, q: Vec<Expr>) -> Result<Self, ConditionError> {
        if !(1..=3).contains(&dim) {
            return Err(ConditionError::Dimension(format!("dimension {dim} outside 1..3")));
        }
        if q.len() != dim {
            return Err(ConditionError::Dimension(format!("{} force components for dimension {dim}", q.len())));
        }
        if omega.is_zero() || is_identically_zero(&omega, Strategy::Auto)?.is_zero() {
            return Err(ConditionError::ZeroOmega);
        }
        Ok(DynSystem { dim, omega, q, nu: None, phi: None, mu: None, explicit: None })
    }

    /// Generalized Kepler force Q = ν q / r^(ν+2) in `dim` dimensions.
    pub fn kepler_in(dim: usize, nu: Rat, omega: Expr) -> Result<Self, ConditionError> {
        if nu == Rat::from_integer(0.into()) {
            return Err(ConditionError::Precondition("nu must be nonzero".into()));
        }
        let f = radius_pow(dim, -(&nu + Rat::from_integer(2.into())));
        let qs = (1..=dim).map(|i| Expr::num(nu.clone()) * q(i) * &f).collect();
        let mut s = DynSystem::new(dim, omega, qs)?;
        s.nu = Some(nu);
        Ok(s)
    }

    pub fn kepler(nu: Rat, omega: Expr) -> Result<Self, ConditionError> {
        DynSystem::kepler_in(3, nu, omega)
    }

    /// One-dimensional ẍ = −ω(t) x^μ + φ(t) ẋ.
    pub fn nonlinear(mu: Rat, omega: Expr, phi: Expr) -> Result<Self, ConditionError> {
        let mut s = DynSystem::new(1, omega, vec![q(1).pow(mu.clone())])?;
        s.mu = Some(mu);
        s.phi = if phi.is_zero() { None } else { Some(phi) };
        Ok(s)
    }

    pub fn with_damping(mut self, phi: Expr) -> Self {
        self.phi = if phi.is_zero() { None } else { Some(phi) };
        self
    }

    /// A system given directly by its acceleration field (coupled auxiliary equations etc.).
    pub fn explicit(dim: usize, accel: Vec<Expr>) -> Result<Self, ConditionError> {
        if accel.len() != dim {
            return Err(ConditionError::Dimension(format!("{} acceleration components for dimension {dim}", accel.len())));
        }
        Ok(DynSystem {
            dim,
            omega: Expr::one(),
            q: vec![Expr::zero(); dim],
            nu: None,
            phi: None,
            mu: None,
            explicit: Some(accel),
        })
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    pub fn acceleration(&self) -> Vec<Expr> {
        if let Some(a) = &self.explicit {
            return a.clone();
        }
        (0..self.dim)
            .map(|i| {
                let f = -(&self.omega * &self.q[i]);
                match &self.phi {
                    Some(p) => f + p * v(i + 1),
                    None => f,
                }
            })
            .collect()
    }

    pub fn from_json(src: &str) -> Result<Self, ConditionError> {
        let spec: SystemSpec = serde_json::from_str(src).map_err(|e| ConditionError::Input(e.to_string()))?;
        spec.build()
    }
}

/// JSON form of a system.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default)]
    pub dim: Option<usize>,
    pub omega: String,
    #[serde(rename = "Q", default)]
    pub q: Option<Vec<String>>,
    #[serde(default)]
    pub nu: Option<String>,
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default)]
    pub mu: Option<String>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<DynSystem, ConditionError> {
        let omega = parse(&self.omega)?;
        let rat = |s: &str| parse_rat(s).ok_or_else(|| ConditionError::Input(format!("bad rational '{s}'")));
        let mut sys = match (&self.nu, &self.q, &self.mu) {
            (Some(nu), None, None) => DynSystem::kepler_in(self.dim.unwrap_or(3), rat(nu)?, omega)?,
            (None, Some(qs), None) => {
                let qs = qs.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>()?;
                DynSystem::new(self.dim.unwrap_or(qs.len()), omega, qs)?
            }
            (None, None, Some(mu)) => DynSystem::nonlinear(rat(mu)?, omega, Expr::zero())?,
            _ => return Err(ConditionError::Input("give exactly one of \"nu\", \"Q\" or \"mu\"".into())),
        };
        if let Some(p) = &self.phi {
            sys = sys.with_damping(parse(p)?);
        }
        Ok(sys)
    }
}

/// I = K_ab q̇^a q̇^b + K_a q̇^a + K.
#[derive(Clone, Debug, PartialEq)]
pub struct QFICandidate {
    pub kab: Vec<Vec<Expr>>,
    pub ka: Vec<Expr>,
    pub k: Expr,
}

impl QFICandidate {
    pub fn zero(dim: usize) -> Self {
        QFICandidate { kab: vec![vec![Expr::zero(); dim]; dim], ka: vec![Expr::zero(); dim], k: Expr::zero() }
    }

    pub fn dim(&self) -> usize {
        self.ka.len()
    }

    pub fn to_expr(&self) -> Expr {
        let d = self.dim();
        let mut terms = Vec::new();
        for a in 0..d {
            for b in 0..d {
                terms.push(&self.kab[a][b] * v(a + 1) * v(b + 1));
            }
            terms.push(&self.ka[a] * v(a + 1));
        }
        terms.push(self.k.clone());
        sum(terms)
    }

    /// Split a phase-space expression into its velocity coefficients.
    pub fn from_expr(e: &Expr, dim: usize) -> Result<Self, ConditionError> {
        let zero_v: Vec<(Expr, Expr)> = (1..=dim).map(|i| (v(i), Expr::zero())).collect();
        let vn = |i: usize| format!("v{}", i + 1);
        let mut c = QFICandidate::zero(dim);
        for a in 0..dim {
            let da = e.diff(&vn(a));
            c.ka[a] = da.subs_many(&zero_v);
            for b in 0..dim {
                c.kab[a][b] = (da.diff(&vn(b)) * Expr::frac(1, 2)).subs_many(&zero_v);
            }
        }
        c.k = e.subs_many(&zero_v);
        let beyond = |s: &String| (dim + 1..=3).any(|i| *s == format!("q{i}") || *s == format!("v{i}"));
        if e.symbols().iter().any(beyond) {
            return Err(ConditionError::Dimension(format!("coordinate beyond dimension {dim} in {e}")));
        }
        if !is_identically_zero(&(e - c.to_expr()), Strategy::Auto)?.is_zero() {
            return Err(ConditionError::NotQuadratic(e.to_string()));
        }
        Ok(c)
    }

    pub fn from_json(src: &str, dim: usize) -> Result<Self, ConditionError> {
        let spec: CandidateSpec = serde_json::from_str(src).map_err(|e| ConditionError::Input(e.to_string()))?;
        spec.build(dim)
    }
}

/// JSON form of a candidate: either the components or a single expression "I".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateSpec {
    #[serde(rename = "Kab", default)]
    pub kab: Option<Vec<Vec<String>>>,
    #[serde(rename = "Ka", default)]
    pub ka: Option<Vec<String>>,
    #[serde(rename = "K", default)]
    pub k: Option<String>,
    #[serde(rename = "I", default)]
    pub i: Option<String>,
}

impl CandidateSpec {
    pub fn build(&self, dim: usize) -> Result<QFICandidate, ConditionError> {
        if let Some(i) = &self.i {
            return QFICandidate::from_expr(&parse(i)?, dim);
        }
        let (Some(kab), Some(ka), Some(k)) = (&self.kab, &self.ka, &self.k) else {
            return Err(ConditionError::Input("candidate needs \"I\" or all of \"Kab\", \"Ka\", \"K\"".into()));
        };
        if kab.len() != dim || kab.iter().any(|r| r.len() != dim) || ka.len() != dim {
            return Err(ConditionError::Dimension(format!("candidate components do not match dimension {dim}")));
        }
        let kab: Vec<Vec<Expr>> =
            kab.iter().map(|r| r.iter().map(|s| parse(s)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
        for a in 0..dim {
            for b in 0..dim {
                if !is_identically_zero(&(&kab[a][b] - &kab[b][a]), Strategy::Auto)?.is_zero() {
                    return Err(ConditionError::Input("Kab must be symmetric".into()));
                }
            }
        }
        Ok(QFICandidate { kab, ka: ka.iter().map(|s| parse(s)).collect::<Result<_, _>>()?, k: parse(k)? })
    }
}

/// d/dt along the flow of the system.
pub fn time_derivative(e: &Expr, sys: &DynSystem) -> Expr {
    let acc = sys.acceleration();
    let mut terms = vec![e.diff("t")];
    for i in 0..sys.dim {
        terms.push(v(i + 1) * e.diff(&format!("q{}", i + 1)));
        terms.push(&acc[i] * e.diff(&format!("v{}", i + 1)));
    }
    sum(terms)
}

/// dI/dt of the candidate with the accelerations eliminated.
pub fn total_time_derivative(c: &QFICandidate, sys: &DynSystem) -> Result<Expr, ConditionError> {
    if c.dim() != sys.dim {
        return Err(ConditionError::Dimension(format!("candidate dimension {} vs system {}", c.dim(), sys.dim)));
    }
    Ok(time_derivative(&c.to_expr(), sys))
}

/// One condition with its zero-test outcome.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl ConditionResult {
    fn from_verdict(name: &str, index: Option<String>, v: Verdict) -> Self {
        match v {
            Verdict::Zero { .. } => ConditionResult { name: name.into(), index, holds: true, witness: None, value: None },
            Verdict::NonZero { witness, value, .. } => ConditionResult { name: name.into(), index, holds: false, witness, value },
        }
    }

    /// Test every component of a residual list for zero.
    pub(crate) fn check(name: &str, index: Option<String>, parts: &[Expr], strategy: Strategy) -> Result<Self, ConditionError> {
        for p in parts {
            let v = is_identically_zero(p, strategy)?;
            if !v.is_zero() {
                return Ok(ConditionResult::from_verdict(name, index, v));
            }
        }
        Ok(ConditionResult { name: name.into(), index, holds: true, witness: None, value: None })
    }

    pub fn label(&self) -> String {
        match &self.index {
            Some(i) => format!("{} [{}]", self.name, i),
            None => self.name.clone(),
        }
    }
}

/// One of the six determining-equation groups.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualGroup {
    pub name: &'static str,
    pub equation: &'static str,
    #[serde(skip)]
    pub components: Vec<(Vec<usize>, Expr)>,
    pub zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_component: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeterminingReport {
    pub groups: Vec<ResidualGroup>,
    pub all_zero: bool,
}

impl DeterminingReport {
    pub fn group(&self, name: &str) -> Option<&ResidualGroup> {
        self.groups.iter().find(|g| g.name == name)
    }
}

pub const GROUP_NAMES: [&str; 6] =
    ["killing-tensor", "tensor-vector", "vector-scalar", "scalar", "vector-integrability", "curl-integrability"];

/// The six determining residual groups of a candidate for q̈ = −ω Q.
pub fn determining_residuals(
    c: &QFICandidate,
    sys: &DynSystem,
    strategy: Strategy,
) -> Result<DeterminingReport, ConditionError> {
    if sys.phi.is_some() || sys.is_explicit() {
        return Err(ConditionError::Unsupported("determining equations assume q̈ = −ω(t)Q(q)".into()));
    }
    let d = sys.dim;
    if c.dim() != d {
        return Err(ConditionError::Dimension(format!("candidate dimension {} vs system {}", c.dim(), d)));
    }
    let qn = |i: usize| format!("q{}", i + 1);
    let w = &sys.omega;
    let w_t = w.diff("t");
    let half = Expr::frac(1, 2);
    // X_a = K_ab Q^b
    let x: Vec<Expr> = (0..d).map(|a| sum((0..d).map(|b| &c.kab[a][b] * &sys.q[b]))).collect();
    let kq = sum((0..d).map(|a| &c.ka[a] * &sys.q[a]));

    let g1: Vec<(Vec<usize>, Expr)> = kt_residual(&c.kab).into_iter().map(|((a, b, cc), e)| (vec![a, b, cc], e)).collect();
    let mut g2 = Vec::new();
    for a in 0..d {
        for b in a..d {
            let e = c.kab[a][b].diff("t") + (c.ka[a].diff(&qn(b)) + c.ka[b].diff(&qn(a))) * &half;
            g2.push((vec![a, b], e));
        }
    }
    let g3: Vec<_> = (0..d)
        .map(|a| (vec![a], Expr::int(-2) * w * &x[a] + c.ka[a].diff("t") + c.k.diff(&qn(a))))
        .collect();
    let g4 = vec![(vec![], c.k.diff("t") - w * &kq)];
    let g5: Vec<_> = (0..d)
        .map(|a| {
            let kt_q = sum((0..d).map(|b| c.kab[a][b].diff("t") * &sys.q[b]));
            let e = c.ka[a].diff_n("t", 2) + w * kq.diff(&qn(a)) - Expr::int(2) * &w_t * &x[a] - Expr::int(2) * w * kt_q;
            (vec![a], e)
        })
        .collect();
    let mut g6 = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let curl_k = (c.ka[a].diff(&qn(b)) - c.ka[b].diff(&qn(a))) * &half;
            let e = curl_k.diff("t") - w * (x[a].diff(&qn(b)) - x[b].diff(&qn(a)));
            g6.push((vec![a, b], e));
        }
    }
    let equations = [
        "K_(ab,c) = 0",
        "K_ab,t + K_(a,b) = 0",
        "-2 w K_ab Q^b + K_a,t + K_,a = 0",
        "K_,t - w K_a Q^a = 0",
        "K_a,tt + w (K_b Q^b)_,a - 2 w_t K_ab Q^b - 2 w K_ab,t Q^b = 0",
        "K_[a,b],t - 2 w (K_[a|c|Q^c)_,b] = 0",
    ];
    let mut groups = Vec::new();
    for (i, comps) in [g1, g2, g3, g4, g5, g6].into_iter().enumerate() {
        let mut zero = true;
        let mut failing_component = None;
        let mut witness = None;
        for (idx, e) in &comps {
            let v = is_identically_zero(e, strategy)?;
            if let Verdict::NonZero { witness: wt, .. } = v {
                zero = false;
                failing_component = Some(idx.clone());
                witness = wt;
                break;
            }
        }
        groups.push(ResidualGroup { name: GROUP_NAMES[i], equation: equations[i], components: comps, zero, failing_component, witness });
    }
    let all_zero = groups.iter().all(|g| g.zero);
    Ok(DeterminingReport { groups, all_zero })
}

/// Σ b_r t^r
pub fn omega_polynomial(b: &[Rat]) -> Expr {
    sum(b.iter().enumerate().map(|(r, br)| Expr::num(br.clone()) * sym_t().powi(r as i64)))
}
