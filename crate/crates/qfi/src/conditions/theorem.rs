//! Integrals of systems whose ω is a polynomial in t: the polynomial family
//! I_n and the exponential integral I_e, plus a bounded search for nontrivial
//! instances of the latter.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{
    determining_residuals, omega_polynomial, total_time_derivative, ConditionError, ConditionResult, DeterminingReport,
    DynSystem, QFICandidate,
};
use crate::geometry::{kt_residual, symmetrized_gradient};
use crate::symexpr::{is_identically_zero, rat_int, sum, sym_t, Expr, Rat, Strategy};

/// Data of the polynomial integral I_n. C_(k) for k ≥ 1 are derived as −L_(k−1)(a;b).
#[derive(Clone, Debug)]
pub struct Theorem1Data {
    pub n: usize,
    pub ell: usize,
    /// b_0 … b_ℓ
    pub b: Vec<Rat>,
    pub c0: Vec<Vec<Expr>>,
    /// L_(0) … L_(n)
    pub l: Vec<Vec<Expr>>,
    pub s: Rat,
    pub g: Expr,
}

impl Theorem1Data {
    pub fn dim(&self) -> usize {
        self.c0.len()
    }

    /// b_j, zero outside 0..=ℓ.
    fn bj(&self, j: i64) -> Rat {
        if j < 0 || j as usize > self.ell {
            Rat::zero()
        } else {
            self.b.get(j as usize).cloned().unwrap_or_else(Rat::zero)
        }
    }

    /// C_(k), zero outside 0..=n.
    pub fn c(&self, k: i64) -> Vec<Vec<Expr>> {
        let d = self.dim();
        if k < 0 || k as usize > self.n {
            return vec![vec![Expr::zero(); d]; d];
        }
        if k == 0 {
            return self.c0.clone();
        }
        symmetrized_gradient(&self.l[k as usize - 1])
            .into_iter()
            .map(|row| row.into_iter().map(|e| -e).collect())
            .collect()
    }

    /// L_(k), zero outside 0..=n.
    pub fn lk(&self, k: i64) -> Vec<Expr> {
        if k < 0 || k as usize > self.n {
            vec![Expr::zero(); self.dim()]
        } else {
            self.l[k as usize].clone()
        }
    }

    /// Zero-pad to n + 1: C_(n+1) = −L_(n)(a;b) vanishes because L_(n) is a KV,
    /// and s = L_(n+1)·Q becomes 0.
    pub fn padded(&self) -> Theorem1Data {
        let mut d = self.clone();
        d.n += 1;
        d.s = Rat::zero();
        d.l.push(vec![Expr::zero(); self.dim()]);
        d
    }

    /// The integral I_n for the force field `q`.
    pub fn integral(&self, q: &[Expr]) -> QFICandidate {
        Ctx { d: self, q }.integral()
    }
}

struct Ctx<'a> {
    d: &'a Theorem1Data,
    q: &'a [Expr],
}

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.d.dim()
    }

    fn cq(&self, k: i64) -> Vec<Expr> {
        let c = self.d.c(k);
        (0..self.dim()).map(|a| sum((0..self.dim()).map(|b| &c[a][b] * &self.q[b]))).collect()
    }

    fn lq(&self, k: i64) -> Expr {
        let l = self.d.lk(k);
        sum((0..self.dim()).map(|a| &l[a] * &self.q[a]))
    }

    fn grad_lq(&self, k: i64) -> Vec<Expr> {
        let f = self.lq(k);
        (1..=self.dim()).map(|i| f.diff(&format!("q{i}"))).collect()
    }

    /// L_(k)(a;b) Q^b
    fn sym_grad_q(&self, k: i64) -> Vec<Expr> {
        let g = symmetrized_gradient(&self.d.lk(k));
        (0..self.dim()).map(|a| sum((0..self.dim()).map(|b| &g[a][b] * &self.q[b]))).collect()
    }

    fn integral(&self) -> QFICandidate {
        let mut c = integral_without_potential(self.d);
        let t = sym_t();
        let mut terms = vec![c.k.clone()];
        for k in 0..=self.d.n {
            let lq = self.lq(k as i64);
            for r in 0..=self.d.ell {
                let p = (k + r + 1) as i64;
                terms.push(Expr::num(self.d.bj(r as i64) / rat_int(p)) * t.powi(p) * &lq);
            }
        }
        c.k = sum(terms);
        c
    }
}

fn integral_without_potential(d: &Theorem1Data) -> QFICandidate {
    let dim = d.dim();
    let t = sym_t();
    let mut kab = d.c0.clone();
    for k in 1..=d.n {
        let ck = d.c(k as i64);
        let w = t.powi(k as i64) * Expr::frac(1, k as i64);
        for a in 0..dim {
            for b in 0..dim {
                kab[a][b] = &kab[a][b] + &w * &ck[a][b];
            }
        }
    }
    let ka = (0..dim).map(|a| sum((0..=d.n).map(|k| t.powi(k as i64) * &d.l[k][a]))).collect();
    QFICandidate { kab, ka, k: d.g.clone() }
}

fn lin(terms: Vec<(Rat, Vec<Expr>)>, dim: usize) -> Vec<Expr> {
    (0..dim)
        .map(|a| sum(terms.iter().filter(|(c, _)| !c.is_zero()).map(|(c, v)| Expr::num(c.clone()) * &v[a])))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub conditions: Vec<ConditionResult>,
    pub passed: bool,
    #[serde(skip)]
    pub candidate: Option<QFICandidate>,
    pub conserved: Option<bool>,
    pub residuals: Option<DeterminingReport>,
}

impl Theorem1Report {
    pub fn first_failure(&self) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| !c.holds)
    }
}

fn check_omega(sys: &DynSystem, b: &[Rat], strategy: Strategy) -> Result<(), ConditionError> {
    let diff = &sys.omega - omega_polynomial(b);
    if !is_identically_zero(&diff, strategy)?.is_zero() {
        return Err(ConditionError::Precondition("omega is not the polynomial Σ b_r t^r".into()));
    }
    Ok(())
}

fn kt_parts(k: &[Vec<Expr>]) -> Vec<Expr> {
    kt_residual(k).into_iter().map(|(_, e)| e).collect()
}

/// Conditions of the first-order case written out for small ℓ.
fn first_order_conditions(x: &Ctx, strategy: Strategy, out: &mut Vec<ConditionResult>) -> Result<(), ConditionError> {
    let d = x.d;
    let dim = x.dim();
    let ell = d.ell as i64;
    let sq = x.sym_grad_q(0);
    let cq = x.cq(0);
    let lq0 = x.grad_lq(0);
    out.push(ConditionResult::check("L1·Q = s", None, &[x.lq(1) - Expr::num(d.s.clone())], strategy)?);
    let name = format!("(L0·Q)_,a = -{} L0(a;b) Q", 2 * (ell + 1));
    let e = lin(vec![(Rat::one(), lq0), (rat_int(2 * (ell + 1)), sq.clone())], dim);
    out.push(ConditionResult::check(&name, None, &e, strategy)?);

    let bl = d.bj(ell);
    let bl1 = d.bj(ell - 1);
    let lead = match ell {
        1 => "C0 Q = -(b0/b1) L0(a;b) Q".to_string(),
        2 => "C0 Q = -b1/(2 b2) L0(a;b) Q".to_string(),
        3 => "C0 Q = -b2/(3 b3) L0(a;b) Q".to_string(),
        _ => format!("C0 Q = -b{}/({} b{}) L0(a;b) Q", ell - 1, ell, ell),
    };
    let e = lin(vec![(Rat::one(), cq), (&bl1 / (rat_int(ell) * &bl), sq.clone())], dim);
    out.push(ConditionResult::check(&lead, None, &e, strategy)?);

    // [(ℓ−k+1) b_{k−1} − k b_k b_{ℓ−1}/(ℓ b_ℓ)] L0(a;b) Q = 0, k = 1..ℓ−1, printed normalised for ℓ ≤ 3
    for k in 1..ell {
        let coef = rat_int(ell - k + 1) * d.bj(k - 1) - rat_int(k) * d.bj(k) * &bl1 / (rat_int(ell) * &bl);
        let (name, index) = match (ell, k) {
            (2, 1) => ("(b0 - b1^2/(4 b2)) L0(a;b) Q = 0".to_string(), None),
            (3, 1) => ("(b0 - b1 b2/(9 b3)) L0(a;b) Q = 0".to_string(), None),
            (3, 2) => ("(b1 - b2^2/(3 b3)) L0(a;b) Q = 0".to_string(), None),
            _ => ("coefficient relation L0(a;b) Q = 0".to_string(), Some(format!("k={k}"))),
        };
        let e = lin(vec![(coef, sq.clone())], dim);
        out.push(ConditionResult::check(&name, index, &e, strategy)?);
    }
    Ok(())
}

/// The general conditions G, L_(n)·Q = s and the three coefficient families.
fn general_conditions(x: &Ctx, strategy: Strategy, out: &mut Vec<ConditionResult>) -> Result<(), ConditionError> {
    let d = x.d;
    let dim = x.dim();
    let n = d.n as i64;
    let ell = d.ell as i64;
    let two = rat_int(2);

    let gg: Vec<Expr> = (1..=dim).map(|i| d.g.diff(&format!("q{i}"))).collect();
    let e = lin(vec![(Rat::one(), gg), (-(two.clone() * d.bj(0)), x.cq(0)), (Rat::one(), d.lk(1))], dim);
    out.push(ConditionResult::check("G_,a = 2 b0 C0 Q - L1", None, &e, strategy)?);
    out.push(ConditionResult::check("Ln·Q = s", None, &[x.lq(n) - Expr::num(d.s.clone())], strategy)?);

    // weight 2 j b_j/(m) on C_(m)Q; m = 0 uses the unit divisor
    let frac_term = |j: i64, m: i64| -> (Rat, Vec<Expr>) {
        let c = two.clone() * rat_int(j) * d.bj(j);
        let c = if m == 0 { c } else { c / rat_int(m) };
        (c, x.cq(m))
    };
    let pos = |m: i64| if m > 0 { x.cq(m) } else { vec![Expr::zero(); dim] };

    for r in 1..=ell {
        let mut terms = Vec::new();
        for s in 0..ell {
            let j = r + s;
            let m = n - s;
            if m >= 0 {
                let (c, v) = frac_term(j, m);
                terms.push((-c, v));
            }
            terms.push((-(two.clone() * d.bj(j)), pos(m)));
            terms.push((d.bj(j), x.grad_lq(n - s - 1)));
        }
        out.push(ConditionResult::check("r-family", Some(format!("r={r}")), &lin(terms, dim), strategy)?);
    }

    let mut terms = Vec::new();
    for s in 1..=ell {
        if n - s >= 0 {
            let (c, v) = frac_term(s, n - s);
            terms.push((-c, v));
        }
    }
    for s in 0..=ell {
        terms.push((-(two.clone() * d.bj(s)), pos(n - s)));
        terms.push((d.bj(s), x.grad_lq(n - s - 1)));
    }
    out.push(ConditionResult::check("top-order", None, &lin(terms, dim), strategy)?);

    for k in 2..=n {
        let mut terms = vec![(rat_int(k * (k - 1)), d.lk(k))];
        for s in 1..=ell {
            if k - s - 1 >= 0 {
                let (c, v) = frac_term(s, k - s - 1);
                terms.push((-c, v));
            }
        }
        for s in 0..=ell {
            terms.push((-(two.clone() * d.bj(s)), pos(k - s - 1)));
            terms.push((d.bj(s), x.grad_lq(k - s - 2)));
        }
        out.push(ConditionResult::check("k-family", Some(format!("k={k}")), &lin(terms, dim), strategy)?);
    }
    Ok(())
}

/// Check the polynomial integral I_n against its conditions and build it.
pub fn theorem1_check_in(d: &Theorem1Data, sys: &DynSystem, strategy: Strategy) -> Result<Theorem1Report, ConditionError> {
    let dim = d.dim();
    if dim != sys.dim || d.l.len() != d.n + 1 || d.l.iter().any(|v| v.len() != dim) {
        return Err(ConditionError::Dimension("theorem data does not match the system".into()));
    }
    if d.ell == 0 || d.b.len() != d.ell + 1 || d.b[d.ell].is_zero() {
        return Err(ConditionError::Precondition("need ℓ ≥ 1, b_0..b_ℓ with b_ℓ ≠ 0".into()));
    }
    check_omega(sys, &d.b, strategy)?;
    let x = Ctx { d, q: &sys.q };
    let mut out = Vec::new();

    out.push(ConditionResult::check("C0 is a KT", None, &kt_parts(&d.c0), strategy)?);
    for k in 1..=d.n {
        out.push(ConditionResult::check("Ck is a KT", Some(format!("k={k}")), &kt_parts(&d.c(k as i64)), strategy)?);
    }
    let kv: Vec<Expr> = symmetrized_gradient(&d.l[d.n]).into_iter().flatten().collect();
    out.push(ConditionResult::check("Ln is a KV", None, &kv, strategy)?);

    match d.n {
        0 => {
            out.push(ConditionResult::check("C0 Q = 0", None, &x.cq(0), strategy)?);
            out.push(ConditionResult::check("L0·Q = s", None, &[x.lq(0) - Expr::num(d.s.clone())], strategy)?);
        }
        1 => first_order_conditions(&x, strategy, &mut out)?,
        _ => {}
    }
    general_conditions(&x, strategy, &mut out)?;

    let passed = out.iter().all(|c| c.holds);
    if !passed {
        return Ok(Theorem1Report { conditions: out, passed, candidate: None, conserved: None, residuals: None });
    }
    let cand = x.integral();
    let conserved = is_identically_zero(&total_time_derivative(&cand, sys)?, strategy)?.is_zero();
    let residuals = determining_residuals(&cand, sys, strategy)?;
    Ok(Theorem1Report { conditions: out, passed, candidate: Some(cand), conserved: Some(conserved), residuals: Some(residuals) })
}

/// Check the exponential integral I_e for ω = b0 + b1 t and build it.
pub fn theorem1_check_ie(
    l: &[Expr],
    lambda: &Rat,
    b0: &Rat,
    b1: &Rat,
    sys: &DynSystem,
    strategy: Strategy,
) -> Result<Theorem1Report, ConditionError> {
    let dim = sys.dim;
    if l.len() != dim {
        return Err(ConditionError::Dimension(format!("L has {} components", l.len())));
    }
    if b1.is_zero() || lambda.is_zero() {
        return Err(ConditionError::Precondition("need b1 ≠ 0 and λ ≠ 0".into()));
    }
    check_omega(sys, &[b0.clone(), b1.clone()], strategy)?;
    let lam3 = lambda * lambda * lambda;
    let sg = symmetrized_gradient(l);
    let lq = sum((0..dim).map(|a| &l[a] * &sys.q[a]));
    let sgq: Vec<Expr> = (0..dim).map(|a| sum((0..dim).map(|b| &sg[a][b] * &sys.q[b]))).collect();

    let mut out = vec![ConditionResult::check("L(a;b) is a KT", None, &kt_parts(&sg), strategy)?];
    let e1: Vec<Expr> =
        (0..dim).map(|a| lq.diff(&format!("q{}", a + 1)) - Expr::num(&lam3 / b1) * &l[a]).collect();
    out.push(ConditionResult::check("(L·Q)_,a = λ³/b1 L_a", None, &e1, strategy)?);
    let e2: Vec<Expr> = (0..dim).map(|a| Expr::num(lam3.clone()) * &l[a] + Expr::num(b1 * rat_int(2)) * &sgq[a]).collect();
    out.push(ConditionResult::check("λ³ L_a = -2 b1 L(a;b) Q", None, &e2, strategy)?);

    let passed = out.iter().all(|c| c.holds);
    if !passed {
        return Ok(Theorem1Report { conditions: out, passed, candidate: None, conserved: None, residuals: None });
    }
    let t = sym_t();
    let ex = (Expr::num(lambda.clone()) * &t).exp();
    let cand = QFICandidate {
        kab: sg.iter().map(|row| row.iter().map(|e| -(&ex * e)).collect()).collect(),
        ka: l.iter().map(|e| Expr::num(lambda.clone()) * &ex * e).collect(),
        k: (Expr::num(b0 - b1 / lambda) + Expr::num(b1.clone()) * &t) * &ex * &lq,
    };
    let conserved = is_identically_zero(&total_time_derivative(&cand, sys)?, strategy)?.is_zero();
    let residuals = determining_residuals(&cand, sys, strategy)?;
    Ok(Theorem1Report { conditions: out, passed, candidate: Some(cand), conserved: Some(conserved), residuals: Some(residuals) })
}

/// Bounds of the exhaustive search for nontrivial exponential integrals.
#[derive(Clone, Debug, Serialize)]
pub struct IeSearchConfig {
    pub dim: usize,
    pub l_degree: u32,
    pub q_degree: u32,
    /// coefficients range over −coeff_bound..=coeff_bound
    pub coeff_bound: i64,
    /// values of κ = λ³/b1 tried
    pub kappas: Vec<i64>,
}

impl IeSearchConfig {
    pub fn line() -> Self {
        IeSearchConfig { dim: 1, l_degree: 2, q_degree: 2, coeff_bound: 2, kappas: vec![-2, -1, 1, 2] }
    }

    pub fn plane() -> Self {
        IeSearchConfig { dim: 2, l_degree: 1, q_degree: 1, coeff_bound: 1, kappas: vec![-2, -1, 1, 2] }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IeSearchReport {
    pub config: IeSearchConfig,
    pub examined: u64,
    /// (κ, L coefficients, Q coefficients) of every nontrivial solution
    pub solutions: Vec<(i64, Vec<i64>, Vec<i64>)>,
}

type Poly = BTreeMap<[u32; 2], i64>;

fn monomials(dim: usize, deg: u32) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for total in 0..=deg {
        for i in (0..=total).rev() {
            let m = [i, total - i];
            if dim == 1 && m[1] > 0 {
                continue;
            }
            out.push(m);
        }
    }
    out
}

fn padd(a: &mut Poly, m: [u32; 2], c: i64) {
    if c == 0 {
        return;
    }
    let e = a.entry(m).or_insert(0);
    *e += c;
    if *e == 0 {
        a.remove(&m);
    }
}

fn pmul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            padd(&mut out, [ma[0] + mb[0], ma[1] + mb[1]], ca * cb);
        }
    }
    out
}

fn pdiff(a: &Poly, i: usize) -> Poly {
    let mut out = Poly::new();
    for (m, c) in a {
        if m[i] > 0 {
            let mut m2 = *m;
            m2[i] -= 1;
            padd(&mut out, m2, c * m[i] as i64);
        }
    }
    out
}

fn pcomb(terms: &[(i64, &Poly)]) -> Poly {
    let mut out = Poly::new();
    for (k, p) in terms {
        for (m, c) in p.iter() {
            padd(&mut out, *m, k * c);
        }
    }
    out
}

/// Vectors whose components are polynomials with coefficients drawn from the range.
fn enumerate(dim: usize, mons: &[[u32; 2]], bound: i64) -> impl Iterator<Item = (Vec<i64>, Vec<Poly>)> + '_ {
    let slots = dim * mons.len();
    let base = (2 * bound + 1) as u64;
    let total = base.pow(slots as u32);
    (0..total).map(move |mut code| {
        let mut coeffs = Vec::with_capacity(slots);
        for _ in 0..slots {
            coeffs.push((code % base) as i64 - bound);
            code /= base;
        }
        let polys = (0..dim)
            .map(|a| {
                let mut p = Poly::new();
                for (j, m) in mons.iter().enumerate() {
                    padd(&mut p, *m, coeffs[a * mons.len() + j]);
                }
                p
            })
            .collect();
        (coeffs, polys)
    })
}

/// Exhaustive integer search for L ≠ 0 meeting the three exponential-integral conditions.
/// Both conditions depend on λ and b1 only through κ = λ³/b1.
pub fn ie_search(cfg: &IeSearchConfig) -> IeSearchReport {
    let dim = cfg.dim.clamp(1, 2);
    let lm = monomials(dim, cfg.l_degree);
    let qm = monomials(dim, cfg.q_degree);
    let qs: Vec<(Vec<i64>, Vec<Poly>)> = enumerate(dim, &qm, cfg.coeff_bound).collect();
    let mut examined = 0u64;
    let mut solutions = Vec::new();
    for (lc, l) in enumerate(dim, &lm, cfg.coeff_bound) {
        if l.iter().all(|p| p.is_empty()) {
            continue;
        }
        // twice the symmetrised gradient S_ab = L_a,b + L_b,a
        let s2: Vec<Vec<Poly>> = (0..dim)
            .map(|a| (0..dim).map(|b| pcomb(&[(1, &pdiff(&l[a], b)), (1, &pdiff(&l[b], a))])).collect())
            .collect();
        let is_kt = (0..dim).all(|a| {
            (0..dim).all(|b| {
                (0..dim).all(|c| {
                    pcomb(&[(1, &pdiff(&s2[a][b], c)), (1, &pdiff(&s2[b][c], a)), (1, &pdiff(&s2[c][a], b))]).is_empty()
                })
            })
        });
        for (qc, qv) in &qs {
            examined += cfg.kappas.len() as u64;
            if !is_kt {
                continue;
            }
            let lq = (0..dim).fold(Poly::new(), |acc, a| pcomb(&[(1, &acc), (1, &pmul(&l[a], &qv[a]))]));
            for &kappa in &cfg.kappas {
                let ok = (0..dim).all(|a| {
                    // (L·Q)_,a − κ L_a = 0 and κ L_a + S2_ab Q^b = 0
                    let c1 = pcomb(&[(1, &pdiff(&lq, a)), (-kappa, &l[a])]);
                    let sq = (0..dim).fold(Poly::new(), |acc, b| pcomb(&[(1, &acc), (1, &pmul(&s2[a][b], &qv[b]))]));
                    let c2 = pcomb(&[(kappa, &l[a]), (1, &sq)]);
                    c1.is_empty() && c2.is_empty()
                });
                if ok {
                    solutions.push((kappa, lc.clone(), qc.clone()));
                }
            }
        }
    }
    IeSearchReport { config: cfg.clone(), examined, solutions }
}
