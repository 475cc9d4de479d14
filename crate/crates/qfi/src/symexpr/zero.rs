use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::canon::{algebraic_numerator, to_rational_fraction};
use super::eval::{eval_f64, Binding};
use super::expr::{Expr, Node};
use super::SymError;

pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0x5eed_0f_1a7e;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Canonical rational form over the symbols; integer exponents only.
    Exact,
    /// Canonical form with radicals, trigonometric and opaque nodes as algebraic atoms.
    Algebraic,
    /// Random evaluation at `n` points.
    Sampled { n: usize, eps: f64, seed: u64 },
    /// Exact, then Algebraic, then Sampled with the default parameters.
    Auto,
    /// As `Auto`, sampling from the given seed.
    AutoSeeded(u64),
}

impl Strategy {
    pub fn sampled_default() -> Strategy {
        Strategy::Sampled { n: DEFAULT_SAMPLES, eps: DEFAULT_EPS, seed: DEFAULT_SEED }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact,
    Algebraic,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    Zero { method: Method },
    NonZero { method: Method, witness: Option<BTreeMap<String, f64>>, value: Option<f64> },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero { .. })
    }

    pub fn method(&self) -> Method {
        match self {
            Verdict::Zero { method } | Verdict::NonZero { method, .. } => *method,
        }
    }
}

/// Sampling interval for a symbol: coordinates and velocities get random signs.
fn draw(name: &str, rng: &mut ChaCha8Rng) -> f64 {
    if name == "t" {
        return rng.gen_range(0.1..3.0);
    }
    let mag = rng.gen_range(0.5..2.0);
    if super::expr::is_coordinate_name(name) && rng.gen_bool(0.5) {
        -mag
    } else {
        mag
    }
}

/// Sum of absolute values of top-level terms; the local magnitude scale.
fn magnitude(e: &Expr, b: &Binding) -> f64 {
    match e.node() {
        Node::Add(ts) => ts.iter().map(|x| eval_f64(x, b).map(f64::abs).unwrap_or(0.0)).sum(),
        _ => 0.0,
    }
}

/// Random bindings for every free symbol and opaque function of `exprs`.
pub fn sample_points(exprs: &[&Expr], n: usize, seed: u64) -> Vec<Binding> {
    let mut syms = std::collections::BTreeSet::new();
    let mut funcs = std::collections::BTreeSet::new();
    for e in exprs {
        syms.extend(e.symbols());
        funcs.extend(e.func_names());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 50 * n + 100 {
        attempts += 1;
        let mut b = Binding::new();
        for s in &syms {
            let x = draw(s, &mut rng);
            b.insert(s, x);
        }
        for f in &funcs {
            let x = rng.gen_range(0.5..2.0);
            b.insert_func(f, x);
        }
        if exprs.iter().all(|e| eval_f64(e, &b).is_ok()) {
            out.push(b);
        }
    }
    out
}

fn binding_map(b: &Binding) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for (k, v) in &b.symbols {
        m.insert(k.clone(), v.to_f64());
    }
    for (k, v) in &b.funcs {
        m.insert(format!("{k}()"), v.to_f64());
    }
    m
}

fn sampled(e: &Expr, n: usize, eps: f64, seed: u64) -> Result<Verdict, SymError> {
    let pts = sample_points(&[e], n, seed);
    if pts.len() < n {
        return Err(SymError::Domain(format!("could not find {n} regular sample points for {e}")));
    }
    for b in &pts {
        let val = eval_f64(e, b)?;
        let scale = magnitude(e, b).max(val.abs());
        if val.abs() > eps * (1.0 + scale) {
            return Ok(Verdict::NonZero { method: Method::Sampled, witness: Some(binding_map(b)), value: Some(val) });
        }
    }
    Ok(Verdict::Zero { method: Method::Sampled })
}

/// Decide whether `e` vanishes identically.
pub fn is_identically_zero(e: &Expr, strategy: Strategy) -> Result<Verdict, SymError> {
    if e.is_zero() {
        let method = match strategy {
            Strategy::Sampled { .. } => Method::Sampled,
            Strategy::Algebraic => Method::Algebraic,
            _ => Method::Exact,
        };
        return Ok(Verdict::Zero { method });
    }
    match strategy {
        Strategy::Exact => {
            let f = to_rational_fraction(e)?;
            if f.is_zero() {
                Ok(Verdict::Zero { method: Method::Exact })
            } else {
                let witness = sample_points(&[e], 1, DEFAULT_SEED).pop();
                let value = witness.as_ref().and_then(|b| eval_f64(e, b).ok());
                Ok(Verdict::NonZero { method: Method::Exact, witness: witness.as_ref().map(binding_map), value })
            }
        }
        Strategy::Algebraic => {
            let f = algebraic_numerator(e)?;
            if f.numerator.is_zero() {
                Ok(Verdict::Zero { method: Method::Algebraic })
            } else {
                let witness = sample_points(&[e], 1, DEFAULT_SEED).pop();
                let value = witness.as_ref().and_then(|b| eval_f64(e, b).ok());
                Ok(Verdict::NonZero { method: Method::Algebraic, witness: witness.as_ref().map(binding_map), value })
            }
        }
        Strategy::Sampled { n, eps, seed } => sampled(e, n, eps, seed),
        Strategy::Auto => is_identically_zero(e, Strategy::AutoSeeded(DEFAULT_SEED)),
        Strategy::AutoSeeded(seed) => match to_rational_fraction(e) {
            Ok(_) => is_identically_zero(e, Strategy::Exact),
            Err(SymError::NotRational(_)) => match algebraic_numerator(e) {
                Ok(f) if f.numerator.is_zero() => Ok(Verdict::Zero { method: Method::Algebraic }),
                Ok(f) if !f.had_atoms => Ok(Verdict::NonZero {
                    method: Method::Algebraic,
                    witness: sample_points(&[e], 1, seed).pop().as_ref().map(binding_map),
                    value: None,
                }),
                // nonzero normal forms with atoms may come from relations the
                // normal form does not know; let sampling decide
                _ => sampled(e, DEFAULT_SAMPLES, DEFAULT_EPS, seed),
            },
            Err(err) => Err(err),
        },
    }
}

/// Zero test over several expressions; the first nonzero verdict wins.
pub fn all_zero(es: &[Expr], strategy: Strategy) -> Result<Verdict, SymError> {
    let mut method = Method::Exact;
    for e in es {
        let v = is_identically_zero(e, strategy)?;
        match v {
            Verdict::NonZero { .. } => return Ok(v),
            Verdict::Zero { method: m } => {
                method = match (method, m) {
                    (_, Method::Sampled) | (Method::Sampled, _) => Method::Sampled,
                    (_, Method::Algebraic) | (Method::Algebraic, _) => Method::Algebraic,
                    _ => Method::Exact,
                }
            }
        }
    }
    if es.is_empty() {
        method = match strategy {
            Strategy::Sampled { .. } => Method::Sampled,
            Strategy::Algebraic => Method::Algebraic,
            _ => Method::Exact,
        };
    }
    Ok(Verdict::Zero { method })
}
