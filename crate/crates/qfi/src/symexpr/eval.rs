use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive, Zero};

use super::expr::{rat_pow_exact, rat_to_f64, Expr, Node, Rat};
use super::SymError;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rat),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rat_to_f64(r),
            Value::Float(x) => *x,
        }
    }
}

/// Symbol and opaque-function values used for evaluation.
///
/// Opaque functions are looked up by name: the binding supplies the value of
/// the function at the point being evaluated.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    pub symbols: HashMap<String, Value>,
    pub funcs: HashMap<String, Value>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, name: &str, v: f64) -> Self {
        self.symbols.insert(name.to_string(), Value::Float(v));
        self
    }

    pub fn set_exact(mut self, name: &str, r: Rat) -> Self {
        self.symbols.insert(name.to_string(), Value::Exact(r));
        self
    }

    pub fn set_func(mut self, name: &str, v: f64) -> Self {
        self.funcs.insert(name.to_string(), Value::Float(v));
        self
    }

    pub fn insert(&mut self, name: &str, v: f64) {
        self.symbols.insert(name.to_string(), Value::Float(v));
    }

    pub fn insert_func(&mut self, name: &str, v: f64) {
        self.funcs.insert(name.to_string(), Value::Float(v));
    }
}

enum ExactErr {
    NotExact,
    Sym(SymError),
}

fn eval_exact(e: &Expr, b: &Binding) -> Result<Rat, ExactErr> {
    match e.node() {
        Node::Num(r) => Ok(r.clone()),
        Node::Sym(n) => match b.symbols.get(n) {
            Some(Value::Exact(r)) => Ok(r.clone()),
            Some(Value::Float(_)) => Err(ExactErr::NotExact),
            None => Err(ExactErr::Sym(SymError::Unbound(n.clone()))),
        },
        Node::Add(ts) => {
            let mut acc = Rat::zero();
            for t in ts {
                acc += eval_exact(t, b)?;
            }
            Ok(acc)
        }
        Node::Mul(fs) => {
            let mut acc = Rat::from_integer(1.into());
            for f in fs {
                acc *= eval_exact(f, b)?;
            }
            Ok(acc)
        }
        Node::Pow(base, ex) => {
            let x = eval_exact(base, b)?;
            if x.is_zero() && ex.is_negative() {
                return Err(ExactErr::Sym(SymError::Domain(format!("zero raised to negative power in {}", e))));
            }
            if x.is_negative() && !ex.is_integer() && ex.denom() % 2u32 == 0u32.into() {
                return Err(ExactErr::Sym(SymError::Domain(format!("even root of negative value in {}", e))));
            }
            rat_pow_exact(&x, ex).ok_or(ExactErr::NotExact)
        }
        Node::Exp(u) => {
            let x = eval_exact(u, b)?;
            if x.is_zero() {
                Ok(Rat::from_integer(1.into()))
            } else {
                Err(ExactErr::NotExact)
            }
        }
        Node::Log(u) => {
            let x = eval_exact(u, b)?;
            if x <= Rat::zero() {
                return Err(ExactErr::Sym(SymError::Domain(format!("log of non-positive value in {}", e))));
            }
            if x == Rat::from_integer(1.into()) {
                Ok(Rat::zero())
            } else {
                Err(ExactErr::NotExact)
            }
        }
        Node::Sin(u) => {
            let x = eval_exact(u, b)?;
            if x.is_zero() {
                Ok(Rat::zero())
            } else {
                Err(ExactErr::NotExact)
            }
        }
        Node::Cos(u) => {
            let x = eval_exact(u, b)?;
            if x.is_zero() {
                Ok(Rat::from_integer(1.into()))
            } else {
                Err(ExactErr::NotExact)
            }
        }
        Node::Func(f) => match b.funcs.get(&f.name) {
            Some(Value::Exact(r)) => Ok(r.clone()),
            Some(Value::Float(_)) => Err(ExactErr::NotExact),
            None => Err(ExactErr::Sym(SymError::Unbound(f.name.clone()))),
        },
    }
}

/// Floating evaluation.
pub fn eval_f64(e: &Expr, b: &Binding) -> Result<f64, SymError> {
    let r = match e.node() {
        Node::Num(r) => rat_to_f64(r),
        Node::Sym(n) => b.symbols.get(n).ok_or_else(|| SymError::Unbound(n.clone()))?.to_f64(),
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_f64(t, b)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_f64(f, b)?;
            }
            acc
        }
        Node::Pow(base, ex) => {
            let x = eval_f64(base, b)?;
            powf_checked(x, ex).ok_or_else(|| SymError::Domain(format!("invalid power at base {x} in {e}")))?
        }
        Node::Sin(u) => eval_f64(u, b)?.sin(),
        Node::Cos(u) => eval_f64(u, b)?.cos(),
        Node::Exp(u) => eval_f64(u, b)?.exp(),
        Node::Log(u) => {
            let x = eval_f64(u, b)?;
            if x <= 0.0 {
                return Err(SymError::Domain(format!("log of non-positive value {x}")));
            }
            x.ln()
        }
        Node::Func(f) => b.funcs.get(&f.name).ok_or_else(|| SymError::Unbound(f.name.clone()))?.to_f64(),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(SymError::Domain(format!("non-finite value in {e}")))
    }
}

pub(crate) fn powf_checked(x: f64, ex: &Rat) -> Option<f64> {
    if ex.is_integer() {
        let n = ex.to_i32()?;
        if x == 0.0 && n < 0 {
            return None;
        }
        return Some(x.powi(n));
    }
    let q = ex.denom().to_i64()?;
    let p = ex.numer().to_i64()?;
    if x < 0.0 {
        if q % 2 == 0 {
            return None;
        }
        let root = -(-x).powf(1.0 / q as f64);
        return Some(root.powi(p as i32));
    }
    if x == 0.0 && p < 0 {
        return None;
    }
    if q == 2 {
        return Some(x.sqrt().powi(p as i32));
    }
    Some(x.powf(p as f64 / q as f64))
}

/// Evaluate: exact when every value and exponent permits it, floating otherwise.
pub fn evaluate(e: &Expr, b: &Binding) -> Result<Value, SymError> {
    match eval_exact(e, b) {
        Ok(r) => Ok(Value::Exact(r)),
        Err(ExactErr::Sym(err)) => Err(err),
        Err(ExactErr::NotExact) => eval_f64(e, b).map(Value::Float),
    }
}
