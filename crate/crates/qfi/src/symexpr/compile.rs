//! Slot-indexed floating evaluator for expressions evaluated many times.

use super::eval::powf_checked;
use super::expr::{rat_to_f64, Expr, Node, Rat};
use super::SymError;

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Add(Vec<Op>),
    Mul(Vec<Op>),
    Powi(Box<Op>, i32),
    Pow(Box<Op>, Rat),
    Sin(Box<Op>),
    Cos(Box<Op>),
    Exp(Box<Op>),
    Log(Box<Op>),
}

/// An expression compiled against an ordered list of slot names.
///
/// Symbols and opaque functions are both resolved by name to slots.
#[derive(Clone, Debug)]
pub struct Compiled {
    op: Op,
}

fn build(e: &Expr, slots: &[String]) -> Result<Op, SymError> {
    let find = |n: &str| slots.iter().position(|s| s == n).ok_or_else(|| SymError::Unbound(n.to_string()));
    Ok(match e.node() {
        Node::Num(r) => Op::Const(rat_to_f64(r)),
        Node::Sym(n) => Op::Slot(find(n)?),
        Node::Func(f) => Op::Slot(find(&f.name)?),
        Node::Add(ts) => Op::Add(ts.iter().map(|x| build(x, slots)).collect::<Result<_, _>>()?),
        Node::Mul(fs) => Op::Mul(fs.iter().map(|x| build(x, slots)).collect::<Result<_, _>>()?),
        Node::Pow(b, ex) => {
            let inner = Box::new(build(b, slots)?);
            match (ex.is_integer(), num_traits::ToPrimitive::to_i32(ex.numer())) {
                (true, Some(n)) => Op::Powi(inner, n),
                _ => Op::Pow(inner, ex.clone()),
            }
        }
        Node::Sin(u) => Op::Sin(Box::new(build(u, slots)?)),
        Node::Cos(u) => Op::Cos(Box::new(build(u, slots)?)),
        Node::Exp(u) => Op::Exp(Box::new(build(u, slots)?)),
        Node::Log(u) => Op::Log(Box::new(build(u, slots)?)),
    })
}

fn run(op: &Op, x: &[f64]) -> f64 {
    match op {
        Op::Const(c) => *c,
        Op::Slot(i) => x[*i],
        Op::Add(ts) => ts.iter().map(|o| run(o, x)).sum(),
        Op::Mul(fs) => fs.iter().map(|o| run(o, x)).product(),
        Op::Powi(b, n) => run(b, x).powi(*n),
        Op::Pow(b, ex) => powf_checked(run(b, x), ex).unwrap_or(f64::NAN),
        Op::Sin(u) => run(u, x).sin(),
        Op::Cos(u) => run(u, x).cos(),
        Op::Exp(u) => run(u, x).exp(),
        Op::Log(u) => {
            let y = run(u, x);
            if y > 0.0 {
                y.ln()
            } else {
                f64::NAN
            }
        }
    }
}

impl Compiled {
    pub fn new(e: &Expr, slots: &[String]) -> Result<Self, SymError> {
        Ok(Compiled { op: build(e, slots)? })
    }

    /// Evaluate; non-finite results signal a domain violation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        run(&self.op, x)
    }
}
