//! Symbolic expressions: construction, differentiation, evaluation and zero testing.

mod canon;
mod compile;
mod diff;
mod eval;
mod expr;
mod poly;
mod text;
mod zero;

pub use canon::{to_rational_fraction, RationalPolyFraction};
pub use compile::Compiled;
pub use diff::{differentiate, differentiate_declared};
pub use eval::{eval_f64, evaluate, Binding, Value};
pub use expr::{
    add, coords, cos, div, exp, is_coordinate_name, log, mul, neg, pow, product, q, radius, rat, rat_int,
    rat_pow_exact, rat_to_f64, sin, sub, sum, sym_t, v, vels, Expr, Func, Node, Rat, FORMAL_ARG,
};
pub use poly::{Mono, Poly};
pub use text::{parse, to_prefix};
pub use zero::{
    all_zero, is_identically_zero, sample_points, Method, Strategy, Verdict, DEFAULT_EPS, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymError {
    #[error("unbound symbol '{0}'")]
    Unbound(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("expression is not a rational function: {0}")]
    NotRational(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
}

/// Parse a rational literal such as `3`, `-2/5`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    match parse(s.trim()).ok()?.node() {
        Node::Num(r) => Some(r.clone()),
        _ => None,
    }
}

/// Print a rational as `p/q` (or `p` when integral).
pub fn rat_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
