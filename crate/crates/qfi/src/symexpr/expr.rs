use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Placeholder symbol used inside the derivative rule of an opaque function.
pub const FORMAL_ARG: &str = "#";

/// Immutable, structurally shared expression.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Rat),
    Sym(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Rat),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Log(Expr),
    Func(Func),
}

/// A function of one argument known only through its derivative rule.
///
/// `deriv` is written in terms of [`FORMAL_ARG`]; `None` means the derivative
/// is itself an unknown function named `name'`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Func {
    pub name: String,
    pub arg: Expr,
    pub deriv: Option<Expr>,
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

impl Expr {
    pub fn from_node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(r: Rat) -> Expr {
        Expr::from_node(Node::Num(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(rat_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::num(rat(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_node(Node::Sym(name.to_string()))
    }

    pub fn as_num(&self) -> Option<&Rat> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_one())
    }

    /// Opaque function of `arg` whose derivative is `deriv` (in terms of [`FORMAL_ARG`]).
    pub fn func(name: &str, arg: Expr, deriv: Option<Expr>) -> Expr {
        Expr::from_node(Node::Func(Func { name: name.to_string(), arg, deriv }))
    }

    /// Opaque function of `t` with derivative `deriv_t` written in terms of `t`.
    pub fn func_of_t(name: &str, deriv_t: Option<Expr>) -> Expr {
        let d = deriv_t.map(|d| d.subs(&sym_t(), &Expr::sym(FORMAL_ARG)));
        Expr::func(name, sym_t(), d)
    }

    pub fn pow(&self, e: Rat) -> Expr {
        pow(self.clone(), e)
    }

    pub fn powi(&self, n: i64) -> Expr {
        pow(self.clone(), rat_int(n))
    }

    pub fn sqrt(&self) -> Expr {
        pow(self.clone(), rat(1, 2))
    }

    pub fn recip(&self) -> Expr {
        pow(self.clone(), rat_int(-1))
    }

    pub fn sin(&self) -> Expr {
        sin(self.clone())
    }

    pub fn cos(&self) -> Expr {
        cos(self.clone())
    }

    pub fn exp(&self) -> Expr {
        exp(self.clone())
    }

    pub fn ln(&self) -> Expr {
        log(self.clone())
    }

    pub fn scale(&self, r: Rat) -> Expr {
        mul(vec![Expr::num(r), self.clone()])
    }

    /// Replace every occurrence of `target` (a symbol or any subtree) by `with`.
    pub fn subs(&self, target: &Expr, with: &Expr) -> Expr {
        if self == target {
            return with.clone();
        }
        match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(ts) => add(ts.iter().map(|x| x.subs(target, with)).collect()),
            Node::Mul(fs) => mul(fs.iter().map(|x| x.subs(target, with)).collect()),
            Node::Pow(b, e) => pow(b.subs(target, with), e.clone()),
            Node::Sin(u) => sin(u.subs(target, with)),
            Node::Cos(u) => cos(u.subs(target, with)),
            Node::Exp(u) => exp(u.subs(target, with)),
            Node::Log(u) => log(u.subs(target, with)),
            Node::Func(f) => Expr::func(&f.name, f.arg.subs(target, with), f.deriv.clone()),
        }
    }

    /// Substitute several symbols at once.
    pub fn subs_many(&self, pairs: &[(Expr, Expr)]) -> Expr {
        for (a, b) in pairs {
            if self == a {
                return b.clone();
            }
        }
        match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(ts) => add(ts.iter().map(|x| x.subs_many(pairs)).collect()),
            Node::Mul(fs) => mul(fs.iter().map(|x| x.subs_many(pairs)).collect()),
            Node::Pow(b, e) => pow(b.subs_many(pairs), e.clone()),
            Node::Sin(u) => sin(u.subs_many(pairs)),
            Node::Cos(u) => cos(u.subs_many(pairs)),
            Node::Exp(u) => exp(u.subs_many(pairs)),
            Node::Log(u) => log(u.subs_many(pairs)),
            Node::Func(f) => Expr::func(&f.name, f.arg.subs_many(pairs), f.deriv.clone()),
        }
    }

    /// Free symbol names (derivative rules of opaque functions excluded).
    pub fn symbols(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Add(ts) | Node::Mul(ts) => ts.iter().for_each(|x| x.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Sin(u) | Node::Cos(u) | Node::Exp(u) | Node::Log(u) => u.collect_symbols(out),
            Node::Func(f) => f.arg.collect_symbols(out),
        }
    }

    /// Names of opaque functions appearing in the expression.
    pub fn func_names(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Func(f) = e.node() {
                out.insert(f.name.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Num(_) | Node::Sym(_) => {}
            Node::Add(ts) | Node::Mul(ts) => ts.iter().for_each(|x| x.visit(f)),
            Node::Pow(b, _) => b.visit(f),
            Node::Sin(u) | Node::Cos(u) | Node::Exp(u) | Node::Log(u) => u.visit(f),
            Node::Func(g) => g.arg.visit(f),
        }
    }

    pub fn depends_on(&self, s: &str) -> bool {
        self.symbols().contains(s)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

pub fn sym_t() -> Expr {
    Expr::sym("t")
}

/// Coordinate symbol q_i, 1-based.
pub fn q(i: usize) -> Expr {
    Expr::sym(&format!("q{i}"))
}

/// Velocity symbol for coordinate i, 1-based.
pub fn v(i: usize) -> Expr {
    Expr::sym(&format!("v{i}"))
}

pub fn coords(dim: usize) -> Vec<Expr> {
    (1..=dim).map(q).collect()
}

pub fn vels(dim: usize) -> Vec<Expr> {
    (1..=dim).map(v).collect()
}

/// Radius (q1² + … + q_dim²)^(1/2).
pub fn radius(dim: usize) -> Expr {
    add(coords(dim).iter().map(|x| x.powi(2)).collect()).sqrt()
}

pub fn is_coordinate_name(s: &str) -> bool {
    (s.starts_with('q') || s.starts_with('v')) && s.len() > 1 && s[1..].chars().all(|c| c.is_ascii_digit())
}

fn split_coeff(e: &Expr) -> (Rat, Expr) {
    if let Node::Mul(fs) = e.node() {
        if let Some(c) = fs[0].as_num() {
            let rest: Vec<Expr> = fs[1..].to_vec();
            let base = if rest.len() == 1 { rest[0].clone() } else { Expr::from_node(Node::Mul(rest)) };
            return (c.clone(), base);
        }
    }
    (Rat::one(), e.clone())
}

pub fn add(terms: Vec<Expr>) -> Expr {
    let mut constant = Rat::zero();
    let mut map: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut stack: Vec<Expr> = terms;
    while let Some(t) = stack.pop() {
        match t.node() {
            Node::Num(r) => constant += r,
            Node::Add(ts) => stack.extend(ts.iter().cloned()),
            _ => {
                let (c, b) = split_coeff(&t);
                *map.entry(b).or_insert_with(Rat::zero) += c;
            }
        }
    }
    let mut out = Vec::new();
    if !constant.is_zero() {
        out.push(Expr::num(constant));
    }
    for (b, c) in map {
        if c.is_zero() {
            continue;
        }
        if c.is_one() {
            out.push(b);
        } else {
            out.push(mul(vec![Expr::num(c), b]));
        }
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::from_node(Node::Add(out)),
    }
}

pub fn mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = Rat::one();
    let mut map: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Num(r) => {
                if r.is_zero() {
                    return Expr::zero();
                }
                coeff *= r;
            }
            Node::Mul(fs) => stack.extend(fs.iter().cloned()),
            Node::Exp(u) => exp_args.push(u.clone()),
            Node::Pow(b, e) => *map.entry(b.clone()).or_insert_with(Rat::zero) += e,
            _ => *map.entry(f.clone()).or_insert_with(Rat::zero) += Rat::one(),
        }
    }
    let mut out: Vec<Expr> = Vec::new();
    let push = |p: Expr, coeff: &mut Rat, out: &mut Vec<Expr>| match p.node() {
        Node::Num(r) => *coeff *= r,
        Node::Mul(fs) => {
            for g in fs {
                match g.node() {
                    Node::Num(r) => *coeff *= r,
                    _ => out.push(g.clone()),
                }
            }
        }
        _ => out.push(p),
    };
    for (b, e) in map {
        if e.is_zero() {
            continue;
        }
        let p = pow(b, e);
        push(p, &mut coeff, &mut out);
    }
    if !exp_args.is_empty() {
        let p = exp(add(exp_args));
        push(p, &mut coeff, &mut out);
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    out.sort();
    if out.is_empty() {
        return Expr::num(coeff);
    }
    if !coeff.is_one() {
        out.insert(0, Expr::num(coeff));
    }
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        Expr::from_node(Node::Mul(out))
    }
}

/// Exact r-th root of a non-negative integer, if it exists.
fn int_root(n: &BigInt, r: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let x = n.nth_root(r);
    if num_traits::pow(x.clone(), r as usize) == *n {
        Some(x)
    } else {
        None
    }
}

/// Exact rational power when the result is rational.
pub fn rat_pow_exact(b: &Rat, e: &Rat) -> Option<Rat> {
    let p = e.numer().to_i64()?;
    let q = e.denom().to_u32()?;
    let root = if q == 1 {
        b.clone()
    } else {
        let neg = b.is_negative();
        if neg && q % 2 == 0 {
            return None;
        }
        let a = b.abs();
        let n = int_root(a.numer(), q)?;
        let d = int_root(a.denom(), q)?;
        let r = Rat::new(n, d);
        if neg {
            -r
        } else {
            r
        }
    };
    if p >= 0 {
        Some(num_traits::pow(root, p as usize))
    } else {
        if root.is_zero() {
            return None;
        }
        Some(num_traits::pow(root.recip(), (-p) as usize))
    }
}

pub fn pow(b: Expr, e: Rat) -> Expr {
    if e.is_zero() {
        return Expr::one();
    }
    if e.is_one() {
        return b;
    }
    let e_int = e.is_integer();
    match b.node() {
        Node::Num(r) => {
            if r.is_zero() && e.is_negative() {
                return Expr::from_node(Node::Pow(b.clone(), e));
            }
            if let Some(v) = rat_pow_exact(r, &e) {
                return Expr::num(v);
            }
            if r.is_one() {
                return Expr::one();
            }
            // split off the integer part of the exponent: b^(n+f) = b^n b^f
            let fl = e.floor();
            if !fl.is_zero() {
                let fpart = &e - &fl;
                let ipart = rat_pow_exact(r, &fl).unwrap();
                return mul(vec![Expr::num(ipart), Expr::from_node(Node::Pow(b.clone(), fpart))]);
            }
            Expr::from_node(Node::Pow(b.clone(), e))
        }
        Node::Pow(c, e2) if e_int => pow(c.clone(), e2 * &e),
        Node::Exp(u) => exp(u.scale(e)),
        Node::Mul(fs) if e_int => mul(fs.iter().map(|f| pow(f.clone(), e.clone())).collect()),
        _ => Expr::from_node(Node::Pow(b, e)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    add(vec![a, neg(b)])
}

pub fn neg(a: Expr) -> Expr {
    mul(vec![Expr::int(-1), a])
}

pub fn div(a: Expr, b: Expr) -> Expr {
    mul(vec![a, pow(b, rat_int(-1))])
}

pub fn sin(u: Expr) -> Expr {
    if u.is_zero() {
        return Expr::zero();
    }
    Expr::from_node(Node::Sin(u))
}

pub fn cos(u: Expr) -> Expr {
    if u.is_zero() {
        return Expr::one();
    }
    Expr::from_node(Node::Cos(u))
}

pub fn exp(u: Expr) -> Expr {
    if u.is_zero() {
        return Expr::one();
    }
    if let Node::Log(w) = u.node() {
        return w.clone();
    }
    Expr::from_node(Node::Exp(u))
}

pub fn log(u: Expr) -> Expr {
    if u.is_one() {
        return Expr::zero();
    }
    if let Node::Exp(w) = u.node() {
        return w.clone();
    }
    Expr::from_node(Node::Log(u))
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl<'a> std::ops::Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        add(vec![self.clone(), rhs.clone()])
    }
}

impl<'a> std::ops::Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        sub(self.clone(), rhs.clone())
    }
}

impl<'a> std::ops::Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        mul(vec![self.clone(), rhs.clone()])
    }
}

impl<'a> std::ops::Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        div(self.clone(), rhs.clone())
    }
}

macro_rules! mixed_ops {
    ($($tr:ident $m:ident $f:ident),*) => {$(
        impl<'a> std::ops::$tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(self, rhs.clone())
            }
        }
        impl<'a> std::ops::$tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(self.clone(), rhs)
            }
        }
    )*};
}

fn add2(a: Expr, b: Expr) -> Expr {
    add(vec![a, b])
}

fn mul2(a: Expr, b: Expr) -> Expr {
    mul(vec![a, b])
}

mixed_ops!(Add add add2, Sub sub sub, Mul mul mul2, Div div div);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self.clone())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Rat> for Expr {
    fn from(r: Rat) -> Expr {
        Expr::num(r)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::to_prefix(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::to_prefix(self))
    }
}

/// Sum helper over an iterator.
pub fn sum<I: IntoIterator<Item = Expr>>(it: I) -> Expr {
    add(it.into_iter().collect())
}

/// Product helper over an iterator.
pub fn product<I: IntoIterator<Item = Expr>>(it: I) -> Expr {
    mul(it.into_iter().collect())
}

/// Convert an f64-free rational to f64.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
