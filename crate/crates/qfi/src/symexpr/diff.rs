use num_traits::One;

use super::expr::{add, cos, mul, neg, pow, sin, Expr, Node, FORMAL_ARG};

/// Exact partial derivative with respect to symbol `s`.
pub fn differentiate(e: &Expr, s: &str) -> Expr {
    if !e.depends_on(s) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(n) => {
            if n == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => add(ts.iter().map(|x| differentiate(x, s)).collect()),
        Node::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let d = differentiate(&fs[i], s);
                if d.is_zero() {
                    continue;
                }
                let mut fac: Vec<Expr> = fs.clone();
                fac[i] = d;
                terms.push(mul(fac));
            }
            add(terms)
        }
        Node::Pow(b, ex) => {
            let db = differentiate(b, s);
            mul(vec![Expr::num(ex.clone()), pow(b.clone(), ex - num_rational::BigRational::one()), db])
        }
        Node::Sin(u) => mul(vec![cos(u.clone()), differentiate(u, s)]),
        Node::Cos(u) => neg(mul(vec![sin(u.clone()), differentiate(u, s)])),
        Node::Exp(_) => {
            let Node::Exp(u) = e.node() else { unreachable!() };
            mul(vec![e.clone(), differentiate(u, s)])
        }
        Node::Log(u) => mul(vec![differentiate(u, s), u.recip()]),
        Node::Func(f) => {
            let outer = match &f.deriv {
                Some(d) => d.subs(&Expr::sym(FORMAL_ARG), &f.arg),
                None => Expr::func(&format!("{}'", f.name), f.arg.clone(), None),
            };
            mul(vec![outer, differentiate(&f.arg, s)])
        }
    }
}

impl Expr {
    pub fn diff(&self, s: &str) -> Expr {
        differentiate(self, s)
    }

    pub fn diff_n(&self, s: &str, n: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = differentiate(&e, s);
        }
        e
    }
}

/// Derivative with respect to a symbol that must appear in `declared`.
pub fn differentiate_declared(e: &Expr, s: &str, declared: &[&str]) -> Result<Expr, super::SymError> {
    if !declared.contains(&s) {
        return Err(super::SymError::UnknownSymbol(s.to_string()));
    }
    Ok(differentiate(e, s))
}
