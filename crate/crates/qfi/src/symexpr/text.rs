//! Parenthesized prefix text format.
//!
//! Grammar:
//!
//! ```text
//! expr   := number | symbol | "(" op expr+ ")" | "(^" expr number ")" | "(fn" name expr [expr] ")"
//! op     := "+" | "*" | "-" | "/" | "sin" | "cos" | "exp" | "log"
//! number := ["-"] digits ["/" digits]
//! symbol := [A-Za-z_#][A-Za-z0-9_']*
//! ```
//!
//! The printer emits only `+ * ^ sin cos exp log fn`; `-` and `/` are accepted
//! on input as conveniences. Printed text parses back to the identical tree.

use num_bigint::BigInt;
use num_traits::One;

use super::expr::{Expr, Node, Rat};
use super::SymError;

pub fn to_prefix(e: &Expr) -> String {
    let mut s = String::new();
    write_prefix(e, &mut s);
    s
}

fn write_rat(r: &Rat, s: &mut String) {
    if r.denom().is_one() {
        s.push_str(&r.numer().to_string());
    } else {
        s.push_str(&format!("{}/{}", r.numer(), r.denom()));
    }
}

fn write_prefix(e: &Expr, s: &mut String) {
    match e.node() {
        Node::Num(r) => write_rat(r, s),
        Node::Sym(n) => s.push_str(n),
        Node::Add(ts) | Node::Mul(ts) => {
            s.push('(');
            s.push(if matches!(e.node(), Node::Add(_)) { '+' } else { '*' });
            for t in ts {
                s.push(' ');
                write_prefix(t, s);
            }
            s.push(')');
        }
        Node::Pow(b, ex) => {
            s.push_str("(^ ");
            write_prefix(b, s);
            s.push(' ');
            write_rat(ex, s);
            s.push(')');
        }
        Node::Sin(u) | Node::Cos(u) | Node::Exp(u) | Node::Log(u) => {
            let name = match e.node() {
                Node::Sin(_) => "sin",
                Node::Cos(_) => "cos",
                Node::Exp(_) => "exp",
                _ => "log",
            };
            s.push('(');
            s.push_str(name);
            s.push(' ');
            write_prefix(u, s);
            s.push(')');
        }
        Node::Func(f) => {
            s.push_str("(fn ");
            s.push_str(&f.name);
            s.push(' ');
            write_prefix(&f.arg, s);
            if let Some(d) = &f.deriv {
                s.push(' ');
                write_prefix(d, s);
            }
            s.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in src.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(Tok::Atom(std::mem::take(&mut cur)));
                }
                out.push(if ch == '(' { Tok::Open } else { Tok::Close });
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(Tok::Atom(std::mem::take(&mut cur)));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(Tok::Atom(cur));
    }
    out
}

fn parse_rat(s: &str) -> Option<Rat> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(Rat::new(n, d))
}

fn is_symbol(s: &str) -> bool {
    let mut it = s.chars();
    match it.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '#' => {}
        _ => return false,
    }
    it.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> SymError {
        SymError::Parse(format!("{msg} at token {}", self.pos))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, SymError> {
        match self.next() {
            Some(Tok::Atom(a)) => {
                if let Some(r) = parse_rat(&a) {
                    Ok(Expr::num(r))
                } else if is_symbol(&a) {
                    Ok(Expr::sym(&a))
                } else {
                    Err(self.err(&format!("bad atom '{a}'")))
                }
            }
            Some(Tok::Open) => {
                let op = match self.next() {
                    Some(Tok::Atom(a)) => a,
                    _ => return Err(self.err("expected operator")),
                };
                let e = match op.as_str() {
                    "+" | "*" | "-" | "/" => {
                        let mut args = Vec::new();
                        while self.toks.get(self.pos) != Some(&Tok::Close) {
                            if self.pos >= self.toks.len() {
                                return Err(self.err("unterminated list"));
                            }
                            args.push(self.expr()?);
                        }
                        if args.is_empty() {
                            return Err(self.err("operator needs arguments"));
                        }
                        match op.as_str() {
                            "+" => Expr::from_node(Node::Add(args)),
                            "*" => Expr::from_node(Node::Mul(args)),
                            "-" => {
                                let first = args.remove(0);
                                if args.is_empty() {
                                    super::expr::neg(first)
                                } else {
                                    super::expr::sub(first, super::expr::add(args))
                                }
                            }
                            _ => {
                                let first = args.remove(0);
                                super::expr::div(first, super::expr::mul(args))
                            }
                        }
                    }
                    "^" => {
                        let b = self.expr()?;
                        let ex = match self.next() {
                            Some(Tok::Atom(a)) => parse_rat(&a).ok_or_else(|| self.err("exponent must be rational"))?,
                            _ => return Err(self.err("exponent must be rational")),
                        };
                        Expr::from_node(Node::Pow(b, ex))
                    }
                    "sin" => Expr::from_node(Node::Sin(self.expr()?)),
                    "cos" => Expr::from_node(Node::Cos(self.expr()?)),
                    "exp" => Expr::from_node(Node::Exp(self.expr()?)),
                    "log" => Expr::from_node(Node::Log(self.expr()?)),
                    "fn" => {
                        let name = match self.next() {
                            Some(Tok::Atom(a)) if is_symbol(&a) => a,
                            _ => return Err(self.err("expected function name")),
                        };
                        let arg = self.expr()?;
                        let deriv = if self.toks.get(self.pos) != Some(&Tok::Close) { Some(self.expr()?) } else { None };
                        Expr::func(&name, arg, deriv)
                    }
                    other => return Err(self.err(&format!("unknown operator '{other}'"))),
                };
                match self.next() {
                    Some(Tok::Close) => Ok(e),
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(Tok::Close) => Err(self.err("unexpected ')'")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, SymError> {
    let mut p = Parser { toks: tokenize(src), pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}
