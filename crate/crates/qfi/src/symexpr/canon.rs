//! Conversion of expressions to rational functions, with algebraic atoms.
//!
//! In strict mode only integer powers of polynomials are accepted. In
//! algebraic mode radicals become new variables `R` with the rewrite rule
//! `R^q -> base`, `cos u` is rewritten by `cos² u -> 1 - sin² u`, and `exp`,
//! `log` and opaque function nodes are treated as independent variables.
//! Numerators are kept reduced modulo these rules, so an expression is zero
//! when its reduced numerator is the zero polynomial.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};

use super::expr::{mul, rat_pow_exact, Expr, Node, Rat};
use super::poly::{mono_var, Mono, Poly};
use super::SymError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum VarKey {
    Sym(String),
    Atom(Expr),
    Radical(Poly, u32),
    ConstRadical(Rat, u32),
}

#[derive(Clone, Debug)]
struct VarInfo {
    key: VarKey,
    rule: Option<(u32, Poly)>,
}

/// Numerator over a product of interned denominator factors.
#[derive(Clone, Debug)]
pub(crate) struct Frac {
    pub num: Poly,
    pub den: BTreeMap<usize, u32>,
}

pub(crate) struct Ctx {
    vars: Vec<VarInfo>,
    index: HashMap<VarKey, usize>,
    factors: Vec<Poly>,
    factor_index: HashMap<Poly, usize>,
    strict: bool,
    memo: HashMap<Expr, Frac>,
    /// Common root order per radical base and per exponential argument, so
    /// that e.g. b^(1/2) and b^(1/4) share one variable.
    roots: HashMap<Expr, u32>,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// exp(u) as a product of exp(c w) with rational c.
fn exp_terms(u: &Expr) -> Vec<(Rat, Expr)> {
    let terms: Vec<Expr> = match u.node() {
        Node::Add(ts) => ts.clone(),
        _ => vec![u.clone()],
    };
    terms
        .into_iter()
        .map(|t| match t.node() {
            Node::Mul(fs) if fs[0].as_num().is_some() => (fs[0].as_num().unwrap().clone(), mul(fs[1..].to_vec())),
            _ => (Rat::one(), t.clone()),
        })
        .collect()
}

impl Ctx {
    pub fn new(strict: bool) -> Self {
        Ctx {
            vars: Vec::new(),
            index: HashMap::new(),
            factors: Vec::new(),
            factor_index: HashMap::new(),
            strict,
            memo: HashMap::new(),
            roots: HashMap::new(),
        }
    }

    fn note_root(&mut self, key: &Expr, q: Option<u32>) {
        if let Some(q) = q.filter(|&q| q > 1) {
            let l = self.roots.entry(key.clone()).or_insert(1);
            *l = *l / gcd(*l, q) * q;
        }
    }

    fn scan_roots(&mut self, e: &Expr) {
        let mut found = Vec::new();
        e.visit(&mut |n| match n.node() {
            Node::Pow(b, ex) if !ex.is_integer() => {
                found.push((b.clone(), ex.denom().to_u32()));
                if let Node::Pow(inner, r) = b.node() {
                    if !r.is_integer() {
                        found.push((inner.clone(), (r * ex).denom().to_u32()));
                    }
                }
            }
            Node::Exp(u) => {
                for (c, w) in exp_terms(u) {
                    found.push((Expr::from_node(Node::Exp(w)), c.denom().to_u32()));
                }
            }
            _ => {}
        });
        for (k, q) in found {
            self.note_root(&k, q);
        }
    }

    /// Root of order `q` of `base` (keyed by `key`) raised to `p`.
    fn rational_power(&mut self, key: &Expr, base: &Frac, p: i64, q: u32) -> Result<Frac, SymError> {
        if q == 1 {
            return self.pow_int(base, p);
        }
        self.note_root(key, Some(q));
        let l = self.roots[key];
        let root = self.radical(base, l)?;
        self.pow_int(&root, p * (l / q) as i64)
    }

    fn var(&mut self, key: VarKey, rule: Option<(u32, Poly)>) -> usize {
        if let Some(i) = self.index.get(&key) {
            return *i;
        }
        let i = self.vars.len();
        self.vars.push(VarInfo { key: key.clone(), rule });
        self.index.insert(key, i);
        i
    }

    fn factor(&mut self, p: Poly) -> usize {
        if let Some(i) = self.factor_index.get(&p) {
            return *i;
        }
        let i = self.factors.len();
        self.factors.push(p.clone());
        self.factor_index.insert(p, i);
        i
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars
            .iter()
            .map(|v| match &v.key {
                VarKey::Sym(s) => s.clone(),
                VarKey::Atom(e) => format!("{e}"),
                VarKey::Radical(p, q) => format!("root{q}[{p}]"),
                VarKey::ConstRadical(c, q) => format!("root{q}[{c}]"),
            })
            .collect()
    }

    /// Rewrite `p` to normal form modulo the variable rules.
    pub fn reduce(&self, p: Poly) -> Poly {
        if self.vars.iter().all(|v| v.rule.is_none()) {
            return p;
        }
        let mut out = Poly::zero();
        let mut work: Vec<(Mono, Rat)> = p.terms.into_iter().collect();
        while let Some((m, c)) = work.pop() {
            let mut hit = None;
            for (i, e) in m.iter().enumerate() {
                if let Some((q, _)) = &self.vars[i].rule {
                    if e >= q {
                        hit = Some(i);
                        break;
                    }
                }
            }
            match hit {
                None => out.add_term(m, c),
                Some(i) => {
                    let (q, rhs) = self.vars[i].rule.as_ref().unwrap();
                    let mut rest = m.clone();
                    rest[i] -= q;
                    for (rm, rc) in &rhs.terms {
                        work.push((super::poly::mono_mul(&rest, rm), &c * rc));
                    }
                }
            }
        }
        out
    }

    fn constant(c: Rat) -> Frac {
        Frac { num: Poly::constant(c), den: BTreeMap::new() }
    }

    fn from_var(i: usize) -> Frac {
        Frac { num: Poly::var(i), den: BTreeMap::new() }
    }

    fn den_poly(&self, den: &BTreeMap<usize, u32>) -> Poly {
        let mut p = Poly::one();
        for (f, e) in den {
            p = p.mul(&self.factors[*f].pow(*e));
        }
        p
    }

    fn add(&self, a: &Frac, b: &Frac) -> Frac {
        if a.num.is_zero() {
            return b.clone();
        }
        if b.num.is_zero() {
            return a.clone();
        }
        let mut den = a.den.clone();
        for (f, e) in &b.den {
            let x = den.entry(*f).or_insert(0);
            *x = (*x).max(*e);
        }
        let lift = |x: &Frac| -> Poly {
            let mut missing = BTreeMap::new();
            for (f, e) in &den {
                let have = x.den.get(f).copied().unwrap_or(0);
                if *e > have {
                    missing.insert(*f, *e - have);
                }
            }
            if missing.is_empty() {
                x.num.clone()
            } else {
                x.num.mul(&self.den_poly(&missing))
            }
        };
        let num = self.reduce(lift(a).add(&lift(b)));
        let mut r = Frac { num, den };
        self.cancel_monomials(&mut r);
        r
    }

    fn mul(&self, a: &Frac, b: &Frac) -> Frac {
        let num = self.reduce(a.num.mul(&b.num));
        let mut den = a.den.clone();
        for (f, e) in &b.den {
            *den.entry(*f).or_insert(0) += e;
        }
        let mut r = Frac { num, den };
        self.cancel_monomials(&mut r);
        r
    }

    /// Cancel denominator factors that are single variables without rules.
    fn cancel_monomials(&self, r: &mut Frac) {
        if r.num.is_zero() {
            r.den.clear();
            return;
        }
        let content = r.num.mono_content();
        if content.is_empty() {
            return;
        }
        let mut changed = false;
        let keys: Vec<usize> = r.den.keys().copied().collect();
        let mut div_mono: Mono = Vec::new();
        for f in keys {
            let fp = &self.factors[f];
            if fp.terms.len() != 1 {
                continue;
            }
            let (m, _) = fp.terms.iter().next().unwrap();
            if m.iter().filter(|e| **e > 0).count() != 1 || m.iter().sum::<u32>() != 1 {
                continue;
            }
            let vi = m.len() - 1;
            let avail = content.get(vi).copied().unwrap_or(0).saturating_sub(div_mono.get(vi).copied().unwrap_or(0));
            let e = r.den[&f];
            let k = avail.min(e);
            if k > 0 {
                if div_mono.len() <= vi {
                    div_mono.resize(vi + 1, 0);
                }
                div_mono[vi] += k;
                *r.den.get_mut(&f).unwrap() -= k;
                changed = true;
            }
        }
        if changed {
            let mut np = Poly::zero();
            for (m, c) in &r.num.terms {
                np.add_term(super::poly::mono_div(m, &div_mono), c.clone());
            }
            r.num = np;
            r.den.retain(|_, e| *e > 0);
        }
    }

    /// Multiply `acc` by 1/p^power, splitting p into content, monomial and polynomial parts.
    fn inv_poly(&mut self, p: &Poly, power: u32, acc: &mut Frac) -> Result<(), SymError> {
        if power == 0 {
            return Ok(());
        }
        if p.is_zero() {
            return Err(SymError::Domain("division by zero".into()));
        }
        let mono = p.mono_content();
        let mut rest = Poly::zero();
        for (m, c) in &p.terms {
            rest.add_term(super::poly::mono_div(m, &mono), c.clone());
        }
        let (lc, monic) = rest.monic();
        acc.num = acc.num.scale(&num_traits::pow(lc.recip(), power as usize));
        if monic.as_constant().is_none() {
            let f = self.factor(monic);
            *acc.den.entry(f).or_insert(0) += power;
        }
        for (i, e) in mono.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            let total = e * power;
            match self.vars[i].rule.clone() {
                Some((q, base)) => {
                    // 1/R^n = R^(kq-n) / base^k
                    let k = total.div_ceil(q);
                    let up = k * q - total;
                    if up > 0 {
                        acc.num = self.reduce(acc.num.mul(&Poly::monomial(mono_var(i, up), Rat::one())));
                    }
                    self.inv_poly(&base, k, acc)?;
                }
                None => {
                    let f = self.factor(Poly::var(i));
                    *acc.den.entry(f).or_insert(0) += total;
                }
            }
        }
        Ok(())
    }

    fn invert(&mut self, a: &Frac) -> Result<Frac, SymError> {
        if a.num.is_zero() {
            return Err(SymError::Domain("division by zero".into()));
        }
        let mut acc = Frac { num: self.den_poly(&a.den), den: BTreeMap::new() };
        let num = a.num.clone();
        self.inv_poly(&num, 1, &mut acc)?;
        acc.num = self.reduce(acc.num);
        self.cancel_monomials(&mut acc);
        Ok(acc)
    }

    fn pow_int(&mut self, a: &Frac, n: i64) -> Result<Frac, SymError> {
        let base = if n < 0 { self.invert(a)? } else { a.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Ctx::constant(Rat::one());
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            k >>= 1;
            if k > 0 {
                b = self.mul(&b, &b);
            }
        }
        Ok(acc)
    }

    fn radical(&mut self, b: &Frac, q: u32) -> Result<Frac, SymError> {
        // (N/D)^(1/q) = (N D^(q-1))^(1/q) / D
        let d = self.den_poly(&b.den);
        let base = self.reduce(b.num.mul(&d.pow(q - 1)));
        if base.is_zero() {
            return Ok(Ctx::constant(Rat::zero()));
        }
        let (c, monic) = base.monic();
        let mut num = Poly::one();
        match rat_pow_exact(&c, &Rat::new(1.into(), (q as i64).into())) {
            Some(r) => num = num.scale(&r),
            None => {
                let i = self.var(VarKey::ConstRadical(c.clone(), q), Some((q, Poly::constant(c))));
                num = num.mul(&Poly::var(i));
            }
        }
        if monic.as_constant().is_none() {
            let i = self.var(VarKey::Radical(monic.clone(), q), Some((q, monic)));
            num = num.mul(&Poly::var(i));
        }
        Ok(Frac { num, den: b.den.clone() })
    }

    fn atom(&mut self, e: &Expr) -> Frac {
        let i = self.var(VarKey::Atom(e.clone()), None);
        Ctx::from_var(i)
    }

    pub fn convert(&mut self, e: &Expr) -> Result<Frac, SymError> {
        if let Some(f) = self.memo.get(e) {
            return Ok(f.clone());
        }
        let r = self.convert_uncached(e)?;
        self.memo.insert(e.clone(), r.clone());
        Ok(r)
    }

    fn convert_uncached(&mut self, e: &Expr) -> Result<Frac, SymError> {
        let strict_fail = || SymError::NotRational(format!("{e}"));
        match e.node() {
            Node::Num(r) => Ok(Ctx::constant(r.clone())),
            Node::Sym(s) => {
                let i = self.var(VarKey::Sym(s.clone()), None);
                Ok(Ctx::from_var(i))
            }
            Node::Add(ts) => {
                let mut acc = Ctx::constant(Rat::zero());
                for t in ts {
                    let f = self.convert(t)?;
                    acc = self.add(&acc, &f);
                }
                Ok(acc)
            }
            Node::Mul(fs) => {
                let mut acc = Ctx::constant(Rat::one());
                for t in fs {
                    let f = self.convert(t)?;
                    acc = self.mul(&acc, &f);
                    if acc.num.is_zero() {
                        break;
                    }
                }
                Ok(acc)
            }
            Node::Pow(b, ex) => {
                // (b^r)^e = b^(r e) once b^r already needs b >= 0
                if let Node::Pow(inner, r) = b.node() {
                    if !self.strict && !r.is_integer() {
                        return self.convert(&inner.pow(r * ex));
                    }
                }
                let base = self.convert(b)?;
                if ex.is_integer() {
                    let n = ex.to_i64().ok_or_else(strict_fail)?;
                    return self.pow_int(&base, n);
                }
                if self.strict {
                    return Err(strict_fail());
                }
                let p = ex.numer().to_i64().ok_or_else(strict_fail)?;
                let q = ex.denom().to_u32().ok_or_else(strict_fail)?;
                self.rational_power(b, &base, p, q)
            }
            _ if self.strict => Err(strict_fail()),
            Node::Sin(_) | Node::Log(_) | Node::Func(_) => Ok(self.atom(e)),
            Node::Cos(u) => {
                let s = self.var(VarKey::Atom(Expr::from_node(Node::Sin(u.clone()))), None);
                let mut rhs = Poly::one();
                rhs.add_term(mono_var(s, 2), -Rat::one());
                let i = self.var(VarKey::Atom(e.clone()), Some((2, rhs)));
                Ok(Ctx::from_var(i))
            }
            Node::Exp(u) => {
                let mut acc = Ctx::constant(Rat::one());
                for (c, w) in exp_terms(u) {
                    let p = c.numer().to_i64().ok_or_else(strict_fail)?;
                    let q = c.denom().to_u32().ok_or_else(strict_fail)?;
                    let key = Expr::from_node(Node::Exp(w));
                    let a = self.atom(&key);
                    let f = self.rational_power(&key, &a, p, q)?;
                    acc = self.mul(&acc, &f);
                }
                Ok(acc)
            }
        }
    }

    /// Cancel every denominator factor that divides the numerator.
    fn cancel_full(&self, r: &mut Frac) {
        let keys: Vec<usize> = r.den.keys().copied().collect();
        for f in keys {
            let fp = self.factors[f].clone();
            while r.den.get(&f).copied().unwrap_or(0) > 0 {
                match r.num.div_exact(&fp) {
                    Some(qt) => {
                        r.num = qt;
                        *r.den.get_mut(&f).unwrap() -= 1;
                    }
                    None => break,
                }
            }
        }
        r.den.retain(|_, e| *e > 0);
    }
}

/// Rational function over named symbols with exact coefficients, in canonical form.
///
/// Variables are sorted by name, common denominator factors are cancelled and the
/// denominator's leading coefficient is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolyFraction {
    pub vars: Vec<String>,
    pub num: Poly,
    pub den: Poly,
}

impl RationalPolyFraction {
    fn normalize(vars: Vec<String>, num: Poly, den: Poly) -> Self {
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by(|a, b| vars[*a].cmp(&vars[*b]));
        let mut perm = vec![0usize; vars.len()];
        for (new, old) in order.iter().enumerate() {
            perm[*old] = new;
        }
        let sorted: Vec<String> = order.iter().map(|i| vars[*i].clone()).collect();
        let mut num = num.remap(&perm);
        let mut den = den.remap(&perm);
        if num.is_zero() {
            den = Poly::one();
        }
        let (lc, monic) = den.monic();
        num = num.scale(&lc.recip());
        den = monic;
        // drop unused variables
        let mut used = vec![false; sorted.len()];
        for p in [&num, &den] {
            for m in p.terms.keys() {
                for (i, e) in m.iter().enumerate() {
                    if *e > 0 {
                        used[i] = true;
                    }
                }
            }
        }
        let mut map = vec![0usize; sorted.len()];
        let mut kept = Vec::new();
        for (i, u) in used.iter().enumerate() {
            if *u {
                map[i] = kept.len();
                kept.push(sorted[i].clone());
            }
        }
        RationalPolyFraction { vars: kept, num: num.remap(&map), den: den.remap(&map) }
    }

    fn unify(&self, o: &RationalPolyFraction) -> (Vec<String>, [Poly; 4]) {
        let mut all: Vec<String> = self.vars.iter().chain(o.vars.iter()).cloned().collect();
        all.sort();
        all.dedup();
        let pa: Vec<usize> = self.vars.iter().map(|v| all.iter().position(|x| x == v).unwrap()).collect();
        let pb: Vec<usize> = o.vars.iter().map(|v| all.iter().position(|x| x == v).unwrap()).collect();
        (all, [self.num.remap(&pa), self.den.remap(&pa), o.num.remap(&pb), o.den.remap(&pb)])
    }

    pub fn add(&self, o: &RationalPolyFraction) -> RationalPolyFraction {
        let (vars, [an, ad, bn, bd]) = self.unify(o);
        let (num, den) = if ad == bd { (an.add(&bn), ad.clone()) } else { (an.mul(&bd).add(&bn.mul(&ad)), ad.mul(&bd)) };
        let (num, den) = cancel_pair(num, den, &ad, &bd);
        RationalPolyFraction::normalize(vars, num, den)
    }

    pub fn mul(&self, o: &RationalPolyFraction) -> RationalPolyFraction {
        let (vars, [an, ad, bn, bd]) = self.unify(o);
        let num = an.mul(&bn);
        let den = ad.mul(&bd);
        let (num, den) = cancel_pair(num, den, &ad, &bd);
        RationalPolyFraction::normalize(vars, num, den)
    }

    /// Equality as rational functions (cross multiplication).
    pub fn equals(&self, o: &RationalPolyFraction) -> bool {
        let (_, [an, ad, bn, bd]) = self.unify(o);
        an.mul(&bd) == bn.mul(&ad)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Coefficients as a polynomial in `vars` (full-length exponent vectors),
    /// if the fraction is a polynomial over exactly those names.
    pub fn polynomial_in(&self, vars: &[&str]) -> Option<BTreeMap<Vec<u32>, Rat>> {
        let c = self.den.as_constant()?;
        let pos: Vec<usize> = self.vars.iter().map(|v| vars.iter().position(|w| w == v)).collect::<Option<_>>()?;
        let mut out = BTreeMap::new();
        for (m, k) in &self.num.terms {
            let mut full = vec![0u32; vars.len()];
            for (i, e) in m.iter().enumerate() {
                full[pos[i]] += e;
            }
            out.insert(full, k / &c);
        }
        Some(out)
    }
}

fn cancel_pair(mut num: Poly, mut den: Poly, a: &Poly, b: &Poly) -> (Poly, Poly) {
    for f in [a, b] {
        if f.as_constant().is_some() {
            continue;
        }
        if let (Some(n2), Some(d2)) = (num.div_exact(f), den.div_exact(f)) {
            num = n2;
            den = d2;
        }
    }
    (num, den)
}

impl fmt::Display for RationalPolyFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num.fmt_with(&self.vars);
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{n}")
        } else {
            write!(f, "({n}) / ({})", self.den.fmt_with(&self.vars))
        }
    }
}

/// Strict conversion: integer exponents over the declared symbols only.
pub fn to_rational_fraction(e: &Expr) -> Result<RationalPolyFraction, SymError> {
    let mut ctx = Ctx::new(true);
    let mut fr = ctx.convert(e)?;
    ctx.cancel_full(&mut fr);
    let den = ctx.den_poly(&fr.den);
    let names = ctx.var_names();
    Ok(RationalPolyFraction::normalize(names, fr.num, den))
}

/// Outcome of the algebraic normal form of an expression.
pub(crate) struct AlgebraicForm {
    pub numerator: Poly,
    pub had_atoms: bool,
}

/// Algebraic conversion: radicals, trigonometric and opaque atoms allowed.
pub(crate) fn algebraic_numerator(e: &Expr) -> Result<AlgebraicForm, SymError> {
    let mut ctx = Ctx::new(false);
    ctx.scan_roots(e);
    let fr = ctx.convert(e)?;
    let had_atoms = ctx.vars.iter().any(|v| !matches!(v.key, VarKey::Sym(_)));
    Ok(AlgebraicForm { numerator: fr.num, had_atoms })
}
