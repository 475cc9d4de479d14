//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::expr::Rat;

/// Exponent vector indexed by variable id, trailing zeros trimmed.
pub type Mono = Vec<u32>;

fn trim(mut m: Mono) -> Mono {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

pub fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let n = a.len().max(b.len());
    let mut out = vec![0u32; n];
    for (i, e) in a.iter().enumerate() {
        out[i] += e;
    }
    for (i, e) in b.iter().enumerate() {
        out[i] += e;
    }
    out
}

pub fn mono_divides(d: &Mono, m: &Mono) -> bool {
    d.iter().enumerate().all(|(i, e)| *e == 0 || m.get(i).copied().unwrap_or(0) >= *e)
}

pub fn mono_div(m: &Mono, d: &Mono) -> Mono {
    let mut out = m.clone();
    for (i, e) in d.iter().enumerate() {
        out[i] -= e;
    }
    trim(out)
}

pub fn mono_var(i: usize, e: u32) -> Mono {
    let mut m = vec![0u32; i + 1];
    m[i] = e;
    m
}

/// Polynomial as a map from monomial to nonzero coefficient; lexicographic order
/// on exponent vectors (variable 0 most significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Poly {
    pub terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn var(i: usize) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(mono_var(i, 1), Rat::one());
        p
    }

    pub fn monomial(m: Mono, c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(trim(m), c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        let m = trim(m);
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c.clone());
        }
        r
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(mono_mul(m1, m2), c1 * c2);
            }
        }
        r
    }

    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, x)| (trim(mono_mul(k, m)), x * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient if `d` divides `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            if !mono_divides(dm, rm) {
                return None;
            }
            let qm = mono_div(rm, dm);
            let qc = rc / dc;
            rem = rem.sub(&d.mul_mono(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Greatest common monomial factor of all terms.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let mut g = match it.next() {
            Some(m) => m.clone(),
            None => return Vec::new(),
        };
        for m in it {
            for i in 0..g.len() {
                g[i] = g[i].min(m.get(i).copied().unwrap_or(0));
            }
        }
        trim(g)
    }

    /// Split into (leading coefficient, monic polynomial).
    pub fn monic(&self) -> (Rat, Poly) {
        match self.leading() {
            None => (Rat::zero(), Poly::zero()),
            Some((_, c)) => {
                let c = c.clone();
                (c.clone(), self.scale(&c.recip()))
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn max_var(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    /// Rename variables: variable `i` becomes `perm[i]`.
    pub fn remap(&self, perm: &[usize]) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut nm: Mono = Vec::new();
            for (i, e) in m.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let j = perm[i];
                if nm.len() <= j {
                    nm.resize(j + 1, 0);
                }
                nm[j] += e;
            }
            r.add_term(nm, c.clone());
        }
        r
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut mon = Vec::new();
            for (i, e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => mon.push(names[i].clone()),
                    _ => mon.push(format!("{}^{}", names[i], e)),
                }
            }
            let cs = if c.is_integer() { c.numer().to_string() } else { format!("({c})") };
            if mon.is_empty() {
                parts.push(cs);
            } else if c.is_one() {
                parts.push(mon.join("*"));
            } else if (-c.clone()).is_one() {
                parts.push(format!("-{}", mon.join("*")));
            } else {
                parts.push(format!("{}*{}", cs, mon.join("*")));
            }
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(stripped) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(stripped);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        s
    }

    pub fn is_negative_leading(&self) -> bool {
        self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.max_var()).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.fmt_with(&names))
    }
}
