//! Killing vectors and order-2 Killing tensors of flat space in Cartesian coordinates.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg;
use crate::symexpr::{
    is_identically_zero, parse_rat, q, rat, rat_string, to_rational_fraction, Binding, Expr, Rat, Strategy, SymError,
};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("not a Killing tensor: residual component {component:?} is {residual}")]
    NotKT { component: (usize, usize, usize), residual: Expr },
    #[error("B must be traceless (trace {0})")]
    NotTraceless(String),
    #[error("{0} must be symmetric")]
    NotSymmetric(&'static str),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("component is not a polynomial with rational coefficients: {0}")]
    NotPolynomial(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// The 20 constants a1..a20 of the general Killing tensor of E³ (index 0 holds a1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KTParams {
    pub a: [Rat; 20],
}

impl Default for KTParams {
    fn default() -> Self {
        KTParams { a: std::array::from_fn(|_| Rat::zero()) }
    }
}

impl KTParams {
    pub fn zero() -> Self {
        Self::default()
    }

    /// a_i = 1 (1-based), the rest zero.
    pub fn one_hot(i: usize) -> Self {
        KTParams::zero().with(i, Rat::one())
    }

    pub fn with(mut self, i: usize, v: Rat) -> Self {
        self.a[i - 1] = v;
        self
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.a[i - 1]
    }

    fn e(&self, i: usize) -> Expr {
        Expr::num(self.a[i - 1].clone())
    }
}

impl Serialize for KTParams {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = (1..=20).map(|i| (format!("a{i}"), rat_string(self.get(i)))).collect();
        // keep a1..a20 in numeric order
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(20))?;
        for i in 1..=20 {
            let k = format!("a{i}");
            map.serialize_entry(&k, &m[&k])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for KTParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m: BTreeMap<String, String> = BTreeMap::deserialize(d)?;
        let mut p = KTParams::zero();
        for (k, v) in m {
            let i: usize = k
                .strip_prefix('a')
                .and_then(|n| n.parse().ok())
                .filter(|i| (1..=20).contains(i))
                .ok_or_else(|| serde::de::Error::custom(format!("unknown parameter '{k}'")))?;
            p.a[i - 1] = parse_rat(&v).ok_or_else(|| serde::de::Error::custom(format!("bad rational '{v}'")))?;
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FromParams,
    FromVector,
    CovariantForm,
    Custom,
}

/// Symmetric dim×dim tensor whose entries are expressions in the coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct KillingTensor2 {
    comps: Vec<Vec<Expr>>,
    pub provenance: Provenance,
}

impl KillingTensor2 {
    /// Build from the upper triangle; the lower triangle mirrors it.
    pub fn from_upper(dim: usize, upper: impl Fn(usize, usize) -> Expr, provenance: Provenance) -> Self {
        let mut comps = vec![vec![Expr::zero(); dim]; dim];
        for a in 0..dim {
            for b in a..dim {
                let e = upper(a, b);
                comps[a][b] = e.clone();
                comps[b][a] = e;
            }
        }
        KillingTensor2 { comps, provenance }
    }

    /// A custom symmetric tensor; fails if not a Killing tensor.
    pub fn custom(comps: Vec<Vec<Expr>>) -> Result<Self, GeometryError> {
        let dim = comps.len();
        for row in &comps {
            if row.len() != dim {
                return Err(GeometryError::Dimension { expected: dim, got: row.len() });
            }
        }
        let k = KillingTensor2::from_upper(dim, |a, b| comps[a][b].clone(), Provenance::Custom);
        if k.comps != comps {
            return Err(GeometryError::NotSymmetric("K"));
        }
        check_kt(&k.comps)?;
        Ok(k)
    }

    pub fn zero(dim: usize) -> Self {
        KillingTensor2::from_upper(dim, |_, _| Expr::zero(), Provenance::Custom)
    }

    pub fn identity(dim: usize) -> Self {
        KillingTensor2::from_upper(dim, |a, b| if a == b { Expr::one() } else { Expr::zero() }, Provenance::Custom)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn get(&self, a: usize, b: usize) -> &Expr {
        &self.comps[a][b]
    }

    pub fn components(&self) -> &[Vec<Expr>] {
        &self.comps
    }

    /// Leading dim×dim block with q_{dim+1}.. set to zero.
    pub fn restrict(&self, dim: usize) -> KillingTensor2 {
        let zero: Vec<(Expr, Expr)> = (dim + 1..=self.dim()).map(|i| (q(i), Expr::zero())).collect();
        KillingTensor2::from_upper(dim, |a, b| self.comps[a][b].subs_many(&zero), self.provenance)
    }

    /// K_ab v^b
    pub fn apply(&self, v: &[Expr]) -> Vec<Expr> {
        self.comps.iter().map(|row| crate::symexpr::sum(row.iter().zip(v).map(|(k, x)| k * x))).collect()
    }

    /// K_ab u^a w^b
    pub fn contract(&self, u: &[Expr], w: &[Expr]) -> Expr {
        crate::symexpr::sum(u.iter().zip(self.apply(w)).map(|(a, b)| a * &b))
    }

    pub fn scale(&self, c: &Expr) -> KillingTensor2 {
        KillingTensor2::from_upper(self.dim(), |a, b| c * &self.comps[a][b], self.provenance)
    }

    pub fn add(&self, o: &KillingTensor2) -> KillingTensor2 {
        KillingTensor2::from_upper(self.dim(), |a, b| &self.comps[a][b] + &o.comps[a][b], Provenance::Custom)
    }
}

fn x() -> Expr {
    q(1)
}
fn y() -> Expr {
    q(2)
}
fn z() -> Expr {
    q(3)
}

fn half(e: Expr) -> Expr {
    e * Expr::frac(1, 2)
}

/// The general Killing tensor of E³ in terms of a1..a20.
pub fn kt_from_params(p: &KTParams) -> KillingTensor2 {
    let a = |i| p.e(i);
    let (x, y, z) = (x(), y(), z());
    let c11 = half(a(6)) * y.powi(2) + half(a(1)) * z.powi(2) + a(4) * &y * &z + a(5) * y.clone() + a(2) * z.clone() + a(3);
    let c12 = half(a(10)) * z.powi(2) - half(a(6)) * &x * &y - half(a(4)) * &x * &z - half(a(14)) * &y * &z
        - half(a(5)) * x.clone()
        - half(a(15)) * y.clone()
        + a(16) * z.clone()
        + a(17);
    let c13 = half(a(14)) * y.powi(2) - half(a(4)) * &x * &y - half(a(1)) * &x * &z - half(a(10)) * &y * &z
        - half(a(2)) * x.clone()
        + a(18) * y.clone()
        - half(a(11)) * z.clone()
        + a(19);
    let c22 = half(a(6)) * x.powi(2) + half(a(7)) * z.powi(2) + a(14) * &x * &z + a(15) * x.clone() + a(12) * z.clone() + a(13);
    let c23 = half(a(4)) * x.powi(2) - half(a(14)) * &x * &y - half(a(10)) * &x * &z - half(a(7)) * &y * &z
        - (a(16) + a(18)) * x.clone()
        - half(a(12)) * y.clone()
        - half(a(8)) * z.clone()
        + a(20);
    let c33 = half(a(1)) * x.powi(2) + half(a(7)) * y.powi(2) + a(10) * &x * &y + a(11) * x + a(8) * y + a(9);
    let m = [[c11, c12, c13.clone()], [Expr::zero(), c22, c23], [Expr::zero(), Expr::zero(), c33]];
    KillingTensor2::from_upper(3, |i, j| m[i][j].clone(), Provenance::FromParams)
}

/// The vector whose symmetrized gradient is the Killing tensor with
/// a1 = a4 = a6 = a7 = a10 = a14 = 0 (those parameters enter only as Killing vector parts).
pub fn generating_vector(p: &KTParams) -> [Expr; 3] {
    let a = |i| p.e(i);
    let (x, y, z) = (x(), y(), z());
    let two = Expr::int(2);
    let l1 = -a(15) * y.powi(2) - a(11) * z.powi(2) + a(5) * &x * &y + a(2) * &x * &z
        + two.clone() * (a(16) + a(18)) * &y * &z
        + a(3) * x.clone()
        + two.clone() * a(4) * y.clone()
        + two.clone() * a(1) * z.clone()
        + a(6);
    let l2 = -a(5) * x.powi(2) - a(8) * z.powi(2) + a(15) * &x * &y - two.clone() * a(18) * &x * &z + a(12) * &y * &z
        + two.clone() * (a(17) - a(4)) * x.clone()
        + a(13) * y.clone()
        + two.clone() * a(7) * z.clone()
        + a(14);
    let l3 = -a(2) * x.powi(2) - a(12) * y.powi(2) - two.clone() * a(16) * &x * &y + a(11) * &x * &z + a(8) * &y * &z
        + two.clone() * (a(19) - a(1)) * x
        + two * (a(20) - a(7)) * y
        + a(9) * z
        + a(10);
    [l1, l2, l3]
}

/// L_(a;b) in flat Cartesian coordinates.
pub fn symmetrized_gradient(l: &[Expr]) -> Vec<Vec<Expr>> {
    let dim = l.len();
    (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| half(l[a].diff(&format!("q{}", b + 1)) + l[b].diff(&format!("q{}", a + 1))))
                .collect()
        })
        .collect()
}

/// C_ab = L_(a;b), checked to be a Killing tensor.
pub fn kt_from_vector(l: &[Expr]) -> Result<KillingTensor2, GeometryError> {
    let g = symmetrized_gradient(l);
    check_kt(&g)?;
    Ok(KillingTensor2::from_upper(l.len(), |a, b| g[a][b].clone(), Provenance::FromVector))
}

fn check_kt(k: &[Vec<Expr>]) -> Result<(), GeometryError> {
    for (component, residual) in kt_residual(k) {
        if !is_identically_zero(&residual, Strategy::Auto)?.is_zero() {
            return Err(GeometryError::NotKT { component, residual });
        }
    }
    Ok(())
}

/// The independent components K_(ab,c), a ≤ b ≤ c (0-based indices).
pub fn kt_residual(k: &[Vec<Expr>]) -> Vec<((usize, usize, usize), Expr)> {
    let dim = k.len();
    let d = |a: usize, b: usize, c: usize| k[a][b].diff(&format!("q{}", c + 1));
    let mut out = Vec::new();
    for a in 0..dim {
        for b in a..dim {
            for c in b..dim {
                let s = (d(a, b, c) + d(b, c, a) + d(c, a, b)) * Expr::frac(1, 3);
                out.push(((a, b, c), s));
            }
        }
    }
    out
}

/// Killing vector of E³: translation plus rotation (c7 y + c8 z, −c7 x + c9 z, −c8 x − c9 y).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct KillingVectorE3 {
    pub translation: [Rat; 3],
    pub rotation: [Rat; 3],
}

impl KillingVectorE3 {
    pub fn field(&self) -> [Expr; 3] {
        let t = |i: usize| Expr::num(self.translation[i].clone());
        let c = |i: usize| Expr::num(self.rotation[i].clone());
        [
            t(0) + c(0) * y() + c(1) * z(),
            t(1) - c(0) * x() + c(2) * z(),
            t(2) - c(1) * x() - c(2) * y(),
        ]
    }

    /// The six one-parameter generators: three translations, three rotations.
    pub fn basis() -> Vec<KillingVectorE3> {
        (0..6)
            .map(|i| {
                let mut kv = KillingVectorE3::default();
                if i < 3 {
                    kv.translation[i] = Rat::one();
                } else {
                    kv.rotation[i - 3] = Rat::one();
                }
                kv
            })
            .collect()
    }
}

/// ψ q + (Killing vector): the general homothetic vector of flat space.
pub fn homothetic_vector(psi: Rat, kv: &KillingVectorE3, dim: usize) -> Vec<Expr> {
    let f = kv.field();
    (0..dim).map(|i| Expr::num(psi.clone()) * q(i + 1) + f[i].clone()).collect()
}

/// Data of the covariant form of the general Killing tensor of E³.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CovariantKTData {
    #[serde(with = "rat_matrix")]
    pub a: [[Rat; 3]; 3],
    #[serde(with = "rat_matrix")]
    pub b: [[Rat; 3]; 3],
    #[serde(with = "rat_vector")]
    pub lambda: [Rat; 3],
    #[serde(with = "rat_matrix")]
    pub d: [[Rat; 3]; 3],
}

mod rat_matrix {
    use super::*;
    pub fn serialize<S: Serializer>(m: &[[Rat; 3]; 3], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(rat_string).collect()).collect();
        v.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[[Rat; 3]; 3], D::Error> {
        let v: Vec<Vec<String>> = Vec::deserialize(d)?;
        let mut out: [[Rat; 3]; 3] = Default::default();
        if v.len() != 3 || v.iter().any(|r| r.len() != 3) {
            return Err(serde::de::Error::custom("expected a 3x3 matrix"));
        }
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = parse_rat(&v[i][j]).ok_or_else(|| serde::de::Error::custom("bad rational"))?;
            }
        }
        Ok(out)
    }
}

mod rat_vector {
    use super::*;
    pub fn serialize<S: Serializer>(m: &[Rat; 3], s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(rat_string).collect::<Vec<_>>().serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rat; 3], D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        if v.len() != 3 {
            return Err(serde::de::Error::custom("expected 3 components"));
        }
        let mut out: [Rat; 3] = Default::default();
        for i in 0..3 {
            out[i] = parse_rat(&v[i]).ok_or_else(|| serde::de::Error::custom("bad rational"))?;
        }
        Ok(out)
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    if i == j || j == k || i == k {
        0
    } else if (i, j, k) == (0, 1, 2) || (i, j, k) == (1, 2, 0) || (i, j, k) == (2, 0, 1) {
        1
    } else {
        -1
    }
}

impl CovariantKTData {
    pub fn validate(&self) -> Result<(), GeometryError> {
        for i in 0..3 {
            for j in 0..3 {
                if self.a[i][j] != self.a[j][i] {
                    return Err(GeometryError::NotSymmetric("A"));
                }
                if self.b[i][j] != self.b[j][i] {
                    return Err(GeometryError::NotSymmetric("B"));
                }
                if self.d[i][j] != self.d[j][i] {
                    return Err(GeometryError::NotSymmetric("D"));
                }
            }
        }
        let tr = &self.b[0][0] + &self.b[1][1] + &self.b[2][2];
        if !tr.is_zero() {
            return Err(GeometryError::NotTraceless(rat_string(&tr)));
        }
        Ok(())
    }

    /// The twenty one-parameter data sets: A (6), B (5), λ (3), D (6).
    pub fn basis() -> Vec<CovariantKTData> {
        let sym_pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
        let sym = |(i, j): (usize, usize)| {
            let mut m: [[Rat; 3]; 3] = Default::default();
            m[i][j] = Rat::one();
            m[j][i] = Rat::one();
            m
        };
        let mut out = Vec::new();
        for p in sym_pairs {
            out.push(CovariantKTData { a: sym(p), ..Default::default() });
        }
        for k in 0..2 {
            let mut m: [[Rat; 3]; 3] = Default::default();
            m[k][k] = Rat::one();
            m[2][2] = -Rat::one();
            out.push(CovariantKTData { b: m, ..Default::default() });
        }
        for p in &sym_pairs[3..] {
            out.push(CovariantKTData { b: sym(*p), ..Default::default() });
        }
        for k in 0..3 {
            let mut l: [Rat; 3] = Default::default();
            l[k] = Rat::one();
            out.push(CovariantKTData { lambda: l, ..Default::default() });
        }
        for p in sym_pairs {
            out.push(CovariantKTData { d: sym(p), ..Default::default() });
        }
        out
    }
}

/// The covariant form of the general Killing tensor of E³.
pub fn kt_from_covariant(d: &CovariantKTData) -> Result<KillingTensor2, GeometryError> {
    d.validate()?;
    let qs = [x(), y(), z()];
    let num = |r: &Rat| Expr::num(r.clone());
    let comp = |i: usize, j: usize| {
        let mut terms = Vec::new();
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        let e = levi_civita(i, k, m) * levi_civita(j, l, n) + levi_civita(j, k, m) * levi_civita(i, l, n);
                        if e != 0 && !d.a[m][n].is_zero() {
                            terms.push(Expr::int(e) * num(&d.a[m][n]) * &qs[k] * &qs[l]);
                        }
                    }
                }
            }
        }
        for k in 0..3 {
            // B_(i^l ε_j)kl q^k
            for l in 0..3 {
                let e = &d.b[i][l] * rat(levi_civita(j, k, l), 2) + &d.b[j][l] * rat(levi_civita(i, k, l), 2);
                if !e.is_zero() {
                    terms.push(num(&e) * qs[k].clone());
                }
            }
            // λ_(i δ_j)k q^k − δ_ij λ_k q^k
            let mut c = Rat::zero();
            if j == k {
                c += &d.lambda[i] * rat(1, 2);
            }
            if i == k {
                c += &d.lambda[j] * rat(1, 2);
            }
            if i == j {
                c -= &d.lambda[k];
            }
            if !c.is_zero() {
                terms.push(num(&c) * qs[k].clone());
            }
        }
        terms.push(num(&d.d[i][j]));
        crate::symexpr::sum(terms)
    };
    Ok(KillingTensor2::from_upper(3, comp, Provenance::CovariantForm))
}

const UPPER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Monomials of degree ≤ 2 in three variables.
fn monomials() -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for i in 0..=2u32 {
        for j in 0..=2 - i {
            for k in 0..=2 - i - j {
                out.push(vec![i, j, k]);
            }
        }
    }
    out
}

/// Coefficient vector of a 3d tensor with polynomial entries of degree ≤ 2.
pub fn coefficient_vector(k: &KillingTensor2) -> Result<Vec<Rat>, GeometryError> {
    let mons = monomials();
    let mut out = Vec::with_capacity(6 * mons.len());
    for (a, b) in UPPER {
        let e = k.get(a, b);
        let f = to_rational_fraction(e)?;
        let coeffs = f.polynomial_in(&["q1", "q2", "q3"]).ok_or_else(|| GeometryError::NotPolynomial(e.to_string()))?;
        if coeffs.keys().any(|m| m.iter().sum::<u32>() > 2) {
            return Err(GeometryError::NotPolynomial(e.to_string()));
        }
        for m in &mons {
            out.push(coeffs.get(m).cloned().unwrap_or_else(Rat::zero));
        }
    }
    Ok(out)
}

/// Parameters a1..a20 of a 3d Killing tensor with polynomial entries, by exact linear solve.
pub fn params_of(k: &KillingTensor2) -> Result<KTParams, GeometryError> {
    static BASIS: OnceLock<Vec<Vec<Rat>>> = OnceLock::new();
    let basis = BASIS.get_or_init(|| {
        let cols: Vec<Vec<Rat>> =
            (1..=20).map(|i| coefficient_vector(&kt_from_params(&KTParams::one_hot(i))).expect("polynomial basis")).collect();
        (0..cols[0].len()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
    });
    let rhs = coefficient_vector(k)?;
    let sol = linalg::solve(basis, &rhs).ok_or_else(|| {
        let (component, residual) = kt_residual(k.components())
            .into_iter()
            .find(|(_, r)| !r.is_zero())
            .unwrap_or(((0, 0, 0), Expr::zero()));
        GeometryError::NotKT { component, residual }
    })?;
    let mut p = KTParams::zero();
    for (i, v) in sol.into_iter().enumerate() {
        p.a[i] = v;
    }
    Ok(p)
}

/// Column j holds the parameters a1..a20 of the j-th element of [`CovariantKTData::basis`].
pub fn covariant_to_params_matrix() -> &'static Vec<Vec<Rat>> {
    static MAP: OnceLock<Vec<Vec<Rat>>> = OnceLock::new();
    MAP.get_or_init(|| {
        let cols: Vec<KTParams> = CovariantKTData::basis()
            .iter()
            .map(|d| params_of(&kt_from_covariant(d).expect("valid basis")).expect("covariant form lies in the span"))
            .collect();
        (0..20).map(|i| cols.iter().map(|c| c.a[i].clone()).collect()).collect()
    })
}

/// The parameters a1..a20 of the covariant-form tensor, through the stored map.
pub fn covariant_to_params(d: &CovariantKTData) -> Result<KTParams, GeometryError> {
    d.validate()?;
    let coords = covariant_coordinates(d);
    let m = covariant_to_params_matrix();
    let mut p = KTParams::zero();
    for i in 0..20 {
        p.a[i] = m[i].iter().zip(&coords).map(|(x, y)| x * y).fold(Rat::zero(), |a, b| a + b);
    }
    Ok(p)
}

/// Coordinates of validated data in [`CovariantKTData::basis`].
fn covariant_coordinates(d: &CovariantKTData) -> Vec<Rat> {
    let mut c = Vec::with_capacity(20);
    c.extend([d.a[0][0].clone(), d.a[1][1].clone(), d.a[2][2].clone(), d.a[0][1].clone(), d.a[0][2].clone(), d.a[1][2].clone()]);
    // B = b00 (E00 - E22) + b11 (E11 - E22) + off-diagonals
    c.extend([d.b[0][0].clone(), d.b[1][1].clone(), d.b[0][1].clone(), d.b[0][2].clone(), d.b[1][2].clone()]);
    c.extend(d.lambda.iter().cloned());
    c.extend([d.d[0][0].clone(), d.d[1][1].clone(), d.d[2][2].clone(), d.d[0][1].clone(), d.d[0][2].clone(), d.d[1][2].clone()]);
    c
}

/// Rank report for a family of one-hot Killing tensors.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub dim: usize,
    pub parameters: Vec<String>,
    pub residuals_zero: bool,
    pub sample_points: usize,
    pub rank: usize,
}

fn sample_grid(dim: usize) -> Vec<Vec<Rat>> {
    // small distinct rational points, enough to separate quadratics
    let vals: [i64; 5] = [-2, -1, 1, 2, 3];
    let mut out = Vec::new();
    for (n, a) in vals.iter().enumerate() {
        for (m, b) in vals.iter().enumerate() {
            let c = vals[(n + 2 * m) % 5];
            let p = [rat(*a, 1), rat(*b, 2), rat(c, 3)];
            out.push(p[..dim].to_vec());
        }
    }
    out
}

/// Rank of the listed one-hot tensors (1-based parameter indices), restricted to `dim`.
pub fn kt_basis_rank(params: &[usize], dim: usize) -> Result<RankReport, GeometryError> {
    let pts = sample_grid(dim);
    let mut rows = Vec::new();
    let mut residuals_zero = true;
    for i in params {
        let k = kt_from_params(&KTParams::one_hot(*i)).restrict(dim);
        if check_kt(k.components()).is_err() {
            residuals_zero = false;
        }
        let mut row = Vec::new();
        for p in &pts {
            let mut b = Binding::new();
            for (j, v) in p.iter().enumerate() {
                b = b.set_exact(&format!("q{}", j + 1), v.clone());
            }
            for a in 0..dim {
                for c in a..dim {
                    match crate::symexpr::evaluate(k.get(a, c), &b)? {
                        crate::symexpr::Value::Exact(r) => row.push(r),
                        crate::symexpr::Value::Float(_) => unreachable!("polynomial tensor at rational point"),
                    }
                }
            }
        }
        rows.push(row);
    }
    Ok(RankReport {
        dim,
        parameters: params.iter().map(|i| format!("a{i}")).collect(),
        residuals_zero,
        sample_points: pts.len(),
        rank: linalg::rank(&rows),
    })
}

/// Independence of the full parameter family in dimension 3 (or its restriction to the plane).
pub fn kt_space_dimension_check(dim: usize) -> Result<RankReport, GeometryError> {
    kt_basis_rank(&(1..=20).collect::<Vec<_>>(), dim)
}

/// The parameters that survive in the plane q3 = 0: a3, a5, a6, a13, a15, a17.
pub const PLANE_PARAMS: [usize; 6] = [3, 5, 6, 13, 15, 17];
