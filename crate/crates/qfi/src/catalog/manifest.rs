//! Fixed drift-test cases: one entry per integral with its parameters,
//! interval and initial state.

use num_traits::Zero;

use super::{
    angular_momentum, j_nu, kepler_e3, kepler_time_dependent, lewis_invariant, oscillator_lambda, oscillator_linear,
    quadratic, constant_omega_integral, CatalogError, FirstIntegral, OscillatorLinear, OscillatorSpec,
};
use crate::symexpr::{parse_rat, rat, rat_int, sym_t, Expr, Rat};

/// Named rational parameters of a case.
pub type Params = Vec<(String, Rat)>;

type Builder = Box<dyn Fn(&Params) -> Result<FirstIntegral, CatalogError> + Send + Sync>;

pub struct DriftCase {
    pub id: String,
    /// Parameters appearing in the integral; each one is perturbed in turn.
    pub params: Params,
    pub interval: (f64, f64),
    pub q0: Vec<f64>,
    pub v0: Vec<f64>,
    build: Builder,
}

impl std::fmt::Debug for DriftCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftCase")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("interval", &self.interval)
            .field("q0", &self.q0)
            .field("v0", &self.v0)
            .finish()
    }
}

/// Scale by 1 + 10⁻³, or shift by 10⁻³ when zero.
pub fn perturb(r: &Rat) -> Rat {
    if r.is_zero() {
        rat(1, 1000)
    } else {
        r * rat(1001, 1000)
    }
}

impl DriftCase {
    pub fn integral(&self) -> Result<FirstIntegral, CatalogError> {
        (self.build)(&self.params)
    }

    /// The integral rebuilt with one parameter perturbed, for every parameter.
    /// The system to integrate stays the one of [`DriftCase::integral`].
    pub fn perturbed(&self) -> Result<Vec<(String, FirstIntegral)>, CatalogError> {
        let mut out = Vec::new();
        for i in 0..self.params.len() {
            let mut ps = self.params.clone();
            ps[i].1 = perturb(&ps[i].1);
            out.push((ps[i].0.clone(), (self.build)(&ps)?));
        }
        Ok(out)
    }
}

fn get(ps: &Params, name: &str) -> Expr {
    Expr::num(ps.iter().find(|(n, _)| n == name).map(|(_, r)| r.clone()).expect("declared parameter"))
}

fn params(list: &[(&str, &str)]) -> Params {
    list.iter().map(|(n, v)| (n.to_string(), parse_rat(v).expect("rational literal"))).collect()
}

fn case(
    id: impl Into<String>,
    ps: &[(&str, &str)],
    interval: (f64, f64),
    q0: &[f64],
    v0: &[f64],
    build: impl Fn(&Params) -> Result<FirstIntegral, CatalogError> + Send + Sync + 'static,
) -> DriftCase {
    DriftCase {
        id: id.into(),
        params: params(ps),
        interval,
        q0: q0.to_vec(),
        v0: v0.to_vec(),
        build: Box::new(build),
    }
}

fn pick(v: Vec<FirstIntegral>, i: usize) -> FirstIntegral {
    v.into_iter().nth(i).expect("component")
}

const Q_KEPLER: [f64; 3] = [1.0, 0.2, 0.1];
const V_KEPLER: [f64; 3] = [0.1, 0.9, 0.3];
const Q_OSC: [f64; 3] = [1.0, -0.5, 0.3];
const V_OSC: [f64; 3] = [0.2, 0.7, -0.4];

/// All drift cases, in a fixed order.
pub fn drift_manifest() -> Vec<DriftCase> {
    let mut out = Vec::new();
    for i in 1..=3 {
        out.push(case(format!("L{i}"), &[], (0.0, 10.0), &Q_KEPLER, &V_KEPLER, move |_| {
            let t = sym_t();
            angular_momentum(i, rat_int(1), Expr::one() / (Expr::one() + t))
        }));
    }
    for (nu, k, q0, v0, span) in [
        ("1", "1", Q_KEPLER, V_KEPLER, 10.0),
        ("2", "1/4", Q_KEPLER, V_KEPLER, 5.0),
        ("-2", "-1/2", Q_OSC, V_OSC, 10.0),
        ("3/2", "1", Q_KEPLER, V_KEPLER, 10.0),
    ] {
        let nur = parse_rat(nu).expect("nu");
        out.push(case(format!("H[nu={nu}]"), &[("k", k)], (0.0, span), &q0, &v0, move |p| {
            constant_omega_integral("H", &nur, &get(p, "k"))
        }));
    }
    let tensor_pairs = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];
    for (i, j) in tensor_pairs {
        let name = format!("B{i}{j}");
        let n2 = name.clone();
        out.push(case(name, &[("k", "-1/2")], (0.0, 10.0), &Q_OSC, &V_OSC, move |p| {
            constant_omega_integral(&n2, &rat_int(-2), &get(p, "k"))
        }));
    }
    for (suffix, k, span) in [("+", "1/2", 2.0), ("-", "1/2", 2.0), ("c", "-1/2", 10.0), ("s", "-1/2", 10.0)] {
        for a in 1..=3 {
            let name = format!("I3{a}{suffix}");
            let n2 = name.clone();
            out.push(case(name, &[("k", k)], (0.0, span), &Q_OSC, &V_OSC, move |p| {
                constant_omega_integral(&n2, &rat_int(-2), &get(p, "k"))
            }));
        }
    }
    for i in 1..=3 {
        let name = format!("R{i}");
        let n2 = name.clone();
        out.push(case(name, &[("k", "1")], (0.0, 10.0), &Q_KEPLER, &V_KEPLER, move |p| {
            constant_omega_integral(&n2, &rat_int(1), &get(p, "k"))
        }));
    }
    for name in ["I1", "I2"] {
        out.push(case(name, &[("k", "1/4")], (0.0, 5.0), &Q_KEPLER, &V_KEPLER, move |p| {
            constant_omega_integral(name, &rat_int(2), &get(p, "k"))
        }));
    }
    // under constant ω, J₂ = b0 H₂ − b1 I₂ − b2 I₁ stays an integral for any b, so only k is perturbed
    out.push(case("J[nu=2]", &[("k", "1/4")], (0.0, 5.0), &Q_KEPLER, &V_KEPLER, |p| {
        j_nu(&rat_int(2), &Expr::one(), &Expr::frac(1, 2), &Expr::frac(1, 4), &get(p, "k"))
    }));
    for (nu, k, q0, v0) in [
        ("1", "1", Q_KEPLER, V_KEPLER),
        ("-2", "-1", Q_OSC, V_OSC),
        ("3/2", "1", Q_KEPLER, V_KEPLER),
    ] {
        let nur = parse_rat(nu).expect("nu");
        out.push(case(
            format!("J[nu={nu}]"),
            &[("b0", "1"), ("b1", "1/2"), ("b2", "1/4"), ("k", k)],
            (0.0, 5.0),
            &q0,
            &v0,
            move |p| j_nu(&nur, &get(p, "b0"), &get(p, "b1"), &get(p, "b2"), &get(p, "k")),
        ));
    }
    let td = [("b0", "1"), ("b1", "1/2"), ("c11", "1")];
    out.push(case("E2", &td, (0.0, 10.0), &Q_KEPLER, &V_KEPLER, |p| {
        Ok(kepler_time_dependent(&get(p, "b0"), &get(p, "b1"), &get(p, "c11"))?.e2)
    }));
    for i in 0..3 {
        out.push(case(format!("A{}", i + 1), &td, (0.0, 10.0), &Q_KEPLER, &V_KEPLER, move |p| {
            Ok(pick(kepler_time_dependent(&get(p, "b0"), &get(p, "b1"), &get(p, "c11"))?.a, i))
        }));
    }
    out.push(case(
        "E3",
        &[("b0", "1"), ("b1", "1"), ("b2", "1"), ("k", "1")],
        (0.0, 5.0),
        &Q_KEPLER,
        &V_KEPLER,
        |p| kepler_e3(&get(p, "b0"), &get(p, "b1"), &get(p, "b2"), &get(p, "k")),
    ));
    // I_ij: Λ with a3 = b0 + b1 t + b2 t², so ω = k/(b0 + b1 t + b2 t²)²
    let iij = [("b0", "1"), ("b1", "1/2"), ("b2", "1/4"), ("c0", "2")];
    for (i, j) in tensor_pairs {
        out.push(case(format!("I{i}{j}"), &iij, (0.0, 5.0), &Q_OSC, &V_OSC, move |p| {
            let a3 = quadratic(&get(p, "b0"), &get(p, "b1"), &get(p, "b2"));
            let l = oscillator_lambda(&OscillatorSpec::A3 { a3, c0: get(p, "c0") })?;
            Ok(l[i - 1][j - 1].clone())
        }));
    }
    // f = 1 + t², c0 = 4
    let fps = [("f0", "1"), ("f1", "0"), ("f2", "1"), ("c0", "4")];
    let fspec = |p: &Params| OscillatorSpec::F {
        f: quadratic(&get(p, "f0"), &get(p, "f1"), &get(p, "f2")),
        c0: get(p, "c0"),
    };
    for (i, j) in tensor_pairs {
        out.push(case(format!("Lambda{i}{j}"), &fps, (0.0, 3.0), &Q_OSC, &V_OSC, move |p| {
            Ok(oscillator_lambda(&fspec(p))?[i - 1][j - 1].clone())
        }));
    }
    for which in [41, 42] {
        for i in 0..3 {
            out.push(case(format!("I{which}_{}", i + 1), &fps, (0.0, 3.0), &Q_OSC, &V_OSC, move |p| {
                match oscillator_linear(&fspec(p))? {
                    OscillatorLinear::Pair { i41, i42, .. } => Ok(pick(if which == 41 { i41 } else { i42 }, i)),
                    OscillatorLinear::Single(_) => unreachable!("c0 family yields a pair"),
                }
            }));
        }
    }
    let gps = [("g0", "1"), ("g1", "0"), ("g2", "1")];
    for i in 0..3 {
        out.push(case(format!("I4_{}", i + 1), &gps, (0.0, 3.0), &Q_OSC, &V_OSC, move |p| {
            let g = quadratic(&get(p, "g0"), &get(p, "g1"), &get(p, "g2"));
            match oscillator_linear(&OscillatorSpec::G { g })? {
                OscillatorLinear::Single(v) => Ok(pick(v, i)),
                OscillatorLinear::Pair { .. } => unreachable!("g family yields single integrals"),
            }
        }));
    }
    out.push(case("Lewis", &[("c0", "2")], (0.0, 10.0), &[1.0, 1.0], &[0.0, 0.0], |p| {
        let psi = Expr::one() + Expr::frac(1, 10) * sym_t().sin();
        lewis_invariant(&psi, &get(p, "c0"))
    }));
    out
}
