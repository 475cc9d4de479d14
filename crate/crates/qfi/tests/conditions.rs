use proptest::prelude::*;
use qfi::conditions::*;
use qfi::symexpr::{self, eval_f64, q, rat, rat_int, sym_t, v, Binding, Expr, Rat, Strategy as Zs};

fn p(s: &str) -> Expr {
    symexpr::parse(s).unwrap()
}

fn zero(e: &Expr) -> bool {
    symexpr::is_identically_zero(e, Zs::Auto).unwrap().is_zero()
}

fn oscillator(dim: usize, omega: Expr) -> DynSystem {
    DynSystem::new(dim, omega, (1..=dim).map(q).collect()).unwrap()
}

#[test]
fn total_derivative_examples() {
    let sys = oscillator(1, Expr::one());
    let e = QFICandidate::from_expr(&((v(1).powi(2) + q(1).powi(2)) * Expr::frac(1, 2)), 1).unwrap();
    assert!(zero(&total_time_derivative(&e, &sys).unwrap()));

    let w = Expr::func_of_t("w", None);
    let kep = DynSystem::kepler(rat_int(1), w).unwrap();
    let l3 = QFICandidate::from_expr(&(q(1) * v(2) - q(2) * v(1)), 3).unwrap();
    assert!(zero(&total_time_derivative(&l3, &kep).unwrap()));

    let unit = DynSystem::new(1, Expr::one(), vec![Expr::one()]).unwrap();
    let c = QFICandidate::from_expr(&v(1), 1).unwrap();
    let dt = total_time_derivative(&c, &unit).unwrap();
    assert!(zero(&(dt + Expr::one())));
}

#[test]
fn hamiltonians_have_zero_residuals() {
    for nu in [rat_int(-2), rat_int(1), rat_int(2)] {
        let sys = DynSystem::kepler(nu.clone(), Expr::int(3)).unwrap();
        let h = (v(1).powi(2) + v(2).powi(2) + v(3).powi(2)) * Expr::frac(1, 2)
            - Expr::int(3) * radius_pow(3, -nu.clone());
        let c = QFICandidate::from_expr(&h, 3).unwrap();
        let r = determining_residuals(&c, &sys, Zs::Exact).unwrap();
        assert!(r.all_zero, "nu = {nu}");
    }
    let sys = DynSystem::kepler(rat(3, 2), Expr::int(3)).unwrap();
    let h = (v(1).powi(2) + v(2).powi(2) + v(3).powi(2)) * Expr::frac(1, 2) - Expr::int(3) * radius_pow(3, rat(-3, 2));
    let c = QFICandidate::from_expr(&h, 3).unwrap();
    assert!(determining_residuals(&c, &sys, Zs::sampled_default()).unwrap().all_zero);
}

#[test]
fn metric_candidate_fails_vector_scalar_group() {
    // K_ab = δ, ω = 1 + t, Q = x: the vector-scalar residual is −2 ω x
    let sys = oscillator(1, p("(+ 1 t)"));
    let mut c = QFICandidate::zero(1);
    c.kab[0][0] = Expr::one();
    let r = determining_residuals(&c, &sys, Zs::Exact).unwrap();
    assert!(r.group("killing-tensor").unwrap().zero);
    assert!(r.group("tensor-vector").unwrap().zero);
    let g = r.group("vector-scalar").unwrap();
    assert!(!g.zero);
    let b = Binding::new().set("t", 1.0).set("q1", 2.0);
    assert_eq!(eval_f64(&g.components[0].1, &b).unwrap(), -8.0);
    assert!(!r.all_zero);

    let r = determining_residuals(&QFICandidate::zero(1), &sys, Zs::Exact).unwrap();
    assert!(r.all_zero);
    assert_eq!(r.groups.len(), 6);
}

#[test]
fn damped_systems_are_rejected() {
    let sys = oscillator(1, Expr::one()).with_damping(Expr::one());
    assert!(matches!(determining_residuals(&QFICandidate::zero(1), &sys, Zs::Exact), Err(ConditionError::Unsupported(_))));
    assert!(matches!(DynSystem::new(1, Expr::zero(), vec![q(1)]), Err(ConditionError::ZeroOmega)));
}

#[test]
fn json_inputs() {
    let sys = DynSystem::from_json(r#"{"dim":1,"omega":"(+ 1 t)","Q":["q1"]}"#).unwrap();
    assert_eq!(sys.dim, 1);
    let k = DynSystem::from_json(r#"{"nu":"1","omega":"3"}"#).unwrap();
    assert_eq!(k.dim, 3);
    assert!(DynSystem::from_json(r#"{"omega":"0","Q":["q1"]}"#).is_err());
    let c = QFICandidate::from_json(r#"{"I":"(+ (^ v1 2) (^ q1 2))"}"#, 1).unwrap();
    assert_eq!(c.kab[0][0], Expr::one());
    let c2 = QFICandidate::from_json(r#"{"Kab":[["1"]],"Ka":["0"],"K":"(^ q1 2)"}"#, 1).unwrap();
    assert_eq!(c, c2);
    assert!(QFICandidate::from_json(r#"{"I":"(^ v1 3)"}"#, 1).is_err());
    assert!(QFICandidate::from_json(r#"{"I":"q2"}"#, 1).is_err());
}

#[test]
fn noether_homothetic_case() {
    // rotation in the plane, radial potential, constant ω
    let r = symexpr::radius(2);
    let pot = r.recip();
    let qv = vec![pot.diff("q1"), pot.diff("q2")];
    let sys = DynSystem::new(2, Expr::int(3), qv.clone()).unwrap();
    let mut d = NoetherData::new(pot.clone());
    d.c = rat_int(1);
    d.ka = vec![q(2), -q(1)];
    let rep = point_noether_case(NoetherCase::Homothetic, &d, &sys, Zs::Auto).unwrap();
    assert!(rep.passed, "{:?}", rep.first_failure());
    assert!(rep.residuals.unwrap().all_zero);
    let c = rep.candidate.unwrap();
    assert!(zero(&total_time_derivative(&c, &sys).unwrap()));

    let sys2 = DynSystem::new(2, p("(+ 1 t)"), qv).unwrap();
    let rep = point_noether_case(NoetherCase::Homothetic, &d, &sys2, Zs::Auto).unwrap();
    assert!(!rep.passed);
    assert_eq!(rep.first_failure().unwrap().name, "omega-log-derivative");
}

#[test]
fn noether_potential_hessian_case() {
    // V = r²/2: ψ = 1, d2 = −4, k = 0, M = cos 2t, N = sin(2t)/2
    let pot = symexpr::radius(2).powi(2) * Expr::frac(1, 2);
    let sys = oscillator(2, Expr::one());
    let two_t = Expr::int(2) * sym_t();
    let mut d = NoetherData::new(pot);
    d.psi = rat_int(1);
    d.d2 = rat_int(-4);
    d.m = two_t.cos();
    d.n = two_t.sin() * Expr::frac(1, 2);
    let rep = point_noether_case(NoetherCase::PotentialHomothetic, &d, &sys, Zs::Auto).unwrap();
    assert!(rep.passed, "{:?}", rep.first_failure());
    assert!(rep.residuals.unwrap().all_zero);

    // shifting V keeps Q and the hessian but breaks the potential constraint
    let mut bad = d.clone();
    bad.potential = &bad.potential + Expr::one();
    let rep = point_noether_case(NoetherCase::PotentialHomothetic, &bad, &sys, Zs::Auto).unwrap();
    assert_eq!(rep.first_failure().unwrap().name, "potential-constraint");
}

#[test]
fn noether_gradient_case() {
    // S = V = x²/2, ψ = 1, ω = 1: d1 = 0 and m = −4, so M'' = −4M
    let pot = q(1).powi(2) * Expr::frac(1, 2);
    let sys = oscillator(1, Expr::one());
    let two_t = Expr::int(2) * sym_t();
    let mut d = NoetherData::new(pot.clone());
    d.psi = rat_int(1);
    d.s = pot;
    d.mconst = rat_int(-4);
    d.d1 = rat_int(0);
    d.m = two_t.cos();
    d.n = two_t.sin() * Expr::frac(1, 2);
    let rep = point_noether_case(NoetherCase::GradientHomothetic, &d, &sys, Zs::Auto).unwrap();
    assert!(rep.passed, "{:?}", rep.first_failure());
    assert!(rep.residuals.unwrap().all_zero);
}

fn uniform_force(b0: i64, b1: i64) -> (Theorem1Data, DynSystem) {
    let b = vec![rat_int(b0), rat_int(b1)];
    let sys = DynSystem::new(1, omega_polynomial(&b), vec![Expr::one()]).unwrap();
    let d = Theorem1Data {
        n: 0,
        ell: 1,
        b,
        c0: vec![vec![Expr::zero()]],
        l: vec![vec![Expr::one()]],
        s: rat_int(1),
        g: Expr::zero(),
    };
    (d, sys)
}

#[test]
fn uniform_force_linear_integral() {
    let (d, sys) = uniform_force(2, 3);
    let rep = theorem1_check_in(&d, &sys, Zs::Exact).unwrap();
    assert!(rep.passed, "{:?}", rep.first_failure());
    assert_eq!(rep.conserved, Some(true));
    assert!(rep.residuals.unwrap().all_zero);
    // ẋ + b0 t + b1 t²/2
    let want = v(1) + Expr::int(2) * sym_t() + Expr::frac(3, 2) * sym_t().powi(2);
    assert!(zero(&(rep.candidate.unwrap().to_expr() - want)));

    let mut bad = d.clone();
    bad.c0 = vec![vec![Expr::one()]];
    let rep = theorem1_check_in(&bad, &sys, Zs::Exact).unwrap();
    assert_eq!(rep.first_failure().unwrap().name, "C0 Q = 0");
}

/// ẍ = −ω x^(−2ℓ−3) with L0 = αx and the ℓ-specific C0 and G.
fn first_order(b: &[i64], c0: Rat, alpha: i64) -> (Theorem1Data, DynSystem) {
    let ell = b.len() - 1;
    let b: Vec<Rat> = b.iter().map(|x| rat_int(*x)).collect();
    let qx = q(1).powi(-(2 * ell as i64 + 3));
    let sys = DynSystem::new(1, omega_polynomial(&b), vec![qx]).unwrap();
    // G' = 2 b0 C0 Q
    let gcoef = rat_int(2) * &b[0] * &c0 / rat_int(-(2 * ell as i64 + 2));
    let d = Theorem1Data {
        n: 1,
        ell,
        b,
        c0: vec![vec![Expr::num(c0)]],
        l: vec![vec![Expr::int(alpha) * q(1)], vec![Expr::zero()]],
        s: rat_int(0),
        g: Expr::num(gcoef) * q(1).powi(-(2 * ell as i64 + 2)),
    };
    (d, sys)
}

fn valid_first_order(ell: usize) -> (Theorem1Data, DynSystem) {
    match ell {
        1 => first_order(&[2, 3], rat(-2, 3) * rat_int(5), 5),
        2 => first_order(&[1, 2, 1], rat_int(-5), 5),
        _ => first_order(&[1, 3, 3, 1], rat_int(-5), 5),
    }
}

#[test]
fn first_order_instances_pass() {
    for ell in 1..=3 {
        let (d, sys) = valid_first_order(ell);
        let rep = theorem1_check_in(&d, &sys, Zs::Exact).unwrap();
        assert!(rep.passed, "ell={ell}: {:?}", rep.first_failure());
        assert_eq!(rep.conserved, Some(true));
        assert!(rep.residuals.unwrap().all_zero);
    }
}

fn first_failure(d: &Theorem1Data, sys: &DynSystem) -> String {
    theorem1_check_in(d, sys, Zs::Exact).unwrap().first_failure().unwrap().label()
}

#[test]
fn first_order_mutants_are_named() {
    let (mut d, sys) = valid_first_order(1);
    d.s = rat_int(1);
    assert_eq!(first_failure(&d, &sys), "L1·Q = s");
    let (d, _) = valid_first_order(1);
    let wrong_q = DynSystem::new(1, sys.omega.clone(), vec![q(1).powi(-4)]).unwrap();
    assert_eq!(first_failure(&d, &wrong_q), "(L0·Q)_,a = -4 L0(a;b) Q");
    let (mut d, sys) = valid_first_order(1);
    d.c0 = vec![vec![Expr::one()]];
    assert_eq!(first_failure(&d, &sys), "C0 Q = -(b0/b1) L0(a;b) Q");

    let (mut d, sys) = valid_first_order(2);
    d.c0 = vec![vec![Expr::one()]];
    assert_eq!(first_failure(&d, &sys), "C0 Q = -b1/(2 b2) L0(a;b) Q");
    let (d, sys) = first_order(&[2, 2, 1], rat_int(-5), 5);
    assert_eq!(first_failure(&d, &sys), "(b0 - b1^2/(4 b2)) L0(a;b) Q = 0");
    let (d, sys) = first_order(&[1, 2, 1], rat_int(-5), 5);
    let wrong_q = DynSystem::new(1, sys.omega.clone(), vec![q(1).powi(-5)]).unwrap();
    assert_eq!(first_failure(&d, &wrong_q), "(L0·Q)_,a = -6 L0(a;b) Q");

    let (mut d, sys) = valid_first_order(3);
    d.c0 = vec![vec![Expr::one()]];
    assert_eq!(first_failure(&d, &sys), "C0 Q = -b2/(3 b3) L0(a;b) Q");
    let (d, sys) = first_order(&[2, 3, 3, 1], rat_int(-5), 5);
    assert_eq!(first_failure(&d, &sys), "(b0 - b1 b2/(9 b3)) L0(a;b) Q = 0");
    let (d, sys) = first_order(&[2, 6, 3, 1], rat_int(-5), 5);
    assert_eq!(first_failure(&d, &sys), "(b1 - b2^2/(3 b3)) L0(a;b) Q = 0");
    let (d, sys) = valid_first_order(3);
    let wrong_q = DynSystem::new(1, sys.omega.clone(), vec![q(1).powi(-7)]).unwrap();
    assert_eq!(first_failure(&d, &wrong_q), "(L0·Q)_,a = -8 L0(a;b) Q");
}

#[test]
fn wrong_omega_is_a_precondition_error() {
    let (d, _) = uniform_force(2, 3);
    let sys = DynSystem::new(1, Expr::one(), vec![Expr::one()]).unwrap();
    assert!(matches!(theorem1_check_in(&d, &sys, Zs::Exact), Err(ConditionError::Precondition(_))));
}

#[test]
fn integrals_embed_in_the_next_order() {
    let cases = [uniform_force(2, 3), valid_first_order(1), valid_first_order(2), valid_first_order(3)];
    for (d, sys) in cases {
        let low = theorem1_check_in(&d, &sys, Zs::Exact).unwrap();
        let high = theorem1_check_in(&d.padded(), &sys, Zs::Exact).unwrap();
        assert!(high.passed, "{:?}", high.first_failure());
        let diff = low.candidate.unwrap().to_expr() - high.candidate.unwrap().to_expr();
        assert!(zero(&diff));
        assert!(zero(&(d.integral(&sys.q).to_expr() - d.padded().integral(&sys.q).to_expr())));
    }
}

#[test]
fn exponential_integral_checks() {
    let b0 = rat_int(1);
    let b1 = rat_int(2);
    let sys = oscillator(3, p("(+ 1 (* 2 t))"));
    let zero_l = vec![Expr::zero(); 3];
    let rep = theorem1_check_ie(&zero_l, &rat_int(1), &b0, &b1, &sys, Zs::Exact).unwrap();
    assert!(rep.passed);
    assert!(rep.candidate.unwrap().to_expr().is_zero());

    // L = q, Q = q: the first condition wants λ³ = 2 b1, the second λ³ = −2 b1
    let l: Vec<Expr> = (1..=3).map(q).collect();
    let rep = theorem1_check_ie(&l, &rat_int(1), &b0, &b1, &sys, Zs::Exact).unwrap();
    assert_eq!(rep.first_failure().unwrap().name, "(L·Q)_,a = λ³/b1 L_a");
    let half = oscillator(3, p("(+ 1 (* 1/2 t))"));
    let rep = theorem1_check_ie(&l, &rat_int(1), &b0, &rat(1, 2), &half, Zs::Exact).unwrap();
    assert!(rep.conditions[1].holds);
    assert_eq!(rep.first_failure().unwrap().name, "λ³ L_a = -2 b1 L(a;b) Q");

    let cubic = vec![q(1).powi(3), Expr::zero(), Expr::zero()];
    let rep = theorem1_check_ie(&cubic, &rat_int(1), &b0, &b1, &sys, Zs::Exact).unwrap();
    assert_eq!(rep.first_failure().unwrap().name, "L(a;b) is a KT");

    assert!(theorem1_check_ie(&l, &rat_int(0), &b0, &b1, &sys, Zs::Exact).is_err());
}

#[test]
fn exponential_integral_search_finds_nothing() {
    let line = ie_search(&IeSearchConfig::line());
    assert_eq!(line.examined, 124 * 125 * 4);
    assert!(line.solutions.is_empty());
    let plane = ie_search(&IeSearchConfig::plane());
    assert_eq!(plane.examined, 728 * 729 * 4);
    assert!(plane.solutions.is_empty());
}

#[test]
fn kepler_reduction_branches() {
    let r = kepler_reduction(&rat_int(2)).unwrap();
    assert_eq!(r.branch, "general");
    let c = r.families.iter().find(|f| f.name == "constant").unwrap();
    assert_eq!(c.omega, Expr::sym("k"));
    assert!(r.families.iter().all(|f| f.satisfied));
    assert!(r.vanishing.contains(&17) && r.vanishing.contains(&2));

    let r = kepler_reduction(&rat_int(1)).unwrap();
    assert_eq!(r.branch, "kepler");
    let names: Vec<_> = r.families.iter().map(|f| f.name.as_str()).collect();
    assert!(names.contains(&"arbitrary") && names.contains(&"inverse-linear") && names.contains(&"inverse-sqrt-quadratic"));
    assert!(r.families.iter().all(|f| f.satisfied), "{:?}", r.families.iter().map(|f| (&f.name, f.satisfied)).collect::<Vec<_>>());
    assert_eq!(r.linear_in_t, vec![2, 5, 11]);
    assert!(!r.vanishing.contains(&2));

    let r = kepler_reduction(&rat_int(-2)).unwrap();
    assert_eq!(r.branch, "oscillator");
    assert!(r.families.iter().all(|f| f.satisfied));
    assert!(!r.vanishing.contains(&17));
    assert!(r.equal.iter().all(|e| *e != (3, 9)));

    for nu in [rat_int(3), rat(1, 2), rat(-5, 3)] {
        let r = kepler_reduction(&nu).unwrap();
        assert!(r.families.iter().all(|f| f.satisfied), "nu = {nu}");
    }
    assert!(kepler_reduction(&rat_int(0)).is_err());
    assert!(serde_json::to_string(&kepler_reduction(&rat_int(1)).unwrap()).unwrap().contains("\"branch\":\"kepler\""));
}

fn oscillator_integrals() -> Vec<Expr> {
    vec![
        v(1).powi(2) + v(2).powi(2) + q(1).powi(2) + q(2).powi(2),
        q(1) * v(2) - q(2) * v(1),
        v(1).powi(2) + q(1).powi(2),
        v(1) * v(2) + q(1) * q(2),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn residuals_vanish_iff_derivative_vanishes(
        coeffs in proptest::collection::vec(-3i64..=3, 4),
        perturb in 0i64..=2,
        power in (0i64..=2, 0i64..=2, 0i64..=1),
        slot in 0usize..4,
    ) {
        let sys = oscillator(2, Expr::one());
        let mut e = symexpr::sum(coeffs.iter().zip(oscillator_integrals()).map(|(c, i)| Expr::int(*c) * i));
        let mono = sym_t().powi(power.0) * q(1).powi(power.1) * q(2).powi(power.2);
        let vel = [Expr::one(), v(1), v(2), v(1) * v(2)][slot].clone();
        e = e + Expr::int(perturb) * mono * vel;
        let c = QFICandidate::from_expr(&e, 2).unwrap();
        let dt = total_time_derivative(&c, &sys).unwrap();
        let rep = determining_residuals(&c, &sys, Zs::Exact).unwrap();
        prop_assert_eq!(rep.all_zero, zero(&dt));
        if perturb == 0 {
            prop_assert!(rep.all_zero);
        }
    }
}
