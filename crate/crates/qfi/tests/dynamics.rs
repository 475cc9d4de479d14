use proptest::prelude::*;
use qfi::catalog::{drift_manifest, constant_omega_integral, OscillatorSpec};
use qfi::conditions::DynSystem;
use qfi::dynamics::*;
use qfi::symexpr::{parse_rat, rat, rat_int, sym_t, Expr};

fn r(s: &str) -> qfi::symexpr::Rat {
    parse_rat(s).unwrap()
}

#[test]
fn sine_solution_after_half_period() {
    let sys = DynSystem::kepler_in(1, rat_int(-2), Expr::frac(-1, 2)).unwrap();
    let s0 = State::new(0.0, vec![0.0], vec![1.0]);
    let tr = integrate(&sys, &[], &s0, std::f64::consts::PI, &IntegratorConfig::default(), &[]).unwrap();
    assert!(tr.last().q[0].abs() < 1e-9);
    assert!((tr.last().v[0] + 1.0).abs() < 1e-9);
    assert!(tr.states.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn circular_kepler_orbit_keeps_radius() {
    let sys = DynSystem::kepler(rat_int(1), Expr::one()).unwrap();
    let s0 = State::new(0.0, vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    let tr = integrate(&sys, &[], &s0, std::f64::consts::TAU, &IntegratorConfig::default(), &[]).unwrap();
    for s in &tr.states {
        let rad = s.q.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((rad - 1.0).abs() < 1e-8);
    }
}

#[test]
fn output_times_are_hit_exactly() {
    let sys = DynSystem::kepler_in(1, rat_int(-2), Expr::frac(-1, 2)).unwrap();
    let s0 = State::new(0.0, vec![0.0], vec![1.0]);
    let outs = [0.5, 1.0, 2.5];
    let tr = integrate(&sys, &[], &s0, 3.0, &IntegratorConfig::default(), &outs).unwrap();
    let ts: Vec<f64> = tr.states.iter().map(|s| s.t).collect();
    assert_eq!(ts, vec![0.0, 0.5, 1.0, 2.5, 3.0]);
    assert!((tr.states[2].q[0] - 1f64.sin()).abs() < 1e-10);
}

#[test]
fn radial_infall_hits_the_singularity_guard() {
    let sys = DynSystem::kepler(rat_int(1), Expr::one()).unwrap();
    let s0 = State::new(0.0, vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]);
    let err = integrate(&sys, &[], &s0, 5.0, &IntegratorConfig::default(), &[]).unwrap_err();
    assert!(matches!(err, DynamicsError::Singular { .. }), "{err}");
}

#[test]
fn invalid_requests_are_rejected() {
    let sys = DynSystem::kepler(rat_int(1), Expr::one()).unwrap();
    let s0 = State::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]);
    assert!(matches!(
        integrate(&sys, &[], &s0, 1.0, &IntegratorConfig::default(), &[]),
        Err(DynamicsError::Precondition(_))
    ));
    let s0 = State::new(1.0, vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    assert!(integrate(&sys, &[], &s0, 0.5, &IntegratorConfig::default(), &[]).is_err());
}

#[test]
fn drift_rejects_integral_of_another_family() {
    let h2 = constant_omega_integral("H", &rat_int(2), &Expr::one()).unwrap();
    let sys = DynSystem::kepler(rat_int(1), Expr::one()).unwrap();
    let s0 = State::new(0.0, vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    let tr = integrate_for(&sys, &[], &s0, 1.0, &IntegratorConfig::default()).unwrap();
    assert!(matches!(drift(&h2, &tr), Err(DynamicsError::FamilyMismatch { .. })));
    let h1 = constant_omega_integral("H", &rat_int(1), &Expr::one()).unwrap();
    let rep = drift(&h1, &tr).unwrap();
    assert!(rep.max_rel < 1e-10);
    assert_eq!(rep.interval, (0.0, 1.0));
}

#[test]
fn energy_is_not_conserved_under_time_dependent_strength() {
    // the energy expression with k = 1, integrated under ω = 1/(1+t)
    let sys = DynSystem::kepler(rat_int(1), Expr::one() / (Expr::one() + sym_t())).unwrap();
    let h = constant_omega_integral("H", &rat_int(1), &Expr::one()).unwrap();
    let s0 = State::new(0.0, vec![1.0, 0.2, 0.1], vec![0.1, 0.9, 0.3]);
    let tr = integrate_for(&sys, &[], &s0, 5.0, &IntegratorConfig::default()).unwrap();
    let vals = tr.evaluate(&h.expr).unwrap();
    let dev = vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0, f64::max);
    assert!(dev > 1e-2);
}

#[test]
fn manifest_drifts_and_detector_sensitivity() {
    let cases = drift_manifest();
    let reports = run_drift_suite(&cases, &IntegratorConfig::default());
    assert_eq!(reports.len(), cases.len());
    for (case, rep) in cases.iter().zip(reports) {
        let rep = rep.unwrap_or_else(|e| panic!("{}: {e}", case.id));
        assert_eq!(rep.id, case.id);
        assert!(rep.nominal.max_rel <= 1e-8, "{} drift {}", rep.id, rep.nominal.max_rel);
        assert_eq!(rep.perturbed.len(), case.params.len());
        for p in &rep.perturbed {
            assert!(p.max_rel >= 1e-5, "{} perturbed in {} drifts only {}", rep.id, p.param, p.max_rel);
        }
    }
}

#[test]
fn drift_shrinks_as_tolerance_tightens() {
    let cases = drift_manifest();
    for id in ["H[nu=1]", "E2", "A1", "I41_1", "Lewis", "J[nu=3/2]"] {
        let case = cases.iter().find(|c| c.id == id).unwrap();
        let d: Vec<f64> = [1e-8, 1e-10, 1e-12]
            .iter()
            .map(|&tol| run_drift_case(case, &IntegratorConfig::with_tol(tol, tol)).unwrap().nominal.max_rel)
            .collect();
        assert!(d[1] <= 2.0 * d[0] && d[2] <= 2.0 * d[1], "{id}: {d:?}");
    }
}

#[test]
fn drift_report_json_fields() {
    let case = drift_manifest().into_iter().find(|c| c.id == "H[nu=2]").unwrap();
    let rep = run_drift_case(&case, &IntegratorConfig::default()).unwrap();
    let v = serde_json::to_value(&rep.nominal).unwrap();
    for key in ["integral", "family", "max_abs", "max_rel", "tol", "interval"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn csv_export_has_slot_header() {
    let spec = OscillatorSpec::F { f: Expr::one() + sym_t().powi(2), c0: Expr::int(4) };
    let theta = spec.theta().unwrap();
    let sys = DynSystem::kepler_in(2, rat_int(-2), qfi::catalog::oscillator_omega(&spec)).unwrap();
    let s0 = State::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]);
    let tr = integrate_for(&sys, &[&theta], &s0, 0.5, &IntegratorConfig::default()).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,q1,q2,v1,v2,theta");
    assert_eq!(lines.count(), tr.states.len());
}

#[test]
fn quadrature_of_smooth_functions() {
    let v = quadrature(&|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
    assert!((v - 2.0).abs() < 1e-12);
    let v = quadrature(&|x| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-13).unwrap();
    assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert_eq!(quadrature(&|x| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    assert!(quadrature(&|x| 1.0 / x, -1.0, 1.0, 1e-12).is_err());
}

#[test]
fn oscillator_solution_solves_the_equation_symbolically() {
    let f = Expr::func_of_t("f", None);
    let specs = [
        OscillatorSpec::F { f, c0: Expr::int(4) },
        OscillatorSpec::Rho { rho: Expr::func_of_t("rho", None), c0: Expr::int(2) },
        OscillatorSpec::F { f: Expr::one() + sym_t().powi(2), c0: Expr::int(4) },
    ];
    for spec in &specs {
        let v = oscillator_solution_residual(spec, 3).unwrap();
        assert!(v.is_zero(), "{spec:?}: {v:?}");
        assert_ne!(v.method(), qfi::symexpr::Method::Sampled);
    }
}

#[test]
fn oscillator_solution_harmonic_case() {
    // f = 1, c0 = 2: θ' = 1, so q = I41 sin θ − I42 cos θ
    let spec = OscillatorSpec::F { f: Expr::one(), c0: Expr::int(2) };
    let sol = oscillator_solution(&spec, &[Expr::int(3)], &[Expr::int(5)]).unwrap();
    let theta = spec.theta().unwrap();
    let expect = Expr::int(3) * theta.sin() - Expr::int(5) * theta.cos();
    let v = qfi::symexpr::is_identically_zero(&(&sol[0] - &expect), qfi::symexpr::Strategy::Algebraic).unwrap();
    assert!(v.is_zero());
    let bad = OscillatorSpec::F { f: Expr::one(), c0: Expr::int(-2) };
    assert!(oscillator_solution(&bad, &[Expr::one()], &[Expr::one()]).is_err());
    assert!(oscillator_solution(&OscillatorSpec::G { g: Expr::one() }, &[], &[]).is_err());
}

#[test]
fn oscillator_closed_form_matches_integration() {
    let spec = OscillatorSpec::F { f: Expr::one() + sym_t().powi(2), c0: Expr::int(4) };
    let cmp = compare_oscillator(&spec, &[1.0, -0.5, 0.3], &[0.2, 0.7, -0.4], (0.0, 3.0), 300, &IntegratorConfig::default())
        .unwrap();
    assert!(cmp.max_error <= 1e-6, "{cmp:?}");
    assert!(cmp.theta_error <= 1e-9, "{cmp:?}");
    assert_eq!(cmp.samples, 301);
}

#[test]
fn constant_amplitude_oscillator_has_linear_phase() {
    // ρ = ψ^(-1/2) with ψ = 4: θ' = ρ⁻² = ψ, q = ρ(I41 sin ψt − I42 cos ψt)
    let spec = OscillatorSpec::Rho { rho: Expr::frac(1, 2), c0: Expr::int(2) };
    let cmp = compare_oscillator(&spec, &[0.3], &[1.1], (0.0, 4.0), 200, &IntegratorConfig::default()).unwrap();
    assert!(cmp.max_error <= 1e-8, "{cmp:?}");
    assert!(cmp.theta_error <= 1e-9);
    // with θ(0) = 0: q(0) = −ρ I42 and q'(0) = ρψ I41
    assert!((-0.5 * cmp.i42[0] - 0.3).abs() < 1e-14);
    assert!((0.5 * 4.0 * cmp.i41[0] - 1.1).abs() < 1e-14);
}

#[test]
fn circular_orbit_has_zero_eccentricity() {
    let sol = kepler_orbit(&rat_int(1), &rat_int(0), &rat_int(1), 0.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
    assert!(sol.alpha < 1e-14);
    assert_eq!(sol.conic(), "circle");
    assert!((sol.radius(0.7, 3.0) - 1.0).abs() < 1e-14);
    assert!(sol.energy_relation_residual() < 1e-14);
}

#[test]
fn elliptic_orbit_satisfies_energy_relation() {
    let sol = kepler_orbit(&rat_int(1), &rat_int(0), &rat_int(1), 0.0, [1.0, 0.0, 0.0], [0.0, 1.2, 0.0]).unwrap();
    assert_eq!(sol.conic(), "ellipse");
    assert!(sol.energy_relation_residual() <= 1e-10);
    // perihelion at θ = 0: e = v²r/k − 1
    assert!((sol.alpha - 0.44).abs() < 1e-12);
    let tr = sol.integrate(10.0, 200, &IntegratorConfig::default()).unwrap();
    let chk = sol.validate(&tr).unwrap();
    assert!(chk.max_rel_r_error <= 1e-6, "{chk:?}");
    assert!(chk.max_rel_integral_form_error.is_none());
}

#[test]
fn time_dependent_orbit_matches_conic_reconstruction() {
    let sol = kepler_orbit(&rat_int(1), &rat(1, 10), &rat_int(1), 0.0, [1.0, 0.0, 0.0], [0.0, 1.1, 0.0]).unwrap();
    assert!(sol.energy_relation_residual() <= 1e-10);
    let tr = sol.integrate(5.0, 250, &IntegratorConfig::default()).unwrap();
    let chk = sol.validate(&tr).unwrap();
    assert!(chk.max_rel_r_error <= 1e-6, "{chk:?}");
    assert!(chk.max_rel_r_error_observed_theta <= 1e-6, "{chk:?}");
    assert!(chk.max_rel_l3_error <= 1e-9, "{chk:?}");
    assert!(chk.max_rel_integral_form_error.unwrap() <= 1e-6, "{chk:?}");
}

#[test]
fn orbit_preconditions() {
    let planar = [1.0, 0.0, 0.0];
    assert!(kepler_orbit(&rat_int(1), &rat_int(0), &rat_int(1), 0.0, [1.0, 0.0, 0.1], [0.0, 1.0, 0.0]).is_err());
    assert!(kepler_orbit(&rat_int(1), &rat_int(0), &rat_int(1), 0.0, planar, [2.0, 0.0, 0.0]).is_err());
    let sol = kepler_orbit(&rat_int(1), &r("-1/2"), &rat_int(1), 0.0, planar, [0.0, 1.0, 0.0]).unwrap();
    assert!(matches!(sol.integrate(3.0, 10, &IntegratorConfig::default()), Err(DynamicsError::Singular { .. })));
}

fn tilted_trajectory(q0: Vec<f64>, v0: Vec<f64>) -> Trajectory {
    let sys = DynSystem::kepler(rat_int(1), Expr::one()).unwrap();
    integrate_for(&sys, &[], &State::new(0.0, q0, v0), 3.0, &IntegratorConfig::default()).unwrap()
}

fn assert_round_trip(tr: &Trajectory, tol: f64) {
    let polar = polar_reduction(tr).unwrap();
    for (a, b) in tr.states.iter().zip(polar.to_cartesian()) {
        for i in 0..3 {
            assert!((a.q[i] - b.q[i]).abs() <= tol && (a.v[i] - b.v[i]).abs() <= tol);
        }
    }
}

#[test]
fn polar_reduction_of_planar_orbit_is_identity() {
    let tr = tilted_trajectory(vec![1.0, 0.0, 0.0], vec![0.0, 1.1, 0.0]);
    let p = polar_reduction(&tr).unwrap();
    assert!((p.rotation.matrix() - nalgebra::Matrix3::identity()).norm() < 1e-15);
    assert!(p.points.iter().all(|pt| pt.z.abs() < 1e-15));
    // r²θ̇ stays L3
    assert!(p.points.iter().all(|pt| (pt.r * pt.r * pt.theta_dot - 1.1).abs() < 1e-9));
}

#[test]
fn polar_reduction_rotates_y_momentum_onto_z() {
    // q = x̂, v = −ẑ gives L = ŷ
    let tr = tilted_trajectory(vec![1.0, 0.0, 0.0], vec![0.0, 0.0, -1.0]);
    let p = polar_reduction(&tr).unwrap();
    let l = nalgebra::Vector3::new(0.0, 1.0, 0.0);
    assert!((p.rotation * l - nalgebra::Vector3::z()).norm() < 1e-15);
    assert!((p.rotation.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert_round_trip(&tr, 1e-12);
}

#[test]
fn polar_reduction_handles_antiparallel_momentum() {
    let tr = tilted_trajectory(vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0]);
    let p = polar_reduction(&tr).unwrap();
    assert!(p.points.iter().all(|pt| pt.theta_dot > 0.0 && pt.z.abs() < 1e-12));
    assert_round_trip(&tr, 1e-12);
}

#[test]
fn polar_reduction_needs_angular_momentum() {
    let sys = DynSystem::kepler(rat_int(-2), Expr::frac(-1, 2)).unwrap();
    let tr = integrate_for(&sys, &[], &State::new(0.0, vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]), 1.0, &IntegratorConfig::default())
        .unwrap();
    assert!(polar_reduction(&tr).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn polar_round_trip_for_tilted_orbits(
        q in prop::array::uniform3(-1.0f64..1.0),
        v in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let qv = nalgebra::Vector3::from(q);
        let vv = nalgebra::Vector3::from(v);
        prop_assume!(qv.norm() > 0.5 && qv.cross(&vv).norm() > 0.2);
        let sys = DynSystem::kepler(rat_int(-2), Expr::frac(-1, 2)).unwrap();
        let tr = integrate_for(&sys, &[], &State::new(0.0, q.to_vec(), v.to_vec()), 2.0, &IntegratorConfig::default()).unwrap();
        let polar = polar_reduction(&tr).unwrap();
        for (a, b) in tr.states.iter().zip(polar.to_cartesian()) {
            for i in 0..3 {
                prop_assert!((a.q[i] - b.q[i]).abs() <= 1e-12);
                prop_assert!((a.v[i] - b.v[i]).abs() <= 1e-12);
            }
        }
        prop_assert!(polar.points.iter().all(|p| p.z.abs() < 1e-9));
    }

    #[test]
    fn quadrature_integrates_cubics(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, x1 in 0.1f64..3.0) {
        let f = move |x: f64| a + b * x + c * x * x * x;
        let exact = a * x1 + b * x1 * x1 / 2.0 + c * x1.powi(4) / 4.0;
        let got = quadrature(&f, 0.0, x1, 1e-13).unwrap();
        prop_assert!((got - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
    }
}
