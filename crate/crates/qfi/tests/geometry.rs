use proptest::prelude::*;
use qfi::geometry::*;
use qfi::symexpr::{self, q, rat, rat_int, Expr, Rat};

fn same(a: &Expr, b: &Expr) -> bool {
    symexpr::is_identically_zero(&(a - b), symexpr::Strategy::Exact).unwrap().is_zero()
}

fn tensors_equal(a: &KillingTensor2, b: &KillingTensor2) -> bool {
    (0..3).all(|i| (0..3).all(|j| same(a.get(i, j), b.get(i, j))))
}

fn poly(src: &str) -> Expr {
    symexpr::parse(src).unwrap()
}

#[test]
fn constant_parameters_give_identity() {
    let p = KTParams::zero().with(3, rat_int(1)).with(9, rat_int(1)).with(13, rat_int(1));
    assert!(tensors_equal(&kt_from_params(&p), &KillingTensor2::identity(3)));
    assert!(tensors_equal(&kt_from_params(&KTParams::zero()), &KillingTensor2::zero(3)));
}

#[test]
fn rotation_square_tensor() {
    let k = kt_from_params(&KTParams::one_hot(6).with(6, rat_int(2)));
    assert!(same(k.get(0, 0), &q(2).powi(2)));
    assert!(same(k.get(1, 1), &q(1).powi(2)));
    assert!(same(k.get(0, 1), &-(q(1) * q(2))));
    for (a, b) in [(0, 2), (1, 2), (2, 2)] {
        assert!(k.get(a, b).is_zero());
    }
}

#[test]
fn one_hot_tensors_have_zero_residual() {
    for i in 1..=20 {
        let k = kt_from_params(&KTParams::one_hot(i));
        for (c, r) in kt_residual(k.components()) {
            assert!(symexpr::to_rational_fraction(&r).unwrap().is_zero(), "a{i} component {c:?}");
        }
    }
}

#[test]
fn residual_detects_non_killing() {
    let mut m = vec![vec![Expr::zero(); 3]; 3];
    m[0][0] = q(1);
    let res = kt_residual(&m);
    assert_eq!(res[0].0, (0, 0, 0));
    assert_eq!(res[0].1, Expr::one());
    assert!(matches!(KillingTensor2::custom(m), Err(GeometryError::NotKT { .. })));
    let id = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]];
    assert!(kt_residual(&id).iter().all(|(_, r)| r.is_zero()));
}

#[test]
fn vector_generated_examples() {
    let k = kt_from_vector(&generating_vector(&KTParams::one_hot(3))).unwrap();
    let mut want = vec![vec![Expr::zero(); 3]; 3];
    want[0][0] = Expr::one();
    assert_eq!(k.components(), &want[..]);
    // translation and rotation generate nothing
    let k = kt_from_vector(&[Expr::one(), Expr::zero(), Expr::zero()]).unwrap();
    assert!(tensors_equal(&k, &KillingTensor2::zero(3)));
    let k = kt_from_vector(&[q(2), -q(1), Expr::zero()]).unwrap();
    assert!(tensors_equal(&k, &KillingTensor2::zero(3)));
    // x^3 is outside the generating family
    assert!(matches!(kt_from_vector(&[q(1).powi(3), Expr::zero(), Expr::zero()]), Err(GeometryError::NotKT { .. })));
}

#[test]
fn killing_vectors_generate_zero() {
    for kv in KillingVectorE3::basis() {
        let k = kt_from_vector(&kv.field()).unwrap();
        assert!(tensors_equal(&k, &KillingTensor2::zero(3)));
    }
    let h = homothetic_vector(rat(1, 2), &KillingVectorE3::default(), 3);
    let g = symmetrized_gradient(&h);
    assert_eq!(g[1][1], Expr::frac(1, 2));
    assert!(g[0][1].is_zero());
}

#[test]
fn covariant_examples() {
    let d = CovariantKTData { d: [[rat_int(1), rat_int(0), rat_int(0)], [rat_int(0), rat_int(1), rat_int(0)], [rat_int(0), rat_int(0), rat_int(1)]], ..Default::default() };
    assert!(tensors_equal(&kt_from_covariant(&d).unwrap(), &KillingTensor2::identity(3)));

    // A = δ/2: r²δ − q q, matched by exact solve to a1 = a6 = a7 = 2
    let mut d = CovariantKTData::default();
    for i in 0..3 {
        d.a[i][i] = rat(1, 2);
    }
    let k = kt_from_covariant(&d).unwrap();
    assert!(same(k.get(0, 0), &poly("(+ (^ q2 2) (^ q3 2))")));
    assert!(same(k.get(1, 2), &poly("(* -1 q2 q3)")));
    let p = params_of(&k).unwrap();
    let want = KTParams::zero().with(1, rat_int(2)).with(6, rat_int(2)).with(7, rat_int(2));
    assert_eq!(p, want);
    assert_eq!(covariant_to_params(&d).unwrap(), want);

    // λ = (1,0,0): (λ_(i δ_j)k − δ_ij λ_k) q^k
    let d = CovariantKTData { lambda: [rat_int(1), rat_int(0), rat_int(0)], ..Default::default() };
    let k = kt_from_covariant(&d).unwrap();
    assert!(k.get(0, 0).is_zero());
    assert!(same(k.get(0, 1), &(q(2) * Expr::frac(1, 2))));
    assert!(same(k.get(0, 2), &(q(3) * Expr::frac(1, 2))));
    assert!(same(k.get(1, 1), &-q(1)));
    assert!(same(k.get(2, 2), &-q(1)));
    assert!(k.get(1, 2).is_zero());

    let mut bad = CovariantKTData::default();
    bad.b[0][0] = rat_int(1);
    assert!(matches!(kt_from_covariant(&bad), Err(GeometryError::NotTraceless(_))));
}

#[test]
fn covariant_map_is_invertible() {
    assert_eq!(qfi::linalg::rank(covariant_to_params_matrix()), 20);
    for d in CovariantKTData::basis() {
        let k = kt_from_covariant(&d).unwrap();
        assert!(kt_residual(k.components()).iter().all(|(_, r)| symexpr::to_rational_fraction(r).unwrap().is_zero()));
    }
}

#[test]
fn dimension_counts() {
    let r = kt_space_dimension_check(3).unwrap();
    assert!(r.residuals_zero);
    assert_eq!(r.rank, 20);
    assert_eq!(kt_space_dimension_check(2).unwrap().rank, 6);
    assert_eq!(kt_basis_rank(&PLANE_PARAMS, 2).unwrap().rank, 6);
    assert_eq!(kt_basis_rank(&[3, 9, 13], 3).unwrap().rank, 3);
    assert_eq!(kt_basis_rank(&[3, 3, 9, 13, 13], 3).unwrap().rank, 3);
}

#[test]
fn params_json_roundtrip() {
    let p = KTParams::zero().with(1, rat(-3, 4)).with(20, rat_int(5));
    let s = serde_json::to_string(&p).unwrap();
    assert!(s.starts_with("{\"a1\":\"-3/4\",\"a2\":\"0\""));
    let back: KTParams = serde_json::from_str(&s).unwrap();
    assert_eq!(back, p);
    assert!(serde_json::from_str::<KTParams>("{\"a21\":\"1\"}").is_err());
}

fn params() -> impl Strategy<Value = KTParams> {
    proptest::collection::vec((-6i64..=6, 1i64..=4), 20).prop_map(|v| {
        let mut p = KTParams::zero();
        for (i, (n, d)) in v.into_iter().enumerate() {
            p.a[i] = Rat::new(n.into(), d.into());
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_params_are_killing(p in params()) {
        let k = kt_from_params(&p);
        for (_, r) in kt_residual(k.components()) {
            prop_assert!(symexpr::to_rational_fraction(&r).unwrap().is_zero());
        }
        prop_assert_eq!(params_of(&k).unwrap(), p);
    }

    #[test]
    fn generating_vector_gives_the_subfamily(p in params()) {
        let from_vec = kt_from_vector(&generating_vector(&p)).unwrap();
        let mut sub = p.clone();
        for i in [1, 4, 6, 7, 10, 14] {
            sub.a[i - 1] = Rat::from_integer(0.into());
        }
        prop_assert!(tensors_equal(&from_vec, &kt_from_params(&sub)));
    }

    #[test]
    fn covariant_output_lies_in_the_span(
        a in proptest::collection::vec(-3i64..=3, 6),
        b in proptest::collection::vec(-3i64..=3, 5),
        l in proptest::collection::vec(-3i64..=3, 3),
        dd in proptest::collection::vec(-3i64..=3, 6),
    ) {
        let sym = |v: &[i64]| {
            let r = |i: usize| rat_int(v[i]);
            [[r(0), r(3), r(4)], [r(3), r(1), r(5)], [r(4), r(5), r(2)]]
        };
        let mut bm = sym(&[b[0], b[1], 0, b[2], b[3], b[4]]);
        bm[2][2] = -(&bm[0][0] + &bm[1][1]);
        let d = CovariantKTData { a: sym(&a), b: bm, lambda: [rat_int(l[0]), rat_int(l[1]), rat_int(l[2])], d: sym(&dd) };
        let k = kt_from_covariant(&d).unwrap();
        let p = params_of(&k).unwrap();
        prop_assert!(tensors_equal(&kt_from_params(&p), &k));
        prop_assert_eq!(covariant_to_params(&d).unwrap(), p);
    }
}
