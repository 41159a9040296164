use num_complex::Complex64;
use proptest::prelude::*;
use summand_lab::criteria::{gaussian_verdict, general_verdict, lindeberg_gaussian};
use summand_lab::psi::psi_eval_best_effort;
use summand_lab::tolerances::Tolerances;
use summand_lab::{
    build_accum, conjugate_and_norm, poisson_type_approx, product, pth_root, ArrayGenerator,
    CharFnSpec, ComponentDist, LimitMeasureSpec, Mesh, RowSpec,
};

fn t_grid() -> Vec<f64> {
    (-200..=200).map(|i| i as f64 * 0.1).collect()
}

fn family() -> impl Strategy<Value = CharFnSpec> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(|a| CharFnSpec::degenerate(a).unwrap()),
        (-3.0..3.0f64, 0.01..4.0f64).prop_map(|(m, v)| CharFnSpec::gaussian(m, v).unwrap()),
        (-3.0..3.0f64, 0.01..6.0f64)
            .prop_map(|(a, l)| CharFnSpec::translated_poisson(a, l).unwrap()),
        (0.1..5.0f64, 0.1..5.0f64).prop_map(|(s, r)| CharFnSpec::gamma(s, r).unwrap()),
        (-3.0..3.0f64, 0.01..3.0f64).prop_map(|(l, s)| CharFnSpec::cauchy(l, s).unwrap()),
    ]
}

fn component() -> impl Strategy<Value = ComponentDist> {
    prop_oneof![
        prop::collection::vec((-3.0..3.0f64, 0.05..1.0f64), 1..5).prop_map(|raw| {
            let total: f64 = raw.iter().map(|r| r.1).sum();
            let mut atoms: Vec<(f64, f64)> = raw.iter().map(|&(x, w)| (x, w / total)).collect();
            let rest: f64 = atoms[1..].iter().map(|a| a.1).sum();
            atoms[0].1 = 1.0 - rest;
            ComponentDist::finite_discrete(atoms).unwrap()
        }),
        (-2.0..2.0f64, 0.01..2.0f64).prop_map(|(m, v)| ComponentDist::gaussian(m, v).unwrap()),
        (-2.0..2.0f64, 0.05..3.0f64)
            .prop_map(|(lo, w)| ComponentDist::uniform(lo, lo + w).unwrap()),
    ]
}

fn centered(d: ComponentDist) -> ComponentDist {
    let m = d.mean();
    d.shifted(m)
}

fn row(n: u64) -> impl Strategy<Value = RowSpec> {
    prop::collection::vec(component(), 1..6).prop_map(move |c| RowSpec::new(n, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cf_is_a_characteristic_function(a in family(), b in family()) {
        let spec = product(vec![a, b]).unwrap();
        prop_assert!((spec.eval(0.0) - 1.0).norm() <= 1e-15);
        for t in t_grid() {
            let v = spec.eval(t);
            prop_assert!(v.norm() <= 1.0 + 1e-12);
            prop_assert!((spec.eval(-t) - v.conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn roots_round_trip(spec in family(), p in prop::sample::select(vec![2u32, 3, 7])) {
        let root = pth_root(&spec, p).unwrap();
        for t in t_grid() {
            prop_assert!((root.eval(t).powu(p) - spec.eval(t)).norm() <= 1e-12);
        }
    }

    #[test]
    fn norm_is_real(spec in family()) {
        let (conj, norm) = conjugate_and_norm(&spec);
        for t in t_grid() {
            let n = norm.eval(t);
            prop_assert!(n.im.abs() <= 1e-14);
            prop_assert!((n.re - spec.eval(t).norm_sqr()).abs() <= 1e-12);
            prop_assert!((conj.eval(t) - spec.eval(t).conj()).norm() <= 1e-15);
        }
    }

    #[test]
    fn partial_second_moment_is_monotone(d in component()) {
        let mut prev = 0.0;
        for i in -80..=80 {
            let v = d.partial_m2(i as f64 * 0.05);
            prop_assert!(v >= prev - 1e-15);
            prev = v;
        }
        prop_assert!(prev <= d.second_moment() + 1e-12);
    }

    #[test]
    fn additive_under_concatenation(r1 in row(3), r2 in row(3), eps in 0.05..2.0f64) {
        let joined = r1.concat(&r2);
        prop_assert!((joined.mv() - r1.mv() - r2.mv()).abs() <= 1e-12);
        let (k1, k2, k) = (build_accum(&r1, false), build_accum(&r2, false), build_accum(&joined, false));
        prop_assert!((k.total_mass - k1.total_mass - k2.total_mass).abs() <= 1e-12);
        for x in [-1.5, -0.3, 0.0, 0.7, 2.0] {
            let sum = k1.interval_mass(-1e300, x) + k2.interval_mass(-1e300, x);
            prop_assert!((k.interval_mass(-1e300, x) - sum).abs() <= 1e-12);
        }
        let g = lindeberg_gaussian(&joined, eps);
        prop_assert!((g - lindeberg_gaussian(&r1, eps) - lindeberg_gaussian(&r2, eps)).abs() <= 1e-12);
    }

    #[test]
    fn lindeberg_monotone_and_bounds_max_variance(r in row(4)) {
        let r = RowSpec::new(r.n, r.components.into_iter().map(centered).collect()).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..=60 {
            let eps = i as f64 * 0.05;
            let g = lindeberg_gaussian(&r, eps);
            prop_assert!(g <= prev + 1e-15);
            prop_assert!(r.max_var() <= eps * eps + g + 1e-12);
            prev = g;
        }
    }

    #[test]
    fn psi_bounded_by_half_u_squared_mass(r in row(2), u in -12.0..12.0f64) {
        let k = build_accum(&r, false);
        let v = psi_eval_best_effort(&k, u, 1e-9);
        prop_assert!(v.value.norm() <= u * u / 2.0 * k.total_mass * (1.0 + 1e-9) + 1e-9);
    }
}

#[test]
fn refinement_does_not_increase_error_for_continuous_measures() {
    let u_grid: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
    for comps in [
        vec![ComponentDist::uniform(-1.0, 1.0).unwrap()],
        vec![
            ComponentDist::gaussian(0.0, 0.04).unwrap(),
            ComponentDist::uniform(-0.3, 0.6).unwrap(),
        ],
    ] {
        let k = build_accum(&RowSpec::new(1, comps).unwrap(), false);
        let mut mesh = Mesh::uniform(1.0, 4);
        let mut prev = f64::INFINITY;
        for _ in 0..4 {
            let err = poisson_type_approx(&k, 1.0, &mesh)
                .unwrap()
                .sup_error(&k, &u_grid, 1e-10)
                .unwrap();
            assert!(err <= prev, "{err} > {prev}");
            prev = err;
            mesh = mesh.refined();
        }
    }
}

#[test]
fn gaussian_pass_implies_general_pass() {
    let tol = Tolerances::default();
    let n_list = [100, 1000, 10000];
    let grid = [-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0];
    for base in [
        ComponentDist::rademacher(),
        ComponentDist::uniform(-1.0, 1.0).unwrap(),
        ComponentDist::finite_discrete(vec![(-2.0, 0.2), (0.5, 0.8)]).unwrap(),
    ] {
        let gen = ArrayGenerator::StandardizedIid { base };
        let g = gaussian_verdict(&gen, &n_list, &[0.05, 0.1, 0.5], &tol).unwrap();
        let k = general_verdict(
            &gen,
            &n_list,
            &LimitMeasureSpec::DiracAtZero { mass: 1.0 },
            Some(0.0),
            &grid,
            1e-9,
            &tol,
        )
        .unwrap();
        assert!(g.pass, "{:?}", g.reasons);
        assert!(k.pass, "{:?}", k.reasons);
    }
}

#[test]
fn degenerate_product_is_a_phase() {
    let spec = product(vec![
        CharFnSpec::degenerate(0.5).unwrap(),
        CharFnSpec::degenerate(-0.25).unwrap(),
    ])
    .unwrap();
    assert!((spec.eval(2.0) - Complex64::from_polar(1.0, 0.5)).norm() < 1e-15);
}
