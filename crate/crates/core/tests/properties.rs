use ordfix::asymcenter::{asymptotic_radius, solve_asym_center, AsymCenterProblem, Side, SolverConfig};
use ordfix::harness::{corpus, run_suite, summary_table, CampaignConfig, Suite};
use ordfix::iterate::{mann_orbit, picard_orbit, BetaSchedule, IterationConfig};
use ordfix::mapping::{
    alpha_pair, comparable_pairs, fixed_point_oracle, is_alpha_nonexpansive, is_monotone,
    is_quasi_nonexpansive, lemma22_pair, nonexpansive_pair, OracleConfig,
};
use ordfix::order::{ConeSpec, OrderInterval};
use ordfix::sample::{self, SamplerConfig};
use ordfix::space::SpaceSpec;
use ordfix::vector::Vector;
use proptest::prelude::*;

fn vec_in(dim: usize, half: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-half..half, dim).prop_map(|c| Vector::new(c).unwrap())
}

fn nonneg(dim: usize, max: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(0.0..max, dim).prop_map(|c| Vector::new(c).unwrap())
}

fn lorentz_member(dim: usize) -> impl Strategy<Value = Vector> {
    (vec_in(dim - 1, 2.0), 0.0..2.0f64).prop_map(move |(v, extra)| {
        let r = v.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut c = v.into_coords();
        c.push(r + extra);
        Vector::new(c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mutual_order_is_equality(x in vec_in(3, 5.0), d in nonneg(3, 1.0)) {
        let cone = ConeSpec::orthant(3);
        let y = &x + &d;
        let both = cone.leq(&x, &y).unwrap() && cone.leq(&y, &x).unwrap();
        prop_assert_eq!(both, d.max_abs() <= 1e-12);
        prop_assert!(cone.leq(&x, &x).unwrap());
    }

    #[test]
    fn lorentz_order_is_transitive(x in vec_in(3, 5.0), a in lorentz_member(3), b in lorentz_member(3)) {
        let cone = ConeSpec::lorentz(3).unwrap();
        let y = &x + &a;
        let z = &y + &b;
        prop_assert!(cone.leq(&x, &y).unwrap() && cone.leq(&y, &z).unwrap());
        prop_assert!(cone.leq(&x, &z).unwrap());
    }

    #[test]
    fn segment_lies_in_its_interval(x in vec_in(3, 5.0), d in lorentz_member(3), t in 0.0..=1.0f64) {
        let cone = ConeSpec::lorentz(3).unwrap();
        let y = &x + &d;
        let iv = OrderInterval::new(cone, x.clone(), y.clone()).unwrap();
        prop_assert!(iv.contains(&x.lerp(&y, t)).unwrap());
    }

    #[test]
    fn intervals_are_convex(lo in vec_in(2, 3.0), d in nonneg(2, 3.0), s in nonneg(2, 1.0), u in nonneg(2, 1.0), t in 0.0..=1.0f64) {
        let cone = ConeSpec::orthant(2);
        let hi = &lo + &d;
        let iv = OrderInterval::new(cone, lo.clone(), hi).unwrap();
        let a = lo.zip_with(&d.zip_with(&s, |a, b| a * b), |l, o| l + o);
        let b = lo.zip_with(&d.zip_with(&u, |a, b| a * b), |l, o| l + o);
        prop_assert!(iv.contains(&a).unwrap() && iv.contains(&b).unwrap());
        prop_assert!(iv.contains(&a.lerp(&b, t)).unwrap());
    }

    #[test]
    fn orthant_lattice_axioms(x in vec_in(3, 4.0), y in vec_in(3, 4.0)) {
        let c = ConeSpec::orthant(3);
        prop_assert_eq!(c.sup_pair(&x, &x).unwrap(), x.clone());
        prop_assert_eq!(c.sup_pair(&x, &y).unwrap(), c.sup_pair(&y, &x).unwrap());
        prop_assert_eq!(c.inf_pair(&x, &y).unwrap(), c.inf_pair(&y, &x).unwrap());
        prop_assert_eq!(c.sup_pair(&x, &c.inf_pair(&x, &y).unwrap()).unwrap(), x.clone());
        prop_assert_eq!(c.inf_pair(&x, &c.sup_pair(&x, &y).unwrap()).unwrap(), x);
    }

    #[test]
    fn order_survives_limits(x in vec_in(2, 3.0), d in lorentz_member(2), u in vec_in(2, 1.0), w in vec_in(2, 1.0)) {
        // x_n = x + u/n, y_n = y + w/n + c/n with c absorbing the perturbation
        let cone = ConeSpec::lorentz(2).unwrap();
        let y = &x + &d;
        let push = Vector::new(vec![0.0, 4.0]).unwrap();
        for n in [1.0, 10.0, 1e3, 1e6] {
            let xn = x.zip_with(&u, |a, b| a + b / n);
            let yn = y.zip_with(&w, |a, b| a + b / n).zip_with(&push, |a, b| a + b / n);
            prop_assert!(cone.leq(&xn, &yn).unwrap());
        }
        prop_assert!(cone.leq(&x, &y).unwrap());
    }

    #[test]
    fn objective_is_convex(a in vec_in(2, 3.0), b in vec_in(2, 3.0), t in 0.0..=1.0f64, seed in 0u64..1000) {
        let mut rng = sample::rng(seed);
        let tail: Vec<Vector> = (0..6).map(|_| sample::uniform_cube(&mut rng, 2, 2.0)).collect();
        let prob = AsymCenterProblem::new(tail, ConeSpec::orthant(2), SpaceSpec::new(2, 3.0).unwrap(), Side::Above).unwrap();
        let f = |y: &Vector| asymptotic_radius(&prob, y).unwrap();
        let mix = a.lerp(&b, t);
        prop_assert!(f(&mix) <= t * f(&a) + (1.0 - t) * f(&b) + 1e-9);
    }

    #[test]
    fn mann_with_zero_beta_is_picard(x in nonneg(2, 3.0), idx in 0usize..6) {
        let s = &corpus()[idx];
        prop_assume!(s.mapping.domain().contains(&x) && s.mapping.dim() == 2);
        let space = s.space(2.0).unwrap();
        let cfg = IterationConfig { max_iter: 300, ..IterationConfig::default() };
        let a = picard_orbit(&s.mapping, &x, &s.cone, &space, &cfg).unwrap();
        let b = mann_orbit(&s.mapping, &x, &BetaSchedule::Constant { beta: 0.0 }, &s.cone, &space, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn alpha_zero_matches_nonexpansive_on_every_corpus_map() {
    for s in corpus() {
        let space = s.space(2.0).unwrap();
        let pairs = comparable_pairs(&s.mapping, &s.cone, &SamplerConfig::new(1000, 11));
        for (x, y) in pairs {
            let a = alpha_pair(&s.mapping, &space, 0.0, &x, &y).unwrap();
            let n = nonexpansive_pair(&s.mapping, &space, &x, &y).unwrap();
            assert_eq!(a.holds, n.holds, "{}: {x:?} {y:?}", s.id);
        }
    }
}

#[test]
fn perturbed_bound_holds_for_every_alpha_map() {
    for s in corpus() {
        let space = s.space(2.0).unwrap();
        let cfg = SamplerConfig::new(1000, 12);
        if !is_alpha_nonexpansive(&s.mapping, &s.cone, &space, s.alpha, &cfg).unwrap().passed() {
            continue;
        }
        for (x, y) in comparable_pairs(&s.mapping, &s.cone, &cfg) {
            let c = lemma22_pair(&s.mapping, &space, s.alpha, &x, &y).unwrap();
            assert!(c.holds, "{}: {} > {}", s.id, c.lhs, c.rhs);
        }
    }
}

#[test]
fn alpha_maps_with_fixed_points_are_quasi_nonexpansive() {
    let mut checked = 0;
    for s in corpus() {
        let space = s.space(2.0).unwrap();
        let cfg = SamplerConfig::new(500, 13);
        if !is_alpha_nonexpansive(&s.mapping, &s.cone, &space, s.alpha, &cfg).unwrap().passed() {
            continue;
        }
        let oracle = OracleConfig { region: s.oracle_region.clone(), ..OracleConfig::default() };
        let fixed = match fixed_point_oracle(&s.mapping, &oracle) {
            Ok(f) if !f.is_empty() => f,
            _ => continue,
        };
        let rep = is_quasi_nonexpansive(&s.mapping, &s.cone, &space, &fixed[..1], &cfg).unwrap();
        assert!(rep.passed(), "{}: {rep}", s.id);
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn increasing_orbits_stay_ordered_and_approach_fixed_points() {
    for s in corpus() {
        let Some(policy) = &s.x0_up else { continue };
        let space = s.space(2.0).unwrap();
        if !is_monotone(&s.mapping, &s.cone, &SamplerConfig::new(300, 14)).unwrap().passed() {
            continue;
        }
        let x0 = s.resolve_x0(policy, true, 15).unwrap();
        let cfg = IterationConfig { max_iter: 2000, bound_threshold: 1e4, ..IterationConfig::default() };
        let orbit = picard_orbit(&s.mapping, &x0, &s.cone, &space, &cfg).unwrap();
        assert!(orbit.leq_up.iter().all(|&f| f), "{}", s.id);

        let oracle = OracleConfig { region: s.oracle_region.clone(), ..OracleConfig::default() };
        let Ok(fixed) = fixed_point_oracle(&s.mapping, &oracle) else { continue };
        for z in fixed.iter().filter(|z| s.cone.leq(&x0, z).unwrap()) {
            let d: Vec<f64> = orbit.points.iter().map(|x| space.dist(x, z).unwrap()).collect();
            for w in d.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{}: distance to fixed point grew", s.id);
            }
        }
    }
}

#[test]
fn center_midpoint_is_no_better() {
    let s = corpus().into_iter().find(|s| s.id == "affine-coupled").unwrap();
    let space = s.space(2.0).unwrap();
    let x0 = Vector::zeros(2);
    let orbit = picard_orbit(&s.mapping, &x0, &s.cone, &space, &IterationConfig::default()).unwrap();
    let prob = AsymCenterProblem::from_orbit(&orbit.points, None, s.cone.clone(), space, Side::Above).unwrap();
    let res = solve_asym_center(&prob, &SolverConfig::default()).unwrap();
    let tz = s.mapping.apply(&res.z).unwrap();
    let mid = res.z.lerp(&tz, 0.5);
    if prob.feasibility_margin(&mid) >= -1e-12 {
        assert!(asymptotic_radius(&prob, &mid).unwrap() >= res.r - 1e-6);
    }
    assert!(asymptotic_radius(&prob, &tz).unwrap() <= res.r + 1e-6);
}

#[test]
fn reports_are_reproducible() {
    for s in corpus().iter().take(4) {
        let space = s.space(2.0).unwrap();
        let cfg = SamplerConfig::new(200, 99);
        let a = is_alpha_nonexpansive(&s.mapping, &s.cone, &space, s.alpha, &cfg).unwrap();
        let b = is_alpha_nonexpansive(&s.mapping, &s.cone, &space, s.alpha, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(comparable_pairs(&s.mapping, &s.cone, &cfg), comparable_pairs(&s.mapping, &s.cone, &cfg));
    }
    let cfg = CampaignConfig::default();
    let a = summary_table(&run_suite(Suite::T32, &cfg, 5).unwrap());
    let b = summary_table(&run_suite(Suite::T32, &cfg, 5).unwrap());
    assert_eq!(a, b);
}
