use std::f64::consts::PI;

use ordfix::sample;
use ordfix::space::{
    check_convexity_inequality, lp_norm, modulus_of_convexity, ConvexityProfile, ModulusSolverConfig,
    ProfileConfig, SpaceSpec,
};
use ordfix::vector::Vector;
use rand::Rng;

fn clarkson(eps: f64, p: f64) -> f64 {
    1.0 - (1.0 - (eps / 2.0).powf(p)).powf(1.0 / p)
}

/// Root of `(1 - δ + ε/2)^p + |1 - δ - ε/2|^p = 2`, valid for `1 < p <= 2`.
fn hanner(eps: f64, p: f64) -> f64 {
    let g = |d: f64| (1.0 - d + eps / 2.0).powf(p) + (1.0 - d - eps / 2.0).abs().powf(p) - 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Brute force over all pairs of an angular grid on the planar unit sphere.
/// Every visited pair is feasible, so the result never undershoots δ.
fn grid_search(eps: f64, p: f64, n: usize) -> f64 {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let (s, c) = t.sin_cos();
            let r = lp_norm(&[c, s], p);
            [c / r, s / r]
        })
        .collect();
    let mut best = 1.0_f64;
    // central symmetry lets x range over half the circle
    for x in &pts[..n / 2] {
        for y in &pts {
            if lp_norm(&[x[0] - y[0], x[1] - y[1]], p) >= eps {
                best = best.min(1.0 - lp_norm(&[x[0] + y[0], x[1] + y[1]], p) / 2.0);
            }
        }
    }
    best
}

#[test]
fn euclidean_plane_matches_closed_form() {
    let s = SpaceSpec::euclidean(2);
    let cfg = ModulusSolverConfig::default();
    for eps in [0.5_f64, 1.0, 1.5, 2.0] {
        let exact = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
        let d = modulus_of_convexity(&s, eps, &cfg).unwrap();
        assert!((d - exact).abs() <= 1e-5, "eps {eps}: {d} vs {exact}");
    }
}

#[test]
fn grid_search_brackets_closed_form() {
    for (p, closed) in [(2.0, clarkson as fn(f64, f64) -> f64), (3.0, clarkson), (1.5, hanner)] {
        for eps in [0.5, 1.0, 1.5] {
            let exact = closed(eps, p);
            let g = grid_search(eps, p, 1440);
            assert!(g >= exact - 1e-12, "p {p} eps {eps}: grid {g} below {exact}");
            assert!(g - exact <= 5e-3, "p {p} eps {eps}: grid {g} far from {exact}");
        }
    }
}

#[test]
fn solver_matches_clarkson_for_p_at_least_two() {
    let cfg = ModulusSolverConfig::default();
    for p in [3.0, 4.0] {
        let s = SpaceSpec::new(2, p).unwrap();
        for eps in [0.5, 1.0, 1.5] {
            let d = modulus_of_convexity(&s, eps, &cfg).unwrap();
            assert!((d - clarkson(eps, p)).abs() <= 1e-5, "p {p} eps {eps}: {d}");
        }
    }
}

#[test]
fn solver_matches_hanner_below_two() {
    let s = SpaceSpec::new(2, 1.5).unwrap();
    let cfg = ModulusSolverConfig::default();
    for eps in [0.5, 1.0, 1.5] {
        let d = modulus_of_convexity(&s, eps, &cfg).unwrap();
        assert!((d - hanner(eps, 1.5)).abs() <= 1e-5, "eps {eps}: {d}");
    }
}

#[test]
fn higher_dimension_never_beats_the_planar_modulus() {
    let s3 = SpaceSpec::new(3, 3.0).unwrap();
    let s2 = SpaceSpec::new(2, 3.0).unwrap();
    let profile = ConvexityProfile::compute(&s2, &ProfileConfig::default()).unwrap();
    let mut rng = sample::rng(31);
    for _ in 0..5000 {
        let mut draw = || {
            let v = Vector::new((0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let n = s3.norm(&v).unwrap();
            v.map(|c| c / n)
        };
        let (x, y) = (draw(), draw());
        let eps = s3.dist(&x, &y).unwrap();
        let gap = 1.0 - s3.norm(&x.lerp(&y, 0.5)).unwrap();
        assert!(gap >= profile.delta_floor(eps) - 1e-9, "eps {eps}: gap {gap}");
    }
}

#[test]
fn profile_shape() {
    let s = SpaceSpec::new(2, 3.0).unwrap();
    let prof = ConvexityProfile::compute(&s, &ProfileConfig::default()).unwrap();
    assert_eq!(prof.deltas[0], 0.0);
    for w in prof.deltas.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    let h = prof.resolution();
    for (i, w) in prof.deltas.windows(2).enumerate() {
        // continuity away from the endpoint, where the slope blows up
        if prof.epsilons[i + 1] <= 1.9 {
            assert!(w[1] - w[0] <= 2.0 * h);
        }
        if prof.epsilons[i] >= prof.eps0 {
            assert!(w[1] > w[0]);
        }
    }
    assert_eq!(prof.eps0, 0.0);
}

#[test]
fn inequality_holds_on_sampled_tuples() {
    for p in [1.5, 2.0, 3.0] {
        for dim in [2, 5] {
            let s = SpaceSpec::new(dim, p).unwrap();
            let prof = ConvexityProfile::compute(&s, &ProfileConfig::default()).unwrap();
            let mut rng = sample::rng(7);
            for _ in 0..500 {
                let r = rng.random_range(0.1..5.0);
                let draw = |rng: &mut sample::SeededRng| {
                    let v = Vector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
                    let scale = r * rng.random_range(0.0..=1.0) / s.norm(&v).unwrap();
                    v.map(|c| c * scale)
                };
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                let lambda = rng.random_range(0.0..=1.0);
                assert!(check_convexity_inequality(&s, &x, &y, lambda, r, &prof).unwrap());
            }
        }
    }
}

#[test]
fn kadec_klee_in_finite_dimension() {
    let s = SpaceSpec::new(4, 1.5).unwrap();
    let x = Vector::from_slice(&[1.0, -2.0, 0.5, 3.0]).unwrap();
    let dirs = [
        Vector::from_slice(&[1.0, 0.0, -1.0, 2.0]).unwrap(),
        Vector::from_slice(&[-0.3, 0.7, 0.1, 0.0]).unwrap(),
    ];
    let nx = s.norm(&x).unwrap();
    let mut prev = f64::INFINITY;
    for n in 1..=2000u32 {
        let d = &dirs[n as usize % 2];
        let sign = if n % 3 == 0 { -1.0 } else { 1.0 };
        let xn = x.zip_with(d, |a, b| a + sign * b / (n as f64).powi(2));
        let coord_gap = (&xn - &x).max_abs();
        let norm_gap = (s.norm(&xn).unwrap() - nx).abs();
        let dist = s.dist(&xn, &x).unwrap();
        // on a 4-dimensional space ‖v‖_1.5 <= 4^(1/1.5) max|v_i|
        assert!(dist <= 4f64.powf(1.0 / 1.5) * coord_gap + 1e-15);
        if n % 2 == 0 {
            assert!(coord_gap < prev && norm_gap <= dist + 1e-15);
            prev = coord_gap;
        }
    }
    assert!(prev < 1e-6);
}
