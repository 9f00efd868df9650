use ordfix_web::{center, modulus_curve, orbit, OrbitRequest};

fn request(json: &str) -> OrbitRequest {
    serde_json::from_str(json).unwrap()
}

#[test]
fn euclidean_curve_hits_the_closed_form() {
    let c = modulus_curve(2.0, 4).unwrap();
    assert_eq!(c.epsilons, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    for (e, d) in c.epsilons.iter().zip(&c.deltas) {
        assert!((d - (1.0 - (1.0 - e * e / 4.0).sqrt())).abs() < 1e-5);
    }
    assert!(modulus_curve(2.0, 0).is_err());
}

#[test]
fn orbit_of_a_contraction_reaches_its_fixed_point() {
    let r = orbit(&request(r#"{"a": [[0.5, 0.25], [0.0, 0.5]], "b": [1.0, 0.5], "x0": [0.0, 0.0]}"#)).unwrap();
    assert_eq!(r.verdict, "converged");
    assert_eq!(r.monotonicity, "increasing");
    assert_eq!(r.fixed_points.len(), 1);
    let z = r.fixed_points[0];
    let last = r.points.last().unwrap();
    assert!((last[0] - z[0]).abs() < 1e-8 && (last[1] - z[1]).abs() < 1e-8);
    assert!(r.alpha_passed);
}

#[test]
fn mann_orbit_and_center_agree_with_the_fixed_point() {
    let req = request(
        r#"{"a": [[0.5, 0.25], [0.0, 0.5]], "b": [1.0, 0.5], "x0": [0.0, 0.0], "scheme": "mann", "beta": 0.3}"#,
    );
    let o = orbit(&req).unwrap();
    let c = center(&req).unwrap();
    let z = o.fixed_points[0];
    assert!((c.center[0] - z[0]).abs() < 1e-6 && (c.center[1] - z[1]).abs() < 1e-6);
    assert!(c.fixed_residual < 1e-6);
}

#[test]
fn bad_requests_are_errors() {
    // negative entries leave the quadrant
    assert!(orbit(&request(r#"{"a": [[-0.5, 0.0], [0.0, 0.5]], "b": [0.0, 0.0], "x0": [1.0, 1.0]}"#)).is_err());
    assert!(orbit(&request(r#"{"a": [[0.5, 0.0], [0.0, 0.5]], "b": [1.0, 1.0], "x0": [0.0, 0.0], "scheme": "halpern"}"#)).is_err());
}
