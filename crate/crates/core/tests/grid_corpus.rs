use ordfix::harness::grid_alpha_map;
use ordfix::mapping::exhaustive_grid_check;
use ordfix::order::ConeSpec;
use ordfix::space::SpaceSpec;

#[test]
fn grid_map_is_alpha_nonexpansive_but_not_nonexpansive() {
    let map = grid_alpha_map();
    let cone = ConeSpec::orthant(2);
    let space = SpaceSpec::euclidean(2);

    let alpha = exhaustive_grid_check(&map, &cone, &space, Some(1.0 / 3.0)).unwrap();
    assert!(alpha.samples > 100);
    assert!(alpha.passed(), "{alpha}");

    let plain = exhaustive_grid_check(&map, &cone, &space, None).unwrap();
    assert!(plain.violations.iter().all(|v| v.check == "exhaustive nonexpansive"));
    assert!(!plain.passed());
}

#[test]
fn grid_map_has_a_hand_checked_bad_pair() {
    // x = (2.5, 3) and y = (3, 3): ‖Tx - Ty‖ = 1 against ‖x - y‖ = 0.5
    let map = grid_alpha_map();
    let x = ordfix::vector::Vector::from_slice(&[2.5, 3.0]).unwrap();
    let y = ordfix::vector::Vector::from_slice(&[3.0, 3.0]).unwrap();
    let tx = map.apply(&x).unwrap();
    let ty = map.apply(&y).unwrap();
    assert!((&tx - &ty).max_abs() > (&x - &y).max_abs());
}
