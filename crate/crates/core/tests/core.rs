use std::f64::consts::PI;

use proptest::prelude::*;
use stratwave::*;

#[test]
fn homogeneous_profile() {
    let p = linear_stratification(0.0, 1.0, 0.0).unwrap();
    for s in [-2.0, -0.5, 0.0] {
        assert_eq!(p.density(s), 1.0);
        assert_eq!(p.density_slope(s), 0.0);
    }
}

#[test]
fn linear_profile_values() {
    let p = linear_stratification(1.0, 2.0, 0.5).unwrap();
    assert_eq!(p.density(-1.0), 3.0);
    assert_eq!(p.density_slope(-1.0), -1.0);
    // beta(-p) = -gamma
    assert_eq!(p.bernoulli(-1.0), -0.5);
    assert!(p.is_stable_on(-1.0, 16));
}

#[test]
fn negative_density_rejected_for_deep_p0() {
    let p = linear_stratification(-1.0, 1.0, 0.0).unwrap();
    assert_eq!(p.density(-2.0), -1.0);
    assert!(p.validate_on(-2.0).is_err());
    assert!(p.validate_on(-0.5).is_ok());
    assert!(linear_stratification(0.0, 0.0, 0.0).is_err());
}

#[test]
fn tabulated_profile_interpolates_monotone_data() {
    let ps = vec![-2.0, -1.5, -1.0, -0.5, 0.0];
    let rho: Vec<f64> = ps.iter().map(|p| 1.0 - 0.1 * p).collect();
    let beta = vec![0.0; 5];
    let t = StratificationProfile::tabulated(ps, rho, beta).unwrap();
    assert!((t.density(-0.75) - 1.075).abs() < 1e-14);
    assert!((t.density_slope(-1.25) + 0.1).abs() < 1e-13);
    assert!(t.validate_on(-2.0).is_ok());
    assert!(t.validate_on(-3.0).is_err());
}

#[test]
fn grid_spacings() {
    let g = make_grid(8, 4, -1.0).unwrap();
    assert!((g.dq() - PI / 4.0).abs() < 1e-15);
    assert_eq!(g.p_values.len(), 5);
    assert!((g.dp() - 0.25).abs() < 1e-15);
    let g = make_grid(128, 64, -2.0).unwrap();
    assert_eq!(g.len(), 128 * 65);
    assert!((g.dp() - 1.0 / 32.0).abs() < 1e-15);
    assert_eq!(g.p_values[0], -2.0);
    assert_eq!(g.p_values[64], 0.0);
}

#[test]
fn grid_preconditions() {
    assert!(make_grid(7, 4, -1.0).is_err());
    assert!(make_grid(6, 4, -1.0).is_err());
    assert!(make_grid(8, 3, -1.0).is_err());
    assert!(make_grid(8, 4, 0.0).is_err());
}

#[test]
fn grid_closed_under_negation() {
    for nq in [8, 14, 64] {
        let g = make_grid(nq, 4, -1.0).unwrap();
        assert!(g.q_values.contains(&0.0) || g.q_values[nq / 2].abs() < 1e-15);
        for i in 0..nq {
            let m = g.mirror(i);
            let s = g.q_values[i] + g.q_values[m];
            // -pi pairs with itself through the periodic identification
            let wrapped = if i == 0 { s + 2.0 * PI } else { s };
            assert!(wrapped.abs() < 1e-14, "nq {nq} node {i}");
        }
    }
}

#[test]
fn parameter_file_round_trip() {
    let p = FluidParameters::new(-1.234_567_890_123_4, 1.1, 0.9).with_stratification(0.3, -2.5);
    let back = FluidParameters::from_kv(&p.to_kv()).unwrap();
    assert_eq!(p, back);
    let dup = format!("{}p0 = -1\n", p.to_kv());
    assert!(FluidParameters::from_kv(&dup).is_err());
    let unknown = format!("{}beta = 1\n", p.to_kv());
    assert!(FluidParameters::from_kv(&unknown).is_err());
}

#[test]
fn height_csv_file_round_trip() {
    let g = make_grid(16, 6, -1.7).unwrap();
    let h = HeightField::from_fn(g, |q, p| (p + 1.7) * (1.0 + 0.1 * q.cos()) / 3.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    h.write_csv(&path).unwrap();
    assert_eq!(HeightField::read_csv(&path).unwrap(), h);
}

#[test]
fn csv_header_is_checked() {
    assert!(HeightField::from_csv("x,p,h\n0,0,0\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn height_csv_round_trip_is_bit_exact(
        seed in proptest::collection::vec(-1e3f64..1e3, 8 * 5),
        p0 in -5.0f64..-0.01,
    ) {
        let g = make_grid(8, 4, p0).unwrap();
        let h = HeightField::new(g, seed).unwrap();
        let back = HeightField::from_csv(&h.to_csv()).unwrap();
        prop_assert_eq!(back.values, h.values);
        prop_assert_eq!(back.grid, h.grid);
    }
}
