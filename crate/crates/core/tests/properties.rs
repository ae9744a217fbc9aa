use knudsen_core::boundary::{is_negative_definite, k_matrix, wall_system};
use knudsen_core::profiles::{LayerParams, TemperatureProblem, REFERENCE_KN};
use knudsen_core::special::{half_space_s_normalized, HalfSpaceTable};
use knudsen_core::spectral::decompose;
use knudsen_core::system::build_temperature_system;
use proptest::prelude::*;

fn odd_order() -> impl Strategy<Value = usize> {
    (1usize..=12).prop_map(|k| 2 * k + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn half_space_symmetry_and_zeros(a in 0usize..400, b in 0usize..400) {
        let s = half_space_s_normalized(a, b);
        prop_assert_eq!(s, half_space_s_normalized(b, a));
        prop_assert!(s.is_finite());
        if a % 2 == 0 && b % 2 == 1 && a.abs_diff(b) != 1 {
            prop_assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn flux_linearity(m in odd_order(), chi in 0.01f64..=1.0, q in -5.0f64..5.0, tw in -1.0f64..1.0) {
        let p = TemperatureProblem::new(m).unwrap();
        let base = LayerParams { chi, wall_value: tw, ..LayerParams::default() };
        let one = p.solve(&base).unwrap();
        let scaled = p.solve(&LayerParams { flux: q, ..base }).unwrap();
        for y in [0.0, 0.1, 1.0, 5.0] {
            let want = q * (one.theta(y) - tw);
            prop_assert!((scaled.theta(y) - tw - want).abs() <= 1e-11 * want.abs().max(1e-300));
        }
    }

    #[test]
    fn prandtl_scaling(m in odd_order(), chi in 0.01f64..=1.0, pr in 0.1f64..5.0) {
        let p = TemperatureProblem::new(m).unwrap();
        let a = p.jump_coefficient(chi, REFERENCE_KN, 1.0).unwrap();
        let b = p.jump_coefficient(chi, REFERENCE_KN, pr).unwrap();
        prop_assert!((b * pr / a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_matrix_definite(m in odd_order(), chi in 0.001f64..=1.0) {
        let s = build_temperature_system(m).unwrap();
        let e = decompose(&s).unwrap();
        let table = HalfSpaceTable::new(m + 2);
        let w = wall_system(&s, chi, &table).unwrap();
        prop_assert!(is_negative_definite(&k_matrix(&w, &e).unwrap()));
    }

    #[test]
    fn defect_invariant_under_basis_changes(m in odd_order(), chi in 0.05f64..=1.0, flips in proptest::collection::vec(any::<bool>(), 24), shift in 0usize..24) {
        let s = build_temperature_system(m).unwrap();
        let e = decompose(&s).unwrap();
        let base = TemperatureProblem::from_parts(s.clone(), e.clone()).solve(&LayerParams::with_chi(chi)).unwrap();

        let n = e.m_o();
        let mut alt = e.clone();
        // cyclic column permutation plus joint sign flips
        for (j, &flip) in flips.iter().enumerate().take(n) {
            let src = (j + shift) % n;
            let sign = if flip { -1.0 } else { 1.0 };
            alt.lambda_plus[j] = e.lambda_plus[src];
            alt.r_even.set_column(j, &(e.r_even.column(src) * sign));
            alt.r_odd.set_column(j, &(e.r_odd.column(src) * sign));
        }
        let other = TemperatureProblem::from_parts(s, alt).solve(&LayerParams::with_chi(chi)).unwrap();
        for y in [0.0, 0.05, 0.5, 2.0, 10.0] {
            prop_assert!((base.temperature_defect(y) - other.temperature_defect(y)).abs() < 1e-10);
        }
        prop_assert!((base.jump_coefficient() - other.jump_coefficient()).abs() < 1e-10 * base.jump_coefficient().abs());
    }
}
