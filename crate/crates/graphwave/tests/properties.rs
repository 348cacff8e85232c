//! Property-based invariants for the quadrature layer and the shift maps.

use graphwave::graph::{graph_inner_product, GraphFunction, YJunction};
use graphwave::profiles::{solve_antikink_shift, solve_kink_shifts, ProfileClass};
use proptest::prelude::*;

fn junction() -> YJunction {
    YJunction::new((1.0, 1.0, 1.0), -4.0, 5.0, 101).unwrap()
}

fn field(seed: u64) -> GraphFunction {
    let mut rng = graphwave::linalg::SplitMix64::new(seed);
    let j = junction();
    GraphFunction::from_fn(&j, |_, _| rng.next_sym())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_product_is_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let j = junction();
        let u = field(a);
        let v = field(b);
        let uv = graph_inner_product(&u, &v, &j).unwrap();
        let vu = graph_inner_product(&v, &u, &j).unwrap();
        prop_assert_eq!(uv, vu);
    }

    #[test]
    fn inner_product_is_bilinear(a in any::<u64>(), b in any::<u64>(), s in -4.0f64..4.0) {
        let j = junction();
        let u = field(a);
        let v = field(b);
        let mut su = u.clone();
        su.scale(s);
        let lhs = graph_inner_product(&su, &v, &j).unwrap();
        let rhs = s * graph_inner_product(&u, &v, &j).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        let mut upv = u.clone();
        upv.axpy(1.0, &v);
        let sum = graph_inner_product(&upv, &upv, &j).unwrap();
        let expanded = graph_inner_product(&u, &u, &j).unwrap()
            + 2.0 * graph_inner_product(&u, &v, &j).unwrap()
            + graph_inner_product(&v, &v, &j).unwrap();
        prop_assert!((sum - expanded).abs() <= 1e-10 * sum.abs().max(1.0));
    }

    #[test]
    fn inner_product_is_positive(a in any::<u64>()) {
        let j = junction();
        let u = field(a);
        prop_assert!(graph_inner_product(&u, &u, &j).unwrap() >= 0.0);
    }

    #[test]
    fn kink_shift_map_residual_is_tiny(lambda in -60.0f64..-3.05) {
        let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
        prop_assert!(p.shift_map_residual().abs() <= 1e-12 * lambda.abs().max(1.0));
        // Classification agrees with the lambda window.
        let crit = p.critical_lambda();
        let expected = if (lambda - crit).abs() < 1e-9 {
            ProfileClass::Critical
        } else if lambda < crit {
            ProfileClass::Bump
        } else {
            ProfileClass::Tail
        };
        prop_assert_eq!(p.classify(), expected);
    }

    #[test]
    fn antikink_shift_map_residual_is_tiny(lambda in -40.0f64..40.0) {
        let p = solve_antikink_shift(lambda).unwrap();
        prop_assert!(p.shift_map_residual().abs() <= 1e-12 * lambda.abs().max(1.0));
        prop_assert!(graphwave::profiles::shift_map_derivative(&p).unwrap() > 0.0);
    }

    #[test]
    fn kink_speed_ratios_hold_for_random_speeds(
        lambda_off in 0.1f64..20.0,
        c1 in 0.3f64..2.5,
        c2 in 0.3f64..2.5,
        c3 in 0.3f64..2.5,
    ) {
        let lambda = -(c1 + c2 + c3) - lambda_off;
        let p = solve_kink_shifts(lambda, (c1, c2, c3)).unwrap();
        prop_assert!((p.shifts.2 - c3 / c2 * p.shifts.1).abs() <= 1e-10);
        prop_assert!((p.shifts.0 + c1 / c2 * p.shifts.1).abs() <= 1e-10);
        // Continuity of the outgoing pair at the vertex is exact.
        prop_assert!((p.phi(1, 0.0) - p.phi(2, 0.0)).abs() <= 1e-12);
    }
}
