//! Initial conditions that force the consecutive ratio to converge.
//!
//! Setting `L1 = L2` gives a quadratic in `u2` with the two solutions
//! `u2 = l2 l3 u0 + (l2 - l3) u1` (ratio limit `-lambda3`, kills `c3`) and
//! `u2 = -l2 l3 u0 + (l2 + l3) u1` (ratio limit `+lambda3`, kills `c1`).
//! The branches coincide exactly when `u1 = l2 u0`; then both `c1` and `c3`
//! vanish and the sequence is geometric with ratio `lambda2`, not `±lambda3`.

use serde::Serialize;

use crate::binet::solve_coefficients;
use crate::numerics::{approx_eq, Backend, Scalar, Tolerance};
use crate::recurrence::DegenerateRoots;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSolutions {
    pub u2_first: Scalar,
    pub u2_second: Scalar,
    pub coincident: bool,
}

/// Both branch values of `u2` for the given `u0`, `u1`.
pub fn u2_solutions(roots: &DegenerateRoots, u0: &Scalar, u1: &Scalar) -> ConvergenceSolutions {
    let l2 = roots.lambda2();
    let l3 = roots.lambda3();
    let first = &(&(l2 * l3) * u0) + &(&(l2 - l3) * u1);
    let second = &(&-&(l2 * l3) * u0) + &(&(l2 + l3) * u1);
    let tol = membership_tol(roots.backend());
    let coincident = approx_eq(&first, &second, tol).unwrap();
    ConvergenceSolutions { u2_first: first, u2_second: second, coincident }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedLimit {
    MinusLambda3,
    PlusLambda3,
    Lambda2,
    None,
    ZeroSequence,
}

fn membership_tol(backend: Backend) -> Tolerance {
    match backend {
        Backend::Exact => Tolerance::exact(),
        Backend::Float => Tolerance::default(),
    }
}

/// Which limit (if any) the consecutive ratio has for the given initial
/// conditions, decided by branch membership.
pub fn converged_limit(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
) -> ConvergedLimit {
    if u0.is_zero() && u1.is_zero() && u2.is_zero() {
        return ConvergedLimit::ZeroSequence;
    }
    let sols = u2_solutions(roots, u0, u1);
    let tol = membership_tol(roots.backend());
    let on_first = approx_eq(u2, &sols.u2_first, tol).unwrap();
    let on_second = approx_eq(u2, &sols.u2_second, tol).unwrap();
    match (sols.coincident, on_first, on_second) {
        (false, true, false) => ConvergedLimit::MinusLambda3,
        (false, false, true) => ConvergedLimit::PlusLambda3,
        (true, true, _) => {
            let c = solve_coefficients(roots, u0, u1, u2);
            if c.c2.is_zero() {
                ConvergedLimit::ZeroSequence
            } else {
                ConvergedLimit::Lambda2
            }
        }
        _ => ConvergedLimit::None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{empirical_parity_limits, Regime};
    use crate::numerics::parse_scalar;
    use crate::recurrence::{iterate_terms, make_degenerate_spec};
    use proptest::prelude::*;

    fn ex(s: &str) -> Scalar {
        parse_scalar(s, Backend::Exact).unwrap()
    }

    fn roots(l2: &str, l3: &str) -> DegenerateRoots {
        DegenerateRoots::new(ex(l2), ex(l3)).unwrap()
    }

    #[test]
    fn u2_solution_examples() {
        let s = u2_solutions(&roots("1", "2"), &ex("1"), &ex("0"));
        assert_eq!(s.u2_first, ex("2"));
        assert_eq!(s.u2_second, ex("-2"));
        assert!(!s.coincident);

        let s = u2_solutions(&roots("1", "2"), &ex("1"), &ex("1"));
        assert_eq!(s.u2_first, ex("1"));
        assert_eq!(s.u2_second, ex("1"));
        assert!(s.coincident);

        let s = u2_solutions(&roots("1", "2"), &ex("0"), &ex("0"));
        assert_eq!(s.u2_first, ex("0"));
        assert_eq!(s.u2_second, ex("0"));
        assert!(s.coincident);
    }

    #[test]
    fn branch_kills_the_right_coefficient() {
        let r = roots("1", "2");
        let c = solve_coefficients(&r, &ex("1"), &ex("0"), &ex("2"));
        assert!(c.c3.is_zero());
        assert!(!c.c1.is_zero());
        let c = solve_coefficients(&r, &ex("1"), &ex("0"), &ex("-2"));
        assert!(c.c1.is_zero());
        assert!(!c.c3.is_zero());
    }

    #[test]
    fn converged_limit_examples() {
        let r = roots("1", "2");
        assert_eq!(converged_limit(&r, &ex("1"), &ex("0"), &ex("2")), ConvergedLimit::MinusLambda3);
        assert_eq!(converged_limit(&r, &ex("1"), &ex("0"), &ex("-2")), ConvergedLimit::PlusLambda3);
        assert_eq!(converged_limit(&r, &ex("0"), &ex("1"), &ex("2")), ConvergedLimit::None);
        assert_eq!(converged_limit(&r, &ex("1"), &ex("1"), &ex("1")), ConvergedLimit::Lambda2);
        assert_eq!(converged_limit(&r, &ex("0"), &ex("0"), &ex("0")), ConvergedLimit::ZeroSequence);
    }

    #[test]
    fn coincident_case_ratio_is_lambda2_at_every_index() {
        // u1 = l2 u0, u2 = l2^2 u0 != 0
        let r = roots("3/2", "2");
        let u0 = ex("4");
        let u1 = &ex("3/2") * &u0;
        let u2 = &ex("9/4") * &u0;
        assert_eq!(converged_limit(&r, &u0, &u1, &u2), ConvergedLimit::Lambda2);
        let spec = make_degenerate_spec(&r, u0, u1, u2);
        let terms = iterate_terms(&spec, 64);
        for n in 1..=64 {
            let ratio = &terms.values[n] / &terms.values[n - 1];
            assert_eq!(ratio, ex("3/2"));
        }
    }

    #[test]
    fn branches_reach_their_limits_empirically() {
        let f = |s: f64| Scalar::Float(s);
        let r = DegenerateRoots::new(f(1.0), f(2.0)).unwrap();
        for (u2, expected) in [(2.0, -2.0), (-2.0, 2.0)] {
            let spec = make_degenerate_spec(&r, f(1.0), f(0.0), f(u2));
            let est = empirical_parity_limits(&spec, 200, Tolerance::default()).unwrap();
            assert!((est.even.to_f64() - expected).abs() < 1e-8 * expected.abs());
            assert!((est.odd.to_f64() - expected).abs() < 1e-8 * expected.abs());
        }
    }

    fn roots_strategy() -> impl Strategy<Value = DegenerateRoots> {
        (1i64..=5, 1i64..=3, -9i64..=9, 1i64..=4).prop_filter_map("valid", |(p, q, m, d)| {
            let l3 = Scalar::from_ratio(p, q, Backend::Exact);
            let l2 = &Scalar::from_ratio(m, 10 * d, Backend::Exact) * &l3;
            DegenerateRoots::new(l2, l3).ok()
        })
    }

    fn u_strategy() -> impl Strategy<Value = Scalar> {
        (-10i64..=10, 1i64..=4).prop_map(|(n, d)| Scalar::from_ratio(n, d, Backend::Exact))
    }

    proptest! {
        #[test]
        fn branch_membership_equals_coefficient_vanishing(
            r in roots_strategy(),
            u0 in u_strategy(),
            u1 in u_strategy(),
        ) {
            let sols = u2_solutions(&r, &u0, &u1);
            let c_first = solve_coefficients(&r, &u0, &u1, &sols.u2_first);
            prop_assert!(c_first.c3.is_zero());
            let c_second = solve_coefficients(&r, &u0, &u1, &sols.u2_second);
            prop_assert!(c_second.c1.is_zero());
        }

        #[test]
        fn branches_satisfy_the_quadratic(
            r in roots_strategy(),
            u0 in u_strategy(),
            u1 in u_strategy(),
        ) {
            // l3^2 (l2^2 u0 - u2)^2 = [l3^2 (l2 u0 - u1) + l2 (l2 u1 - u2)]^2
            let sols = u2_solutions(&r, &u0, &u1);
            let l2 = r.lambda2();
            let l3sq = r.lambda3().square();
            for u2 in [&sols.u2_first, &sols.u2_second] {
                let lhs = &l3sq * &(&(&l2.square() * &u0) - u2).square();
                let rhs = (&(&l3sq * &(&(l2 * &u0) - &u1)) + &(l2 * &(&(l2 * &u1) - u2))).square();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn coincident_iff_u1_is_lambda2_u0(
            r in roots_strategy(),
            u0 in u_strategy(),
            u1 in u_strategy(),
        ) {
            let sols = u2_solutions(&r, &u0, &u1);
            prop_assert_eq!(sols.coincident, u1 == r.lambda2() * &u0);
            if sols.coincident && !u0.is_zero() {
                let c = solve_coefficients(&r, &u0, &u1, &sols.u2_first);
                let rep_regime = crate::limits::regime_of(&c);
                prop_assert_eq!(rep_regime, Regime::GeometricLambda2);
            }
        }
    }
}
