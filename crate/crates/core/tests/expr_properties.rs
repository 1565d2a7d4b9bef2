use endcalc::expr::FunctionRegistry;
use endcalc::{Expr, Point, Var, C64};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::r()),
        Just(Expr::theta()),
        Just(Expr::rho()),
        Just(Expr::eta()),
        (-2.0f64..2.0).prop_map(Expr::real),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul),
            inner.clone().prop_map(|e| e.sin()),
            inner.clone().prop_map(|e| e.cos()),
            inner.clone().prop_map(|e| (e.sin() * 0.5).exp()),
            (inner, 0i32..4).prop_map(|(e, k)| e.pow(k)),
        ]
    })
}

fn point() -> impl Strategy<Value = Point> {
    (-1.5f64..1.5, -3.0f64..3.0, -1.5f64..1.5, -1.5f64..1.5)
        .prop_map(|(r, th, rho, eta)| Point::new(r, th, rho, eta, 0.1, C64::new(0.0, 0.0)))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip_preserves_values(e in tree(), pt in point()) {
        let back = Expr::parse(&e.to_string(), &FunctionRegistry::builtin()).unwrap();
        prop_assert!(close(back.eval(&pt).unwrap(), e.eval(&pt).unwrap(), 1e-12));
    }

    #[test]
    fn normalize_keeps_values(e in tree(), pt in point()) {
        let n = e.normalize();
        prop_assert!(close(n.eval(&pt).unwrap(), e.eval(&pt).unwrap(), 1e-10));
        prop_assert_eq!(n.normalize().structural_hash(), n.structural_hash());
    }

    #[test]
    fn derivative_is_linear(a in tree(), b in tree(), c in -2.0f64..2.0, pt in point()) {
        let lhs = (&a * c + &b).diff(Var::R).unwrap().eval(&pt).unwrap();
        let rhs = a.diff(Var::R).unwrap().eval(&pt).unwrap() * c + b.diff(Var::R).unwrap().eval(&pt).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn product_rule(a in tree(), b in tree(), pt in point()) {
        let lhs = (&a * &b).diff(Var::Rho).unwrap().eval(&pt).unwrap();
        let da = a.diff(Var::Rho).unwrap().eval(&pt).unwrap();
        let db = b.diff(Var::Rho).unwrap().eval(&pt).unwrap();
        let rhs = da * b.eval(&pt).unwrap() + a.eval(&pt).unwrap() * db;
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn derivatives_commute(e in tree(), pt in point()) {
        let a = e.diff(Var::R).unwrap().diff(Var::Eta).unwrap().eval(&pt).unwrap();
        let b = e.diff(Var::Eta).unwrap().diff(Var::R).unwrap().eval(&pt).unwrap();
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn substitution_matches_shifted_evaluation(e in tree(), s in -1.0f64..1.0, pt in point()) {
        let r = pt.vars()[Var::R.index()].re;
        let shifted = e.subst(&[(Var::R, Expr::r() + s)]);
        prop_assert!(close(shifted.eval(&pt).unwrap(), e.eval(&pt.with_r(r + s)).unwrap(), 1e-10));
    }
}
