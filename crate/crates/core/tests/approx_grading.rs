mod common;

use apxsym::approx::{expand_dependent, grade, lift_generator, recursion_apply, truncate, ApproxError};
use apxsym::expr::Expr;
use apxsym::jet::{Generator, JetSpace};
use common::{ex, scratch};
use proptest::prelude::*;

fn space(order: u32) -> JetSpace {
    JetSpace::new(&["t", "x"], &["u"], "eps", order)
}

#[test]
fn expand_square() {
    let s = scratch();
    let e = expand_dependent(&ex(&s, "u^2"), &space(1));
    assert_eq!(e, ex(&s, "u0^2 + 2*eps*u0*u1"));
    let e = expand_dependent(&ex(&s, "u^2"), &space(2));
    assert_eq!(e, ex(&s, "u0^2 + 2*eps*u0*u1 + eps^2*(u1^2 + 2*u0*u2)"));
}

#[test]
fn expand_derivatives_and_truncate() {
    let s = scratch();
    let e = expand_dependent(&ex(&s, "eps*u_tt + u_t"), &space(1));
    assert_eq!(e, ex(&s, "u0_t + eps*(u0_tt + u1_t)"));
    // already expanded coordinates are left alone
    assert_eq!(expand_dependent(&ex(&s, "u0*u1"), &space(1)), ex(&s, "u0*u1"));
}

#[test]
fn grade_splits_orders() {
    let s = scratch();
    let g = grade(&ex(&s, "a + eps*b*u0 - 3*eps*x"), &space(1)).unwrap();
    assert_eq!(g.coeffs, vec![ex(&s, "a"), ex(&s, "b*u0 - 3*x")]);
}

#[test]
fn grade_rejects_overflow_and_non_polynomial() {
    let s = scratch();
    let e = grade(&ex(&s, "eps^2*a"), &space(1)).unwrap_err();
    assert!(matches!(e, ApproxError::DegreeOverflow { degree: 2, order: 1, .. }), "{e}");
    let e = grade(&ex(&s, "exp(eps*x)"), &space(1)).unwrap_err();
    assert!(matches!(e, ApproxError::NonPolynomial(_)), "{e}");
    let e = grade(&ex(&s, "a/eps"), &space(1)).unwrap_err();
    assert!(matches!(e, ApproxError::NonPolynomial(_)), "{e}");
}

#[test]
fn truncate_keeps_low_orders() {
    let s = scratch();
    let e = truncate(&ex(&s, "a + eps*b + eps^2*c + eps^3"), &space(1));
    assert_eq!(e, ex(&s, "a + eps*b"));
}

#[test]
fn recursion_examples() {
    let s = scratch();
    assert_eq!(recursion_apply(&ex(&s, "u0")).unwrap(), ex(&s, "u1"));
    assert_eq!(recursion_apply(&ex(&s, "u1_x")).unwrap(), ex(&s, "2*u2_x"));
    assert_eq!(recursion_apply(&ex(&s, "x^2 + a")).unwrap(), Expr::zero());
    assert_eq!(recursion_apply(&ex(&s, "u0^2")).unwrap(), ex(&s, "2*u0*u1"));
    // seed functions shift their order and pick up chain-rule terms
    assert_eq!(
        recursion_apply(&ex(&s, "X0(t, x, u0)")).unwrap(),
        ex(&s, "X1(t, x, u0) + u1*X0[0,0,1](t, x, u0)")
    );
    // functions without an order index are constant in the recursion
    assert_eq!(recursion_apply(&ex(&s, "f(t, x)")).unwrap(), Expr::zero());
}

#[test]
fn lift_at_second_order() {
    let s = scratch();
    let sp = space(2);
    let mut g = Generator::zero(&sp);
    g.xi[1][0] = ex(&s, "u0^2");
    g.xi[1][1] = ex(&s, "x*u0");
    g.xi[1][2] = ex(&s, "t");
    let g = lift_generator(&g, &sp).unwrap();
    let xt = &g.xi_tilde.as_ref().unwrap()[1];
    assert_eq!(xt[0], ex(&s, "u0^2"));
    assert_eq!(xt[1], ex(&s, "x*u0 + 2*u0*u1"));
    // seeds carry a 1/k! weight: ξ̃_(2) = ξ_(2)/2 + u1 ∂ξ_(1)/∂u0 + u2 ∂ξ_(0)/∂u0 + u1^2/2 ∂²ξ_(0)/∂u0²
    assert_eq!(xt[2], ex(&s, "t/2 + x*u1 + 2*u0*u2 + u1^2"));
    // the lifted sum is Σ ε^k/k! ξ_(k) evaluated on the expansion, truncated
    let full = g.xi_full(1, &sp);
    let direct = expand_dependent(&ex(&s, "u^2 + eps*x*u + eps^2*t/2"), &sp);
    assert_eq!(full, direct);
}

#[test]
fn lift_of_zero_seeds_is_zero() {
    let sp = space(1);
    let g = lift_generator(&Generator::zero(&sp), &sp).unwrap();
    assert!(g.eta_tilde.unwrap().iter().flatten().all(Expr::is_zero_atom));
}

fn eps_free() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-3i64..4).prop_map(|n| n.to_string()),
        Just("x".into()),
        Just("a".into()),
        Just("u0".into()),
        Just("u1".into()),
        Just("u0_x".into()),
        Just("E0(t, x, u0)".into()),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l}) + ({r})")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l})*({r})")),
            inner.prop_map(|a| format!("sin({a})")),
        ]
    })
}

/// Polynomial in eps with eps-free coefficients.
fn graded_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![eps_free(), Just("eps".to_string())];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l}) + ({r})")),
            (inner.clone(), inner).prop_map(|(l, r)| format!("({l})*({r})")),
        ]
    })
}

fn rec(e: &Expr) -> Expr {
    recursion_apply(e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn recursion_is_linear(f in graded_text(), g in graded_text(), p in -3i64..4) {
        let s = scratch();
        let (f, g) = (ex(&s, &f), ex(&s, &g));
        prop_assert_eq!(rec(&(Expr::int(p) * &f + &g)), Expr::int(p) * rec(&f) + rec(&g));
    }

    #[test]
    fn recursion_product_rule(f in graded_text(), g in graded_text()) {
        let s = scratch();
        let (f, g) = (ex(&s, &f), ex(&s, &g));
        prop_assert_eq!(rec(&(&f * &g)), rec(&f) * &g + f.clone() * rec(&g));
    }

    #[test]
    fn grade_then_reassemble_is_truncation(e in graded_text()) {
        let sp = space(1);
        let e = ex(&scratch(), &e);
        let t = truncate(&e, &sp);
        let g = grade(&t, &sp).unwrap();
        prop_assert_eq!(g.reassemble(&sp), t);
        prop_assert!(g.coeffs.iter().all(|c| !c.contains_atom(&sp.eps_atom())));
    }

    #[test]
    fn grading_is_a_ring_homomorphism(f in graded_text(), g in graded_text()) {
        let sp = space(1);
        let s = scratch();
        let (f, g) = (truncate(&ex(&s, &f), &sp), truncate(&ex(&s, &g), &sp));
        let (gf, gg) = (grade(&f, &sp).unwrap(), grade(&g, &sp).unwrap());
        let sum = grade(&(&f + &g), &sp).unwrap();
        for k in 0..2 {
            prop_assert_eq!(sum.order(k), &(gf.order(k) + gg.order(k)));
        }
        let prod = grade(&truncate(&(&f * &g), &sp), &sp).unwrap();
        prop_assert_eq!(prod.order(0), &(gf.order(0) * gg.order(0)));
        prop_assert_eq!(prod.order(1), &(gf.order(0) * gg.order(1) + gf.order(1) * gg.order(0)));
    }
}
