mod common;

use apxsym::approx::{grade, lift_generator, truncate};
use apxsym::expr::{differentiate, Expr, MultiIndex};
use apxsym::jet::{prolong, total_derivative_by, total_derivative_multi, Generator, JetSpace};
use common::{ex, scratch};
use proptest::prelude::*;

fn space(order: u32) -> JetSpace {
    JetSpace::new(&["t", "x"], &["u"], "eps", order)
}

fn mi(vars: &str) -> MultiIndex {
    MultiIndex::from_vars(vars.split("").filter(|s| !s.is_empty()))
}

/// Generic seeds: every component an opaque function of (t, x, u0).
fn generic(space: &JetSpace) -> Generator {
    let s = scratch();
    let mut g = Generator::zero(space);
    let f = |n: &str| ex(&s, &format!("{n}(t, x, u0)"));
    g.xi[0][0] = f("T0");
    g.xi[1][0] = f("X0");
    g.eta[0][0] = f("E0");
    if space.order >= 1 {
        g.xi[0][1] = f("T1");
        g.xi[1][1] = f("X1");
        g.eta[0][1] = f("E1");
    }
    lift_generator(&g, space).unwrap()
}

#[test]
fn total_derivative_examples() {
    let s = scratch();
    let d = total_derivative_by(&ex(&s, "u*u_x"), "x").unwrap();
    assert_eq!(d, ex(&s, "u_x^2 + u*u_xx"));
    let d = total_derivative_by(&ex(&s, "f(t, u0)"), "t").unwrap();
    assert_eq!(d, ex(&s, "f[1,0](t, u0) + u0_t*f[0,1](t, u0)"));
    let d = total_derivative_by(&ex(&s, "x^2*u1 + a*t"), "x").unwrap();
    assert_eq!(d, ex(&s, "2*x*u1 + x^2*u1_x"));
    let d = total_derivative_multi(&ex(&s, "u0^2"), &mi("tx")).unwrap();
    assert_eq!(d, ex(&s, "2*u0_t*u0_x + 2*u0*u0_tx"));
}

#[test]
fn translations_prolong_to_zero() {
    for p in 0..=2 {
        let sp = space(p);
        for i in 0..2 {
            let g = lift_generator(&Generator::translation(&sp, i), &sp).unwrap();
            for (k, c) in prolong(&g, 2, &sp).unwrap() {
                assert!(c.is_zero_atom(), "order {p}, {k:?}: {c}");
            }
        }
    }
}

#[test]
fn zero_generator_prolongs_to_zero() {
    let sp = space(1);
    let g = lift_generator(&Generator::zero(&sp), &sp).unwrap();
    assert!(prolong(&g, 3, &sp).unwrap().values().all(Expr::is_zero_atom));
}

/// η_σ = D_σ(η̂ - ξ̂^i û_i) + ξ̂^i û_{σ+i}, truncated.
fn characteristic(g: &Generator, sp: &JetSpace, sigma: &MultiIndex) -> Expr {
    let mut q = g.eta_full(0, sp);
    for i in 0..2 {
        let ui = sp.expanded_coord(0, &MultiIndex::empty().bump(&sp.indep[i]));
        q = q - g.xi_full(i, sp) * ui;
    }
    let q = truncate(&q, sp);
    let mut out = total_derivative_multi(&q, sigma).unwrap();
    for i in 0..2 {
        out = out + g.xi_full(i, sp) * sp.expanded_coord(0, &sigma.bump(&sp.indep[i]));
    }
    truncate(&out, sp)
}

#[test]
fn recursion_matches_characteristic_form() {
    for p in 0..=1 {
        let sp = space(p);
        let g = generic(&sp);
        let pr = prolong(&g, 2, &sp).unwrap();
        for sigma in ["t", "x", "tt", "tx", "xx"] {
            let got = &pr[&(apxsym::expr::name("u"), mi(sigma))];
            let want = characteristic(&g, &sp, &mi(sigma));
            assert!((got - &want).is_zero_atom(), "p={p} σ={sigma}");
        }
    }
}

#[test]
fn leading_order_is_classical() {
    let s = scratch();
    let sp = space(1);
    let pr = prolong(&generic(&sp), 1, &sp).unwrap();
    let eta_x = grade(&pr[&(apxsym::expr::name("u"), mi("x"))], &sp).unwrap();
    // classical first prolongation in u0 with the order-0 seeds
    let classical = ex(
        &s,
        "E0[0,1,0](t,x,u0) + u0_x*E0[0,0,1](t,x,u0)
         - u0_x*(X0[0,1,0](t,x,u0) + u0_x*X0[0,0,1](t,x,u0))
         - u0_t*(T0[0,1,0](t,x,u0) + u0_x*T0[0,0,1](t,x,u0))",
    );
    assert_eq!(eta_x.order(0), &classical);
}

#[test]
fn cubic_coefficient_of_second_prolongation() {
    let s = scratch();
    let sp = space(1);
    let pr = prolong(&generic(&sp), 2, &sp).unwrap();
    let eta_xx = grade(&pr[&(apxsym::expr::name("u"), mi("xx"))], &sp).unwrap();
    let ux = ex(&s, "u0_x");
    let mut c = eta_xx.order(0).clone();
    for _ in 0..3 {
        c = differentiate(&c, &ux).unwrap();
    }
    let c = c * Expr::rational(1, 6);
    assert_eq!(c, ex(&s, "-X0[0,0,2](t, x, u0)"));
}

#[test]
fn first_order_part_involves_lifted_seeds() {
    let s = scratch();
    let sp = space(1);
    let g = generic(&sp);
    // ξ̃_(1) = ξ_(1) + u1 ∂ξ_(0)/∂u0
    assert_eq!(g.xi_tilde.as_ref().unwrap()[1][1], ex(&s, "X1(t,x,u0) + u1*X0[0,0,1](t,x,u0)"));
    let eta_t = grade(&prolong(&g, 1, &sp).unwrap()[&(apxsym::expr::name("u"), mi("t"))], &sp).unwrap();
    let c = eta_t.order(1);
    assert!(c.contains_atom(&apxsym::expr::Atom::jet("u", Some(1), &["t"])));
    assert!(!c.is_zero_atom());
}

fn jet_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1i64..4).prop_map(|n| n.to_string()),
        Just("x".into()),
        Just("t".into()),
        Just("u0".into()),
        Just("u1_x".into()),
        Just("u0_t".into()),
        Just("f(t, u0)".into()),
        Just("g(x, u1)".into()),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l}) + ({r})")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l})*({r})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.prop_map(|a| format!("exp({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn total_derivatives_commute(e in jet_expr()) {
        let e = ex(&scratch(), &e);
        let tx = total_derivative_by(&total_derivative_by(&e, "t").unwrap(), "x").unwrap();
        let xt = total_derivative_by(&total_derivative_by(&e, "x").unwrap(), "t").unwrap();
        prop_assert_eq!(tx, xt);
    }

    #[test]
    fn prolongation_respects_truncation(seeds in prop::collection::vec(jet_expr(), 6)) {
        let s = scratch();
        let sp = space(1);
        let mut g = Generator::zero(&sp);
        // seeds may only use order-0 coordinates
        let clean = |t: &str| ex(&s, &t.replace("u1_x", "x").replace("u0_t", "t").replace("u1", "u0"));
        g.xi[0][0] = clean(&seeds[0]);
        g.xi[0][1] = clean(&seeds[1]);
        g.xi[1][0] = clean(&seeds[2]);
        g.xi[1][1] = clean(&seeds[3]);
        g.eta[0][0] = clean(&seeds[4]);
        g.eta[0][1] = clean(&seeds[5]);
        prop_assert!(g.check_seeds(&sp).is_ok());
        let g = lift_generator(&g, &sp).unwrap();
        for c in prolong(&g, 2, &sp).unwrap().values() {
            prop_assert!(grade(c, &sp).is_ok(), "{}", c);
        }
    }
}
