mod common;

use apxsym::expr::{
    differentiate, is_zero, substitute, Atom, Bindings, Expr, ExprError, FuncBinding,
    ZeroStrategy, ZeroVerdict,
};
use apxsym::numeval::{eval, EvalContext};
use common::{ex, scratch};

fn ctx(pairs: &[(&str, f64)]) -> EvalContext {
    let mut c = EvalContext::new();
    for (n, v) in pairs {
        let a = if matches!(*n, "t" | "x") { Atom::indep(n) } else { Atom::param(n) };
        c.bind(a, *v);
    }
    c
}

#[test]
fn additive_identity() {
    let s = scratch();
    assert_eq!(ex(&s, "x + 0*a"), ex(&s, "x"));
}

#[test]
fn distributivity_cancels() {
    let s = scratch();
    assert!(ex(&s, "u*(1 - gamma*u) - (u - gamma*u^2)").is_zero_atom());
}

#[test]
fn exponentials_merge() {
    let s = scratch();
    assert_eq!(ex(&s, "exp(beta*t)*exp(-beta*t - alpha/2*x)"), ex(&s, "exp(-alpha/2*x)"));
}

#[test]
fn log_of_exp() {
    let s = scratch();
    assert_eq!(ex(&s, "log(exp(a*x + b))"), ex(&s, "a*x + b"));
}

#[test]
fn trig_folds_only_at_zero() {
    let s = scratch();
    assert!(ex(&s, "sin(0)").is_zero_atom());
    assert!(ex(&s, "cos(0)").is_one());
    // no Pythagorean rewriting
    assert!(!ex(&s, "sin(x)^2 + cos(x)^2 - 1").is_zero_atom());
}

#[test]
fn rationals_stay_exact() {
    let s = scratch();
    assert_eq!(ex(&s, "1/3 + 1/6"), Expr::rational(1, 2));
    assert_eq!(ex(&s, "(2/3)^2*x"), ex(&s, "4*x/9"));
}

#[test]
fn sqrt_is_half_power() {
    let s = scratch();
    assert_eq!(ex(&s, "sqrt(x)^2"), ex(&s, "x"));
    assert_eq!(ex(&s, "sqrt(x)"), ex(&s, "x^(1/2)"));
}

#[test]
fn polynomial_expansion_is_unique() {
    let s = scratch();
    assert_eq!(ex(&s, "(a + b)^2"), ex(&s, "a^2 + 2*a*b + b^2"));
    assert_eq!(ex(&s, "(x - 1)*(x + 1)"), ex(&s, "x^2 - 1"));
}

#[test]
fn diff_sin_chain_rule() {
    let s = scratch();
    let d = differentiate(&ex(&s, "sin(delta*x)"), &ex(&s, "x")).unwrap();
    assert_eq!(d, ex(&s, "delta*cos(delta*x)"));
}

#[test]
fn diff_rejects_non_atom() {
    let s = scratch();
    let err = differentiate(&ex(&s, "x^2"), &ex(&s, "x + t")).unwrap_err();
    assert!(matches!(err, ExprError::NotAnAtom(_)));
}

#[test]
fn diff_sqrt_rule() {
    let s = scratch();
    let d = differentiate(&ex(&s, "sqrt(x^2 + a)"), &ex(&s, "x")).unwrap();
    assert_eq!(d, ex(&s, "x/sqrt(x^2 + a)"));
}

/// Term-by-term derivative of the Gauss series, summed until negligible.
fn hyp2f1_series_derivative(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut coeff = 1.0;
    let mut sum = 0.0;
    for k in 0..400 {
        let kf = k as f64;
        if k >= 1 {
            sum += kf * coeff * z.powi(k - 1);
        }
        coeff *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0));
    }
    sum
}

#[test]
fn diff_hyp2f1_matches_series() {
    let s = scratch();
    let e = ex(&s, "hyp2f1(1/2, 1, 2, x)");
    let d = differentiate(&e, &ex(&s, "x")).unwrap();
    let got = eval(&d, &ctx(&[("x", 0.1)])).unwrap();
    let want = hyp2f1_series_derivative(0.5, 1.0, 2.0, 0.1);
    assert!((got - want).abs() < 1e-12 * want.abs(), "{got} vs {want}");
}

/// erfi by composite Simpson quadrature of its defining integral.
fn erfi_quadrature(x: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let mut s = 1.0 + (x * x).exp();
    for i in 1..n {
        let t = i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * (t * t).exp();
    }
    s * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
}

#[test]
fn diff_erfi_simplifies() {
    let s = scratch();
    let e = ex(&s, "erfi(sqrt(alpha*x)/2)");
    let d = differentiate(&e, &ex(&s, "x")).unwrap();
    let expected = ex(&s, "sqrt(alpha/(pi*x))*exp(alpha*x/4)/2");
    let c = ctx(&[("alpha", 2.0), ("x", 1.3)]);
    let got = eval(&d, &c).unwrap();
    let want = eval(&expected, &c).unwrap();
    assert!((got - want).abs() < 1e-12 * want.abs(), "{got} vs {want}");
    // and against a central difference of the quadrature oracle
    let h = 1e-4;
    let f = |x: f64| erfi_quadrature((2.0 * x).sqrt() / 2.0);
    let fd = (f(1.3 + h) - f(1.3 - h)) / (2.0 * h);
    assert!((got - fd).abs() < 1e-7 * fd.abs(), "{got} vs {fd}");
}

#[test]
fn diff_unknown_function_chain_rule() {
    let s = scratch();
    let d = differentiate(&ex(&s, "f(x^2, t)"), &ex(&s, "x")).unwrap();
    assert_eq!(d, ex(&s, "2*x*f[1,0](x^2, t)"));
    // mixed partials commute
    let dxt = differentiate(&differentiate(&ex(&s, "f(x, t)"), &ex(&s, "x")).unwrap(), &ex(&s, "t")).unwrap();
    let dtx = differentiate(&differentiate(&ex(&s, "f(x, t)"), &ex(&s, "t")).unwrap(), &ex(&s, "x")).unwrap();
    assert_eq!(dxt, dtx);
}

#[test]
fn subst_binomial() {
    let s = scratch();
    let b = Bindings::new().with_atom(Atom::jet("u", None, &[]), ex(&s, "u0 + eps*u1"));
    assert_eq!(substitute(&ex(&s, "u^2"), &b), ex(&s, "u0^2 + 2*eps*u0*u1 + eps^2*u1^2"));
}

#[test]
fn subst_is_simultaneous() {
    let s = scratch();
    let b = Bindings::new()
        .with_atom(Atom::indep("x"), ex(&s, "t"))
        .with_atom(Atom::indep("t"), ex(&s, "x"));
    assert_eq!(substitute(&ex(&s, "x + t"), &b), ex(&s, "x + t"));
    assert_eq!(substitute(&ex(&s, "x - t"), &b), ex(&s, "t - x"));
}

#[test]
fn subst_similarity_argument() {
    let s = scratch();
    let b = Bindings::new().with_atom(Atom::param("kappa1"), ex(&s, "4*beta/(alpha + delta)*t + x"));
    let got = substitute(&ex(&s, "U0(kappa1)"), &b);
    assert_eq!(got, ex(&s, "U0(4*beta/(alpha + delta)*t + x)"));
}

#[test]
fn subst_function_binding_with_derivatives() {
    let s = scratch();
    let mut b = Bindings::new();
    b.funcs.insert(
        apxsym::expr::name("f"),
        FuncBinding::new(vec![Atom::indep("x"), Atom::indep("t")], ex(&s, "x^2*exp(t)")),
    );
    assert_eq!(b.apply(&ex(&s, "f(a, b)")), ex(&s, "a^2*exp(b)"));
    assert_eq!(b.apply(&ex(&s, "f[1,1](a, b)")), ex(&s, "2*a*exp(b)"));
}

#[test]
fn zero_of_zero_is_proved() {
    assert_eq!(is_zero(&Expr::zero(), &ZeroStrategy::default()).unwrap(), ZeroVerdict::ProvedZero);
}

#[test]
fn pythagorean_identity_is_numeric() {
    let s = scratch();
    let v = is_zero(&ex(&s, "sin(a*x)^2 + cos(a*x)^2 - 1"), &ZeroStrategy::default()).unwrap();
    assert!(matches!(v, ZeroVerdict::NumericallyZero { samples: 25, .. }), "{v:?}");
}

#[test]
fn small_parameter_is_nonzero() {
    let s = scratch();
    let v = is_zero(&ex(&s, "eps"), &ZeroStrategy::default()).unwrap();
    let w = v.witness().expect("failed verdicts carry a witness");
    assert!(matches!(v, ZeroVerdict::NumericallyNonzero { .. }));
    assert_eq!(w.point.keys().collect::<Vec<_>>(), ["eps"]);
}

#[test]
fn nonzero_constant_is_proved_nonzero() {
    let s = scratch();
    let v = is_zero(&ex(&s, "3/7"), &ZeroStrategy::default()).unwrap();
    assert!(matches!(v, ZeroVerdict::ProvedNonzero { .. }));
}

#[test]
fn rational_identity_is_proved() {
    let s = scratch();
    let e = ex(&s, "1/(a - b) - 1/(a + b) - 2*b/(a^2 - b^2)");
    assert_eq!(is_zero(&e, &ZeroStrategy::default()).unwrap(), ZeroVerdict::ProvedZero);
}

#[test]
fn equivalent_exponents_are_unified() {
    let s = scratch();
    let e = ex(&s, "exp(t/(a + b))*x - exp((a - b)*t/(a^2 - b^2))*x");
    assert_eq!(is_zero(&e, &ZeroStrategy::default()).unwrap(), ZeroVerdict::ProvedZero);
}

#[test]
fn exhausted_guards_are_an_error() {
    let s = scratch();
    let mut st = ZeroStrategy::default();
    st.max_attempts = 5;
    st.domains.require.push(ex(&s, "-1 - a^2"));
    let err = is_zero(&ex(&s, "a - b"), &st).unwrap_err();
    assert!(matches!(err, ExprError::Inconclusive(_)), "{err}");
}

#[test]
fn sampling_is_deterministic() {
    let s = scratch();
    let e = ex(&s, "a*x - b");
    let st = ZeroStrategy::default();
    assert_eq!(is_zero(&e, &st).unwrap(), is_zero(&e, &st).unwrap());
    let other = ZeroStrategy { seed: 7, ..ZeroStrategy::default() };
    assert_ne!(is_zero(&e, &st).unwrap(), is_zero(&e, &other).unwrap());
}

#[test]
fn printing_is_canonical() {
    let s = scratch();
    assert_eq!(ex(&s, "b + a").to_string(), ex(&s, "a + b").to_string());
    assert_eq!(ex(&s, "-x + 2*t*x").to_string(), "-x + 2*t*x");
    assert_eq!(ex(&s, "u0_x*u1_tx").to_string(), "u0_x*u1_tx");
}

#[test]
fn free_atoms_and_jets() {
    let s = scratch();
    let e = ex(&s, "alpha*u0_x + f(t, u0)");
    let jets: Vec<String> = e.jet_coords().iter().map(|c| c.to_string()).collect();
    assert_eq!(jets, ["u0", "u0_x"]);
    assert!(e.contains_atom(&Atom::param("alpha")));
    assert!(!e.contains_atom(&Atom::param("beta")));
}
