mod common;

use apxsym::expr::{Expr, Q};
use apxsym::parse::{parse_expr, parse_problem, print_problem, Guard, ParseError, ProblemSpec};
use common::{ex, fixture_names, fixture_text, scratch};
use proptest::prelude::*;

fn err(text: &str) -> ParseError {
    parse_problem(text).expect_err("should not parse")
}

#[test]
fn equation_expands_total_derivative() {
    let spec = parse_problem(
        "indep t x; dep u; small eps order 1; param alpha beta gamma;
         equation eps*u_tt + u_t - (u*u_x)_x - alpha*u*u_x + beta*u*(1 - gamma*u) = 0;",
    )
    .unwrap();
    assert_eq!(spec.equations.len(), 1);
    let want = ex(
        &spec,
        "eps*u_tt + u_t - u_x^2 - u*u_xx - alpha*u*u_x + beta*u - beta*gamma*u^2",
    );
    assert_eq!(spec.equations[0].residual(), want);
    assert_eq!(spec.equation_order(), 2);
}

#[test]
fn dangling_plus_points_at_last_token() {
    let s = scratch();
    let e = parse_expr("u_t +", &s).unwrap_err();
    assert_eq!(e.position(), (1, 5));
    assert!(e.to_string().contains("end of input"), "{e}");
}

#[test]
fn positions_count_lines_and_columns() {
    let e = err("indep t x;\ndep u;\n\n  equation u_t = nu;");
    assert_eq!(e, ParseError::Undeclared { line: 4, col: 18, name: "nu".into() });
}

#[test]
fn empty_input_is_an_empty_problem() {
    let spec = parse_problem("").unwrap();
    assert_eq!(spec, ProblemSpec::default());
    assert_eq!(spec.small.as_ref(), "eps");
    assert_eq!(spec.order, 1);
    assert_eq!(parse_problem("# only a comment\n").unwrap(), spec);
}

#[test]
fn fixtures_round_trip() {
    let names = fixture_names();
    assert!(names.len() >= 3);
    for n in names {
        let spec = parse_problem(&fixture_text(&n)).unwrap_or_else(|e| panic!("{n}:{e}"));
        let printed = print_problem(&spec);
        let back = parse_problem(&printed).unwrap_or_else(|e| panic!("{n} reprint:{e}\n{printed}"));
        assert_eq!(back, spec, "{n}");
        assert_eq!(print_problem(&back), printed, "{n}");
    }
}

#[test]
fn subscript_spellings_agree() {
    let s = scratch();
    assert_eq!(ex(&s, "u_tx"), ex(&s, "u_{t,x}"));
    assert_eq!(ex(&s, "u_xt"), ex(&s, "u_tx"));
    assert_eq!(ex(&s, "(u1)_x"), ex(&s, "u1_x"));
}

#[test]
fn primes_and_bracket_derivatives_agree() {
    let s = scratch();
    assert_eq!(ex(&s, "U0''(x)"), ex(&s, "U0[2](x)"));
}

#[test]
fn decimals_are_exact() {
    let s = scratch();
    assert_eq!(ex(&s, "0.03"), Expr::rational(3, 100));
    assert_eq!(ex(&s, "1.50*x"), ex(&s, "3*x/2"));
}

#[test]
fn block_names_join_on_adjacent_dashes() {
    let spec = parse_problem(
        "indep t x; dep u; param a;
         case case1-set2 { constraint a = 1; }
         generator g-2 case case1-set2 { xi[t,0] = a - 1; }",
    )
    .unwrap();
    assert_eq!(spec.cases[0].name, "case1-set2");
    assert_eq!(spec.generators[0].name, "g-2");
    assert_eq!(spec.generators[0].case.as_deref(), Some("case1-set2"));
    assert_eq!(spec.generators[0].xi[0].2, ex(&spec, "a - 1"));
}

#[test]
fn lets_are_local_to_their_block() {
    let text = "indep t x; dep u; param a;
        generator g { let c = 2*a; xi[x,0] = c; }
        generator h { xi[x,0] = c; }";
    let e = err(text);
    assert!(matches!(e, ParseError::Undeclared { ref name, .. } if name == "c"), "{e}");
}

#[test]
fn restrictions_are_collected() {
    let spec = parse_problem(
        "indep t x; dep u; param a b;
         require a - b > 0; exclude b; domain x (0, 5/2);",
    )
    .unwrap();
    let r = &spec.restrictions;
    assert_eq!(r.guards, vec![Guard::Positive(ex(&spec, "a - b")), Guard::NonZero(ex(&spec, "b"))]);
    assert_eq!(r.domains[0].hi, Q::new(5.into(), 2.into()));
}

#[test]
fn redeclaration_is_rejected() {
    let e = err("indep t x; param t;");
    assert_eq!(e.to_string(), "1:18: `t` is already declared");
    let e = err("param exp;");
    assert!(e.to_string().contains("already declared"));
}

#[test]
fn duplicate_blocks_are_rejected() {
    let e = err("indep t; dep u; generator g { } generator g { }");
    assert_eq!(e.to_string(), "1:43: generator `g` defined twice");
    let e = err("indep t; dep u; generator g { xi[t,0] = 1; xi[t,0] = 2; }");
    assert!(e.to_string().contains("component assigned twice"));
}

#[test]
fn division_by_literal_zero_is_rejected() {
    let e = parse_expr("x/0", &scratch()).unwrap_err();
    assert_eq!(e.to_string(), "1:2: division by zero");
}

// ---- docs/dsl.md golden tests ----

struct Block {
    tag: String,
    body: String,
}

fn doc_blocks() -> Vec<Block> {
    let path = format!("{}/../../docs/dsl.md", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for line in text.lines() {
        match (&mut cur, line.strip_prefix("```")) {
            (None, Some(tag)) => cur = Some(Block { tag: tag.trim().into(), body: String::new() }),
            (Some(_), Some("")) => out.push(cur.take().unwrap()),
            (Some(b), _) => {
                b.body.push_str(line);
                b.body.push('\n');
            }
            (None, None) => {}
        }
    }
    assert!(cur.is_none(), "unterminated code block");
    out
}

#[test]
fn doc_examples_parse_and_round_trip() {
    let blocks = doc_blocks();
    let valid: Vec<&Block> = blocks.iter().filter(|b| b.tag == "apx").collect();
    assert!(valid.len() >= 5);
    for b in valid {
        let spec = parse_problem(&b.body).unwrap_or_else(|e| panic!("{e}\n{}", b.body));
        assert_eq!(parse_problem(&print_problem(&spec)).unwrap(), spec);
    }
}

#[test]
fn doc_errors_match_exactly() {
    let blocks = doc_blocks();
    let mut n = 0;
    for (i, b) in blocks.iter().enumerate() {
        if b.tag != "apx-error" {
            continue;
        }
        let want = blocks.get(i + 1).filter(|m| m.tag == "text").expect("message block follows");
        let got = parse_problem(&b.body).expect_err(&b.body).to_string();
        assert_eq!(got, want.body.trim_end(), "\n{}", b.body);
        n += 1;
    }
    assert!(n >= 6);
}

#[test]
fn doc_grammar_names_every_kernel() {
    let blocks = doc_blocks();
    let grammar = &blocks.iter().find(|b| b.tag == "ebnf").unwrap().body;
    for k in ["exp", "log", "sin", "cos", "erfi", "hyp2f1", "sqrt"] {
        assert!(grammar.contains(&format!("\"{k}\"")), "{k}");
    }
}

// ---- random small problems ----

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..5).prop_map(|n| n.to_string()),
        Just("x".to_string()),
        Just("t".to_string()),
        Just("a".to_string()),
        Just("u".to_string()),
        Just("u0_x".to_string()),
        Just("u1_tx".to_string()),
        Just("f(t, x)".to_string()),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("{l} + {r}")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l})*({r})")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l}) - ({r})")),
            (inner.clone(), 2u32..4).prop_map(|(b, k)| format!("({b})^{k}")),
            inner.clone().prop_map(|a| format!("exp({a})")),
            inner.prop_map(|a| format!("({a})_x")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_problems_round_trip(eqs in prop::collection::vec(expr_text(), 1..3),
                                  xi in expr_text(), eta in expr_text(), sol in expr_text()) {
        let mut text = String::from("indep t x;\ndep u;\nsmall eps order 1;\nparam a b;\nfunc f;\n");
        for e in &eqs {
            text.push_str(&format!("equation {e} = 0;\n"));
        }
        text.push_str(&format!("case c1 {{ constraint a = 2*b solve a; domain b (1, 2); }}\n"));
        text.push_str(&format!("generator g case c1 {{ xi[x,0] = {xi}; eta[u,1] = {eta}; }}\n"));
        let sol = sol.replace("u1_tx", "1").replace("u0_x", "x").replace('u', "t");
        text.push_str(&format!("solution s {{ u0 = {sol}; values v {{ a = 1; eps = 0.01; }} }}\n"));
        let spec = parse_problem(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let printed = print_problem(&spec);
        let back = parse_problem(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(back, spec);
    }
}
