#![allow(dead_code)]

pub mod oracle;

use apxsym::expr::Expr;
use apxsym::parse::{parse_expr, parse_problem, ProblemSpec};

pub const HEADER: &str = "indep t x;
dep u;
small eps order 1;
param alpha beta gamma delta a b c kappa1 kappa2;
func f g h U0 U1 X0 X1 E0 E1 T0 T1;
";

/// Declarations shared by tests that only need expressions.
pub fn scratch() -> ProblemSpec {
    parse_problem(HEADER).expect("header parses")
}

pub fn ex(spec: &ProblemSpec, text: &str) -> Expr {
    parse_expr(text, spec).unwrap_or_else(|e| panic!("`{text}`: {e}"))
}

pub fn fixture_text(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture(name: &str) -> ProblemSpec {
    parse_problem(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}:{e}"))
}

pub fn fixture_names() -> Vec<String> {
    let dir = format!("{}/../../fixtures", env!("CARGO_MANIFEST_DIR"));
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".apx"))
        .collect();
    v.sort();
    v
}
