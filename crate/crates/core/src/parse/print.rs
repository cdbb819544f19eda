use std::fmt::Write;

use super::*;
use crate::expr::Expr;

fn q(v: &Q) -> String {
    Expr::num(v.clone()).to_string()
}

fn names(out: &mut String, kw: &str, v: &[Name]) {
    if !v.is_empty() {
        let joined: Vec<&str> = v.iter().map(|n| n.as_ref()).collect();
        writeln!(out, "{kw} {};", joined.join(" ")).unwrap();
    }
}

fn constraint(out: &mut String, indent: &str, c: &Constraint) {
    write!(out, "{indent}constraint {} = {}", c.eq.lhs, c.eq.rhs).unwrap();
    if let Some(s) = &c.solve {
        write!(out, " solve {s}").unwrap();
    }
    out.push_str(";\n");
}

fn restrictions(out: &mut String, indent: &str, r: &Restrictions) {
    for g in &r.guards {
        match g {
            Guard::Positive(e) => writeln!(out, "{indent}require {e} > 0;"),
            Guard::NonZero(e) => writeln!(out, "{indent}exclude {e};"),
        }
        .unwrap();
    }
    for d in &r.domains {
        writeln!(out, "{indent}domain {} ({}, {});", d.var, q(&d.lo), q(&d.hi)).unwrap();
    }
}

fn lets(out: &mut String, v: &[Let]) {
    for l in v {
        writeln!(out, "  let {} = {};", l.name, l.value).unwrap();
    }
}

fn parts(out: &mut String, v: &[(Name, u32, Expr)]) {
    for (d, k, e) in v {
        writeln!(out, "  {d}{k} = {e};").unwrap();
    }
}

fn case_suffix(c: &Option<String>) -> String {
    c.as_ref().map(|c| format!(" case {c}")).unwrap_or_default()
}

/// Deterministic text form; parsing it yields an equal [`ProblemSpec`].
pub fn print_problem(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    names(&mut out, "indep", &spec.indep);
    names(&mut out, "dep", &spec.deps);
    writeln!(out, "small {} order {};", spec.small, spec.order).unwrap();
    names(&mut out, "param", &spec.params);
    names(&mut out, "func", &spec.funcs);
    for e in &spec.equations {
        writeln!(out, "equation {} = {};", e.lhs, e.rhs).unwrap();
    }
    for c in &spec.constraints {
        constraint(&mut out, "", c);
    }
    restrictions(&mut out, "", &spec.restrictions);
    for c in &spec.cases {
        writeln!(out, "\ncase {} {{", c.name).unwrap();
        for k in &c.constraints {
            constraint(&mut out, "  ", k);
        }
        restrictions(&mut out, "  ", &c.restrictions);
        out.push_str("}\n");
    }
    for g in &spec.generators {
        writeln!(out, "\ngenerator {}{} {{", g.name, case_suffix(&g.case)).unwrap();
        lets(&mut out, &g.lets);
        for (v, k, e) in &g.xi {
            writeln!(out, "  xi[{v},{k}] = {e};").unwrap();
        }
        for (v, k, e) in &g.eta {
            writeln!(out, "  eta[{v},{k}] = {e};").unwrap();
        }
        restrictions(&mut out, "  ", &g.restrictions);
        out.push_str("}\n");
    }
    for r in &spec.representations {
        writeln!(out, "\nrepresentation {} generator {} {{", r.name, r.generator).unwrap();
        lets(&mut out, &r.lets);
        parts(&mut out, &r.parts);
        out.push_str("}\n");
    }
    for s in &spec.solutions {
        writeln!(out, "\nsolution {}{} {{", s.name, case_suffix(&s.case)).unwrap();
        lets(&mut out, &s.lets);
        parts(&mut out, &s.parts);
        restrictions(&mut out, "  ", &s.restrictions);
        for v in &s.value_sets {
            writeln!(out, "  values {} {{", v.name).unwrap();
            for (n, e) in &v.values {
                writeln!(out, "    {n} = {e};").unwrap();
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}
