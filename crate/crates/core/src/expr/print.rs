use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{Atom, Constant, Expr, JetCoord, Node, Q};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_sum(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for JetCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dep)?;
        if let Some(k) = self.order {
            write!(f, "{k}")?;
        }
        if !self.sigma.is_empty() {
            let vars = self.sigma.vars();
            if vars.iter().all(|v| v.chars().count() == 1) {
                f.write_char('_')?;
                for v in vars {
                    f.write_str(&v)?;
                }
            } else {
                let joined: Vec<&str> = vars.iter().map(|v| v.as_ref()).collect();
                write!(f, "_{{{}}}", joined.join(","))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Indep(n) | Atom::Param(n) => f.write_str(n),
            Atom::Const(Constant::Pi) => f.write_str("pi"),
            Atom::Jet(j) => write!(f, "{j}"),
        }
    }
}

fn write_q(out: &mut String, q: &Q) {
    if q.is_integer() {
        write!(out, "{}", q.numer()).unwrap();
    } else {
        write!(out, "{}/{}", q.numer(), q.denom()).unwrap();
    }
}

fn write_sum(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                let neg = t.is_negative_form();
                let body = if neg { -t } else { t.clone() };
                match (i, neg) {
                    (0, true) => out.push('-'),
                    (0, false) => {}
                    (_, true) => out.push_str(" - "),
                    (_, false) => out.push_str(" + "),
                }
                write_term(out, &body);
            }
        }
        _ => {
            if e.is_negative_form() {
                out.push('-');
                write_term(out, &-e);
            } else {
                write_term(out, e);
            }
        }
    }
}

/// Writes a term with non-negative leading coefficient.
fn write_term(out: &mut String, e: &Expr) {
    let (c, fs) = e.coeff_and_factors();
    let mut num: Vec<(Expr, Q)> = Vec::new();
    let mut den: Vec<(Expr, Q)> = Vec::new();
    for f in &fs {
        let (b, ex) = f.base_exp();
        if ex.is_negative() {
            den.push((b, -ex));
        } else {
            num.push((b, ex));
        }
    }
    let cn = Q::from_integer(c.numer().clone());
    let cd = c.denom().clone();

    let mut parts: Vec<String> = Vec::new();
    if !cn.is_one() || num.is_empty() {
        let mut s = String::new();
        write_q(&mut s, &cn);
        parts.push(s);
    }
    for (b, ex) in &num {
        parts.push(power_string(b, ex));
    }
    out.push_str(&parts.join("*"));

    let mut dparts: Vec<String> = Vec::new();
    if !cd.is_one() {
        dparts.push(cd.to_string());
    }
    for (b, ex) in &den {
        dparts.push(power_string(b, ex));
    }
    if !dparts.is_empty() {
        out.push('/');
        if dparts.len() == 1 {
            out.push_str(&dparts[0]);
        } else if den.iter().any(|(b, _)| matches!(b.node(), Node::Add(_))) {
            // a product with a sum would be expanded on reparse
            out.push_str(&dparts.join("/"));
        } else {
            out.push('(');
            out.push_str(&dparts.join("*"));
            out.push(')');
        }
    }
}

fn power_string(b: &Expr, ex: &Q) -> String {
    let mut s = String::new();
    if *ex == Q::new(1.into(), 2.into()) {
        s.push_str("sqrt(");
        write_sum(&mut s, b);
        s.push(')');
        return s;
    }
    write_primary(&mut s, b);
    if !ex.is_one() {
        s.push('^');
        if ex.is_integer() {
            write_q(&mut s, ex);
        } else {
            s.push('(');
            write_q(&mut s, ex);
            s.push(')');
        }
    }
    s
}

/// Writes an expression in a position that binds tighter than `*` and `^`.
fn write_primary(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Num(q) if q.is_integer() && !q.is_negative() => write_q(out, q),
        Node::Atom(a) => write!(out, "{a}").unwrap(),
        Node::Func(f) => {
            out.push_str(&f.name);
            if f.derivs.iter().any(|&d| d > 0) {
                let ds: Vec<String> = f.derivs.iter().map(u32::to_string).collect();
                write!(out, "[{}]", ds.join(",")).unwrap();
            }
            write_args(out, &f.args);
        }
        Node::Kernel(k, args) => {
            out.push_str(k.name());
            write_args(out, args);
        }
        _ => {
            out.push('(');
            write_sum(out, e);
            out.push(')');
        }
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_sum(out, a);
    }
    out.push(')');
}
