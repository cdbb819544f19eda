use std::collections::HashSet;

use num_traits::{ToPrimitive, Zero};

use super::lexer::{lex, Tok, Token};
use super::*;
use crate::expr::{name, Expr, FuncApp, JetCoord, Kernel, MultiIndex, Q};
use crate::jet::total_derivative_by;

const EXPR_START: [&str; 4] = ["number", "identifier", "`(`", "`-`"];

/// Parses a complete problem description.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let mut p = Parser::new(text)?;
    p.problem()
}

/// Parses a single expression against the declarations of `spec`.
pub fn parse_expr(text: &str, spec: &ProblemSpec) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    p.spec = spec.clone();
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    spec: ProblemSpec,
    /// `let` names visible in the current block.
    locals: Vec<Name>,
}

fn syntax(t: &Token, expected: &[&str]) -> ParseError {
    ParseError::Syntax {
        line: t.line,
        col: t.col,
        found: t.tok.describe(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            spec: ProblemSpec::default(),
            locals: Vec::new(),
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    /// Error at the current token; at end of input, points at the last real
    /// token so the position stays inside the source.
    fn err_here(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        if t.tok == Tok::Eof && self.pos > 0 {
            let prev = &self.toks[self.pos - 1];
            return ParseError::Syntax {
                line: prev.line,
                col: prev.col,
                found: Tok::Eof.describe(),
                expected: expected.iter().map(|s| s.to_string()).collect(),
            };
        }
        syntax(t, expected)
    }

    fn invalid(&self, t: &Token, msg: impl Into<String>) -> ParseError {
        ParseError::Invalid {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek_tok() == Tok::Sym(c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, ParseError> {
        if self.is_sym(c) {
            Ok(self.next())
        } else {
            Err(self.err_here(&[&format!("`{c}`")]))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek_tok(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.err_here(&[&format!("`{kw}`")]))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek_tok() == Tok::Eof {
            Ok(())
        } else {
            Err(self.err_here(&["end of input"]))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), ParseError> {
        match self.peek_tok().clone() {
            Tok::Ident(s) => Ok((s, self.next())),
            _ => Err(self.err_here(&["identifier"])),
        }
    }

    /// Plain name: letters, digits and underscores, no braces.
    fn simple_ident(&mut self) -> Result<(Name, Token), ParseError> {
        let (s, t) = self.ident()?;
        if s.contains('{') {
            return Err(self.invalid(&t, format!("`{s}` is not a valid name here")));
        }
        Ok((name(&s), t))
    }

    /// Block name: identifiers and numbers joined by adjacent `-`.
    fn block_name(&mut self) -> Result<String, ParseError> {
        let (mut s, mut last) = self.ident()?;
        loop {
            let dash = self.peek().clone();
            if dash.tok != Tok::Sym('-') || dash.start != last.end {
                break;
            }
            let after = &self.toks[self.pos + 1];
            if after.start != dash.end || !matches!(after.tok, Tok::Ident(_) | Tok::Num(_)) {
                break;
            }
            self.next();
            let t = self.next();
            match &t.tok {
                Tok::Ident(p) => s.push_str(&format!("-{p}")),
                Tok::Num(q) => s.push_str(&format!("-{q}")),
                _ => unreachable!(),
            }
            last = t;
        }
        Ok(s)
    }

    fn declared(&self, n: &str) -> bool {
        let has = |v: &Vec<Name>| v.iter().any(|x| x.as_ref() == n);
        has(&self.spec.indep)
            || has(&self.spec.deps)
            || has(&self.spec.params)
            || has(&self.spec.funcs)
            || self.spec.small.as_ref() == n
    }

    fn declare(&mut self, t: &Token, n: &Name) -> Result<(), ParseError> {
        if self.declared(n) || Kernel::from_name(n).is_some() || matches!(n.as_ref(), "pi" | "sqrt")
        {
            return Err(self.invalid(t, format!("`{n}` is already declared")));
        }
        Ok(())
    }

    fn name_list(&mut self) -> Result<Vec<(Name, Token)>, ParseError> {
        let mut v = Vec::new();
        while matches!(self.peek_tok(), Tok::Ident(_)) {
            v.push(self.simple_ident()?);
        }
        self.expect_sym(';')?;
        Ok(v)
    }

    fn problem(&mut self) -> Result<ProblemSpec, ParseError> {
        let mut seen_small = false;
        self.spec.small = name("");
        loop {
            let t = self.peek().clone();
            let kw = match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return Err(syntax(&t, &["statement"])),
            };
            match kw.as_str() {
                "indep" | "dep" | "param" | "func" => {
                    self.next();
                    for (n, nt) in self.name_list()? {
                        self.declare(&nt, &n)?;
                        if kw == "dep" && n.ends_with(|c: char| c.is_ascii_digit()) {
                            return Err(self.invalid(
                                &nt,
                                format!("dependent variable `{n}` must not end in a digit"),
                            ));
                        }
                        match kw.as_str() {
                            "indep" => self.spec.indep.push(n),
                            "dep" => self.spec.deps.push(n),
                            "param" => self.spec.params.push(n),
                            _ => self.spec.funcs.push(n),
                        }
                    }
                }
                "small" => {
                    self.next();
                    if seen_small {
                        return Err(self.invalid(&t, "small parameter declared twice"));
                    }
                    seen_small = true;
                    let (n, nt) = self.simple_ident()?;
                    self.declare(&nt, &n)?;
                    self.spec.small = n;
                    self.expect_kw("order")?;
                    let ot = self.peek().clone();
                    let q = match self.next().tok {
                        Tok::Num(q) => q,
                        _ => return Err(syntax(&ot, &["number"])),
                    };
                    self.spec.order = q
                        .is_integer()
                        .then(|| q.to_integer().to_u32())
                        .flatten()
                        .ok_or_else(|| self.invalid(&ot, "order must be a non-negative integer"))?;
                    self.expect_sym(';')?;
                }
                "equation" => {
                    self.next();
                    let eq = self.equation()?;
                    self.expect_sym(';')?;
                    self.spec.equations.push(eq);
                }
                "constraint" => {
                    self.next();
                    let c = self.constraint()?;
                    self.spec.constraints.push(c);
                }
                "require" | "exclude" | "domain" => {
                    let mut r = std::mem::take(&mut self.spec.restrictions);
                    self.restriction(&mut r)?;
                    self.spec.restrictions = r;
                }
                "case" => {
                    self.next();
                    let c = self.case_block()?;
                    self.spec.cases.push(c);
                }
                "generator" => {
                    self.next();
                    let g = self.generator_block()?;
                    self.spec.generators.push(g);
                }
                "representation" => {
                    self.next();
                    let r = self.representation_block()?;
                    self.spec.representations.push(r);
                }
                "solution" => {
                    self.next();
                    let s = self.solution_block()?;
                    self.spec.solutions.push(s);
                }
                _ => return Err(syntax(&t, &["statement"])),
            }
        }
        if !seen_small {
            self.spec.small = ProblemSpec::default().small;
        }
        Ok(std::mem::take(&mut self.spec))
    }

    fn equation(&mut self) -> Result<Equation, ParseError> {
        let lhs = self.expr()?;
        self.expect_sym('=')?;
        let rhs = self.expr()?;
        Ok(Equation { lhs, rhs })
    }

    /// After the `constraint` keyword.
    fn constraint(&mut self) -> Result<Constraint, ParseError> {
        let eq = self.equation()?;
        let solve = if self.is_kw("solve") {
            self.next();
            let (n, t) = self.simple_ident()?;
            if !self.spec.params.contains(&n) {
                return Err(self.invalid(&t, format!("`{n}` is not a parameter")));
            }
            Some(n)
        } else {
            None
        };
        self.expect_sym(';')?;
        Ok(Constraint { eq, solve })
    }

    /// `require e > 0;`, `exclude e;` or `domain v (lo, hi);`.
    fn restriction(&mut self, r: &mut Restrictions) -> Result<(), ParseError> {
        let (kw, _) = self.ident()?;
        match kw.as_str() {
            "require" => {
                let e = self.expr()?;
                self.expect_sym('>')?;
                let zt = self.peek().clone();
                match self.next().tok {
                    Tok::Num(q) if q.is_zero() => {}
                    _ => return Err(syntax(&zt, &["`0`"])),
                }
                r.guards.push(Guard::Positive(e));
            }
            "exclude" => r.guards.push(Guard::NonZero(self.expr()?)),
            _ => {
                let (var, vt) = self.simple_ident()?;
                if !self.declared(&var) && !self.locals.contains(&var) {
                    return Err(ParseError::Undeclared {
                        line: vt.line,
                        col: vt.col,
                        name: var.to_string(),
                    });
                }
                self.expect_sym('(')?;
                let lo = self.rational()?;
                self.expect_sym(',')?;
                let hi = self.rational()?;
                self.expect_sym(')')?;
                r.domains.push(Domain { var, lo, hi });
            }
        }
        self.expect_sym(';').map(|_| ())
    }

    fn rational(&mut self) -> Result<Q, ParseError> {
        let t = self.peek().clone();
        let e = self.expr()?;
        e.as_num()
            .cloned()
            .ok_or_else(|| self.invalid(&t, format!("`{e}` is not a rational constant")))
    }

    fn is_restriction(&self) -> bool {
        self.is_kw("require") || self.is_kw("exclude") || self.is_kw("domain")
    }

    fn case_ref(&mut self) -> Result<Option<String>, ParseError> {
        if !self.is_kw("case") {
            return Ok(None);
        }
        self.next();
        let t = self.peek().clone();
        let n = self.block_name()?;
        if self.spec.case(&n).is_none() {
            return Err(self.invalid(&t, format!("unknown case `{n}`")));
        }
        Ok(Some(n))
    }

    fn check_unique(&self, t: &Token, kind: &str, n: &str, exists: bool) -> Result<(), ParseError> {
        if exists {
            Err(self.invalid(t, format!("{kind} `{n}` defined twice")))
        } else {
            Ok(())
        }
    }

    fn case_block(&mut self) -> Result<Case, ParseError> {
        let t = self.peek().clone();
        let name = self.block_name()?;
        self.check_unique(&t, "case", &name, self.spec.case(&name).is_some())?;
        self.expect_sym('{')?;
        let mut c = Case {
            name,
            constraints: Vec::new(),
            restrictions: Restrictions::default(),
        };
        while !self.eat_sym('}') {
            if self.is_kw("constraint") {
                self.next();
                c.constraints.push(self.constraint()?);
            } else if self.is_restriction() {
                self.restriction(&mut c.restrictions)?;
            } else {
                return Err(self.err_here(&["`constraint`", "`require`", "`exclude`", "`domain`", "`}`"]));
            }
        }
        Ok(c)
    }

    fn let_stmt(&mut self, lets: &mut Vec<Let>) -> Result<(), ParseError> {
        self.expect_kw("let")?;
        let (n, t) = self.simple_ident()?;
        if self.declared(&n) || self.locals.contains(&n) {
            return Err(self.invalid(&t, format!("`{n}` is already declared")));
        }
        self.expect_sym('=')?;
        let value = self.expr()?;
        self.expect_sym(';')?;
        self.locals.push(n.clone());
        lets.push(Let { name: n, value });
        Ok(())
    }

    /// `[name, k]` after `xi` or `eta`.
    fn component_index(&mut self, pool: &[Name]) -> Result<(Name, u32), ParseError> {
        self.expect_sym('[')?;
        let (n, t) = self.simple_ident()?;
        if !pool.contains(&n) {
            return Err(self.invalid(&t, format!("`{n}` is not valid here")));
        }
        self.expect_sym(',')?;
        let k = self.order_number()?;
        self.expect_sym(']')?;
        Ok((n, k))
    }

    fn order_number(&mut self) -> Result<u32, ParseError> {
        let t = self.peek().clone();
        match self.next().tok {
            Tok::Num(q) if q.is_integer() => {
                let k = q.to_integer().to_u32().ok_or_else(|| self.invalid(&t, "bad order"))?;
                if k > self.spec.order {
                    return Err(self.invalid(&t, format!("order {k} exceeds declared order")));
                }
                Ok(k)
            }
            _ => Err(syntax(&t, &["integer"])),
        }
    }

    fn generator_block(&mut self) -> Result<GeneratorDef, ParseError> {
        let t = self.peek().clone();
        let name = self.block_name()?;
        self.check_unique(&t, "generator", &name, self.spec.generator(&name).is_some())?;
        let case = self.case_ref()?;
        self.expect_sym('{')?;
        let mut g = GeneratorDef {
            name,
            case,
            lets: Vec::new(),
            xi: Vec::new(),
            eta: Vec::new(),
            restrictions: Restrictions::default(),
        };
        self.locals.clear();
        let mut seen = HashSet::new();
        while !self.eat_sym('}') {
            let t = self.peek().clone();
            if self.is_kw("let") {
                self.let_stmt(&mut g.lets)?;
            } else if self.is_kw("xi") || self.is_kw("eta") {
                let is_xi = self.is_kw("xi");
                self.next();
                let pool = if is_xi { self.spec.indep.clone() } else { self.spec.deps.clone() };
                let (n, k) = self.component_index(&pool)?;
                if !seen.insert((is_xi, n.clone(), k)) {
                    return Err(self.invalid(&t, "component assigned twice"));
                }
                self.expect_sym('=')?;
                let e = self.expr()?;
                self.expect_sym(';')?;
                if is_xi { g.xi.push((n, k, e)) } else { g.eta.push((n, k, e)) }
            } else if self.is_restriction() {
                self.restriction(&mut g.restrictions)?;
            } else {
                return Err(self.err_here(&["`let`", "`xi`", "`eta`", "`require`", "`exclude`", "`domain`", "`}`"]));
            }
        }
        self.locals.clear();
        Ok(g)
    }

    /// `u0 = e;` style assignment of an expansion order.
    fn part(&mut self, parts: &mut Vec<(Name, u32, Expr)>) -> Result<(), ParseError> {
        let (s, t) = self.ident()?;
        let target = self
            .jet_ident(&s)
            .filter(|c| c.sigma.is_empty() && c.order.is_some())
            .ok_or_else(|| self.invalid(&t, format!("`{s}` is not an expansion component")))?;
        let k = target.order.unwrap();
        if k > self.spec.order {
            return Err(self.invalid(&t, format!("order {k} exceeds declared order")));
        }
        if parts.iter().any(|(d, j, _)| *d == target.dep && *j == k) {
            return Err(self.invalid(&t, format!("`{s}` assigned twice")));
        }
        self.expect_sym('=')?;
        let e = self.expr()?;
        self.expect_sym(';')?;
        parts.push((target.dep, k, e));
        Ok(())
    }

    fn representation_block(&mut self) -> Result<RepresentationDef, ParseError> {
        let t = self.peek().clone();
        let name = self.block_name()?;
        self.check_unique(&t, "representation", &name, self.spec.representation(&name).is_some())?;
        self.expect_kw("generator")?;
        let gt = self.peek().clone();
        let generator = self.block_name()?;
        if self.spec.generator(&generator).is_none() {
            return Err(self.invalid(&gt, format!("unknown generator `{generator}`")));
        }
        self.expect_sym('{')?;
        let mut r = RepresentationDef {
            name,
            generator,
            lets: Vec::new(),
            parts: Vec::new(),
        };
        self.locals.clear();
        while !self.eat_sym('}') {
            if self.is_kw("let") {
                self.let_stmt(&mut r.lets)?;
            } else if matches!(self.peek_tok(), Tok::Ident(_)) {
                self.part(&mut r.parts)?;
            } else {
                return Err(self.err_here(&["`let`", "component assignment", "`}`"]));
            }
        }
        self.locals.clear();
        Ok(r)
    }

    fn solution_block(&mut self) -> Result<SolutionDef, ParseError> {
        let t = self.peek().clone();
        let name = self.block_name()?;
        self.check_unique(&t, "solution", &name, self.spec.solution(&name).is_some())?;
        let case = self.case_ref()?;
        self.expect_sym('{')?;
        let mut s = SolutionDef {
            name,
            case,
            lets: Vec::new(),
            parts: Vec::new(),
            restrictions: Restrictions::default(),
            value_sets: Vec::new(),
        };
        self.locals.clear();
        while !self.eat_sym('}') {
            if self.is_kw("let") {
                self.let_stmt(&mut s.lets)?;
            } else if self.is_restriction() {
                self.restriction(&mut s.restrictions)?;
            } else if self.is_kw("values") {
                self.next();
                let vt = self.peek().clone();
                let vname = self.block_name()?;
                if s.value_sets.iter().any(|v| v.name == vname) {
                    return Err(self.invalid(&vt, format!("value set `{vname}` defined twice")));
                }
                self.expect_sym('{')?;
                let mut values = Vec::new();
                while !self.eat_sym('}') {
                    let (n, nt) = self.simple_ident()?;
                    let ok = self.spec.params.contains(&n)
                        || n == self.spec.small
                        || self.locals.contains(&n);
                    if !ok {
                        return Err(ParseError::Undeclared {
                            line: nt.line,
                            col: nt.col,
                            name: n.to_string(),
                        });
                    }
                    self.expect_sym('=')?;
                    let e = self.expr()?;
                    self.expect_sym(';')?;
                    values.push((n, e));
                }
                s.value_sets.push(ValueSet { name: vname, values });
            } else if matches!(self.peek_tok(), Tok::Ident(_)) {
                self.part(&mut s.parts)?;
            } else {
                return Err(self.err_here(&["`let`", "component assignment", "`values`", "`}`"]));
            }
        }
        self.locals.clear();
        Ok(s)
    }

    // ---- expressions ----

    pub(super) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat_sym('+') {
                terms.push(self.term()?);
            } else if self.eat_sym('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_sym('*') {
                acc = acc * self.unary()?;
            } else if self.is_sym('/') {
                let t = self.next();
                let d = self.unary()?;
                if d.is_zero_atom() {
                    return Err(self.invalid(&t, "division by zero"));
                }
                acc = acc / d;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.is_sym('^') {
            self.next();
            let t = self.peek().clone();
            let ex = self.unary()?;
            let q = ex
                .as_num()
                .cloned()
                .ok_or_else(|| self.invalid(&t, format!("exponent `{ex}` is not a rational constant")))?;
            if base.is_zero_atom() && q <= Q::zero() {
                return Err(self.invalid(&t, "zero raised to a non-positive power"));
            }
            return Ok(Expr::pow(&base, &q));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let open = self.is_sym('(');
        let mut e = self.primary()?;
        if !open {
            return Ok(e);
        }
        // (expr)_x : total derivative
        loop {
            let prev_end = self.toks[self.pos - 1].end;
            let t = self.peek().clone();
            let sub = match &t.tok {
                Tok::Ident(s) if s.starts_with('_') && t.start == prev_end => s[1..].to_string(),
                _ => break,
            };
            let sigma = self
                .split_sigma(&sub)
                .ok_or_else(|| self.invalid(&t, format!("`_{sub}` is not a derivative subscript")))?;
            self.next();
            for v in sigma.vars() {
                e = total_derivative_by(&e, &v).map_err(|err| self.invalid(&t, err.to_string()))?;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(q) => {
                self.next();
                Ok(Expr::num(q.clone()))
            }
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                if self.is_sym('(') || self.is_sym('\'') || self.is_sym('[') {
                    return self.call(&s, &t);
                }
                self.resolve(&s, &t)
            }
            _ => Err(self.err_here(&EXPR_START)),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect_sym('(')?;
        let mut v = vec![self.expr()?];
        while self.eat_sym(',') {
            v.push(self.expr()?);
        }
        self.expect_sym(')')?;
        Ok(v)
    }

    fn call(&mut self, s: &str, t: &Token) -> Result<Expr, ParseError> {
        if s == "sqrt" {
            let a = self.args()?;
            if a.len() != 1 {
                return Err(self.invalid(t, "sqrt takes one argument"));
            }
            return Ok(Expr::sqrt(a[0].clone()));
        }
        if let Some(k) = Kernel::from_name(s) {
            let a = self.args()?;
            if a.len() != k.arity() {
                return Err(self.invalid(t, format!("{s} takes {} argument(s)", k.arity())));
            }
            return Ok(Expr::kernel(k, a));
        }
        if !self.spec.funcs.iter().any(|f| f.as_ref() == s) {
            return Err(ParseError::Undeclared {
                line: t.line,
                col: t.col,
                name: s.into(),
            });
        }
        let mut primes = 0u32;
        while self.eat_sym('\'') {
            primes += 1;
        }
        let mut derivs = None;
        if primes == 0 && self.eat_sym('[') {
            let mut d = vec![self.derivative_count()?];
            while self.eat_sym(',') {
                d.push(self.derivative_count()?);
            }
            self.expect_sym(']')?;
            derivs = Some(d);
        }
        let args = self.args()?;
        let derivs = match derivs {
            Some(d) if d.len() != args.len() => {
                return Err(self.invalid(t, "derivative list does not match the arguments"))
            }
            Some(d) => d,
            None if primes > 0 && args.len() != 1 => {
                return Err(self.invalid(t, "primes apply to functions of one argument"))
            }
            None if primes > 0 => vec![primes],
            None => vec![0; args.len()],
        };
        Ok(Expr::func(FuncApp {
            name: name(s),
            derivs,
            args,
        }))
    }

    fn derivative_count(&mut self) -> Result<u32, ParseError> {
        let t = self.peek().clone();
        match self.next().tok {
            Tok::Num(q) if q.is_integer() => q.to_integer().to_u32().ok_or_else(|| syntax(&t, &["integer"])),
            _ => Err(syntax(&t, &["integer"])),
        }
    }

    fn resolve(&self, s: &str, t: &Token) -> Result<Expr, ParseError> {
        if s == "pi" {
            return Ok(Expr::pi());
        }
        let n = name(s);
        if self.locals.contains(&n) || self.spec.params.contains(&n) || self.spec.small == n {
            return Ok(Expr::param(s));
        }
        if self.spec.indep.contains(&n) {
            return Ok(Expr::indep(s));
        }
        if let Some(c) = self.jet_ident(s) {
            return Ok(Expr::jet(c));
        }
        if self.spec.funcs.contains(&n) {
            return Err(self.invalid(t, format!("function `{s}` needs arguments")));
        }
        Err(ParseError::Undeclared {
            line: t.line,
            col: t.col,
            name: s.into(),
        })
    }

    /// `u`, `u0`, `u_tx`, `u1_{t,x}`.
    fn jet_ident(&self, s: &str) -> Option<JetCoord> {
        let (head, sub) = match s.find('_') {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let stem = head.trim_end_matches(|c: char| c.is_ascii_digit());
        let dep = self.spec.deps.iter().find(|d| d.as_ref() == stem)?;
        let order = if stem.len() < head.len() {
            let k: u32 = head[stem.len()..].parse().ok()?;
            Some(k)
        } else {
            None
        };
        let sigma = match sub {
            Some(sub) => self.split_sigma(sub)?,
            None => MultiIndex::empty(),
        };
        Some(JetCoord {
            dep: dep.clone(),
            order,
            sigma,
        })
    }

    /// `tx` (single-letter variables) or `{t,x}`.
    fn split_sigma(&self, sub: &str) -> Option<MultiIndex> {
        let is_var = |v: &str| self.spec.indep.iter().any(|x| x.as_ref() == v);
        let vars: Vec<String> = if let Some(inner) = sub.strip_prefix('{') {
            inner
                .strip_suffix('}')?
                .split(',')
                .map(str::to_string)
                .collect()
        } else if is_var(sub) {
            vec![sub.to_string()]
        } else {
            sub.chars().map(String::from).collect()
        };
        if vars.is_empty() || !vars.iter().all(|v| is_var(v)) {
            return None;
        }
        Some(MultiIndex::from_vars(vars.iter().map(String::as_str)))
    }
}
