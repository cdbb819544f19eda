use std::collections::HashMap;

use super::diff::differentiate_n;
use super::{Atom, Expr, FuncApp, Name, Node};

/// Replacement for an unknown function: `name(p_1, ..., p_n) := body`.
/// Derivative applications are bound to the corresponding partials of `body`.
#[derive(Clone, Debug, PartialEq)]
pub struct FuncBinding {
    pub params: Vec<Atom>,
    pub body: Expr,
}

impl FuncBinding {
    pub fn new(params: Vec<Atom>, body: Expr) -> Self {
        FuncBinding { params, body }
    }

    /// Body differentiated according to `derivs`.
    ///
    /// # Panics
    /// If the body contains a hypergeometric kernel whose parameters depend
    /// on a slot that is differentiated.
    fn derived_body(&self, derivs: &[u32]) -> Expr {
        let mut b = self.body.clone();
        for (p, &n) in self.params.iter().zip(derivs) {
            b = differentiate_n(&b, &Expr::atom(p.clone()), n)
                .unwrap_or_else(|e| panic!("cannot bind derivative: {e}"));
        }
        b
    }
}

#[derive(Clone, Debug, Default)]
pub struct Bindings {
    pub atoms: HashMap<Atom, Expr>,
    pub funcs: HashMap<Name, FuncBinding>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_atom(mut self, a: Atom, e: Expr) -> Self {
        self.atoms.insert(a, e);
        self
    }

    pub fn with_func(mut self, name: Name, f: FuncBinding) -> Self {
        self.funcs.insert(name, f);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.funcs.is_empty()
    }

    /// Applies the bindings to `e`.
    pub fn apply(&self, e: &Expr) -> Expr {
        if self.is_empty() {
            return e.clone();
        }
        let mut memo = HashMap::new();
        self.walk(e, &mut memo)
    }

    fn walk(&self, e: &Expr, memo: &mut HashMap<Expr, Expr>) -> Expr {
        if let Some(r) = memo.get(e) {
            return r.clone();
        }
        let r = match e.node() {
            Node::Num(_) => e.clone(),
            Node::Atom(a) => self.atoms.get(a).cloned().unwrap_or_else(|| e.clone()),
            Node::Func(f) => {
                let args: Vec<Expr> = f.args.iter().map(|a| self.walk(a, memo)).collect();
                match self.funcs.get(&f.name) {
                    Some(b) if b.params.len() == args.len() => {
                        let body = b.derived_body(&f.derivs);
                        let inner = Bindings {
                            atoms: b.params.iter().cloned().zip(args).collect(),
                            funcs: HashMap::new(),
                        };
                        inner.apply(&body)
                    }
                    _ => Expr::func(FuncApp {
                        name: f.name.clone(),
                        derivs: f.derivs.clone(),
                        args,
                    }),
                }
            }
            Node::Pow(b, ex) => Expr::pow(&self.walk(b, memo), ex),
            Node::Kernel(k, args) => {
                Expr::kernel(*k, args.iter().map(|a| self.walk(a, memo)).collect())
            }
            Node::Mul(c, fs) => {
                let mut v: Vec<Expr> = fs.iter().map(|f| self.walk(f, memo)).collect();
                v.push(Expr::num(c.clone()));
                Expr::mul(v)
            }
            Node::Add(ts) => Expr::add(ts.iter().map(|t| self.walk(t, memo)).collect()),
        };
        memo.insert(e.clone(), r.clone());
        r
    }
}

/// Simultaneous (non-cascading) substitution followed by normalization.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Expr {
    bindings.apply(e)
}
