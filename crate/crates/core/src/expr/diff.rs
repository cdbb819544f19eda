use std::collections::HashMap;

use num_traits::One;

use super::{Atom, Expr, ExprError, FuncApp, Kernel, Node, Q};

/// A derivation on expressions: linear, obeying the product rule, and fixed
/// by its action on atoms. Partial derivatives, total derivatives and the
/// perturbative recursion operator are all instances.
pub trait Derivation {
    fn atom(&self, a: &Atom) -> Expr;

    /// Extra contribution for an unknown-function application, added to the
    /// chain-rule terms over its arguments.
    fn func_extra(&self, _f: &FuncApp) -> Expr {
        Expr::zero()
    }

    /// Cheap test that lets the walker skip subtrees. Must only return true
    /// when the derivative is zero.
    fn annihilates(&self, _e: &Expr) -> bool {
        false
    }
}

/// Applies `d` to `e`, memoizing shared subtrees.
pub fn apply_derivation<D: Derivation + ?Sized>(d: &D, e: &Expr) -> Result<Expr, ExprError> {
    let mut memo = HashMap::new();
    walk(d, e, &mut memo)
}

fn walk<D: Derivation + ?Sized>(
    d: &D,
    e: &Expr,
    memo: &mut HashMap<Expr, Expr>,
) -> Result<Expr, ExprError> {
    if let Some(r) = memo.get(e) {
        return Ok(r.clone());
    }
    if d.annihilates(e) {
        return Ok(Expr::zero());
    }
    let r = match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Atom(a) => d.atom(a),
        Node::Func(f) => {
            let mut terms = vec![d.func_extra(f)];
            for (slot, arg) in f.args.iter().enumerate() {
                let da = walk(d, arg, memo)?;
                if da.is_zero_atom() {
                    continue;
                }
                let mut g = f.clone();
                g.derivs[slot] += 1;
                terms.push(Expr::func(g) * da);
            }
            Expr::add(terms)
        }
        Node::Pow(b, ex) => {
            let db = walk(d, b, memo)?;
            if db.is_zero_atom() {
                Expr::zero()
            } else {
                let ex1 = ex - Q::one();
                Expr::mul(vec![Expr::num(ex.clone()), Expr::pow(b, &ex1), db])
            }
        }
        Node::Kernel(k, args) => kernel_rule(d, *k, args, e, memo)?,
        Node::Mul(c, fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let df = walk(d, &fs[i], memo)?;
                if df.is_zero_atom() {
                    continue;
                }
                let mut v = Vec::with_capacity(fs.len() + 1);
                v.push(Expr::num(c.clone()));
                v.push(df);
                v.extend(fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f.clone()));
                terms.push(Expr::mul(v));
            }
            Expr::add(terms)
        }
        Node::Add(ts) => {
            let mut terms = Vec::with_capacity(ts.len());
            for t in ts {
                terms.push(walk(d, t, memo)?);
            }
            Expr::add(terms)
        }
    };
    memo.insert(e.clone(), r.clone());
    Ok(r)
}

fn kernel_rule<D: Derivation + ?Sized>(
    d: &D,
    k: Kernel,
    args: &[Expr],
    whole: &Expr,
    memo: &mut HashMap<Expr, Expr>,
) -> Result<Expr, ExprError> {
    let z = &args[args.len() - 1];
    if k == Kernel::Hyp2f1 {
        for p in &args[..3] {
            if !walk(d, p, memo)?.is_zero_atom() {
                return Err(ExprError::UnsupportedDerivative(whole.to_string()));
            }
        }
    }
    let dz = walk(d, z, memo)?;
    if dz.is_zero_atom() {
        return Ok(Expr::zero());
    }
    let outer = match k {
        Kernel::Exp => whole.clone(),
        Kernel::Log => z.recip(),
        Kernel::Sin => Expr::cos(z.clone()),
        Kernel::Cos => -Expr::sin(z.clone()),
        Kernel::Erfi => Expr::mul(vec![
            Expr::int(2),
            Expr::pi().powi(-1).pow_q(1, 2),
            Expr::exp(z.powi(2)),
        ]),
        Kernel::Hyp2f1 => {
            let (a, b, c) = (&args[0], &args[1], &args[2]);
            let one = Expr::one();
            Expr::mul(vec![
                a.clone(),
                b.clone(),
                c.recip(),
                Expr::hyp2f1(a + &one, b + &one, c + &one, z.clone()),
            ])
        }
    };
    Ok(outer * dz)
}

impl Expr {
    /// `self^(n/d)`.
    pub fn pow_q(&self, n: i64, d: i64) -> Expr {
        Expr::pow(self, &Q::new(n.into(), d.into()))
    }
}

struct Partial<'a>(&'a Atom);

impl Derivation for Partial<'_> {
    fn atom(&self, a: &Atom) -> Expr {
        if a == self.0 {
            Expr::one()
        } else {
            Expr::zero()
        }
    }
}

/// Partial derivative of `e` with respect to the atom `v`, all other atoms
/// held constant.
pub fn differentiate(e: &Expr, v: &Expr) -> Result<Expr, ExprError> {
    let a = v.as_atom().ok_or_else(|| ExprError::NotAnAtom(v.to_string()))?;
    apply_derivation(&Partial(a), e)
}

/// Repeated partial derivative.
pub fn differentiate_n(e: &Expr, v: &Expr, n: u32) -> Result<Expr, ExprError> {
    let mut r = e.clone();
    for _ in 0..n {
        if r.is_zero_atom() {
            break;
        }
        r = differentiate(&r, v)?;
    }
    Ok(r)
}
