use std::collections::BTreeMap;
use std::ops;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Atom, Constant, Expr, FuncApp, JetCoord, Kernel, Node, Q};

pub(crate) fn q_int(i: i64) -> Q {
    Q::from_integer(BigInt::from(i))
}

fn is_int(q: &Q) -> bool {
    q.is_integer()
}

/// Exact integer root, if one exists.
fn int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        if k % 2 == 0 {
            return None;
        }
        return int_root(&-n, k).map(|r| -r);
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

fn q_pow_int(q: &Q, e: &BigInt) -> Q {
    let n = e.to_i64().expect("exponent too large");
    if n >= 0 {
        num_traits::pow(q.clone(), n as usize)
    } else {
        assert!(!q.is_zero(), "division by zero in symbolic expression");
        num_traits::pow(q.recip(), (-n) as usize)
    }
}

impl Expr {
    pub fn num(q: Q) -> Expr {
        Expr::from_node(Node::Num(q))
    }

    pub fn int(i: i64) -> Expr {
        Expr::num(q_int(i))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::num(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::from_node(Node::Atom(a))
    }

    pub fn indep(n: &str) -> Expr {
        Expr::atom(Atom::indep(n))
    }

    pub fn param(n: &str) -> Expr {
        Expr::atom(Atom::param(n))
    }

    pub fn pi() -> Expr {
        Expr::atom(Atom::Const(Constant::Pi))
    }

    pub fn jet(c: JetCoord) -> Expr {
        Expr::atom(Atom::Jet(c))
    }

    pub fn func(f: FuncApp) -> Expr {
        assert_eq!(f.derivs.len(), f.args.len());
        Expr::from_node(Node::Func(f))
    }

    pub fn apply(name: &str, args: Vec<Expr>) -> Expr {
        Expr::func(FuncApp::new(name, args))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::kernel(Kernel::Exp, vec![a])
    }
    pub fn log(a: Expr) -> Expr {
        Expr::kernel(Kernel::Log, vec![a])
    }
    pub fn sin(a: Expr) -> Expr {
        Expr::kernel(Kernel::Sin, vec![a])
    }
    pub fn cos(a: Expr) -> Expr {
        Expr::kernel(Kernel::Cos, vec![a])
    }
    pub fn erfi(a: Expr) -> Expr {
        Expr::kernel(Kernel::Erfi, vec![a])
    }
    pub fn hyp2f1(a: Expr, b: Expr, c: Expr, z: Expr) -> Expr {
        Expr::kernel(Kernel::Hyp2f1, vec![a, b, c, z])
    }
    pub fn sqrt(a: Expr) -> Expr {
        Expr::pow(&a, &Q::new(BigInt::from(1), BigInt::from(2)))
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self, &q_int(n))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    /// Leading rational coefficient of a term (1 for non-products).
    fn leading_coeff(&self) -> Q {
        match self.node() {
            Node::Num(q) => q.clone(),
            Node::Mul(c, _) => c.clone(),
            Node::Add(ts) => ts[0].leading_coeff(),
            _ => Q::one(),
        }
    }

    /// True when the canonical form starts with a negative coefficient.
    pub fn is_negative_form(&self) -> bool {
        self.leading_coeff().is_negative()
    }

    pub fn kernel(k: Kernel, args: Vec<Expr>) -> Expr {
        assert_eq!(args.len(), k.arity(), "wrong arity for {}", k.name());
        let a = &args[0];
        match k {
            Kernel::Exp => {
                if a.is_zero_atom() {
                    return Expr::one();
                }
                if let Node::Kernel(Kernel::Log, inner) = a.node() {
                    return inner[0].clone();
                }
            }
            Kernel::Log => {
                if a.is_one() {
                    return Expr::zero();
                }
                if let Node::Kernel(Kernel::Exp, inner) = a.node() {
                    return inner[0].clone();
                }
            }
            Kernel::Sin | Kernel::Erfi => {
                if a.is_zero_atom() {
                    return Expr::zero();
                }
                if a.is_negative_form() {
                    return -Expr::kernel(k, vec![-a]);
                }
            }
            Kernel::Cos => {
                if a.is_zero_atom() {
                    return Expr::one();
                }
                if a.is_negative_form() {
                    return Expr::kernel(k, vec![-a]);
                }
            }
            Kernel::Hyp2f1 => {
                if args[3].is_zero_atom() {
                    return Expr::one();
                }
                if args[1] < args[0] {
                    let mut v = args.clone();
                    v.swap(0, 1);
                    return Expr::from_node(Node::Kernel(k, v));
                }
            }
        }
        Expr::from_node(Node::Kernel(k, args))
    }

    /// `base^e` in canonical form. Fractional powers of products are
    /// distributed over the factors (positivity is assumed).
    pub fn pow(base: &Expr, e: &Q) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return base.clone();
        }
        match base.node() {
            Node::Num(q) => num_pow(q, e),
            Node::Pow(b, e2) => Expr::pow(b, &(e2 * e)),
            Node::Mul(c, fs) => {
                let mut v: Vec<Expr> = fs.iter().map(|f| Expr::pow(f, e)).collect();
                v.push(num_pow(c, e));
                Expr::mul(v)
            }
            Node::Kernel(Kernel::Exp, a) => Expr::exp(Expr::num(e.clone()) * &a[0]),
            Node::Add(ts) => {
                // Pull out the leading coefficient so that proportional sums
                // share a base.
                let lc = ts[0].leading_coeff();
                if !lc.is_one() && (is_int(e) || lc.is_positive()) {
                    let inv = Expr::num(lc.recip());
                    let prim = Expr::mul(vec![inv, base.clone()]);
                    return Expr::mul(vec![num_pow(&lc, e), Expr::pow(&prim, e)]);
                }
                if is_int(e) && e.is_positive() {
                    let n = e.to_integer().to_usize().expect("exponent too large");
                    return Expr::mul(vec![base.clone(); n]);
                }
                let fl = e.floor();
                if fl >= Q::one() {
                    let frac = e - &fl;
                    return Expr::mul(vec![Expr::pow(base, &fl), Expr::pow(base, &frac)]);
                }
                Expr::from_node(Node::Pow(base.clone(), e.clone()))
            }
            _ => Expr::from_node(Node::Pow(base.clone(), e.clone())),
        }
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut acc: BTreeMap<Expr, Q> = BTreeMap::new();
        let mut stack = terms;
        while let Some(t) = stack.pop() {
            match t.node() {
                Node::Add(ts) => stack.extend(ts.iter().cloned()),
                Node::Num(q) => {
                    if !q.is_zero() {
                        *acc.entry(Expr::one()).or_insert_with(Q::zero) += q;
                    }
                }
                Node::Mul(c, fs) => {
                    let key = if fs.len() == 1 {
                        fs[0].clone()
                    } else if c.is_one() {
                        t.clone()
                    } else {
                        Expr::from_node(Node::Mul(Q::one(), fs.clone()))
                    };
                    *acc.entry(key).or_insert_with(Q::zero) += c;
                }
                _ => *acc.entry(t.clone()).or_insert_with(Q::zero) += Q::one(),
            }
        }
        let mut out: Vec<Expr> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| scale_monomial(m, c))
            .collect();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Add(out)),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut coeff = Q::one();
        let mut powers: BTreeMap<Expr, Q> = BTreeMap::new();
        let mut num_powers: BTreeMap<Q, Q> = BTreeMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        let mut stack = factors;
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Num(q) => {
                    if q.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= q;
                }
                Node::Mul(c, fs) => {
                    coeff *= c;
                    stack.extend(fs.iter().cloned());
                }
                Node::Kernel(Kernel::Exp, a) => exp_args.push(a[0].clone()),
                Node::Pow(b, e) => {
                    if let Node::Num(q) = b.node() {
                        *num_powers.entry(q.clone()).or_insert_with(Q::zero) += e;
                    } else {
                        *powers.entry(b.clone()).or_insert_with(Q::zero) += e;
                    }
                }
                _ => *powers.entry(f.clone()).or_insert_with(Q::zero) += Q::one(),
            }
        }

        let mut out: Vec<Expr> = Vec::new();
        let mut expand: Vec<(Expr, usize)> = Vec::new();
        let mut repass = false;
        let mut late: Vec<Expr> = Vec::new();

        for (q, e) in num_powers {
            absorb(num_pow(&q, &e), &mut coeff, &mut out);
        }
        for (b, e) in powers {
            if e.is_zero() {
                continue;
            }
            match b.node() {
                Node::Add(_) if is_int(&e) && e.is_positive() && b.leading_coeff().is_one() => {
                    expand.push((b, e.to_integer().to_usize().expect("exponent too large")));
                }
                Node::Add(_) if e > Q::one() && b.leading_coeff().is_one() => {
                    let fl = e.floor();
                    expand.push((b.clone(), fl.to_integer().to_usize().expect("exponent too large")));
                    out.push(Expr::from_node(Node::Pow(b, e - fl)));
                }
                Node::Add(_) if e.is_one() => {
                    // Non-primitive sum to the first power: expand directly.
                    expand.push((b, 1));
                }
                Node::Add(_) => {
                    let p = Expr::pow(&b, &e);
                    match p.node() {
                        Node::Add(_) => expand.push((p, 1)),
                        Node::Mul(..) => {
                            repass = true;
                            absorb(p, &mut coeff, &mut out);
                        }
                        _ => absorb(p, &mut coeff, &mut out),
                    }
                }
                _ if e.is_one() => out.push(b),
                _ => out.push(Expr::from_node(Node::Pow(b, e))),
            }
        }
        if !exp_args.is_empty() {
            let ex = Expr::exp(Expr::add(exp_args));
            match ex.node() {
                Node::Kernel(Kernel::Exp, _) => out.push(ex),
                _ if ex.is_one() => {}
                _ => late.push(ex),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if repass || !late.is_empty() {
            let mut v = out;
            v.extend(late);
            v.push(Expr::num(coeff));
            for (b, n) in expand {
                v.extend(std::iter::repeat(b).take(n));
            }
            // The second pass only merges freshly split primitive factors.
            return Expr::mul(v);
        }
        out.sort();
        let mono = monomial(coeff, out);
        if expand.is_empty() {
            return mono;
        }
        let mut terms = vec![mono];
        for (sum, n) in expand {
            let sum_terms = sum.terms();
            for _ in 0..n {
                let mut next = Vec::with_capacity(terms.len() * sum_terms.len());
                for t in &terms {
                    for s in &sum_terms {
                        next.push(Expr::mul(vec![t.clone(), s.clone()]));
                    }
                }
                terms = next;
            }
        }
        Expr::add(terms)
    }
}

/// Folds a canonical power/product result into the coefficient and factor list.
fn absorb(p: Expr, coeff: &mut Q, out: &mut Vec<Expr>) {
    match p.node() {
        Node::Num(q) => *coeff *= q,
        Node::Mul(c, fs) => {
            *coeff *= c;
            out.extend(fs.iter().cloned());
        }
        _ => out.push(p),
    }
}

fn monomial(coeff: Q, factors: Vec<Expr>) -> Expr {
    if factors.is_empty() {
        return Expr::num(coeff);
    }
    if factors.len() == 1 && coeff.is_one() {
        return factors.into_iter().next().unwrap();
    }
    Expr::from_node(Node::Mul(coeff, factors))
}

fn scale_monomial(m: Expr, c: Q) -> Expr {
    if m.is_one() {
        return Expr::num(c);
    }
    if c.is_one() {
        return m;
    }
    match m.node() {
        Node::Mul(_, fs) => Expr::from_node(Node::Mul(c, fs.clone())),
        _ => Expr::from_node(Node::Mul(c, vec![m])),
    }
}

/// `q^e` for rational `q` and `e`, folded when exact.
fn num_pow(q: &Q, e: &Q) -> Expr {
    if e.is_zero() || q.is_one() {
        return Expr::one();
    }
    if e.is_one() {
        return Expr::num(q.clone());
    }
    if is_int(e) {
        return Expr::num(q_pow_int(q, &e.to_integer()));
    }
    if q.is_zero() {
        assert!(e.is_positive(), "division by zero in symbolic expression");
        return Expr::zero();
    }
    let den = e.denom().to_u32().expect("root index too large");
    if let (Some(n), Some(d)) = (int_root(q.numer(), den), int_root(q.denom(), den)) {
        let root = Q::new(n, d);
        return Expr::num(q_pow_int(&root, e.numer()));
    }
    if q.is_negative() {
        return Expr::from_node(Node::Pow(Expr::num(q.clone()), e.clone()));
    }
    // Keep the fractional part of the exponent in [0, 1).
    let fl = e.floor();
    let frac = e - &fl;
    let whole = q_pow_int(q, &fl.to_integer());
    let rest = Expr::from_node(Node::Pow(Expr::num(q.clone()), frac));
    if whole.is_one() {
        rest
    } else {
        Expr::from_node(Node::Mul(whole, vec![rest]))
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}
impl ops::Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self.clone(), rhs.clone()])
    }
}
impl ops::Add<&Expr> for Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self, rhs.clone()])
    }
}
impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, -rhs])
    }
}
impl ops::Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self.clone(), -rhs])
    }
}
impl ops::Sub<&Expr> for Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self, -rhs])
    }
}
impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}
impl ops::Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(vec![self.clone(), rhs.clone()])
    }
}
impl ops::Mul<&Expr> for Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(vec![self, rhs.clone()])
    }
}
impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs.recip()])
    }
}
impl ops::Div<&Expr> for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::mul(vec![self.clone(), rhs.recip()])
    }
}
impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }
}
impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self.clone()])
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Expr {
        Expr::int(i)
    }
}
