//! Immutable symbolic expressions over exact rationals.
//!
//! Every [`Expr`] produced by the public constructors is in canonical form:
//! sums and products are flattened, children are sorted under the derived
//! total order of [`Node`], like terms and like factors are collected and
//! products of sums are expanded. Sums only survive as factors when raised to
//! a negative or fractional power, so polynomial expressions have a unique
//! expanded representation.

mod build;
mod diff;
mod print;
mod subst;
mod zero;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::BigRational;

pub use diff::{apply_derivation, Derivation};
pub use subst::{Bindings, FuncBinding};
pub use zero::{sample_zero, together_numerator, SampleDomains, Sampler, Witness, ZeroStrategy, ZeroVerdict};

/// Exact rational number used for every constant inside symbolic trees.
pub type Q = BigRational;

/// Shared, cheaply clonable identifier.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("cannot differentiate with respect to non-atom `{0}`")]
    NotAnAtom(String),
    #[error("derivative of `{0}` with respect to its parameters is not supported")]
    UnsupportedDerivative(String),
    #[error("zero test inconclusive: {0}")]
    Inconclusive(String),
}

/// Multi-index of a derivative, kept as `(variable, count)` pairs sorted by
/// variable name with strictly positive counts. Identity therefore does not
/// depend on the order in which derivatives were taken.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<(Name, u32)>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, u32)>>(pairs: I) -> Self {
        let mut m = MultiIndex::empty();
        for (v, c) in pairs {
            for _ in 0..c {
                m = m.bump(&v);
            }
        }
        m
    }

    /// Multi-index from a list of variables, one entry per differentiation.
    pub fn from_vars<'a, I: IntoIterator<Item = &'a str>>(vars: I) -> Self {
        vars.into_iter()
            .fold(MultiIndex::empty(), |m, v| m.bump(&name(v)))
    }

    pub fn bump(&self, var: &Name) -> Self {
        let mut v = self.0.clone();
        match v.binary_search_by(|(n, _)| n.as_ref().cmp(var.as_ref())) {
            Ok(i) => v[i].1 += 1,
            Err(i) => v.insert(i, (var.clone(), 1)),
        }
        MultiIndex(v)
    }

    /// Removes one differentiation with respect to `var`, if present.
    pub fn lower(&self, var: &str) -> Option<Self> {
        let i = self.0.iter().position(|(n, _)| n.as_ref() == var)?;
        let mut v = self.0.clone();
        if v[i].1 == 1 {
            v.remove(i);
        } else {
            v[i].1 -= 1;
        }
        Some(MultiIndex(v))
    }

    pub fn count(&self, var: &str) -> u32 {
        self.0
            .iter()
            .find(|(n, _)| n.as_ref() == var)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Name, u32)] {
        &self.0
    }

    /// Variables with repetition, in name order.
    pub fn vars(&self) -> Vec<Name> {
        self.0
            .iter()
            .flat_map(|(n, c)| std::iter::repeat(n.clone()).take(*c as usize))
            .collect()
    }
}

/// A coordinate of the jet space: a dependent variable, optionally tagged
/// with its order in the small-parameter expansion, differentiated by `sigma`.
///
/// `order == None` is the un-expanded variable `u`; `Some(k)` is `u_(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetCoord {
    pub dep: Name,
    pub order: Option<u32>,
    pub sigma: MultiIndex,
}

impl JetCoord {
    pub fn new(dep: &str, order: Option<u32>, sigma: MultiIndex) -> Self {
        JetCoord {
            dep: name(dep),
            order,
            sigma,
        }
    }

    pub fn plain(dep: &str, order: Option<u32>) -> Self {
        Self::new(dep, order, MultiIndex::empty())
    }

    pub fn with_sigma(&self, sigma: MultiIndex) -> Self {
        JetCoord {
            dep: self.dep.clone(),
            order: self.order,
            sigma,
        }
    }

    pub fn with_order(&self, order: Option<u32>) -> Self {
        JetCoord {
            dep: self.dep.clone(),
            order,
            sigma: self.sigma.clone(),
        }
    }

    pub fn differentiated(&self, var: &Name) -> Self {
        self.with_sigma(self.sigma.bump(var))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Pi,
}

/// Leaves of the expression tree. Variant order is the kind rank used by the
/// canonical ordering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Indep(Name),
    Param(Name),
    Const(Constant),
    Jet(JetCoord),
}

impl Atom {
    pub fn indep(n: &str) -> Self {
        Atom::Indep(name(n))
    }
    pub fn param(n: &str) -> Self {
        Atom::Param(name(n))
    }
    pub fn jet(dep: &str, order: Option<u32>, vars: &[&str]) -> Self {
        Atom::Jet(JetCoord::new(
            dep,
            order,
            MultiIndex::from_vars(vars.iter().copied()),
        ))
    }
}

/// Application of an unknown function, possibly differentiated with respect
/// to its argument slots (`derivs[i]` times in slot `i`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncApp {
    pub name: Name,
    pub derivs: Vec<u32>,
    pub args: Vec<Expr>,
}

impl FuncApp {
    pub fn new(name_: &str, args: Vec<Expr>) -> Self {
        FuncApp {
            name: name(name_),
            derivs: vec![0; args.len()],
            args,
        }
    }

    pub fn derivative_order(&self) -> u32 {
        self.derivs.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    Exp,
    Log,
    Sin,
    Cos,
    Hyp2f1,
    Erfi,
}

impl Kernel {
    pub fn arity(self) -> usize {
        match self {
            Kernel::Hyp2f1 => 4,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Log => "log",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Hyp2f1 => "hyp2f1",
            Kernel::Erfi => "erfi",
        }
    }

    pub fn from_name(s: &str) -> Option<Kernel> {
        Some(match s {
            "exp" => Kernel::Exp,
            "log" => Kernel::Log,
            "sin" => Kernel::Sin,
            "cos" => Kernel::Cos,
            "hyp2f1" => Kernel::Hyp2f1,
            "erfi" => Kernel::Erfi,
            _ => return None,
        })
    }
}

/// Node of a canonical expression.
///
/// * `Mul(c, fs)`: `c != 0`, factors are neither numbers nor products, sorted,
///   with distinct bases; when `c == 1` there are at least two factors.
/// * `Add(ts)`: at least two terms, sorted by monomial, no nested sums.
/// * `Pow(b, e)`: `e` is neither 0 nor 1; a sum base only carries a negative
///   or a fractional exponent below one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Num(Q),
    Atom(Atom),
    Func(FuncApp),
    Pow(Expr, Q),
    Kernel(Kernel, Vec<Expr>),
    Mul(Q, Vec<Expr>),
    Add(Vec<Expr>),
}

struct Inner {
    hash: u64,
    node: Node,
}

/// Reference-counted canonical expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl Expr {
    pub(crate) fn from_node(node: Node) -> Expr {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        node.hash(&mut h);
        Expr(Arc::new(Inner {
            hash: h.finish(),
            node,
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn is_zero_atom(&self) -> bool {
        matches!(self.node(), Node::Num(q) if num_traits::Zero::is_zero(q))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Num(q) if num_traits::One::is_one(q))
    }

    pub fn as_num(&self) -> Option<&Q> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self.node() {
            Node::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Terms of a sum, or the expression itself as a single term.
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(ts) => ts.clone(),
            _ if self.is_zero_atom() => Vec::new(),
            _ => vec![self.clone()],
        }
    }

    /// Splits a term into its rational coefficient and the remaining factors.
    pub fn coeff_and_factors(&self) -> (Q, Vec<Expr>) {
        match self.node() {
            Node::Num(q) => (q.clone(), Vec::new()),
            Node::Mul(c, fs) => (c.clone(), fs.clone()),
            _ => (num_traits::One::one(), vec![self.clone()]),
        }
    }

    /// `(base, exponent)` view of a factor.
    pub fn base_exp(&self) -> (Expr, Q) {
        match self.node() {
            Node::Pow(b, e) => (b.clone(), e.clone()),
            _ => (self.clone(), num_traits::One::one()),
        }
    }

    /// Immediate children, in order.
    pub fn children(&self) -> Vec<Expr> {
        match self.node() {
            Node::Num(_) | Node::Atom(_) => Vec::new(),
            Node::Func(f) => f.args.clone(),
            Node::Pow(b, _) => vec![b.clone()],
            Node::Kernel(_, args) => args.clone(),
            Node::Mul(_, fs) => fs.clone(),
            Node::Add(ts) => ts.clone(),
        }
    }

    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self.node() {
            Node::Atom(a) => {
                out.insert(a.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_atoms(out);
                }
            }
        }
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        match self.node() {
            Node::Atom(b) => a == b,
            Node::Num(_) => false,
            _ => self.children().iter().any(|c| c.contains_atom(a)),
        }
    }

    /// Every unknown-function application occurring in the tree.
    pub fn func_apps(&self) -> BTreeSet<FuncApp> {
        let mut out = BTreeSet::new();
        self.collect_funcs(&mut out);
        out
    }

    fn collect_funcs(&self, out: &mut BTreeSet<FuncApp>) {
        if let Node::Func(f) = self.node() {
            out.insert(f.clone());
        }
        for c in self.children() {
            c.collect_funcs(out);
        }
    }

    pub fn jet_coords(&self) -> BTreeSet<JetCoord> {
        self.free_atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Jet(j) => Some(j),
                _ => None,
            })
            .collect()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Expr::node_count).sum::<usize>()
    }

    /// Rebuilds the tree bottom-up through the canonicalising constructors.
    pub fn normalize(&self) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Atom(_) => self.clone(),
            Node::Func(f) => Expr::func(FuncApp {
                name: f.name.clone(),
                derivs: f.derivs.clone(),
                args: f.args.iter().map(Expr::normalize).collect(),
            }),
            Node::Pow(b, e) => Expr::pow(&b.normalize(), e),
            Node::Kernel(k, args) => Expr::kernel(*k, args.iter().map(Expr::normalize).collect()),
            Node::Mul(c, fs) => {
                let mut v: Vec<Expr> = fs.iter().map(Expr::normalize).collect();
                v.push(Expr::num(c.clone()));
                Expr::mul(v)
            }
            Node::Add(ts) => Expr::add(ts.iter().map(Expr::normalize).collect()),
        }
    }
}

/// Canonical form of `e`. Idempotent.
pub fn normalize(e: &Expr) -> Expr {
    e.normalize()
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        self.0.node.cmp(&other.0.node)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

pub use diff::{differentiate, differentiate_n};
pub use subst::substitute;
pub use zero::is_zero;
