use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Atom, Constant, Expr, ExprError, FuncApp, Kernel, Node, Q};
use crate::numeval::{eval_tracked, EvalContext};

/// Where free atoms are drawn from during numeric zero testing.
#[derive(Clone, Debug)]
pub struct SampleDomains {
    /// Explicit per-atom ranges; these take precedence over the defaults.
    pub ranges: HashMap<Atom, (f64, f64)>,
    pub indep_default: (f64, f64),
    pub param_default: (f64, f64),
    /// Undifferentiated dependent coordinates.
    pub value_default: (f64, f64),
    /// Derivative coordinates.
    pub deriv_default: (f64, f64),
    /// Each must evaluate to a positive number at an accepted sample.
    pub require: Vec<Expr>,
    /// Each must stay away from zero at an accepted sample.
    pub exclude: Vec<Expr>,
}

impl Default for SampleDomains {
    fn default() -> Self {
        let mut ranges = HashMap::new();
        ranges.insert(Atom::indep("t"), (0.0, 3.0));
        ranges.insert(Atom::indep("x"), (0.0, 5.0));
        SampleDomains {
            ranges,
            indep_default: (0.0, 3.0),
            param_default: (0.5, 2.0),
            value_default: (0.5, 2.0),
            deriv_default: (-1.0, 1.0),
            require: Vec::new(),
            exclude: Vec::new(),
        }
    }
}

impl SampleDomains {
    pub fn range_of(&self, a: &Atom) -> Option<(f64, f64)> {
        if let Some(r) = self.ranges.get(a) {
            return Some(*r);
        }
        match a {
            Atom::Indep(_) => Some(self.indep_default),
            Atom::Param(_) => Some(self.param_default),
            Atom::Const(_) => None,
            Atom::Jet(j) if j.sigma.is_empty() => Some(self.value_default),
            Atom::Jet(_) => Some(self.deriv_default),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeroStrategy {
    pub samples: usize,
    /// Relative tolerance: accepted when `|v| < tol * (1 + magnitude)`.
    pub tol: f64,
    pub seed: u64,
    /// Draws per sample before giving up on domain errors.
    pub max_attempts: usize,
    pub domains: SampleDomains,
}

impl Default for ZeroStrategy {
    fn default() -> Self {
        ZeroStrategy {
            samples: 25,
            tol: 1e-9,
            seed: 0,
            max_attempts: 200,
            domains: SampleDomains::default(),
        }
    }
}

/// Sample point at which an expression did not vanish.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: BTreeMap<String, f64>,
    pub value: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ZeroVerdict {
    ProvedZero,
    ProvedNonzero { witness: Witness },
    NumericallyZero { samples: usize, max_ratio: f64 },
    NumericallyNonzero { witness: Witness },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::ProvedZero | ZeroVerdict::NumericallyZero { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            ZeroVerdict::ProvedNonzero { witness } | ZeroVerdict::NumericallyNonzero { witness } => {
                Some(witness)
            }
            _ => None,
        }
    }
}

/// Numerator of `e` over the common denominator of its terms.
///
/// Only top-level factors with negative exponents count as denominators;
/// the result vanishes iff `e` does, wherever the denominators are nonzero.
pub fn together_numerator(e: &Expr) -> Expr {
    together_numerator_bounded(e, usize::MAX).expect("unbounded")
}

/// Expanded-term budget for the common-denominator step of `is_zero`.
const TOGETHER_BUDGET: usize = 100_000;

/// [`together_numerator`], or `None` when the expanded numerator would
/// exceed roughly `budget` terms.
pub fn together_numerator_bounded(e: &Expr, budget: usize) -> Option<Expr> {
    let terms = e.terms();
    let mut den: BTreeMap<Expr, Q> = BTreeMap::new();
    for t in &terms {
        for f in t.coeff_and_factors().1 {
            let (b, ex) = f.base_exp();
            if ex.is_negative() && b.as_num().is_none() {
                let m = den.entry(b).or_insert_with(|| Q::from_integer(0.into()));
                if -&ex > *m {
                    *m = -ex;
                }
            }
        }
    }
    if den.is_empty() {
        return Some(e.clone());
    }
    if budget != usize::MAX && expanded_size(&terms, &den) > budget {
        return None;
    }
    // Raw power nodes so that `mul` merges exponents before expanding.
    let mult: Vec<Expr> = den
        .into_iter()
        .map(|(b, q)| Expr::from_node(Node::Pow(b, q)))
        .collect();
    Some(Expr::add(
        terms
            .into_iter()
            .map(|t| {
                let mut v = mult.clone();
                v.push(t);
                Expr::mul(v)
            })
            .collect(),
    ))
}

/// Upper estimate of the term count after multiplying every term by the
/// common denominator and expanding.
fn expanded_size(terms: &[Expr], den: &BTreeMap<Expr, Q>) -> usize {
    let mut total: usize = 0;
    for t in terms {
        let own: BTreeMap<Expr, Q> = t
            .coeff_and_factors()
            .1
            .iter()
            .map(|f| f.base_exp())
            .collect();
        let mut size: usize = 1;
        for (b, m) in den {
            let Node::Add(bt) = b.node() else { continue };
            let k = own.get(b).map_or(m.clone(), |ex| m + ex);
            if k.is_integer() && k.is_positive() {
                let k = k.to_integer().to_u32().unwrap_or(u32::MAX);
                size = size.saturating_mul(bt.len().saturating_pow(k));
            }
        }
        total = total.saturating_add(size);
    }
    total
}

/// Rewrites `exp(a)` and `exp(b)` to a common argument when `a - b`
/// vanishes over a common denominator. Exponents written over different
/// but equivalent denominators otherwise keep equal terms apart.
pub fn unify_exp_args(e: &Expr) -> Expr {
    let mut cur = e.clone();
    // merged products can produce new arguments; a few passes suffice
    for _ in 0..3 {
        let mut args = BTreeSet::new();
        collect_exp_args(&cur, &mut args);
        let mut reps: Vec<Expr> = Vec::new();
        let mut map: HashMap<Expr, Expr> = HashMap::new();
        for a in args {
            let same = reps.iter().find(|r| {
                together_numerator_bounded(&(&a - *r), TOGETHER_BUDGET)
                    .is_some_and(|n| n.is_zero_atom())
            });
            match same {
                Some(r) => {
                    map.insert(a, r.clone());
                }
                None => reps.push(a),
            }
        }
        if map.is_empty() {
            break;
        }
        cur = replace_exp_args(&cur, &map);
    }
    cur
}

fn collect_exp_args(e: &Expr, out: &mut BTreeSet<Expr>) {
    if let Node::Kernel(Kernel::Exp, args) = e.node() {
        out.insert(args[0].clone());
    }
    for c in e.children() {
        collect_exp_args(&c, out);
    }
}

fn replace_exp_args(e: &Expr, map: &HashMap<Expr, Expr>) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Atom(_) => e.clone(),
        Node::Kernel(Kernel::Exp, args) if map.contains_key(&args[0]) => {
            Expr::exp(map[&args[0]].clone())
        }
        Node::Kernel(k, args) => {
            Expr::kernel(*k, args.iter().map(|a| replace_exp_args(a, map)).collect())
        }
        Node::Func(f) => Expr::func(FuncApp {
            name: f.name.clone(),
            derivs: f.derivs.clone(),
            args: f.args.iter().map(|a| replace_exp_args(a, map)).collect(),
        }),
        Node::Pow(b, q) => Expr::pow(&replace_exp_args(b, map), q),
        Node::Mul(c, fs) => {
            let mut v: Vec<Expr> = fs.iter().map(|f| replace_exp_args(f, map)).collect();
            v.push(Expr::num(c.clone()));
            Expr::mul(v)
        }
        Node::Add(ts) => Expr::add(ts.iter().map(|t| replace_exp_args(t, map)).collect()),
    }
}

/// Decides whether `e` vanishes identically.
///
/// The canonical form is tried first, then the numerator over a common
/// denominator; failing both, `e` is evaluated at seeded random points.
pub fn is_zero(e: &Expr, strategy: &ZeroStrategy) -> Result<ZeroVerdict, ExprError> {
    let e = unify_exp_args(&e.normalize());
    let together_zero = || {
        together_numerator_bounded(&e, TOGETHER_BUDGET).is_some_and(|n| n.is_zero_atom())
    };
    if e.is_zero_atom() || together_zero() {
        return Ok(ZeroVerdict::ProvedZero);
    }
    if let Some(q) = e.as_num() {
        return Ok(ZeroVerdict::ProvedNonzero {
            witness: Witness {
                point: BTreeMap::new(),
                value: q.to_f64().unwrap_or(f64::NAN),
                magnitude: q.abs().to_f64().unwrap_or(f64::NAN),
            },
        });
    }
    sample_zero(&e, strategy)
}

/// Purely numeric test, skipping the symbolic shortcuts.
pub fn sample_zero(e: &Expr, strategy: &ZeroStrategy) -> Result<ZeroVerdict, ExprError> {
    let sampler = Sampler::new(e, strategy);
    let results: Vec<Result<SampleOutcome, ExprError>> = (0..strategy.samples)
        .into_par_iter()
        .map(|i| sampler.run(e, i as u64))
        .collect();
    let mut max_ratio: f64 = 0.0;
    for r in results {
        let o = r?;
        let ratio = o.value.abs() / (1.0 + o.magnitude);
        if !(ratio < strategy.tol) {
            return Ok(ZeroVerdict::NumericallyNonzero {
                witness: Witness {
                    point: o.point,
                    value: o.value,
                    magnitude: o.magnitude,
                },
            });
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(ZeroVerdict::NumericallyZero {
        samples: strategy.samples,
        max_ratio,
    })
}

struct SampleOutcome {
    point: BTreeMap<String, f64>,
    value: f64,
    magnitude: f64,
}

/// Draws seeded sample points satisfying the domain guards.
pub struct Sampler<'a> {
    atoms: Vec<(Atom, (f64, f64))>,
    strategy: &'a ZeroStrategy,
}

impl<'a> Sampler<'a> {
    pub fn new(e: &Expr, strategy: &'a ZeroStrategy) -> Self {
        let mut all: BTreeSet<Atom> = e.free_atoms();
        for g in strategy.domains.require.iter().chain(&strategy.domains.exclude) {
            all.extend(g.free_atoms());
        }
        let atoms = all
            .into_iter()
            .filter_map(|a| strategy.domains.range_of(&a).map(|r| (a, r)))
            .collect();
        Sampler { atoms, strategy }
    }

    /// Evaluation context for the `attempt`-th draw of sample `index`, or
    /// `None` when the draw violates a guard.
    fn draw(&self, rng: &mut ChaCha8Rng, func_seed: u64) -> Option<EvalContext> {
        let mut ctx = EvalContext::new();
        ctx.func_seed = Some(func_seed);
        ctx.bind(Atom::Const(Constant::Pi), std::f64::consts::PI);
        for (a, (lo, hi)) in &self.atoms {
            let v = if hi > lo { rng.gen_range(*lo..*hi) } else { *lo };
            ctx.bind(a.clone(), v);
        }
        let d = &self.strategy.domains;
        for g in &d.require {
            match eval_tracked(g, &ctx) {
                Ok((v, _)) if v > 0.0 => {}
                _ => return None,
            }
        }
        for g in &d.exclude {
            match eval_tracked(g, &ctx) {
                Ok((v, m)) if v.abs() > 1e-6 * (1.0 + m) => {}
                _ => return None,
            }
        }
        Some(ctx)
    }

    fn run(&self, e: &Expr, index: u64) -> Result<SampleOutcome, ExprError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.strategy.seed);
        rng.set_stream(index);
        let mut last_err = String::from("guards never satisfied");
        for _ in 0..self.strategy.max_attempts {
            let func_seed: u64 = rng.gen();
            let Some(ctx) = self.draw(&mut rng, func_seed) else {
                continue;
            };
            match eval_tracked(e, &ctx) {
                Ok((value, magnitude)) => {
                    let point = self
                        .atoms
                        .iter()
                        .map(|(a, _)| (a.to_string(), ctx.get(a).unwrap_or(f64::NAN)))
                        .collect();
                    return Ok(SampleOutcome {
                        point,
                        value,
                        magnitude,
                    });
                }
                Err(err) => last_err = err.to_string(),
            }
        }
        Err(ExprError::Inconclusive(format!(
            "sample {index}: no admissible point after {} attempts ({last_err})",
            self.strategy.max_attempts
        )))
    }
}
