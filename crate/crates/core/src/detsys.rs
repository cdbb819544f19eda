//! Invariance condition, restriction to the equation manifold, and
//! extraction of determining equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::approx::{expand_dependent, grade, lift_generator, truncate, ApproxError, GradedExpr};
use crate::expr::{
    differentiate, Atom, Bindings, Expr, ExprError, JetCoord, MultiIndex,
};
use crate::jet::{total_derivative_multi, Generator, JetSpace, Prolongation};
use crate::parse::{let_bindings, GeneratorDef, ProblemSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetError {
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid generator: {0}")]
    Generator(String),
    #[error("cannot solve `{expr}` linearly for `{coord}`")]
    NotLinear { expr: String, coord: String },
    #[error("no coordinate of order {order} to solve for in `{expr}`")]
    NothingToSolve { expr: String, order: u32 },
    #[error("rewrite rules do not reach a fixed point")]
    Cyclic,
    #[error("non-polynomial dependence on `{coord}` in `{term}`")]
    NonPolynomial { coord: String, term: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Lie,
    QConditional,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lie" => Ok(Mode::Lie),
            "q-conditional" => Ok(Mode::QConditional),
            _ => Err(format!("unknown mode `{s}` (expected `lie` or `q-conditional`)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lie => "lie",
            Mode::QConditional => "q-conditional",
        })
    }
}

/// Builds the seed generator of a fixture block, with `let` definitions
/// expanded and unspecified components set to zero, then lifts it.
pub fn build_generator(spec: &ProblemSpec, def: &GeneratorDef) -> Result<Generator, DetError> {
    build_generator_with(spec, def, &Bindings::new())
}

/// As [`build_generator`], applying `extra` (e.g. an eliminated parameter)
/// after the local definitions.
pub fn build_generator_with(
    spec: &ProblemSpec,
    def: &GeneratorDef,
    extra: &Bindings,
) -> Result<Generator, DetError> {
    let space = spec.space();
    let lets = let_bindings(&def.lets);
    let fix = |e: &Expr| extra.apply(&lets.apply(e));
    let mut g = Generator::zero(&space);
    for (v, k, e) in &def.xi {
        let i = space.indep.iter().position(|x| x == v).expect("checked by parser");
        g.xi[i][*k as usize] = fix(e);
    }
    for (d, k, e) in &def.eta {
        let a = space.dep_index(d).expect("checked by parser");
        g.eta[a][*k as usize] = fix(e);
    }
    g.check_seeds(&space).map_err(DetError::Generator)?;
    Ok(lift_generator(&g, &space)?)
}

/// Multiplies two expressions and drops terms beyond the expansion order.
fn mul_trunc(a: &Expr, b: &Expr, space: &JetSpace) -> Expr {
    if a.is_zero_atom() || b.is_zero_atom() {
        return Expr::zero();
    }
    truncate(&(a * b), space)
}

/// Ξ^(r) applied to each equation, expanded in ε and graded.
pub fn invariance_condition(spec: &ProblemSpec, g: &Generator) -> Result<Vec<GradedExpr>, DetError> {
    invariance_condition_for(&spec.space(), &residuals(spec), g)
}

pub(crate) fn residuals(spec: &ProblemSpec) -> Vec<Expr> {
    spec.equations.iter().map(|e| e.residual()).collect()
}

/// Invariance condition for explicit residuals (after any parameter
/// elimination).
pub fn invariance_condition_for(
    space: &JetSpace,
    eqs: &[Expr],
    g: &Generator,
) -> Result<Vec<GradedExpr>, DetError> {
    let prol = Prolongation::new(g, space);
    let mut out = Vec::with_capacity(eqs.len());
    for delta in eqs {
        let mut terms = Vec::new();
        for (i, v) in space.indep.iter().enumerate() {
            let d = differentiate(delta, &Expr::atom(Atom::Indep(v.clone())))?;
            if !d.is_zero_atom() {
                terms.push(mul_trunc(&g.xi_full(i, space), &expand_dependent(&d, space), space));
            }
        }
        for c in delta.jet_coords() {
            if c.order.is_some() {
                return Err(DetError::Generator(format!(
                    "equation must be written in `{}`, not in expansion components",
                    c.dep
                )));
            }
            let a = space.dep_index(&c.dep).expect("declared dependent variable");
            let d = differentiate(delta, &Expr::jet(c.clone()))?;
            let coeff = prol.coeff(a, &c.sigma)?;
            terms.push(mul_trunc(&coeff, &expand_dependent(&d, space), space));
        }
        out.push(grade(&truncate(&Expr::add(terms), space), space)?);
    }
    Ok(out)
}

/// Where a rewrite rule comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RuleSource {
    /// Order-k coefficient of equation `equation`.
    Equation { equation: usize, order: u32 },
    /// Order-k coefficient of the invariant surface condition.
    Surface { order: u32 },
    /// Total derivative along `sigma` of the order-k surface condition.
    Consequence { order: u32, sigma: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub lhs: JetCoord,
    pub rhs: Expr,
    pub source: RuleSource,
}

/// The manifold as a triangular rewrite system on jet coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionSet {
    pub mode: Mode,
    pub rules: Vec<Rule>,
}

const MAX_PASSES: usize = 64;

impl SubstitutionSet {
    fn bindings(&self) -> Bindings {
        let mut b = Bindings::new();
        for r in &self.rules {
            b.atoms.insert(Atom::Jet(r.lhs.clone()), r.rhs.clone());
        }
        b
    }

    fn has_lhs(&self, e: &Expr) -> bool {
        let lhs: BTreeSet<&JetCoord> = self.rules.iter().map(|r| &r.lhs).collect();
        e.jet_coords().iter().any(|c| lhs.contains(c))
    }

    /// Rewrites until no left-hand side remains.
    pub fn apply(&self, e: &Expr) -> Result<Expr, DetError> {
        let b = self.bindings();
        let mut cur = e.clone();
        for _ in 0..MAX_PASSES {
            if !self.has_lhs(&cur) {
                return Ok(cur);
            }
            cur = b.apply(&cur);
        }
        Err(DetError::Cyclic)
    }

    /// Rewrites every right-hand side to its normal form.
    fn close(&mut self) -> Result<(), DetError> {
        for _ in 0..MAX_PASSES {
            let snapshot = self.clone();
            let mut changed = false;
            for r in &mut self.rules {
                if snapshot.has_lhs(&r.rhs) {
                    r.rhs = snapshot.bindings().apply(&r.rhs);
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
        Err(DetError::Cyclic)
    }
}

/// Solves `e = 0` for `c`, which must occur linearly.
pub fn solve_linear(e: &Expr, c: &Atom) -> Result<Expr, DetError> {
    let ce = Expr::atom(c.clone());
    let a = differentiate(e, &ce)?;
    let not_linear = || DetError::NotLinear {
        expr: e.to_string(),
        coord: c.to_string(),
    };
    if a.is_zero_atom() || a.contains_atom(c) {
        return Err(not_linear());
    }
    let b = e - &(&a * &ce);
    if b.contains_atom(c) {
        return Err(not_linear());
    }
    Ok(-(b / a))
}

/// Gauge index: first variable with nonzero leading ξ; it must read ξ = 1 at
/// order 0, vanish at higher orders, and all earlier components must vanish.
pub fn gauge_index(g: &Generator) -> Result<usize, DetError> {
    let i = g
        .xi
        .iter()
        .position(|c| !c[0].is_zero_atom())
        .ok_or_else(|| DetError::Generator("all leading ξ components vanish".into()))?;
    let ok = g.xi[i][0].is_one()
        && g.xi[i][1..].iter().all(Expr::is_zero_atom)
        && g.xi[..i].iter().all(|c| c.iter().all(Expr::is_zero_atom));
    if ok {
        Ok(i)
    } else {
        Err(DetError::Generator(
            "q-conditional mode needs a normalized generator (ξ = 1 at order 0, 0 above)".into(),
        ))
    }
}

/// Graded invariant surface conditions Q_α.
pub fn surface_conditions(space: &JetSpace, g: &Generator) -> Result<Vec<GradedExpr>, DetError> {
    let mut out = Vec::new();
    for a in 0..space.deps.len() {
        let mut terms = vec![-g.eta_full(a, space)];
        for (j, v) in space.indep.iter().enumerate() {
            let u = space.expanded_coord(a, &MultiIndex::empty().bump(v));
            terms.push(mul_trunc(&g.xi_full(j, space), &u, space));
        }
        out.push(grade(&truncate(&Expr::add(terms), space), space)?);
    }
    Ok(out)
}

/// Sort key for picking the leading coordinate: total order first, then the
/// count of each variable from the last to the first.
fn lead_key(c: &JetCoord, space: &JetSpace) -> (u32, Vec<u32>) {
    let counts = space.indep.iter().rev().map(|v| c.sigma.count(v)).collect();
    (c.sigma.order(), counts)
}

fn equation_rules(
    set: &mut SubstitutionSet,
    space: &JetSpace,
    eqs: &[Expr],
) -> Result<(), DetError> {
    for (n, delta) in eqs.iter().enumerate() {
        let graded = grade(&expand_dependent(delta, space), space)?;
        for k in 0..=space.order {
            let e = set.apply(graded.order(k as usize))?;
            if e.is_zero_atom() {
                continue;
            }
            let lead = e
                .jet_coords()
                .into_iter()
                .filter(|c| c.order == Some(k) && !c.sigma.is_empty())
                .max_by_key(|c| lead_key(c, space))
                .ok_or_else(|| DetError::NothingToSolve {
                    expr: e.to_string(),
                    order: k,
                })?;
            let rhs = solve_linear(&e, &Atom::Jet(lead.clone()))?;
            set.rules.push(Rule {
                lhs: lead,
                rhs,
                source: RuleSource::Equation { equation: n, order: k },
            });
            set.close()?;
        }
    }
    Ok(())
}

/// Builds the rewrite system describing the manifold.
pub fn manifold_substitutions(
    spec: &ProblemSpec,
    g: &Generator,
    mode: Mode,
) -> Result<SubstitutionSet, DetError> {
    manifold_substitutions_for(&spec.space(), &residuals(spec), g, mode)
}

pub fn manifold_substitutions_for(
    space: &JetSpace,
    eqs: &[Expr],
    g: &Generator,
    mode: Mode,
) -> Result<SubstitutionSet, DetError> {
    let mut set = SubstitutionSet {
        mode,
        rules: Vec::new(),
    };
    if mode == Mode::QConditional {
        let gi = gauge_index(g)?;
        let gv = &space.indep[gi];
        let r = eqs
            .iter()
            .flat_map(|e| e.jet_coords())
            .map(|c| c.sigma.order())
            .max()
            .unwrap_or(1);
        for (a, q) in surface_conditions(space, g)?.iter().enumerate() {
            for k in 0..=space.order {
                let qk = q.order(k as usize);
                let base = JetCoord {
                    dep: space.deps[a].clone(),
                    order: Some(k),
                    sigma: MultiIndex::empty(),
                };
                let lhs = base.differentiated(gv);
                let rhs = solve_linear(qk, &Atom::Jet(lhs.clone()))?;
                set.rules.push(Rule {
                    lhs,
                    rhs,
                    source: RuleSource::Surface { order: k },
                });
                for s in space.multi_indices(r.saturating_sub(1)) {
                    let dq = total_derivative_multi(qk, &s)?;
                    let lhs = base.with_sigma(s.bump(gv));
                    let rhs = solve_linear(&dq, &Atom::Jet(lhs.clone()))?;
                    set.rules.push(Rule {
                        lhs,
                        rhs,
                        source: RuleSource::Consequence {
                            order: k,
                            sigma: sigma_label(&s),
                        },
                    });
                }
            }
        }
        set.close()?;
    }
    equation_rules(&mut set, space, eqs)?;
    Ok(set)
}

fn sigma_label(s: &MultiIndex) -> String {
    s.vars().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// One coefficient equation with its origin.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingEquation {
    pub equation: usize,
    pub order: u32,
    /// Monomial in the surviving coordinates; empty for the free term.
    pub monomial: Vec<(JetCoord, u32)>,
    pub expr: Expr,
}

impl DeterminingEquation {
    pub fn monomial_string(&self) -> String {
        if self.monomial.is_empty() {
            return "1".into();
        }
        self.monomial
            .iter()
            .map(|(c, n)| if *n == 1 { c.to_string() } else { format!("{c}^{n}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub mode: Mode,
    pub equations: Vec<DeterminingEquation>,
}

#[derive(Serialize)]
struct JsonEquation {
    equation: usize,
    order: u32,
    monomial: String,
    expr: String,
}

impl DeterminingSystem {
    /// `coefficient = 0;` lines annotated with their monomial.
    pub fn to_dsl(&self) -> String {
        let mut s = String::new();
        for e in &self.equations {
            s.push_str(&format!(
                "# equation {} order {} monomial {}\n{} = 0;\n",
                e.equation,
                e.order,
                e.monomial_string(),
                e.expr
            ));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v: Vec<JsonEquation> = self
            .equations
            .iter()
            .map(|e| JsonEquation {
                equation: e.equation,
                order: e.order,
                monomial: e.monomial_string(),
                expr: e.expr.to_string(),
            })
            .collect();
        serde_json::to_value(v).expect("serializable")
    }

    pub fn is_trivial(&self) -> bool {
        self.equations.is_empty()
    }
}

/// Whether `c` is collected as an indeterminate.
fn collectable(c: &JetCoord) -> bool {
    !c.sigma.is_empty() || c.order.map_or(false, |k| k >= 1)
}

/// Splits an expanded expression into coefficients of monomials in the
/// collectable coordinates.
pub fn collect_monomials(
    e: &Expr,
) -> Result<BTreeMap<Vec<(JetCoord, u32)>, Expr>, DetError> {
    let mut groups: BTreeMap<Vec<(JetCoord, u32)>, Vec<Expr>> = BTreeMap::new();
    for t in e.terms() {
        let (c, fs) = t.coeff_and_factors();
        let mut mono: Vec<(JetCoord, u32)> = Vec::new();
        let mut rest = vec![Expr::num(c)];
        for f in fs {
            let (b, ex) = f.base_exp();
            if let Some(Atom::Jet(j)) = b.as_atom() {
                if collectable(j) {
                    let n = ex.is_integer().then(|| ex.to_integer().to_u32()).flatten();
                    match n {
                        Some(n) if ex.is_positive() => {
                            mono.push((j.clone(), n));
                            continue;
                        }
                        _ => {
                            return Err(DetError::NonPolynomial {
                                coord: j.to_string(),
                                term: t.to_string(),
                            })
                        }
                    }
                }
            }
            if let Some(j) = f.jet_coords().into_iter().find(collectable) {
                return Err(DetError::NonPolynomial {
                    coord: j.to_string(),
                    term: t.to_string(),
                });
            }
            rest.push(f);
        }
        mono.sort();
        groups.entry(mono).or_default().push(Expr::mul(rest));
    }
    Ok(groups.into_iter().map(|(m, v)| (m, Expr::add(v))).collect())
}

/// Restricts the graded condition to the manifold and collects coefficients.
pub fn extract_determining(
    cond: &[GradedExpr],
    subs: &SubstitutionSet,
) -> Result<DeterminingSystem, DetError> {
    let mut equations = Vec::new();
    for (n, g) in cond.iter().enumerate() {
        for (k, e) in g.coeffs.iter().enumerate() {
            let r = subs.apply(e)?;
            for (monomial, expr) in collect_monomials(&r)? {
                if !expr.is_zero_atom() {
                    equations.push(DeterminingEquation {
                        equation: n,
                        order: k as u32,
                        monomial,
                        expr,
                    });
                }
            }
        }
    }
    Ok(DeterminingSystem {
        mode: subs.mode,
        equations,
    })
}

/// Restricted condition per equation and order, before collection.
pub fn restricted_condition(
    cond: &[GradedExpr],
    subs: &SubstitutionSet,
) -> Result<Vec<GradedExpr>, DetError> {
    cond.iter()
        .map(|g| {
            Ok(GradedExpr {
                coeffs: g.coeffs.iter().map(|e| subs.apply(e)).collect::<Result<_, _>>()?,
            })
        })
        .collect()
}
