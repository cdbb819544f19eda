//! Verification of fixture generators, invariant-solution representations
//! and closed-form approximate solutions.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approx::{grade, truncate, ApproxError, GradedExpr};
use crate::detsys::{
    build_generator_with, extract_determining, invariance_condition_for,
    manifold_substitutions_for, restricted_condition, surface_conditions, DetError,
    DeterminingSystem, Mode,
};
use crate::expr::{
    is_zero, Atom, Bindings, Expr, ExprError, FuncBinding, JetCoord, Node, SampleDomains,
    ZeroStrategy,
    ZeroVerdict, Q,
};
use crate::jet::{total_derivative_multi, JetSpace};
use crate::numeval::{eval, grid_values, EvalContext, EvalError, GridAxis, GridSpec, GridTable};
use crate::parse::{
    let_bindings, Case, GeneratorDef, Guard, ProblemSpec, Restrictions, SolutionDef,
};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("constraint `{0}` cannot be imposed: {1}")]
    Constraint(String, String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Record wall-clock time in the report (breaks byte-identical output).
    pub timing: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 100,
            tol: 1e-9,
            seed: 0,
            timing: false,
        }
    }
}

/// Outcome for one equation at one ε-order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub equation: usize,
    pub order: u32,
    #[serde(flatten)]
    pub verdict: ZeroVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub command: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub passed: bool,
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl VerificationReport {
    fn new(command: &str, target: &str, mode: Option<Mode>, opts: &VerifyOptions) -> Self {
        VerificationReport {
            schema: REPORT_SCHEMA,
            command: command.into(),
            target: target.into(),
            mode,
            passed: true,
            samples: opts.samples,
            tolerance: opts.tol,
            seed: opts.seed,
            checks: Vec::new(),
            elapsed_ms: None,
        }
    }

    fn push(&mut self, label: String, equation: usize, order: u32, verdict: ZeroVerdict) {
        self.passed &= verdict.is_zero();
        self.checks.push(Check {
            label,
            equation,
            order,
            verdict,
        });
    }

    /// True when every check was settled symbolically.
    pub fn all_proved(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == ZeroVerdict::ProvedZero)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Bindings eliminating the parameters named by `solve` in the case
/// constraints.
pub fn case_bindings(case: Option<&Case>) -> Result<Bindings, VerifyError> {
    let mut b = Bindings::new();
    let Some(case) = case else { return Ok(b) };
    for c in &case.constraints {
        let Some(p) = &c.solve else {
            return Err(VerifyError::Constraint(
                format!("{} = {}", c.eq.lhs, c.eq.rhs),
                "no `solve` parameter given".into(),
            ));
        };
        let res = b.apply(&c.eq.residual());
        let v = crate::detsys::solve_linear(&res, &Atom::Param(p.clone())).map_err(|e| {
            VerifyError::Constraint(format!("{} = {}", c.eq.lhs, c.eq.rhs), e.to_string())
        })?;
        let v = b.apply(&v);
        b.atoms.insert(Atom::Param(p.clone()), v);
    }
    Ok(b)
}

fn lookup_case<'a>(spec: &'a ProblemSpec, name: &Option<String>) -> Result<Option<&'a Case>, VerifyError> {
    match name {
        None => Ok(None),
        Some(n) => spec
            .case(n)
            .map(Some)
            .ok_or_else(|| VerifyError::Unknown { kind: "case", name: n.clone() }),
    }
}

/// Sampling domains from the restriction blocks, later blocks overriding
/// earlier ones; guard expressions are rewritten with `b`.
pub fn sample_domains(layers: &[&Restrictions], b: &Bindings) -> SampleDomains {
    let mut d = SampleDomains::default();
    for r in layers {
        for dom in &r.domains {
            let lo = q_to_f64(&dom.lo);
            let hi = q_to_f64(&dom.hi);
            d.ranges.insert(Atom::Indep(dom.var.clone()), (lo, hi));
            d.ranges.insert(Atom::Param(dom.var.clone()), (lo, hi));
        }
        for g in &r.guards {
            match g {
                Guard::Positive(e) => d.require.push(b.apply(e)),
                Guard::NonZero(e) => d.exclude.push(b.apply(e)),
            }
        }
    }
    d
}

fn q_to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

fn strategy(opts: &VerifyOptions, domains: SampleDomains) -> ZeroStrategy {
    ZeroStrategy {
        samples: opts.samples,
        tol: opts.tol,
        seed: opts.seed,
        domains,
        ..ZeroStrategy::default()
    }
}

fn residuals_with(spec: &ProblemSpec, b: &Bindings) -> Vec<Expr> {
    spec.equations.iter().map(|e| b.apply(&e.residual())).collect()
}

fn finish(mut r: VerificationReport, start: Instant, opts: &VerifyOptions) -> VerificationReport {
    if opts.timing {
        r.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    r
}

fn order_label(k: usize) -> String {
    format!("order {k}")
}

/// Restricted invariance condition of a fixture generator, tested for zero
/// at every ε-order.
pub fn check_symmetry(
    spec: &ProblemSpec,
    def: &GeneratorDef,
    mode: Mode,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let case = lookup_case(spec, &def.case)?;
    let b = case_bindings(case)?;
    let space = spec.space();
    let g = build_generator_with(spec, def, &b)?;
    let eqs = residuals_with(spec, &b);
    let cond = invariance_condition_for(&space, &eqs, &g)?;
    let subs = manifold_substitutions_for(&space, &eqs, &g, mode)?;
    let restricted = restricted_condition(&cond, &subs)?;

    let lets = let_bindings(&def.lets);
    let mut layers = vec![&spec.restrictions];
    if let Some(c) = case {
        layers.push(&c.restrictions);
    }
    layers.push(&def.restrictions);
    let guards = Bindings {
        atoms: lets.atoms.iter().map(|(a, v)| (a.clone(), b.apply(v))).chain(b.atoms.clone()).collect(),
        funcs: Default::default(),
    };
    let st = strategy(opts, sample_domains(&layers, &guards));

    let mut report = VerificationReport::new("check-symmetry", &def.name, Some(mode), opts);
    for (n, graded) in restricted.iter().enumerate() {
        for (k, e) in graded.coeffs.iter().enumerate() {
            report.push(order_label(k), n, k as u32, is_zero(e, &st)?);
        }
    }
    Ok(finish(report, start, opts))
}

/// Determining system of a generator ansatz, with its case constraint
/// imposed.
pub fn derive_determining(
    spec: &ProblemSpec,
    def: &GeneratorDef,
    mode: Mode,
) -> Result<DeterminingSystem, VerifyError> {
    let case = lookup_case(spec, &def.case)?;
    let b = case_bindings(case)?;
    let space = spec.space();
    let g = build_generator_with(spec, def, &b)?;
    let eqs = residuals_with(spec, &b);
    let cond = invariance_condition_for(&space, &eqs, &g)?;
    let subs = manifold_substitutions_for(&space, &eqs, &g, mode)?;
    Ok(extract_determining(&cond, &subs)?)
}

/// Binds every opaque seed of `ansatz` (a component `F(a, b, ...)` over
/// plain symbols) to the matching component of `concrete`. Components the
/// ansatz fixes must agree with `concrete`.
pub fn seed_bindings(ansatz: &GeneratorDef, concrete: &GeneratorDef) -> Result<Bindings, VerifyError> {
    let al = let_bindings(&ansatz.lets);
    let cl = let_bindings(&concrete.lets);
    let mut b = Bindings::new();
    for (is_xi, comps) in [(true, &ansatz.xi), (false, &ansatz.eta)] {
        let other = if is_xi { &concrete.xi } else { &concrete.eta };
        for (v, k, e) in comps {
            let value = other
                .iter()
                .find(|(w, j, _)| w == v && j == k)
                .map_or_else(Expr::zero, |(_, _, c)| cl.apply(c));
            let slot = format!("{}[{v},{k}]", if is_xi { "xi" } else { "eta" });
            let e = al.apply(e);
            let seed = match e.node() {
                Node::Func(f) if f.derivs.iter().all(|&d| d == 0) => f
                    .args
                    .iter()
                    .map(|a| a.as_atom().cloned())
                    .collect::<Option<Vec<_>>>()
                    .map(|params| (f.name.clone(), params)),
                _ => None,
            };
            match seed {
                Some((name, params)) => {
                    b.funcs.insert(name, FuncBinding::new(params, value));
                }
                None if (&e - &value).normalize().is_zero_atom() => {}
                None => {
                    return Err(VerifyError::Invalid(format!(
                        "`{}` does not match the ansatz at {slot}",
                        concrete.name
                    )))
                }
            }
        }
    }
    Ok(b)
}

/// Determining equations of `ansatz` evaluated on the seeds of `concrete`.
pub fn check_determining(
    spec: &ProblemSpec,
    ansatz: &GeneratorDef,
    concrete: &GeneratorDef,
    mode: Mode,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let sys = derive_determining(spec, ansatz, mode)?;
    let seeds = seed_bindings(ansatz, concrete)?;
    let case = lookup_case(spec, &ansatz.case)?;
    let b = case_bindings(case)?;
    let mut layers = vec![&spec.restrictions];
    if let Some(c) = case {
        layers.push(&c.restrictions);
    }
    layers.push(&concrete.restrictions);
    let st = strategy(opts, sample_domains(&layers, &b));
    let target = format!("{}:{}", ansatz.name, concrete.name);
    let mut report = VerificationReport::new("derive-determining", &target, Some(mode), opts);
    for eq in &sys.equations {
        let e = b.apply(&seeds.apply(&eq.expr));
        report.push(format!("coefficient of {}", eq.monomial_string()), eq.equation, eq.order, is_zero(&e, &st)?);
    }
    Ok(finish(report, start, opts))
}

/// Value of jet coordinate `c` on the closed-form parts `parts[k]`.
fn jet_value(c: &JetCoord, parts: &[Expr], space: &JetSpace) -> Result<Expr, VerifyError> {
    let component = |k: usize| -> Result<Expr, VerifyError> {
        let p = parts.get(k).ok_or_else(|| {
            VerifyError::Invalid(format!("no expression for `{}{}`", c.dep, k))
        })?;
        Ok(total_derivative_multi(p, &c.sigma)?)
    };
    match c.order {
        Some(k) => component(k as usize),
        None => {
            let mut terms = Vec::new();
            // a shorter `parts` truncates the expansion
            for k in 0..parts.len().min(space.order as usize + 1) {
                terms.push(&space.eps().powi(k as i64) * &component(k)?);
            }
            Ok(Expr::add(terms))
        }
    }
}

/// Replaces every jet coordinate of `e` by its value on `parts`.
fn on_solution(e: &Expr, parts: &[Expr], space: &JetSpace) -> Result<Expr, VerifyError> {
    let mut b = Bindings::new();
    for c in e.jet_coords() {
        let v = jet_value(&c, parts, space)?;
        b.atoms.insert(Atom::Jet(c), v);
    }
    Ok(b.apply(e))
}

/// Orders `0..=p` of one dependent variable, with `b` applied.
fn ordered_parts(
    space: &JetSpace,
    parts: &[(crate::expr::Name, u32, Expr)],
    b: &Bindings,
    what: &str,
) -> Result<Vec<Expr>, VerifyError> {
    if space.deps.len() != 1 {
        return Err(VerifyError::Invalid(
            "closed-form checks support a single dependent variable".into(),
        ));
    }
    (0..=space.order)
        .map(|k| {
            parts
                .iter()
                .find(|(_, j, _)| *j == k)
                .map(|(_, _, e)| b.apply(e))
                .ok_or_else(|| VerifyError::Invalid(format!("{what} lacks order {k}")))
        })
        .collect()
}

fn compose(first: &Bindings, second: &Bindings) -> Bindings {
    let mut atoms: std::collections::HashMap<Atom, Expr> =
        first.atoms.iter().map(|(a, v)| (a.clone(), second.apply(v))).collect();
    for (a, v) in &second.atoms {
        atoms.entry(a.clone()).or_insert_with(|| v.clone());
    }
    Bindings {
        atoms,
        funcs: second.funcs.clone(),
    }
}

/// Graded invariant surface condition evaluated on a representation, with
/// the representation's unknown functions left opaque.
pub fn check_isc(
    spec: &ProblemSpec,
    rep_name: &str,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let rep = spec
        .representation(rep_name)
        .ok_or_else(|| VerifyError::Unknown { kind: "representation", name: rep_name.into() })?;
    let def = spec
        .generator(&rep.generator)
        .ok_or_else(|| VerifyError::Unknown { kind: "generator", name: rep.generator.clone() })?;
    let case = lookup_case(spec, &def.case)?;
    let b = case_bindings(case)?;
    let space = spec.space();
    let g = build_generator_with(spec, def, &b)?;
    let rb = compose(&let_bindings(&rep.lets), &b);
    let parts = ordered_parts(&space, &rep.parts, &rb, "representation")?;
    let mut layers = vec![&spec.restrictions];
    if let Some(c) = case {
        layers.push(&c.restrictions);
    }
    layers.push(&def.restrictions);
    let st = strategy(opts, sample_domains(&layers, &b));

    let mut report = VerificationReport::new("check-isc", rep_name, None, opts);
    for (n, q) in surface_conditions(&space, &g)?.iter().enumerate() {
        for (k, e) in q.coeffs.iter().enumerate() {
            let r = on_solution(e, &parts, &space)?;
            report.push(order_label(k), n, k as u32, is_zero(&r, &st)?);
        }
    }
    Ok(finish(report, start, opts))
}

/// Closed-form solution prepared for checks: parameters eliminated, lets
/// expanded.
pub struct PreparedSolution<'a> {
    pub def: &'a SolutionDef,
    pub case: Option<&'a Case>,
    pub bindings: Bindings,
    pub parts: Vec<Expr>,
    pub residuals: Vec<Expr>,
}

pub fn prepare_solution<'a>(
    spec: &'a ProblemSpec,
    name: &str,
) -> Result<PreparedSolution<'a>, VerifyError> {
    let def = spec
        .solution(name)
        .ok_or_else(|| VerifyError::Unknown { kind: "solution", name: name.into() })?;
    let case = lookup_case(spec, &def.case)?;
    let b = case_bindings(case)?;
    let sb = compose(&let_bindings(&def.lets), &b);
    let parts = ordered_parts(&spec.space(), &def.parts, &sb, "solution")?;
    if let Some(f) = parts.iter().flat_map(|p| p.func_apps()).next() {
        return Err(VerifyError::Invalid(format!(
            "solution `{name}` is not closed-form: contains `{}`",
            f.name
        )));
    }
    Ok(PreparedSolution {
        def,
        case,
        bindings: sb,
        residuals: residuals_with(spec, &b),
        parts,
    })
}

impl PreparedSolution<'_> {
    fn layers<'s>(&'s self, spec: &'s ProblemSpec) -> Vec<&'s Restrictions> {
        let mut layers = vec![&spec.restrictions];
        if let Some(c) = self.case {
            layers.push(&c.restrictions);
        }
        layers.push(&self.def.restrictions);
        layers
    }

    /// Untruncated residuals on `u0 + eps*u1 + ...`.
    pub fn full_residuals(&self, space: &JetSpace) -> Result<Vec<Expr>, VerifyError> {
        self.residuals
            .iter()
            .map(|r| on_solution(r, &self.parts, space))
            .collect()
    }

    /// Whole solution `u0 + eps*u1 + ...` as one expression.
    pub fn assembled(&self, space: &JetSpace) -> Expr {
        let terms = self
            .parts
            .iter()
            .enumerate()
            .map(|(k, p)| &space.eps().powi(k as i64) * p)
            .collect();
        Expr::add(terms)
    }
}

/// Checks the graded residual of a closed-form solution at every order, and
/// that the leading order solves the unperturbed equation on its own.
pub fn verify_solution(
    spec: &ProblemSpec,
    name: &str,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let sol = prepare_solution(spec, name)?;
    let space = spec.space();
    let st = strategy(opts, sample_domains(&sol.layers(spec), &sol.bindings));
    let eps = Bindings::new().with_atom(space.eps_atom(), Expr::zero());

    let mut report = VerificationReport::new("verify-solution", name, None, opts);
    for (n, full) in sol.full_residuals(&space)?.iter().enumerate() {
        let graded: GradedExpr = grade(&truncate(full, &space), &space)?;
        for (k, e) in graded.coeffs.iter().enumerate() {
            report.push(order_label(k), n, k as u32, is_zero(e, &st)?);
        }
        // the ε = 0 equation evaluated on the leading part alone
        let unperturbed = eps.apply(&sol.residuals[n]);
        let lead = on_solution(&unperturbed, &sol.parts[..1], &space)?;
        report.push("unperturbed".into(), n, 0, is_zero(&lead, &st)?);
        let agree = graded.order(0) - &lead;
        report.push("unperturbed matches order 0".into(), n, 0, is_zero(&agree, &st)?);
    }
    Ok(finish(report, start, opts))
}

/// Numeric parameter values of a named value set, resolved in order.
pub fn value_context(
    spec: &ProblemSpec,
    sol: &SolutionDef,
    set: &str,
) -> Result<EvalContext, VerifyError> {
    let vs = sol
        .value_sets
        .iter()
        .find(|v| v.name == set)
        .ok_or_else(|| VerifyError::Unknown { kind: "value set", name: set.into() })?;
    let mut ctx = EvalContext::new();
    for (n, e) in &vs.values {
        let v = eval(e, &ctx)?;
        let atom = if *n == spec.small { spec.space().eps_atom() } else { Atom::Param(n.clone()) };
        ctx.bind(atom, v);
    }
    Ok(ctx)
}

/// Grid over the (t, x) domains of a solution, inclusive of the endpoints.
pub fn solution_grid(
    spec: &ProblemSpec,
    sol: &PreparedSolution<'_>,
    t_steps: usize,
    x_steps: usize,
) -> Result<GridSpec, VerifyError> {
    if spec.indep.len() != 2 {
        return Err(VerifyError::Invalid("grids need exactly two independent variables".into()));
    }
    let domains = sample_domains(&sol.layers(spec), &Bindings::new());
    let axis = |i: usize, steps: usize| {
        let v = &spec.indep[i];
        let (lo, hi) = domains
            .range_of(&Atom::Indep(v.clone()))
            .expect("independent variables always have a range");
        GridAxis::new(v, lo, hi, steps)
    };
    Ok(GridSpec {
        t: axis(0, t_steps),
        x: axis(1, x_steps),
    })
}

/// Max |residual| of the untruncated equation for one ε value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub schema: u32,
    pub solution: String,
    pub values: String,
    pub rows: Vec<ConvergenceRow>,
    /// `max_residual[i] / max_residual[i+1]`.
    pub ratios: Vec<f64>,
    /// log2 of the ratios when consecutive ε halve; the expected value for a
    /// first-order-accurate expansion is 2.
    pub fitted_order: Vec<f64>,
    /// `max_residual / eps^(p+1)` per row.
    pub constants: Vec<f64>,
}

/// Residual of the untruncated equation on the grid for each ε.
pub fn epsilon_convergence(
    spec: &ProblemSpec,
    name: &str,
    values: &str,
    grid: &GridSpec,
    eps_list: &[f64],
) -> Result<ConvergenceTable, VerifyError> {
    let sol = prepare_solution(spec, name)?;
    let space = spec.space();
    let mut ctx = value_context(spec, sol.def, values)?;
    let full = sol.full_residuals(&space)?;
    let cols: Vec<(String, Expr)> = full
        .iter()
        .enumerate()
        .map(|(i, e)| (format!("r{i}"), e.clone()))
        .collect();
    let mut rows = Vec::new();
    for &eps in eps_list {
        ctx.bind(space.eps_atom(), eps);
        let table = grid_values(&cols, grid, &ctx)?;
        let max = table
            .rows
            .iter()
            .flat_map(|r| r.2.iter())
            .fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
        rows.push(ConvergenceRow { eps, max_residual: max });
    }
    let ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| w[0].max_residual / w[1].max_residual)
        .collect();
    let fitted_order = rows
        .windows(2)
        .map(|w| (w[0].max_residual / w[1].max_residual).ln() / (w[0].eps / w[1].eps).ln())
        .collect();
    let p1 = (space.order + 1) as i32;
    let constants = rows.iter().map(|r| r.max_residual / r.eps.powi(p1)).collect();
    Ok(ConvergenceTable {
        schema: REPORT_SCHEMA,
        solution: name.into(),
        values: values.into(),
        rows,
        ratios,
        fitted_order,
        constants,
    })
}

/// Solution values `u` (and the two parts) on the grid for a value set.
pub fn solution_table(
    spec: &ProblemSpec,
    name: &str,
    values: &str,
    t_steps: usize,
    x_steps: usize,
) -> Result<GridTable, VerifyError> {
    let sol = prepare_solution(spec, name)?;
    let space = spec.space();
    let ctx = value_context(spec, sol.def, values)?;
    let grid = solution_grid(spec, &sol, t_steps, x_steps)?;
    let mut cols = vec![(space.deps[0].to_string(), sol.assembled(&space))];
    for (k, p) in sol.parts.iter().enumerate() {
        cols.push((format!("{}{k}", space.deps[0]), p.clone()));
    }
    Ok(grid_values(&cols, &grid, &ctx)?)
}

/// A generator with one numeric coefficient changed.
#[derive(Clone, Debug)]
pub struct Mutation {
    pub def: GeneratorDef,
    pub description: String,
}

/// Term `t` of a component with its rational coefficient raised by one.
fn bump_coefficient(t: &Expr) -> Expr {
    let (c, fs) = t.coeff_and_factors();
    let mut factors = vec![Expr::num(c + Q::from_integer(1.into()))];
    factors.extend(fs);
    Expr::mul(factors)
}

/// `t` is `a` times a factor free of `a`.
fn linear_factor(t: &Expr, a: &Atom) -> bool {
    let (_, fs) = t.coeff_and_factors();
    let mut plain = 0;
    for f in &fs {
        if f.as_atom() == Some(a) {
            plain += 1;
        } else if f.contains_atom(a) {
            return false;
        }
    }
    plain == 1
}

fn depends_on_coordinates(t: &Expr) -> bool {
    t.free_atoms()
        .iter()
        .any(|a| matches!(a, Atom::Indep(_) | Atom::Jet(_)))
}

/// Seeded single-constant mutation of a generator: one term of one
/// non-gauge component that depends on the coordinates gets its numeric
/// coefficient increased by one. `None` when no component has such a term.
pub fn mutate_generator(spec: &ProblemSpec, def: &GeneratorDef, seed: u64) -> Option<Mutation> {
    let lets = let_bindings(&def.lets);
    let gauge = spec.indep.first();
    let mut components = Vec::new();
    for (is_xi, comps) in [(true, &def.xi), (false, &def.eta)] {
        for (idx, (v, k, e)) in comps.iter().enumerate() {
            if is_xi && Some(v) == gauge {
                continue;
            }
            components.push((is_xi, idx, v.clone(), *k, lets.apply(e).terms()));
        }
    }
    // Parameters entering every term linearly are free constants of the
    // family; changing a term that carries one can be absorbed by them.
    let mut nonlinear: BTreeSet<Atom> = BTreeSet::new();
    let mut params: BTreeSet<Atom> = BTreeSet::new();
    for t in components.iter().flat_map(|c| &c.4) {
        for a in t.free_atoms() {
            if matches!(a, Atom::Param(_)) {
                if !linear_factor(t, &a) {
                    nonlinear.insert(a.clone());
                }
                params.insert(a);
            }
        }
    }
    let free: BTreeSet<&Atom> = params.difference(&nonlinear).collect();
    let mut candidates = Vec::new();
    for (is_xi, idx, v, k, terms) in &components {
        for (ti, t) in terms.iter().enumerate() {
            let absorbed = t.free_atoms().iter().any(|a| free.contains(a));
            if depends_on_coordinates(t) && !absorbed {
                candidates.push((*is_xi, *idx, v.clone(), *k, terms.clone(), ti));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (is_xi, idx, v, k, terms, ti) = candidates.choose(&mut rng)?.clone();
    let mut new_terms = terms.clone();
    new_terms[ti] = bump_coefficient(&terms[ti]);
    let mutated = Expr::add(new_terms);
    let mut out = def.clone();
    out.name = format!("{}~m{seed}", def.name);
    let slot = if is_xi { &mut out.xi[idx] } else { &mut out.eta[idx] };
    slot.2 = mutated;
    Some(Mutation {
        description: format!(
            "{}[{v},{k}]: coefficient of `{}` increased by one",
            if is_xi { "xi" } else { "eta" },
            terms[ti]
        ),
        def: out,
    })
}
