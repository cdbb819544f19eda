//! Jet-space bookkeeping, total derivatives and generator prolongation.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::approx::truncate;
use crate::expr::{
    apply_derivation, name, Atom, Derivation, Expr, ExprError, JetCoord, MultiIndex, Name,
};

/// Coordinates of the ε-graded jet space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpace {
    pub indep: Vec<Name>,
    pub deps: Vec<Name>,
    pub small: Name,
    /// Perturbation order p.
    pub order: u32,
}

impl JetSpace {
    pub fn new(indep: &[&str], deps: &[&str], small: &str, order: u32) -> Self {
        JetSpace {
            indep: indep.iter().map(|s| name(s)).collect(),
            deps: deps.iter().map(|s| name(s)).collect(),
            small: name(small),
            order,
        }
    }

    pub fn eps(&self) -> Expr {
        Expr::param(&self.small)
    }

    pub fn eps_atom(&self) -> Atom {
        Atom::Param(self.small.clone())
    }

    pub fn indep_expr(&self, i: usize) -> Expr {
        Expr::atom(Atom::Indep(self.indep[i].clone()))
    }

    /// `u_(k)` of dependent variable `a`, differentiated by `sigma`.
    pub fn coord(&self, a: usize, k: Option<u32>, sigma: MultiIndex) -> Expr {
        Expr::jet(JetCoord {
            dep: self.deps[a].clone(),
            order: k,
            sigma,
        })
    }

    /// Σ_k ε^k u_(k)σ.
    pub fn expanded_coord(&self, a: usize, sigma: &MultiIndex) -> Expr {
        let eps = self.eps();
        Expr::add(
            (0..=self.order)
                .map(|k| eps.powi(k as i64) * self.coord(a, Some(k), sigma.clone()))
                .collect(),
        )
    }

    pub fn dep_index(&self, dep: &str) -> Option<usize> {
        self.deps.iter().position(|d| d.as_ref() == dep)
    }

    /// Every multi-index with 1 <= |σ| <= r, ordered by total order.
    pub fn multi_indices(&self, r: u32) -> Vec<MultiIndex> {
        let mut level = vec![MultiIndex::empty()];
        let mut out = Vec::new();
        for _ in 0..r {
            let mut next = std::collections::BTreeSet::new();
            for m in &level {
                for v in &self.indep {
                    next.insert(m.bump(v));
                }
            }
            level = next.into_iter().collect();
            out.extend(level.iter().cloned());
        }
        out
    }
}

/// Total derivative D/Dx_i: differentiates explicit occurrences of `x_i`
/// and promotes every jet coordinate by one in slot `i`.
#[derive(Clone, Debug)]
pub struct TotalDerivative {
    pub var: Name,
}

impl TotalDerivative {
    pub fn new(var: &str) -> Self {
        TotalDerivative { var: name(var) }
    }
}

impl Derivation for TotalDerivative {
    fn atom(&self, a: &Atom) -> Expr {
        match a {
            Atom::Indep(n) if *n == self.var => Expr::one(),
            Atom::Jet(c) => Expr::jet(c.differentiated(&self.var)),
            _ => Expr::zero(),
        }
    }
}

/// D/Dx_i of `e`, with `i` indexing the independent variables of `space`.
pub fn total_derivative(e: &Expr, i: usize, space: &JetSpace) -> Result<Expr, ExprError> {
    apply_derivation(&TotalDerivative { var: space.indep[i].clone() }, e)
}

/// Total derivative with respect to a named variable.
pub fn total_derivative_by(e: &Expr, var: &str) -> Result<Expr, ExprError> {
    apply_derivation(&TotalDerivative::new(var), e)
}

/// Repeated total derivative along a multi-index.
pub fn total_derivative_multi(e: &Expr, sigma: &MultiIndex) -> Result<Expr, ExprError> {
    let mut r = e.clone();
    for v in sigma.vars() {
        if r.is_zero_atom() {
            break;
        }
        r = total_derivative_by(&r, &v)?;
    }
    Ok(r)
}

/// Approximate generator: seed components per ε-order, plus the lifted
/// (tilde) components once [`crate::approx::lift_generator`] has run.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    /// `xi[i][k]`: component along independent variable `i`, order `k`.
    pub xi: Vec<Vec<Expr>>,
    /// `eta[a][k]`: component along dependent variable `a`, order `k`.
    pub eta: Vec<Vec<Expr>>,
    pub xi_tilde: Option<Vec<Vec<Expr>>>,
    pub eta_tilde: Option<Vec<Vec<Expr>>>,
}

impl Generator {
    /// All-zero generator of the right shape.
    pub fn zero(space: &JetSpace) -> Self {
        let p = space.order as usize + 1;
        Generator {
            xi: vec![vec![Expr::zero(); p]; space.indep.len()],
            eta: vec![vec![Expr::zero(); p]; space.deps.len()],
            xi_tilde: None,
            eta_tilde: None,
        }
    }

    /// Translation along independent variable `i`.
    pub fn translation(space: &JetSpace, i: usize) -> Self {
        let mut g = Generator::zero(space);
        g.xi[i][0] = Expr::one();
        g
    }

    /// Seeds must not contain ε nor u_(k) with k >= 1.
    pub fn check_seeds(&self, space: &JetSpace) -> Result<(), String> {
        let eps = space.eps_atom();
        for comp in self.xi.iter().chain(&self.eta) {
            for s in comp {
                for a in s.free_atoms() {
                    match &a {
                        a if *a == eps => return Err(format!("seed `{s}` contains the small parameter")),
                        Atom::Jet(j) if j.order != Some(0) || !j.sigma.is_empty() => {
                            return Err(format!("seed `{s}` depends on `{j}`"))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    fn tilde(&self) -> (&Vec<Vec<Expr>>, &Vec<Vec<Expr>>) {
        (
            self.xi_tilde.as_ref().expect("generator not lifted"),
            self.eta_tilde.as_ref().expect("generator not lifted"),
        )
    }

    /// ξ̂_i = Σ_k ε^k ξ̃_(k)i.
    pub fn xi_full(&self, i: usize, space: &JetSpace) -> Expr {
        graded_sum(&self.tilde().0[i], space)
    }

    /// η̂_a = Σ_k ε^k η̃_(k)a.
    pub fn eta_full(&self, a: usize, space: &JetSpace) -> Expr {
        graded_sum(&self.tilde().1[a], space)
    }
}

fn graded_sum(parts: &[Expr], space: &JetSpace) -> Expr {
    let eps = space.eps();
    Expr::add(
        parts
            .iter()
            .enumerate()
            .map(|(k, e)| eps.powi(k as i64) * e)
            .collect(),
    )
}

/// Prolongation coefficients η_{a,σ}, built on demand and cached.
pub struct Prolongation<'a> {
    g: &'a Generator,
    space: &'a JetSpace,
    cache: Mutex<BTreeMap<(usize, MultiIndex), Expr>>,
    dxi: Mutex<BTreeMap<(usize, usize), Expr>>,
}

impl<'a> Prolongation<'a> {
    pub fn new(g: &'a Generator, space: &'a JetSpace) -> Self {
        Prolongation {
            g,
            space,
            cache: Mutex::new(BTreeMap::new()),
            dxi: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn space(&self) -> &JetSpace {
        self.space
    }

    pub fn generator(&self) -> &Generator {
        self.g
    }

    /// D_i(ξ̂_j), truncated.
    fn d_xi(&self, i: usize, j: usize) -> Result<Expr, ExprError> {
        if let Some(e) = self.dxi.lock().unwrap().get(&(i, j)) {
            return Ok(e.clone());
        }
        let xi = self.g.xi_full(j, self.space);
        let d = truncate(&total_derivative(&xi, i, self.space)?, self.space);
        self.dxi.lock().unwrap().insert((i, j), d.clone());
        Ok(d)
    }

    /// η_{a,σ}; the empty multi-index gives η̂_a itself.
    pub fn coeff(&self, a: usize, sigma: &MultiIndex) -> Result<Expr, ExprError> {
        if sigma.is_empty() {
            return Ok(self.g.eta_full(a, self.space));
        }
        if let Some(e) = self.cache.lock().unwrap().get(&(a, sigma.clone())) {
            return Ok(e.clone());
        }
        // Peel off the last variable: σ = τ + e_i.
        let (var, _) = sigma.pairs().last().expect("non-empty").clone();
        let i = self
            .space
            .indep
            .iter()
            .position(|v| *v == var)
            .expect("multi-index over unknown variable");
        let tau = sigma.lower(&var).expect("present");
        let prev = self.coeff(a, &tau)?;
        let mut terms = vec![total_derivative(&prev, i, self.space)?];
        for j in 0..self.space.indep.len() {
            let dxi = self.d_xi(i, j)?;
            if dxi.is_zero_atom() {
                continue;
            }
            let u = self.space.expanded_coord(a, &tau.bump(&self.space.indep[j]));
            terms.push(-(dxi * u));
        }
        let r = truncate(&Expr::add(terms), self.space);
        self.cache.lock().unwrap().insert((a, sigma.clone()), r.clone());
        Ok(r)
    }
}

/// Prolongs a lifted generator to order `r`, returning η_{a,σ} for every
/// dependent variable and every 1 <= |σ| <= r.
pub fn prolong(
    g: &Generator,
    r: u32,
    space: &JetSpace,
) -> Result<BTreeMap<(Name, MultiIndex), Expr>, ExprError> {
    let p = Prolongation::new(g, space);
    let mut out = BTreeMap::new();
    for a in 0..space.deps.len() {
        for sigma in space.multi_indices(r) {
            let c = p.coeff(a, &sigma)?;
            out.insert((space.deps[a].clone(), sigma), c);
        }
    }
    Ok(out)
}
