//! Perturbative machinery: expansion of dependent variables in the small
//! parameter, grading by powers of it, and the recursion operator used to
//! lift generator seeds.

use num_traits::{Signed, ToPrimitive};

use crate::expr::{
    apply_derivation, name, Atom, Bindings, Derivation, Expr, ExprError, FuncApp, FuncBinding,
    JetCoord,
};
use crate::jet::{Generator, JetSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("term of degree {degree} in the small parameter exceeds order {order}: {term}")]
    DegreeOverflow { degree: u32, order: u32, term: String },
    #[error("non-polynomial dependence on the small parameter: {0}")]
    NonPolynomial(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Coefficients `[e_0, ..., e_p]` of an expression in powers of ε.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedExpr {
    pub coeffs: Vec<Expr>,
}

impl GradedExpr {
    pub fn zero(p: u32) -> Self {
        GradedExpr {
            coeffs: vec![Expr::zero(); p as usize + 1],
        }
    }

    /// Σ ε^k e_k.
    pub fn reassemble(&self, space: &JetSpace) -> Expr {
        let eps = space.eps();
        Expr::add(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| eps.powi(k as i64) * c)
                .collect(),
        )
    }

    pub fn order(&self, k: usize) -> &Expr {
        &self.coeffs[k]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> GradedExpr {
        GradedExpr {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// Degree of a single term in ε, or `None` if ε occurs non-polynomially.
fn eps_degree(term: &Expr, eps: &Atom) -> Option<(u32, Expr)> {
    let (c, fs) = term.coeff_and_factors();
    let mut deg = 0u32;
    let mut rest = Vec::with_capacity(fs.len() + 1);
    rest.push(Expr::num(c));
    for f in fs {
        let (b, e) = f.base_exp();
        if b.as_atom() == Some(eps) {
            if !e.is_integer() || e.is_negative() {
                return None;
            }
            deg += e.to_integer().to_u32()?;
        } else if f.contains_atom(eps) {
            return None;
        } else {
            rest.push(f);
        }
    }
    Some((deg, Expr::mul(rest)))
}

/// Drops every term of degree above p in ε. Terms with non-polynomial
/// ε-dependence are kept.
pub fn truncate(e: &Expr, space: &JetSpace) -> Expr {
    let eps = space.eps_atom();
    if !e.contains_atom(&eps) {
        return e.clone();
    }
    Expr::add(
        e.terms()
            .into_iter()
            .filter(|t| match eps_degree(t, &eps) {
                Some((d, _)) => d <= space.order,
                None => true,
            })
            .collect(),
    )
}

/// Splits `e` into its coefficients of ε^0 .. ε^p.
pub fn grade(e: &Expr, space: &JetSpace) -> Result<GradedExpr, ApproxError> {
    let eps = space.eps_atom();
    let p = space.order;
    let mut buckets: Vec<Vec<Expr>> = vec![Vec::new(); p as usize + 1];
    for t in e.terms() {
        let (d, rest) =
            eps_degree(&t, &eps).ok_or_else(|| ApproxError::NonPolynomial(t.to_string()))?;
        if d > p {
            return Err(ApproxError::DegreeOverflow {
                degree: d,
                order: p,
                term: t.to_string(),
            });
        }
        buckets[d as usize].push(rest);
    }
    Ok(GradedExpr {
        coeffs: buckets.into_iter().map(Expr::add).collect(),
    })
}

/// Replaces every un-expanded dependent coordinate u_σ by Σ_k ε^k u_(k)σ and
/// truncates past ε^p.
pub fn expand_dependent(e: &Expr, space: &JetSpace) -> Expr {
    let mut b = Bindings::new();
    for c in e.jet_coords() {
        if c.order.is_none() {
            if let Some(a) = space.dep_index(&c.dep) {
                b.atoms
                    .insert(Atom::Jet(c.clone()), space.expanded_coord(a, &c.sigma));
            }
        }
    }
    truncate(&b.apply(e), space)
}

/// Splits a function name into a family stem and a trailing order index.
fn seed_index(n: &str) -> Option<(&str, u32)> {
    let stem = n.trim_end_matches(|c: char| c.is_ascii_digit());
    if stem.len() == n.len() || stem.is_empty() {
        return None;
    }
    n[stem.len()..].parse().ok().map(|k| (stem, k))
}

/// The recursion operator R: R[u_(k)] = (k+1) u_(k+1); a seed function
/// `f<k>` (name ending in its order index) maps to `f<k+1>` plus chain-rule
/// terms through its arguments. Functions without an index are constant.
pub struct Recursion;

impl Derivation for Recursion {
    fn atom(&self, a: &Atom) -> Expr {
        match a {
            Atom::Jet(JetCoord {
                dep,
                order: Some(k),
                sigma,
            }) => Expr::int(*k as i64 + 1)
                * Expr::jet(JetCoord {
                    dep: dep.clone(),
                    order: Some(k + 1),
                    sigma: sigma.clone(),
                }),
            _ => Expr::zero(),
        }
    }

    fn func_extra(&self, f: &FuncApp) -> Expr {
        match seed_index(&f.name) {
            Some((stem, k)) => Expr::func(FuncApp {
                name: name(&format!("{stem}{}", k + 1)),
                derivs: f.derivs.clone(),
                args: f.args.clone(),
            }),
            None => Expr::zero(),
        }
    }
}

/// R applied to `f`.
pub fn recursion_apply(f: &Expr) -> Result<Expr, ExprError> {
    apply_derivation(&Recursion, f)
}

fn placeholder(component: &str, k: usize) -> String {
    format!("%{component}%{k}")
}

/// Populates the lifted components: ξ̃_(0) = ξ_(0) and
/// ξ̃_(k+1) = R[ξ̃_(k)] / (k+1), with R shifting each seed to the next order.
pub fn lift_generator(g: &Generator, space: &JetSpace) -> Result<Generator, ExprError> {
    let mut params: Vec<Atom> = space.indep.iter().map(|v| Atom::Indep(v.clone())).collect();
    params.extend(
        space
            .deps
            .iter()
            .map(|d| Atom::Jet(JetCoord::plain(d, Some(0)))),
    );
    let args: Vec<Expr> = params.iter().cloned().map(Expr::atom).collect();

    let lift = |label: String, seeds: &[Expr]| -> Result<Vec<Expr>, ExprError> {
        if seeds.iter().all(Expr::is_zero_atom) {
            return Ok(vec![Expr::zero(); seeds.len()]);
        }
        let mut b = Bindings::new();
        for (k, s) in seeds.iter().enumerate() {
            b.funcs.insert(
                name(&placeholder(&label, k)),
                FuncBinding::new(params.clone(), s.clone()),
            );
        }
        let mut cur = Expr::apply(&placeholder(&label, 0), args.clone());
        let mut out = vec![b.apply(&cur)];
        for k in 0..seeds.len().saturating_sub(1) {
            cur = recursion_apply(&cur)? * Expr::rational(1, k as i64 + 1);
            out.push(b.apply(&cur));
        }
        Ok(out)
    };

    let mut h = g.clone();
    let mut xt = Vec::new();
    for (i, seeds) in g.xi.iter().enumerate() {
        xt.push(lift(format!("xi:{}", space.indep[i]), seeds)?);
    }
    let mut et = Vec::new();
    for (a, seeds) in g.eta.iter().enumerate() {
        et.push(lift(format!("eta:{}", space.deps[a]), seeds)?);
    }
    h.xi_tilde = Some(xt);
    h.eta_tilde = Some(et);
    Ok(h)
}
