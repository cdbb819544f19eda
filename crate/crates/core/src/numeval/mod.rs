//! Floating-point evaluation of symbolic expressions.

mod grid;
mod special;

use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::expr::{Atom, Constant, Expr, FuncApp, Kernel, Node};

pub use grid::{grid_emit, grid_values, write_csv, write_svg, GridAxis, GridSpec, GridTable};
pub use special::{erfi, hyp2f1, hyp2f1_pfaff_b, hyp2f1_series, SpecialError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FailurePolicy {
    #[default]
    Error,
    /// Grid emission records NaN for the failing point and continues.
    SkipSample,
}

#[derive(Clone, Debug, Default)]
pub struct EvalContext {
    pub atoms: HashMap<Atom, f64>,
    /// When set, unknown-function applications evaluate to a pseudo-random
    /// value in (0.5, 2) determined by this seed and the printed application.
    pub func_seed: Option<u64>,
    pub policy: FailurePolicy,
}

impl EvalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, a: Atom, v: f64) {
        self.atoms.insert(a, v);
    }

    pub fn with(mut self, a: Atom, v: f64) -> Self {
        self.bind(a, v);
        self
    }

    pub fn get(&self, a: &Atom) -> Option<f64> {
        self.atoms.get(a).copied()
    }
}

pub fn eval(e: &Expr, ctx: &EvalContext) -> Result<f64, EvalError> {
    eval_tracked(e, ctx).map(|(v, _)| v)
}

/// Value of `e` together with the largest magnitude of any intermediate term
/// or factor, the scale against which cancellation is judged.
pub fn eval_tracked(e: &Expr, ctx: &EvalContext) -> Result<(f64, f64), EvalError> {
    let mut ev = Evaluator {
        ctx,
        memo: HashMap::new(),
        max_mag: 0.0,
    };
    let v = ev.eval(e)?;
    Ok((v, ev.max_mag.max(v.abs())))
}

struct Evaluator<'a> {
    ctx: &'a EvalContext,
    memo: HashMap<Expr, f64>,
    max_mag: f64,
}

impl Evaluator<'_> {
    fn eval(&mut self, e: &Expr) -> Result<f64, EvalError> {
        if let Some(v) = self.memo.get(e) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Num(q) => q.to_f64().unwrap_or(f64::NAN),
            Node::Atom(Atom::Const(Constant::Pi)) => std::f64::consts::PI,
            Node::Atom(a) => self
                .ctx
                .get(a)
                .ok_or_else(|| EvalError::Unbound(a.to_string()))?,
            Node::Func(f) => self.func(f, e)?,
            Node::Pow(b, q) => {
                let bv = self.eval(b)?;
                let qf = q.to_f64().unwrap_or(f64::NAN);
                if q.is_integer() {
                    if bv == 0.0 && qf < 0.0 {
                        return Err(EvalError::Domain(format!("division by zero in {e}")));
                    }
                    bv.powi(qf as i32)
                } else {
                    if bv < 0.0 || (bv == 0.0 && qf < 0.0) {
                        return Err(EvalError::Domain(format!("{bv}^{q} in {e}")));
                    }
                    bv.powf(qf)
                }
            }
            Node::Kernel(k, args) => {
                let mut a = Vec::with_capacity(args.len());
                for x in args {
                    a.push(self.eval(x)?);
                }
                kernel_value(*k, &a)?
            }
            Node::Mul(c, fs) => {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for f in fs {
                    v *= self.eval(f)?;
                }
                v
            }
            Node::Add(ts) => {
                let mut s = 0.0;
                for t in ts {
                    let tv = self.eval(t)?;
                    self.max_mag = self.max_mag.max(tv.abs());
                    s += tv;
                }
                s
            }
        };
        if !v.is_finite() {
            return Err(EvalError::Domain(format!("non-finite value of {e}")));
        }
        self.memo.insert(e.clone(), v);
        Ok(v)
    }

    fn func(&mut self, f: &FuncApp, e: &Expr) -> Result<f64, EvalError> {
        let Some(seed) = self.ctx.func_seed else {
            return Err(EvalError::Unbound(format!("{}", f.name)));
        };
        // Arguments are still evaluated so that domain errors surface.
        for a in &f.args {
            self.eval(a)?;
        }
        let h = fnv1a(e.to_string().as_bytes()) ^ seed.rotate_left(17);
        let u = (splitmix(h) >> 11) as f64 / (1u64 << 53) as f64;
        Ok(0.5 + 1.5 * u)
    }
}

fn kernel_value(k: Kernel, a: &[f64]) -> Result<f64, EvalError> {
    Ok(match k {
        Kernel::Exp => a[0].exp(),
        Kernel::Log => {
            if a[0] <= 0.0 {
                return Err(EvalError::Domain(format!("log({})", a[0])));
            }
            a[0].ln()
        }
        Kernel::Sin => a[0].sin(),
        Kernel::Cos => a[0].cos(),
        Kernel::Erfi => erfi(a[0])?,
        Kernel::Hyp2f1 => hyp2f1(a[0], a[1], a[2], a[3])?,
    })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
