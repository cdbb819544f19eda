use std::io::{self, Write};

use rayon::prelude::*;

use super::{eval, EvalContext, EvalError, FailurePolicy};
use crate::expr::{Atom, Expr};

/// Uniform axis with `steps` points from `lo` to `hi` inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAxis {
    pub var: Atom,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn new(var: &str, lo: f64, hi: f64, steps: usize) -> Self {
        GridAxis {
            var: Atom::indep(var),
            lo,
            hi,
            steps,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.steps <= 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub t: GridAxis,
    pub x: GridAxis,
}

/// Values on a grid, rows ordered by t then x.
#[derive(Clone, Debug)]
pub struct GridTable {
    pub columns: Vec<String>,
    /// `(t, x, values...)`
    pub rows: Vec<(f64, f64, Vec<f64>)>,
    pub t_steps: usize,
    pub x_steps: usize,
}

impl GridTable {
    /// Column `col` at time index `it`, over x.
    pub fn slice_t(&self, it: usize, col: usize) -> Vec<f64> {
        self.rows[it * self.x_steps..(it + 1) * self.x_steps]
            .iter()
            .map(|r| r.2[col])
            .collect()
    }
}

/// Evaluates each expression over the grid. Rows are computed in parallel
/// and assembled in index order.
pub fn grid_values(
    exprs: &[(String, Expr)],
    grid: &GridSpec,
    ctx: &EvalContext,
) -> Result<GridTable, EvalError> {
    let nt = grid.t.steps;
    let nx = grid.x.steps;
    let rows: Result<Vec<_>, EvalError> = (0..nt * nx)
        .into_par_iter()
        .map(|idx| {
            let (it, ix) = (idx / nx, idx % nx);
            let (t, x) = (grid.t.point(it), grid.x.point(ix));
            let mut c = ctx.clone();
            c.bind(grid.t.var.clone(), t);
            c.bind(grid.x.var.clone(), x);
            let mut vals = Vec::with_capacity(exprs.len());
            for (_, e) in exprs {
                match eval(e, &c) {
                    Ok(v) => vals.push(v),
                    Err(_) if ctx.policy == FailurePolicy::SkipSample => vals.push(f64::NAN),
                    Err(err) => return Err(err),
                }
            }
            Ok((t, x, vals))
        })
        .collect();
    Ok(GridTable {
        columns: exprs.iter().map(|(n, _)| n.clone()).collect(),
        rows: rows?,
        t_steps: nt,
        x_steps: nx,
    })
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes a table as CSV with header `t,x,<columns>`.
pub fn write_csv<W: Write>(w: &mut W, table: &GridTable) -> io::Result<()> {
    write!(w, "t,x")?;
    for c in &table.columns {
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    for (t, x, vals) in &table.rows {
        write!(w, "{},{}", fmt_num(*t), fmt_num(*x))?;
        for v in vals {
            write!(w, ",{}", fmt_num(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Evaluates and writes in one step.
pub fn grid_emit<W: Write>(
    w: &mut W,
    exprs: &[(String, Expr)],
    grid: &GridSpec,
    ctx: &EvalContext,
) -> Result<GridTable, EvalError> {
    let table = grid_values(exprs, grid, ctx)?;
    write_csv(w, &table).map_err(|e| EvalError::Domain(format!("write failed: {e}")))?;
    Ok(table)
}

/// Heatmap of column `col`: x to the right, t downwards, blue to red.
pub fn write_svg<W: Write>(w: &mut W, table: &GridTable, col: usize) -> io::Result<()> {
    let cell = 6usize;
    let (nt, nx) = (table.t_steps, table.x_steps);
    let vals: Vec<f64> = table.rows.iter().map(|r| r.2[col]).filter(|v| v.is_finite()).collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#,
        nx * cell,
        nt * cell
    )?;
    for (idx, (_, _, v)) in table.rows.iter().enumerate() {
        let (it, ix) = (idx / nx, idx % nx);
        let fill = if v[col].is_finite() {
            let s = (v[col] - lo) / span;
            let r = (255.0 * s).round() as u8;
            let b = (255.0 * (1.0 - s)).round() as u8;
            format!("rgb({r},0,{b})")
        } else {
            "#888".into()
        };
        writeln!(
            w,
            r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="{fill}"/>"#,
            ix * cell,
            it * cell
        )?;
    }
    writeln!(w, "</svg>")
}
