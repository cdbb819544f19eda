//! The `.apx` problem language: declarations, equations, case constraints,
//! generator ansätze, solution representations and closed-form candidates.
//!
//! See `docs/dsl.md` for the grammar.

mod lexer;
mod parser;
mod print;

use crate::expr::{Atom, Bindings, Expr, Name, Q};
use crate::jet::JetSpace;

pub use parser::{parse_expr, parse_problem};
pub use print::print_problem;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: found {found}, expected {}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("{line}:{col}: undeclared symbol `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: usize, col: usize, msg: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. }
            | ParseError::Undeclared { line, col, .. }
            | ParseError::Invalid { line, col, .. } => (*line, *col),
        }
    }
}

/// `lhs = rhs`, both canonical.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    pub fn residual(&self) -> Expr {
        &self.lhs - &self.rhs
    }
}

/// Parameter relation; `solve` names the parameter it is eliminated for.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub eq: Equation,
    pub solve: Option<Name>,
}

/// Sampling guard: `require e > 0` or `exclude e` (meaning e != 0).
#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    Positive(Expr),
    NonZero(Expr),
}

/// Open interval used both for random sampling and for grid emission.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub var: Name,
    pub lo: Q,
    pub hi: Q,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Restrictions {
    pub guards: Vec<Guard>,
    pub domains: Vec<Domain>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub name: String,
    pub constraints: Vec<Constraint>,
    pub restrictions: Restrictions,
}

/// Local definition; the name is a parameter atom within its block.
#[derive(Clone, Debug, PartialEq)]
pub struct Let {
    pub name: Name,
    pub value: Expr,
}

/// Generator seed components `xi[var,k]` and `eta[dep,k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorDef {
    pub name: String,
    pub case: Option<String>,
    pub lets: Vec<Let>,
    pub xi: Vec<(Name, u32, Expr)>,
    pub eta: Vec<(Name, u32, Expr)>,
    pub restrictions: Restrictions,
}

/// Invariant-solution representation of a generator: `u0 = ...; u1 = ...;`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationDef {
    pub name: String,
    pub generator: String,
    pub lets: Vec<Let>,
    pub parts: Vec<(Name, u32, Expr)>,
}

/// Named numeric parameter set; values may refer to earlier entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueSet {
    pub name: String,
    pub values: Vec<(Name, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionDef {
    pub name: String,
    pub case: Option<String>,
    pub lets: Vec<Let>,
    pub parts: Vec<(Name, u32, Expr)>,
    pub restrictions: Restrictions,
    pub value_sets: Vec<ValueSet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub indep: Vec<Name>,
    pub deps: Vec<Name>,
    pub small: Name,
    pub order: u32,
    pub params: Vec<Name>,
    pub funcs: Vec<Name>,
    pub equations: Vec<Equation>,
    pub constraints: Vec<Constraint>,
    pub restrictions: Restrictions,
    pub cases: Vec<Case>,
    pub generators: Vec<GeneratorDef>,
    pub representations: Vec<RepresentationDef>,
    pub solutions: Vec<SolutionDef>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            indep: Vec::new(),
            deps: Vec::new(),
            small: crate::expr::name("eps"),
            order: 1,
            params: Vec::new(),
            funcs: Vec::new(),
            equations: Vec::new(),
            constraints: Vec::new(),
            restrictions: Restrictions::default(),
            cases: Vec::new(),
            generators: Vec::new(),
            representations: Vec::new(),
            solutions: Vec::new(),
        }
    }
}

impl ProblemSpec {
    pub fn space(&self) -> JetSpace {
        JetSpace {
            indep: self.indep.clone(),
            deps: self.deps.clone(),
            small: self.small.clone(),
            order: self.order,
        }
    }

    /// Highest derivative order over all equations.
    pub fn equation_order(&self) -> u32 {
        self.equations
            .iter()
            .flat_map(|e| e.residual().jet_coords())
            .map(|c| c.sigma.order())
            .max()
            .unwrap_or(0)
    }

    pub fn case(&self, name: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub fn generator(&self, name: &str) -> Option<&GeneratorDef> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn representation(&self, name: &str) -> Option<&RepresentationDef> {
        self.representations.iter().find(|r| r.name == name)
    }

    pub fn solution(&self, name: &str) -> Option<&SolutionDef> {
        self.solutions.iter().find(|s| s.name == name)
    }
}

/// Bindings that replace each `let` name by its fully expanded value.
pub fn let_bindings(lets: &[Let]) -> Bindings {
    let mut b = Bindings::new();
    for l in lets {
        let v = b.apply(&l.value);
        b.atoms.insert(Atom::Param(l.name.clone()), v);
    }
    b
}
