//! Linear programs: a small modelling layer, a dense two-phase simplex, and
//! the relaxed joint scheduling program.

mod joint;
mod simplex;

use std::fmt::Write as _;

pub use joint::{build_joint_lp, build_joint_lp_with, JointLayout, JointLp, LpSolution};
pub use simplex::{solve, SimplexOptions};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// `sum coeffs[k].1 * x[coeffs[k].0]  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize c'x` subject to row constraints and `0 <= x_j <= upper_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub upper: Vec<Option<f64>>,
    pub names: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with objective coefficient `cost`; returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, upper: Option<f64>) -> usize {
        self.objective.push(cost);
        self.upper.push(upper);
        self.names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(-v);
            if let Some(u) = self.upper[j] {
                worst = worst.max(v - u);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let bad = self.objective.iter().any(|c| !c.is_finite())
            || self
                .constraints
                .iter()
                .any(|c| !c.rhs.is_finite() || c.coeffs.iter().any(|(_, a)| !a.is_finite()));
        if bad {
            return Err(Error::NumericalFailure("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Row/column listing in CPLEX-like LP text, for cross-checking with
    /// external solvers.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::from("Maximize\n obj:");
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(out, " {:+} {}", c, self.names[j]);
            }
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            for &(j, a) in &c.coeffs {
                let _ = write!(out, " {:+} {}", a, self.names[j]);
            }
            let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
        }
        out.push_str("Bounds\n");
        for (j, u) in self.upper.iter().enumerate() {
            match u {
                Some(u) => {
                    let _ = writeln!(out, " 0 <= {} <= {}", self.names[j], u);
                }
                None => {
                    let _ = writeln!(out, " {} >= 0", self.names[j]);
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
}

/// Optimal primal/dual pair with its optimality certificate.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per row constraint (upper-bound rows excluded).
    pub duals: Vec<f64>,
    /// Largest positive reduced cost at termination.
    pub max_reduced_cost: f64,
    /// `|b'y - c'x|` recomputed from the original data.
    pub duality_gap: f64,
    /// Largest violation of dual feasibility recomputed from the original data.
    pub dual_violation: f64,
    pub primal_violation: f64,
    pub iterations: usize,
}
