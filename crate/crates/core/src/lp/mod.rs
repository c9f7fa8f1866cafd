//! Small dense linear programs and a bounded-variable primal simplex.

mod simplex;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use simplex::solve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// `lower <= sum(coeff * x) <= upper`; equality rows have `lower == upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn is_equality(&self) -> bool {
        self.lower == self.upper
    }
}

/// Minimise `objective . x + objective_offset` subject to the rows and bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.variables.push(Variable { name: name.into(), lower, upper });
        self.objective.push(cost);
        self.variables.len() - 1
    }

    pub fn add_range(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, lower: f64, upper: f64) -> usize {
        self.constraints.push(Constraint { name: name.into(), coeffs, lower, upper });
        self.constraints.len() - 1
    }

    pub fn add_eq(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.add_range(name, coeffs, rhs, rhs)
    }

    pub fn add_le(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.add_range(name, coeffs, f64::NEG_INFINITY, rhs)
    }

    pub fn add_ge(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.add_range(name, coeffs, rhs, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.objective.len() != self.variables.len() {
            return Err("objective length differs from variable count".into());
        }
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(format!("variable {} has bounds [{}, {}]", v.name, v.lower, v.upper));
            }
        }
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite()) {
            return Err(format!("objective coefficient {c}"));
        }
        for row in &self.constraints {
            if row.lower.is_nan() || row.upper.is_nan() || row.lower > row.upper {
                return Err(format!("row {} has range [{}, {}]", row.name, row.lower, row.upper));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.variables.len() {
                    return Err(format!("row {} references undeclared variable {j}", row.name));
                }
                if !a.is_finite() {
                    return Err(format!("row {} has coefficient {a}", row.name));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Largest bound or row violation of `x`, in the units of the row.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (v, &xi) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        for row in &self.constraints {
            let a = row.activity(x);
            worst = worst.max(row.lower - a).max(a - row.upper);
        }
        worst
    }

    /// CPLEX-style LP text, one constraint per line.
    pub fn to_lp_format(&self) -> String {
        fn term(out: &mut String, coeff: f64, name: &str, first: bool) {
            if first {
                let _ = write!(out, " {coeff} {name}");
            } else if coeff < 0.0 {
                let _ = write!(out, " - {} {name}", -coeff);
            } else {
                let _ = write!(out, " + {coeff} {name}");
            }
        }
        let name = |j: usize| self.variables[j].name.as_str();
        let mut out = String::from("Minimize\n obj:");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, c, name(j), first);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        if self.objective_offset != 0.0 {
            let _ = write!(out, "\n\\ constant offset {}", self.objective_offset);
        }
        out.push_str("\nSubject To\n");
        for row in &self.constraints {
            let mut lhs = String::new();
            for (i, &(j, a)) in row.coeffs.iter().enumerate() {
                term(&mut lhs, a, name(j), i == 0);
            }
            if lhs.is_empty() {
                lhs.push_str(" 0");
            }
            if row.is_equality() {
                let _ = writeln!(out, " {}:{lhs} = {}", row.name, row.upper);
            } else {
                if row.lower.is_finite() {
                    let _ = writeln!(out, " {}_lo:{lhs} >= {}", row.name, row.lower);
                }
                if row.upper.is_finite() {
                    let _ = writeln!(out, " {}_hi:{lhs} <= {}", row.name, row.upper);
                }
            }
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
            let hi = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
            let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iters: 50_000, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    pub assignment: Vec<f64>,
    pub iterations: usize,
    /// Rows that could not be satisfied when the status is `Infeasible`.
    pub infeasible_rows: Vec<usize>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
