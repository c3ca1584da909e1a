//! Small linear programs: assembly, solution by the simplex method, and CPLEX LP text dumps.

use crate::{Error, Result};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub values: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { sense, objective: Vec::new(), bounds: Vec::new(), rows: Vec::new() }
    }

    pub fn add_var(&mut self, cost: f64, bounds: (f64, f64)) -> usize {
        self.objective.push(cost);
        self.bounds.push(bounds);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { terms, cmp, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let mut p = Problem::new(match self.sense {
            Sense::Minimize => OptimizationDirection::Minimize,
            Sense::Maximize => OptimizationDirection::Maximize,
        });
        let vars: Vec<_> = self.objective.iter().zip(&self.bounds).map(|(&c, &b)| p.add_var(c, b)).collect();
        for r in &self.rows {
            let terms: Vec<_> = r.terms.iter().map(|&(i, c)| (vars[i], c)).collect();
            let op = match r.cmp {
                Cmp::Le => ComparisonOp::Le,
                Cmp::Ge => ComparisonOp::Ge,
                Cmp::Eq => ComparisonOp::Eq,
            };
            p.add_constraint(terms.as_slice(), op, r.rhs);
        }
        let sol = p
            .solve()
            .map_err(|e| Error::LpFailure(format!("{e:?}")))?
            .into_solution()
            .map_err(|_| Error::LpFailure("solve interrupted".into()))?;
        Ok(LpSolution { objective: sol.objective(), values: vars.iter().map(|&v| sol.var_value(v)).collect() })
    }

    /// Writes the program in CPLEX LP format with variables `x0, x1, …`.
    pub fn write_lp<W: Write>(&self, mut out: W) -> Result<()> {
        let expr = |terms: &mut dyn Iterator<Item = (usize, f64)>| {
            let mut s = String::new();
            for (i, c) in terms {
                if c == 0.0 {
                    continue;
                }
                let sign = if c < 0.0 { "-" } else { "+" };
                s.push_str(&format!(" {sign} {:e} x{i}", c.abs()));
            }
            if s.is_empty() {
                s.push_str(" 0 x0");
            }
            s
        };
        writeln!(out, "{}", if self.sense == Sense::Minimize { "Minimize" } else { "Maximize" })?;
        writeln!(out, " obj:{}", expr(&mut self.objective.iter().copied().enumerate()))?;
        writeln!(out, "Subject To")?;
        for (k, r) in self.rows.iter().enumerate() {
            let op = match r.cmp {
                Cmp::Le => "<=",
                Cmp::Ge => ">=",
                Cmp::Eq => "=",
            };
            writeln!(out, " c{k}:{} {op} {:e}", expr(&mut r.terms.iter().copied()), r.rhs)?;
        }
        writeln!(out, "Bounds")?;
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            let f = |v: f64| if v.is_infinite() { if v > 0.0 { "+inf".to_string() } else { "-inf".to_string() } } else { format!("{v:e}") };
            writeln!(out, " {} <= x{i} <= {}", f(lo), f(hi))?;
        }
        writeln!(out, "End")?;
        Ok(())
    }
}
