//! Small dense linear programs and the fluid LP of an instance.

mod simplex;

use crate::error::Result;
use crate::model::Instance;

/// Pivot tolerance.
pub const PIVOT_TOL: f64 = 1e-9;
/// Tolerance used when reporting feasibility of a solution.
pub const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max objective·x` subject to the constraints and `lo ≤ x ≤ hi`.
/// Lower bounds must be finite; `hi` may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// Nonnegative variables with no upper bounds and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    /// Largest constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution> {
        simplex_solve(self, PIVOT_TOL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn name(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn infeasible(n: usize) -> Self {
        Self {
            status: LpStatus::Infeasible,
            values: vec![0.0; n],
            objective: f64::NEG_INFINITY,
        }
    }
}

/// Primal simplex with Bland's rule; deterministic for a given input.
pub fn simplex_solve(lp: &LinearProgram, tol: f64) -> Result<LpSolution> {
    simplex::solve(lp, tol)
}

/// `max Σ r_j x_j` s.t. `Σ_{j∋i} x_j ≤ k_i` and `0 ≤ x_j ≤ λ_j`, where `λ_j` is
/// the product's active probability.
pub fn fluid_lp(instance: &Instance) -> LinearProgram {
    let n = instance.products().len();
    let mut lp = LinearProgram::new(n);
    lp.objective = instance.products().iter().map(|p| p.reward).collect();
    lp.bounds = instance
        .products()
        .iter()
        .map(|p| (0.0, p.active_prob))
        .collect();
    let mut rows = vec![vec![0.0; n]; instance.items().len()];
    for (j, p) in instance.products().iter().enumerate() {
        for &i in &p.items {
            rows[i][j] = 1.0;
        }
    }
    for (row, item) in rows.into_iter().zip(instance.items()) {
        lp.add_constraint(row, Sense::Le, item.inventory as f64);
    }
    lp
}

/// Optimal fluid-LP value of an instance.
pub fn fluid_value(instance: &Instance) -> Result<f64> {
    Ok(fluid_lp(instance).solve()?.objective)
}
