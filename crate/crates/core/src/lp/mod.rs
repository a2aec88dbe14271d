//! Linear programs in minimization form and the solvers behind them.
//!
//! Backends implementing [`LpSolver`]:
//!
//! * [`DenseSimplex`], a two-phase tableau simplex and the reference
//!   implementation;
//! * [`HighsSimplex`] (feature `highs`, on by default), the HiGHS dual
//!   simplex, used for models whose dense tableau would not fit in memory;
//! * [`SparseSimplex`], `microlp`'s sparse revised simplex, the pure-Rust
//!   choice for large models when HiGHS is not compiled in.
//!
//! Callers normally go through [`solve`] / [`solve_with`], which pick a
//! backend from [`LpConfig::backend`].

mod dense;
#[cfg(feature = "highs")]
mod highs;
mod mps;
mod sparse;

pub use dense::DenseSimplex;
#[cfg(feature = "highs")]
pub use highs::HighsSimplex;
pub use mps::to_mps;
pub use sparse::SparseSimplex;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse row: `(variable, coefficient)`; repeated variables are summed.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min offset + c·x` subject to sparse rows and per-variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    /// Adds a variable with bounds `[lower, upper]` and returns its index.
    /// `upper` may be `f64::INFINITY`; `lower` may be `f64::NEG_INFINITY`.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(invalid("bound vectors do not match the variable count"));
        }
        for (j, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(invalid(format!("variable {j} has bounds [{l}, {u}]")));
            }
            if !self.objective[j].is_finite() {
                return Err(invalid(format!("variable {j} has a non-finite cost")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(invalid(format!("row {i} has a non-finite right-hand side")));
            }
            for &(j, a) in &c.coeffs {
                if j >= n {
                    return Err(invalid(format!("row {i} references undeclared variable {j}")));
                }
                if !a.is_finite() {
                    return Err(invalid(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Largest row or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0, f64::max);
        let bounds = values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&l, &u))| (l - x).max(x - u).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Same variables, only the rows selected by `rows`.
    pub fn with_rows(&self, rows: &[usize]) -> Self {
        Self {
            objective: self.objective.clone(),
            objective_offset: self.objective_offset,
            constraints: rows.iter().map(|&i| self.constraints[i].clone()).collect(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective including the model offset; meaningful only when optimal.
    pub objective: f64,
    pub values: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub(crate) fn without_point(status: LpStatus, n: usize) -> Self {
        Self {
            status,
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::NAN,
            },
            values: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Dense,
    Sparse,
    Highs,
    /// Dense when the tableau stays under [`LpConfig::dense_cell_limit`]
    /// cells, otherwise HiGHS when available, otherwise sparse.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpConfig {
    /// Absolute feasibility and optimality tolerance.
    pub tolerance: f64,
    /// Pivot limit for the dense simplex (both phases combined).
    pub max_iterations: usize,
    pub backend: Backend,
    pub dense_cell_limit: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_iterations: 1_000_000,
            backend: Backend::Auto,
            dense_cell_limit: 250_000,
        }
    }
}

/// A solver backend. Implementations return raw solutions; [`solve_with`]
/// applies bound clamping and recomputes the objective.
pub trait LpSolver {
    fn solve_model(&self, model: &LpModel, config: &LpConfig) -> Result<LpSolution>;
}

pub fn solve(model: &LpModel) -> Result<LpSolution> {
    solve_with(model, &LpConfig::default())
}

pub fn solve_with(model: &LpModel, config: &LpConfig) -> Result<LpSolution> {
    model.validate()?;
    let backend = match config.backend {
        Backend::Auto if DenseSimplex::tableau_cells(model) <= config.dense_cell_limit => {
            Backend::Dense
        }
        Backend::Auto if cfg!(feature = "highs") => Backend::Highs,
        Backend::Auto => Backend::Sparse,
        b => b,
    };
    let mut sol = match backend {
        Backend::Dense => DenseSimplex.solve_model(model, config)?,
        Backend::Sparse => SparseSimplex.solve_model(model, config)?,
        #[cfg(feature = "highs")]
        Backend::Highs => HighsSimplex.solve_model(model, config)?,
        #[cfg(not(feature = "highs"))]
        Backend::Highs => return Err(invalid("built without the `highs` feature")),
        Backend::Auto => unreachable!(),
    };
    if sol.is_optimal() {
        for (x, (&l, &u)) in sol.values.iter_mut().zip(model.lower.iter().zip(&model.upper)) {
            *x = x.clamp(l, u);
        }
        sol.objective = model.objective_value(&sol.values);
    }
    Ok(sol)
}

/// Solves `model` by lazily adding violated rows, starting from `initial`.
///
/// Each round solves the model restricted to the active rows, then appends
/// every inactive row violated by more than the tolerance. The loop stops
/// when no row is violated, at which point the restricted optimum is optimal
/// for the full model. Restricted models must stay bounded (true whenever
/// every variable has finite bounds); an unbounded round falls back to the
/// full model.
pub fn solve_with_row_generation(
    model: &LpModel,
    initial: &[usize],
    config: &LpConfig,
) -> Result<LpSolution> {
    model.validate()?;
    let mut active = vec![false; model.num_constraints()];
    let mut rows: Vec<usize> = Vec::new();
    for &i in initial {
        if i >= active.len() {
            return Err(invalid(format!("initial row {i} out of range")));
        }
        if !active[i] {
            active[i] = true;
            rows.push(i);
        }
    }
    loop {
        let sub = model.with_rows(&rows);
        let sol = solve_with(&sub, config)?;
        match sol.status {
            LpStatus::Infeasible => return Ok(sol),
            LpStatus::Unbounded => return solve_with(model, config),
            LpStatus::Optimal => {}
        }
        let before = rows.len();
        for (i, c) in model.constraints.iter().enumerate() {
            if !active[i] && c.violation(&sol.values) > config.tolerance {
                active[i] = true;
                rows.push(i);
            }
        }
        if rows.len() == before {
            return Ok(sol);
        }
        rows.sort_unstable();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn configs() -> Vec<LpConfig> {
        let mut backends = vec![Backend::Dense, Backend::Sparse];
        if cfg!(feature = "highs") {
            backends.push(Backend::Highs);
        }
        backends
            .into_iter()
            .map(|backend| LpConfig { backend, ..LpConfig::default() })
            .collect()
    }

    #[test]
    fn single_lower_bound_row() {
        for cfg in configs() {
            let mut m = LpModel::new();
            let x = m.add_var(1.0, 0.0, f64::INFINITY);
            m.add_constraint(vec![(x, 1.0)], Relation::Ge, 1.0);
            let s = solve_with(&m, &cfg).unwrap();
            assert_eq!(s.status, LpStatus::Optimal, "{cfg:?}");
            assert!((s.objective - 1.0).abs() < 1e-9);
            assert!((s.values[x] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unbounded_ray() {
        for cfg in configs() {
            let mut m = LpModel::new();
            let x = m.add_var(-1.0, 0.0, f64::INFINITY);
            m.add_constraint(vec![(x, 1.0)], Relation::Ge, 0.0);
            assert_eq!(solve_with(&m, &cfg).unwrap().status, LpStatus::Unbounded, "{cfg:?}");
        }
    }

    #[test]
    fn infeasible_rows() {
        for cfg in configs() {
            let mut m = LpModel::new();
            let x = m.add_var(0.0, 0.0, f64::INFINITY);
            m.add_constraint(vec![(x, 1.0)], Relation::Le, -1.0);
            assert_eq!(solve_with(&m, &cfg).unwrap().status, LpStatus::Infeasible, "{cfg:?}");
        }
    }

    #[test]
    fn malformed_models_are_rejected() {
        let mut m = LpModel::new();
        m.add_var(1.0, 0.0, 1.0);
        m.add_constraint(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve(&m), Err(crate::Error::InvalidArgument(_))));

        let mut m = LpModel::new();
        m.add_var(1.0, 2.0, 1.0);
        assert!(solve(&m).is_err());
    }

    #[test]
    fn offset_and_bounds() {
        for cfg in configs() {
            let mut m = LpModel::new();
            m.objective_offset = 3.0;
            let x = m.add_var(-1.0, -2.0, 5.0);
            let y = m.add_var(2.0, 1.0, f64::INFINITY);
            m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
            let s = solve_with(&m, &cfg).unwrap();
            // x = 3, y = 1 → 3 - 3 + 2
            assert!((s.objective - 2.0).abs() < 1e-9, "{cfg:?} {s:?}");
            assert!((s.values[x] - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn row_generation_matches_full_solve() {
        // min -x - y, x + y <= 1 hidden among redundant rows
        let mut m = LpModel::new();
        let x = m.add_var(-1.0, 0.0, 10.0);
        let y = m.add_var(-1.0, 0.0, 10.0);
        m.add_constraint(vec![(x, 1.0)], Relation::Le, 9.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        m.add_constraint(vec![(y, 1.0)], Relation::Le, 9.0);
        let full = solve(&m).unwrap();
        let lazy = solve_with_row_generation(&m, &[], &LpConfig::default()).unwrap();
        assert!((full.objective - lazy.objective).abs() < 1e-9);
        assert!((lazy.objective + 1.0).abs() < 1e-9);
    }
}
