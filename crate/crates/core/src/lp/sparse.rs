use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{LpConfig, LpModel, LpSolution, LpSolver, LpStatus, Relation};
use crate::error::{Error, Result};

/// Sparse revised simplex backed by `microlp`.
///
/// `microlp` has no pivot limit, so [`LpConfig::max_iterations`] does not
/// apply here.
#[derive(Debug, Clone, Copy, Default)]
pub struct SparseSimplex;

impl LpSolver for SparseSimplex {
    fn solve_model(&self, model: &LpModel, config: &LpConfig) -> Result<LpSolution> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        // fixed variables are folded into right-hand sides
        let fixed: Vec<Option<f64>> = (0..model.num_vars())
            .map(|j| (model.lower[j] == model.upper[j]).then_some(model.lower[j]))
            .collect();
        let vars: Vec<_> = (0..model.num_vars())
            .map(|j| match fixed[j] {
                Some(_) => None,
                None => Some(problem.add_var(model.objective[j], (model.lower[j], model.upper[j]))),
            })
            .collect();
        for c in &model.constraints {
            let op = match c.relation {
                Relation::Le => ComparisonOp::Le,
                Relation::Eq => ComparisonOp::Eq,
                Relation::Ge => ComparisonOp::Ge,
            };
            let mut merged = c.coeffs.clone();
            merged.sort_unstable_by_key(|&(j, _)| j);
            merged.dedup_by(|later, kept| {
                if later.0 == kept.0 {
                    kept.1 += later.1;
                    true
                } else {
                    false
                }
            });
            let mut rhs = c.rhs;
            let mut terms = Vec::with_capacity(merged.len());
            for &(j, a) in &merged {
                match (vars[j], fixed[j]) {
                    (Some(v), _) => terms.push((v, a)),
                    (None, Some(x)) => rhs -= a * x,
                    (None, None) => unreachable!(),
                }
            }
            if terms.is_empty() {
                let slack = config.tolerance * rhs.abs().max(1.0);
                let ok = match c.relation {
                    Relation::Le => rhs >= -slack,
                    Relation::Ge => rhs <= slack,
                    Relation::Eq => rhs.abs() <= slack,
                };
                if !ok {
                    return Ok(LpSolution::without_point(LpStatus::Infeasible, model.num_vars()));
                }
                continue;
            }
            problem.add_constraint(terms.as_slice(), op, rhs);
        }
        match problem.solve() {
            Ok(outcome) => {
                let solution = outcome
                    .into_solution()
                    .map_err(|_| Error::SolverFailure("sparse simplex was interrupted".into()))?;
                let values: Vec<f64> = vars
                    .iter()
                    .zip(&fixed)
                    .map(|(v, f)| match (v, f) {
                        (Some(v), _) => solution.var_value(*v),
                        (None, f) => f.unwrap_or(0.0),
                    })
                    .collect();
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    objective: model.objective_value(&values),
                    values,
                })
            }
            Err(microlp::Error::Infeasible) => {
                Ok(LpSolution::without_point(LpStatus::Infeasible, model.num_vars()))
            }
            Err(microlp::Error::Unbounded) => {
                Ok(LpSolution::without_point(LpStatus::Unbounded, model.num_vars()))
            }
            Err(other) => Err(Error::SolverFailure(other.to_string())),
        }
    }
}
