use std::num::NonZeroU32;

use highs::{HighsModelStatus, RowProblem, Sense};

use super::{LpConfig, LpModel, LpSolution, LpSolver, LpStatus, Relation};
use crate::error::{Error, Result};

/// The HiGHS dual simplex, run single-threaded so repeated solves return
/// the same vertex.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsSimplex;

impl LpSolver for HighsSimplex {
    fn solve_model(&self, model: &LpModel, config: &LpConfig) -> Result<LpSolution> {
        if model.num_vars() == 0 {
            // HiGHS reports an empty model instead of solving it
            let feasible = model.constraints.iter().all(|c| c.violation(&[]) <= config.tolerance);
            let status = if feasible { LpStatus::Optimal } else { LpStatus::Infeasible };
            return Ok(LpSolution {
                status,
                objective: if feasible { model.objective_offset } else { f64::NAN },
                values: Vec::new(),
            });
        }
        let mut pb = RowProblem::new();
        let cols: Vec<_> = (0..model.num_vars())
            .map(|j| pb.add_column(model.objective[j], model.lower[j]..=model.upper[j]))
            .collect();
        for c in &model.constraints {
            let row: Vec<_> = c.coeffs.iter().map(|&(j, a)| (cols[j], a)).collect();
            match c.relation {
                Relation::Le => pb.add_row(..=c.rhs, row),
                Relation::Ge => pb.add_row(c.rhs.., row),
                Relation::Eq => pb.add_row(c.rhs..=c.rhs, row),
            }
        }
        let mut m = pb.optimise(Sense::Minimise);
        m.make_quiet();
        m.set_threads(NonZeroU32::MIN);
        m.set_option("solver", "simplex");
        m.set_option("primal_feasibility_tolerance", config.tolerance);
        m.set_option("dual_feasibility_tolerance", config.tolerance);
        let solved = m
            .try_solve()
            .map_err(|s| Error::SolverFailure(format!("HiGHS failed with {s:?}")))?;
        match solved.status() {
            HighsModelStatus::Optimal => {
                let values = solved.get_solution().columns().to_vec();
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    objective: model.objective_value(&values),
                    values,
                })
            }
            HighsModelStatus::Infeasible => {
                Ok(LpSolution::without_point(LpStatus::Infeasible, model.num_vars()))
            }
            HighsModelStatus::Unbounded => {
                Ok(LpSolution::without_point(LpStatus::Unbounded, model.num_vars()))
            }
            HighsModelStatus::UnboundedOrInfeasible => {
                // decide with a zero objective: feasible means unbounded
                let mut probe = model.clone();
                probe.objective.iter_mut().for_each(|c| *c = 0.0);
                let status = match self.solve_model(&probe, config)?.status {
                    LpStatus::Optimal => LpStatus::Unbounded,
                    _ => LpStatus::Infeasible,
                };
                Ok(LpSolution::without_point(status, model.num_vars()))
            }
            other => Err(Error::SolverFailure(format!("HiGHS stopped with {other:?}"))),
        }
    }
}
