use super::valuation::Distances;
use crate::error::{Error, Result};
use crate::instance::{pair_count, pair_index, SignedGraph};
use crate::lp::{solve_with_row_generation, LpConfig, LpModel, LpStatus, Relation};

/// The metric LP: one distance per pair in `[0, 1]`, all triangle
/// inequalities, objective `Σ_{+} x_uv + Σ_{-} (1 - x_uv)`.
///
/// Column `pair_index(n, u, v)` holds `x_uv`. Rows come in triples per
/// `u < v < w`, one for each side playing the long edge.
pub fn build_standard_lp(g: &SignedGraph) -> LpModel {
    let n = g.n();
    let mut m = LpModel::new();
    for (_, _, s) in g.pairs() {
        m.add_var(if s.is_plus() { 1.0 } else { -1.0 }, 0.0, 1.0);
    }
    m.objective_offset = g.minus_count() as f64;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let ab = pair_index(n, a, b);
                let ac = pair_index(n, a, c);
                let bc = pair_index(n, b, c);
                for (long, s1, s2) in [(ab, ac, bc), (ac, ab, bc), (bc, ab, ac)] {
                    m.add_constraint(vec![(long, 1.0), (s1, -1.0), (s2, -1.0)], Relation::Le, 0.0);
                }
            }
        }
    }
    debug_assert_eq!(m.num_vars(), pair_count(n));
    m
}

/// Optimal value and distances of the standard LP.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLpSolution {
    pub value: f64,
    pub distances: Distances,
}

/// Solves the standard LP by lazily adding violated triangle rows.
pub fn solve_standard_lp(g: &SignedGraph, config: &LpConfig) -> Result<StandardLpSolution> {
    let model = build_standard_lp(g);
    let sol = solve_with_row_generation(&model, &[], config)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "standard LP reported {:?}",
            sol.status
        )));
    }
    let distances = Distances::new(g.n(), sol.values)?;
    Ok(StandardLpSolution { value: sol.objective, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{make_star_gap, Sign};
    use crate::partitions::binomial;

    #[test]
    fn model_shape() {
        let g = make_star_gap(4).unwrap();
        let m = build_standard_lp(&g);
        assert_eq!(m.num_vars(), 10);
        assert_eq!(m.num_constraints() as u128, 3 * binomial(5, 3));
    }

    #[test]
    fn star_gap_values() {
        for k in [2usize, 4, 10] {
            let g = make_star_gap(k).unwrap();
            let s = solve_standard_lp(&g, &LpConfig::default()).unwrap();
            assert!((s.value - k as f64 / 2.0).abs() < 1e-6, "k={k}: {}", s.value);
            assert!(s.distances.max_triangle_violation() < 1e-6);
        }
    }

    #[test]
    fn all_plus_is_free() {
        let g = SignedGraph::complete(4, Sign::Plus).unwrap();
        let s = solve_standard_lp(&g, &LpConfig::default()).unwrap();
        assert!(s.value.abs() < 1e-9);
    }
}
