use std::collections::HashMap;

use super::key::PartitionKey;
use super::valuation::SaValuation;
use crate::error::{invalid, Error, Result};
use crate::instance::SignedGraph;
use crate::lp::{solve_with, LpConfig, LpModel, LpStatus, Relation};
use crate::partitions::{bell, binomial, labels_to_blocks, subsets_of_size, RestrictedGrowth};

/// Size guards for the Sherali-Adams builder.
#[derive(Debug, Clone, PartialEq)]
pub struct SaOptions {
    pub max_rounds: usize,
    /// Largest admissible number of partition keys (LP columns).
    pub variable_budget: u128,
}

impl Default for SaOptions {
    fn default() -> Self {
        Self { max_rounds: 6, variable_budget: 250_000 }
    }
}

/// Number of partition keys of size at most `r` over `n` vertices, the
/// empty key included.
pub fn sa_variable_count(n: usize, r: usize) -> u128 {
    (0..=r.min(n))
        .map(|s| binomial(n, s) * bell(s) as u128)
        .sum()
}

/// An `r`-round Sherali-Adams model with its key/column bijection.
#[derive(Debug, Clone)]
pub struct SaModel {
    pub rounds: usize,
    pub n: usize,
    pub model: LpModel,
    pub keys: Vec<PartitionKey>,
    pub index: HashMap<PartitionKey, usize>,
}

impl SaModel {
    pub fn column(&self, key: &PartitionKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Column values for a valuation (missing keys read as 0).
    pub fn point(&self, y: &SaValuation) -> Vec<f64> {
        self.keys.iter().map(|k| y.raw(k)).collect()
    }

    pub fn valuation(&self, values: &[f64]) -> Result<SaValuation> {
        let map = self.keys.iter().cloned().zip(values.iter().copied()).collect();
        SaValuation::new(self.n, self.rounds, map)
    }
}

/// Builds the `r`-round relaxation of `g`.
///
/// Columns: one per partition key of at most `r` vertices, `y_∅` and the
/// singletons fixed to 1 and the rest nonnegative. Rows: for every nonempty
/// key `K` with `|K| < r` and
/// every vertex `v` outside it, `y_K = Σ y_{K'}` over the extensions of `K`
/// by `v`. Objective: `Σ_{+} (1 - y_uv) + Σ_{-} y_uv`.
///
/// The hierarchy lifts the metric LP. From three rounds on the triangle
/// inequalities follow from the local distributions on triples; at two
/// rounds they are added explicitly as `y_uw + y_wv - y_uv <= 1`.
pub fn build_sa(g: &SignedGraph, r: usize, opts: &SaOptions) -> Result<SaModel> {
    let n = g.n();
    if r < 2 {
        return Err(invalid(format!("Sherali-Adams needs at least 2 rounds, got {r}")));
    }
    if r > n {
        return Err(invalid(format!("{r} rounds exceed the {n} vertices")));
    }
    if r > opts.max_rounds {
        return Err(Error::ResourceLimit(format!(
            "{r} rounds exceed the limit of {}",
            opts.max_rounds
        )));
    }
    let count = sa_variable_count(n, r);
    if count > opts.variable_budget {
        return Err(Error::ResourceLimit(format!(
            "n = {n}, r = {r} needs {count} variables, budget is {}",
            opts.variable_budget
        )));
    }

    let mut model = LpModel::new();
    let mut keys = Vec::with_capacity(count as usize);
    let mut index = HashMap::with_capacity(count as usize);
    let all: Vec<usize> = (0..n).collect();
    for size in 0..=r {
        for subset in subsets_of_size(&all, size) {
            let mut rg = RestrictedGrowth::new(size);
            while rg.advance() {
                let key = PartitionKey::from_canonical(labels_to_blocks(&subset, rg.labels()));
                let col = if size <= 1 {
                    // y_∅ = 1 and, through its extensions, y_v = 1
                    model.add_var(0.0, 1.0, 1.0)
                } else if size == 2 && key.blocks().len() == 1 {
                    let (u, v) = (subset[0], subset[1]);
                    model.add_var(if g.is_plus(u, v) { -1.0 } else { 1.0 }, 0.0, f64::INFINITY)
                } else {
                    model.add_var(0.0, 0.0, f64::INFINITY)
                };
                index.insert(key.clone(), col);
                keys.push(key);
            }
        }
    }
    model.objective_offset = g.plus_count() as f64;

    for (col, key) in keys.iter().enumerate() {
        if key.is_empty() || key.size() >= r {
            continue;
        }
        for v in 0..n {
            if key.contains(v) {
                continue;
            }
            let mut row = vec![(col, 1.0)];
            for ext in key.extensions(v) {
                row.push((index[&ext], -1.0));
            }
            model.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    if r == 2 {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let ab = index[&PartitionKey::together(a, b)];
                    let ac = index[&PartitionKey::together(a, c)];
                    let bc = index[&PartitionKey::together(b, c)];
                    for (long, s1, s2) in [(ab, ac, bc), (ac, ab, bc), (bc, ab, ac)] {
                        model.add_constraint(
                            vec![(long, -1.0), (s1, 1.0), (s2, 1.0)],
                            Relation::Le,
                            1.0,
                        );
                    }
                }
            }
        }
    }
    Ok(SaModel { rounds: r, n, model, keys, index })
}

/// Optimal value and valuation of a Sherali-Adams relaxation.
#[derive(Debug, Clone)]
pub struct SaSolution {
    pub value: f64,
    pub valuation: SaValuation,
    pub variables: usize,
    pub constraints: usize,
}

pub fn solve_sa(g: &SignedGraph, r: usize, opts: &SaOptions, config: &LpConfig) -> Result<SaSolution> {
    let sa = build_sa(g, r, opts)?;
    let sol = solve_with(&sa.model, config)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "Sherali-Adams LP reported {:?}",
            sol.status
        )));
    }
    Ok(SaSolution {
        value: sol.objective,
        valuation: sa.valuation(&sol.values)?,
        variables: sa.model.num_vars(),
        constraints: sa.model.num_constraints(),
    })
}
