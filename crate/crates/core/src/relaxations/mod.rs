//! Standard metric LP and Sherali-Adams relaxations over set partitions.
//!
//! The standard LP assigns a distance `x_uv ∈ [0, 1]` to every pair subject
//! to the triangle inequality. The `r`-round Sherali-Adams relaxation has
//! one variable `y_K` per partition `K` of a vertex set of size at most `r`,
//! read as the probability that the clustering induces `K` on its support.
//! Consistency rows tie each key to its one-vertex extensions, which makes
//! the values on any set of at most `r` vertices a probability
//! distribution over its partitions. Distances are `x_uv = 1 - y_{uv}`.

mod key;
mod sherali_adams;
mod standard;
mod valuation;

pub use key::PartitionKey;
pub use sherali_adams::{build_sa, sa_variable_count, solve_sa, SaModel, SaOptions, SaSolution};
pub use standard::{build_standard_lp, solve_standard_lp, StandardLpSolution};
pub use valuation::{Distances, LocalDistribution, SaValuation};

use serde::{Deserialize, Serialize};

/// Rounding threshold used throughout: short edges have `x <= 0.1`.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Length class of a pair relative to `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    /// `x <= δ`
    Short,
    /// `δ < x < 1 - δ`
    Medium,
    /// `x >= 1 - δ`
    Long,
}

impl EdgeClass {
    pub fn of(x: f64, delta: f64) -> Self {
        if x <= delta {
            EdgeClass::Short
        } else if x >= 1.0 - delta {
            EdgeClass::Long
        } else {
            EdgeClass::Medium
        }
    }
}

/// A fractional solution the rounding algorithms can read distances from.
#[derive(Debug, Clone, Copy)]
pub enum Fractional<'a> {
    Metric(&'a Distances),
    Lifted(&'a SaValuation),
}

impl Fractional<'_> {
    pub fn n(&self) -> usize {
        match self {
            Fractional::Metric(d) => d.n(),
            Fractional::Lifted(y) => y.n(),
        }
    }

    /// Distance clamped to `[0, 1]`.
    pub fn x(&self, u: usize, v: usize) -> f64 {
        match self {
            Fractional::Metric(d) => d.get(u, v).clamp(0.0, 1.0),
            Fractional::Lifted(y) => y.x(u, v),
        }
    }

    pub fn valuation(&self) -> Option<&SaValuation> {
        match self {
            Fractional::Lifted(y) => Some(y),
            Fractional::Metric(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_at_boundaries() {
        assert_eq!(EdgeClass::of(0.1, 0.1), EdgeClass::Short);
        assert_eq!(EdgeClass::of(0.9, 0.1), EdgeClass::Long);
        assert_eq!(EdgeClass::of(0.5, 0.1), EdgeClass::Medium);
        assert_eq!(EdgeClass::of(0.1000001, 0.1), EdgeClass::Medium);
    }
}
