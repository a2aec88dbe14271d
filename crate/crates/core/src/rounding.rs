//! Pivot-based rounding: KwikCluster, LP-KwikCluster, the CMSY rounding
//! functions and the Sherali-Adams rounding with correlated medium `+`
//! edges.
//!
//! Every variant repeatedly picks a pivot among the remaining vertices, puts
//! each other remaining vertex into the pivot's cluster with some
//! probability, removes the cluster and recurses. The fractional solution is
//! fixed up front and never re-solved.
//!
//! Under [`Variant::SaCorrelated`] the pivot's neighbours get
//!
//! * `-` edge: join with probability `1 - √x`;
//! * short `+` edge (`x <= δ`): `1 - x²/δ`;
//! * long `+` edge (`x >= 1 - δ`): `1 - x`;
//! * medium `+` edge: correlated rounding from a seed (see
//!   [`crate::correlated`]), with marginal `1 - x`.
//!
//! When the fractional input carries only distances (the standard LP), the
//! medium `+` neighbours are rounded independently with probability `1 - x`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correlated::{select_seed, SeedSelection, SeededRounding};
use crate::error::{invalid, Result};
use crate::instance::{Clustering, Sign, SignedGraph};
use crate::relaxations::{EdgeClass, Fractional, DEFAULT_DELTA};

/// Distances this far outside `[0, 1]` are clamped instead of rejected.
pub const CLAMP_WINDOW: f64 = 1e-6;
/// Conditional laws may overshoot by this much before they count as
/// inconsistent.
pub const CONSISTENCY_TOL: f64 = 1e-7;

const CMSY_LOW: f64 = 0.19;
const CMSY_HIGH: f64 = 0.5095;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Kwik,
    LpKwik,
    Cmsy,
    SaCorrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingPolicy {
    pub variant: Variant,
    pub delta: f64,
    /// Rounds available to correlated rounding; `None` uses the rounds of
    /// the valuation.
    pub rounds: Option<usize>,
}

impl RoundingPolicy {
    pub fn new(variant: Variant) -> Self {
        Self { variant, delta: DEFAULT_DELTA, rounds: None }
    }

    pub fn kwik() -> Self {
        Self::new(Variant::Kwik)
    }

    pub fn lp_kwik() -> Self {
        Self::new(Variant::LpKwik)
    }

    pub fn cmsy() -> Self {
        Self::new(Variant::Cmsy)
    }

    pub fn sa_correlated(rounds: usize) -> Self {
        Self { rounds: Some(rounds), ..Self::new(Variant::SaCorrelated) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(invalid(format!("δ must lie in (0, 0.5), got {}", self.delta)));
        }
        if let Some(r) = self.rounds {
            if self.variant == Variant::SaCorrelated && r < 3 {
                return Err(invalid(format!("correlated rounding needs r >= 3, got {r}")));
            }
        }
        Ok(())
    }
}

/// How one non-pivot vertex decides to join.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Join {
    Independent(f64),
    /// Medium `+` edge under correlated rounding.
    Correlated,
}

/// CMSY's `f⁺`.
pub fn cmsy_f_plus(x: f64) -> f64 {
    if x < CMSY_LOW {
        0.0
    } else if x < CMSY_HIGH {
        ((x - CMSY_LOW) / (CMSY_HIGH - CMSY_LOW)).powi(2)
    } else {
        1.0
    }
}

fn checked_distance(x: f64) -> Result<f64> {
    if !(-CLAMP_WINDOW..=1.0 + CLAMP_WINDOW).contains(&x) {
        return Err(invalid(format!("distance {x} outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Join rule for a vertex at distance `x` from the pivot across an edge of
/// sign `sign`.
pub fn join_probability(policy: &RoundingPolicy, sign: Sign, x: f64) -> Result<Join> {
    let x = checked_distance(x)?;
    let p = match (policy.variant, sign) {
        (Variant::Kwik, Sign::Plus) => 1.0,
        (Variant::Kwik, Sign::Minus) => 0.0,
        (Variant::LpKwik, _) => 1.0 - x,
        (Variant::Cmsy, Sign::Plus) => 1.0 - cmsy_f_plus(x),
        (Variant::Cmsy, Sign::Minus) => 1.0 - x,
        (Variant::SaCorrelated, Sign::Minus) => 1.0 - x.sqrt(),
        (Variant::SaCorrelated, Sign::Plus) => match EdgeClass::of(x, policy.delta) {
            EdgeClass::Short => 1.0 - x * x / policy.delta,
            EdgeClass::Long => 1.0 - x,
            EdgeClass::Medium => return Ok(Join::Correlated),
        },
    };
    Ok(Join::Independent(p.clamp(0.0, 1.0)))
}

/// Join rules of every remaining non-pivot vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinProfile {
    pub pivot: usize,
    /// `(vertex, rule)` in increasing vertex order.
    pub entries: Vec<(usize, Join)>,
}

impl JoinProfile {
    /// Vertices with a medium `+` edge to the pivot.
    pub fn correlated_members(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|(_, j)| *j == Join::Correlated)
            .map(|&(v, _)| v)
            .collect()
    }
}

fn check_alive(g: &SignedGraph, frac: Option<&Fractional>, alive: &[usize], pivot: usize) -> Result<()> {
    if !alive.contains(&pivot) {
        return Err(invalid(format!("pivot {pivot} is not a remaining vertex")));
    }
    if let Some(v) = alive.iter().find(|&&v| v >= g.n()) {
        return Err(invalid(format!("vertex {v} outside the instance")));
    }
    if let Some(f) = frac {
        if f.n() != g.n() {
            return Err(invalid(format!(
                "fractional solution over {} vertices for an instance of {}",
                f.n(),
                g.n()
            )));
        }
    }
    Ok(())
}

fn distance(frac: Option<&Fractional>, u: usize, v: usize) -> f64 {
    frac.map_or(0.0, |f| f.x(u, v))
}

pub fn join_profile(
    g: &SignedGraph,
    frac: Option<&Fractional>,
    alive: &[usize],
    pivot: usize,
    policy: &RoundingPolicy,
) -> Result<JoinProfile> {
    policy.validate()?;
    check_alive(g, frac, alive, pivot)?;
    if frac.is_none() && policy.variant != Variant::Kwik {
        return Err(invalid("this rounding variant needs a fractional solution"));
    }
    let mut entries = Vec::with_capacity(alive.len());
    let mut sorted = alive.to_vec();
    sorted.sort_unstable();
    for v in sorted {
        if v != pivot {
            let j = join_probability(policy, g.sign(pivot, v), distance(frac, pivot, v))?;
            entries.push((v, j));
        }
    }
    Ok(JoinProfile { pivot, entries })
}

/// The full per-pivot rounding law: independent probabilities for ordinary
/// vertices plus the seeded law of the correlated members.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotLaw {
    pub profile: JoinProfile,
    /// `(vertex, probability)` for independently rounded vertices.
    pub independent: Vec<(usize, f64)>,
    pub correlated: SeededRounding,
    pub selection: Option<SeedSelection>,
}

impl PivotLaw {
    /// Marginal join probability of `v`, or `None` for the pivot and
    /// removed vertices.
    pub fn marginal(&self, v: usize) -> Option<f64> {
        if let Some(&(_, p)) = self.independent.iter().find(|(w, _)| *w == v) {
            return Some(p);
        }
        let i = self.correlated.members.iter().position(|&w| w == v)?;
        Some(self.correlated.marginal(i))
    }
}

/// Builds the rounding law at `pivot`, including seed selection for
/// correlated members. `rng` is consumed only by sampled seed search.
pub fn pivot_law<R: Rng + ?Sized>(
    g: &SignedGraph,
    frac: Option<&Fractional>,
    alive: &[usize],
    pivot: usize,
    policy: &RoundingPolicy,
    rng: &mut R,
) -> Result<PivotLaw> {
    let profile = join_profile(g, frac, alive, pivot, policy)?;
    let independent: Vec<(usize, f64)> = profile
        .entries
        .iter()
        .filter_map(|&(v, j)| match j {
            Join::Independent(p) => Some((v, p)),
            Join::Correlated => None,
        })
        .collect();
    let members = profile.correlated_members();
    let (correlated, selection) = match frac.and_then(|f| f.valuation()) {
        Some(y) if !members.is_empty() => {
            let r = policy.rounds.unwrap_or(y.rounds()).min(y.rounds());
            let sel = select_seed(y, pivot, &members, r, rng)?;
            let law = SeededRounding::new(y, pivot, &members, &sel.seed, CONSISTENCY_TOL)?;
            (law, Some(sel))
        }
        _ => {
            let marginals: Vec<f64> =
                members.iter().map(|&v| 1.0 - distance(frac, pivot, v)).collect();
            (SeededRounding::independent(pivot, &members, &marginals), None)
        }
    };
    Ok(PivotLaw { profile, independent, correlated, selection })
}

/// Samples a cluster from a prepared pivot law.
pub fn sample_cluster<R: Rng + ?Sized>(law: &PivotLaw, rng: &mut R) -> Vec<usize> {
    let mut s = vec![law.profile.pivot];
    for &(v, p) in &law.independent {
        if rng.random_bool(p) {
            s.push(v);
        }
    }
    s.extend(law.correlated.sample(rng));
    s.sort_unstable();
    s
}

/// One rounding step at a given pivot: returns the cluster `S ∋ pivot`
/// among the `alive` vertices.
pub fn round_once<R: Rng + ?Sized>(
    g: &SignedGraph,
    frac: Option<&Fractional>,
    alive: &[usize],
    pivot: usize,
    policy: &RoundingPolicy,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let law = pivot_law(g, frac, alive, pivot, policy, rng)?;
    Ok(sample_cluster(&law, rng))
}

/// Full randomized pivot clustering with uniformly random pivots.
pub fn cluster<R: Rng + ?Sized>(
    g: &SignedGraph,
    frac: Option<&Fractional>,
    policy: &RoundingPolicy,
    rng: &mut R,
) -> Result<Clustering> {
    let n = g.n();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut assignment = vec![usize::MAX; n];
    let mut next = 0;
    while !alive.is_empty() {
        let pivot = alive[rng.random_range(0..alive.len())];
        let s = round_once(g, frac, &alive, pivot, policy, rng)?;
        for &v in &s {
            assignment[v] = next;
        }
        next += 1;
        alive.retain(|v| assignment[*v] == usize::MAX);
    }
    Ok(Clustering::new(assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{clustering_cost, make_star_gap};
    use crate::relaxations::Distances;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prob(j: Join) -> f64 {
        match j {
            Join::Independent(p) => p,
            Join::Correlated => panic!("unexpected correlated marker"),
        }
    }

    #[test]
    fn algorithm_branches() {
        let sa = RoundingPolicy::sa_correlated(4);
        assert_eq!(prob(join_probability(&sa, Sign::Minus, 0.0).unwrap()), 1.0);
        assert!((prob(join_probability(&sa, Sign::Minus, 0.25).unwrap()) - 0.5).abs() < 1e-15);
        assert!((prob(join_probability(&sa, Sign::Plus, 0.1).unwrap()) - 0.9).abs() < 1e-12);
        assert!((prob(join_probability(&sa, Sign::Plus, 0.05).unwrap()) - 0.975).abs() < 1e-12);
        assert!((prob(join_probability(&sa, Sign::Plus, 0.95).unwrap()) - 0.05).abs() < 1e-12);
        assert_eq!(join_probability(&sa, Sign::Plus, 0.5).unwrap(), Join::Correlated);
        assert!(join_probability(&sa, Sign::Plus, 1.5).is_err());
        assert!(join_probability(&sa, Sign::Plus, -1e-9).is_ok());
    }

    #[test]
    fn baseline_rules() {
        let cmsy = RoundingPolicy::cmsy();
        assert_eq!(prob(join_probability(&cmsy, Sign::Plus, 0.5095).unwrap()), 0.0);
        assert_eq!(prob(join_probability(&cmsy, Sign::Plus, 0.1).unwrap()), 1.0);
        let mid = prob(join_probability(&cmsy, Sign::Plus, 0.3).unwrap());
        assert!((mid - (1.0 - ((0.3f64 - 0.19) / (0.5095 - 0.19)).powi(2))).abs() < 1e-15);
        assert!((prob(join_probability(&cmsy, Sign::Minus, 0.3).unwrap()) - 0.7).abs() < 1e-15);
        let lp = RoundingPolicy::lp_kwik();
        assert!((prob(join_probability(&lp, Sign::Minus, 0.3).unwrap()) - 0.7).abs() < 1e-15);
        let k = RoundingPolicy::kwik();
        assert_eq!(prob(join_probability(&k, Sign::Plus, 0.9).unwrap()), 1.0);
        assert_eq!(prob(join_probability(&k, Sign::Minus, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn policy_validation() {
        let mut p = RoundingPolicy::sa_correlated(4);
        p.delta = 0.5;
        assert!(p.validate().is_err());
        assert!(RoundingPolicy::sa_correlated(2).validate().is_err());
    }

    #[test]
    fn extreme_distances() {
        let g = SignedGraph::complete(5, Sign::Plus).unwrap();
        let zero = Distances::from_fn(5, |_, _| 0.0);
        let one = Distances::from_fn(5, |_, _| 1.0);
        let alive: Vec<usize> = (0..5).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let policy = RoundingPolicy::sa_correlated(3);
        for _ in 0..20 {
            let s = round_once(&g, Some(&Fractional::Metric(&zero)), &alive, 2, &policy, &mut rng);
            assert_eq!(s.unwrap(), alive);
            let s = round_once(&g, Some(&Fractional::Metric(&one)), &alive, 2, &policy, &mut rng);
            assert_eq!(s.unwrap(), vec![2]);
        }
        assert!(round_once(&g, None, &[0, 1], 3, &RoundingPolicy::kwik(), &mut rng).is_err());
    }

    #[test]
    fn kwik_on_uniform_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let plus = SignedGraph::complete(5, Sign::Plus).unwrap();
        let c = cluster(&plus, None, &RoundingPolicy::kwik(), &mut rng).unwrap();
        assert_eq!(c.blocks().len(), 1);
        assert_eq!(clustering_cost(&plus, &c).unwrap(), 0);
        let minus = SignedGraph::complete(5, Sign::Minus).unwrap();
        let c = cluster(&minus, None, &RoundingPolicy::kwik(), &mut rng).unwrap();
        assert_eq!(c.blocks().len(), 5);
    }

    #[test]
    fn star_marginals_with_metric_input() {
        let g = make_star_gap(2).unwrap();
        let d = Distances::from_fn(3, |u, _| if u == 0 { 0.5 } else { 1.0 });
        let policy = RoundingPolicy::sa_correlated(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut hits = [0usize; 3];
        for _ in 0..trials {
            for v in round_once(&g, Some(&Fractional::Metric(&d)), &[0, 1, 2], 0, &policy, &mut rng)
                .unwrap()
            {
                hits[v] += 1;
            }
        }
        let sigma = (0.25 / trials as f64).sqrt();
        for v in [1, 2] {
            let f = hits[v] as f64 / trials as f64;
            assert!((f - 0.5).abs() < 3.0 * sigma, "vertex {v}: {f}");
        }
    }
}
