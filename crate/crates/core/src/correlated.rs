//! Correlated rounding of the medium `+` neighbours of a pivot.
//!
//! For a pivot `p`, each vertex `v` gets a join indicator `X_v`. The
//! Sherali-Adams values induce a joint law on the indicators of any set `S`
//! with `|S| + 1 <= r`: the probability of `X_S = α` is the total mass of
//! the partitions of `S ∪ {p}` whose block around `p` is `{p} ∪ α⁻¹(1)`.
//!
//! Rounding picks a small seed `T`, samples `α` from the law of `X_T`, and
//! then rounds every other vertex independently from its conditional law
//! given `X_T = α`. Marginals are preserved exactly. A seed with small
//! averaged conditional mutual information makes the pairwise joint
//! probabilities close to the relaxation's.
//!
//! Entropies are in nats.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::partitions::{binomial, subsets_of_size};
use crate::relaxations::SaValuation;

/// Seeds are exhaustively enumerated up to this many candidates per size.
pub const EXHAUSTIVE_SEED_LIMIT: u128 = 10_000;
/// Candidate seeds drawn per size above the exhaustive limit.
pub const SAMPLED_SEEDS: usize = 10_000;
/// Seed assignments at or below this probability are never drawn.
pub const ZERO_MASS: f64 = 1e-12;

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

/// Shannon entropy of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| plogp(p)).sum::<f64>()
}

/// Entropy of a Bernoulli(`q`) bit.
pub fn binary_entropy(q: f64) -> f64 {
    entropy(&[q, 1.0 - q])
}

/// Mutual information of two bits given `joint[i][j] = Pr[X = i, Y = j]`.
/// The joint need not be normalized; it is rescaled first.
pub fn mutual_information(joint: [[f64; 2]; 2]) -> f64 {
    let total: f64 = joint.iter().flatten().map(|p| p.max(0.0)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let j = joint.map(|row| row.map(|p| p.max(0.0) / total));
    let px = [j[0][0] + j[0][1], j[1][0] + j[1][1]];
    let py = [j[0][0] + j[1][0], j[0][1] + j[1][1]];
    let mut mi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            if j[a][b] > 0.0 {
                mi += j[a][b] * (j[a][b] / (px[a] * py[b])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Joint law of the join indicators of `vars` for a fixed pivot.
/// Bit `i` of an outcome index is `X_{vars[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinLaw {
    vars: Vec<usize>,
    probs: Vec<f64>,
}

impl JoinLaw {
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    /// `Pr[X_{vars[i]} = 1]`.
    pub fn marginal(&self, i: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(m, _)| m >> i & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

/// The law of `X_vars` under pivot `p`. Requires `|vars| + 1 <= r`.
pub fn join_law(y: &SaValuation, p: usize, vars: &[usize]) -> Result<JoinLaw> {
    if vars.contains(&p) {
        return Err(invalid("the pivot cannot be one of its own join variables"));
    }
    if vars.len() >= usize::BITS as usize {
        return Err(invalid("too many join variables"));
    }
    let mut ground = vars.to_vec();
    ground.push(p);
    let local = y.local(&ground)?;
    let mut probs = vec![0.0; 1 << vars.len()];
    for (key, prob) in local.atoms() {
        let block = key.block_of(p).expect("pivot is in the ground set");
        let mut mask = 0usize;
        for (i, &v) in vars.iter().enumerate() {
            if key.block_of(v) == Some(block) {
                mask |= 1 << i;
            }
        }
        probs[mask] += prob;
    }
    Ok(JoinLaw { vars: vars.to_vec(), probs })
}

/// `I(X_u; X_v | X_T)` for pivot `p`. Zero when `u` or `v` lies in `T`;
/// `H(X_u | X_T)` when `u = v`.
pub fn conditional_mutual_information(
    y: &SaValuation,
    p: usize,
    u: usize,
    v: usize,
    seed: &[usize],
) -> Result<f64> {
    let need = seed.len() + if u == v { 2 } else { 3 };
    if need > y.rounds() {
        return Err(invalid(format!(
            "conditioning on {} seed vertices needs {need} rounds, have {}",
            seed.len(),
            y.rounds()
        )));
    }
    if seed.contains(&u) || seed.contains(&v) {
        return Ok(0.0);
    }
    let t = seed.len();
    if u == v {
        let mut vars = seed.to_vec();
        vars.push(u);
        let law = join_law(y, p, &vars)?;
        let mut h = 0.0;
        for alpha in 0..1 << t {
            let p0 = law.prob(alpha).max(0.0);
            let p1 = law.prob(alpha | 1 << t).max(0.0);
            let z = p0 + p1;
            if z > ZERO_MASS {
                h += z * binary_entropy(p1 / z);
            }
        }
        return Ok(h.max(0.0));
    }
    let mut vars = seed.to_vec();
    vars.push(u);
    vars.push(v);
    let law = join_law(y, p, &vars)?;
    let mut mi = 0.0;
    for alpha in 0..1 << t {
        let mut joint = [[0.0; 2]; 2];
        for (a, row) in joint.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = law.prob(alpha | a << t | b << (t + 1)).max(0.0);
            }
        }
        let z: f64 = joint.iter().flatten().sum();
        if z > ZERO_MASS {
            mi += z * mutual_information(joint);
        }
    }
    Ok(mi.max(0.0))
}

/// Mean of `I(X_u; X_v | X_T)` over ordered pairs of distinct `u, v` in
/// `members`; zero when there are fewer than two members.
pub fn averaged_mutual_information(
    y: &SaValuation,
    p: usize,
    members: &[usize],
    seed: &[usize],
) -> Result<f64> {
    let m = members.len();
    if m < 2 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            sum += 2.0 * conditional_mutual_information(y, p, u, v, seed)?;
        }
    }
    Ok(sum / (m * (m - 1)) as f64)
}

/// A seed set for one pivot and the averaged mutual information it leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSelection {
    pub pivot: usize,
    pub seed: Vec<usize>,
    pub averaged_mi: f64,
    /// `1 / (r - 2)`.
    pub bound: f64,
    pub bound_met: bool,
    /// False when some seed size was searched by sampling.
    pub exhaustive: bool,
    pub candidates: usize,
}

impl SeedSelection {
    /// `√(2 · averaged MI)`, the implied bound on the mean pair error.
    pub fn pair_error_bound(&self) -> f64 {
        (2.0 * self.averaged_mi).sqrt()
    }
}

/// Searches seeds `T ⊆ members` with `|T| <= r - 3` in order of size, then
/// lexicographically, and returns the first whose averaged mutual
/// information is at most `1 / (r - 2)`. Sizes with more than
/// [`EXHAUSTIVE_SEED_LIMIT`] candidates are sampled. If no candidate meets
/// the bound the best one is returned with `bound_met = false`.
pub fn select_seed<R: Rng + ?Sized>(
    y: &SaValuation,
    p: usize,
    members: &[usize],
    r: usize,
    rng: &mut R,
) -> Result<SeedSelection> {
    if r < 3 {
        return Err(invalid(format!("correlated rounding needs r >= 3, got {r}")));
    }
    if r > y.rounds() {
        return Err(invalid(format!(
            "{r} rounds requested from a {}-round valuation",
            y.rounds()
        )));
    }
    let mut members = members.to_vec();
    members.sort_unstable();
    let bound = 1.0 / (r - 2) as f64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut exhaustive = true;
    let mut candidates = 0;
    for t in 0..=(r - 3).min(members.len()) {
        let seeds: Vec<Vec<usize>> = if binomial(members.len(), t) <= EXHAUSTIVE_SEED_LIMIT {
            subsets_of_size(&members, t)
        } else {
            exhaustive = false;
            let mut drawn: Vec<Vec<usize>> = (0..SAMPLED_SEEDS)
                .map(|_| {
                    let mut s: Vec<usize> = sample(rng, members.len(), t)
                        .into_iter()
                        .map(|i| members[i])
                        .collect();
                    s.sort_unstable();
                    s
                })
                .collect();
            drawn.sort();
            drawn.dedup();
            drawn
        };
        for seed in seeds {
            candidates += 1;
            let mi = averaged_mutual_information(y, p, &members, &seed)?;
            if mi <= bound + 1e-12 {
                return Ok(SeedSelection {
                    pivot: p,
                    seed,
                    averaged_mi: mi,
                    bound,
                    bound_met: true,
                    exhaustive,
                    candidates,
                });
            }
            if best.as_ref().is_none_or(|(b, _)| mi < *b) {
                best = Some((mi, seed));
            }
        }
    }
    let (averaged_mi, seed) = best.expect("the empty seed is always a candidate");
    Ok(SeedSelection {
        pivot: p,
        seed,
        averaged_mi,
        bound,
        bound_met: false,
        exhaustive,
        candidates,
    })
}

/// One outcome `α` of the seed indicators with its conditional join
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedAssignment {
    /// Bit `i` is the value of the `i`-th seed vertex.
    pub mask: usize,
    pub prob: f64,
    /// `Pr[X_v = 1 | X_T = α]` for every member `v`, in member order.
    pub conditional: Vec<f64>,
}

/// Precomputed conditional laws for rounding a pivot's members from a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeededRounding {
    pub pivot: usize,
    pub members: Vec<usize>,
    pub seed: Vec<usize>,
    /// Seed assignments with positive probability.
    pub assignments: Vec<SeedAssignment>,
}

impl SeededRounding {
    /// Builds the conditional laws. `seed` must be a subset of `members`.
    /// Mass within `tol` of consistency is accepted and clamped; larger
    /// inconsistencies are reported as numeric errors.
    pub fn new(y: &SaValuation, p: usize, members: &[usize], seed: &[usize], tol: f64) -> Result<Self> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut seed = seed.to_vec();
        seed.sort_unstable();
        if let Some(s) = seed.iter().find(|s| !members.contains(s)) {
            return Err(invalid(format!("seed vertex {s} is not a member")));
        }
        if seed.len() + 2 > y.rounds() {
            return Err(invalid(format!(
                "a seed of {} vertices needs {} rounds, have {}",
                seed.len(),
                seed.len() + 2,
                y.rounds()
            )));
        }
        let t = seed.len();
        let seed_law = join_law(y, p, &seed)?;
        let mut assignments: Vec<SeedAssignment> = (0..1usize << t)
            .filter(|&a| seed_law.prob(a) > ZERO_MASS)
            .map(|mask| SeedAssignment { mask, prob: seed_law.prob(mask), conditional: Vec::new() })
            .collect();
        for &v in &members {
            let pos = seed.iter().position(|&s| s == v);
            let law = match pos {
                Some(_) => None,
                None => {
                    let mut vars = seed.clone();
                    vars.push(v);
                    Some(join_law(y, p, &vars)?)
                }
            };
            for a in &mut assignments {
                let c = match (pos, &law) {
                    (Some(i), _) => (a.mask >> i & 1) as f64,
                    (None, Some(law)) => {
                        let one = law.prob(a.mask | 1 << t);
                        if one > a.prob + tol {
                            return Err(Error::Numeric(format!(
                                "conditional join probability of {v} under seed mask {} is {}",
                                a.mask,
                                one / a.prob
                            )));
                        }
                        (one / a.prob).clamp(0.0, 1.0)
                    }
                    (None, None) => unreachable!(),
                };
                a.conditional.push(c);
            }
        }
        Ok(Self { pivot: p, members, seed, assignments })
    }

    /// Independent rounding with the given marginals (the empty seed of a
    /// product law).
    pub fn independent(p: usize, members: &[usize], marginals: &[f64]) -> Self {
        Self {
            pivot: p,
            members: members.to_vec(),
            seed: Vec::new(),
            assignments: vec![SeedAssignment {
                mask: 0,
                prob: 1.0,
                conditional: marginals.to_vec(),
            }],
        }
    }

    /// `Σ_α Pr[α] Pr[X_{members[i]} = 1 | α]`.
    pub fn marginal(&self, i: usize) -> f64 {
        self.assignments.iter().map(|a| a.prob * a.conditional[i]).sum()
    }

    /// `Σ_α Pr[α] Pr[X_u = 1 | α] Pr[X_v = 1 | α]` for member positions.
    pub fn pair_probability(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.marginal(i);
        }
        self.assignments
            .iter()
            .map(|a| a.prob * a.conditional[i] * a.conditional[j])
            .sum()
    }

    /// Draws a seed assignment index.
    pub fn sample_assignment<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.assignments.iter().map(|a| a.prob).sum();
        let mut u = rng.random::<f64>() * total;
        for (i, a) in self.assignments.iter().enumerate() {
            if u < a.prob {
                return i;
            }
            u -= a.prob;
        }
        self.assignments.len() - 1
    }

    /// Samples `S' ⊆ members`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let a = &self.assignments[self.sample_assignment(rng)];
        self.members
            .iter()
            .zip(&a.conditional)
            .filter(|(_, &c)| rng.random_bool(c))
            .map(|(&v, _)| v)
            .collect()
    }
}

/// Per-pivot diagnostic record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotDiagnostic {
    pub pivot: usize,
    pub members: usize,
    pub seed: Vec<usize>,
    pub averaged_mi: f64,
    pub pair_error_bound: f64,
    pub bound: f64,
    pub bound_met: bool,
}

impl PivotDiagnostic {
    pub fn new(selection: &SeedSelection, members: usize) -> Self {
        let s = selection;
        Self {
            pivot: s.pivot,
            members,
            seed: s.seed.clone(),
            averaged_mi: s.averaged_mi,
            pair_error_bound: s.pair_error_bound(),
            bound: s.bound,
            bound_met: s.bound_met,
        }
    }
}

/// Mean over ordered distinct member pairs of `|Pr[u, v ∈ S'] - y_{puv}|`.
pub fn mean_pair_error(y: &SaValuation, rounding: &SeededRounding) -> Result<f64> {
    let m = rounding.members.len();
    if m < 2 {
        return Ok(0.0);
    }
    let p = rounding.pivot;
    let mut sum = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let (u, v) = (rounding.members[i], rounding.members[j]);
            let target = join_law(y, p, &[u, v])?.prob(0b11);
            sum += 2.0 * (rounding.pair_probability(i, j) - target).abs();
        }
    }
    Ok(sum / (m * (m - 1)) as f64)
}
