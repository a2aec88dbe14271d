//! Exact per-pivot expectations and the conditional-expectation
//! derandomization of pivot rounding.
//!
//! Given a pivot and a seed assignment, every remaining vertex joins
//! independently, so the probability that an edge is violated and the
//! probability that it is removed are products of join probabilities.
//! Averaging over seed assignments gives the exact expectations.
//!
//! The deterministic run picks, in every iteration, the pivot with the
//! smallest ratio of expected cost to expected LP removal `ρ`, then fixes
//! the seed assignment and every join bit in turn so that
//! `E[cost] - ρ · E[lp]` never increases. The realized cost `α_t` of the
//! iteration therefore satisfies `α_t <= ρ · β_t`, where `β_t` is the LP value
//! removed, and the whole run costs at most `max_t ρ_t` times the LP value.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::{clustering_cost, pair_index, Clustering, SignedGraph};
use crate::relaxations::{Distances, Fractional};
use crate::rounding::{pivot_law, PivotLaw, RoundingPolicy};

/// Slack used when comparing floating-point certificate quantities.
pub const CERT_TOL: f64 = 1e-9;

/// `num / den` with `0/0 = 0` and `x/0 = ∞` for `x > 0`.
pub fn ratio(num: f64, den: f64) -> f64 {
    if den > CERT_TOL {
        num / den
    } else if num > CERT_TOL {
        f64::INFINITY
    } else {
        0.0
    }
}

/// LP contribution of a pair: `x_uv` for `+`, `1 - x_uv` for `-`.
pub fn lp_contribution(g: &SignedGraph, x: f64, u: usize, v: usize) -> f64 {
    if g.is_plus(u, v) {
        x
    } else {
        1.0 - x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeExpectation {
    pub u: usize,
    pub v: usize,
    /// Probability the edge is violated in this iteration.
    pub cost: f64,
    /// LP contribution times the probability the edge is removed.
    pub lp: f64,
    pub removal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotExpectation {
    pub pivot: usize,
    pub edges: Vec<EdgeExpectation>,
    pub total_cost: f64,
    pub total_lp: f64,
}

impl PivotExpectation {
    pub fn ratio(&self) -> f64 {
        ratio(self.total_cost, self.total_lp)
    }
}

/// Per-edge violation and removal probabilities for fixed independent join
/// probabilities `q` (indexed by vertex; the pivot's entry is ignored).
fn edge_terms(g: &SignedGraph, pivot: usize, u: usize, v: usize, q: &[f64]) -> (f64, f64) {
    if u == pivot || v == pivot {
        let w = if u == pivot { v } else { u };
        let cost = if g.is_plus(u, v) { 1.0 - q[w] } else { q[w] };
        (cost, 1.0)
    } else {
        let (a, b) = (q[u], q[v]);
        let cost = if g.is_plus(u, v) { a * (1.0 - b) + b * (1.0 - a) } else { a * b };
        (cost, 1.0 - (1.0 - a) * (1.0 - b))
    }
}

/// Join probabilities of all remaining vertices under one seed assignment.
fn join_vector(n: usize, law: &PivotLaw, assignment: usize) -> Vec<f64> {
    let mut q = vec![0.0; n];
    q[law.profile.pivot] = 1.0;
    for &(v, p) in &law.independent {
        q[v] = p;
    }
    let a = &law.correlated.assignments[assignment];
    for (&v, &c) in law.correlated.members.iter().zip(&a.conditional) {
        q[v] = c;
    }
    q
}

fn expectation_for_vectors(
    g: &SignedGraph,
    x: &Distances,
    alive: &[usize],
    pivot: usize,
    weighted: &[(f64, Vec<f64>)],
) -> PivotExpectation {
    let mut edges = Vec::with_capacity(alive.len() * alive.len().saturating_sub(1) / 2);
    let (mut total_cost, mut total_lp) = (0.0, 0.0);
    for (i, &u) in alive.iter().enumerate() {
        for &v in &alive[i + 1..] {
            let (mut cost, mut removal) = (0.0, 0.0);
            for (w, q) in weighted {
                let (c, r) = edge_terms(g, pivot, u, v, q);
                cost += w * c;
                removal += w * r;
            }
            let lp = lp_contribution(g, x.get(u, v).clamp(0.0, 1.0), u, v) * removal;
            total_cost += cost;
            total_lp += lp;
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            edges.push(EdgeExpectation { u: a, v: b, cost, lp, removal });
        }
    }
    PivotExpectation { pivot, edges, total_cost, total_lp }
}

/// Expectations at a prepared pivot law, marginalized over seed
/// assignments or conditioned on one of them.
pub fn expectation_from_law(
    g: &SignedGraph,
    x: &Distances,
    alive: &[usize],
    law: &PivotLaw,
    assignment: Option<usize>,
) -> PivotExpectation {
    let n = g.n();
    let weighted: Vec<(f64, Vec<f64>)> = match assignment {
        Some(a) => vec![(1.0, join_vector(n, law, a))],
        None => {
            let total: f64 = law.correlated.assignments.iter().map(|a| a.prob).sum();
            (0..law.correlated.assignments.len())
                .map(|a| (law.correlated.assignments[a].prob / total, join_vector(n, law, a)))
                .collect()
        }
    };
    let mut sorted = alive.to_vec();
    sorted.sort_unstable();
    expectation_for_vectors(g, x, &sorted, law.profile.pivot, &weighted)
}

fn seed_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

/// Exact expected cost and LP removal of one rounding step at `pivot`.
pub fn pivot_expectation(
    g: &SignedGraph,
    frac: &Fractional,
    alive: &[usize],
    pivot: usize,
    policy: &RoundingPolicy,
) -> Result<PivotExpectation> {
    let law = pivot_law(g, Some(frac), alive, pivot, policy, &mut seed_rng())?;
    Ok(expectation_from_law(g, &frac_distances(frac), alive, &law, None))
}

fn frac_distances(frac: &Fractional) -> Distances {
    match frac {
        Fractional::Metric(d) => Distances::from_fn(d.n(), |u, v| d.get(u, v).clamp(0.0, 1.0)),
        Fractional::Lifted(y) => y.distances(),
    }
}

/// A chosen pivot with its law and expectation.
#[derive(Debug, Clone)]
pub struct PivotChoice {
    pub law: PivotLaw,
    pub expectation: PivotExpectation,
    /// The ratio the rest of the iteration preserves; 0 in the fallback
    /// case where no pivot removes LP mass.
    pub target: f64,
    pub fallback: bool,
}

/// The pivot minimizing expected cost over expected LP removal, ties to
/// the smallest id. If every pivot has zero LP removal and positive cost,
/// the pivot of least expected cost is returned.
pub fn best_pivot(
    g: &SignedGraph,
    frac: &Fractional,
    alive: &[usize],
    policy: &RoundingPolicy,
) -> Result<PivotChoice> {
    if alive.is_empty() {
        return Err(invalid("no remaining vertices"));
    }
    let x = frac_distances(frac);
    let mut sorted = alive.to_vec();
    sorted.sort_unstable();
    let scored: Vec<(PivotLaw, PivotExpectation)> = sorted
        .par_iter()
        .map(|&p| {
            let law = pivot_law(g, Some(frac), &sorted, p, policy, &mut seed_rng())?;
            let e = expectation_from_law(g, &x, &sorted, &law, None);
            Ok((law, e))
        })
        .collect::<Result<_>>()?;
    let key = |e: &PivotExpectation| e.ratio();
    let mut best = 0;
    for i in 1..scored.len() {
        if key(&scored[i].1) < key(&scored[best].1) - 1e-12 {
            best = i;
        }
    }
    let mut target = key(&scored[best].1);
    let fallback = target.is_infinite();
    if fallback {
        best = 0;
        for i in 1..scored.len() {
            if scored[i].1.total_cost < scored[best].1.total_cost {
                best = i;
            }
        }
        target = 0.0;
    }
    let (law, expectation) = scored.into_iter().nth(best).expect("nonempty");
    Ok(PivotChoice { law, expectation, target, fallback })
}

/// One iteration of a deterministic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateStep {
    pub pivot: usize,
    pub seed: Vec<usize>,
    /// Chosen seed assignment (bit `i` for the `i`-th seed vertex).
    pub seed_mask: usize,
    pub cluster: Vec<usize>,
    /// Ratio preserved during this iteration.
    pub target_ratio: f64,
    /// No pivot removed LP mass; only expected cost was minimized.
    pub fallback: bool,
    pub expected_cost: f64,
    pub expected_lp: f64,
    /// Realized cost: violated edges removed in this iteration.
    pub alpha: f64,
    /// LP value of the edges removed in this iteration.
    pub beta: f64,
}

/// Certificate of a deterministic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingCertificate {
    pub n: usize,
    /// Pair distances in `pair_index` order.
    pub distances: Vec<f64>,
    pub lp_value: f64,
    pub steps: Vec<CertificateStep>,
    pub total_cost: f64,
    /// `max_t α_t / β_t` (with `0/0 = 0`).
    pub max_ratio: f64,
    pub bound: f64,
}

impl RoundingCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("certificate JSON: {e}")))
    }
}

/// LP value `Σ_{+} x + Σ_{-} (1 - x)` of clamped distances.
pub fn lp_value(g: &SignedGraph, x: &Distances) -> f64 {
    g.pairs()
        .map(|(u, v, _)| lp_contribution(g, x.get(u, v).clamp(0.0, 1.0), u, v))
        .sum()
}

/// Objective `E[cost] - ρ E[lp]` restricted to edges touching `v`, for
/// join probability `qv` of `v` with all else fixed.
#[allow(clippy::too_many_arguments)]
fn local_objective(
    g: &SignedGraph,
    x: &Distances,
    alive: &[usize],
    pivot: usize,
    q: &mut [f64],
    v: usize,
    qv: f64,
    rho: f64,
) -> f64 {
    let old = q[v];
    q[v] = qv;
    let mut total = 0.0;
    for &w in alive {
        if w == v {
            continue;
        }
        let (c, r) = edge_terms(g, pivot, v, w, q);
        total += c - rho * lp_contribution(g, x.get(v, w).clamp(0.0, 1.0), v, w) * r;
    }
    q[v] = old;
    total
}

/// Deterministic pivot clustering with a ratio certificate.
pub fn derandomized_cluster(
    g: &SignedGraph,
    frac: &Fractional,
    policy: &RoundingPolicy,
) -> Result<(Clustering, RoundingCertificate)> {
    let n = g.n();
    if frac.n() != n {
        return Err(invalid("fractional solution does not match the instance"));
    }
    let x = frac_distances(frac);
    let mut alive: Vec<usize> = (0..n).collect();
    let mut assignment = vec![usize::MAX; n];
    let mut steps = Vec::new();
    while !alive.is_empty() {
        let choice = best_pivot(g, frac, &alive, policy)?;
        let law = &choice.law;
        let pivot = law.profile.pivot;
        let rho = choice.target;

        let seed_mask;
        let mut q = if law.correlated.assignments.is_empty() {
            return Err(Error::Numeric(format!("pivot {pivot} has no seed assignment")));
        } else {
            let mut best: Option<(f64, usize)> = None;
            for a in 0..law.correlated.assignments.len() {
                let e = expectation_from_law(g, &x, &alive, law, Some(a));
                let obj = e.total_cost - rho * e.total_lp;
                if best.is_none_or(|(b, _)| obj < b - CERT_TOL) {
                    best = Some((obj, a));
                }
            }
            let a = best.expect("nonempty").1;
            seed_mask = law.correlated.assignments[a].mask;
            join_vector(n, law, a)
        };

        for &v in &alive {
            if v == pivot {
                continue;
            }
            let keep = local_objective(g, &x, &alive, pivot, &mut q, v, 1.0, rho);
            let drop = local_objective(g, &x, &alive, pivot, &mut q, v, 0.0, rho);
            q[v] = if keep < drop - CERT_TOL || (keep <= drop + CERT_TOL && q[v] >= 0.5) {
                1.0
            } else {
                0.0
            };
        }

        let cluster: Vec<usize> = alive.iter().copied().filter(|&v| q[v] == 1.0).collect();
        let (alpha, beta) = removal_accounting(g, &x, &alive, &cluster);
        for &v in &cluster {
            assignment[v] = steps.len();
        }
        steps.push(CertificateStep {
            pivot,
            seed: law.correlated.seed.clone(),
            seed_mask,
            cluster,
            target_ratio: rho,
            fallback: choice.fallback,
            expected_cost: choice.expectation.total_cost,
            expected_lp: choice.expectation.total_lp,
            alpha,
            beta,
        });
        alive.retain(|&v| assignment[v] == usize::MAX);
    }
    let clustering = Clustering::new(assignment);
    let total_cost = clustering_cost(g, &clustering)? as f64;
    let lp = lp_value(g, &x);
    let max_ratio = steps.iter().map(|s| ratio(s.alpha, s.beta)).fold(0.0, f64::max);
    let cert = RoundingCertificate {
        n,
        distances: x.values().to_vec(),
        lp_value: lp,
        steps,
        total_cost,
        max_ratio,
        bound: max_ratio * lp,
    };
    Ok((clustering, cert))
}

/// Realized cost and LP mass of the edges removed with `cluster`.
fn removal_accounting(g: &SignedGraph, x: &Distances, alive: &[usize], cluster: &[usize]) -> (f64, f64) {
    let inside: HashMap<usize, bool> = alive.iter().map(|&v| (v, cluster.contains(&v))).collect();
    let (mut alpha, mut beta) = (0.0, 0.0);
    for (i, &u) in alive.iter().enumerate() {
        for &v in &alive[i + 1..] {
            let (iu, iv) = (inside[&u], inside[&v]);
            if !iu && !iv {
                continue;
            }
            let violated = if g.is_plus(u, v) { iu != iv } else { iu && iv };
            if violated {
                alpha += 1.0;
            }
            beta += lp_contribution(g, x.get(u, v).clamp(0.0, 1.0), u, v);
        }
    }
    (alpha, beta)
}

/// Re-checks a certificate against the instance and the claimed clustering.
pub fn verify_certificate(g: &SignedGraph, cert: &RoundingCertificate, c: &Clustering) -> Result<()> {
    let n = g.n();
    let fail = |m: String| Err(Error::Verification(m));
    if cert.n != n || c.len() != n {
        return fail("certificate, clustering and instance sizes differ".into());
    }
    let x = Distances::new(n, cert.distances.clone())?;
    let mut alive: Vec<usize> = (0..n).collect();
    let mut alpha_sum = 0.0;
    let mut beta_sum = 0.0;
    let mut max_ratio: f64 = 0.0;
    for (t, s) in cert.steps.iter().enumerate() {
        if !s.cluster.contains(&s.pivot) {
            return fail(format!("step {t}: cluster misses its pivot"));
        }
        if let Some(v) = s.cluster.iter().find(|v| !alive.contains(v)) {
            return fail(format!("step {t}: vertex {v} was already removed"));
        }
        let first = c.cluster_of(s.pivot);
        if !s.cluster.iter().all(|&v| c.cluster_of(v) == first)
            || alive.iter().any(|&v| !s.cluster.contains(&v) && c.cluster_of(v) == first)
        {
            return fail(format!("step {t}: cluster disagrees with the clustering"));
        }
        let (alpha, beta) = removal_accounting(g, &x, &alive, &s.cluster);
        if (alpha - s.alpha).abs() > CERT_TOL || (beta - s.beta).abs() > 1e-7 {
            return fail(format!(
                "step {t}: recorded (α, β) = ({}, {}), recomputed ({alpha}, {beta})",
                s.alpha, s.beta
            ));
        }
        if !s.fallback && alpha > s.target_ratio * beta + 1e-7 {
            return fail(format!(
                "step {t}: α = {alpha} exceeds ρ β = {}",
                s.target_ratio * beta
            ));
        }
        alpha_sum += alpha;
        beta_sum += beta;
        max_ratio = max_ratio.max(ratio(alpha, beta));
        alive.retain(|v| !s.cluster.contains(v));
    }
    if !alive.is_empty() {
        return fail(format!("{} vertices never clustered", alive.len()));
    }
    let cost = clustering_cost(g, c)? as f64;
    if (cost - cert.total_cost).abs() > CERT_TOL || (cost - alpha_sum).abs() > CERT_TOL {
        return fail(format!("cost {cost} disagrees with the certificate"));
    }
    let lp = lp_value(g, &x);
    if (lp - cert.lp_value).abs() > 1e-7 || (lp - beta_sum).abs() > 1e-6 {
        return fail(format!("LP value {lp} disagrees with the removed mass {beta_sum}"));
    }
    if cost > max_ratio * lp + 1e-6 {
        return fail(format!("cost {cost} exceeds {max_ratio} × {lp}"));
    }
    Ok(())
}

/// Convenience for per-pair lookups in tests and reports.
pub fn edge_lookup(e: &PivotExpectation, n: usize) -> HashMap<usize, EdgeExpectation> {
    e.edges.iter().map(|ed| (pair_index(n, ed.u, ed.v), *ed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{make_star_gap, Sign};
    use crate::instance::Clustering;
    use crate::relaxations::SaValuation;

    #[test]
    fn far_apart_pivot() {
        let g = make_star_gap(3).unwrap();
        let d = Distances::from_fn(4, |_, _| 1.0);
        let alive: Vec<usize> = (0..4).collect();
        let e = pivot_expectation(&g, &Fractional::Metric(&d), &alive, 0, &RoundingPolicy::sa_correlated(3))
            .unwrap();
        assert!((e.total_cost - 3.0).abs() < 1e-12);
        for ed in &e.edges {
            if ed.u != 0 {
                assert_eq!(ed.removal, 0.0);
            }
        }
        let sum: f64 = e.edges.iter().map(|ed| ed.cost).sum();
        assert!((sum - e.total_cost).abs() < 1e-12);
    }

    #[test]
    fn anti_correlated_star_never_violates_the_minus_edge() {
        let g = make_star_gap(2).unwrap();
        let a = Clustering::new(vec![0, 0, 1]);
        let b = Clustering::new(vec![0, 1, 0]);
        let y = SaValuation::from_mixture(3, 3, &[(a, 0.5), (b, 0.5)]).unwrap();
        let policy = RoundingPolicy::sa_correlated(3);
        let alive = [0, 1, 2];
        let lifted = pivot_expectation(&g, &Fractional::Lifted(&y), &alive, 0, &policy).unwrap();
        let d = y.distances();
        let metric = pivot_expectation(&g, &Fractional::Metric(&d), &alive, 0, &policy).unwrap();
        let minus = |e: &PivotExpectation| e.edges.iter().find(|ed| ed.u == 1 && ed.v == 2).unwrap().cost;
        // independent rounding joins both with probability 1/4
        assert!((minus(&metric) - 0.25).abs() < 1e-12);
        // r = 3 allows only the empty seed: still independent
        assert!((minus(&lifted) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn all_plus_is_one_cluster_with_zero_ratio() {
        let g = SignedGraph::complete(5, Sign::Plus).unwrap();
        let d = Distances::from_fn(5, |_, _| 0.0);
        let (c, cert) =
            derandomized_cluster(&g, &Fractional::Metric(&d), &RoundingPolicy::sa_correlated(3)).unwrap();
        assert_eq!(c.blocks().len(), 1);
        assert_eq!(cert.total_cost, 0.0);
        assert_eq!(cert.max_ratio, 0.0);
        verify_certificate(&g, &cert, &c).unwrap();
    }

    #[test]
    fn star_certificate_is_sound() {
        let g = make_star_gap(4).unwrap();
        let d = Distances::from_fn(5, |u, _| if u == 0 { 0.5 } else { 1.0 });
        for policy in [RoundingPolicy::lp_kwik(), RoundingPolicy::sa_correlated(3), RoundingPolicy::cmsy()] {
            let (c, cert) = derandomized_cluster(&g, &Fractional::Metric(&d), &policy).unwrap();
            verify_certificate(&g, &cert, &c).unwrap();
            assert!(cert.total_cost <= cert.bound + 1e-6);
            assert!((cert.lp_value - 2.0).abs() < 1e-12);
            let (c2, cert2) = derandomized_cluster(&g, &Fractional::Metric(&d), &policy).unwrap();
            assert_eq!(c, c2);
            assert_eq!(cert, cert2);
        }
    }

    #[test]
    fn tampered_certificates_fail() {
        let g = make_star_gap(3).unwrap();
        let d = Distances::from_fn(4, |u, _| if u == 0 { 0.5 } else { 1.0 });
        let (c, cert) =
            derandomized_cluster(&g, &Fractional::Metric(&d), &RoundingPolicy::lp_kwik()).unwrap();
        let mut bad = cert.clone();
        bad.total_cost += 1.0;
        assert!(verify_certificate(&g, &bad, &c).is_err());
        let mut bad = cert.clone();
        bad.steps[0].beta += 0.5;
        assert!(verify_certificate(&g, &bad, &c).is_err());
        assert!(verify_certificate(&g, &RoundingCertificate::from_json(&cert.to_json()).unwrap(), &c).is_ok());
    }
}
