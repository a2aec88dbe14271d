//! Triangle-level cost/lp analysis of the pivot rounding, numeric checks of
//! the charging argument, and a brute-force optimum oracle.
//!
//! A triangle `{a, b, c}` carries a local distribution over the five
//! partitions of its vertices, written in shorthand as
//!
//! * `p = y_abc`, `q = y_a|b|c`,
//! * `x = y_ab|c`, `y = y_ac|b`, `z = y_bc|a`,
//!
//! with edges ordered `ab, ac, bc`. For a pivot `u` of the triangle,
//! `cost_u(vw)` is the probability that the opposite edge is violated and
//! `lp_u(vw)` is the probability that it is decided times its LP
//! contribution. `cost(T)` and `lp(T)` sum these over the three pivots; a
//! degenerate triangle `{u, v}` sums over both endpoints.
//!
//! Two rounding models are analysed:
//!
//! * [`Model::Ideal`]: every `+` neighbour of the pivot takes part in
//!   perfectly correlated rounding; `-` neighbours join with `1 - √x`.
//! * [`Model::Special`]: the actual join rules, with short and long `+`
//!   edges rounded independently and medium `+` edges perfectly correlated.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::{Clustering, Sign, SignedGraph};
use crate::partitions::partitions_of;
use crate::relaxations::{Distances, LocalDistribution, PartitionKey, DEFAULT_DELTA};
use crate::rounding::{join_probability, Join, RoundingPolicy};

/// Slack used when validating profiles and comparing against bounds.
pub const PROFILE_TOL: f64 = 1e-9;
/// Largest instance accepted by [`brute_force_opt`].
pub const BRUTE_FORCE_MAX_N: usize = 12;

const SAMPLE_CHUNK: usize = 4096;

/// Constants of the charging argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConstants {
    pub delta: f64,
    pub eta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub zeta_l: f64,
    pub zeta_u: f64,
    /// Lower bound `2δ²` on `lp(T)` for triangles rounded with correlation.
    pub floor: f64,
}

impl Default for AnalysisConstants {
    fn default() -> Self {
        Self::new(DEFAULT_DELTA, 1.0 / 12.0, 0.054)
    }
}

impl AnalysisConstants {
    pub fn new(delta: f64, eta: f64, gamma: f64) -> Self {
        let zeta_l = 2.0 * (0.5 - eta).powi(2);
        let zeta_u = 2.0 * (0.5 + 2.0 * eta) * (0.5 + eta) + eta;
        // τ balances 2 - τ/ζ_u against 2 - γ + 3τ/ζ_l at the printed
        // four-digit values of ζ_u and ζ_l.
        let tau = gamma / (1.0 / 0.8612 + 3.0 / 0.3472);
        Self { delta, eta, gamma, tau, zeta_l, zeta_u, floor: 2.0 * delta * delta }
    }

    /// The ratio `2 - τ/0.8612` obtained after charging.
    pub fn final_ratio(&self) -> f64 {
        2.0 - self.tau / 0.8612
    }

    /// Upper end of the chargeable window, `1/2 + 5η`.
    pub fn chargeable_limit(&self) -> f64 {
        0.5 + 5.0 * self.eta
    }

    fn in_band(&self, x: f64) -> bool {
        x >= 0.5 - self.eta && x <= 0.5 + self.eta
    }
}

// ---------------------------------------------------------------------------
// Profiles

/// Sign pattern of a triangle or a degenerate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Signs of the edges `ab, ac, bc`.
    Triangle([Sign; 3]),
    Degenerate(Sign),
}

/// Triangle type by number of `+` edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleType {
    Ppp,
    Ppm,
    Pmm,
    Mmm,
    Degenerate,
}

impl fmt::Display for TriangleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriangleType::Ppp => "+++",
            TriangleType::Ppm => "++-",
            TriangleType::Pmm => "+--",
            TriangleType::Mmm => "---",
            TriangleType::Degenerate => "degenerate",
        })
    }
}

const EDGES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn edge_index(u: usize, v: usize) -> usize {
    match (u.min(v), u.max(v)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => unreachable!("not a triangle edge"),
    }
}

/// A triangle (or degenerate pair) with its local distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleProfile {
    pub shape: Shape,
    pub p: f64,
    pub q: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TriangleProfile {
    /// Triangle from the shorthand atoms.
    pub fn triangle(signs: [Sign; 3], p: f64, q: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let t = Self { shape: Shape::Triangle(signs), p, q, x, y, z };
        t.validate()?;
        Ok(t)
    }

    /// Triangle whose vertices are at the given distances `x_ab, x_ac, x_bc`
    /// with `q = 0` when possible. Fails when no distribution has these
    /// distances.
    pub fn from_distances(signs: [Sign; 3], d: [f64; 3]) -> Result<Self> {
        // y_e = x_e' + p for the atom on edge e; fix q = 0 when feasible,
        // otherwise p = 0.
        let ys = d.map(|v| 1.0 - v);
        let sum: f64 = ys.iter().sum();
        let (p, q) = if sum >= 1.0 { ((sum - 1.0) / 2.0, 0.0) } else { (0.0, 1.0 - sum) };
        Self::triangle(signs, p, q, ys[0] - p, ys[1] - p, ys[2] - p)
    }

    /// Pair whose endpoints share a block with probability `together`.
    pub fn degenerate(sign: Sign, together: f64) -> Result<Self> {
        let t = Self { shape: Shape::Degenerate(sign), p: together, q: 1.0 - together, x: 0.0, y: 0.0, z: 0.0 };
        t.validate()?;
        Ok(t)
    }

    /// Profile of a local distribution over three (or two) vertices, with
    /// edge signs in the order of the sorted ground set.
    pub fn from_distribution(signs: &[Sign], dist: &LocalDistribution) -> Result<Self> {
        let g = dist.ground();
        match (g.len(), signs.len()) {
            (2, 1) => Self::degenerate(signs[0], dist.prob_together(g[0], g[1])),
            (3, 3) => {
                let (a, b, c) = (g[0], g[1], g[2]);
                let key = |blocks: Vec<Vec<usize>>| PartitionKey::new(blocks).map(|k| dist.prob(&k));
                Self::triangle(
                    [signs[0], signs[1], signs[2]],
                    key(vec![vec![a, b, c]])?,
                    key(vec![vec![a], vec![b], vec![c]])?,
                    key(vec![vec![a, b], vec![c]])?,
                    key(vec![vec![a, c], vec![b]])?,
                    key(vec![vec![a], vec![b, c]])?,
                )
            }
            _ => Err(invalid("profiles need three vertices with three signs or two with one")),
        }
    }

    /// Local distribution on vertices `0, 1, 2` (or `0, 1`).
    pub fn distribution(&self) -> LocalDistribution {
        let k = |b: Vec<Vec<usize>>| PartitionKey::new(b).expect("valid blocks");
        match self.shape {
            Shape::Degenerate(_) => LocalDistribution::from_atoms(
                &[0, 1],
                &[(k(vec![vec![0, 1]]), self.p), (k(vec![vec![0], vec![1]]), self.q)],
            ),
            Shape::Triangle(_) => LocalDistribution::from_atoms(
                &[0, 1, 2],
                &[
                    (k(vec![vec![0, 1, 2]]), self.p),
                    (k(vec![vec![0], vec![1], vec![2]]), self.q),
                    (k(vec![vec![0, 1], vec![2]]), self.x),
                    (k(vec![vec![0, 2], vec![1]]), self.y),
                    (k(vec![vec![0], vec![1, 2]]), self.z),
                ],
            ),
        }
        .expect("profile atoms cover the ground set")
    }

    pub fn validate(&self) -> Result<()> {
        let atoms = [self.p, self.q, self.x, self.y, self.z];
        if atoms.iter().any(|a| !a.is_finite() || *a < -PROFILE_TOL) {
            return Err(invalid(format!("profile has a negative or non-finite atom: {atoms:?}")));
        }
        let total: f64 = atoms.iter().sum();
        if (total - 1.0).abs() > PROFILE_TOL {
            return Err(invalid(format!("profile atoms sum to {total}")));
        }
        if let Shape::Degenerate(_) = self.shape {
            if self.x != 0.0 || self.y != 0.0 || self.z != 0.0 {
                return Err(invalid("degenerate profile with triangle atoms"));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> TriangleType {
        match self.shape {
            Shape::Degenerate(_) => TriangleType::Degenerate,
            Shape::Triangle(s) => match s.iter().filter(|s| s.is_plus()).count() {
                3 => TriangleType::Ppp,
                2 => TriangleType::Ppm,
                1 => TriangleType::Pmm,
                _ => TriangleType::Mmm,
            },
        }
    }

    fn vertex_count(&self) -> usize {
        match self.shape {
            Shape::Triangle(_) => 3,
            Shape::Degenerate(_) => 2,
        }
    }

    fn sign(&self, u: usize, v: usize) -> Sign {
        match self.shape {
            Shape::Triangle(s) => s[edge_index(u, v)],
            Shape::Degenerate(s) => s,
        }
    }

    /// `y_uv`, the probability that `u` and `v` share a block.
    pub fn together(&self, u: usize, v: usize) -> f64 {
        match self.shape {
            Shape::Degenerate(_) => self.p,
            Shape::Triangle(_) => {
                let atom = [self.x, self.y, self.z][edge_index(u, v)];
                (atom + self.p).clamp(0.0, 1.0)
            }
        }
    }

    /// `x_uv = 1 - y_uv`.
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        1.0 - self.together(u, v)
    }

    /// Distances `x_ab, x_ac, x_bc`; degenerate pairs repeat `x_uv`.
    pub fn distances(&self) -> [f64; 3] {
        match self.shape {
            Shape::Degenerate(_) => [self.distance(0, 1); 3],
            Shape::Triangle(_) => EDGES.map(|(u, v)| self.distance(u, v)),
        }
    }

    fn all_together(&self) -> f64 {
        self.p.max(0.0)
    }
}

/// Ratio with `0/0 := 0` and `c/0 := ∞`.
pub fn ratio(cost: f64, lp: f64) -> f64 {
    const ZERO: f64 = 1e-14;
    if lp > ZERO {
        cost / lp
    } else if cost > ZERO {
        f64::INFINITY
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Closed forms

/// `(cost^i(T), lp^i(T))` from the per-type closed forms.
pub fn ideal_cost_lp(t: &TriangleProfile) -> Result<(f64, f64)> {
    t.validate()?;
    let sq = |v: f64| v.clamp(0.0, 1.0).sqrt();
    let out = match (t.kind(), t.shape) {
        (TriangleType::Degenerate, Shape::Degenerate(sign)) => {
            let x = t.distance(0, 1);
            match sign {
                Sign::Plus => (2.0 * x, 2.0 * x),
                Sign::Minus => (2.0 * (1.0 - sq(x)), 2.0 * (1.0 - x)),
            }
        }
        (TriangleType::Ppp, _) => {
            let (p, q) = (t.p, t.q);
            let cost = 2.0 * (t.x + t.y + t.z);
            let lp: f64 = [t.x, t.y, t.z].iter().map(|s| (1.0 - s - p) * (1.0 - s - q)).sum();
            (cost, lp)
        }
        (TriangleType::Mmm, _) => {
            let [x, y, z] = t.distances().map(sq);
            let cost = (1.0 - x) * (1.0 - y) + (1.0 - x) * (1.0 - z) + (1.0 - y) * (1.0 - z);
            let lp = (1.0 - z * z) * (1.0 - x * y) + (1.0 - y * y) * (1.0 - z * x) + (1.0 - x * x) * (1.0 - z * y);
            (cost, lp)
        }
        (TriangleType::Pmm, Shape::Triangle(s)) => {
            let e = s.iter().position(|s| s.is_plus()).expect("one + edge");
            let (a, b) = EDGES[e];
            let c = 3 - a - b;
            let x = t.distance(a, b);
            let (ry, rz) = (sq(t.distance(a, c)), sq(t.distance(b, c)));
            let (y, z) = (ry * ry, rz * rz);
            let cost = ry * (1.0 - rz) + rz * (1.0 - ry) + (1.0 - x) * (2.0 - rz - ry);
            let lp = x * (1.0 - ry * rz) + (1.0 - y) * (1.0 - x * rz) + (1.0 - z) * (1.0 - x * ry);
            (cost, lp)
        }
        (TriangleType::Ppm, Shape::Triangle(s)) => {
            let e = s.iter().position(|s| !s.is_plus()).expect("one - edge");
            let (b, c) = EDGES[e];
            let a = 3 - b - c;
            let (yx, yy, yz) = (t.together(a, b), t.together(a, c), t.together(b, c));
            let p = t.all_together();
            let (ca, cb, cc) = (1.0 - yx, 1.0 - yy, sq(1.0 - yz));
            let cost = p + cc * (2.0 * yx + 2.0 * yy - 2.0) + ca + cb;
            let lp = yz * (yx - p + yy) + ca + cb - 2.0 * ca * cb * cc;
            (cost, lp)
        }
        _ => unreachable!("shape and type agree"),
    };
    Ok((out.0.max(0.0), out.1.max(0.0)))
}

/// Rounding model for triangle-level evaluation and simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ideal,
    Special { delta: f64 },
}

impl Model {
    /// Join rule of a vertex at distance `x` from the pivot.
    fn join(&self, sign: Sign, x: f64) -> Result<Join> {
        match *self {
            Model::Ideal if sign.is_plus() => Ok(Join::Correlated),
            Model::Ideal => join_probability(&RoundingPolicy::sa_correlated(3), sign, x),
            Model::Special { delta } => {
                let policy = RoundingPolicy { delta, ..RoundingPolicy::sa_correlated(3) };
                policy.validate()?;
                join_probability(&policy, sign, x)
            }
        }
    }
}

/// Per-pivot terms `(cost_u(vw), lp_u(vw))` for `u` ranging over the
/// vertices of the profile.
pub fn pivot_terms(t: &TriangleProfile, model: Model) -> Result<Vec<(f64, f64)>> {
    t.validate()?;
    let k = t.vertex_count();
    let mut out = Vec::with_capacity(k);
    for u in 0..k {
        let others: Vec<usize> = (0..k).filter(|&v| v != u).collect();
        if let [v] = others[..] {
            let pv = join_marginal(t, model, u, v)?;
            let x = t.distance(u, v);
            let (cost, contrib) = match t.sign(u, v) {
                Sign::Plus => (1.0 - pv, x),
                Sign::Minus => (pv, 1.0 - x),
            };
            out.push((cost, contrib));
            continue;
        }
        let (v, w) = (others[0], others[1]);
        let jv = model.join(t.sign(u, v), t.distance(u, v))?;
        let jw = model.join(t.sign(u, w), t.distance(u, w))?;
        let (pv, pw) = (join_marginal(t, model, u, v)?, join_marginal(t, model, u, w)?);
        let both = match (jv, jw) {
            (Join::Correlated, Join::Correlated) => t.all_together(),
            _ => pv * pw,
        };
        let one_only = (pv - both) + (pw - both);
        let any = pv + pw - both;
        let x = t.distance(v, w);
        let (cost, lp) = match t.sign(v, w) {
            Sign::Plus => (one_only, any * x),
            Sign::Minus => (both, any * (1.0 - x)),
        };
        out.push((cost.max(0.0), lp.max(0.0)));
    }
    Ok(out)
}

fn join_marginal(t: &TriangleProfile, model: Model, u: usize, v: usize) -> Result<f64> {
    Ok(match model.join(t.sign(u, v), t.distance(u, v))? {
        Join::Independent(p) => p,
        Join::Correlated => t.together(u, v),
    })
}

/// `(cost, lp)` of a profile under `model`, summed over pivots.
pub fn model_cost_lp(t: &TriangleProfile, model: Model) -> Result<(f64, f64)> {
    let terms = pivot_terms(t, model)?;
    Ok(terms.iter().fold((0.0, 0.0), |acc, (c, l)| (acc.0 + c, acc.1 + l)))
}

/// `(cost^s(T), lp^s(T))`: the actual join rules with perfect correlation
/// among medium `+` neighbours.
pub fn special_cost_lp(t: &TriangleProfile, delta: f64) -> Result<(f64, f64)> {
    model_cost_lp(t, Model::Special { delta })
}

/// Monte-Carlo estimate of `cost(T)` and `lp(T)` with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: usize,
    pub cost: f64,
    pub cost_se: f64,
    pub lp: f64,
    pub lp_se: f64,
}

/// Simulates each pivot of the triangle `trials` times: correlated
/// neighbours follow one partition drawn from the local distribution,
/// the others flip their own coins.
pub fn simulate_cost_lp<R: Rng + ?Sized>(
    t: &TriangleProfile,
    model: Model,
    trials: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    t.validate()?;
    if trials < 2 {
        return Err(invalid("simulation needs at least two trials"));
    }
    let k = t.vertex_count();
    let atoms = [t.p, t.q, t.x, t.y, t.z].map(|a| a.max(0.0));
    let mass: f64 = atoms.iter().sum();
    // Block label of each vertex per atom, in the order p, q, x, y, z.
    const LABELS: [[u8; 3]; 5] = [[0, 0, 0], [0, 1, 2], [0, 0, 1], [0, 1, 0], [0, 1, 1]];
    let mut rules = vec![[Join::Independent(0.0); 3]; k];
    for (u, row) in rules.iter_mut().enumerate() {
        for v in (0..k).filter(|&v| v != u) {
            row[v] = model.join(t.sign(u, v), t.distance(u, v))?;
        }
    }
    let (mut sc, mut sc2, mut sl, mut sl2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..trials {
        let (mut cost, mut lp) = (0.0, 0.0);
        for u in 0..k {
            let mut draw = rng.random::<f64>() * mass;
            let mut atom = 4;
            for (i, a) in atoms.iter().enumerate() {
                if draw < *a {
                    atom = i;
                    break;
                }
                draw -= a;
            }
            let labels = if k == 2 {
                if atom == 0 { [0, 0, 0] } else { [0, 1, 2] }
            } else {
                LABELS[atom]
            };
            let mut joined = [false; 3];
            for v in (0..k).filter(|&v| v != u) {
                joined[v] = match rules[u][v] {
                    Join::Independent(p) => rng.random::<f64>() < p,
                    Join::Correlated => labels[u] == labels[v],
                };
            }
            if k == 2 {
                let v = 1 - u;
                let x = t.distance(u, v);
                match t.sign(u, v) {
                    Sign::Plus => {
                        cost += f64::from(u8::from(!joined[v]));
                        lp += x;
                    }
                    Sign::Minus => {
                        cost += f64::from(u8::from(joined[v]));
                        lp += 1.0 - x;
                    }
                }
                continue;
            }
            let (v, w) = match u {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let x = t.distance(v, w);
            let violated = match t.sign(v, w) {
                Sign::Plus => joined[v] != joined[w],
                Sign::Minus => joined[v] && joined[w],
            };
            if violated {
                cost += 1.0;
            }
            if joined[v] || joined[w] {
                lp += if t.sign(v, w).is_plus() { x } else { 1.0 - x };
            }
        }
        sc += cost;
        sc2 += cost * cost;
        sl += lp;
        sl2 += lp * lp;
    }
    let n = trials as f64;
    let se = |s: f64, s2: f64| {
        let mean = s / n;
        ((s2 / n - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt()
    };
    Ok(McEstimate { trials, cost: sc / n, cost_se: se(sc, sc2), lp: sl / n, lp_se: se(sl, sl2) })
}

// ---------------------------------------------------------------------------
// Classification

/// Classification of a triangle relative to a designated center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: TriangleType,
    pub bad: bool,
    pub chargeable: bool,
}

/// Classifies a profile. `center` selects the vertex incident on the two
/// band edges; `None` tries every vertex. Degenerate profiles are
/// chargeable when they are a `+` edge inside the band.
pub fn classify_triangle(t: &TriangleProfile, c: &AnalysisConstants, center: Option<usize>) -> Classification {
    let kind = t.kind();
    if let Shape::Degenerate(sign) = t.shape {
        let chargeable = sign.is_plus() && c.in_band(t.distance(0, 1));
        return Classification { kind, bad: false, chargeable };
    }
    let centers: Vec<usize> = match center {
        Some(u) if u < 3 => vec![u],
        Some(_) => vec![],
        None => vec![0, 1, 2],
    };
    let mut bad = false;
    let mut chargeable = false;
    for u in centers {
        let (v, w) = match u {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let spokes = [v, w]
            .iter()
            .all(|&o| t.sign(u, o).is_plus() && c.in_band(t.distance(u, o)));
        if !spokes {
            continue;
        }
        let far = t.distance(v, w);
        if !t.sign(v, w).is_plus() && far > 1.0 - c.eta {
            bad = true;
        }
        if far <= c.chargeable_limit() {
            chargeable = true;
        }
    }
    Classification { kind, bad, chargeable }
}

/// True for a `++-` triangle that is bad at its apex.
pub fn is_bad(t: &TriangleProfile, c: &AnalysisConstants) -> bool {
    classify_triangle(t, c, None).bad
}

// ---------------------------------------------------------------------------
// Sweeps

/// Row of the bound tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRow {
    Ppp,
    Pmm,
    Mmm,
    /// All `++-` triangles (bound 2, attained by bad ones).
    Ppm,
    PpmNotBad,
    Degenerate,
}

impl SweepRow {
    pub const ALL: [SweepRow; 6] =
        [SweepRow::Ppp, SweepRow::Pmm, SweepRow::Mmm, SweepRow::Ppm, SweepRow::PpmNotBad, SweepRow::Degenerate];

    pub fn name(&self) -> &'static str {
        match self {
            SweepRow::Ppp => "ppp",
            SweepRow::Pmm => "pmm",
            SweepRow::Mmm => "mmm",
            SweepRow::Ppm => "ppm",
            SweepRow::PpmNotBad => "ppm-notbad",
            SweepRow::Degenerate => "deg",
        }
    }

    fn signs(&self) -> [Sign; 3] {
        use Sign::{Minus as M, Plus as P};
        match self {
            SweepRow::Ppp => [P, P, P],
            SweepRow::Pmm => [P, M, M],
            SweepRow::Mmm => [M, M, M],
            SweepRow::Ppm | SweepRow::PpmNotBad => [P, P, M],
            SweepRow::Degenerate => [P, P, P],
        }
    }

    /// Whether the table bound is expected to be nearly attained.
    pub fn expects_witness(&self, table: Table) -> bool {
        table == Table::Ideal && matches!(self, SweepRow::Ppp | SweepRow::Mmm | SweepRow::Ppm)
    }

    pub fn bound(&self, table: Table, c: &AnalysisConstants) -> f64 {
        match (table, self) {
            (_, SweepRow::Mmm) | (_, SweepRow::Degenerate) => 1.0,
            (_, SweepRow::Ppm) => 2.0,
            (_, SweepRow::PpmNotBad) => 2.0 - c.gamma,
            (Table::Ideal, SweepRow::Ppp) | (Table::Ideal, SweepRow::Pmm) => 1.5,
            (Table::Special, SweepRow::Ppp) => 1.9,
            (Table::Special, SweepRow::Pmm) => 1.65,
        }
    }
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepRow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppp" | "+++" => Ok(SweepRow::Ppp),
            "pmm" | "+--" => Ok(SweepRow::Pmm),
            "mmm" | "---" => Ok(SweepRow::Mmm),
            "ppm" | "++-" => Ok(SweepRow::Ppm),
            "ppm-notbad" | "ppm_not_bad" => Ok(SweepRow::PpmNotBad),
            "deg" | "degenerate" => Ok(SweepRow::Degenerate),
            other => Err(invalid(format!("unknown triangle type `{other}`"))),
        }
    }
}

/// Which bound table a sweep checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    /// `cost^i / lp^i`.
    Ideal,
    /// `cost^s / lp^s`.
    Special,
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Table::Ideal),
            "special" | "short" => Ok(Table::Special),
            other => Err(invalid(format!("unknown table `{other}`"))),
        }
    }
}

/// Sampling parameters of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Dirichlet(1, ..., 1) draws over the partition atoms.
    pub samples: usize,
    /// Boundary grid with atoms in multiples of `1/grid`; 0 disables it.
    pub grid: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { samples: 100_000, grid: 60, seed: 0 }
    }
}

/// Outcome of sweeping one table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub table: Table,
    pub row: SweepRow,
    /// Profiles evaluated (after filtering to the row).
    pub samples: usize,
    pub grid_points: usize,
    pub max_ratio: f64,
    pub argmax: Option<TriangleProfile>,
    pub bound: f64,
    /// `bound - max_ratio`.
    pub gap: f64,
    pub pass: bool,
}

impl SweepReport {
    /// Errors with the offending profile when the bound is violated.
    pub fn check(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::Verification(format!(
                "{:?} table row {}: ratio {} exceeds {} at {:?}",
                self.table, self.row, self.max_ratio, self.bound, self.argmax
            )))
        }
    }
}

fn row_profile(row: SweepRow, atoms: &[f64]) -> Option<TriangleProfile> {
    let t = if row == SweepRow::Degenerate {
        // Alternate the sign so both kinds of pairs are covered.
        let sign = if atoms[2] < 0.5 { Sign::Plus } else { Sign::Minus };
        TriangleProfile { shape: Shape::Degenerate(sign), p: atoms[0], q: atoms[1], x: 0.0, y: 0.0, z: 0.0 }
    } else {
        TriangleProfile {
            shape: Shape::Triangle(row.signs()),
            p: atoms[0],
            q: atoms[1],
            x: atoms[2],
            y: atoms[3],
            z: atoms[4],
        }
    };
    Some(t)
}

fn evaluate(table: Table, t: &TriangleProfile, c: &AnalysisConstants) -> f64 {
    let r = match table {
        Table::Ideal => ideal_cost_lp(t),
        Table::Special => special_cost_lp(t, c.delta),
    };
    r.map_or(f64::INFINITY, |(cost, lp)| ratio(cost, lp))
}

/// Compositions of `m` into `parts` nonnegative parts, scaled by `1/m`.
fn simplex_grid(m: usize, parts: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<f64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.iter().map(|&k| k as f64 / m as f64).collect());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, m, out);
        }
    }
    if m > 0 && parts > 0 {
        rec(0, m, &mut cur, m, &mut out);
    }
    out
}

/// Dirichlet(α, ..., α) draw of length `k`.
fn dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize, alpha: f64) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    loop {
        let g: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let s: f64 = g.iter().sum();
        if s > 0.0 {
            return g.into_iter().map(|v| v / s).collect();
        }
    }
}

/// Per-chunk generator, independent of the thread count.
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Maximum observed ratio of one table row over Dirichlet samples and a
/// boundary grid.
pub fn sweep_ratio_bounds(
    row: SweepRow,
    table: Table,
    c: &AnalysisConstants,
    cfg: &SweepConfig,
) -> Result<SweepReport> {
    if cfg.samples == 0 && cfg.grid == 0 {
        return Err(invalid("sweep needs samples or a grid"));
    }
    let parts = if row == SweepRow::Degenerate { 2 } else { 5 };
    let keep = |t: &TriangleProfile| row != SweepRow::PpmNotBad || !is_bad(t, c);

    let mut grid_profiles: Vec<TriangleProfile> = Vec::new();
    for atoms in simplex_grid(cfg.grid, parts) {
        if row == SweepRow::Degenerate {
            for flip in [0.0, 1.0] {
                let t = row_profile(row, &[atoms[0], atoms[1], flip]).expect("grid profile");
                grid_profiles.push(t);
            }
        } else if let Some(t) = row_profile(row, &atoms) {
            grid_profiles.push(t);
        }
    }
    grid_profiles.retain(|t| keep(t));

    let grid_best = grid_profiles
        .par_iter()
        .enumerate()
        .map(|(i, t)| (evaluate(table, t, c), i))
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if better(a, b) { a } else { b });

    let chunks = cfg.samples.div_ceil(SAMPLE_CHUNK);
    let sampled: Vec<(usize, f64, Option<TriangleProfile>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(cfg.seed, chunk as u64);
            let todo = SAMPLE_CHUNK.min(cfg.samples - chunk * SAMPLE_CHUNK);
            let mut kept = 0;
            let mut best = (f64::NEG_INFINITY, None);
            for _ in 0..todo {
                let mut atoms = dirichlet(&mut rng, parts, 1.0);
                if row == SweepRow::Degenerate {
                    atoms.push(rng.random::<f64>());
                }
                let Some(t) = row_profile(row, &atoms) else { continue };
                if !keep(&t) {
                    continue;
                }
                kept += 1;
                let r = evaluate(table, &t, c);
                if r > best.0 {
                    best = (r, Some(t));
                }
            }
            (kept, best.0, best.1)
        })
        .collect();

    let mut samples = grid_profiles.len();
    let mut max_ratio = grid_best.0;
    let mut argmax = grid_profiles.get(grid_best.1).copied();
    for (kept, r, t) in sampled {
        samples += kept;
        if r > max_ratio {
            max_ratio = r;
            argmax = t;
        }
    }
    if argmax.is_none() {
        max_ratio = 0.0;
    }
    let bound = row.bound(table, c);
    Ok(SweepReport {
        table,
        row,
        samples,
        grid_points: grid_profiles.len(),
        max_ratio,
        argmax,
        bound,
        gap: bound - max_ratio,
        pass: max_ratio <= bound + PROFILE_TOL,
    })
}

// ---------------------------------------------------------------------------
// Spot values from the closed forms

/// `++-` ratio along `z = 0`, `w = 1 - p`, `x = y`: the curve
/// `(2p√(1-p) + 1) / (1 - (1-p)²√(1-p)/2)`.
pub fn ppm_curve_ratio(p: f64) -> Result<f64> {
    let s = (1.0 - p) / 2.0;
    let t = TriangleProfile::triangle(SweepRow::Ppm.signs(), p, 0.0, s, s, 0.0)?;
    let (c, l) = ideal_cost_lp(&t)?;
    Ok(ratio(c, l))
}

/// `++-` ratio along `w = 0`, `z = 0` (only `p` and `q` carry mass).
pub fn ppm_w0_ratio(p: f64) -> Result<f64> {
    let t = TriangleProfile::triangle(SweepRow::Ppm.signs(), p, 1.0 - p, 0.0, 0.0, 0.0)?;
    let (c, l) = ideal_cost_lp(&t)?;
    Ok(ratio(c, l))
}

/// `+--` ratio with `x_bc = 1`, `x_ac = 1 - x_ab`, as a function of
/// `X = x_ab`.
pub fn pmm_z1_ratio(x: f64) -> Result<f64> {
    let t = TriangleProfile::triangle(SweepRow::Pmm.signs(), 0.0, 0.0, 1.0 - x, x, 0.0)?;
    let (c, l) = ideal_cost_lp(&t)?;
    Ok(ratio(c, l))
}

/// Maximizer and maximum of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    let m = (a + b) / 2.0;
    (m, f(m))
}

/// Spot values recomputed from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotValues {
    /// `++-` curve at `p = η`.
    pub ppm_curve_at_eta: f64,
    /// `++-` curve at `p = 0`.
    pub ppm_curve_at_zero: f64,
    pub pmm_argmax: f64,
    pub pmm_max: f64,
    pub ppm_w0_argmax: f64,
    pub ppm_w0_max: f64,
}

pub fn spot_values(c: &AnalysisConstants) -> Result<SpotValues> {
    let eval = |f: fn(f64) -> Result<f64>| move |v: f64| f(v).unwrap_or(f64::NEG_INFINITY);
    let (pmm_argmax, pmm_max) = golden_max(eval(pmm_z1_ratio), 0.0, 1.0);
    let (ppm_w0_argmax, ppm_w0_max) = golden_max(eval(ppm_w0_ratio), 0.0, 1.0);
    Ok(SpotValues {
        ppm_curve_at_eta: ppm_curve_ratio(c.eta)?,
        ppm_curve_at_zero: ppm_curve_ratio(0.0)?,
        pmm_argmax,
        pmm_max,
        ppm_w0_argmax,
        ppm_w0_max,
    })
}

// ---------------------------------------------------------------------------
// Charging claims

/// Outcome of a sampled claim check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim: String,
    pub attempts: usize,
    /// Samples meeting the hypotheses.
    pub checked: usize,
    pub violations: usize,
    /// Smallest observed slack of the conclusion.
    pub min_slack: f64,
    /// First violating witness, if any.
    pub witness: Option<Vec<f64>>,
    pub pass: bool,
}

impl ClaimReport {
    pub fn check(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::Verification(format!(
                "claim {}: {} violations, first witness {:?}",
                self.claim, self.violations, self.witness
            )))
        }
    }
}

/// Aggregated masses of a distribution on `{p, u, v, w}` by the set of
/// vertices in `p`'s block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QVector {
    pub q0: f64,
    pub qu: f64,
    pub qv: f64,
    pub qw: f64,
    pub quv: f64,
    pub quw: f64,
    pub qvw: f64,
    pub quvw: f64,
}

/// Distribution on the four vertices `p = 0, u = 1, v = 2, w = 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourPoint {
    atoms: Vec<(Vec<u8>, f64)>,
}

impl FourPoint {
    fn partitions() -> Vec<Vec<u8>> {
        partitions_of(&[0, 1, 2, 3])
            .into_iter()
            .map(|blocks| {
                let mut labels = vec![0u8; 4];
                for (i, b) in blocks.iter().enumerate() {
                    for &v in b {
                        labels[v] = i as u8;
                    }
                }
                labels
            })
            .collect()
    }

    /// Weights in the order of [`partitions_of`] on `[0, 1, 2, 3]`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let parts = Self::partitions();
        if weights.len() != parts.len() {
            return Err(invalid(format!("expected {} weights, got {}", parts.len(), weights.len())));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < -PROFILE_TOL) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid("four-point weights must form a distribution"));
        }
        Ok(Self { atoms: parts.into_iter().zip(weights.iter().copied()).collect() })
    }

    /// Mixture of clusterings of the four vertices given as labels.
    pub fn from_mixture(mixture: &[([u8; 4], f64)]) -> Result<Self> {
        let parts = Self::partitions();
        let mut w = vec![0.0; parts.len()];
        for (labels, m) in mixture {
            let canon = canonical_labels(labels);
            let i = parts.iter().position(|p| *p == canon).expect("every labelling is a partition");
            w[i] += m;
        }
        Self::from_weights(&w)
    }

    pub fn together(&self, a: usize, b: usize) -> f64 {
        self.atoms.iter().filter(|(l, _)| l[a] == l[b]).map(|a| a.1).sum()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        1.0 - self.together(a, b)
    }

    pub fn q_vector(&self) -> QVector {
        let mut q = QVector { q0: 0.0, qu: 0.0, qv: 0.0, qw: 0.0, quv: 0.0, quw: 0.0, qvw: 0.0, quvw: 0.0 };
        for (l, m) in &self.atoms {
            let with = |v: usize| l[v] == l[0];
            let slot = match (with(1), with(2), with(3)) {
                (false, false, false) => &mut q.q0,
                (true, false, false) => &mut q.qu,
                (false, true, false) => &mut q.qv,
                (false, false, true) => &mut q.qw,
                (true, true, false) => &mut q.quv,
                (true, false, true) => &mut q.quw,
                (false, true, true) => &mut q.qvw,
                (true, true, true) => &mut q.quvw,
            };
            *slot += m;
        }
        q
    }

    /// Whether `(p, u, v)` and `(p, v, w)` are both bad triangles centered
    /// at `p`, ignoring edge signs (the spokes are taken as `+`, `uv` and
    /// `vw` as `-`).
    pub fn meets_badbad_hypotheses(&self, c: &AnalysisConstants) -> bool {
        (1..4).all(|v| c.in_band(self.distance(0, v)))
            && self.distance(1, 2) > 1.0 - c.eta
            && self.distance(2, 3) > 1.0 - c.eta
    }
}

fn canonical_labels(labels: &[u8; 4]) -> Vec<u8> {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    labels
        .iter()
        .map(|&l| {
            if map[l as usize] == u8::MAX {
                map[l as usize] = next;
                next += 1;
            }
            map[l as usize]
        })
        .collect()
}

/// Samples four-point distributions with `u, v` and `v, w` mostly apart
/// and checks `q_uw >= 1/2 - 5η` and `x_uw <= 1/2 + 5η` whenever the two
/// bad-triangle hypotheses hold. Runs until at least `samples` distributions meet
/// the hypotheses or `100 * samples` attempts were made.
pub fn check_claim_badbad(samples: usize, seed: u64, c: &AnalysisConstants) -> Result<ClaimReport> {
    let parts = FourPoint::partitions();
    let apart: Vec<usize> = (0..parts.len()).filter(|&i| parts[i][1] != parts[i][2] && parts[i][2] != parts[i][3]).collect();
    let rest: Vec<usize> = (0..parts.len()).filter(|i| !apart.contains(i)).collect();
    // Feasible bases with every spoke at distance 1/2 and u, v and v, w
    // always apart.
    let bases: Vec<Vec<f64>> = [
        [([0u8, 0, 1, 0], 0.5), ([0, 1, 0, 2], 0.5)],
        [([0, 0, 1, 0], 0.5), ([0, 1, 0, 1], 0.5)],
    ]
    .iter()
    .map(|m| FourPoint::from_mixture(m).map(|f| f.atoms.iter().map(|a| a.1).collect()))
    .collect::<Result<_>>()?;
    let max_attempts = samples.saturating_mul(100).max(1);
    let q_floor = 0.5 - 5.0 * c.eta;
    let x_cap = c.chargeable_limit();

    #[derive(Default)]
    struct Acc {
        attempts: usize,
        checked: usize,
        violations: usize,
        min_slack: f64,
        witness: Option<Vec<f64>>,
    }
    let chunks = max_attempts.div_ceil(SAMPLE_CHUNK);
    let per_chunk_target = samples.div_ceil(chunks.max(1)).max(1);
    let accs: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let mut acc = Acc { min_slack: f64::INFINITY, ..Acc::default() };
            let budget = SAMPLE_CHUNK.min(max_attempts - chunk * SAMPLE_CHUNK);
            while acc.attempts < budget && acc.checked < per_chunk_target {
                acc.attempts += 1;
                let alpha = if rng.random::<bool>() { 1.0 } else { 0.3 };
                let good = dirichlet(&mut rng, apart.len(), alpha);
                let other = dirichlet(&mut rng, rest.len(), 1.0);
                let leak = rng.random::<f64>() * c.eta;
                let mut w = vec![0.0; parts.len()];
                for (i, &k) in apart.iter().enumerate() {
                    w[k] = (1.0 - leak) * good[i];
                }
                for (i, &k) in rest.iter().enumerate() {
                    w[k] = leak * other[i];
                }
                if rng.random::<bool>() {
                    // Pull towards a feasible base so most draws meet the
                    // hypotheses while the random part keeps variety.
                    let lambda: f64 = rng.random();
                    let mix: f64 = rng.random();
                    for (i, wi) in w.iter_mut().enumerate() {
                        let base = mix * bases[0][i] + (1.0 - mix) * bases[1][i];
                        *wi = lambda * *wi + (1.0 - lambda) * base;
                    }
                }
                let Ok(fp) = FourPoint::from_weights(&w) else { continue };
                if !fp.meets_badbad_hypotheses(c) {
                    continue;
                }
                acc.checked += 1;
                let q = fp.q_vector();
                let slack = (q.quw - q_floor).min(x_cap - fp.distance(1, 3));
                acc.min_slack = acc.min_slack.min(slack);
                if slack < -PROFILE_TOL {
                    acc.violations += 1;
                    if acc.witness.is_none() {
                        acc.witness = Some(vec![q.q0, q.qu, q.qv, q.qw, q.quv, q.quw, q.qvw, q.quvw]);
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = Acc { min_slack: f64::INFINITY, ..Acc::default() };
    for a in accs {
        // Stop counting once the requested number of samples is reached so
        // the report does not depend on scheduling.
        if total.checked >= samples {
            break;
        }
        total.attempts += a.attempts;
        total.checked += a.checked;
        total.violations += a.violations;
        total.min_slack = total.min_slack.min(a.min_slack);
        if total.witness.is_none() {
            total.witness = a.witness;
        }
    }
    Ok(ClaimReport {
        claim: "badbad".into(),
        attempts: total.attempts,
        checked: total.checked,
        violations: total.violations,
        min_slack: total.min_slack,
        witness: total.witness,
        pass: total.violations == 0,
    })
}

/// Small undirected graph on at most 64 vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<u64>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n > 64 {
            return Err(invalid(format!("graphs are limited to 64 vertices, got {n}")));
        }
        Ok(Self { n, adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n || u == v {
            return Err(invalid(format!("bad edge ({u}, {v}) for n = {}", self.n)));
        }
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn is_triangle_free(&self) -> bool {
        (0..self.n).all(|u| (0..self.n).filter(|&v| v > u && self.has_edge(u, v)).all(|v| self.adj[u] & self.adj[v] == 0))
    }

    /// Non-adjacent pairs with a common neighbour.
    pub fn distance_two_pairs(&self) -> usize {
        let mut count = 0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) && self.adj[u] & self.adj[v] != 0 {
                    count += 1;
                }
            }
        }
        count
    }
}

/// The graph of bad triangles centered at `p`: vertices are the `+`
/// neighbours of `p` at band distance, edges join pairs forming a bad
/// triangle with `p`. Returns the member list alongside the graph.
pub fn bad_graph(g: &SignedGraph, x: &Distances, p: usize, c: &AnalysisConstants) -> Result<(Vec<usize>, SimpleGraph)> {
    if x.n() != g.n() || p >= g.n() {
        return Err(invalid("distances and graph disagree or pivot out of range"));
    }
    let members: Vec<usize> = (0..g.n()).filter(|&u| u != p && g.is_plus(p, u) && c.in_band(x.get(p, u))).collect();
    let mut h = SimpleGraph::new(members.len())?;
    for (i, &u) in members.iter().enumerate() {
        for (j, &v) in members.iter().enumerate().skip(i + 1) {
            if !g.is_plus(u, v) && x.get(u, v) > 1.0 - c.eta {
                h.add_edge(i, j)?;
            }
        }
    }
    Ok((members, h))
}

/// Counts `(|E_p|, |F_p|, |V_p|)` for a triangle-free graph.
pub fn numbad_counts(h: &SimpleGraph) -> Result<(usize, usize, usize)> {
    if !h.is_triangle_free() {
        return Err(invalid("numbad counting needs a triangle-free graph"));
    }
    Ok((h.edge_count(), h.distance_two_pairs(), h.n()))
}

/// Random triangle-free graph on at most `max_n` vertices from one of
/// several generators.
pub fn random_triangle_free<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> SimpleGraph {
    let n = rng.random_range(1..=max_n.clamp(1, 64));
    let mut h = SimpleGraph::new(n).expect("n <= 64");
    match rng.random_range(0..4) {
        0 => {
            // Bipartite.
            let side: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let p: f64 = rng.random();
            for u in 0..n {
                for v in u + 1..n {
                    if side[u] != side[v] && rng.random::<f64>() < p {
                        h.add_edge(u, v).expect("valid edge");
                    }
                }
            }
        }
        1 => {
            // Random triangle-free process up to a random edge budget.
            let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            for i in (1..pairs.len()).rev() {
                pairs.swap(i, rng.random_range(0..=i));
            }
            let budget = rng.random_range(0..=pairs.len());
            for (u, v) in pairs.into_iter().take(budget) {
                if h.adj[u] & h.adj[v] == 0 {
                    h.add_edge(u, v).expect("valid edge");
                }
            }
        }
        2 => {
            // Star, path or even cycle.
            match rng.random_range(0..3) {
                0 => (1..n).for_each(|v| h.add_edge(0, v).expect("valid edge")),
                1 => (1..n).for_each(|v| h.add_edge(v - 1, v).expect("valid edge")),
                _ => {
                    (1..n).for_each(|v| h.add_edge(v - 1, v).expect("valid edge"));
                    if n >= 4 {
                        h.add_edge(n - 1, 0).expect("valid edge");
                    }
                }
            }
        }
        _ => {
            // Sparse G(n, p) with triangles broken by deleting an edge.
            let p = rng.random::<f64>() * 4.0 / n.max(1) as f64;
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < p {
                        h.add_edge(u, v).expect("valid edge");
                    }
                }
            }
            while let Some((u, v)) = first_triangle_edge(&h) {
                h.adj[u] &= !(1 << v);
                h.adj[v] &= !(1 << u);
            }
        }
    }
    h
}

fn first_triangle_edge(h: &SimpleGraph) -> Option<(usize, usize)> {
    (0..h.n).find_map(|u| (u + 1..h.n).find(|&v| h.has_edge(u, v) && h.adj[u] & h.adj[v] != 0).map(|v| (u, v)))
}

/// Checks `|E_p| <= |F_p| + |V_p|` on `trials` random triangle-free graphs.
pub fn check_claim_numbad(trials: usize, max_n: usize, seed: u64) -> Result<ClaimReport> {
    let results: Vec<(i64, Option<Vec<f64>>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = chunk_rng(seed, i as u64);
            let h = random_triangle_free(&mut rng, max_n);
            let (e, f, v) = numbad_counts(&h).expect("generator yields triangle-free graphs");
            let slack = (f + v) as i64 - e as i64;
            let witness = (slack < 0).then(|| vec![h.n as f64, e as f64, f as f64]);
            (slack, witness)
        })
        .collect();
    let violations = results.iter().filter(|r| r.0 < 0).count();
    Ok(ClaimReport {
        claim: "numbad".into(),
        attempts: trials,
        checked: trials,
        violations,
        min_slack: results.iter().map(|r| r.0 as f64).fold(f64::INFINITY, f64::min),
        witness: results.into_iter().find_map(|r| r.1),
        pass: violations == 0,
    })
}

// ---------------------------------------------------------------------------
// Brute force

/// Exact optimum by enumerating all set partitions. Among optimal
/// clusterings the one with the lexicographically least restricted-growth
/// labelling is returned.
pub fn brute_force_opt(g: &SignedGraph) -> Result<(Clustering, u64)> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::ResourceLimit(format!(
            "brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    if n == 0 {
        return Ok((Clustering::new(Vec::new()), 0));
    }
    let plus: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|v| u != v && g.is_plus(u, v)).collect()).collect();

    // Split the search on the labels of the first few vertices.
    let depth = n.min(4);
    let mut prefixes = Vec::new();
    let mut labels = vec![0u8; n];
    enumerate_prefixes(1, depth, 1, &mut labels, &mut prefixes);

    let best = prefixes
        .par_iter()
        .filter_map(|prefix| {
            let mut labels = vec![0u8; n];
            labels[..depth].copy_from_slice(prefix);
            let mut partial = 0u64;
            for i in 1..depth {
                partial += (0..i).map(|j| pair_cost(&plus, &labels, i, j)).sum::<u64>();
            }
            let blocks = prefix.iter().max().map_or(0, |m| m + 1);
            let mut best = (u64::MAX, Vec::new());
            search(&plus, depth, blocks, partial, &mut labels, &mut best);
            (best.0 != u64::MAX).then_some(best)
        })
        .reduce_with(|a, b| if (b.0, &b.1) < (a.0, &a.1) { b } else { a })
        .expect("at least one partition");
    let assignment = best.1.iter().map(|&l| l as usize).collect();
    Ok((Clustering::new(assignment), best.0))
}

fn enumerate_prefixes(i: usize, depth: usize, blocks: u8, labels: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if i == depth {
        out.push(labels[..depth].to_vec());
        return;
    }
    for l in 0..=blocks {
        labels[i] = l;
        enumerate_prefixes(i + 1, depth, blocks.max(l + 1), labels, out);
    }
}

#[inline]
fn pair_cost(plus: &[Vec<bool>], labels: &[u8], i: usize, j: usize) -> u64 {
    u64::from(plus[i][j] != (labels[i] == labels[j]))
}

fn search(plus: &[Vec<bool>], i: usize, blocks: u8, partial: u64, labels: &mut Vec<u8>, best: &mut (u64, Vec<u8>)) {
    if partial >= best.0 {
        return;
    }
    if i == labels.len() {
        *best = (partial, labels.clone());
        return;
    }
    for l in 0..=blocks {
        labels[i] = l;
        let add: u64 = (0..i).map(|j| pair_cost(plus, labels, i, j)).sum();
        search(plus, i + 1, blocks.max(l + 1), partial + add, labels, best);
    }
}
