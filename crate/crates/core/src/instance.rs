//! Complete signed graphs, clusterings, benchmark generators and the text
//! instance format.
//!
//! The file format is line oriented: the first non-comment line holds the
//! vertex count `n`, followed by exactly `n(n-1)/2` lines `u v s` with
//! `0 <= u < v < n` and `s` one of `+` or `-`. Lines starting with `#` are
//! comments and may appear anywhere. Pair lines may come in any order but
//! every pair must appear exactly once.
//!
//! Random instances are drawn with ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded
//! from a single `u64`, so a seed identifies an instance across builds and
//! platforms.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Label of an edge of the complete graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Index of the unordered pair `{u, v}` (u != v) in row-major upper
/// triangular order.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(b < n && a != b);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Number of unordered pairs over `n` vertices.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// A complete graph on vertices `0..n` with one sign per unordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedGraph {
    n: usize,
    plus: Vec<bool>,
}

impl SignedGraph {
    /// Builds a graph from a sign oracle evaluated on every pair `u < v`.
    pub fn from_fn(n: usize, mut sign: impl FnMut(usize, usize) -> Sign) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a graph needs at least one vertex"));
        }
        let mut plus = Vec::with_capacity(pair_count(n));
        for u in 0..n {
            for v in u + 1..n {
                plus.push(sign(u, v).is_plus());
            }
        }
        Ok(Self { n, plus })
    }

    /// Graph whose PLUS edges are exactly `plus_edges`; all other pairs are MINUS.
    pub fn from_plus_edges(n: usize, plus_edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::from_fn(n, |_, _| Sign::Minus)?;
        for &(u, v) in plus_edges {
            if u == v || u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) is not a pair of 0..{n}")));
            }
            g.plus[pair_index(n, u, v)] = true;
        }
        Ok(g)
    }

    pub fn complete(n: usize, sign: Sign) -> Result<Self> {
        Self::from_fn(n, |_, _| sign)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sign(&self, u: usize, v: usize) -> Sign {
        if self.plus[pair_index(self.n, u, v)] {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_plus(&self, u: usize, v: usize) -> bool {
        self.plus[pair_index(self.n, u, v)]
    }

    /// All pairs `(u, v, sign)` with `u < v`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, Sign)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v, self.sign(u, v))))
    }

    pub fn plus_count(&self) -> usize {
        self.plus.iter().filter(|&&p| p).count()
    }

    pub fn minus_count(&self) -> usize {
        self.plus.len() - self.plus_count()
    }

    /// Text serialization in the instance file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (u, v, s) in self.pairs() {
            out.push_str(&format!("{u} {v} {s}\n"));
        }
        out
    }

    /// Parses the instance file format.
    pub fn parse(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut n: Option<usize> = None;
        let mut seen: Vec<Option<bool>> = Vec::new();
        let mut filled = 0usize;
        let mut last_line = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(n) = n else {
                let parsed: usize = line
                    .parse()
                    .map_err(|_| perr(line_no, format!("expected vertex count, found {line:?}")))?;
                if parsed == 0 {
                    return Err(perr(line_no, "vertex count must be at least 1".into()));
                }
                n = Some(parsed);
                seen = vec![None; pair_count(parsed)];
                continue;
            };
            let mut fields = line.split_whitespace();
            let (Some(a), Some(b), Some(s), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(perr(line_no, format!("expected \"u v s\", found {line:?}")));
            };
            let u: usize = a
                .parse()
                .map_err(|_| perr(line_no, format!("bad vertex id {a:?}")))?;
            let v: usize = b
                .parse()
                .map_err(|_| perr(line_no, format!("bad vertex id {b:?}")))?;
            if u >= v || v >= n {
                return Err(perr(
                    line_no,
                    format!("pair ({u}, {v}) violates 0 <= u < v < n with n = {n}"),
                ));
            }
            let plus = match s {
                "+" => true,
                "-" => false,
                other => return Err(perr(line_no, format!("bad sign token {other:?}"))),
            };
            let slot = &mut seen[pair_index(n, u, v)];
            if slot.is_some() {
                return Err(perr(line_no, format!("duplicate pair ({u}, {v})")));
            }
            *slot = Some(plus);
            filled += 1;
        }
        let Some(n) = n else {
            return Err(perr(last_line.max(1), "missing vertex count".into()));
        };
        if filled != seen.len() {
            return Err(perr(
                last_line + 1,
                format!("incomplete graph: {filled} of {} pairs listed", seen.len()),
            ));
        }
        Ok(Self {
            n,
            plus: seen.into_iter().map(|s| s.unwrap_or(false)).collect(),
        })
    }
}

impl FromStr for SignedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// The star integrality-gap family: vertices `0..=k`, `(0, i)` PLUS for every
/// `i in 1..=k`, all other pairs MINUS.
pub fn make_star_gap(k: usize) -> Result<SignedGraph> {
    if k == 0 {
        return Err(invalid("star gap instance needs k >= 1"));
    }
    SignedGraph::from_fn(k + 1, |u, _| if u == 0 { Sign::Plus } else { Sign::Minus })
}

/// Each pair is PLUS independently with probability `p_plus`.
pub fn random_instance(n: usize, p_plus: f64, seed: u64) -> Result<SignedGraph> {
    if !(0.0..=1.0).contains(&p_plus) {
        return Err(invalid(format!("p_plus = {p_plus} is not in [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SignedGraph::from_fn(n, |_, _| {
        if rng.random_bool(p_plus) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    })
}

/// An assignment of every vertex to a cluster id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clustering {
    assignment: Vec<usize>,
}

impl Clustering {
    pub fn new(assignment: Vec<usize>) -> Self {
        Self { assignment }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).collect())
    }

    pub fn one_cluster(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    /// Builds a clustering from disjoint blocks covering `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (id, block) in blocks.iter().enumerate() {
            for &v in block {
                if v >= n {
                    return Err(invalid(format!("vertex {v} out of range 0..{n}")));
                }
                if assignment[v] != usize::MAX {
                    return Err(invalid(format!("vertex {v} appears in two blocks")));
                }
                assignment[v] = id;
            }
        }
        if let Some(v) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(invalid(format!("vertex {v} is not assigned to any block")));
        }
        Ok(Self::new(assignment))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn same_cluster(&self, u: usize, v: usize) -> bool {
        self.assignment[u] == self.assignment[v]
    }

    /// Clusters as sorted vertex lists, ordered by their smallest member.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (v, &c) in self.assignment.iter().enumerate() {
            match order.iter().position(|&id| id == c) {
                Some(i) => blocks[i].push(v),
                None => {
                    order.push(c);
                    blocks.push(vec![v]);
                }
            }
        }
        blocks
    }

    /// Relabels cluster ids to `0, 1, ...` in order of first appearance.
    pub fn normalized(&self) -> Self {
        let mut out = vec![0; self.len()];
        for (id, block) in self.blocks().iter().enumerate() {
            for &v in block {
                out[v] = id;
            }
        }
        Self::new(out)
    }
}

/// Number of PLUS edges cut plus MINUS edges kept inside a cluster.
pub fn clustering_cost(g: &SignedGraph, c: &Clustering) -> Result<u64> {
    if c.len() != g.n() {
        return Err(invalid(format!(
            "clustering covers {} vertices but the graph has {}",
            c.len(),
            g.n()
        )));
    }
    Ok(g.pairs()
        .filter(|&(u, v, s)| s.is_plus() != c.same_cluster(u, v))
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_shape() {
        let g = make_star_gap(4).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.plus_count(), 4);
        assert_eq!(g.minus_count(), 6);
        assert!((1..=4).all(|i| g.is_plus(0, i)));

        let g1 = make_star_gap(1).unwrap();
        assert_eq!(g1.n(), 2);
        assert_eq!(g1.plus_count(), 1);
        assert!(make_star_gap(0).is_err());
    }

    #[test]
    fn costs_on_small_cases() {
        let k4 = SignedGraph::complete(4, Sign::Plus).unwrap();
        assert_eq!(clustering_cost(&k4, &Clustering::one_cluster(4)).unwrap(), 0);

        let star2 = make_star_gap(2).unwrap();
        assert_eq!(clustering_cost(&star2, &Clustering::one_cluster(3)).unwrap(), 1);

        // {0,1},{2},{3},{4}: the cut PLUS edges (0,2),(0,3),(0,4) and nothing else.
        let star4 = make_star_gap(4).unwrap();
        let c = Clustering::from_blocks(5, &[vec![0, 1], vec![2], vec![3], vec![4]]).unwrap();
        assert_eq!(clustering_cost(&star4, &c).unwrap(), 3);

        assert!(clustering_cost(&star4, &Clustering::singletons(4)).is_err());
    }

    #[test]
    fn degenerate_generators() {
        let all_plus = random_instance(5, 1.0, 11).unwrap();
        assert_eq!(all_plus.plus_count(), 10);
        let all_minus = random_instance(5, 0.0, 11).unwrap();
        assert_eq!(all_minus.minus_count(), 10);
        assert_eq!(
            random_instance(8, 0.5, 7).unwrap(),
            random_instance(8, 0.5, 7).unwrap()
        );
        assert!(random_instance(3, 1.5, 0).is_err());
        assert!(random_instance(3, -0.1, 0).is_err());
    }

    #[test]
    fn serialize_smallest_star() {
        assert_eq!(make_star_gap(1).unwrap().to_text(), "2\n0 1 +\n");
    }

    #[test]
    fn parse_accepts_comments_and_any_order() {
        let text = "# header\n3\n1 2 -\n# mid\n0 2 +\n0 1 +\n";
        let g = SignedGraph::parse(text).unwrap();
        assert_eq!(g.n(), 3);
        assert!(g.is_plus(0, 1) && g.is_plus(0, 2) && !g.is_plus(1, 2));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = SignedGraph::parse("3\n0 1 +\n0 2 -\n").unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("incomplete graph")),
            other => panic!("unexpected {other:?}"),
        }
        let dup = SignedGraph::parse("3\n0 1 +\n0 1 -\n1 2 +\n").unwrap_err();
        assert_eq!(
            dup,
            Error::Parse { line: 3, message: "duplicate pair (0, 1)".into() }
        );
        let bad = SignedGraph::parse("2\n0 1 x\n").unwrap_err();
        assert!(matches!(bad, Error::Parse { line: 2, .. }));
        let range = SignedGraph::parse("2\n0 2 +\n").unwrap_err();
        assert!(matches!(range, Error::Parse { line: 2, .. }));
        let swapped = SignedGraph::parse("2\n1 0 +\n").unwrap_err();
        assert!(matches!(swapped, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn blocks_and_normalization() {
        let c = Clustering::new(vec![7, 3, 7, 9]);
        assert_eq!(c.blocks(), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(c.normalized().assignment(), &[0, 1, 0, 2]);
        assert!(Clustering::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(Clustering::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn pair_index_is_dense() {
        let n = 7;
        let mut seen = vec![false; pair_count(n)];
        for u in 0..n {
            for v in u + 1..n {
                let i = pair_index(n, u, v);
                assert_eq!(i, pair_index(n, v, u));
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }
}
