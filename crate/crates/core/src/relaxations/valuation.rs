use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::key::PartitionKey;
use crate::error::{invalid, Error, Result};
use crate::instance::{pair_count, pair_index, Clustering};
use crate::partitions::{labels_to_blocks, subsets_of_size, RestrictedGrowth};

/// Symmetric pairwise distances `x_uv` in `[0, 1]`, with `x_vv = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    n: usize,
    values: Vec<f64>,
}

impl Distances {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != pair_count(n) {
            return Err(invalid(format!(
                "expected {} pair distances, got {}",
                pair_count(n),
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(pair_count(n));
        for u in 0..n {
            for v in u + 1..n {
                values.push(f(u, v));
            }
        }
        Self { n, values }
    }

    /// Distances of an integral clustering: 0 inside clusters, 1 across.
    pub fn from_clustering(c: &Clustering) -> Self {
        Self::from_fn(c.len(), |u, v| if c.same_cluster(u, v) { 0.0 } else { 1.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        if u == v {
            0.0
        } else {
            self.values[pair_index(self.n, u, v)]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest violation of `x_uv <= x_uw + x_wv` over all triples.
    pub fn max_triangle_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for u in 0..n {
            for v in u + 1..n {
                for w in 0..n {
                    if w != u && w != v {
                        worst = worst.max(self.get(u, v) - self.get(u, w) - self.get(w, v));
                    }
                }
            }
        }
        worst
    }
}

/// A probability vector over all set partitions of a small ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDistribution {
    ground: Vec<usize>,
    atoms: Vec<(PartitionKey, f64)>,
}

impl LocalDistribution {
    /// Builds a distribution from `(key, probability)` atoms over `ground`.
    /// Missing partitions get probability 0.
    pub fn from_atoms(ground: &[usize], atoms: &[(PartitionKey, f64)]) -> Result<Self> {
        let mut ground = ground.to_vec();
        ground.sort_unstable();
        ground.dedup();
        let mut map: HashMap<&PartitionKey, f64> = HashMap::new();
        for (k, p) in atoms {
            if k.support() != ground {
                return Err(invalid(format!("atom {k} is not a partition of {ground:?}")));
            }
            *map.entry(k).or_insert(0.0) += p;
        }
        let mut out = Vec::new();
        let mut rg = RestrictedGrowth::new(ground.len());
        while rg.advance() {
            let key = PartitionKey::from_canonical(labels_to_blocks(&ground, rg.labels()));
            let p = map.get(&key).copied().unwrap_or(0.0);
            out.push((key, p));
        }
        Ok(Self { ground, atoms: out })
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    /// Atoms in restricted-growth order of the sorted ground set.
    pub fn atoms(&self) -> &[(PartitionKey, f64)] {
        &self.atoms
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn prob(&self, key: &PartitionKey) -> f64 {
        self.atoms
            .iter()
            .find(|(k, _)| k == key)
            .map_or(0.0, |a| a.1)
    }

    /// Probability that `u` and `v` share a block.
    pub fn prob_together(&self, u: usize, v: usize) -> f64 {
        self.atoms
            .iter()
            .filter(|(k, _)| k.block_of(u) == k.block_of(v))
            .map(|a| a.1)
            .sum()
    }

    /// Marginal on `subset ⊆ ground`.
    pub fn marginal(&self, subset: &[usize]) -> Result<Self> {
        if let Some(v) = subset.iter().find(|v| !self.ground.contains(v)) {
            return Err(invalid(format!("vertex {v} is outside the ground set")));
        }
        let restricted: Vec<(PartitionKey, f64)> = self
            .atoms
            .iter()
            .map(|(k, p)| (k.restrict(subset), *p))
            .collect();
        Self::from_atoms(subset, &restricted)
    }

    /// Checks nonnegativity (within `tol`) and unit mass (within `1e-6`).
    pub fn validate(&self, tol: f64) -> Result<()> {
        if let Some((k, p)) = self.atoms.iter().find(|a| a.1 < -tol) {
            return Err(Error::Numeric(format!("negative mass {p} on {k}")));
        }
        let t = self.total();
        if (t - 1.0).abs() > 1e-6 {
            return Err(Error::Numeric(format!("local distribution sums to {t}")));
        }
        Ok(())
    }
}

/// Solution of an `r`-round Sherali-Adams relaxation: one value per
/// partition key of at most `r` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SaValuation {
    n: usize,
    rounds: usize,
    values: HashMap<PartitionKey, f64>,
}

#[derive(Serialize, Deserialize)]
struct ValuationJson {
    r: usize,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    blocks: Vec<Vec<usize>>,
    value: f64,
}

impl SaValuation {
    /// Wraps raw values. Keys larger than `rounds` are rejected; the empty
    /// key is forced to 1.
    pub fn new(n: usize, rounds: usize, values: HashMap<PartitionKey, f64>) -> Result<Self> {
        if let Some(k) = values.keys().find(|k| k.size() > rounds) {
            return Err(invalid(format!("key {k} exceeds {rounds} rounds")));
        }
        if let Some(k) = values.keys().find(|k| k.blocks().iter().flatten().any(|&v| v >= n)) {
            return Err(invalid(format!("key {k} mentions a vertex outside 0..{n}")));
        }
        let mut values = values;
        values.insert(PartitionKey::empty(), 1.0);
        Ok(Self { n, rounds, values })
    }

    /// The valuation induced by a probability mixture of clusterings. Every
    /// such mixture satisfies all Sherali-Adams constraints at every level.
    pub fn from_mixture(n: usize, rounds: usize, mixture: &[(Clustering, f64)]) -> Result<Self> {
        if rounds > n {
            return Err(invalid(format!("{rounds} rounds exceed {n} vertices")));
        }
        let mut values: HashMap<PartitionKey, f64> = HashMap::new();
        let all: Vec<usize> = (0..n).collect();
        for (c, w) in mixture {
            if c.len() != n {
                return Err(invalid("clustering size does not match n"));
            }
            for size in 1..=rounds {
                for subset in subsets_of_size(&all, size) {
                    let mut blocks: Vec<Vec<usize>> = Vec::new();
                    let mut ids: Vec<usize> = Vec::new();
                    for &v in &subset {
                        let id = c.cluster_of(v);
                        match ids.iter().position(|&x| x == id) {
                            Some(i) => blocks[i].push(v),
                            None => {
                                ids.push(id);
                                blocks.push(vec![v]);
                            }
                        }
                    }
                    *values.entry(PartitionKey::from_canonical(blocks)).or_insert(0.0) += w;
                }
            }
        }
        Self::new(n, rounds, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Raw stored value (unclamped), 0 for keys never stored.
    pub fn raw(&self, key: &PartitionKey) -> f64 {
        self.values.get(key).copied().unwrap_or(0.0)
    }

    /// Value clamped to `[0, 1]`.
    pub fn value(&self, key: &PartitionKey) -> f64 {
        self.raw(key).clamp(0.0, 1.0)
    }

    /// `y_uv`: probability that `u` and `v` share a cluster.
    pub fn y(&self, u: usize, v: usize) -> f64 {
        if u == v {
            1.0
        } else {
            self.value(&PartitionKey::together(u, v))
        }
    }

    /// `x_uv = 1 - y_uv`.
    pub fn x(&self, u: usize, v: usize) -> f64 {
        1.0 - self.y(u, v)
    }

    pub fn distances(&self) -> Distances {
        Distances::from_fn(self.n, |u, v| self.x(u, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PartitionKey, f64)> {
        self.values.iter().map(|(k, &v)| (k, v))
    }

    /// The local distribution over `set` (at most `rounds` vertices).
    pub fn local(&self, set: &[usize]) -> Result<LocalDistribution> {
        let mut ground = set.to_vec();
        ground.sort_unstable();
        ground.dedup();
        if ground.len() > self.rounds {
            return Err(invalid(format!(
                "local distribution over {} vertices needs more than {} rounds",
                ground.len(),
                self.rounds
            )));
        }
        if let Some(v) = ground.iter().find(|&&v| v >= self.n) {
            return Err(invalid(format!("vertex {v} outside 0..{}", self.n)));
        }
        let mut atoms = Vec::new();
        let mut rg = RestrictedGrowth::new(ground.len());
        while rg.advance() {
            let key = PartitionKey::from_canonical(labels_to_blocks(&ground, rg.labels()));
            let p = self.value(&key);
            atoms.push((key, p));
        }
        Ok(LocalDistribution { ground, atoms })
    }

    /// Largest `|y_{u|v} + y_{uv} - 1|` over all pairs.
    pub fn max_pair_normalization_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                let apart = PartitionKey::from_canonical(vec![vec![u], vec![v]]);
                let s = self.raw(&apart) + self.raw(&PartitionKey::together(u, v));
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }

    /// JSON of the form `{"r": .., "entries": [{"blocks": [[..]], "value": ..}]}`
    /// with entries sorted by key size, then lexicographically.
    pub fn to_json(&self) -> String {
        let mut keys: Vec<&PartitionKey> = self.values.keys().collect();
        keys.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        let doc = ValuationJson {
            r: self.rounds,
            entries: keys
                .into_iter()
                .map(|k| EntryJson { blocks: k.blocks().to_vec(), value: self.values[k] })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("valuation serializes")
    }

    /// Parses [`SaValuation::to_json`] output. The vertex count is taken from
    /// the largest vertex mentioned.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ValuationJson =
            serde_json::from_str(text).map_err(|e| invalid(format!("valuation JSON: {e}")))?;
        let mut values = HashMap::new();
        let mut n = 0;
        for e in doc.entries {
            if let Some(&m) = e.blocks.iter().flatten().max() {
                n = n.max(m + 1);
            }
            values.insert(PartitionKey::new(e.blocks)?, e.value);
        }
        Self::new(n, doc.r, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star2_mixture() -> SaValuation {
        // half the mass on {0,1}|{2}, half on {0,2}|{1}
        let a = Clustering::new(vec![0, 0, 1]);
        let b = Clustering::new(vec![0, 1, 0]);
        SaValuation::from_mixture(3, 3, &[(a, 0.5), (b, 0.5)]).unwrap()
    }

    #[test]
    fn pair_and_triple_locals() {
        let y = star2_mixture();
        let pair = y.local(&[0, 1]).unwrap();
        assert_eq!(pair.atoms().len(), 2);
        assert!((pair.total() - 1.0).abs() < 1e-12);
        assert!((pair.atoms()[0].1 - y.y(0, 1)).abs() < 1e-12);

        let tri = y.local(&[0, 1, 2]).unwrap();
        assert_eq!(tri.atoms().len(), 5);
        assert!((tri.total() - 1.0).abs() < 1e-12);
        assert_eq!(tri.prob(&PartitionKey::new(vec![vec![0, 1, 2]]).unwrap()), 0.0);
        assert!((y.x(1, 2) - 1.0).abs() < 1e-12);
        assert!((y.x(0, 1) - 0.5).abs() < 1e-12);

        let m = tri.marginal(&[0, 1]).unwrap();
        for ((k1, p1), (k2, p2)) in m.atoms().iter().zip(pair.atoms()) {
            assert_eq!(k1, k2);
            assert!((p1 - p2).abs() < 1e-12);
        }
        assert!(y.local(&[0, 1, 2, 3]).is_err());
        assert!(y.max_pair_normalization_error() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let y = star2_mixture();
        let back = SaValuation::from_json(&y.to_json()).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.rounds(), 3);
        for (k, v) in y.entries() {
            assert_eq!(back.raw(k), v);
        }
    }

    #[test]
    fn clamped_access() {
        let mut values = HashMap::new();
        values.insert(PartitionKey::together(0, 1), 1.0 + 1e-9);
        let y = SaValuation::new(2, 2, values).unwrap();
        assert_eq!(y.y(0, 1), 1.0);
        assert_eq!(y.x(0, 1), 0.0);
    }
}
