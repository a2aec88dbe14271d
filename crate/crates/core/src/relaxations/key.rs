use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A set partition of a small vertex set: the index of one Sherali-Adams
/// variable.
///
/// Canonical form: vertices sorted inside each block, blocks sorted by their
/// smallest vertex. Every constructor canonicalizes, so two keys describing
/// the same partition compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionKey {
    blocks: Vec<Vec<usize>>,
}

impl PartitionKey {
    /// The key of the empty set (`y_∅ = 1`).
    pub fn empty() -> Self {
        Self { blocks: Vec::new() }
    }

    /// Canonicalizes `blocks`, rejecting empty or overlapping blocks.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks = blocks;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(invalid("partition key with an empty block"));
            }
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != total {
            return Err(invalid("partition key with overlapping blocks"));
        }
        Ok(Self { blocks })
    }

    /// Trusted constructor for blocks that are already canonical.
    pub(crate) fn from_canonical(blocks: Vec<Vec<usize>>) -> Self {
        debug_assert!(blocks.windows(2).all(|w| w[0][0] < w[1][0]));
        Self { blocks }
    }

    /// `{u, v}` in one block.
    pub fn together(u: usize, v: usize) -> Self {
        Self::from_canonical(vec![if u < v { vec![u, v] } else { vec![v, u] }])
    }

    pub fn singleton(v: usize) -> Self {
        Self::from_canonical(vec![vec![v]])
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Total number of vertices covered.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Covered vertices in increasing order.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        s.sort_unstable();
        s
    }

    pub fn contains(&self, v: usize) -> bool {
        self.blocks.iter().any(|b| b.binary_search(&v).is_ok())
    }

    /// Index of the block holding `v`.
    pub fn block_of(&self, v: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&v).is_ok())
    }

    /// The partition induced on `subset` (vertices outside the key are ignored).
    pub fn restrict(&self, subset: &[usize]) -> Self {
        let blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| b.iter().copied().filter(|v| subset.contains(v)).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        let mut key = Self { blocks };
        key.blocks.sort_unstable_by_key(|b| b[0]);
        key
    }

    /// All keys over `support ∪ {v}` that restrict to `self`: `v` joins one
    /// of the existing blocks or opens a new one.
    pub fn extensions(&self, v: usize) -> Vec<Self> {
        debug_assert!(!self.contains(v));
        let mut out = Vec::with_capacity(self.blocks.len() + 1);
        for i in 0..self.blocks.len() {
            let mut blocks = self.blocks.clone();
            let pos = blocks[i].partition_point(|&w| w < v);
            blocks[i].insert(pos, v);
            // the block minimum may change when v is smaller than it
            blocks.sort_unstable_by_key(|b| b[0]);
            out.push(Self { blocks });
        }
        let mut blocks = self.blocks.clone();
        blocks.push(vec![v]);
        blocks.sort_unstable_by_key(|b| b[0]);
        out.push(Self { blocks });
        out
    }
}

impl fmt::Display for PartitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_is_order_free() {
        let a = PartitionKey::new(vec![vec![5, 2], vec![1]]).unwrap();
        let b = PartitionKey::new(vec![vec![1], vec![2, 5]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.blocks(), &[vec![1], vec![2, 5]]);
        assert_eq!(PartitionKey::new(a.blocks().to_vec()).unwrap(), a);
        assert_eq!(a.to_string(), "1|2,5");
    }

    #[test]
    fn invalid_keys() {
        assert!(PartitionKey::new(vec![vec![1], vec![]]).is_err());
        assert!(PartitionKey::new(vec![vec![1, 2], vec![2]]).is_err());
    }

    #[test]
    fn extensions_and_restriction() {
        let k = PartitionKey::new(vec![vec![2, 4], vec![3]]).unwrap();
        let ext = k.extensions(1);
        assert_eq!(ext.len(), 3);
        assert!(ext.contains(&PartitionKey::new(vec![vec![1, 2, 4], vec![3]]).unwrap()));
        assert!(ext.contains(&PartitionKey::new(vec![vec![2, 4], vec![1, 3]]).unwrap()));
        assert!(ext.contains(&PartitionKey::new(vec![vec![1], vec![2, 4], vec![3]]).unwrap()));
        for e in &ext {
            assert_eq!(e.restrict(&[2, 3, 4]), k);
            assert_eq!(e.blocks(), PartitionKey::new(e.blocks().to_vec()).unwrap().blocks());
        }
        assert_eq!(k.restrict(&[4, 3]), PartitionKey::new(vec![vec![3], vec![4]]).unwrap());
        assert_eq!(k.restrict(&[]), PartitionKey::empty());
        assert_eq!(k.size(), 3);
        assert_eq!(k.support(), vec![2, 3, 4]);
    }
}
