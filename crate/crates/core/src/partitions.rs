//! Set-partition enumeration via restricted-growth strings.
//!
//! A restricted-growth string `a` of length `m` has `a[0] = 0` and
//! `a[i] <= 1 + max(a[..i])`. The strings are in bijection with the set
//! partitions of `{0, .., m-1}`, and enumerating them in lexicographic order
//! visits partitions with blocks already numbered by their smallest member.

/// Bell number `B(m)`, the number of set partitions of an `m`-element set.
///
/// Panics if the result would overflow `u64` (`m > 25`).
pub fn bell(m: usize) -> u64 {
    assert!(m <= 25, "Bell({m}) overflows u64");
    // Bell triangle.
    let mut row = vec![1u64];
    for _ in 0..m {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Lexicographic enumerator of restricted-growth strings of a fixed length.
///
/// Memory is `O(m)`; call [`RestrictedGrowth::advance`] to step.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[..=i])
    prefix_max: Vec<usize>,
    started: bool,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(m: usize) -> Self {
        Self {
            labels: vec![0; m],
            prefix_max: vec![0; m],
            started: false,
            done: false,
        }
    }

    /// Current labels; valid after the first successful `advance`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of blocks in the current partition.
    pub fn block_count(&self) -> usize {
        self.prefix_max.last().map_or(0, |&m| m + 1)
    }

    /// Moves to the next string. Returns `false` once exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let m = self.labels.len();
        // position 0 is fixed at label 0
        let mut i = m;
        while i > 1 {
            i -= 1;
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..m {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return true;
            }
        }
        self.done = true;
        false
    }
}

/// Converts labels over `elements` into blocks ordered by smallest member.
pub fn labels_to_blocks(elements: &[usize], labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); count];
    for (&e, &l) in elements.iter().zip(labels) {
        blocks[l].push(e);
    }
    blocks
}

/// All set partitions of `elements` (assumed sorted and distinct), as block
/// lists in canonical order.
pub fn partitions_of(elements: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rg = RestrictedGrowth::new(elements.len());
    while rg.advance() {
        out.push(labels_to_blocks(elements, rg.labels()));
    }
    out
}

/// Binomial coefficient as `u128` (no overflow for desk-scale arguments).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `k`-subsets of `items` in lexicographic order of positions.
pub fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < items.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_values() {
        let expected = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
        for (m, &b) in expected.iter().enumerate() {
            assert_eq!(bell(m), b, "Bell({m})");
        }
    }

    #[test]
    fn enumeration_counts_match_bell() {
        for m in 0..=8 {
            let mut rg = RestrictedGrowth::new(m);
            let mut count = 0u64;
            let mut prev: Option<Vec<usize>> = None;
            while rg.advance() {
                let l = rg.labels().to_vec();
                if let Some(p) = &prev {
                    assert!(p < &l, "not lexicographic");
                }
                prev = Some(l);
                count += 1;
            }
            assert_eq!(count, bell(m));
        }
    }

    #[test]
    fn three_element_partitions() {
        let parts = partitions_of(&[2, 5, 9]);
        assert_eq!(parts.len(), 5);
        assert_eq!(parts[0], vec![vec![2, 5, 9]]);
        assert_eq!(parts[4], vec![vec![2], vec![5], vec![9]]);
        assert!(parts.contains(&vec![vec![2, 9], vec![5]]));
    }

    #[test]
    fn subsets_and_binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
        let s = subsets_of_size(&[1, 4, 6, 8], 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![1, 4]);
        assert_eq!(s[5], vec![6, 8]);
        assert_eq!(subsets_of_size(&[1, 2], 0), vec![Vec::<usize>::new()]);
    }
}
