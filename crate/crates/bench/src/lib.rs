//! Benchmark fixtures shared by the criterion benches.

use corrclust::{make_star_gap, random_instance, SignedGraph};

/// Named instances used across benchmark groups.
pub fn suite() -> Vec<(String, SignedGraph)> {
    let mut out = vec![
        ("star-8".to_string(), make_star_gap(8).expect("star")),
        ("star-16".to_string(), make_star_gap(16).expect("star")),
    ];
    for n in [8, 10] {
        out.push((format!("random-{n}"), random_instance(n, 0.5, n as u64).expect("random")));
    }
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_is_nonempty_and_named_uniquely() {
        let s = super::suite();
        let mut names: Vec<_> = s.iter().map(|(n, _)| n.clone()).collect();
        names.dedup();
        assert_eq!(names.len(), s.len());
    }
}
