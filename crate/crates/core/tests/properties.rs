//! Property tests over random instances and clusterings.

use proptest::prelude::*;

use corrclust::analysis::brute_force_opt;
use corrclust::lp::LpConfig;
use corrclust::relaxations::{solve_sa, solve_standard_lp, SaOptions};
use corrclust::{clustering_cost, derandomized_cluster, Clustering, Fractional, RoundingPolicy, Sign, SignedGraph};

fn graph(n: usize, signs: &[bool]) -> SignedGraph {
    let mut it = signs.iter().cycle();
    SignedGraph::from_fn(n, |_, _| if *it.next().unwrap() { Sign::Plus } else { Sign::Minus }).unwrap()
}

/// Disagreements counted directly from the definition.
fn count_disagreements(g: &SignedGraph, labels: &[usize]) -> u64 {
    let mut cost = 0;
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            let same = labels[u] == labels[v];
            if g.is_plus(u, v) != same {
                cost += 1;
            }
        }
    }
    cost
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn text_format_round_trips(n in 1usize..12, signs in prop::collection::vec(any::<bool>(), 1..80)) {
        let g = graph(n, &signs);
        let back = SignedGraph::parse(&g.to_text()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn cost_matches_definition(n in 1usize..12, signs in prop::collection::vec(any::<bool>(), 1..80),
                               labels in prop::collection::vec(0usize..4, 12)) {
        let g = graph(n, &signs);
        let labels = labels[..n].to_vec();
        let c = Clustering::new(labels.clone());
        prop_assert_eq!(clustering_cost(&g, &c).unwrap(), count_disagreements(&g, &labels));
    }

    #[test]
    fn relaxations_sandwich_the_optimum(n in 3usize..7, signs in prop::collection::vec(any::<bool>(), 1..30)) {
        let g = graph(n, &signs);
        let cfg = LpConfig::default();
        let lp = solve_standard_lp(&g, &cfg).unwrap().value;
        let sa3 = solve_sa(&g, 3, &SaOptions::default(), &cfg).unwrap().value;
        let opt = brute_force_opt(&g).unwrap().1 as f64;
        prop_assert!(lp <= sa3 + 1e-7);
        prop_assert!(sa3 <= opt + 1e-7);
    }

    #[test]
    fn derandomized_cost_is_certified(n in 3usize..8, signs in prop::collection::vec(any::<bool>(), 1..30)) {
        let g = graph(n, &signs);
        let sa = solve_sa(&g, 3, &SaOptions::default(), &LpConfig::default()).unwrap();
        let frac = Fractional::Lifted(&sa.valuation);
        let policy = RoundingPolicy::sa_correlated(3);
        let (c, cert) = derandomized_cluster(&g, &frac, &policy).unwrap();
        let cost = clustering_cost(&g, &c).unwrap();
        prop_assert_eq!(cost as f64, cert.total_cost);
        prop_assert!(cost as f64 <= cert.max_ratio * cert.lp_value + 1e-6);
        let (c2, cert2) = derandomized_cluster(&g, &frac, &policy).unwrap();
        prop_assert_eq!(c2, c);
        prop_assert_eq!(cert2, cert);
    }
}
