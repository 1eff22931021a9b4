use pdbs::model::{sample_er, sample_planted, sample_planted_union};
use pdbs::{Graph, ModelParams, Seed};
use proptest::prelude::*;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn null_edge_count_mean() {
    let seed = Seed::new(11);
    let counts: Vec<f64> =
        (0..10_000).map(|i| sample_er(100, 0.3, &mut seed.stream("null", i)).unwrap().edge_count() as f64).collect();
    let (mean, se) = mean_and_se(&counts);
    assert!((mean - 1485.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn planted_edge_count_mean() {
    let params = ModelParams::new(200, 20, 10, 0.8, 0.2).unwrap();
    let expected = 19_900.0 * 0.2 + 200.0 * 0.6;
    let seed = Seed::new(12);
    let counts: Vec<f64> = (0..2_000)
        .map(|i| sample_planted(&params, &mut seed.stream("planted", i)).unwrap().0.edge_count() as f64)
        .collect();
    let (mean, se) = mean_and_se(&counts);
    assert!((mean - expected).abs() <= 3.0 * se, "mean {mean} vs {expected}, se {se}");
}

#[test]
fn planted_sets_are_disjoint_and_sized() {
    let params = ModelParams::new(30, 4, 7, 0.9, 0.1).unwrap();
    let (_, sets) = sample_planted(&params, &mut Seed::new(3).stream("sets", 0)).unwrap();
    assert_eq!((sets.right.len(), sets.left.len()), (4, 7));
    assert!(sets.right.iter().all(|r| !sets.left.contains(r)));
}

/// Fractions of present pairs inside and outside the planted block, pooled
/// over `trials` samples.
fn pair_frequencies(
    params: &ModelParams,
    trials: u64,
    tag: &str,
    sampler: impl Fn(&ModelParams, &mut pdbs::StreamRng) -> (Graph, pdbs::PlantedSets),
) -> (f64, f64) {
    let seed = Seed::new(21);
    let (mut inside, mut inside_total, mut outside, mut outside_total) = (0u64, 0u64, 0u64, 0u64);
    for t in 0..trials {
        let (g, sets) = sampler(params, &mut seed.stream(tag, t));
        for i in 0..params.n {
            for j in i + 1..params.n {
                let hit = g.has_edge(i, j) as u64;
                if sets.is_planted_pair(i, j) {
                    inside += hit;
                    inside_total += 1;
                } else {
                    outside += hit;
                    outside_total += 1;
                }
            }
        }
    }
    (inside as f64 / inside_total as f64, outside as f64 / outside_total as f64)
}

#[test]
fn union_sampler_matches_planted_sampler() {
    let params = ModelParams::new(150, 10, 10, 0.6, 0.2).unwrap();
    let trials = 400;
    let direct = pair_frequencies(&params, trials, "direct", |p, r| sample_planted(p, r).unwrap());
    let union = pair_frequencies(&params, trials, "union", |p, r| sample_planted_union(p, r).unwrap());
    // 40 000 block pairs: standard error of the block frequency is about 0.0025.
    let block_se = (0.6f64 * 0.4 / (trials as f64 * 100.0)).sqrt();
    for (name, (inside, outside)) in [("direct", direct), ("union", union)] {
        assert!((inside - 0.6).abs() < 4.0 * block_se, "{name} block frequency {inside}");
        assert!((outside - 0.2).abs() < 0.002, "{name} background frequency {outside}");
    }
    assert!((direct.0 - union.0).abs() < 5.0 * block_se);
}

proptest! {
    #[test]
    fn edge_list_round_trip(seed in any::<u64>()) {
        let g = sample_er(20, 0.5, &mut Seed::new(seed).stream("graph", 0)).unwrap();
        let text = g.to_edge_list();
        let back = Graph::parse_edge_list(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_edge_list(), text);
    }

    #[test]
    fn permutation_preserves_degree_multiset(seed in any::<u64>(), shift in 0usize..20) {
        let g = sample_er(20, 0.4, &mut Seed::new(seed).stream("graph", 0)).unwrap();
        let perm: Vec<usize> = (0..20).map(|i| (i * 7 + shift) % 20).collect();
        let h = g.permute(&perm);
        let (mut a, mut b) = (g.degrees(), h.degrees());
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        prop_assert_eq!(g.edge_count(), h.edge_count());
    }
}
