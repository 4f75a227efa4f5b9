use netinfer_core::eval::{false_positive_alarm, roc};
use netinfer_core::generators::erdos_renyi;
use netinfer_core::sampler::{merge_chains, run_chain};
use netinfer_core::{Cascade, ChainConfig, EdgeMarginals, Graph, Mode, ModelParams, PriorConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, levels: u32) -> (Graph, EdgeMarginals) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = if seed % 2 == 0 {
        Mode::Undirected
    } else {
        Mode::Directed
    };
    loop {
        let g = erdos_renyi(10, mode, 0.3, &mut rng).unwrap();
        if g.edge_count() == 0 || g.edge_count() == g.dyad_count() {
            continue;
        }
        // Few distinct levels so that ties are common.
        let q = (0..g.dyad_count())
            .map(|_| rng.gen_range(0..=levels) as f64 / levels as f64)
            .collect();
        return (g.clone(), EdgeMarginals::from_values(10, mode, q).unwrap());
    }
}

// Probability that a random (edge, non-edge) pair is ordered correctly, ties counting half.
fn mann_whitney(g: &Graph, m: &EdgeMarginals) -> f64 {
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (i, j, q) in m.iter() {
        if g.has_edge(i, j) {
            pos.push(q);
        } else {
            neg.push(q);
        }
    }
    let mut score = 0.0;
    for &p in &pos {
        for &n in &neg {
            score += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    score / (pos.len() * neg.len()) as f64
}

#[test]
fn auc_equals_pairwise_ordering() {
    for seed in 0..200 {
        let (g, m) = instance(seed, if seed < 100 { 5 } else { 1000 });
        let auc = roc(&m, &g).unwrap().auc;
        assert!((auc - mann_whitney(&g, &m)).abs() < 1e-10, "seed {seed}");
    }
}

#[test]
fn curve_is_monotone_with_fixed_endpoints() {
    for seed in 0..50 {
        let (g, m) = instance(seed, 7);
        let curve = roc(&m, &g).unwrap();
        let first = curve.points[0];
        let last = curve.points[curve.points.len() - 1];
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in curve.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            assert!(w[1].threshold < w[0].threshold);
        }
        assert!((0.0..=1.0).contains(&curve.auc));
    }
}

#[test]
fn roc_is_invariant_under_monotone_transforms() {
    for seed in 0..50 {
        let (g, m) = instance(seed, 9);
        let squashed: Vec<f64> = m.values().iter().map(|q| (q * q + 0.1) / 1.1).collect();
        let t = EdgeMarginals::from_values(10, m.mode(), squashed).unwrap();
        let (a, b) = (roc(&m, &g).unwrap(), roc(&t, &g).unwrap());
        assert_eq!(a.auc, b.auc);
        assert_eq!(a.fpa, b.fpa);
        let coords = |c: &netinfer_core::RocCurve| {
            c.points.iter().map(|p| (p.fpr, p.tpr)).collect::<Vec<_>>()
        };
        assert_eq!(coords(&a), coords(&b));
    }
}

#[test]
fn alarm_shrinks_as_tolerance_tightens() {
    for seed in 0..50 {
        let (g, m) = instance(seed, 20);
        let tolerances = [0.5, 0.2, 0.1, 0.05, 0.01, 0.001, 0.0];
        let values: Vec<f64> = tolerances
            .iter()
            .map(|&t| false_positive_alarm(&m, &g, t).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0], "seed {seed}: {values:?}");
        }
        assert_eq!(values[4], roc(&m, &g).unwrap().fpa);
    }
}

#[test]
fn alarm_matches_direct_scan_without_ties() {
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let g = erdos_renyi(30, Mode::Undirected, 0.15, &mut rng).unwrap();
        // Informative but imperfect scores; continuous, so no ties.
        let q: Vec<f64> = g
            .dyad_space()
            .pairs()
            .map(|(i, j)| {
                (if g.has_edge(i, j) { 0.3 } else { 0.0 } + rng.gen::<f64>() * 0.7).min(1.0)
            })
            .collect();
        let m = EdgeMarginals::from_values(30, Mode::Undirected, q).unwrap();
        let mut ranked: Vec<(f64, bool)> =
            m.iter().map(|(i, j, q)| (q, g.has_edge(i, j))).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        for tol in [0.0, 0.01, 0.05, 0.2] {
            let (mut tp, mut fp, mut best) = (0usize, 0usize, 0usize);
            for &(_, t) in &ranked {
                if t {
                    tp += 1;
                } else {
                    fp += 1;
                }
                if fp as f64 <= tol * (tp + fp) as f64 {
                    best = tp;
                }
            }
            let want = best as f64 / g.edge_count() as f64;
            assert_eq!(false_positive_alarm(&m, &g, tol).unwrap(), want);
        }
    }
}

#[test]
fn merged_chains_average_per_chain_marginals() {
    let cascades = vec![
        Cascade::from_pairs(0, &[(0, 0.0), (1, 0.4), (3, 1.0)]).unwrap(),
        Cascade::from_pairs(1, &[(2, 0.0), (3, 0.7)]).unwrap(),
    ];
    let params = ModelParams::exponential(0.4, 1.0).unwrap();
    let mut base = ChainConfig::for_nodes(4, params, PriorConfig::new(0.3).unwrap(), 0);
    base.iterations = 20_000;
    base.burn_in = 2000;
    base.thinning = 3;
    let outs: Vec<_> = (0..2)
        .map(|s| {
            run_chain(
                &cascades,
                4,
                Mode::Undirected,
                ChainConfig {
                    seed: s,
                    ..base.clone()
                },
            )
            .unwrap()
        })
        .collect();
    let merged = merge_chains(&outs).unwrap();
    let (a, b) = (outs[0].marginals().unwrap(), outs[1].marginals().unwrap());
    for d in 0..6 {
        let avg = (a.by_index(d) + b.by_index(d)) / 2.0;
        assert!((merged.marginals.by_index(d) - avg).abs() < 1e-12);
        assert!(merged.discrepancy >= (a.by_index(d) - b.by_index(d)).abs());
    }
    let mut other = outs[1].clone();
    other.config.thinning = 4;
    assert!(merge_chains(&[outs[0].clone(), other]).is_err());
}
