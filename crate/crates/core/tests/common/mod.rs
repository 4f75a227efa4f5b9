//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use netinfer_core::likelihood::brute_force_likelihood;
use netinfer_core::sampler::PriorConfig;
use netinfer_core::{Cascade, Graph, Mode, ModelParams};

/// Graph whose edge set is the bit pattern `mask` over the dyad space.
pub fn graph_from_mask(n: usize, mode: Mode, mask: u64) -> Graph {
    let space = netinfer_core::DyadSpace::new(n, mode);
    let edges = (0..space.len())
        .filter(|&d| mask >> d & 1 == 1)
        .map(|d| space.pair(d));
    Graph::from_edges(n, mode, edges).unwrap()
}

/// Exact normalized posterior over every graph on `n` nodes, by enumeration and
/// brute-force arborescence sums.
pub fn exact_posterior(
    cascades: &[Cascade],
    n: usize,
    mode: Mode,
    params: &ModelParams,
    prior: &PriorConfig,
) -> Vec<f64> {
    let m = netinfer_core::graph::dyad_count(n, mode);
    assert!(m <= 16);
    let logs: Vec<f64> = (0..1u64 << m)
        .map(|mask| {
            let g = graph_from_mask(n, mode, mask);
            let lik: f64 = cascades
                .iter()
                .map(|c| brute_force_likelihood(&g, c, params).unwrap())
                .sum();
            let e = mask.count_ones() as f64;
            lik + e * prior.p().ln() + (m as f64 - e) * (1.0 - prior.p()).ln()
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Per-dyad marginals of a distribution over masks.
pub fn mask_marginals(dist: &[f64], m: usize) -> Vec<f64> {
    (0..m)
        .map(|d| {
            dist.iter()
                .enumerate()
                .filter(|(mask, _)| mask >> d & 1 == 1)
                .map(|(_, p)| p)
                .sum()
        })
        .collect()
}

pub fn mask_of(g: &Graph) -> u64 {
    let space = g.dyad_space();
    (0..space.len())
        .filter(|&d| {
            let (i, j) = space.pair(d);
            g.has_edge(i, j)
        })
        .fold(0, |acc, d| acc | 1 << d)
}

/// The two short cascades used by the exact-posterior checks on three nodes.
pub fn three_node_cascades() -> Vec<Cascade> {
    vec![
        Cascade::from_pairs(0, &[(0, 0.0), (1, 0.6), (2, 1.1)]).unwrap(),
        Cascade::from_pairs(1, &[(1, 0.0), (2, 0.9)]).unwrap(),
    ]
}
