mod common;

use netinfer_core::likelihood::{brute_force_likelihood, cascade_laplacian, lu_determinant, minor};
use netinfer_core::{Cascade, CascadeState, Graph, Mode, ModelParams, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(n: usize, mode: Mode, density: f64, rng: &mut ChaCha8Rng) -> Graph {
    let space = netinfer_core::DyadSpace::new(n, mode);
    let edges: Vec<_> = space
        .pairs()
        .filter(|_| rng.gen::<f64>() < density)
        .collect();
    Graph::from_edges(n, mode, edges).unwrap()
}

fn random_cascade(n: usize, size: usize, rng: &mut ChaCha8Rng) -> Cascade {
    let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
    nodes.shuffle(rng);
    let mut t = 0.0;
    let pairs: Vec<(NodeId, f64)> = nodes[..size]
        .iter()
        .map(|&v| {
            let at = t;
            t += rng.gen_range(0.05..2.0);
            (v, at)
        })
        .collect();
    Cascade::from_pairs(0, &pairs).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a == f64::NEG_INFINITY && b == f64::NEG_INFINITY) || (a - b).abs() <= tol
}

#[test]
fn incremental_state_matches_tree_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut feasible, mut total) = (0, 0);
    for _ in 0..2000 {
        let n = rng.gen_range(2..=5);
        let mode = if rng.gen() {
            Mode::Directed
        } else {
            Mode::Undirected
        };
        let g = random_graph(n, mode, rng.gen_range(0.2..1.0), &mut rng);
        let c = random_cascade(n, rng.gen_range(1..=n), &mut rng);
        let params =
            ModelParams::exponential(rng.gen_range(0.05..0.95), rng.gen_range(0.3..3.0)).unwrap();
        let fast = CascadeState::build(&g, &c, &params)
            .unwrap()
            .log_lik(&params);
        let slow = brute_force_likelihood(&g, &c, &params).unwrap();
        assert!(close(fast, slow, 1e-9), "fast {fast} vs brute force {slow}");
        feasible += fast.is_finite() as usize;
        total += 1;
    }
    assert!(feasible > total / 3, "only {feasible} feasible instances");
}

#[test]
fn four_node_worked_example() {
    // a->b, a->c, b->c, c->d with activation times 0, 1, 2, 3.
    let g = Graph::from_edges(4, Mode::Directed, [(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap();
    let c = Cascade::from_pairs(0, &[(0, 0.0), (1, 1.0), (2, 2.0), (3, 3.0)]).unwrap();
    let beta = 0.3;
    let params = ModelParams::exponential(beta, 1.0).unwrap();
    let state = CascadeState::build(&g, &c, &params).unwrap();
    let e = f64::exp;
    let sums = [0.0, e(-1.0), e(-2.0) + e(-1.0), e(-1.0)];
    for (got, want) in state.parent_sums().iter().zip(sums) {
        assert!((got - want).abs() < 1e-15);
    }
    assert_eq!((state.q(), state.r()), (3, 1));
    let want = 3.0 * beta.ln() + (1.0 - beta).ln() + (sums[1] * sums[2] * sums[3]).ln();
    assert!((state.log_lik(&params) - want).abs() < 1e-12);
    assert!((brute_force_likelihood(&g, &c, &params).unwrap() - want).abs() < 1e-12);
}

#[test]
fn laplacian_minor_is_triangular() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.gen_range(2..=15);
        let mode = if rng.gen() {
            Mode::Directed
        } else {
            Mode::Undirected
        };
        let g = random_graph(n, mode, rng.gen_range(0.3..1.0), &mut rng);
        let c = random_cascade(n, rng.gen_range(2..=n), &mut rng);
        let params = ModelParams::exponential(0.4, rng.gen_range(0.5..2.0)).unwrap();
        let state = CascadeState::build(&g, &c, &params).unwrap();
        let product: f64 = state.parent_sums()[1..].iter().product();
        let det = lu_determinant(&minor(&cascade_laplacian(&g, &c, params.weight()), 0));
        assert!(
            (det - product).abs() <= 1e-9 * product.max(1e-300),
            "LU {det} vs product {product}"
        );
        if state.is_feasible() {
            assert!((state.log_det() - product.ln()).abs() < 1e-9);
        } else {
            assert_eq!(det, 0.0);
        }
    }
}

#[test]
fn toggle_deltas_track_fresh_builds() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (mode, n) in [(Mode::Directed, 8), (Mode::Undirected, 9)] {
        let mut g = random_graph(n, mode, 0.5, &mut rng);
        let params = ModelParams::exponential(0.35, 1.5).unwrap();
        let cascades: Vec<Cascade> = (0..6)
            .map(|_| random_cascade(n, rng.gen_range(1..=n), &mut rng))
            .collect();
        let mut states: Vec<CascadeState> = cascades
            .iter()
            .map(|c| CascadeState::build(&g, c, &params).unwrap())
            .collect();
        let space = g.dyad_space();
        for _ in 0..10_000 {
            let (i, j) = space.pair(rng.gen_range(0..space.len()));
            let add = !g.has_edge(i, j);
            let deltas: Vec<_> = states
                .iter()
                .zip(&cascades)
                .map(|(s, c)| s.toggle_delta(&g, c, i, j, add, &params).unwrap())
                .collect();
            for (s, d) in states.iter_mut().zip(&deltas) {
                let before = s.log_lik(&params);
                s.apply(d).unwrap();
                if before.is_finite() && s.log_lik(&params).is_finite() {
                    assert!((s.log_lik(&params) - before - d.delta_log_lik).abs() < 1e-9);
                }
            }
            g.toggle_edge(i, j).unwrap();
            for (s, c) in states.iter().zip(&cascades) {
                let fresh = CascadeState::build(&g, c, &params).unwrap();
                assert_eq!((s.q(), s.r()), (fresh.q(), fresh.r()));
                assert!(close(s.log_lik(&params), fresh.log_lik(&params), 1e-8));
                for (a, b) in s.parent_sums().iter().zip(fresh.parent_sums()) {
                    assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn arcs_that_cannot_transmit_only_add_a_miss() {
    let params = ModelParams::exponential(0.4, 1.0).unwrap();
    let c = Cascade::from_pairs(0, &[(0, 0.0), (1, 0.5), (2, 1.7)]).unwrap();
    let g = Graph::from_edges(5, Mode::Directed, [(0, 1), (1, 2)]).unwrap();
    let base = CascadeState::build(&g, &c, &params)
        .unwrap()
        .log_lik(&params);
    // Into an inactive node, or backwards in time: one more failed attempt.
    for (u, v) in [(1, 4), (2, 0), (2, 1)] {
        let mut h = g.clone();
        h.add_edge(u, v).unwrap();
        let l = CascadeState::build(&h, &c, &params)
            .unwrap()
            .log_lik(&params);
        assert!((l - base - (0.6f64).ln()).abs() < 1e-12);
    }
    // From an inactive node: no change.
    let mut h = g.clone();
    h.add_edge(4, 2).unwrap();
    assert!(
        (CascadeState::build(&h, &c, &params)
            .unwrap()
            .log_lik(&params)
            - base)
            .abs()
            < 1e-12
    );
    // Forward in time: a miss plus the extra parent weight.
    let mut h = g.clone();
    h.add_edge(0, 2).unwrap();
    let s_old = (-1.2f64).exp();
    let s_new = s_old + (-1.7f64).exp();
    let want = base + (0.6f64).ln() + (s_new / s_old).ln();
    assert!(
        (CascadeState::build(&h, &c, &params)
            .unwrap()
            .log_lik(&params)
            - want)
            .abs()
            < 1e-12
    );
}

#[test]
fn failure_count_includes_arcs_into_active_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let n = rng.gen_range(2..=10);
        let g = random_graph(n, Mode::Directed, 0.4, &mut rng);
        let c = random_cascade(n, rng.gen_range(1..=n), &mut rng);
        let params = ModelParams::exponential(0.5, 1.0).unwrap();
        let s = CascadeState::build(&g, &c, &params).unwrap();
        let out_arcs = g.arcs().filter(|&(u, _)| c.contains(u)).count() as i64;
        assert_eq!(s.r(), out_arcs - s.q() as i64);
    }
}
