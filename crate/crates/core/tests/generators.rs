use netinfer_core::generators::{kronecker, EdgeDensity, CORE_PERIPHERY_SEED};
use netinfer_core::{GeneratorKind, GeneratorSpec, Graph, Mode, NodeId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn degrees(g: &Graph) -> Vec<usize> {
    (0..g.node_count() as NodeId)
        .map(|v| g.out_degree(v))
        .collect()
}

fn connected(g: &Graph) -> bool {
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![0 as NodeId];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in g.out_neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[test]
fn erdos_renyi_edge_count_is_binomial() {
    let (n, z) = (100, 4.0);
    let m = (n * (n - 1) / 2) as f64;
    let p = z / (n - 1) as f64;
    let sd = (m * p * (1.0 - p)).sqrt();
    let seeds = 200;
    let mut total = 0.0;
    for seed in 0..seeds {
        let spec = GeneratorSpec {
            kind: GeneratorKind::ErdosRenyi(EdgeDensity::MeanDegree(z)),
            n,
            mode: Mode::Undirected,
            seed,
        };
        let e = spec.generate().unwrap().edge_count() as f64;
        assert!((e - m * p).abs() < 5.0 * sd, "seed {seed}: {e} edges");
        total += e;
    }
    let mean = total / seeds as f64;
    assert!(
        (mean - m * p).abs() < 4.0 * sd / (seeds as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn forest_fire_degrees_are_heavy_tailed() {
    for seed in 0..5 {
        let g = GeneratorSpec {
            kind: GeneratorKind::forest_fire_default(),
            n: 1000,
            mode: Mode::Undirected,
            seed,
        }
        .generate()
        .unwrap();
        let d = degrees(&g);
        let mean = d.iter().sum::<usize>() as f64 / d.len() as f64;
        let max = *d.iter().max().unwrap() as f64;
        assert!(max > 5.0 * mean, "seed {seed}: max {max} mean {mean}");
        assert!(connected(&g));
    }
}

#[test]
fn forest_fire_without_burning_is_a_tree() {
    for seed in 0..5 {
        let g = GeneratorSpec {
            kind: GeneratorKind::ForestFire {
                forward: 0.0,
                backward: 0.3,
            },
            n: 500,
            mode: Mode::Undirected,
            seed,
        }
        .generate()
        .unwrap();
        assert_eq!(g.edge_count(), 499);
        assert!(connected(&g));
    }
}

#[test]
fn kronecker_edge_frequency_matches_initiator_product() {
    let runs = 4000;
    let hits = (0..runs)
        .filter(|&s| {
            kronecker(
                3,
                Mode::Directed,
                CORE_PERIPHERY_SEED,
                &mut ChaCha8Rng::seed_from_u64(s),
            )
            .unwrap()
            .has_edge(0, 1)
        })
        .count();
    let p = 0.405;
    let sd = (p * (1.0 - p) / runs as f64).sqrt();
    assert!((hits as f64 / runs as f64 - p).abs() < 4.0 * sd);
}

#[test]
fn generators_are_deterministic_and_consistent() {
    for kind in [
        GeneratorKind::ErdosRenyi(EdgeDensity::Probability(0.05)),
        GeneratorKind::forest_fire_default(),
        GeneratorKind::Kronecker {
            seed: CORE_PERIPHERY_SEED,
        },
    ] {
        for mode in [Mode::Directed, Mode::Undirected] {
            let spec = GeneratorSpec {
                kind: kind.clone(),
                n: 128,
                mode,
                seed: 42,
            };
            let g = spec.generate().unwrap();
            assert_eq!(g, spec.generate().unwrap());
            assert!(g.is_consistent());
        }
    }
}
