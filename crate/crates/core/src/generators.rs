//! Random graph models: Erdős–Rényi, Forest Fire and stochastic Kronecker.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Mode, NodeId};

/// Core-periphery initiator for stochastic Kronecker graphs.
pub const CORE_PERIPHERY_SEED: [[f64; 2]; 2] = [[0.9, 0.5], [0.5, 0.3]];
/// Hierarchical (community) initiator for stochastic Kronecker graphs.
pub const HIERARCHICAL_SEED: [[f64; 2]; 2] = [[0.9, 0.1], [0.1, 0.9]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeDensity {
    Probability(f64),
    /// Mean degree `z`, i.e. `p = z / (n - 1)`.
    MeanDegree(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    ErdosRenyi(EdgeDensity),
    /// `forward` is the forward burning probability `p`; `backward` is the
    /// backward burning ratio `r`, so in-links burn with probability `r * p`.
    ForestFire {
        forward: f64,
        backward: f64,
    },
    /// Node count must be `2^power`; `seed` is the 2x2 initiator matrix.
    Kronecker {
        seed: [[f64; 2]; 2],
    },
}

impl GeneratorKind {
    pub fn forest_fire_default() -> Self {
        GeneratorKind::ForestFire {
            forward: 0.37,
            backward: 0.32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Graph> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.kind {
            GeneratorKind::ErdosRenyi(density) => {
                let p = match density {
                    EdgeDensity::Probability(p) => p,
                    EdgeDensity::MeanDegree(z) if self.n > 1 => z / (self.n - 1) as f64,
                    EdgeDensity::MeanDegree(_) => 0.0,
                };
                erdos_renyi(self.n, self.mode, p, &mut rng)
            }
            GeneratorKind::ForestFire { forward, backward } => {
                forest_fire(self.n, self.mode, forward, backward, &mut rng)
            }
            GeneratorKind::Kronecker { seed } => {
                if self.n < 2 || !self.n.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(self.n));
                }
                kronecker(self.n.trailing_zeros(), self.mode, seed, &mut rng)
            }
        }
    }
}

fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Probability { what, value })
    }
}

/// Every dyad present independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, mode: Mode, p: f64, rng: &mut R) -> Result<Graph> {
    check_probability("edge probability", p)?;
    let mut g = Graph::new(n, mode)?;
    let space = g.dyad_space();
    for d in 0..space.len() {
        if rng.gen::<f64>() < p {
            let (i, j) = space.pair(d);
            g.add_edge(i, j)?;
        }
    }
    Ok(g)
}

// Number of failures before the first success when each trial "burns" with probability `p`;
// mean p / (1 - p).
fn geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> usize {
    let mut k = 0;
    while rng.gen::<f64>() < p {
        k += 1;
    }
    k
}

/// Forest Fire growth model.
///
/// Node `v` joins by linking to a uniformly chosen ambassador, then recursively burns
/// a geometric number of the current node's unvisited out-links (mean `p/(1-p)`) and
/// in-links (mean `rp/(1-rp)`), linking to every burned node. The directed growth graph
/// is returned as is or symmetrized.
pub fn forest_fire<R: Rng + ?Sized>(
    n: usize,
    mode: Mode,
    forward: f64,
    backward: f64,
    rng: &mut R,
) -> Result<Graph> {
    if !(0.0..1.0).contains(&forward) {
        return Err(Error::Probability {
            what: "forward burn probability",
            value: forward,
        });
    }
    check_probability("backward burn ratio", backward)?;
    let backward_p = forward * backward;
    let mut grown = Graph::new(n, Mode::Directed)?;
    let mut visited = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    let mut pool: Vec<NodeId> = Vec::new();

    for v in 1..n {
        for &t in &touched {
            visited[t] = false;
        }
        touched.clear();
        let ambassador = rng.gen_range(0..v);
        visited[ambassador] = true;
        touched.push(ambassador);
        queue.push_back(ambassador as NodeId);
        let mut links: Vec<NodeId> = vec![ambassador as NodeId];

        while let Some(x) = queue.pop_front() {
            for (p, forward_side) in [(forward, true), (backward_p, false)] {
                let want = geometric(p, rng);
                if want == 0 {
                    continue;
                }
                pool.clear();
                let neighbours = if forward_side {
                    grown.out_neighbors(x)
                } else {
                    grown.in_neighbors(x)
                };
                pool.extend(neighbours.iter().copied().filter(|&w| !visited[w as usize]));
                let take = want.min(pool.len());
                for k in 0..take {
                    let pick = rng.gen_range(k..pool.len());
                    pool.swap(k, pick);
                    let w = pool[k];
                    visited[w as usize] = true;
                    touched.push(w as usize);
                    links.push(w);
                    queue.push_back(w);
                }
            }
        }
        for w in links {
            grown.add_edge(v as NodeId, w)?;
        }
    }

    match mode {
        Mode::Directed => Ok(grown),
        Mode::Undirected => Graph::from_edges(n, Mode::Undirected, grown.edges()),
    }
}

/// Probability of arc `(i, j)` in the `power`-th Kronecker power of `seed`.
pub fn kronecker_edge_probability(seed: &[[f64; 2]; 2], power: u32, i: NodeId, j: NodeId) -> f64 {
    (0..power).fold(1.0, |acc, b| {
        acc * seed[((i >> b) & 1) as usize][((j >> b) & 1) as usize]
    })
}

/// Stochastic Kronecker graph on `2^power` nodes; the diagonal is dropped.
///
/// In undirected mode each unordered pair `i < j` is drawn once with probability
/// `P(i, j)`.
pub fn kronecker<R: Rng + ?Sized>(
    power: u32,
    mode: Mode,
    seed: [[f64; 2]; 2],
    rng: &mut R,
) -> Result<Graph> {
    if power == 0 {
        return Err(Error::InvalidArgument("Kronecker power must be at least 1"));
    }
    if power >= NodeId::BITS {
        return Err(Error::InvalidArgument("Kronecker power too large"));
    }
    for &v in seed.iter().flatten() {
        check_probability("Kronecker seed entry", v)?;
    }
    let n = 1usize << power;
    let mut g = Graph::new(n, mode)?;
    let space = g.dyad_space();
    for d in 0..space.len() {
        let (i, j) = space.pair(d);
        if rng.gen::<f64>() < kronecker_edge_probability(&seed, power, i, j) {
            g.add_edge(i, j)?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn erdos_renyi_extremes() {
        let empty = erdos_renyi(20, Mode::Undirected, 0.0, &mut rng(1)).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = erdos_renyi(20, Mode::Directed, 1.0, &mut rng(1)).unwrap();
        assert_eq!(full.edge_count(), full.dyad_count());
        assert!(erdos_renyi(5, Mode::Directed, 1.5, &mut rng(1)).is_err());
    }

    #[test]
    fn forest_fire_small_cases() {
        let g = forest_fire(2, Mode::Undirected, 0.37, 0.32, &mut rng(3)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(forest_fire(10, Mode::Directed, 1.0, 0.3, &mut rng(3)).is_err());
        assert!(g.is_consistent());
    }

    #[test]
    fn kronecker_probability_is_product_over_bits() {
        let p = kronecker_edge_probability(&CORE_PERIPHERY_SEED, 3, 0, 1);
        assert!((p - 0.9 * 0.9 * 0.5).abs() < 1e-15);
        assert!((p - 0.405).abs() < 1e-12);
        let p = kronecker_edge_probability(&CORE_PERIPHERY_SEED, 3, 7, 7);
        assert!((p - 0.027).abs() < 1e-12);
    }

    #[test]
    fn kronecker_extremes_and_errors() {
        let g = kronecker(3, Mode::Directed, [[0.0; 2]; 2], &mut rng(0)).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = kronecker(3, Mode::Directed, [[1.0; 2]; 2], &mut rng(0)).unwrap();
        assert_eq!(g.edge_count(), 8 * 7);
        let spec = GeneratorSpec {
            kind: GeneratorKind::Kronecker {
                seed: HIERARCHICAL_SEED,
            },
            n: 100,
            mode: Mode::Undirected,
            seed: 0,
        };
        assert_eq!(spec.generate().unwrap_err(), Error::NotPowerOfTwo(100));
        let spec = GeneratorSpec { n: 1024, ..spec };
        assert_eq!(spec.generate().unwrap().node_count(), 1024);
    }
}
