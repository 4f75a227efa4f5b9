//! Cascades, continuous-time independent cascade simulation and edge coverage.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{DyadSpace, Graph, NodeId};

/// Gap inserted between activations that share a timestamp.
pub const TIE_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub node: NodeId,
    pub time: f64,
}

impl Activation {
    pub fn new(node: NodeId, time: f64) -> Self {
        Self { node, time }
    }
}

/// Time-ordered activation record with a unique root at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    id: u32,
    events: Vec<Activation>,
    // (node, position in `events`), sorted by node.
    by_node: Vec<(NodeId, u32)>,
}

impl Cascade {
    /// Sorts, validates and normalizes a set of activations.
    ///
    /// Times are shifted so the root fires at 0. Activations with equal timestamps
    /// are ordered by node id and pushed apart by [`TIE_JITTER`] so that times are
    /// strictly increasing.
    pub fn new(id: u32, mut events: Vec<Activation>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyCascade(id));
        }
        if events.iter().any(|e| !e.time.is_finite()) {
            return Err(Error::InvalidArgument("activation times must be finite"));
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.node.cmp(&b.node)));
        let mut by_node: Vec<(NodeId, u32)> = events
            .iter()
            .enumerate()
            .map(|(k, e)| (e.node, k as u32))
            .collect();
        by_node.sort_unstable();
        if let Some(w) = by_node.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateNode {
                cascade: id,
                node: w[0].0,
            });
        }
        let t0 = events[0].time;
        for e in events.iter_mut() {
            e.time -= t0;
        }
        for k in 1..events.len() {
            let prev = events[k - 1].time;
            if events[k].time <= prev {
                events[k].time = (prev + TIE_JITTER).max(prev.next_up());
            }
        }
        Ok(Self {
            id,
            events,
            by_node,
        })
    }

    pub fn from_pairs(id: u32, pairs: &[(NodeId, f64)]) -> Result<Self> {
        Self::new(
            id,
            pairs
                .iter()
                .map(|&(node, time)| Activation { node, time })
                .collect(),
        )
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// A cascade whose seed infected nobody.
    pub fn is_singleton(&self) -> bool {
        self.events.len() == 1
    }

    pub fn root(&self) -> NodeId {
        self.events[0].node
    }

    pub fn events(&self) -> &[Activation] {
        &self.events
    }

    pub fn node(&self, pos: usize) -> NodeId {
        self.events[pos].node
    }

    pub fn time(&self, pos: usize) -> f64 {
        self.events[pos].time
    }

    /// Position of `node` in activation order, if it was activated.
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.by_node
            .binary_search_by_key(&node, |&(v, _)| v)
            .ok()
            .map(|k| self.by_node[k].1 as usize)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.position(node).is_some()
    }

    pub fn max_node(&self) -> NodeId {
        self.by_node.last().map(|&(v, _)| v).unwrap_or(0)
    }
}

/// For each node, the cascades it appears in and its activation position there.
#[derive(Debug, Clone)]
pub struct CascadeIndex {
    entries: Vec<Vec<(u32, u32)>>,
}

impl CascadeIndex {
    pub fn new(cascades: &[Cascade], n: usize) -> Result<Self> {
        let mut entries = vec![Vec::new(); n];
        for (c, cascade) in cascades.iter().enumerate() {
            for (pos, e) in cascade.events().iter().enumerate() {
                let slot = entries
                    .get_mut(e.node as usize)
                    .ok_or(Error::NodeOutOfRange { node: e.node, n })?;
                slot.push((c as u32, pos as u32));
            }
        }
        Ok(Self { entries })
    }

    /// `(cascade index, activation position)` pairs for `node`.
    pub fn of(&self, node: NodeId) -> &[(u32, u32)] {
        &self.entries[node as usize]
    }

    pub fn appears(&self, node: NodeId) -> bool {
        !self.entries[node as usize].is_empty()
    }
}

/// Who-infected-whom structure of a simulated cascade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionTree {
    pub root: NodeId,
    /// `(child, parent)` in activation order.
    pub parent: Vec<(NodeId, NodeId)>,
}

impl TransmissionTree {
    /// Tree edges as `(parent, child)` arcs.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parent.iter().map(|&(child, parent)| (parent, child))
    }

    pub fn parent_of(&self, child: NodeId) -> Option<NodeId> {
        self.parent
            .iter()
            .find(|&&(c, _)| c == child)
            .map(|&(_, p)| p)
    }
}

#[derive(Debug, Clone, Copy)]
struct Attempt {
    time: f64,
    seq: u64,
    source: NodeId,
    target: NodeId,
}

impl PartialEq for Attempt {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Attempt {}

impl PartialOrd for Attempt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Attempt {
    // Reversed so that `BinaryHeap` pops the earliest attempt.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

// Uniform on the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.gen::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential waiting time with mean `alpha`.
pub fn exponential_delay<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    -alpha * libm::log(open_unit(rng))
}

/// Continuous-time independent cascade from `seed_node`.
///
/// When `u` activates at `t_u`, each out-neighbour `v` (in id order) is attempted
/// with probability `beta`, scheduled at `t_u + Exp(alpha)`. A node takes the time and
/// parent of its earliest successful attempt; attempts on nodes that are already
/// active are scheduled and then discarded.
pub fn simulate_ic<R: Rng + ?Sized>(
    g: &Graph,
    seed_node: NodeId,
    beta: f64,
    alpha: f64,
    id: u32,
    rng: &mut R,
) -> Result<(Cascade, TransmissionTree)> {
    if seed_node as usize >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            node: seed_node,
            n: g.node_count(),
        });
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Probability {
            what: "transmission probability",
            value: beta,
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument("mean waiting time must be positive"));
    }
    let mut active = vec![false; g.node_count()];
    let mut events = vec![Activation::new(seed_node, 0.0)];
    let mut parent = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    let mut schedule = |u: NodeId, t_u: f64, heap: &mut BinaryHeap<Attempt>, rng: &mut R| {
        for &v in g.out_neighbors(u) {
            if rng.gen::<f64>() < beta {
                let time = t_u + exponential_delay(alpha, rng);
                heap.push(Attempt {
                    time,
                    seq,
                    source: u,
                    target: v,
                });
                seq += 1;
            }
        }
    };

    active[seed_node as usize] = true;
    schedule(seed_node, 0.0, &mut heap, rng);
    while let Some(a) = heap.pop() {
        if active[a.target as usize] {
            continue;
        }
        active[a.target as usize] = true;
        events.push(Activation::new(a.target, a.time));
        parent.push((a.target, a.source));
        schedule(a.target, a.time, &mut heap, rng);
    }
    let cascade = Cascade::new(id, events)?;
    Ok((
        cascade,
        TransmissionTree {
            root: seed_node,
            parent,
        },
    ))
}

/// Set of graph edges that carried at least one transmission.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    space: DyadSpace,
    activated: Vec<bool>,
    activated_count: usize,
    edge_count: usize,
}

impl CoverageTracker {
    pub fn new(g: &Graph) -> Self {
        let space = g.dyad_space();
        let activated = vec![false; space.len()];
        Self {
            space,
            activated,
            activated_count: 0,
            edge_count: g.edge_count(),
        }
    }

    /// Marks the tree's edges as activated. Every tree edge must be an edge of `g`.
    pub fn add_tree(&mut self, g: &Graph, tree: &TransmissionTree) -> Result<()> {
        for (u, v) in tree.edges() {
            if !g.has_edge(u, v) {
                return Err(Error::TreeEdgeNotInGraph(u, v));
            }
        }
        for (u, v) in tree.edges() {
            let d = self.space.index(u, v).expect("edge endpoints validated");
            if !self.activated[d] {
                self.activated[d] = true;
                self.activated_count += 1;
            }
        }
        Ok(())
    }

    pub fn activated_edges(&self) -> usize {
        self.activated_count
    }

    /// Activated fraction of the graph's edges; an edgeless graph counts as fully covered.
    pub fn fraction(&self) -> f64 {
        if self.edge_count == 0 {
            1.0
        } else {
            self.activated_count as f64 / self.edge_count as f64
        }
    }
}

/// Fraction of `g`'s edges (unordered pairs in undirected mode) used by any tree.
pub fn coverage_fraction(trees: &[TransmissionTree], g: &Graph) -> Result<f64> {
    let mut tracker = CoverageTracker::new(g);
    for tree in trees {
        tracker.add_tree(g, tree)?;
    }
    Ok(tracker.fraction())
}

#[derive(Debug, Clone)]
pub struct CoverageRun {
    pub cascades: Vec<Cascade>,
    pub trees: Vec<TransmissionTree>,
    pub achieved_f: f64,
    pub reached: bool,
}

impl CoverageRun {
    pub fn singleton_count(&self) -> usize {
        self.cascades.iter().filter(|c| c.is_singleton()).count()
    }

    pub fn mean_cascade_size(&self) -> f64 {
        if self.cascades.is_empty() {
            return 0.0;
        }
        self.cascades.iter().map(Cascade::len).sum::<usize>() as f64 / self.cascades.len() as f64
    }
}

/// Simulates cascades from uniformly random seeds until at least `f_target` of the
/// edges have transmitted, or `max_cascades` cascades exist.
///
/// Singleton cascades are kept. Cascade ids are `0, 1, 2, ...` in simulation order.
pub fn generate_until_coverage<R: Rng + ?Sized>(
    g: &Graph,
    beta: f64,
    alpha: f64,
    f_target: f64,
    max_cascades: usize,
    rng: &mut R,
) -> Result<CoverageRun> {
    if !(0.0..=1.0).contains(&f_target) {
        return Err(Error::Probability {
            what: "coverage target",
            value: f_target,
        });
    }
    let mut tracker = CoverageTracker::new(g);
    let mut cascades = Vec::new();
    let mut trees = Vec::new();
    if f_target == 0.0 {
        return Ok(CoverageRun {
            cascades,
            trees,
            achieved_f: 0.0,
            reached: true,
        });
    }
    while tracker.fraction() < f_target && cascades.len() < max_cascades {
        let seed_node = rng.gen_range(0..g.node_count()) as NodeId;
        let (cascade, tree) = simulate_ic(g, seed_node, beta, alpha, cascades.len() as u32, rng)?;
        tracker.add_tree(g, &tree)?;
        cascades.push(cascade);
        trees.push(tree);
    }
    let achieved_f = tracker.fraction();
    Ok(CoverageRun {
        cascades,
        trees,
        achieved_f,
        reached: achieved_f >= f_target,
    })
}

/// Dyads connecting time-ordered pairs of co-activated nodes, deduplicated and sorted.
///
/// Directed mode yields arcs `(earlier, later)`; undirected mode yields unordered pairs.
pub fn coactivated_dyads(cascades: &[Cascade], space: &DyadSpace) -> Result<Vec<usize>> {
    let mut seen = vec![false; space.len()];
    let mut dyads = Vec::new();
    let n = space.node_count();
    for c in cascades {
        if c.max_node() as usize >= n {
            return Err(Error::NodeOutOfRange {
                node: c.max_node(),
                n,
            });
        }
        let events = c.events();
        for (a, ea) in events.iter().enumerate() {
            for eb in &events[a + 1..] {
                let d = space
                    .index(ea.node, eb.node)
                    .expect("distinct in-range nodes");
                if !seen[d] {
                    seen[d] = true;
                    dyads.push(d);
                }
            }
        }
    }
    dyads.sort_unstable();
    Ok(dyads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cascade_normalizes_and_indexes() {
        let c = Cascade::from_pairs(4, &[(7, 3.2), (3, 2.0)]).unwrap();
        assert_eq!(c.root(), 3);
        assert_eq!(c.time(0), 0.0);
        assert!((c.time(1) - 1.2).abs() < 1e-12);
        assert_eq!(c.position(7), Some(1));
        assert_eq!(c.position(5), None);
        assert!(!c.is_singleton());
    }

    #[test]
    fn duplicates_and_ties() {
        let err = Cascade::from_pairs(9, &[(3, 0.0), (3, 0.5)]).unwrap_err();
        assert_eq!(
            err,
            Error::DuplicateNode {
                cascade: 9,
                node: 3
            }
        );
        let c = Cascade::from_pairs(0, &[(5, 1.0), (2, 1.0), (4, 1.0), (1, 0.0)]).unwrap();
        let nodes: Vec<_> = c.events().iter().map(|e| e.node).collect();
        assert_eq!(nodes, vec![1, 2, 4, 5]);
        assert_eq!(c.time(1), 1.0);
        assert!((c.time(2) - (1.0 + TIE_JITTER)).abs() < 1e-15);
        assert!(c.time(3) > c.time(2));
        assert!(Cascade::new(0, Vec::new()).is_err());
    }

    #[test]
    fn zero_beta_gives_singletons() {
        let g = Graph::from_edges(3, Mode::Directed, [(0, 1), (1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (c, tree) = simulate_ic(&g, 0, 0.0, 1.0, 0, &mut rng).unwrap();
            assert!(c.is_singleton());
            assert!(tree.parent.is_empty());
        }
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(
            coverage_fraction(&[], &Graph::new(3, Mode::Undirected).unwrap()).unwrap(),
            1.0
        );
        let path = Graph::from_edges(3, Mode::Undirected, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(coverage_fraction(&[], &path).unwrap(), 0.0);
        let tree = TransmissionTree {
            root: 0,
            parent: vec![(1, 0), (2, 1)],
        };
        assert_eq!(coverage_fraction(&[tree], &path).unwrap(), 1.0);
        let triangle = Graph::from_edges(3, Mode::Undirected, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let tree = TransmissionTree {
            root: 1,
            parent: vec![(0, 1), (2, 1)],
        };
        assert!((coverage_fraction(&[tree], &triangle).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let bogus = TransmissionTree {
            root: 0,
            parent: vec![(2, 0)],
        };
        assert_eq!(
            coverage_fraction(&[bogus], &path).unwrap_err(),
            Error::TreeEdgeNotInGraph(0, 2)
        );
    }

    #[test]
    fn zero_target_and_unreachable_target() {
        let g = Graph::from_edges(3, Mode::Undirected, [(0, 1), (1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let run = generate_until_coverage(&g, 0.4, 1.0, 0.0, 100, &mut rng).unwrap();
        assert!(run.cascades.is_empty() && run.achieved_f == 0.0);
        let run = generate_until_coverage(&g, 0.0, 1.0, 0.9, 50, &mut rng).unwrap();
        assert_eq!(run.cascades.len(), 50);
        assert!(!run.reached);
        assert_eq!(run.singleton_count(), 50);
    }

    #[test]
    fn coactivated_dyads_are_time_ordered() {
        let space = DyadSpace::new(3, Mode::Directed);
        let c = Cascade::from_pairs(0, &[(0, 0.0), (1, 1.0), (2, 2.0)]).unwrap();
        let dyads = coactivated_dyads(&[c.clone(), c], &space).unwrap();
        let pairs: Vec<_> = dyads.iter().map(|&d| space.pair(d)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }
}
