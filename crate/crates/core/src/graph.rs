//! Simple directed/undirected graphs over dense node ids, plus dyad indexing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense, zero-based node index.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Directed,
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToggleOutcome {
    Added,
    Removed,
}

/// Bijection between dyads and `0..M`.
///
/// Directed dyads are ordered pairs `(i, j)`, `i != j`, so `M = n(n-1)`. Undirected
/// dyads are unordered pairs, stored as `(i, j)` with `i < j`, so `M = n(n-1)/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadSpace {
    n: usize,
    mode: Mode,
    // Undirected only: index of the first dyad whose smaller endpoint is `i`.
    row_start: Vec<usize>,
}

impl DyadSpace {
    pub fn new(n: usize, mode: Mode) -> Self {
        let row_start = match mode {
            Mode::Directed => Vec::new(),
            Mode::Undirected => {
                let mut starts = Vec::with_capacity(n);
                let mut acc = 0;
                for i in 0..n {
                    starts.push(acc);
                    acc += n - i - 1;
                }
                starts
            }
        };
        Self { n, mode, row_start }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        dyad_count(self.n, self.mode)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of dyad `(i, j)`; for undirected spaces the order of `i`, `j` is irrelevant.
    pub fn index(&self, i: NodeId, j: NodeId) -> Option<usize> {
        let (i, j) = (i as usize, j as usize);
        if i == j || i >= self.n || j >= self.n {
            return None;
        }
        Some(match self.mode {
            Mode::Directed => i * (self.n - 1) + if j > i { j - 1 } else { j },
            Mode::Undirected => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                self.row_start[a] + (b - a - 1)
            }
        })
    }

    /// Inverse of [`DyadSpace::index`]. Undirected pairs come back with `i < j`.
    pub fn pair(&self, index: usize) -> (NodeId, NodeId) {
        debug_assert!(index < self.len());
        match self.mode {
            Mode::Directed => {
                let i = index / (self.n - 1);
                let r = index % (self.n - 1);
                let j = if r >= i { r + 1 } else { r };
                (i as NodeId, j as NodeId)
            }
            Mode::Undirected => {
                let a = self.row_start.partition_point(|&s| s <= index) - 1;
                let b = index - self.row_start[a] + a + 1;
                (a as NodeId, b as NodeId)
            }
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.len()).map(move |d| self.pair(d))
    }
}

/// `n(n-1)` for directed graphs, `n(n-1)/2` for undirected ones.
pub fn dyad_count(n: usize, mode: Mode) -> usize {
    let ordered = n * n.saturating_sub(1);
    match mode {
        Mode::Directed => ordered,
        Mode::Undirected => ordered / 2,
    }
}

/// Simple graph (no self-loops, no parallel edges) over nodes `0..n`.
///
/// Undirected graphs keep both arcs of every edge in the adjacency lists so that
/// cascade code can treat both modes alike; `edge_count` still counts unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    mode: Mode,
    out: Vec<Vec<NodeId>>,
    // Directed only; undirected in-neighbours are the out-neighbours.
    inc: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(n: usize, mode: Mode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node"));
        }
        if n > NodeId::MAX as usize {
            return Err(Error::InvalidArgument("too many nodes"));
        }
        let inc = match mode {
            Mode::Directed => vec![Vec::new(); n],
            Mode::Undirected => Vec::new(),
        };
        Ok(Self {
            n,
            mode,
            out: vec![Vec::new(); n],
            inc,
            edge_count: 0,
        })
    }

    /// Builds a graph from an edge iterator, ignoring duplicates. Self-loops are errors.
    pub fn from_edges<I>(n: usize, mode: Mode, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new(n, mode)?;
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn dyad_count(&self) -> usize {
        dyad_count(self.n, self.mode)
    }

    pub fn dyad_space(&self) -> DyadSpace {
        DyadSpace::new(self.n, self.mode)
    }

    /// Fraction of dyads that are edges.
    pub fn density(&self) -> f64 {
        match self.dyad_count() {
            0 => 0.0,
            m => self.edge_count as f64 / m as f64,
        }
    }

    fn check(&self, i: NodeId, j: NodeId) -> Result<()> {
        for node in [i, j] {
            if node as usize >= self.n {
                return Err(Error::NodeOutOfRange { node, n: self.n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(())
    }

    /// Arc `(i, j)` present; in undirected mode equivalent to `has_edge(j, i)`.
    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        (i as usize) < self.n && self.out[i as usize].binary_search(&j).is_ok()
    }

    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out[u as usize]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        match self.mode {
            Mode::Directed => &self.inc[v as usize],
            Mode::Undirected => &self.out[v as usize],
        }
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out[u as usize].len()
    }

    fn insert_arc(&mut self, u: NodeId, v: NodeId) -> bool {
        let list = &mut self.out[u as usize];
        match list.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                list.insert(pos, v);
                if self.mode == Mode::Directed {
                    let inc = &mut self.inc[v as usize];
                    let pos = inc.binary_search(&u).unwrap_err();
                    inc.insert(pos, u);
                }
                true
            }
        }
    }

    fn remove_arc(&mut self, u: NodeId, v: NodeId) -> bool {
        let list = &mut self.out[u as usize];
        match list.binary_search(&v) {
            Err(_) => false,
            Ok(pos) => {
                list.remove(pos);
                if self.mode == Mode::Directed {
                    let inc = &mut self.inc[v as usize];
                    let pos = inc.binary_search(&u).expect("in-list out of sync");
                    inc.remove(pos);
                }
                true
            }
        }
    }

    /// Inserts the edge if absent. Returns whether the graph changed.
    pub fn add_edge(&mut self, i: NodeId, j: NodeId) -> Result<bool> {
        self.check(i, j)?;
        let added = self.insert_arc(i, j);
        if added {
            if self.mode == Mode::Undirected {
                self.insert_arc(j, i);
            }
            self.edge_count += 1;
        }
        Ok(added)
    }

    /// Removes the edge if present. Returns whether the graph changed.
    pub fn remove_edge(&mut self, i: NodeId, j: NodeId) -> Result<bool> {
        self.check(i, j)?;
        let removed = self.remove_arc(i, j);
        if removed {
            if self.mode == Mode::Undirected {
                self.remove_arc(j, i);
            }
            self.edge_count -= 1;
        }
        Ok(removed)
    }

    pub fn toggle_edge(&mut self, i: NodeId, j: NodeId) -> Result<ToggleOutcome> {
        self.check(i, j)?;
        if self.has_edge(i, j) {
            self.remove_edge(i, j)?;
            Ok(ToggleOutcome::Removed)
        } else {
            self.add_edge(i, j)?;
            Ok(ToggleOutcome::Added)
        }
    }

    /// Every arc `(u, v)`; undirected edges appear in both orientations.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u as NodeId, v)))
    }

    /// Every edge once: arcs in directed mode, `(i, j)` with `i < j` in undirected mode.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let undirected = self.mode == Mode::Undirected;
        self.arcs().filter(move |&(u, v)| !undirected || u < v)
    }

    /// Subgraph induced by `nodes`, relabelled so that `nodes[k]` becomes node `k`.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Result<Graph> {
        let mut relabel = vec![NodeId::MAX; self.n];
        for (k, &v) in nodes.iter().enumerate() {
            if v as usize >= self.n {
                return Err(Error::NodeOutOfRange { node: v, n: self.n });
            }
            relabel[v as usize] = k as NodeId;
        }
        let mut sub = Graph::new(nodes.len(), self.mode)?;
        for (u, v) in self.edges() {
            let (a, b) = (relabel[u as usize], relabel[v as usize]);
            if a != NodeId::MAX && b != NodeId::MAX {
                sub.add_edge(a, b)?;
            }
        }
        Ok(sub)
    }

    /// Recomputes every cached quantity and checks the structural invariants.
    pub fn is_consistent(&self) -> bool {
        let mut arcs = 0usize;
        for (u, vs) in self.out.iter().enumerate() {
            if vs.windows(2).any(|w| w[0] >= w[1])
                || vs.iter().any(|&v| v as usize == u || v as usize >= self.n)
            {
                return false;
            }
            arcs += vs.len();
            for &v in vs {
                let reverse_ok = match self.mode {
                    Mode::Directed => self.inc[v as usize].binary_search(&(u as NodeId)).is_ok(),
                    Mode::Undirected => self.out[v as usize].binary_search(&(u as NodeId)).is_ok(),
                };
                if !reverse_ok {
                    return false;
                }
            }
        }
        match self.mode {
            Mode::Directed => {
                arcs == self.edge_count && self.inc.iter().map(Vec::len).sum::<usize>() == arcs
            }
            Mode::Undirected => arcs == 2 * self.edge_count,
        }
    }
}

/// Induced subgraph on the nodes whose label equals `department`.
///
/// Returns the subgraph together with the original ids of its nodes.
pub fn restrict_to_department(
    g: &Graph,
    labels: &[u32],
    department: u32,
) -> Result<(Graph, Vec<NodeId>)> {
    if labels.len() != g.node_count() {
        return Err(Error::Dimension("department labels must cover every node"));
    }
    let nodes: Vec<NodeId> = labels
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == department)
        .map(|(v, _)| v as NodeId)
        .collect();
    if nodes.is_empty() {
        return Err(Error::UnknownDepartment(department));
    }
    Ok((g.induced_subgraph(&nodes)?, nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_graph_dyad_counts() {
        assert_eq!(Graph::new(5, Mode::Directed).unwrap().dyad_count(), 20);
        assert_eq!(Graph::new(5, Mode::Undirected).unwrap().dyad_count(), 10);
        let mut g = Graph::new(1, Mode::Directed).unwrap();
        assert_eq!(g.dyad_count(), 0);
        assert!(g.toggle_edge(0, 0).is_err());
        assert!(g.toggle_edge(0, 1).is_err());
        assert_eq!(
            Graph::new(0, Mode::Directed),
            Err(Error::InvalidArgument("graph needs at least one node"))
        );
    }

    #[test]
    fn toggle_is_an_involution() {
        let mut g = Graph::new(3, Mode::Directed).unwrap();
        assert_eq!(g.toggle_edge(0, 1), Ok(ToggleOutcome::Added));
        assert_eq!(g.out_degree(0), 1);
        assert_eq!(g.in_neighbors(1), &[0]);
        assert_eq!(g.toggle_edge(0, 1), Ok(ToggleOutcome::Removed));
        assert_eq!(g, Graph::new(3, Mode::Directed).unwrap());
        assert_eq!(g.toggle_edge(2, 2), Err(Error::SelfLoop(2)));
    }

    #[test]
    fn undirected_toggle_is_symmetric() {
        let mut g = Graph::new(3, Mode::Undirected).unwrap();
        g.toggle_edge(1, 2).unwrap();
        assert!(g.has_edge(1, 2) && g.has_edge(2, 1));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(g.toggle_edge(2, 1), Ok(ToggleOutcome::Removed));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn department_restriction() {
        let g = Graph::from_edges(4, Mode::Undirected, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let (sub, kept) = restrict_to_department(&g, &[7, 7, 3, 7], 7).unwrap();
        assert_eq!(kept, vec![0, 1, 3]);
        assert_eq!(sub.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert_eq!(
            restrict_to_department(&g, &[7, 7, 3, 7], 5).unwrap_err(),
            Error::UnknownDepartment(5)
        );
        assert!(restrict_to_department(&g, &[7, 7], 7).is_err());
    }

    proptest! {
        #[test]
        fn dyad_index_roundtrip(n in 2usize..40, directed in any::<bool>()) {
            let mode = if directed { Mode::Directed } else { Mode::Undirected };
            let space = DyadSpace::new(n, mode);
            for d in 0..space.len() {
                let (i, j) = space.pair(d);
                prop_assert!(i != j);
                prop_assert_eq!(space.index(i, j), Some(d));
                if !directed {
                    prop_assert!(i < j);
                    prop_assert_eq!(space.index(j, i), Some(d));
                }
            }
        }

        #[test]
        fn toggles_keep_caches_consistent(
            n in 1usize..8,
            directed in any::<bool>(),
            ops in proptest::collection::vec((0u32..8, 0u32..8), 0..60),
        ) {
            let mode = if directed { Mode::Directed } else { Mode::Undirected };
            let mut g = Graph::new(n, mode).unwrap();
            for &(i, j) in &ops {
                let before = g.clone();
                match g.toggle_edge(i, j) {
                    Ok(_) => {
                        prop_assert!(g.is_consistent());
                        let mut twice = g.clone();
                        twice.toggle_edge(i, j).unwrap();
                        prop_assert_eq!(&twice, &before);
                    }
                    Err(_) => prop_assert_eq!(&g, &before),
                }
                for u in 0..n as NodeId {
                    prop_assert_eq!(g.out_degree(u), g.arcs().filter(|&(a, _)| a == u).count());
                }
            }
        }
    }
}
