//! Metropolis-Hastings over graphs.
//!
//! The chain state is a graph plus one [`CascadeState`] per cascade. A proposal
//! toggles one dyad; its log acceptance is the proposal ratio plus the Erdős–Rényi
//! prior ratio plus the summed per-cascade likelihood deltas, each of which touches
//! only the cascades containing the source node of a flipped arc.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cascade::{coactivated_dyads, Cascade, CascadeIndex};
use crate::error::{Error, Result};
use crate::eval::EdgeMarginals;
use crate::graph::{DyadSpace, Graph, Mode, NodeId};
use crate::likelihood::{CascadeState, DeltaRecord, ModelParams};

/// Erdős–Rényi prior: every dyad independently present with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    p: f64,
}

impl PriorConfig {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Probability {
                what: "prior edge probability (open interval)",
                value: p,
            });
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `ln P(G)` for a graph with `edges` of `dyads` possible edges.
    pub fn log_prior(&self, edges: usize, dyads: usize) -> f64 {
        edges as f64 * libm::log(self.p) + (dyads - edges) as f64 * libm::log1p(-self.p)
    }
}

/// `ln P(G') - ln P(G)` for adding (`add`) or removing one dyad.
pub fn log_prior_ratio(add: bool, prior: &PriorConfig) -> f64 {
    let odds = libm::log(prior.p) - libm::log1p(-prior.p);
    if add {
        odds
    } else {
        -odds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalKind {
    /// Tie/no-tie: pick the edge set or the non-edge set with equal probability, then
    /// toggle a uniform member of it.
    Tnt,
    /// Toggle a uniformly chosen dyad.
    UniformDyad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub iterations: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub proposal: ProposalKind,
    pub params: ModelParams,
    pub prior: PriorConfig,
    pub seed: u64,
    /// Only propose dyads joining time-ordered co-activated pairs.
    pub candidate_restriction: bool,
    /// Rebuild every cascade state after this many accepted moves (0 disables).
    pub refresh_interval: u64,
}

impl ChainConfig {
    /// `K = 20 n^2` steps, a quarter of them burn-in, one sample every `n^2 / 10` steps.
    pub fn for_nodes(n: usize, params: ModelParams, prior: PriorConfig, seed: u64) -> Self {
        let n2 = (n * n) as u64;
        let iterations = (20 * n2).max(1);
        Self {
            iterations,
            burn_in: iterations / 4,
            thinning: (n2 / 10).max(1),
            proposal: ProposalKind::Tnt,
            params,
            prior,
            seed,
            candidate_restriction: false,
            refresh_interval: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidArgument(
                "burn-in must be shorter than the chain",
            ));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidArgument(
                "thinning interval must be at least 1",
            ));
        }
        Ok(())
    }

    pub fn expected_samples(&self) -> u64 {
        (self.iterations - self.burn_in) / self.thinning
    }
}

/// Dyads the chain may toggle, partitioned so that the first `edges` entries are the
/// current edges. Toggling swaps a dyad across the boundary in O(1).
#[derive(Debug, Clone)]
pub struct DyadPartition {
    universe: Vec<usize>,
    slot: Vec<u32>,
    edges: usize,
}

const NOT_IN_UNIVERSE: u32 = u32::MAX;

impl DyadPartition {
    pub fn new(universe: Vec<usize>, dyads: usize, present: impl Fn(usize) -> bool) -> Self {
        let mut universe = universe;
        let mut edges = 0;
        for k in 0..universe.len() {
            if present(universe[k]) {
                universe.swap(k, edges);
                edges += 1;
            }
        }
        let mut slot = vec![NOT_IN_UNIVERSE; dyads];
        for (k, &d) in universe.iter().enumerate() {
            slot[d] = k as u32;
        }
        Self {
            universe,
            slot,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn non_edge_count(&self) -> usize {
        self.universe.len() - self.edges
    }

    pub fn edges(&self) -> &[usize] {
        &self.universe[..self.edges]
    }

    pub fn contains(&self, dyad: usize) -> bool {
        self.slot[dyad] != NOT_IN_UNIVERSE
    }

    pub fn is_edge(&self, dyad: usize) -> bool {
        (self.slot[dyad] as usize) < self.edges
    }

    pub fn toggle(&mut self, dyad: usize) {
        let k = self.slot[dyad] as usize;
        debug_assert!(k < self.universe.len());
        let target = if k < self.edges {
            self.edges -= 1;
            self.edges
        } else {
            self.edges += 1;
            self.edges - 1
        };
        let other = self.universe[target];
        self.universe.swap(k, target);
        self.slot[dyad] = target as u32;
        self.slot[other] = k as u32;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposedToggle {
    pub dyad: usize,
    pub i: NodeId,
    pub j: NodeId,
    pub add: bool,
    /// `ln Q(G' | G)`.
    pub log_q_forward: f64,
    /// `ln Q(G | G')`.
    pub log_q_reverse: f64,
}

impl ProposedToggle {
    pub fn log_q_ratio(&self) -> f64 {
        self.log_q_reverse - self.log_q_forward
    }
}

// Probability that TNT picks the addition (or removal) branch given the set sizes.
fn tnt_branch_probability(edges: usize, non_edges: usize, add: bool) -> f64 {
    match (edges, non_edges) {
        (0, _) => add as u8 as f64,
        (_, 0) => !add as u8 as f64,
        _ => 0.5,
    }
}

/// `(ln Q(G'|G), ln Q(G|G'))` for a TNT move from a graph with `edges` edges and
/// `non_edges` non-edges. An empty set is never chosen; the other set is then chosen
/// with probability one.
pub fn tnt_log_q(edges: usize, non_edges: usize, add: bool) -> (f64, f64) {
    let chosen = if add { non_edges } else { edges };
    let forward = tnt_branch_probability(edges, non_edges, add) / chosen as f64;
    let (e2, ne2) = if add {
        (edges + 1, non_edges - 1)
    } else {
        (edges - 1, non_edges + 1)
    };
    let back = if add { e2 } else { ne2 };
    let reverse = tnt_branch_probability(e2, ne2, !add) / back as f64;
    (libm::log(forward), libm::log(reverse))
}

/// Draws a TNT proposal from `partition`.
pub fn propose_tnt<R: Rng + ?Sized>(
    partition: &DyadPartition,
    space: &DyadSpace,
    rng: &mut R,
) -> Result<ProposedToggle> {
    let (e, ne) = (partition.edge_count(), partition.non_edge_count());
    if e + ne == 0 {
        return Err(Error::InvalidArgument("no dyads to propose"));
    }
    let add = match (e, ne) {
        (0, _) => true,
        (_, 0) => false,
        _ => rng.gen::<bool>(),
    };
    let k = if add {
        e + rng.gen_range(0..ne)
    } else {
        rng.gen_range(0..e)
    };
    let dyad = partition.universe[k];
    let (i, j) = space.pair(dyad);
    let (log_q_forward, log_q_reverse) = tnt_log_q(e, ne, add);
    Ok(ProposedToggle {
        dyad,
        i,
        j,
        add,
        log_q_forward,
        log_q_reverse,
    })
}

/// Draws a uniformly chosen dyad from `partition`; the proposal is symmetric.
pub fn propose_uniform<R: Rng + ?Sized>(
    partition: &DyadPartition,
    space: &DyadSpace,
    rng: &mut R,
) -> Result<ProposedToggle> {
    if partition.is_empty() {
        return Err(Error::InvalidArgument("no dyads to propose"));
    }
    let k = rng.gen_range(0..partition.len());
    let dyad = partition.universe[k];
    let (i, j) = space.pair(dyad);
    let log_q = -libm::log(partition.len() as f64);
    Ok(ProposedToggle {
        dyad,
        i,
        j,
        add: k >= partition.edges,
        log_q_forward: log_q,
        log_q_reverse: log_q,
    })
}

/// Graph joining every time-ordered pair of nodes that co-occur in some cascade.
///
/// Every non-root activation then has its cascade root as a parent, so the initial
/// likelihood is finite.
pub fn initial_graph(cascades: &[Cascade], n: usize, mode: Mode) -> Result<Graph> {
    let space = DyadSpace::new(n, mode);
    Graph::from_edges(
        n,
        mode,
        coactivated_dyads(cascades, &space)?
            .into_iter()
            .map(|d| space.pair(d)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub log_posterior: f64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainStats {
    pub steps: u64,
    pub proposed_add: u64,
    pub accepted_add: u64,
    pub proposed_remove: u64,
    pub accepted_remove: u64,
    pub samples: u64,
    pub refreshes: u64,
    pub trace: Vec<TracePoint>,
    pub final_log_posterior: f64,
    /// |cached - recomputed| log posterior at the end of the run.
    pub drift: f64,
}

impl ChainStats {
    pub fn acceptance_rate(&self) -> f64 {
        let proposed = self.proposed_add + self.proposed_remove;
        if proposed == 0 {
            0.0
        } else {
            (self.accepted_add + self.accepted_remove) as f64 / proposed as f64
        }
    }
}

/// A running Metropolis-Hastings chain.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    cascades: &'a [Cascade],
    index: CascadeIndex,
    config: ChainConfig,
    space: DyadSpace,
    graph: Graph,
    states: Vec<CascadeState>,
    partition: DyadPartition,
    rng: ChaCha8Rng,
    pending: Vec<(u32, DeltaRecord)>,
    stats: ChainStats,
    accepted_since_refresh: u64,
}

impl<'a> Chain<'a> {
    /// Starts from [`initial_graph`].
    pub fn new(cascades: &'a [Cascade], n: usize, mode: Mode, config: ChainConfig) -> Result<Self> {
        let graph = initial_graph(cascades, n, mode)?;
        Self::with_graph(cascades, graph, config)
    }

    /// Starts from an arbitrary feasible graph.
    pub fn with_graph(cascades: &'a [Cascade], graph: Graph, config: ChainConfig) -> Result<Self> {
        config.validate()?;
        let n = graph.node_count();
        let space = graph.dyad_space();
        let index = CascadeIndex::new(cascades, n)?;
        let universe = if config.candidate_restriction {
            coactivated_dyads(cascades, &space)?
        } else {
            (0..space.len()).collect()
        };
        let partition = DyadPartition::new(universe, space.len(), |d| {
            let (i, j) = space.pair(d);
            graph.has_edge(i, j)
        });
        if partition.edge_count() != graph.edge_count() {
            return Err(Error::InvalidArgument(
                "starting graph has edges outside the candidate set",
            ));
        }
        let states = cascades
            .iter()
            .map(|c| CascadeState::build(&graph, c, &config.params))
            .collect::<Result<Vec<_>>>()?;
        if states.iter().any(|s| !s.is_feasible()) {
            return Err(Error::InfeasibleInitialState);
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            cascades,
            index,
            config,
            space,
            graph,
            states,
            partition,
            rng,
            pending: Vec::new(),
            stats: ChainStats::default(),
            accepted_since_refresh: 0,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn space(&self) -> &DyadSpace {
        &self.space
    }

    pub fn states(&self) -> &[CascadeState] {
        &self.states
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn partition(&self) -> &DyadPartition {
        &self.partition
    }

    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn log_likelihood(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.log_lik(&self.config.params))
            .sum()
    }

    pub fn log_prior(&self) -> f64 {
        self.config
            .prior
            .log_prior(self.graph.edge_count(), self.space.len())
    }

    /// Unnormalized `ln P(G | C)` from the cached states.
    pub fn log_posterior(&self) -> f64 {
        self.log_likelihood() + self.log_prior()
    }

    /// Unnormalized `ln P(G | C)` rebuilt from the graph.
    pub fn recompute_log_posterior(&self) -> Result<f64> {
        let mut total = self.log_prior();
        for c in self.cascades {
            total += CascadeState::build(&self.graph, c, &self.config.params)?
                .log_lik(&self.config.params);
        }
        Ok(total)
    }

    pub fn propose(&mut self) -> Result<ProposedToggle> {
        match self.config.proposal {
            ProposalKind::Tnt => propose_tnt(&self.partition, &self.space, &mut self.rng),
            ProposalKind::UniformDyad => {
                propose_uniform(&self.partition, &self.space, &mut self.rng)
            }
        }
    }

    /// Summed likelihood change of `proposal`; per-cascade deltas are kept for
    /// [`Chain::accept`]. Stops early at `-inf`.
    pub fn likelihood_delta(&mut self, proposal: &ProposedToggle) -> f64 {
        self.pending.clear();
        let (i, j) = (proposal.i, proposal.j);
        let arcs: &[(NodeId, NodeId)] = match self.space.mode() {
            Mode::Directed => &[(i, j)],
            Mode::Undirected => &[(i, j), (j, i)],
        };
        let params = &self.config.params;
        let mut total = 0.0;
        for &(u, v) in arcs {
            for &(ci, pos_u) in self.index.of(u) {
                let state = &self.states[ci as usize];
                let cascade = &self.cascades[ci as usize];
                let (dr, update) = state.arc_delta(
                    &self.graph,
                    cascade,
                    pos_u as usize,
                    v,
                    proposal.add,
                    params,
                );
                let record = state.assemble(dr, update, params);
                total += record.delta_log_lik;
                if total == f64::NEG_INFINITY {
                    return total;
                }
                self.pending.push((ci, record));
            }
        }
        total
    }

    /// `min(0, ln Q ratio + ln prior ratio + ln likelihood ratio)`.
    pub fn log_acceptance(&mut self, proposal: &ProposedToggle) -> f64 {
        let lik = self.likelihood_delta(proposal);
        if lik == f64::NEG_INFINITY {
            return lik;
        }
        let log_ratio =
            proposal.log_q_ratio() + log_prior_ratio(proposal.add, &self.config.prior) + lik;
        log_ratio.min(0.0)
    }

    /// Applies `proposal` using the deltas from the preceding [`Chain::log_acceptance`].
    pub fn accept(&mut self, proposal: &ProposedToggle) -> Result<()> {
        for (ci, record) in self.pending.drain(..) {
            self.states[ci as usize].apply(&record)?;
        }
        self.graph.toggle_edge(proposal.i, proposal.j)?;
        self.partition.toggle(proposal.dyad);
        self.accepted_since_refresh += 1;
        if self.config.refresh_interval > 0
            && self.accepted_since_refresh >= self.config.refresh_interval
        {
            self.refresh()?;
        }
        Ok(())
    }

    /// Rebuilds every cascade state from the graph; returns the largest per-cascade
    /// log-likelihood change.
    pub fn refresh(&mut self) -> Result<f64> {
        let params = self.config.params;
        let mut worst: f64 = 0.0;
        for (state, c) in self.states.iter_mut().zip(self.cascades) {
            let fresh = CascadeState::build(&self.graph, c, &params)?;
            let (a, b) = (state.log_lik(&params), fresh.log_lik(&params));
            if a != b {
                worst = worst.max(libm::fabs(a - b));
            }
            *state = fresh;
        }
        debug_assert!(worst < 1e-8, "likelihood cache drifted by {worst}");
        self.accepted_since_refresh = 0;
        self.stats.refreshes += 1;
        Ok(worst)
    }

    /// One Metropolis-Hastings step. Returns whether the proposal was accepted.
    pub fn step(&mut self) -> Result<bool> {
        let proposal = self.propose()?;
        let log_a = self.log_acceptance(&proposal);
        let u: f64 = self.rng.gen();
        let accepted = libm::log(u) < log_a;
        self.stats.steps += 1;
        if proposal.add {
            self.stats.proposed_add += 1;
            self.stats.accepted_add += accepted as u64;
        } else {
            self.stats.proposed_remove += 1;
            self.stats.accepted_remove += accepted as u64;
        }
        if accepted {
            self.accept(&proposal)?;
        }
        Ok(accepted)
    }

    /// Runs the configured number of steps, counting edge presence at every
    /// `thinning`-th step after burn-in.
    pub fn run(mut self) -> Result<ChainOutput> {
        let mut counts = vec![0u64; self.space.len()];
        let (burn_in, thinning) = (self.config.burn_in, self.config.thinning);
        for t in 1..=self.config.iterations {
            self.step()?;
            if t > burn_in && (t - burn_in) % thinning == 0 {
                for &d in self.partition.edges() {
                    counts[d] += 1;
                }
                self.stats.samples += 1;
                let point = TracePoint {
                    step: t,
                    log_posterior: self.log_posterior(),
                    acceptance_rate: self.stats.acceptance_rate(),
                };
                self.stats.trace.push(point);
            }
        }
        self.stats.final_log_posterior = self.log_posterior();
        self.stats.drift =
            libm::fabs(self.stats.final_log_posterior - self.recompute_log_posterior()?);
        let fixed = self.analytic_marginals();
        Ok(ChainOutput {
            counts,
            stats: self.stats,
            config: self.config,
            graph: self.graph,
            fixed,
        })
    }

    // Dyads excluded by candidate restriction whose likelihood contribution is
    // identically zero have marginal exactly `p`.
    fn analytic_marginals(&self) -> Vec<(usize, f64)> {
        if !self.config.candidate_restriction {
            return Vec::new();
        }
        let p = self.config.prior.p();
        let undirected = self.space.mode() == Mode::Undirected;
        (0..self.space.len())
            .filter(|&d| !self.partition.contains(d))
            .filter(|&d| {
                let (i, j) = self.space.pair(d);
                !self.index.appears(i) && !(undirected && self.index.appears(j))
            })
            .map(|d| (d, p))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// Edge presence counts indexed by dyad.
    pub counts: Vec<u64>,
    pub stats: ChainStats,
    pub config: ChainConfig,
    /// Graph at the end of the chain.
    pub graph: Graph,
    /// Dyads whose marginal is known analytically (candidate restriction only).
    pub fixed: Vec<(usize, f64)>,
}

impl ChainOutput {
    pub fn samples(&self) -> u64 {
        self.stats.samples
    }

    pub fn marginals(&self) -> Result<EdgeMarginals> {
        let mut m = EdgeMarginals::from_counts(
            &self.counts,
            self.stats.samples,
            self.graph.node_count(),
            self.graph.mode(),
        )?;
        for &(d, q) in &self.fixed {
            m.set_by_index(d, q);
        }
        Ok(m)
    }
}

/// Builds the initial graph and runs one chain.
pub fn run_chain(
    cascades: &[Cascade],
    n: usize,
    mode: Mode,
    config: ChainConfig,
) -> Result<ChainOutput> {
    Chain::new(cascades, n, mode, config)?.run()
}

/// Chains pooled by summing counts.
#[derive(Debug, Clone)]
pub struct MergedChains {
    pub marginals: EdgeMarginals,
    pub counts: Vec<u64>,
    pub samples: u64,
    /// Largest spread of any dyad's marginal across chains.
    pub discrepancy: f64,
}

/// Pools chains that share iterations, burn-in and thinning.
pub fn merge_chains(outputs: &[ChainOutput]) -> Result<MergedChains> {
    let first = outputs
        .first()
        .ok_or(Error::InvalidArgument("no chains to merge"))?;
    for o in &outputs[1..] {
        let (a, b) = (&first.config, &o.config);
        if a.iterations != b.iterations || a.burn_in != b.burn_in || a.thinning != b.thinning {
            return Err(Error::ConfigMismatch(
                "chains differ in iterations, burn-in or thinning",
            ));
        }
        if o.graph.node_count() != first.graph.node_count() || o.graph.mode() != first.graph.mode()
        {
            return Err(Error::ConfigMismatch("chains differ in node count or mode"));
        }
    }
    let per_chain = outputs
        .iter()
        .map(ChainOutput::marginals)
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0u64; first.counts.len()];
    for o in outputs {
        for (acc, &c) in counts.iter_mut().zip(&o.counts) {
            *acc += c;
        }
    }
    let samples = outputs.iter().map(ChainOutput::samples).sum();
    let mut marginals = EdgeMarginals::from_counts(
        &counts,
        samples,
        first.graph.node_count(),
        first.graph.mode(),
    )?;
    for &(d, q) in &first.fixed {
        marginals.set_by_index(d, q);
    }
    let mut discrepancy: f64 = 0.0;
    for d in 0..counts.len() {
        let (lo, hi) = per_chain
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
                let q = m.by_index(d);
                (lo.min(q), hi.max(q))
            });
        discrepancy = discrepancy.max(hi - lo);
    }
    Ok(MergedChains {
        marginals,
        counts,
        samples,
        discrepancy,
    })
}
