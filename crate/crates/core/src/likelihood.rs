//! Cascade likelihood under the continuous-time independent cascade model.
//!
//! For a cascade `c` on graph `G`,
//!
//! ```text
//! P(c | G) = beta^q (1 - beta)^r * sum over time-respecting arborescences T of prod w(u, v)
//! ```
//!
//! with `q = |V_c| - 1` and `r = sum_{u in V_c} d_out(u) - q`. Ordering the cascade
//! nodes by activation time makes the root-deleted weighted Laplacian triangular, so
//! the arborescence sum is `prod_v S_v`, where `S_v` is the total weight of arcs into
//! `v` from nodes activated before it. [`CascadeState`] caches `r` and every `S_v` so
//! an edge toggle changes the log-likelihood in O(1).

use alloc::vec;
use alloc::vec::Vec;

use crate::cascade::Cascade;
use crate::error::{Error, Result};
use crate::graph::{Graph, Mode, NodeId};

/// Transmission-time weight family.
///
/// Only the exponential family ships; the weight is the unnormalized
/// `exp(-(t_v - t_u) / alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightConfig {
    Exponential { alpha: f64 },
}

impl WeightConfig {
    pub fn exponential(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument("mean waiting time must be positive"));
        }
        Ok(WeightConfig::Exponential { alpha })
    }

    #[inline]
    fn weight_of_gap(&self, gap: f64) -> f64 {
        match *self {
            WeightConfig::Exponential { alpha } => libm::exp(-gap / alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            WeightConfig::Exponential { alpha } => alpha,
        }
    }
}

/// Weight of a transmission from `u` (active at `t_u`) to `v` (active at `t_v`).
pub fn transmission_weight(t_u: f64, t_v: f64, cfg: &WeightConfig) -> Result<f64> {
    if !(t_u < t_v) {
        return Err(Error::TimeOrder { t_u, t_v });
    }
    Ok(cfg.weight_of_gap(t_v - t_u))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    beta: f64,
    weight: WeightConfig,
    ln_beta: f64,
    ln_miss: f64,
}

impl ModelParams {
    pub fn new(beta: f64, weight: WeightConfig) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Probability {
                what: "transmission probability (open interval)",
                value: beta,
            });
        }
        Ok(Self {
            beta,
            weight,
            ln_beta: libm::log(beta),
            ln_miss: libm::log1p(-beta),
        })
    }

    pub fn exponential(beta: f64, alpha: f64) -> Result<Self> {
        Self::new(beta, WeightConfig::exponential(alpha)?)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn weight(&self) -> &WeightConfig {
        &self.weight
    }

    /// `ln(1 - beta)`, the log-probability of one failed transmission.
    pub fn ln_miss(&self) -> f64 {
        self.ln_miss
    }

    pub fn ln_beta(&self) -> f64 {
        self.ln_beta
    }
}

/// Cached per-cascade quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeState {
    q: usize,
    r: i64,
    // Indexed by activation position; position 0 (the root) stays empty.
    parent_sum: Vec<f64>,
    parent_count: Vec<u32>,
    // Sum of ln S_v over non-root positions with at least one parent arc.
    log_det: f64,
    // Non-root positions without any time-respecting parent arc.
    orphans: usize,
}

/// Update of a single parent-weight sum `S_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParentUpdate {
    pub pos: u32,
    pub old_count: u32,
    pub new_count: u32,
    pub new_sum: f64,
    pub delta_log_det: f64,
}

/// Change to one cascade's state caused by toggling one dyad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRecord {
    pub delta_r: i64,
    /// At most one `S_v` changes: of the arcs a toggle flips, only the one pointing
    /// forward in time can carry the cascade.
    pub parent: Option<ParentUpdate>,
    pub delta_log_lik: f64,
}

impl DeltaRecord {
    pub const ZERO: DeltaRecord = DeltaRecord {
        delta_r: 0,
        parent: None,
        delta_log_lik: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        self.delta_r == 0 && self.parent.is_none()
    }
}

// Sum of weights of arcs into `c.node(pos)` from earlier-activated nodes, skipping `skip`.
fn parent_weights(
    g: &Graph,
    c: &Cascade,
    pos: usize,
    cfg: &WeightConfig,
    skip: Option<NodeId>,
) -> (f64, u32) {
    let t_v = c.time(pos);
    let mut sum = 0.0;
    let mut count = 0;
    for &u in g.in_neighbors(c.node(pos)) {
        if Some(u) == skip {
            continue;
        }
        if let Some(p) = c.position(u) {
            if p < pos {
                sum += cfg.weight_of_gap(t_v - c.time(p));
                count += 1;
            }
        }
    }
    (sum, count)
}

impl CascadeState {
    /// Computes `q`, `r` and every `S_v` from scratch. Cascade nodes must exist in `g`.
    pub fn build(g: &Graph, c: &Cascade, params: &ModelParams) -> Result<Self> {
        let n = g.node_count();
        if c.max_node() as usize >= n {
            return Err(Error::NodeOutOfRange {
                node: c.max_node(),
                n,
            });
        }
        let q = c.len() - 1;
        let out_sum: usize = c.events().iter().map(|e| g.out_degree(e.node)).sum();
        let mut parent_sum = vec![0.0; c.len()];
        let mut parent_count = vec![0u32; c.len()];
        let mut log_det = 0.0;
        let mut orphans = 0;
        for pos in 1..c.len() {
            let (sum, count) = parent_weights(g, c, pos, params.weight(), None);
            parent_sum[pos] = sum;
            parent_count[pos] = count;
            if count == 0 {
                orphans += 1;
            } else {
                log_det += libm::log(sum);
            }
        }
        Ok(Self {
            q,
            r: out_sum as i64 - q as i64,
            parent_sum,
            parent_count,
            log_det,
            orphans,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    /// `S_v` by activation position (0 for the root).
    pub fn parent_sums(&self) -> &[f64] {
        &self.parent_sum
    }

    /// `ln prod_v S_v`, or `-inf` when some `S_v` is zero.
    pub fn log_det(&self) -> f64 {
        if self.orphans > 0 {
            f64::NEG_INFINITY
        } else {
            self.log_det
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.orphans == 0
    }

    pub fn log_lik(&self, params: &ModelParams) -> f64 {
        if self.orphans > 0 {
            return f64::NEG_INFINITY;
        }
        self.q as f64 * params.ln_beta + self.r as f64 * params.ln_miss + self.log_det
    }

    /// Effect on this cascade of adding (`add`) or removing arc `(u, v)`, where `u`
    /// sits at activation position `pos_u`. `g` is the graph before the toggle.
    pub(crate) fn arc_delta(
        &self,
        g: &Graph,
        c: &Cascade,
        pos_u: usize,
        v: NodeId,
        add: bool,
        params: &ModelParams,
    ) -> (i64, Option<ParentUpdate>) {
        let delta_r = if add { 1 } else { -1 };
        let pos_v = match c.position(v) {
            Some(p) if p > pos_u => p,
            _ => return (delta_r, None),
        };
        let w = params.weight.weight_of_gap(c.time(pos_v) - c.time(pos_u));
        let old_count = self.parent_count[pos_v];
        let old_sum = self.parent_sum[pos_v];
        let (new_count, new_sum) = if add {
            (old_count + 1, old_sum + w)
        } else {
            let count = old_count - 1;
            let mut sum = if count == 0 { 0.0 } else { old_sum - w };
            // Catastrophic cancellation: recompute from the remaining arcs.
            if count > 0 && !(sum > 1e-6 * old_sum) {
                sum = parent_weights(g, c, pos_v, params.weight(), Some(c.node(pos_u))).0;
            }
            (count, sum)
        };
        let delta_log_det = match (old_count > 0, new_count > 0) {
            (true, true) => libm::log(new_sum) - libm::log(old_sum),
            (false, true) => libm::log(new_sum),
            (true, false) => -libm::log(old_sum),
            (false, false) => 0.0,
        };
        let update = ParentUpdate {
            pos: pos_v as u32,
            old_count,
            new_count,
            new_sum,
            delta_log_det,
        };
        (delta_r, Some(update))
    }

    pub(crate) fn assemble(
        &self,
        delta_r: i64,
        parent: Option<ParentUpdate>,
        params: &ModelParams,
    ) -> DeltaRecord {
        let orphan_change = match parent {
            Some(p) => (p.new_count == 0) as i64 - (p.old_count == 0) as i64,
            None => 0,
        };
        let old_orphans = self.orphans as i64;
        let new_orphans = old_orphans + orphan_change;
        let delta_log_lik = match (old_orphans > 0, new_orphans > 0) {
            (false, true) => f64::NEG_INFINITY,
            (true, false) => f64::INFINITY,
            (true, true) => 0.0,
            (false, false) => {
                delta_r as f64 * params.ln_miss + parent.map_or(0.0, |p| p.delta_log_det)
            }
        };
        DeltaRecord {
            delta_r,
            parent,
            delta_log_lik,
        }
    }

    /// Change in this cascade's state if dyad `(i, j)` were added or removed.
    ///
    /// `g` must not yet reflect the toggle. In undirected mode both arcs of the pair
    /// change.
    pub fn toggle_delta(
        &self,
        g: &Graph,
        c: &Cascade,
        i: NodeId,
        j: NodeId,
        add: bool,
        params: &ModelParams,
    ) -> Result<DeltaRecord> {
        let n = g.node_count();
        for node in [i, j] {
            if node as usize >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if g.has_edge(i, j) == add {
            return Err(Error::InvalidArgument(
                "toggle direction does not match the graph",
            ));
        }
        let arcs: &[(NodeId, NodeId)] = match g.mode() {
            Mode::Directed => &[(i, j)],
            Mode::Undirected => &[(i, j), (j, i)],
        };
        let mut delta_r = 0;
        let mut parent = None;
        for &(u, v) in arcs {
            if let Some(pos_u) = c.position(u) {
                let (dr, update) = self.arc_delta(g, c, pos_u, v, add, params);
                delta_r += dr;
                if update.is_some() {
                    debug_assert!(parent.is_none());
                    parent = update;
                }
            }
        }
        Ok(self.assemble(delta_r, parent, params))
    }

    /// Applies a delta computed against this exact state.
    pub fn apply(&mut self, delta: &DeltaRecord) -> Result<()> {
        if let Some(p) = delta.parent {
            let pos = p.pos as usize;
            if self.parent_count.get(pos) != Some(&p.old_count) {
                return Err(Error::StaleDelta);
            }
            self.parent_count[pos] = p.new_count;
            self.parent_sum[pos] = p.new_sum;
            match (p.old_count > 0, p.new_count > 0) {
                (true, false) => {
                    self.orphans += 1;
                    self.log_det += p.delta_log_det;
                }
                (false, true) => {
                    self.orphans -= 1;
                    self.log_det += p.delta_log_det;
                }
                _ => self.log_det += p.delta_log_det,
            }
        }
        self.r += delta.delta_r;
        Ok(())
    }
}

/// `ln P(C | G)`: the sum of per-cascade log-likelihoods.
pub fn total_log_likelihood(states: &[CascadeState], params: &ModelParams) -> f64 {
    states.iter().map(|s| s.log_lik(params)).sum()
}

/// Largest cascade [`brute_force_likelihood`] will enumerate.
pub const ENUMERATION_LIMIT: usize = 9;

/// Sum over all spanning arborescences of the cascade-induced subgraph, rooted at the
/// cascade root, of the product of arc weights. Arcs pointing backwards in time carry
/// zero weight.
///
/// Enumerates every assignment of one in-neighbour (from the cascade) per non-root
/// node and keeps the assignments that form a tree; it does not rely on the
/// time-ordering shortcut.
pub fn arborescence_weight_sum(g: &Graph, c: &Cascade, cfg: &WeightConfig) -> Result<f64> {
    let k = c.len();
    if k > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration(k));
    }
    let candidates: Vec<Vec<usize>> = (0..k)
        .map(|pos| {
            if pos == 0 {
                return Vec::new();
            }
            (0..k)
                .filter(|&p| p != pos && g.has_edge(c.node(p), c.node(pos)))
                .collect()
        })
        .collect();
    if candidates[1..].iter().any(Vec::is_empty) {
        return Ok(0.0);
    }
    let mut choice = vec![0usize; k];
    let mut parent = vec![usize::MAX; k];
    let mut total = 0.0;
    'outer: loop {
        for pos in 1..k {
            parent[pos] = candidates[pos][choice[pos]];
        }
        let mut is_tree = true;
        for start in 1..k {
            let (mut node, mut steps) = (start, 0);
            while node != 0 {
                node = parent[node];
                steps += 1;
                if steps > k {
                    is_tree = false;
                    break;
                }
            }
            if !is_tree {
                break;
            }
        }
        if is_tree {
            let mut product = 1.0;
            for pos in 1..k {
                let (t_u, t_v) = (c.time(parent[pos]), c.time(pos));
                product *= if t_u < t_v {
                    cfg.weight_of_gap(t_v - t_u)
                } else {
                    0.0
                };
            }
            total += product;
        }
        for pos in 1..k {
            choice[pos] += 1;
            if choice[pos] < candidates[pos].len() {
                continue 'outer;
            }
            choice[pos] = 0;
        }
        break;
    }
    Ok(total)
}

/// Log-likelihood of one cascade by explicit enumeration of transmission trees.
pub fn brute_force_likelihood(g: &Graph, c: &Cascade, params: &ModelParams) -> Result<f64> {
    let trees = arborescence_weight_sum(g, c, params.weight())?;
    if trees == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let q = c.len() - 1;
    let out_arcs = g.arcs().filter(|&(u, _)| c.contains(u)).count();
    let r = out_arcs as f64 - q as f64;
    Ok(q as f64 * libm::log(params.beta()) + r * libm::log(1.0 - params.beta()) + libm::log(trees))
}

/// Weighted Laplacian of the cascade-induced subgraph in activation order:
/// diagonal entries are total incoming weight, off-diagonal `(u, v)` entries `-w(u, v)`.
pub fn cascade_laplacian(g: &Graph, c: &Cascade, cfg: &WeightConfig) -> Vec<Vec<f64>> {
    let k = c.len();
    let mut lap = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            if a == b || !g.has_edge(c.node(a), c.node(b)) || c.time(a) >= c.time(b) {
                continue;
            }
            let w = cfg.weight_of_gap(c.time(b) - c.time(a));
            lap[a][b] -= w;
            lap[b][b] += w;
        }
    }
    lap
}

/// Copy of `m` without row and column `k`.
pub fn minor(m: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    m.iter()
        .enumerate()
        .filter(|&(r, _)| r != k)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|&(c, _)| c != k)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

/// Determinant by LU decomposition with partial pivoting.
pub fn lu_determinant(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| libm::fabs(a[x][col]).total_cmp(&libm::fabs(a[y][col])))
            .expect("non-empty range");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..k {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for c in col..k {
                    a[row][c] -= factor * a[col][c];
                }
            }
        }
    }
    det
}
