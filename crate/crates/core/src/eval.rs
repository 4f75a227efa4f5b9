//! Posterior edge marginals and their evaluation against a known graph.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{DyadSpace, Graph, Mode, NodeId};

/// Posterior inclusion probability of every dyad.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMarginals {
    space: DyadSpace,
    q: Vec<f64>,
    samples: u64,
}

impl EdgeMarginals {
    pub fn from_counts(counts: &[u64], samples: u64, n: usize, mode: Mode) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("marginals need at least one sample"));
        }
        let space = DyadSpace::new(n, mode);
        if counts.len() != space.len() {
            return Err(Error::Dimension(
                "count vector does not match the dyad space",
            ));
        }
        let q = counts.iter().map(|&c| c as f64 / samples as f64).collect();
        Ok(Self { space, q, samples })
    }

    /// Marginals given directly, indexed like [`DyadSpace`].
    pub fn from_values(n: usize, mode: Mode, q: Vec<f64>) -> Result<Self> {
        let space = DyadSpace::new(n, mode);
        if q.len() != space.len() {
            return Err(Error::Dimension(
                "marginal vector does not match the dyad space",
            ));
        }
        if q.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("marginals must lie in [0, 1]"));
        }
        Ok(Self {
            space,
            q,
            samples: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.space.node_count()
    }

    pub fn mode(&self) -> Mode {
        self.space.mode()
    }

    pub fn space(&self) -> &DyadSpace {
        &self.space
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> Option<f64> {
        self.space.index(i, j).map(|d| self.q[d])
    }

    pub fn by_index(&self, d: usize) -> f64 {
        self.q[d]
    }

    pub fn set_by_index(&mut self, d: usize, q: f64) {
        self.q[d] = q;
    }

    /// `(i, j, q_ij)` for every dyad in index order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.q.iter().enumerate().map(move |(d, &q)| {
            let (i, j) = self.space.pair(d);
            (i, j, q)
        })
    }

    /// Unordered-pair marginals scored as `max(q_ij, q_ji)`.
    pub fn to_undirected_max(&self) -> EdgeMarginals {
        if self.mode() == Mode::Undirected {
            return self.clone();
        }
        let n = self.node_count();
        let space = DyadSpace::new(n, Mode::Undirected);
        let q = space
            .pairs()
            .map(|(i, j)| self.get(i, j).unwrap().max(self.get(j, i).unwrap()))
            .collect();
        EdgeMarginals {
            space,
            q,
            samples: self.samples,
        }
    }
}

// Descending score, then ascending dyad index.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// The `k` most probable dyads, ties broken by `(i, j)` in lexicographic order.
pub fn top_k_edges(m: &EdgeMarginals, k: usize) -> Result<Vec<(NodeId, NodeId, f64)>> {
    if k > m.q.len() {
        return Err(Error::InvalidArgument("k exceeds the number of dyads"));
    }
    // Dyad indices increase with (i, j) lexicographically in both modes.
    Ok(ranking(&m.q)
        .into_iter()
        .take(k)
        .map(|d| {
            let (i, j) = m.space.pair(d);
            (i, j, m.q[d])
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// From `(0, 0)` at threshold `+inf` to `(1, 1)`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    /// True positive rate at 1% false discoveries.
    pub fpa: f64,
}

struct Scored {
    scores: Vec<f64>,
    truth: Vec<bool>,
    positives: usize,
}

fn scored(m: &EdgeMarginals, truth: &Graph) -> Result<Scored> {
    if m.node_count() != truth.node_count() {
        return Err(Error::Dimension(
            "marginals and truth have different node counts",
        ));
    }
    let m = match (m.mode(), truth.mode()) {
        (Mode::Directed, Mode::Undirected) => m.to_undirected_max(),
        (Mode::Undirected, Mode::Directed) => {
            return Err(Error::Dimension(
                "undirected marginals cannot score a directed graph",
            ))
        }
        _ => m.clone(),
    };
    let truth_flags: Vec<bool> = m.space.pairs().map(|(i, j)| truth.has_edge(i, j)).collect();
    let positives = truth.edge_count();
    if positives == 0 {
        return Err(Error::Degenerate("true graph has no edges"));
    }
    if positives == truth_flags.len() {
        return Err(Error::Degenerate("true graph has no non-edges"));
    }
    Ok(Scored {
        scores: m.q,
        truth: truth_flags,
        positives,
    })
}

// Cumulative (TP, FP, threshold) after each group of equal scores, best first.
fn threshold_steps(s: &Scored) -> Vec<(usize, usize, f64)> {
    let order = ranking(&s.scores);
    let mut steps = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (k, &d) in order.iter().enumerate() {
        if s.truth[d] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order.get(k + 1).map_or(true, |&next| {
            s.scores[next].partial_cmp(&s.scores[d]) != Some(Ordering::Equal)
        });
        if last_of_group {
            steps.push((tp, fp, s.scores[d]));
        }
    }
    steps
}

fn fpa_from_steps(steps: &[(usize, usize, f64)], positives: usize, tolerance: f64) -> f64 {
    steps
        .iter()
        .filter(|&&(tp, fp, _)| fp as f64 <= tolerance * (tp + fp) as f64)
        .map(|&(tp, _, _)| tp)
        .last()
        .map_or(0.0, |tp| tp as f64 / positives as f64)
}

/// ROC curve of the marginals as a classifier of `truth`'s edges.
///
/// The threshold sweeps the distinct marginal values; dyads with equal scores enter
/// together, giving a diagonal segment. Directed marginals scored against an
/// undirected truth use `max(q_ij, q_ji)` per pair.
pub fn roc(m: &EdgeMarginals, truth: &Graph) -> Result<RocCurve> {
    let s = scored(m, truth)?;
    let negatives = s.truth.len() - s.positives;
    let steps = threshold_steps(&s);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut auc = 0.0;
    for &(tp, fp, threshold) in &steps {
        let prev = *points.last().unwrap();
        let point = RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / s.positives as f64,
        };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    let fpa = fpa_from_steps(&steps, s.positives, 0.01);
    Ok(RocCurve { points, auc, fpa })
}

/// Recall at the lowest threshold whose recovered set has at most `tolerance`
/// false positives as a fraction of the recovered dyads.
///
/// Dyads are scanned in descending marginal order, one group of equal marginals at
/// a time; 0 when no non-empty prefix qualifies.
pub fn false_positive_alarm(m: &EdgeMarginals, truth: &Graph, tolerance: f64) -> Result<f64> {
    let s = scored(m, truth)?;
    Ok(fpa_from_steps(&threshold_steps(&s), s.positives, tolerance))
}
