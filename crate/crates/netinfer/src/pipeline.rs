//! Generate, simulate, infer and evaluate, with all randomness derived from one seed.
//!
//! Stream layout for a run seed `s`:
//! graph `derive_seed(s, GENERATE)`, cascades `derive_seed(s, SIMULATE)`,
//! chain `k` `derive_seed(derive_seed(s, INFER), k)`.

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use netinfer_core::cascade::{generate_until_coverage, CoverageRun};
use netinfer_core::eval::roc;
use netinfer_core::sampler::{merge_chains, run_chain, ChainOutput, MergedChains};
use netinfer_core::seed::derive_seed;
use netinfer_core::{Cascade, ChainConfig, GeneratorKind, GeneratorSpec, Graph, Mode, RocCurve};

use crate::config::{ModelConfig, SimulationConfig};
use crate::error::Result;

pub const GENERATE: u64 = 1;
pub const SIMULATE: u64 = 2;
pub const INFER: u64 = 3;

pub fn generate(kind: GeneratorKind, n: usize, mode: Mode, seed: u64) -> Result<Graph> {
    Ok(GeneratorSpec {
        kind,
        n,
        mode,
        seed: derive_seed(seed, GENERATE),
    }
    .generate()?)
}

pub fn simulate(
    g: &Graph,
    model: &ModelConfig,
    sim: &SimulationConfig,
    seed: u64,
) -> Result<CoverageRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SIMULATE));
    let run = generate_until_coverage(
        g,
        model.beta,
        model.alpha,
        sim.f_target,
        sim.max_cascades,
        &mut rng,
    )?;
    if !run.reached {
        warn!(
            "coverage target {} not reached after {} cascades (achieved {:.4})",
            sim.f_target,
            run.cascades.len(),
            run.achieved_f
        );
    }
    if run.cascades.iter().all(Cascade::is_singleton) && !run.cascades.is_empty() {
        warn!("every cascade is a singleton");
    }
    Ok(run)
}

/// Independent chains pooled into one set of marginals.
#[derive(Debug, Clone)]
pub struct Inference {
    pub merged: MergedChains,
    pub chains: Vec<ChainOutput>,
}

impl Inference {
    pub fn max_drift(&self) -> f64 {
        self.chains
            .iter()
            .map(|c| c.stats.drift)
            .fold(0.0, f64::max)
    }

    pub fn acceptance_rate(&self) -> f64 {
        let (acc, steps) = self.chains.iter().fold((0, 0), |(a, s), c| {
            (
                a + c.stats.accepted_add + c.stats.accepted_remove,
                s + c.stats.steps,
            )
        });
        if steps == 0 {
            0.0
        } else {
            acc as f64 / steps as f64
        }
    }
}

/// Runs `chains` copies of `base` in parallel; chain `k` is seeded from stream `k`
/// of `derive_seed(seed, INFER)`. The pooled result does not depend on scheduling.
pub fn infer(
    cascades: &[Cascade],
    n: usize,
    mode: Mode,
    base: &ChainConfig,
    chains: usize,
    seed: u64,
) -> Result<Inference> {
    let root = derive_seed(seed, INFER);
    let outputs = (0..chains as u64)
        .into_par_iter()
        .map(|k| {
            let config = ChainConfig {
                seed: derive_seed(root, k),
                ..base.clone()
            };
            let out = run_chain(cascades, n, mode, config)?;
            info!(
                "chain {k}: {} steps, acceptance {:.4}, {} samples, drift {:.2e}",
                out.stats.steps,
                out.stats.acceptance_rate(),
                out.stats.samples,
                out.stats.drift
            );
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let merged = merge_chains(&outputs)?;
    Ok(Inference {
        merged,
        chains: outputs,
    })
}

/// ROC curve of pooled marginals against the true graph.
pub fn evaluate(inference: &Inference, truth: &Graph) -> Result<RocCurve> {
    Ok(roc(&inference.merged.marginals, truth)?)
}
