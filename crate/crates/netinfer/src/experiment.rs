//! Synthetic recovery grid, inference-parameter sensitivity, and email networks.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use netinfer_core::seed::derive_seed;
use netinfer_core::{ChainConfig, Graph, ModelParams, PriorConfig};

use crate::config::{ModelConfig, NetworkKind, RunConfig, SimulationConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::pipeline::{evaluate, generate, infer, simulate};

/// Kronecker graphs need a power-of-two size; they are built at the next one up.
pub fn network_size(kind: NetworkKind, n: usize) -> usize {
    if kind.is_kronecker() {
        n.next_power_of_two()
    } else {
        n
    }
}

/// One simulate-infer-evaluate run on a known graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub n: usize,
    pub edges: usize,
    pub cascades: usize,
    pub achieved_f: f64,
    pub auc: f64,
    pub fpa: f64,
    pub discrepancy: f64,
    pub seconds: f64,
}

/// Chain configuration for inferring `truth`; the prior defaults to its density.
fn chain_config(
    cfg: &RunConfig,
    truth: &Graph,
    params: ModelParams,
    prior_p: Option<f64>,
) -> Result<ChainConfig> {
    let prior = match prior_p {
        Some(p) => PriorConfig::new(p)?,
        None => cfg.chain.prior(Some(truth.density()))?,
    };
    cfg.chain.chain_config(truth.node_count(), params, prior)
}

fn infer_and_score(
    cfg: &RunConfig,
    truth: &Graph,
    cascades: &[netinfer_core::Cascade],
    base: &ChainConfig,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let inference = infer(
        cascades,
        truth.node_count(),
        truth.mode(),
        base,
        cfg.chain.chains,
        seed,
    )?;
    let curve = evaluate(&inference, truth)?;
    Ok((curve.auc, curve.fpa, inference.merged.discrepancy))
}

/// Simulates to coverage on `truth`, infers with the configured sampler and scores.
pub fn run_trial(
    cfg: &RunConfig,
    truth: &Graph,
    model: &ModelConfig,
    sim: &SimulationConfig,
    seed: u64,
) -> Result<Trial> {
    let start = Instant::now();
    let run = simulate(truth, model, sim, seed)?;
    let params = cfg.chain.params(model)?;
    let base = chain_config(cfg, truth, params, None)?;
    let (auc, fpa, discrepancy) = infer_and_score(cfg, truth, &run.cascades, &base, seed)?;
    Ok(Trial {
        n: truth.node_count(),
        edges: truth.edge_count(),
        cascades: run.cascades.len(),
        achieved_f: run.achieved_f,
        auc,
        fpa,
        discrepancy,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub network: NetworkKind,
    pub f: f64,
    pub rep: usize,
    pub trial: Trial,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Every (network, f, repetition) cell. The graph of a repetition is shared across `f`.
pub fn run_synthetic_experiment(cfg: &RunConfig) -> Result<Vec<CellResult>> {
    let exp = &cfg.experiment;
    if exp.repetitions == 0 || exp.networks.is_empty() || exp.f_grid.is_empty() {
        return Err(Error::Config(
            "experiment needs networks, an f grid and at least one repetition".into(),
        ));
    }
    let mut cells = Vec::new();
    for (ni, &network) in exp.networks.iter().enumerate() {
        for (fi, &f) in exp.f_grid.iter().enumerate() {
            for rep in 0..exp.repetitions {
                cells.push((ni, network, fi, f, rep));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(ni, network, fi, f, rep)| {
            let rep_seed = derive_seed(derive_seed(cfg.seed, ni as u64), rep as u64);
            let n = network_size(network, cfg.generator.n);
            let truth = generate(cfg.generator.kind_for(network)?, n, cfg.mode(), rep_seed)?;
            let sim = SimulationConfig {
                f_target: f,
                ..cfg.simulation.clone()
            };
            let trial = run_trial(
                cfg,
                &truth,
                &cfg.model,
                &sim,
                derive_seed(rep_seed, 100 + fi as u64),
            )?;
            info!(
                "{} n={n} f={f} rep={rep}: auc={:.4} fpa={:.4} ({:.1}s)",
                network.name(),
                trial.auc,
                trial.fpa,
                trial.seconds
            );
            Ok(CellResult {
                network,
                f,
                rep,
                trial,
            })
        })
        .collect()
}

pub fn format_results(cells: &[CellResult]) -> String {
    let mut out = String::from("network,n,f,rep,edges,cascades,achieved_f,auc,fpa,discrepancy\n");
    for c in cells {
        let t = &c.trial;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.network.name(),
            t.n,
            c.f,
            c.rep,
            t.edges,
            t.cascades,
            t.achieved_f,
            t.auc,
            t.fpa,
            t.discrepancy
        )
        .unwrap();
    }
    out
}

/// Mean and standard deviation over repetitions, one row per (network, f).
pub fn format_summary(cells: &[CellResult]) -> String {
    let mut out = String::from("network,n,f,repetitions,auc_mean,auc_sd,fpa_mean,fpa_sd\n");
    let mut keys: Vec<(NetworkKind, u64)> = Vec::new();
    for c in cells {
        if !keys.contains(&(c.network, c.f.to_bits())) {
            keys.push((c.network, c.f.to_bits()));
        }
    }
    for (network, fbits) in keys {
        let group: Vec<&CellResult> = cells
            .iter()
            .filter(|c| c.network == network && c.f.to_bits() == fbits)
            .collect();
        let aucs: Vec<f64> = group.iter().map(|c| c.trial.auc).collect();
        let fpas: Vec<f64> = group.iter().map(|c| c.trial.fpa).collect();
        let ((am, asd), (fm, fsd)) = (mean_sd(&aucs), mean_sd(&fpas));
        writeln!(
            out,
            "{},{},{},{},{am},{asd},{fm},{fsd}",
            network.name(),
            group[0].trial.n,
            f64::from_bits(fbits),
            group.len()
        )
        .unwrap();
    }
    out
}

/// Wall-clock times are kept apart from the result tables, which are reproducible.
pub fn format_timings(cells: &[CellResult]) -> String {
    let mut out = String::from("network,n,f,rep,seconds\n");
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{:.3}",
            c.network.name(),
            c.trial.n,
            c.f,
            c.rep,
            c.trial.seconds
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub rep: usize,
    /// `beta_hat` for the transmission sweep, the density multiplier for the prior sweep.
    pub value: f64,
    pub p_hat: f64,
    pub auc: f64,
    pub fpa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub true_beta: f64,
    pub true_density: Vec<f64>,
    pub baseline_auc: Vec<f64>,
    pub beta: Vec<SweepPoint>,
    pub prior: Vec<SweepPoint>,
}

fn mean_auc_at(points: &[SweepPoint], value: f64) -> f64 {
    let v: Vec<f64> = points
        .iter()
        .filter(|p| p.value == value)
        .map(|p| p.auc)
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn degradation(points: &[SweepPoint], grid: &[f64], baseline: f64) -> f64 {
    let lo = mean_auc_at(points, grid[0]);
    let hi = mean_auc_at(points, grid[grid.len() - 1]);
    baseline - lo.min(hi)
}

impl SensitivityResult {
    fn mean_baseline(&self) -> f64 {
        self.baseline_auc.iter().sum::<f64>() / self.baseline_auc.len() as f64
    }

    /// Spread of the (repetition-averaged) AUC over the `beta_hat` grid.
    pub fn beta_auc_range(&self, grid: &[f64]) -> f64 {
        let aucs: Vec<f64> = grid.iter().map(|&b| mean_auc_at(&self.beta, b)).collect();
        aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - aucs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Baseline AUC minus the worse of the two grid endpoints.
    pub fn beta_degradation(&self, grid: &[f64]) -> f64 {
        degradation(&self.beta, grid, self.mean_baseline())
    }

    pub fn prior_degradation(&self, factors: &[f64]) -> f64 {
        degradation(&self.prior, factors, self.mean_baseline())
    }
}

/// Infers with a mis-specified `beta_hat` or prior `p_hat`, one parameter at a time,
/// on cascades simulated from the true `beta` and graph density.
pub fn run_sensitivity_sweep(cfg: &RunConfig) -> Result<SensitivityResult> {
    let sens = &cfg.sensitivity;
    if sens.beta_grid.is_empty() || sens.p_factors.is_empty() || sens.repetitions == 0 {
        return Err(Error::Config("sensitivity grids must be nonempty".into()));
    }
    let kind = cfg.generator.kind;
    let n = network_size(kind, cfg.generator.n);
    let mut result = SensitivityResult {
        true_beta: cfg.model.beta,
        true_density: Vec::new(),
        baseline_auc: Vec::new(),
        beta: Vec::new(),
        prior: Vec::new(),
    };
    for rep in 0..sens.repetitions {
        let rep_seed = derive_seed(cfg.seed, rep as u64);
        let truth = generate(cfg.generator.generator_kind()?, n, cfg.mode(), rep_seed)?;
        let run = simulate(&truth, &cfg.model, &cfg.simulation, rep_seed)?;
        let density = truth.density();
        let alpha = cfg.chain.alpha.unwrap_or(cfg.model.alpha);
        let true_params = ModelParams::exponential(cfg.model.beta, alpha)?;
        let chain_seed = derive_seed(rep_seed, 100);

        // Same chain seed everywhere, so differences come from the parameters alone.
        let score = |params: ModelParams, p: f64| -> Result<(f64, f64)> {
            let base = chain_config(cfg, &truth, params, Some(p))?;
            let (auc, fpa, _) = infer_and_score(cfg, &truth, &run.cascades, &base, chain_seed)?;
            Ok((auc, fpa))
        };
        result.true_density.push(density);
        result.baseline_auc.push(score(true_params, density)?.0);
        let beta_points = sens
            .beta_grid
            .par_iter()
            .map(|&b| {
                let (auc, fpa) = score(ModelParams::exponential(b, alpha)?, density)?;
                Ok(SweepPoint {
                    rep,
                    value: b,
                    p_hat: density,
                    auc,
                    fpa,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let prior_points = sens
            .p_factors
            .par_iter()
            .map(|&k| {
                let p_hat = (k * density).min(0.999);
                let (auc, fpa) = score(true_params, p_hat)?;
                Ok(SweepPoint {
                    rep,
                    value: k,
                    p_hat,
                    auc,
                    fpa,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        result.beta.extend(beta_points);
        result.prior.extend(prior_points);
        info!(
            "sensitivity rep {rep}: baseline auc={:.4}",
            result.baseline_auc[rep]
        );
    }
    Ok(result)
}

pub fn format_beta_sweep(r: &SensitivityResult) -> String {
    let mut out = String::from("rep,beta_hat,true_beta,auc,fpa\n");
    for p in &r.beta {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.rep, p.value, r.true_beta, p.auc, p.fpa
        )
        .unwrap();
    }
    out
}

pub fn format_prior_sweep(r: &SensitivityResult) -> String {
    let mut out = String::from("rep,p_factor,p_hat,true_p,auc,fpa\n");
    for p in &r.prior {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.rep, p.value, p.p_hat, r.true_density[p.rep], p.auc, p.fpa
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmailRow {
    /// `department_<d>` or `all`.
    pub network: String,
    pub rep: usize,
    pub trial: Trial,
}

/// Per-department (and optionally whole-network) recovery on a real graph.
pub fn run_email_experiment(
    cfg: &RunConfig,
    edges: &Path,
    labels: Option<&Path>,
) -> Result<Vec<EmailRow>> {
    let loaded = io::load_edge_list(edges, cfg.mode())?;
    if loaded.self_loops > 0 {
        info!(
            "dropped {} self-loops from {}",
            loaded.self_loops,
            edges.display()
        );
    }
    let mut networks: Vec<(String, Graph)> = Vec::new();
    if !cfg.email.departments.is_empty() {
        let labels =
            labels.ok_or_else(|| Error::Config("department runs need a labels file".into()))?;
        let dept_of = io::load_labels(labels, &loaded.original_ids)?;
        for &d in &cfg.email.departments {
            let (g, _) = netinfer_core::graph::restrict_to_department(&loaded.graph, &dept_of, d)?;
            networks.push((format!("department_{d}"), g));
        }
    }
    if cfg.email.whole_network {
        networks.push(("all".into(), loaded.graph.clone()));
    }
    if networks.is_empty() {
        return Err(Error::Config(
            "no departments selected and whole_network is false".into(),
        ));
    }
    if cfg.email.repetitions == 0 {
        return Err(Error::Config("email.repetitions must be at least 1".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..networks.len())
        .flat_map(|k| (0..cfg.email.repetitions).map(move |r| (k, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(k, rep)| {
            let (name, g) = &networks[k];
            let seed = derive_seed(derive_seed(cfg.seed, k as u64), rep as u64);
            let trial = run_trial(cfg, g, &cfg.model, &cfg.simulation, seed)?;
            info!(
                "{name} rep={rep}: n={} edges={} auc={:.4}",
                trial.n, trial.edges, trial.auc
            );
            Ok(EmailRow {
                network: name.clone(),
                rep,
                trial,
            })
        })
        .collect()
}

pub fn format_email(rows: &[EmailRow]) -> String {
    let mut out = String::from("network,rep,nodes,edges,cascades,achieved_f,auc,fpa\n");
    for r in rows {
        let t = &r.trial;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.network, r.rep, t.n, t.edges, t.cascades, t.achieved_f, t.auc, t.fpa
        )
        .unwrap();
    }
    out
}

pub fn format_email_timings(rows: &[EmailRow]) -> String {
    let mut out = String::from("network,rep,seconds\n");
    for r in rows {
        writeln!(out, "{},{},{:.3}", r.network, r.rep, r.trial.seconds).unwrap();
    }
    out
}
