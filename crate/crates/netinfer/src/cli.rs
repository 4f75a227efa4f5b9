//! Subcommands. Flags override the config file; every command writes the resolved
//! configuration to `<out>/resolved_config.toml`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use netinfer_core::seed::derive_seed;
use netinfer_core::{Graph, Mode};

use crate::config::{ModeName, NetworkKind, RunConfig};
use crate::error::{Error, Result};
use crate::experiment::{self, network_size};
use crate::io;
use crate::pipeline::{self, INFER};

#[derive(Debug, Parser)]
#[command(
    name = "netinfer",
    version,
    about = "Bayesian network inference from information cascades"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Number of independent chains.
    #[arg(long, global = true)]
    pub chains: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeName>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    ErdosRenyi,
    ForestFire,
    CorePeriphery,
    Hierarchical,
    Kronecker,
}

impl From<KindArg> for NetworkKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::ErdosRenyi => NetworkKind::ErdosRenyi,
            KindArg::ForestFire => NetworkKind::ForestFire,
            KindArg::CorePeriphery => NetworkKind::CorePeriphery,
            KindArg::Hierarchical => NetworkKind::Hierarchical,
            KindArg::Kronecker => NetworkKind::Kronecker,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph: graph.txt and node_map.csv.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Simulate cascades until a coverage target: cascades.csv and coverage.txt.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Edge list to simulate on; generated from the config when absent.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        f_target: Option<f64>,
    },
    /// Sample graphs given cascades: marginals.csv, trace_chain<k>.csv and stats.txt.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cascades: Option<PathBuf>,
        /// True graph; sets the node count and default prior, and enables evaluation.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Node count when no true graph is given.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Score marginals against a true graph: roc.csv and a summary line.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        marginals: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Network type by coverage grid: results.csv, summary.csv, timings.csv.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// Mis-specified beta and prior sweeps: beta_sweep.csv and prior_sweep.csv.
    Sensitivity {
        #[command(flatten)]
        common: Common,
    },
    /// Recovery on a real edge list, per department: email_results.csv.
    Email {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Generate { common, .. }
            | Command::Simulate { common, .. }
            | Command::Infer { common, .. }
            | Command::Evaluate { common, .. }
            | Command::Experiment { common }
            | Command::Sensitivity { common }
            | Command::Email { common, .. } => common,
        }
    }
}

pub fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(chains) = common.chains {
        cfg.chain.chains = chains;
    }
    if let Some(mode) = common.mode {
        cfg.mode = mode;
    }
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn required(path: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.or_else(|| fallback.clone())
        .ok_or_else(|| Error::Config(format!("no {what} given (flag or [paths] entry)")))
}

fn out_file(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

/// Runs a parsed command line with its resolved configuration.
pub fn run(command: Command, mut cfg: RunConfig) -> Result<()> {
    let out = command.common().out.clone();
    match command {
        Command::Generate { kind, nodes, .. } => {
            if let Some(k) = kind {
                cfg.generator.kind = k.into();
            }
            if let Some(n) = nodes {
                cfg.generator.n = n;
            }
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            let g = generated_graph(&cfg)?;
            io::save_edge_list(&g, &out_file(&out, "graph.txt"))?;
            io::save_node_map(
                &(0..g.node_count() as u64).collect::<Vec<_>>(),
                &out_file(&out, "node_map.csv"),
            )?;
            println!(
                "nodes={} edges={} density={:?}",
                g.node_count(),
                g.edge_count(),
                g.density()
            );
        }
        Command::Simulate {
            graph,
            beta,
            f_target,
            ..
        } => {
            if let Some(b) = beta {
                cfg.model.beta = b;
            }
            if let Some(f) = f_target {
                cfg.simulation.f_target = f;
            }
            if let Some(path) = graph {
                cfg.paths.graph = Some(path);
            }
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            let g = match &cfg.paths.graph {
                Some(path) => io::load_edge_list(path, cfg.mode())?.graph,
                None => {
                    let g = generated_graph(&cfg)?;
                    io::save_edge_list(&g, &out_file(&out, "graph.txt"))?;
                    g
                }
            };
            if cfg.model.beta == 0.0 {
                warn!(
                    "beta = 0: every cascade is a singleton and the coverage target is unreachable"
                );
            }
            let run = pipeline::simulate(&g, &cfg.model, &cfg.simulation, cfg.seed)?;
            io::save_cascades(&run.cascades, &out_file(&out, "cascades.csv"))?;
            let report = io::format_coverage(&run, cfg.simulation.f_target);
            io::write_text(&out_file(&out, "coverage.txt"), &report)?;
            print!("{report}");
        }
        Command::Infer {
            cascades,
            truth,
            nodes,
            ..
        } => {
            cfg.paths.cascades = Some(required(cascades, &cfg.paths.cascades, "cascade file")?);
            if truth.is_some() {
                cfg.paths.truth = truth;
            }
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            cmd_infer(&cfg, nodes, &out)?;
        }
        Command::Evaluate {
            marginals, truth, ..
        } => {
            cfg.paths.marginals =
                Some(required(marginals, &cfg.paths.marginals, "marginals file")?);
            cfg.paths.truth = Some(required(truth, &cfg.paths.truth, "true graph")?);
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            let truth = io::load_edge_list(cfg.paths.truth.as_ref().unwrap(), cfg.mode())?.graph;
            let m = io::load_marginals(
                cfg.paths.marginals.as_ref().unwrap(),
                truth.node_count(),
                cfg.mode(),
            )?;
            let curve = netinfer_core::eval::roc(&m, &truth)?;
            io::write_text(&out_file(&out, "roc.csv"), &io::format_roc(&curve))?;
            println!("auc={:?} fpa={:?}", curve.auc, curve.fpa);
        }
        Command::Experiment { .. } => {
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            let cells = experiment::run_synthetic_experiment(&cfg)?;
            io::write_text(
                &out_file(&out, "results.csv"),
                &experiment::format_results(&cells),
            )?;
            let summary = experiment::format_summary(&cells);
            io::write_text(&out_file(&out, "summary.csv"), &summary)?;
            io::write_text(
                &out_file(&out, "timings.csv"),
                &experiment::format_timings(&cells),
            )?;
            print!("{summary}");
        }
        Command::Sensitivity { .. } => {
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            let r = experiment::run_sensitivity_sweep(&cfg)?;
            io::write_text(
                &out_file(&out, "beta_sweep.csv"),
                &experiment::format_beta_sweep(&r),
            )?;
            io::write_text(
                &out_file(&out, "prior_sweep.csv"),
                &experiment::format_prior_sweep(&r),
            )?;
            let s = &cfg.sensitivity;
            println!(
                "beta_auc_range={:?} beta_degradation={:?} prior_degradation={:?}",
                r.beta_auc_range(&s.beta_grid),
                r.beta_degradation(&s.beta_grid),
                r.prior_degradation(&s.p_factors)
            );
        }
        Command::Email { edges, labels, .. } => {
            cfg.paths.graph = Some(required(edges, &cfg.paths.graph, "edge list")?);
            if labels.is_some() {
                cfg.paths.labels = labels;
            }
            io::write_text(&out_file(&out, "resolved_config.toml"), &cfg.to_toml())?;
            let rows = experiment::run_email_experiment(
                &cfg,
                cfg.paths.graph.as_ref().unwrap(),
                cfg.paths.labels.as_deref(),
            )?;
            let table = experiment::format_email(&rows);
            io::write_text(&out_file(&out, "email_results.csv"), &table)?;
            io::write_text(
                &out_file(&out, "timings.csv"),
                &experiment::format_email_timings(&rows),
            )?;
            print!("{table}");
        }
    }
    Ok(())
}

fn generated_graph(cfg: &RunConfig) -> Result<Graph> {
    let kind = cfg.generator.kind;
    let n = cfg.generator.n;
    if kind.is_kronecker() && network_size(kind, n) != n {
        return Err(Error::Invalid(format!(
            "Kronecker graphs need a power-of-two node count, got {n}"
        )));
    }
    pipeline::generate(cfg.generator.generator_kind()?, n, cfg.mode(), cfg.seed)
}

fn cmd_infer(cfg: &RunConfig, nodes: Option<usize>, out: &Path) -> Result<()> {
    let cascades = io::load_cascades(cfg.paths.cascades.as_ref().unwrap())?;
    let truth = match &cfg.paths.truth {
        Some(path) => Some(io::load_edge_list(path, cfg.mode())?.graph),
        None => None,
    };
    let max_node = cascades
        .iter()
        .map(|c| c.max_node() as usize + 1)
        .max()
        .unwrap_or(0);
    let n = match (&truth, nodes) {
        (Some(g), _) => g.node_count(),
        (None, Some(n)) => n,
        (None, None) => {
            info!("node count taken from the cascades: {max_node}");
            max_node
        }
    };
    if max_node > n {
        return Err(Error::Invalid(format!(
            "cascades mention node {} but the graph has {n} nodes",
            max_node - 1
        )));
    }
    let mode: Mode = cfg.mode();
    let params = cfg.chain.params(&cfg.model)?;
    let prior = cfg.chain.prior(truth.as_ref().map(Graph::density))?;
    let base = cfg.chain.chain_config(n, params, prior)?;
    let inference = pipeline::infer(&cascades, n, mode, &base, cfg.chain.chains, cfg.seed)?;

    io::save_marginals(&inference.merged.marginals, &out_file(out, "marginals.csv"))?;
    for (k, chain) in inference.chains.iter().enumerate() {
        io::write_text(
            &out_file(out, &format!("trace_chain{k}.csv")),
            &io::format_trace(&chain.stats.trace),
        )?;
    }
    let mut stats = String::new();
    writeln!(stats, "nodes={n}").unwrap();
    writeln!(stats, "cascades={}", cascades.len()).unwrap();
    writeln!(stats, "chains={}", inference.chains.len()).unwrap();
    writeln!(stats, "iterations_per_chain={}", base.iterations).unwrap();
    writeln!(stats, "samples={}", inference.merged.samples).unwrap();
    writeln!(stats, "acceptance_rate={}", inference.acceptance_rate()).unwrap();
    writeln!(stats, "discrepancy={}", inference.merged.discrepancy).unwrap();
    writeln!(stats, "max_drift={}", inference.max_drift()).unwrap();
    writeln!(stats, "chain_seed_root={}", derive_seed(cfg.seed, INFER)).unwrap();
    if let Some(g) = &truth {
        let curve = netinfer_core::eval::roc(&inference.merged.marginals, g)?;
        io::write_text(&out_file(out, "roc.csv"), &io::format_roc(&curve))?;
        writeln!(stats, "auc={}", curve.auc).unwrap();
        writeln!(stats, "fpa={}", curve.fpa).unwrap();
    }
    io::write_text(&out_file(out, "stats.txt"), &stats)?;
    print!("{stats}");
    Ok(())
}
