//! TOML run configuration.
//!
//! Every section and key is optional; missing keys take the defaults below and
//! unknown keys are rejected. The resolved configuration is written beside the
//! outputs of every command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use netinfer_core::generators::{EdgeDensity, CORE_PERIPHERY_SEED, HIERARCHICAL_SEED};
use netinfer_core::{ChainConfig, GeneratorKind, Mode, ModelParams, PriorConfig, ProposalKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Directed,
    Undirected,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Directed => Mode::Directed,
            ModeName::Undirected => Mode::Undirected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    ErdosRenyi,
    ForestFire,
    CorePeriphery,
    Hierarchical,
    /// Kronecker graph with the initiator given in `generator.initiator`.
    Kronecker,
}

impl NetworkKind {
    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::ErdosRenyi => "erdos_renyi",
            NetworkKind::ForestFire => "forest_fire",
            NetworkKind::CorePeriphery => "core_periphery",
            NetworkKind::Hierarchical => "hierarchical",
            NetworkKind::Kronecker => "kronecker",
        }
    }

    pub fn is_kronecker(self) -> bool {
        matches!(
            self,
            NetworkKind::CorePeriphery | NetworkKind::Hierarchical | NetworkKind::Kronecker
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalName {
    Tnt,
    UniformDyad,
}

impl From<ProposalName> for ProposalKind {
    fn from(p: ProposalName) -> ProposalKind {
        match p {
            ProposalName::Tnt => ProposalKind::Tnt,
            ProposalName::UniformDyad => ProposalKind::UniformDyad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: NetworkKind,
    pub n: usize,
    /// Edge probability; overrides `mean_degree` for Erdős–Rényi graphs.
    pub p: Option<f64>,
    pub mean_degree: f64,
    pub forward: f64,
    pub backward: f64,
    /// Initiator for `kind = "kronecker"`.
    pub initiator: Option<[[f64; 2]; 2]>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            kind: NetworkKind::ErdosRenyi,
            n: 100,
            p: None,
            mean_degree: 4.0,
            forward: 0.37,
            backward: 0.32,
            initiator: None,
        }
    }
}

impl GeneratorConfig {
    pub fn kind_for(&self, kind: NetworkKind) -> Result<GeneratorKind> {
        Ok(match kind {
            NetworkKind::ErdosRenyi => GeneratorKind::ErdosRenyi(match self.p {
                Some(p) => EdgeDensity::Probability(p),
                None => EdgeDensity::MeanDegree(self.mean_degree),
            }),
            NetworkKind::ForestFire => GeneratorKind::ForestFire {
                forward: self.forward,
                backward: self.backward,
            },
            NetworkKind::CorePeriphery => GeneratorKind::Kronecker {
                seed: CORE_PERIPHERY_SEED,
            },
            NetworkKind::Hierarchical => GeneratorKind::Kronecker {
                seed: HIERARCHICAL_SEED,
            },
            NetworkKind::Kronecker => GeneratorKind::Kronecker {
                seed: self.initiator.ok_or_else(|| {
                    Error::Config("generator.initiator is required for kind = \"kronecker\"".into())
                })?,
            },
        })
    }

    pub fn generator_kind(&self) -> Result<GeneratorKind> {
        self.kind_for(self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub beta: f64,
    pub alpha: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            beta: 0.4,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub f_target: f64,
    pub max_cascades: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            f_target: 0.9,
            max_cascades: 1_000_000,
        }
    }
}

/// Sampler settings. Lengths scale with `n^2` unless given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSettings {
    pub chains: usize,
    pub iterations: Option<u64>,
    pub iterations_per_n2: f64,
    pub burn_in_fraction: f64,
    pub thinning: Option<u64>,
    pub thinning_per_n2: f64,
    pub proposal: ProposalName,
    pub candidate_restriction: bool,
    pub refresh_interval: u64,
    /// Prior edge probability; when unset, the density of the true graph if one is known.
    pub prior_p: Option<f64>,
    /// Inference-time transmission probability; defaults to `model.beta`.
    pub beta: Option<f64>,
    /// Inference-time mean waiting time; defaults to `model.alpha`.
    pub alpha: Option<f64>,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            chains: 32,
            iterations: None,
            iterations_per_n2: 200.0,
            burn_in_fraction: 0.25,
            thinning: None,
            thinning_per_n2: 0.1,
            proposal: ProposalName::Tnt,
            candidate_restriction: false,
            refresh_interval: 100_000,
            prior_p: None,
            beta: None,
            alpha: None,
        }
    }
}

impl ChainSettings {
    /// Single-chain configuration for an `n`-node problem; `seed` is filled in per chain.
    pub fn chain_config(
        &self,
        n: usize,
        params: ModelParams,
        prior: PriorConfig,
    ) -> Result<ChainConfig> {
        if self.chains == 0 {
            return Err(Error::Config("chain.chains must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(
                "chain.burn_in_fraction must lie in [0, 1)".into(),
            ));
        }
        let n2 = (n * n) as f64;
        let iterations = self
            .iterations
            .unwrap_or((self.iterations_per_n2 * n2).round() as u64)
            .max(1);
        let thinning = self
            .thinning
            .unwrap_or((self.thinning_per_n2 * n2).round() as u64)
            .max(1);
        let config = ChainConfig {
            iterations,
            burn_in: (self.burn_in_fraction * iterations as f64) as u64,
            thinning,
            proposal: self.proposal.into(),
            params,
            prior,
            seed: 0,
            candidate_restriction: self.candidate_restriction,
            refresh_interval: self.refresh_interval,
        };
        config.validate()?;
        if config.expected_samples() == 0 {
            return Err(Error::Config(
                "chain too short for its thinning interval: no samples would be taken".into(),
            ));
        }
        Ok(config)
    }

    /// Inference parameters, falling back to the generating model.
    pub fn params(&self, model: &ModelConfig) -> Result<ModelParams> {
        Ok(ModelParams::exponential(
            self.beta.unwrap_or(model.beta),
            self.alpha.unwrap_or(model.alpha),
        )?)
    }

    pub fn prior(&self, true_density: Option<f64>) -> Result<PriorConfig> {
        let p = self.prior_p.or(true_density).ok_or_else(|| {
            Error::Config("chain.prior_p must be set when no true graph is given".into())
        })?;
        Ok(PriorConfig::new(p)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub graph: Option<PathBuf>,
    pub cascades: Option<PathBuf>,
    pub marginals: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

/// Grid of network types and coverage fractions, repeated over independent seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub networks: Vec<NetworkKind>,
    pub f_grid: Vec<f64>,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            networks: vec![
                NetworkKind::ErdosRenyi,
                NetworkKind::ForestFire,
                NetworkKind::CorePeriphery,
                NetworkKind::Hierarchical,
            ],
            f_grid: vec![0.9],
            repetitions: 3,
        }
    }
}

/// Inference-time parameter sweeps; `p_factors` multiply the true graph density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub beta_grid: Vec<f64>,
    pub p_factors: Vec<f64>,
    pub repetitions: usize,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            beta_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            p_factors: vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmailConfig {
    pub departments: Vec<u32>,
    pub whole_network: bool,
    pub repetitions: usize,
}

impl Default for EmailConfig {
    fn default() -> Self {
        Self {
            departments: vec![4],
            whole_network: false,
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: ModeName,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub generator: GeneratorConfig,
    pub model: ModelConfig,
    pub simulation: SimulationConfig,
    pub chain: ChainSettings,
    pub paths: PathsConfig,
    pub experiment: ExperimentConfig,
    pub sensitivity: SensitivityConfig,
    pub email: EmailConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mode: ModeName::Undirected,
            threads: 0,
            generator: GeneratorConfig::default(),
            model: ModelConfig::default(),
            simulation: SimulationConfig::default(),
            chain: ChainSettings::default(),
            paths: PathsConfig::default(),
            experiment: ExperimentConfig::default(),
            sensitivity: SensitivityConfig::default(),
            email: EmailConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_text(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn mode(&self) -> Mode {
        self.mode.into()
    }
}
