//! Experiment configuration file. Every field has a default; unknown keys are
//! rejected. The materialized (fully defaulted) form is echoed next to outputs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kitinet_core::dsmc::{DsmcConfig, InitialDistribution, WallModel};
use kitinet_core::net::{NetworkSpec, Optimizer, TrainConfig};
use kitinet_core::KitiConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kiti: KitiSection,
    pub dsmc: DsmcSection,
    pub network: NetworkSpec,
    pub train: TrainSection,
    pub sweep: SweepSection,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kiti: KitiSection::default(),
            dsmc: DsmcSection::default(),
            network: NetworkSpec::default(),
            train: TrainSection::default(),
            sweep: SweepSection::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Operator settings for `kernel-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KitiSection {
    pub dt: f64,
    pub n_divide: usize,
    pub coll_coef: f64,
    pub seed: u64,
    pub update_positions: bool,
    /// Feature length of each random check input.
    pub check_features: usize,
    pub check_trials: usize,
}

impl Default for KitiSection {
    fn default() -> Self {
        let k = KitiConfig::default();
        Self {
            dt: k.dt,
            n_divide: 4,
            coll_coef: k.coll_coef,
            seed: k.seed,
            update_positions: k.update_positions,
            check_features: 64,
            check_trials: 1000,
        }
    }
}

impl KitiSection {
    pub fn operator(&self) -> KitiConfig {
        KitiConfig {
            dt: self.dt,
            n_divide: self.n_divide,
            coll_coef: self.coll_coef,
            seed: self.seed,
            update_positions: self.update_positions,
            training: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsmcSection {
    pub num_particles: usize,
    pub f_n: f64,
    pub diameter: f64,
    pub tau: f64,
    pub box_size: Vec<f64>,
    pub cells_per_axis: Vec<usize>,
    pub wall_model: WallModel,
    pub dimensionality: usize,
    pub seed: u64,
    pub initial_temperature: f64,
    pub initial_distribution: InitialDistribution,
    pub steps: usize,
    /// Time-series row every this many steps.
    pub record_every: usize,
    pub bins: usize,
    /// Upper edge of the time-series speed histograms.
    pub max_speed: f64,
}

impl Default for DsmcSection {
    fn default() -> Self {
        let d = DsmcConfig::default();
        Self {
            num_particles: d.num_particles,
            f_n: d.f_n,
            diameter: d.diameter,
            tau: d.tau,
            box_size: d.box_size,
            cells_per_axis: d.cells_per_axis,
            wall_model: d.wall_model,
            dimensionality: d.dimensionality,
            seed: d.seed,
            initial_temperature: d.initial_temperature,
            initial_distribution: d.initial_distribution,
            steps: 1000,
            record_every: 10,
            bins: 40,
            max_speed: 6.0,
        }
    }
}

impl DsmcSection {
    pub fn gas(&self) -> DsmcConfig {
        DsmcConfig {
            num_particles: self.num_particles,
            f_n: self.f_n,
            diameter: self.diameter,
            tau: self.tau,
            box_size: self.box_size.clone(),
            cells_per_axis: self.cells_per_axis.clone(),
            wall_model: self.wall_model,
            dimensionality: self.dimensionality,
            seed: self.seed,
            initial_temperature: self.initial_temperature,
            initial_distribution: self.initial_distribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub batch: Option<usize>,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
    pub dataset_size: usize,
    pub dataset_seed: u64,
    /// Layers whose incoming weights are analyzed for condensation.
    pub analyzed_layers: Vec<usize>,
    pub threshold: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            optimizer: t.optimizer,
            batch: t.batch,
            seed: t.seed,
            checkpoints: t.checkpoints,
            dataset_size: 80,
            dataset_seed: 0,
            analyzed_layers: vec![0],
            threshold: kitinet_core::condense::DEFAULT_THRESHOLD,
        }
    }
}

impl TrainSection {
    pub fn trainer(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            optimizer: self.optimizer,
            batch: self.batch,
            seed: self.seed,
            checkpoints: self.checkpoints.clone(),
        }
    }
}

/// Grid over operator hyper-parameters; each point trains `network` with
/// `kiti_layers` replaced by the operator and the `train` settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub kiti_layers: BTreeSet<usize>,
    pub n_divide: Vec<usize>,
    pub coll_coef: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kiti_layers: [1].into(),
            n_divide: vec![1, 2, 5, 10], coll_coef: vec![0.0, 0.1, 0.5, 0.9],
            seeds: vec![0, 1, 2],
        }
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => Self::default(),
        };
        Ok(cfg)
    }

    /// Replaces every seed in the document.
    pub fn override_seed(&mut self, seed: u64) {
        self.kiti.seed = seed;
        self.dsmc.seed = seed;
        self.network.kiti.seed = seed;
        self.train.seed = seed;
        self.train.dataset_seed = seed;
        self.sweep.seeds = vec![seed];
    }

    pub fn validate_kernel(&self) -> Result<()> {
        self.kiti.operator().validate()?;
        let k = &self.kiti;
        if k.check_features == 0 || k.check_features % k.n_divide != 0 {
            bail!("check_features = {} must be a positive multiple of n_divide = {}", k.check_features, k.n_divide);
        }
        if k.check_features / k.n_divide < 2 {
            bail!("check_features / n_divide must be >= 2 particles");
        }
        if k.check_trials == 0 {
            bail!("check_trials must be >= 1");
        }
        Ok(())
    }

    pub fn validate_dsmc(&self) -> Result<()> {
        self.dsmc.gas().validate()?;
        if self.dsmc.record_every == 0 {
            bail!("record_every must be >= 1");
        }
        if self.dsmc.bins < 10 {
            bail!("bins must be >= 10, got {}", self.dsmc.bins);
        }
        if !(self.dsmc.max_speed > 0.0 && self.dsmc.max_speed.is_finite()) {
            bail!("max_speed must be > 0");
        }
        Ok(())
    }

    pub fn validate_train(&self) -> Result<()> {
        self.network.validate()?;
        self.train.trainer().validate()?;
        if self.train.dataset_size == 0 {
            bail!("dataset_size must be >= 1");
        }
        if self.network.input_dim != kitinet_core::net::SINE_INPUT_DIM || self.network.output_dim != 1 {
            bail!("the sine task needs input_dim = {} and output_dim = 1", kitinet_core::net::SINE_INPUT_DIM);
        }
        if let Some(&l) = self.train.analyzed_layers.iter().find(|&&l| l + 1 >= self.network.depth) {
            bail!("analyzed layer {l} is not a hidden layer (valid: 0..={})", self.network.depth - 2);
        }
        if !(0.0..=1.0).contains(&self.train.threshold) {
            bail!("threshold must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<()> {
        let s = &self.sweep;
        let mut probe = self.clone();
        probe.network.kiti_layers.clear();
        probe.validate_train()?;
        if s.kiti_layers.is_empty() {
            bail!("sweep.kiti_layers must name at least one operator layer");
        }
        if let Some(&l) = s.kiti_layers.iter().find(|&&l| l == 0 || l + 1 >= self.network.depth) {
            bail!("sweep operator layer {l} is not a hidden-to-hidden layer");
        }
        if s.n_divide.is_empty() || s.coll_coef.is_empty() || s.seeds.is_empty() {
            bail!("sweep grid must be nonempty in every axis");
        }
        if s.n_divide.contains(&0) {
            bail!("sweep n_divide values must be >= 1");
        }
        if let Some(c) = s.coll_coef.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            bail!("sweep coll_coef {c} outside [0, 1]");
        }
        Ok(())
    }
}
