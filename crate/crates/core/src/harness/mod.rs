//! Training loop, configuration, and experiment orchestration.
//!
//! Training is plain mini-batch gradient descent with a constant step size;
//! no momentum or weight decay, which would confound the symmetry
//! diagnostics. Everything is deterministic given the seeds in the config.

pub mod dataset;
pub mod oracle;
pub mod rundir;

pub use dataset::{make_dataset, DatasetKind, DatasetSpec};
pub use oracle::oracle_check;
pub use rundir::{export_run, run_experiment};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::OpPoint;
use crate::error::{Error, Result};
use crate::nn::{evaluate, Example, InitScheme, Network};
use crate::scalar::Real;

/// Risk level above which a run is declared divergent.
pub const DIVERGENCE_RISK: f64 = 1e6;

/// Circuit-sampling diagnostics at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSamplesCfg {
    #[serde(default = "default_circuit_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_circuit_count() -> usize {
    10_000
}

/// Lanczos spectrum diagnostics at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCfg {
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_probes() -> usize {
    8
}

fn default_steps() -> usize {
    80
}

/// Bootstrap Hessian-entry diagnostics at the first and last checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCfg {
    #[serde(default = "default_entries")]
    pub entries: usize,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_null_resamples")]
    pub null_resamples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_entries() -> usize {
    100
}

fn default_resamples() -> usize {
    64
}

fn default_null_resamples() -> usize {
    100
}

/// Which diagnostics to run at checkpoints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsCfg {
    #[serde(default)]
    pub circuit_samples: Option<CircuitSamplesCfg>,
    #[serde(default)]
    pub spectrum: Option<SpectrumCfg>,
    #[serde(default)]
    pub bootstrap: Option<BootstrapCfg>,
}

/// Full experiment configuration (JSON on disk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub widths: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub scheme: InitScheme,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dataset: DatasetSpec,
    /// Explicit checkpoint epochs; defaults to the geometric schedule
    /// `{0, 1, 2, 4, 8, ...} + {epochs}`.
    #[serde(default)]
    pub checkpoint_epochs: Option<Vec<usize>>,
    #[serde(default)]
    pub diagnostics: DiagnosticsCfg,
}

fn default_scheme() -> InitScheme {
    InitScheme::GaussianHe
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.widths.first() != Some(&self.dataset.input_dim) {
            return Err(Error::Config(format!(
                "input width {:?} does not match dataset dimension {}",
                self.widths.first(),
                self.dataset.input_dim
            )));
        }
        if let Some(eps) = &self.checkpoint_epochs {
            if eps.iter().any(|&e| e > self.epochs) {
                return Err(Error::Config(
                    "checkpoint epoch beyond the end of training".into(),
                ));
            }
        }
        Ok(())
    }

    /// Resolved checkpoint schedule, sorted and deduplicated.
    pub fn checkpoint_schedule(&self) -> Vec<usize> {
        let mut eps = match &self.checkpoint_epochs {
            Some(e) => e.clone(),
            None => geometric_checkpoints(self.epochs),
        };
        eps.sort_unstable();
        eps.dedup();
        eps
    }
}

/// `{0, 1, 2, 4, 8, ...}` capped and terminated at `epochs`.
pub fn geometric_checkpoints(epochs: usize) -> Vec<usize> {
    let mut eps = vec![0];
    let mut k = 1;
    while k < epochs {
        eps.push(k);
        k *= 2;
    }
    if epochs > 0 {
        eps.push(epochs);
    }
    eps.dedup();
    eps
}

/// Per-epoch scalar record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub risk: f64,
    pub accuracy: f64,
    pub op: f64,
    pub op_scaled: f64,
}

/// Scalar history of a run (epoch 0 is the initialization).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub rows: Vec<EpochRow>,
}

impl TrainLog {
    pub fn final_row(&self) -> &EpochRow {
        self.rows.last().expect("log has at least the init row")
    }

    /// Order-parameter trace restricted to checkpoint epochs.
    pub fn op_trace(&self, checkpoints: &[usize]) -> Vec<OpPoint> {
        self.rows
            .iter()
            .filter(|r| checkpoints.contains(&r.epoch))
            .map(|r| OpPoint {
                epoch: r.epoch,
                op: r.op,
                op_scaled: r.op_scaled,
                risk: r.risk,
                accuracy: r.accuracy,
            })
            .collect()
    }
}

/// Weight snapshot plus full-batch gradient at a checkpoint epoch.
#[derive(Debug, Clone)]
pub struct Checkpoint<F: Real> {
    pub epoch: usize,
    pub net: Network<F>,
    pub gradient: Vec<F>,
    pub risk: f64,
    pub accuracy: f64,
}

/// Everything a training run produces in memory.
#[derive(Debug, Clone)]
pub struct TrainOutput<F: Real> {
    pub log: TrainLog,
    pub checkpoints: Vec<Checkpoint<F>>,
    pub net: Network<F>,
}

/// Runs mini-batch gradient descent per the config.
///
/// The full dataset is evaluated at the end of every epoch; a risk above
/// [`DIVERGENCE_RISK`] aborts with the epoch recorded. Checkpoints snapshot
/// the weights and the full-batch gradient.
pub fn train<F: Real>(config: &TrainConfig) -> Result<TrainOutput<F>> {
    config.validate()?;
    let data: Vec<Example<F>> = make_dataset(&config.dataset)?;
    train_on(config, &data)
}

/// [`train`] on an already-materialized dataset.
pub fn train_on<F: Real>(config: &TrainConfig, data: &[Example<F>]) -> Result<TrainOutput<F>> {
    config.validate()?;
    let mut net: Network<F> = Network::init(&config.widths, config.seed, config.scheme)?;
    let schedule = config.checkpoint_schedule();
    let eta = F::of(config.learning_rate);
    let m = data.len();
    let batch = config.batch_size.min(m);

    let mut log = TrainLog::default();
    let mut checkpoints = Vec::new();
    let record = |net: &Network<F>,
                  epoch: usize,
                  log: &mut TrainLog,
                  checkpoints: &mut Vec<Checkpoint<F>>|
     -> Result<(f64, f64)> {
        let (risk, accuracy) = evaluate(net, data)?;
        let gradient = net.gradient(data)?;
        let op: F = gradient.iter().map(|&g| g * g).sum();
        let row = EpochRow {
            epoch,
            risk: risk.to_f64_lossy(),
            accuracy: accuracy.to_f64_lossy(),
            op: op.to_f64_lossy(),
            op_scaled: config.learning_rate * op.to_f64_lossy(),
        };
        log.rows.push(row);
        if schedule.contains(&epoch) {
            checkpoints.push(Checkpoint {
                epoch,
                net: net.clone(),
                gradient,
                risk: row.risk,
                accuracy: row.accuracy,
            });
        }
        Ok((row.risk, row.accuracy))
    };

    record(&net, 0, &mut log, &mut checkpoints)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..m).collect();
    for epoch in 1..=config.epochs {
        // seeded Fisher-Yates shuffle per epoch
        for k in (1..m).rev() {
            let j = rng.random_range(0..=k);
            order.swap(k, j);
        }
        let mut scratch: Vec<Example<F>> = Vec::with_capacity(batch);
        for chunk in order.chunks(batch) {
            scratch.clear();
            scratch.extend(chunk.iter().map(|&i| data[i].clone()));
            let grad = net.gradient(&scratch)?;
            net.step(&grad, eta);
        }
        let (risk, _) = record(&net, epoch, &mut log, &mut checkpoints)?;
        if risk > DIVERGENCE_RISK {
            return Err(Error::Diverged { epoch, risk });
        }
    }
    Ok(TrainOutput {
        log,
        checkpoints,
        net,
    })
}
