//! Adam training on sampled forecast and error batches.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::loss::gradient;
use super::network::NetworkParams;
use crate::error::TrainError;
use crate::model::{DayProfile, ErrorSample, PriceBook, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub lambda: f64,
    pub forecast_batch: usize,
    pub error_batch: usize,
    pub batches_per_epoch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            lambda: 1.0,
            forecast_batch: 4,
            error_batch: 55,
            batches_per_epoch: 10_000,
            epochs: 1,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Invalid(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("penalty weight {} must be non-negative", self.lambda));
        }
        if self.forecast_batch == 0 || self.error_batch == 0 {
            return bad("batch sizes must be at least 1".into());
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.epsilon > 0.0) {
            return bad(format!("invalid Adam constants ({}, {}, {})", self.beta1, self.beta2, self.epsilon));
        }
        Ok(())
    }
}

/// First and second moment estimates; `step` counts applied updates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], step: 0 }
    }
}

/// One Adam update with bias correction; advances `state.step`.
pub fn adam_step(params: &mut [f64], state: &mut AdamState, grad: &[f64], config: &TrainConfig) {
    state.step += 1;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    for i in 0..params.len() {
        let g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    /// One-based epoch number.
    pub epoch: usize,
    pub mean_loss: f64,
    pub batch_losses: Vec<f64>,
}

/// Everything one training run needs besides its starting point.
#[derive(Debug, Clone)]
pub struct TrainJob<'a> {
    pub config: &'a SystemConfig,
    pub prices: &'a PriceBook,
    pub forecasts: &'a [DayProfile],
    pub errors: &'a [ErrorSample],
    pub dataset_hash: String,
    pub train: TrainConfig,
    /// Where to write the last finite state if the loss blows up.
    pub diagnostic_path: Option<PathBuf>,
}

const TRAIN_STREAM: u64 = 0x7EA1_0000;

impl TrainJob<'_> {
    /// Fresh checkpoint: network initialised from the training seed.
    pub fn initial(&self) -> Checkpoint {
        let params = NetworkParams::for_config(self.config, self.train.seed);
        Checkpoint::new(params, self.train, self.dataset_hash.clone())
    }

    /// Trains from `start` (or a fresh network) for `train.epochs` epochs.
    /// `on_epoch` sees every finished epoch; returning an error stops training.
    pub fn run(
        &self,
        start: Option<Checkpoint>,
        mut on_epoch: impl FnMut(&EpochSummary, &Checkpoint) -> Result<(), TrainError>,
    ) -> Result<(Checkpoint, Vec<EpochSummary>), TrainError> {
        self.train.validate()?;
        if self.forecasts.is_empty() || self.errors.is_empty() {
            return Err(TrainError::Invalid("training needs non-empty forecast and error pools".into()));
        }
        let mut ckpt = start.unwrap_or_else(|| self.initial());
        if ckpt.params.input_dim() != 4 * self.config.slots
            || ckpt.params.output_dim() != super::network::output_width(self.config)
        {
            return Err(TrainError::Invalid(format!("checkpoint dims {:?} do not fit the system", ckpt.params.dims)));
        }
        ckpt.train = self.train;
        ckpt.dataset_hash = self.dataset_hash.clone();
        let mut trace = Vec::with_capacity(self.train.epochs);
        let first = ckpt.epoch;
        for epoch in first + 1..=first + self.train.epochs {
            // each epoch draws from its own stream so resumed runs match
            let mut rng = ChaCha8Rng::seed_from_u64(self.train.seed ^ TRAIN_STREAM);
            rng.set_stream(epoch as u64);
            let mut losses = Vec::with_capacity(self.train.batches_per_epoch);
            for batch in 0..self.train.batches_per_epoch {
                let fs: Vec<DayProfile> = (0..self.train.forecast_batch)
                    .map(|_| self.forecasts[rng.random_range(0..self.forecasts.len())].clone())
                    .collect();
                let es: Vec<ErrorSample> = (0..self.train.error_batch)
                    .map(|_| self.errors[rng.random_range(0..self.errors.len())].clone())
                    .collect();
                let (l, g) = gradient(&ckpt.params, self.config, self.prices, &fs, &es, self.train.lambda)?;
                if !l.is_finite() || !g.is_finite() {
                    if let Some(path) = &self.diagnostic_path {
                        ckpt.save(path)?;
                    }
                    return Err(TrainError::NonFinite { epoch, batch });
                }
                adam_step(&mut ckpt.params.data, &mut ckpt.adam, &g.data, &self.train);
                losses.push(l);
                log::debug!("epoch {epoch} batch {batch} loss {l:.4}");
            }
            ckpt.epoch = epoch;
            let mean_loss =
                if losses.is_empty() { f64::NAN } else { losses.iter().sum::<f64>() / losses.len() as f64 };
            let summary = EpochSummary { epoch, mean_loss, batch_losses: losses };
            log::info!("epoch {epoch}: mean loss {mean_loss:.4}");
            on_epoch(&summary, &ckpt)?;
            trace.push(summary);
        }
        Ok((ckpt, trace))
    }
}
