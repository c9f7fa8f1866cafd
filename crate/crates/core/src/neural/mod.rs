//! Feed-forward scheduler mapping a day of forecasts to a schedule, trained
//! without target schedules on the expected settlement cost.

mod checkpoint;
mod enforce;
mod loss;
mod network;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use enforce::{enforce_backward, enforce_constraints, enforce_with_trace, EnforceTrace, ScheduleGrad};
pub use loss::{gradient, loss};
pub use network::{
    backward, forward_raw, forward_trace, input_scale, output_width, prelu, ForwardTrace, NetworkParams, HIDDEN,
    PRELU_SLOPE,
};
pub use train::{adam_step, AdamState, EpochSummary, TrainConfig, TrainJob};

use crate::error::ModelError;
use crate::model::{DayProfile, Schedule, SystemConfig};

/// Runs the network and the enforcement stage on one forecast day.
pub fn schedule(params: &NetworkParams, config: &SystemConfig, forecast: &DayProfile) -> Result<Schedule, ModelError> {
    forecast.validate(config.slots)?;
    let raw = forward_raw(params, &forecast.flatten())?;
    enforce_constraints(config, &raw)
}

/// A trained network bound to its plant.
#[derive(Debug, Clone)]
pub struct NeuralScheduler {
    pub config: SystemConfig,
    pub params: NetworkParams,
}

impl NeuralScheduler {
    pub fn new(config: SystemConfig, params: NetworkParams) -> Result<Self, ModelError> {
        if params.input_dim() != 4 * config.slots {
            return Err(ModelError::DimensionMismatch {
                what: "network input".into(),
                expected: 4 * config.slots,
                found: params.input_dim(),
            });
        }
        if params.output_dim() != output_width(&config) {
            return Err(ModelError::DimensionMismatch {
                what: "network output".into(),
                expected: output_width(&config),
                found: params.output_dim(),
            });
        }
        Ok(Self { config, params })
    }

    pub fn schedule(&self, forecast: &DayProfile) -> Result<Schedule, ModelError> {
        schedule(&self.params, &self.config, forecast)
    }
}
