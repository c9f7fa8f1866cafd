//! Day-ahead scheduling of an integrated electricity and heat system under
//! forecast uncertainty.
//!
//! [`model`] holds the plant, cost and constraint arithmetic. [`benchmark`]
//! builds the forecast-exact LP schedule, [`neural`] trains a network that
//! maps forecasts to schedules, [`data`] generates and loads profiles and
//! [`sim`] settles schedules against realised values.

pub mod benchmark;
pub mod data;
pub mod error;
pub mod lp;
pub mod model;
pub mod neural;
pub mod sim;

pub use error::{DataError, ModelError, ScheduleError, SimError, TrainError};
