//! Synthetic profiles and forecast errors, forecast augmentation and CSV files.

mod csv_io;
mod errors;
mod generate;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use crate::model::apply_errors;
pub use csv_io::{load_errors, load_profiles, save_errors, save_profiles, ERROR_COLUMNS, PROFILE_COLUMNS};
pub use errors::{sample_errors, ErrorFamily, ErrorSpec, SeriesErrorSpec};
pub use generate::{augment_forecasts, combine, generate_base_days, generate_days, Harmonic, ProfileSpec, SeriesShape};

use crate::error::DataError;
use crate::model::{DayProfile, ErrorSample, SystemConfig};

pub const BASE_FILE: &str = "base_days.csv";
pub const POOL_FILE: &str = "forecast_pool.csv";
pub const ERROR_FILE: &str = "errors.csv";
pub const EVAL_FORECAST_FILE: &str = "eval_forecast.csv";
pub const EVAL_ACTUAL_FILE: &str = "eval_actual.csv";

/// Pool sizes used for the synthetic training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSizes {
    pub base_days: usize,
    pub pool: usize,
    pub errors: usize,
}

impl Default for DatasetSizes {
    fn default() -> Self {
        Self { base_days: 365, pool: 56_172, errors: 233 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: Option<u64>,
}

/// Training data: base days, the augmented forecast pool and the error pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub base_days: Vec<DayProfile>,
    pub forecasts: Vec<DayProfile>,
    pub errors: Vec<ErrorSample>,
    pub provenance: Provenance,
}

fn hash_series<'a>(hasher: &mut Sha256, days: impl ExactSizeIterator<Item = [&'a [f64]; 4]>) {
    hasher.update((days.len() as u64).to_le_bytes());
    for series in days {
        for s in series {
            hasher.update((s.len() as u64).to_le_bytes());
            for v in s {
                hasher.update(v.to_le_bytes());
            }
        }
    }
}

/// SHA-256 over the little-endian bytes of every value, with length prefixes.
pub fn content_hash(profiles: &[&[DayProfile]], errors: &[&[ErrorSample]]) -> String {
    let mut h = Sha256::new();
    for p in profiles {
        hash_series(&mut h, p.iter().map(|d| d.series()));
    }
    for e in errors {
        hash_series(&mut h, e.iter().map(|d| d.series()));
    }
    hex::encode(h.finalize())
}

impl Dataset {
    pub fn synthetic(profile: &ProfileSpec, errors: &ErrorSpec, sizes: DatasetSizes, seed: u64) -> Result<Self, DataError> {
        errors.validate().map_err(DataError::Invalid)?;
        if sizes.base_days < 2 || sizes.pool == 0 || sizes.errors == 0 {
            return Err(DataError::Invalid(format!("dataset sizes {sizes:?} leave an empty pool")));
        }
        let base_days = generate_base_days(profile, sizes.base_days, seed);
        let forecasts = augment_forecasts(&base_days, sizes.pool, seed);
        let errors = sample_errors(errors, sizes.errors, seed);
        Ok(Self { base_days, forecasts, errors, provenance: Provenance { source: "synthetic".into(), seed: Some(seed) } })
    }

    pub fn hash(&self) -> String {
        content_hash(&[&self.base_days, &self.forecasts], &[&self.errors])
    }

    pub fn validate(&self, config: &SystemConfig) -> Result<(), DataError> {
        if self.forecasts.is_empty() || self.errors.is_empty() {
            return Err(DataError::Invalid("forecast and error pools must be non-empty".into()));
        }
        for d in self.base_days.iter().chain(&self.forecasts) {
            d.validate(config.slots)?;
        }
        for e in &self.errors {
            if e.slots() != config.slots {
                return Err(DataError::Invalid(format!("error sample has {} slots, expected {}", e.slots(), config.slots)));
            }
        }
        Ok(())
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), DataError> {
        std::fs::create_dir_all(dir).map_err(|source| DataError::Io { path: dir.to_path_buf(), source })?;
        save_profiles(&dir.join(BASE_FILE), &self.base_days)?;
        save_profiles(&dir.join(POOL_FILE), &self.forecasts)?;
        save_errors(&dir.join(ERROR_FILE), &self.errors)
    }

    pub fn load_dir(dir: &Path, slots: usize) -> Result<Self, DataError> {
        let base_path = dir.join(BASE_FILE);
        let base_days = if base_path.exists() { load_profiles(&base_path, slots)? } else { Vec::new() };
        Ok(Self {
            base_days,
            forecasts: load_profiles(&dir.join(POOL_FILE), slots)?,
            errors: load_errors(&dir.join(ERROR_FILE), slots)?,
            provenance: Provenance { source: format!("csv:{}", dir.display()), seed: None },
        })
    }
}

/// Held-out days: forecasts with their realised values.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSet {
    pub forecasts: Vec<DayProfile>,
    pub actuals: Vec<DayProfile>,
}

impl EvalSet {
    /// `days` calendar days following the training base days, realised with
    /// errors drawn from a stream disjoint from the training error pool.
    pub fn synthetic(
        profile: &ProfileSpec,
        errors: &ErrorSpec,
        first_day: u64,
        days: usize,
        seed: u64,
    ) -> Result<Self, DataError> {
        errors.validate().map_err(DataError::Invalid)?;
        let forecasts = generate_days(profile, first_day, days, seed);
        let eval_seed = seed ^ 0x5EED_E7A1_0000_0000;
        let actuals = forecasts
            .iter()
            .zip(sample_errors(errors, days, eval_seed))
            .map(|(f, e)| apply_errors(f, &e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { forecasts, actuals })
    }

    pub fn len(&self) -> usize {
        self.forecasts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forecasts.is_empty()
    }

    pub fn hash(&self) -> String {
        content_hash(&[&self.forecasts, &self.actuals], &[])
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), DataError> {
        std::fs::create_dir_all(dir).map_err(|source| DataError::Io { path: dir.to_path_buf(), source })?;
        save_profiles(&dir.join(EVAL_FORECAST_FILE), &self.forecasts)?;
        save_profiles(&dir.join(EVAL_ACTUAL_FILE), &self.actuals)
    }

    pub fn load_dir(dir: &Path, slots: usize) -> Result<Self, DataError> {
        let forecasts = load_profiles(&dir.join(EVAL_FORECAST_FILE), slots)?;
        let actuals = load_profiles(&dir.join(EVAL_ACTUAL_FILE), slots)?;
        if forecasts.len() != actuals.len() {
            return Err(DataError::Invalid(format!(
                "{} forecast days but {} actual days",
                forecasts.len(),
                actuals.len()
            )));
        }
        Ok(Self { forecasts, actuals })
    }
}
