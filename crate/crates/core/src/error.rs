use std::path::PathBuf;

use thiserror::Error;

use crate::lp::SolveStatus;
use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch { what: String, expected: usize, found: usize },
    #[error("slot index {slot} out of range for a {slots}-slot day")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    /// The day-ahead LP has no feasible point. `slots` are 1-based and name the
    /// slots whose balance cannot be met on their own.
    #[error("day-ahead problem is infeasible (slots {slots:?})")]
    Infeasible { slots: Vec<usize> },
    #[error("LP solve did not reach optimality: {0:?}")]
    NotOptimal(SolveStatus),
    #[error("LP solution has {expected} variables in the catalogue but {found} values")]
    SolutionShape { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Invalid(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("schedule violates {} constraint(s), first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InfeasibleSchedule(Vec<Violation>),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
