use ies_sched::{DataError, ModelError, ScheduleError, SimError, TrainError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Invalid(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::Infeasible { slots } => {
                let slots: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
                CliError::Infeasible(format!("benchmark LP infeasible in slots {}", slots.join(", ")))
            }
            ScheduleError::NotOptimal(status) => CliError::Infeasible(format!("benchmark LP not solved: {status:?}")),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Schedule(s) => s.into(),
            SimError::InfeasibleSchedule(v) => {
                let lines: Vec<String> = v.iter().take(10).map(|v| v.to_string()).collect();
                CliError::Infeasible(format!("schedule violates {} constraints: {}", v.len(), lines.join("; ")))
            }
            other => CliError::Data(other.to_string()),
        }
    }
}
