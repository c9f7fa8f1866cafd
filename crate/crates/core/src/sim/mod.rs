//! Real-time settlement of day-ahead schedules and the evaluation reports.

mod adjust;
mod report;
mod settle;

pub use adjust::{adjust_soc, Adjustment, AdjustmentLog, Residual, SOC_TOL};
pub use report::{month_of, run_experiment, DayResult, DayScheduler, EvaluationReport, Method, RunReport};
pub use settle::{settle_day, SettlementResult};
