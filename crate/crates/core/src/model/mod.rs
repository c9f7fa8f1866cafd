//! Plant description, schedules, constraint checks and cost arithmetic.

mod config;
mod cost;
mod feasibility;
mod prices;
mod profile;
mod schedule;

pub use config::{DeviceKind, ServiceWindow, StorageClass, StorageUnit, SystemConfig};
pub use cost::{
    extra_cost, mismatch, penalty_by_slot, penalty_cost, scheduling_breakdown, scheduling_cost, soc_trajectory,
    total_cost_day, CostLedger, SchedulingBreakdown,
};
pub use feasibility::{check_feasibility, Violation, ViolationKind, DEFAULT_TOL};
pub use prices::PriceBook;
pub use profile::{apply_errors, DayProfile, ErrorSample};
pub use schedule::Schedule;
