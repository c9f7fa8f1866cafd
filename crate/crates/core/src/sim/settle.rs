use serde::{Deserialize, Serialize};

use super::adjust::{adjust_soc, AdjustmentLog};
use crate::error::SimError;
use crate::model::{check_feasibility, total_cost_day, CostLedger, DayProfile, PriceBook, Schedule, SystemConfig, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementResult {
    /// Ledger of the adjusted schedule, with the adjustment cost filled in.
    pub ledger: CostLedger,
    pub adjusted: Schedule,
    pub log: AdjustmentLog,
}

impl SettlementResult {
    pub fn delta_elec(&self) -> &[f64] {
        &self.ledger.mismatch_elec
    }

    pub fn delta_gas(&self) -> &[f64] {
        &self.ledger.mismatch_gas
    }
}

/// Repairs SOC bounds, then settles the schedule against `actual`.
///
/// The schedule must respect every device and flow limit under `forecast`;
/// balance gaps are what settlement pays for. The adjustment cost is the
/// difference between the adjusted and the unadjusted schedule, both priced
/// under `actual`.
pub fn settle_day(
    config: &SystemConfig,
    prices: &PriceBook,
    schedule: &Schedule,
    forecast: &DayProfile,
    actual: &DayProfile,
) -> Result<SettlementResult, SimError> {
    let blocking: Vec<_> = check_feasibility(config, forecast, schedule, DEFAULT_TOL)?
        .into_iter()
        .filter(|v| !v.kind.is_balance() && !v.kind.is_soc())
        .collect();
    if !blocking.is_empty() {
        return Err(SimError::InfeasibleSchedule(blocking));
    }
    let (adjusted, log) = adjust_soc(config, schedule);
    let mut ledger = total_cost_day(config, &adjusted, actual, prices)?;
    if !log.is_empty() {
        let raw = total_cost_day(config, schedule, actual, prices)?;
        ledger.adjustment_cost = ledger.total() - raw.total();
    }
    Ok(SettlementResult { ledger, adjusted, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::BenchmarkScheduler;
    use crate::model::ErrorSample;

    fn day() -> DayProfile {
        DayProfile::from_series([
            (0..24).map(|t| 520.0 + 9.0 * t as f64).collect(),
            (0..24).map(|t| 260.0 + 4.0 * (t % 7) as f64).collect(),
            vec![100.0; 24],
            (0..24).map(|t| if (6..19).contains(&t) { 80.0 } else { 0.0 }).collect(),
        ])
    }

    fn scaled_loads(f: &DayProfile, k: f64) -> DayProfile {
        let mut a = f.clone();
        a.elec_load.iter_mut().chain(a.heat_load.iter_mut()).for_each(|v| *v *= k);
        a
    }

    #[test]
    fn zero_error_benchmark_settles_without_extra_cost() {
        let c = SystemConfig::default();
        let p = PriceBook::uk_2019(24);
        let f = day();
        let s = BenchmarkScheduler::new(c.clone(), p.clone()).schedule(&f).unwrap();
        let r = settle_day(&c, &p, &s, &f, &f).unwrap();
        assert!(r.ledger.total_extra().abs() <= 1e-9 * r.ledger.total().abs());
        assert_eq!(r.ledger.adjustment_cost, 0.0);
        assert!(r.log.is_empty());
        assert_eq!(crate::model::apply_errors(&f, &ErrorSample::zeros(24)).unwrap(), f);
    }

    #[test]
    fn shortfall_and_surplus_signs() {
        let c = SystemConfig::default();
        let p = PriceBook::uk_2019(24);
        let f = day();
        let s = BenchmarkScheduler::new(c.clone(), p.clone()).schedule(&f).unwrap();
        let short = settle_day(&c, &p, &s, &f, &scaled_loads(&f, 1.1)).unwrap();
        assert!(short.delta_elec().iter().chain(short.delta_gas()).all(|&d| d >= 0.0));
        assert!(short.ledger.total_extra() > 0.0);
        let surplus = settle_day(&c, &p, &s, &f, &scaled_loads(&f, 0.9)).unwrap();
        assert!(surplus.ledger.extra_elec.iter().all(|&e| e <= 0.0));
    }

    #[test]
    fn rejects_flow_violations() {
        let c = SystemConfig::default();
        let p = PriceBook::uk_2019(24);
        let mut s = Schedule::zeros(&c);
        s.grid_import[3] = 1500.0;
        let f = day();
        match settle_day(&c, &p, &s, &f, &f) {
            Err(SimError::InfeasibleSchedule(v)) => assert!(v.iter().any(|v| v.slot == 3)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn adjustment_cost_is_measured_under_actuals() {
        let c = SystemConfig::default();
        let p = PriceBook::uk_2019(24);
        let f = day();
        let mut s = Schedule::zeros(&c);
        s.grid_import = vec![400.0; 24];
        let w = c.evs[0].window;
        // discharge an EV that starts at its minimum, then recharge
        let first = w.t_in - 1;
        s.ev_flow[0][first] = 30.0;
        s.ev_flow[0][first + 1] = -30.0;
        let r = settle_day(&c, &p, &s, &f, &f).unwrap();
        let raw = total_cost_day(&c, &s, &f, &p).unwrap().total();
        assert!(!r.log.is_empty() || c.evs[0].soc_initial - 30.0 >= c.ev.soc_min);
        assert!((r.ledger.total() - raw - r.ledger.adjustment_cost).abs() < 1e-9);
    }
}
