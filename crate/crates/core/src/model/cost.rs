//! Scheduling cost, real-time mismatch settlement and SOC penalties.

use serde::{Deserialize, Serialize};

use super::config::{DeviceKind, ServiceWindow, SystemConfig};
use super::prices::PriceBook;
use super::profile::DayProfile;
use super::schedule::Schedule;
use crate::error::ModelError;

/// SOC over the window slots, starting from `soc0` held at `T_in`.
///
/// Positive flow is a discharge and lowers the SOC unless the config asks
/// for the literal `SOC0 + sum(S)` convention.
pub fn soc_trajectory(config: &SystemConfig, flows: &[f64], window: ServiceWindow, soc0: f64) -> Vec<f64> {
    let sign = if config.soc_sign_literal { 1.0 } else { -1.0 };
    let mut soc = soc0;
    window
        .range()
        .map(|t| {
            soc += sign * flows[t];
            soc
        })
        .collect()
}

/// Per-slot scheduling cost split into its components (£).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SchedulingBreakdown {
    pub grid: f64,
    pub gas: f64,
    pub ev_reward: f64,
    pub tes_reward: f64,
    pub renewable_reward: f64,
}

impl SchedulingBreakdown {
    pub fn net(&self) -> f64 {
        self.grid + self.gas - self.ev_reward - self.tes_reward - self.renewable_reward
    }
}

fn check_slot(config: &SystemConfig, t: usize) -> Result<(), ModelError> {
    if t >= config.slots {
        return Err(ModelError::SlotOutOfRange { slot: t, slots: config.slots });
    }
    Ok(())
}

pub fn scheduling_breakdown(
    config: &SystemConfig,
    schedule: &Schedule,
    profile: &DayProfile,
    prices: &PriceBook,
    t: usize,
) -> Result<SchedulingBreakdown, ModelError> {
    check_slot(config, t)?;
    let ev: f64 = schedule.ev_flow.iter().map(|f| f[t].abs()).sum();
    let tes: f64 = schedule.tes_flow.iter().map(|f| f[t].abs()).sum();
    Ok(SchedulingBreakdown {
        grid: prices.elec_day_ahead[t] * schedule.grid_import[t],
        gas: prices.gas_day_ahead[t] * schedule.gas_import[t],
        ev_reward: prices.reward_ev * ev,
        tes_reward: prices.reward_tes * tes,
        renewable_reward: prices.reward_pv * config.clip_pv(profile.pv[t])
            + prices.reward_wind * config.clip_wind(profile.wind[t]),
    })
}

/// Day-ahead scheduling cost of slot `t` (zero-based); renewables are read
/// from `profile`.
pub fn scheduling_cost(
    config: &SystemConfig,
    schedule: &Schedule,
    profile: &DayProfile,
    prices: &PriceBook,
    t: usize,
) -> Result<f64, ModelError> {
    scheduling_breakdown(config, schedule, profile, prices, t).map(|b| b.net())
}

/// Electricity and gas mismatch `(dS_E, dS_G)` against realised values.
pub fn mismatch(
    config: &SystemConfig,
    schedule: &Schedule,
    actual: &DayProfile,
    t: usize,
) -> Result<(f64, f64), ModelError> {
    check_slot(config, t)?;
    let renewables = config.clip_wind(actual.wind[t]) + config.clip_pv(actual.pv[t]);
    let elec = (actual.elec_load[t]
        - config.eta_transformer * schedule.grid_import[t]
        - config.eta_chp_elec * schedule.chp_gas(t)
        - renewables
        - schedule.ev_total(t))
        / config.eta_transformer;
    let gas = (actual.heat_load[t]
        - config.eta_chp_heat * schedule.chp_gas(t)
        - config.eta_boiler * schedule.boiler_gas(t)
        - schedule.tes_total(t))
        / config.eta_boiler;
    Ok((elec, gas))
}

/// Real-time cost of settling a mismatch in slot `t`.
///
/// A shortfall is bought at the `+` price. A surplus is priced at
/// `(C_DA - C_minus) * dS`, which is negative (a credit).
pub fn extra_cost(prices: &PriceBook, delta_elec: f64, delta_gas: f64, t: usize) -> (f64, f64) {
    let elec = if delta_elec >= 0.0 {
        prices.elec_plus * delta_elec
    } else {
        (prices.elec_day_ahead[t] - prices.elec_minus) * delta_elec
    };
    let gas = if delta_gas >= 0.0 {
        prices.gas_plus * delta_gas
    } else {
        (prices.gas_day_ahead[t] - prices.gas_minus) * delta_gas
    };
    (elec, gas)
}

/// SOC bound excess of every EV and TES at slot `t`, summed over devices.
pub fn penalty_cost(config: &SystemConfig, schedule: &Schedule, t: usize) -> Result<f64, ModelError> {
    check_slot(config, t)?;
    Ok(penalty_by_slot(config, schedule)[t])
}

/// Penalty for every slot; slots outside a device's window contribute nothing
/// for that device.
pub fn penalty_by_slot(config: &SystemConfig, schedule: &Schedule) -> Vec<f64> {
    let mut out = vec![0.0; config.slots];
    for kind in [DeviceKind::Ev, DeviceKind::Tes] {
        let class = config.class(kind);
        for (unit, flows) in config.units(kind).iter().zip(schedule.flows(kind)) {
            let soc = soc_trajectory(config, flows, unit.window, unit.soc_initial);
            for (t, s) in unit.window.range().zip(soc) {
                out[t] += (class.soc_min - s).max(s - class.soc_max).max(0.0);
            }
        }
    }
    out
}

/// Per-slot settlement ledger of one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub breakdown: Vec<SchedulingBreakdown>,
    pub scheduling: Vec<f64>,
    pub mismatch_elec: Vec<f64>,
    pub mismatch_gas: Vec<f64>,
    pub extra_elec: Vec<f64>,
    pub extra_gas: Vec<f64>,
    pub penalty: Vec<f64>,
    /// `C_All[t] = C_Sch[t] + C_Extra,E[t] + C_Extra,G[t]`
    pub all: Vec<f64>,
    /// Cost caused by post-hoc SOC adjustment, filled in by settlement.
    pub adjustment_cost: f64,
}

impl CostLedger {
    pub fn slots(&self) -> usize {
        self.all.len()
    }

    pub fn total(&self) -> f64 {
        self.all.iter().sum()
    }

    pub fn total_scheduling(&self) -> f64 {
        self.scheduling.iter().sum()
    }

    pub fn total_extra(&self) -> f64 {
        self.total_extra_elec() + self.total_extra_gas()
    }

    pub fn total_extra_elec(&self) -> f64 {
        self.extra_elec.iter().sum()
    }

    pub fn total_extra_gas(&self) -> f64 {
        self.extra_gas.iter().sum()
    }

    pub fn total_penalty(&self) -> f64 {
        self.penalty.iter().sum()
    }

    /// Day totals of the scheduling components.
    pub fn breakdown_total(&self) -> SchedulingBreakdown {
        self.breakdown.iter().fold(SchedulingBreakdown::default(), |acc, b| SchedulingBreakdown {
            grid: acc.grid + b.grid,
            gas: acc.gas + b.gas,
            ev_reward: acc.ev_reward + b.ev_reward,
            tes_reward: acc.tes_reward + b.tes_reward,
            renewable_reward: acc.renewable_reward + b.renewable_reward,
        })
    }
}

/// Settles `schedule` against `actual` for every slot.
///
/// Renewable rewards in the scheduling cost use the realised generation.
pub fn total_cost_day(
    config: &SystemConfig,
    schedule: &Schedule,
    actual: &DayProfile,
    prices: &PriceBook,
) -> Result<CostLedger, ModelError> {
    schedule.check_dimensions(config)?;
    actual.validate(config.slots)?;
    prices.validate(config.slots)?;

    let n = config.slots;
    let mut ledger = CostLedger {
        breakdown: Vec::with_capacity(n),
        scheduling: Vec::with_capacity(n),
        mismatch_elec: Vec::with_capacity(n),
        mismatch_gas: Vec::with_capacity(n),
        extra_elec: Vec::with_capacity(n),
        extra_gas: Vec::with_capacity(n),
        penalty: penalty_by_slot(config, schedule),
        all: Vec::with_capacity(n),
        adjustment_cost: 0.0,
    };
    for t in 0..n {
        let b = scheduling_breakdown(config, schedule, actual, prices, t)?;
        let sch = b.net();
        let (de, dg) = mismatch(config, schedule, actual, t)?;
        let (ce, cg) = extra_cost(prices, de, dg, t);
        ledger.breakdown.push(b);
        ledger.scheduling.push(sch);
        ledger.mismatch_elec.push(de);
        ledger.mismatch_gas.push(dg);
        ledger.extra_elec.push(ce);
        ledger.extra_gas.push(cg);
        ledger.all.push(sch + ce + cg);
    }
    Ok(ledger)
}
