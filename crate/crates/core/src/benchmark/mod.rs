//! Forecast-exact day-ahead schedule obtained from a linear program.
//!
//! The bilinear `v * S_G` terms are replaced by the converter inputs
//! `G_CHP` and `G_B`; storage flows are split into charge and discharge
//! parts so the absolute-flow rewards become linear.

use std::collections::BTreeSet;

use log::{debug, info, warn};

use crate::error::ScheduleError;
use crate::lp::{self, LinearProgram, SolveOptions, SolveReport, SolveStatus};
use crate::model::{DayProfile, DeviceKind, PriceBook, Schedule, SystemConfig};

/// Column positions of the day-ahead LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpLayout {
    pub slots: usize,
    pub evs: usize,
    pub tess: usize,
}

impl LpLayout {
    pub fn new(config: &SystemConfig) -> Self {
        Self { slots: config.slots, evs: config.ev_count(), tess: config.tes_count() }
    }

    /// Variables per slot.
    pub fn width(&self) -> usize {
        4 + 2 * (self.evs + self.tess)
    }

    pub fn num_variables(&self) -> usize {
        self.slots * self.width()
    }

    pub fn grid(&self, t: usize) -> usize {
        t * self.width()
    }

    pub fn gas(&self, t: usize) -> usize {
        t * self.width() + 1
    }

    pub fn chp(&self, t: usize) -> usize {
        t * self.width() + 2
    }

    pub fn boiler(&self, t: usize) -> usize {
        t * self.width() + 3
    }

    fn device_base(&self, kind: DeviceKind, k: usize, t: usize) -> usize {
        let offset = match kind {
            DeviceKind::Ev => k,
            DeviceKind::Tes => self.evs + k,
        };
        t * self.width() + 4 + 2 * offset
    }

    pub fn charge(&self, kind: DeviceKind, k: usize, t: usize) -> usize {
        self.device_base(kind, k, t)
    }

    pub fn discharge(&self, kind: DeviceKind, k: usize, t: usize) -> usize {
        self.device_base(kind, k, t) + 1
    }

    pub fn slot_of(&self, var: usize) -> usize {
        var / self.width()
    }
}

/// Allowed storage direction per device and slot.
///
/// A plan forbids charging and discharging in the same slot, which the
/// reward terms would otherwise make profitable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionPlan {
    /// `discharge[kind][k][t]`: true allows discharge only, false charge only.
    pub ev_discharge: Vec<Vec<bool>>,
    pub tes_discharge: Vec<Vec<bool>>,
}

impl DirectionPlan {
    /// Alternates direction every slot inside each window, starting with
    /// whichever direction has more SOC headroom (discharge on ties).
    pub fn alternating(config: &SystemConfig) -> Self {
        Self::build(config, false)
    }

    /// Like [`DirectionPlan::alternating`] but the alternation follows the
    /// absolute slot parity, so every device of a class moves the same way.
    pub fn aligned(config: &SystemConfig) -> Self {
        Self::build(config, true)
    }

    /// The plans the benchmark scheduler tries, in order.
    pub fn candidates(config: &SystemConfig) -> [Self; 2] {
        [Self::alternating(config), Self::aligned(config)]
    }

    fn build(config: &SystemConfig, aligned: bool) -> Self {
        let build = |kind: DeviceKind| -> Vec<Vec<bool>> {
            let class = config.class(kind);
            config
                .units(kind)
                .iter()
                .map(|unit| {
                    let down = unit.soc_initial - class.soc_min;
                    let up = class.soc_max - unit.soc_initial;
                    let discharge_first = (down >= up) != config.soc_sign_literal;
                    (0..config.slots)
                        .map(|t| {
                            let i = if aligned { t } else { t.saturating_sub(unit.window.t_in - 1) };
                            (i % 2 == 0) == discharge_first
                        })
                        .collect()
                })
                .collect()
        };
        Self { ev_discharge: build(DeviceKind::Ev), tes_discharge: build(DeviceKind::Tes) }
    }

    pub fn discharge_allowed(&self, kind: DeviceKind, k: usize, t: usize) -> bool {
        match kind {
            DeviceKind::Ev => self.ev_discharge[k][t],
            DeviceKind::Tes => self.tes_discharge[k][t],
        }
    }
}

/// The relaxed day-ahead LP: both storage directions are open in every
/// window slot.
pub fn build_day_ahead_lp(config: &SystemConfig, forecast: &DayProfile, prices: &PriceBook) -> LinearProgram {
    build_lp(config, forecast, prices, None)
}

/// The day-ahead LP with storage directions fixed by `plan`.
pub fn build_planned_lp(
    config: &SystemConfig,
    forecast: &DayProfile,
    prices: &PriceBook,
    plan: &DirectionPlan,
) -> LinearProgram {
    build_lp(config, forecast, prices, Some(plan))
}

fn build_lp(config: &SystemConfig, forecast: &DayProfile, prices: &PriceBook, plan: Option<&DirectionPlan>) -> LinearProgram {
    let layout = LpLayout::new(config);
    let mut lp = LinearProgram::new();
    let kinds = [DeviceKind::Ev, DeviceKind::Tes];

    for t in 0..config.slots {
        let slot = t + 1;
        lp.add_variable(format!("S_E_{slot}"), 0.0, config.grid_max, prices.elec_day_ahead[t]);
        lp.add_variable(format!("S_G_{slot}"), 0.0, config.gas_max, prices.gas_day_ahead[t]);
        lp.add_variable(format!("G_CHP_{slot}"), 0.0, config.chp_max, 0.0);
        lp.add_variable(format!("G_B_{slot}"), 0.0, config.boiler_max, 0.0);
        for kind in kinds {
            let class = config.class(kind);
            let reward = match kind {
                DeviceKind::Ev => prices.reward_ev,
                DeviceKind::Tes => prices.reward_tes,
            };
            for (k, unit) in config.units(kind).iter().enumerate() {
                let open = unit.window.contains(t);
                let (ch_ok, dch_ok) = match plan {
                    Some(p) if open => {
                        let d = p.discharge_allowed(kind, k, t);
                        (!d, d)
                    }
                    _ => (open, open),
                };
                let ch_max = if ch_ok { class.charge_flow_limit() } else { 0.0 };
                let dch_max = if dch_ok { class.discharge_flow_limit() } else { 0.0 };
                lp.add_variable(format!("{kind}{}_ch_{slot}", k + 1), 0.0, ch_max, -reward);
                lp.add_variable(format!("{kind}{}_dch_{slot}", k + 1), 0.0, dch_max, -reward);
            }
        }
    }
    debug_assert_eq!(lp.num_variables(), layout.num_variables());

    let mut renewable_reward = 0.0;
    for t in 0..config.slots {
        let slot = t + 1;
        let wind = config.clip_wind(forecast.wind[t]);
        let pv = config.clip_pv(forecast.pv[t]);
        renewable_reward += prices.reward_wind * wind + prices.reward_pv * pv;

        let mut elec = vec![
            (layout.grid(t), config.eta_transformer),
            (layout.chp(t), config.eta_chp_elec),
        ];
        for k in 0..layout.evs {
            elec.push((layout.discharge(DeviceKind::Ev, k, t), 1.0));
            elec.push((layout.charge(DeviceKind::Ev, k, t), -1.0));
        }
        lp.add_eq(format!("elec_{slot}"), elec, forecast.elec_load[t] - wind - pv);

        let mut heat = vec![(layout.chp(t), config.eta_chp_heat), (layout.boiler(t), config.eta_boiler)];
        for k in 0..layout.tess {
            heat.push((layout.discharge(DeviceKind::Tes, k, t), 1.0));
            heat.push((layout.charge(DeviceKind::Tes, k, t), -1.0));
        }
        lp.add_eq(format!("heat_{slot}"), heat, forecast.heat_load[t]);

        lp.add_le(
            format!("split_{slot}"),
            vec![(layout.chp(t), 1.0), (layout.boiler(t), 1.0), (layout.gas(t), -1.0)],
            0.0,
        );
    }
    lp.objective_offset = -renewable_reward;

    for kind in kinds {
        let class = config.class(kind);
        for (k, unit) in config.units(kind).iter().enumerate() {
            let net = |t: usize| [(layout.discharge(kind, k, t), 1.0), (layout.charge(kind, k, t), -1.0)];
            let window: Vec<(usize, f64)> = unit.window.range().flat_map(net).collect();
            lp.add_eq(format!("{kind}{}_net", k + 1), window, 0.0);

            // SOC after slot t is soc0 -/+ cumulative net discharge
            let (lo, hi) = if config.soc_sign_literal {
                (class.soc_min - unit.soc_initial, class.soc_max - unit.soc_initial)
            } else {
                (unit.soc_initial - class.soc_max, unit.soc_initial - class.soc_min)
            };
            let mut cumulative = Vec::new();
            for t in unit.window.range() {
                cumulative.extend(net(t));
                lp.add_range(format!("{kind}{}_soc_{}", k + 1, t + 1), cumulative.clone(), lo, hi);
            }
        }
    }
    lp
}

/// Per-device sum over slots of `min(u_ch, u_dch)`.
pub fn churn(config: &SystemConfig, assignment: &[f64]) -> f64 {
    let layout = LpLayout::new(config);
    let mut total = 0.0;
    for kind in [DeviceKind::Ev, DeviceKind::Tes] {
        for k in 0..config.units(kind).len() {
            for t in 0..config.slots {
                total += assignment[layout.charge(kind, k, t)].min(assignment[layout.discharge(kind, k, t)]);
            }
        }
    }
    total
}

/// Converts an optimal LP solution into a schedule.
pub fn lp_solution_to_schedule(config: &SystemConfig, report: &SolveReport) -> Result<Schedule, ScheduleError> {
    if report.status != SolveStatus::Optimal {
        return Err(ScheduleError::NotOptimal(report.status));
    }
    let layout = LpLayout::new(config);
    let x = &report.assignment;
    if x.len() != layout.num_variables() {
        return Err(ScheduleError::SolutionShape { expected: layout.num_variables(), found: x.len() });
    }
    let tol = 1e-9;
    let mut s = Schedule::zeros(config);
    for t in 0..config.slots {
        let gas = x[layout.gas(t)].max(0.0);
        let chp = x[layout.chp(t)].max(0.0);
        let boiler = x[layout.boiler(t)].max(0.0);
        s.grid_import[t] = x[layout.grid(t)].max(0.0);
        // gas is never bought beyond what the converters draw
        let used = chp + boiler;
        s.gas_import[t] = if used > tol { used.min(config.gas_max) } else { gas.min(config.gas_max) };
        if s.gas_import[t] > tol {
            s.chp_share[t] = chp / s.gas_import[t];
            s.boiler_share[t] = boiler / s.gas_import[t];
        }
        for kind in [DeviceKind::Ev, DeviceKind::Tes] {
            for (k, unit) in config.units(kind).iter().enumerate() {
                if unit.window.contains(t) {
                    s.flows_mut(kind)[k][t] = x[layout.discharge(kind, k, t)] - x[layout.charge(kind, k, t)];
                }
            }
        }
    }
    Ok(s)
}

fn offending_slots(layout: &LpLayout, lp: &LinearProgram, rows: &[usize]) -> Vec<usize> {
    let per_slot: BTreeSet<usize> = rows
        .iter()
        .filter(|&&i| i < 3 * layout.slots)
        .map(|&i| i / 3 + 1)
        .collect();
    if !per_slot.is_empty() {
        return per_slot.into_iter().collect();
    }
    rows.iter()
        .flat_map(|&i| lp.constraints[i].coeffs.iter().map(|&(j, _)| layout.slot_of(j) + 1))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Schedules each day by minimising the day-ahead cost against the forecast.
#[derive(Debug, Clone)]
pub struct BenchmarkScheduler {
    pub config: SystemConfig,
    pub prices: PriceBook,
    pub options: SolveOptions,
    /// Solve with each candidate [`DirectionPlan`], keep the cheapest, and
    /// fall back to the relaxation when every planned problem is infeasible.
    pub use_plan: bool,
    pub dump_lp: bool,
}

impl BenchmarkScheduler {
    pub fn new(config: SystemConfig, prices: PriceBook) -> Self {
        Self { config, prices, options: SolveOptions::default(), use_plan: true, dump_lp: false }
    }

    pub fn schedule(&self, forecast: &DayProfile) -> Result<Schedule, ScheduleError> {
        self.solve(forecast).map(|(s, _)| s)
    }

    pub fn solve(&self, forecast: &DayProfile) -> Result<(Schedule, SolveReport), ScheduleError> {
        forecast.validate(self.config.slots)?;
        self.config.validate()?;
        let layout = LpLayout::new(&self.config);

        let mut report: Option<SolveReport> = None;
        if self.use_plan {
            for plan in DirectionPlan::candidates(&self.config) {
                let lp = build_planned_lp(&self.config, forecast, &self.prices, &plan);
                let r = lp::solve(&lp, &self.options);
                let better = match &report {
                    None => r.status != SolveStatus::Infeasible,
                    Some(best) => r.status == SolveStatus::Optimal && (!best.is_optimal() || r.objective < best.objective),
                };
                if better {
                    report = Some(r);
                }
            }
            if report.is_none() {
                info!("direction-planned LPs infeasible, retrying without a plan");
            }
        }
        let lp = build_day_ahead_lp(&self.config, forecast, &self.prices);
        if self.dump_lp {
            debug!("day-ahead LP:\n{}", lp.to_lp_format());
        }
        let report = match report {
            Some(r) => r,
            None => lp::solve(&lp, &self.options),
        };
        match report.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(ScheduleError::Infeasible {
                    slots: offending_slots(&layout, &lp, &report.infeasible_rows),
                })
            }
            other => return Err(ScheduleError::NotOptimal(other)),
        }
        let c = churn(&self.config, &report.assignment);
        if c > 1e-6 {
            warn!("benchmark schedule charges and discharges simultaneously: churn {c:.3} kWh");
        }
        let schedule = lp_solution_to_schedule(&self.config, &report)?;
        Ok((schedule, report))
    }
}
