//! Post-hoc SOC repair of a day-ahead schedule.

use serde::{Deserialize, Serialize};

use crate::model::{DeviceKind, Schedule, StorageClass, StorageUnit, SystemConfig};

/// SOC slack tolerated before a device counts as violating its bounds.
pub const SOC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adjustment {
    pub kind: DeviceKind,
    pub device: usize,
    /// Zero-based slot.
    pub slot: usize,
    pub before: f64,
    pub after: f64,
}

/// Net flow that could not be placed within the bounds and was forced into
/// the last window slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub kind: DeviceKind,
    pub device: usize,
    pub amount: f64,
    /// Largest SOC or flow bound excess left after forcing.
    pub stretch: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentLog {
    pub changes: Vec<Adjustment>,
    pub residuals: Vec<Residual>,
}

impl AdjustmentLog {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty() && self.residuals.is_empty()
    }

    /// True when every device ended inside its SOC bounds.
    pub fn is_clean(&self) -> bool {
        self.residuals.is_empty()
    }
}

fn soc_ok(sign: f64, class: &StorageClass, unit: &StorageUnit, flows: &[f64]) -> bool {
    let mut soc = unit.soc_initial;
    unit.window.range().all(|t| {
        soc += sign * flows[t];
        soc >= class.soc_min - SOC_TOL && soc <= class.soc_max + SOC_TOL
    })
}

/// Returns the new flows and the residual still owed at window end.
fn repair(sign: f64, class: &StorageClass, unit: &StorageUnit, flows: &[f64]) -> (Vec<f64>, f64) {
    let mut out = flows.to_vec();
    let (lo, hi) = (-class.charge_flow_limit(), class.discharge_flow_limit());
    let mut soc = unit.soc_initial;
    let mut owed = 0.0;
    for t in unit.window.range() {
        // sign * x must keep soc in [min, max]
        let (a, b) = ((class.soc_min - soc) * sign, (class.soc_max - soc) * sign);
        let (soc_lo, soc_hi) = if a <= b { (a, b) } else { (b, a) };
        let lower = lo.max(soc_lo);
        let upper = hi.min(soc_hi);
        let target = flows[t] + owed;
        let x = if lower > upper { target.clamp(lo, hi) } else { target.clamp(lower, upper) };
        owed = target - x;
        out[t] = x;
        soc += sign * x;
    }
    (out, owed)
}

/// Places what the forward pass still owes by walking back from the window
/// end, moving each slot only as far as every later SOC allows.
fn settle_back(sign: f64, class: &StorageClass, unit: &StorageUnit, flows: &mut [f64], mut owed: f64) -> f64 {
    let (lo, hi) = (-class.charge_flow_limit(), class.discharge_flow_limit());
    let range = unit.window.range();
    for t in range.clone().rev() {
        if owed.abs() <= SOC_TOL {
            break;
        }
        let mut soc = unit.soc_initial;
        let (mut s_min, mut s_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in range.clone() {
            soc += sign * flows[s];
            if s >= t {
                s_min = s_min.min(soc);
                s_max = s_max.max(soc);
            }
        }
        // shifting flow t by d moves every later SOC by sign * d
        let (a, b) = ((class.soc_min - s_min) * sign, (class.soc_max - s_max) * sign);
        let (d_lo, d_hi) = if a <= b { (a, b) } else { (b, a) };
        let d_lo = d_lo.max(lo - flows[t]).min(0.0);
        let d_hi = d_hi.min(hi - flows[t]).max(0.0);
        let d = owed.clamp(d_lo, d_hi);
        flows[t] += d;
        owed -= d;
    }
    owed
}

/// Pushes `owed` into the window from its last slot backwards, first up to
/// the flow rating, then all of the rest into the last slot.
fn force(class: &StorageClass, unit: &StorageUnit, flows: &mut [f64], mut owed: f64) {
    let (lo, hi) = (-class.charge_flow_limit(), class.discharge_flow_limit());
    for t in unit.window.range().rev() {
        if owed == 0.0 {
            return;
        }
        let x = (flows[t] + owed).clamp(lo, hi);
        owed -= x - flows[t];
        flows[t] = x;
    }
    if owed != 0.0 {
        flows[unit.window.range().end - 1] += owed;
    }
}

fn stretch(sign: f64, class: &StorageClass, unit: &StorageUnit, flows: &[f64]) -> f64 {
    let (lo, hi) = (-class.charge_flow_limit(), class.discharge_flow_limit());
    let mut soc = unit.soc_initial;
    let mut worst: f64 = 0.0;
    for t in unit.window.range() {
        soc += sign * flows[t];
        worst = worst.max(class.soc_min - soc).max(soc - class.soc_max);
        worst = worst.max(lo - flows[t]).max(flows[t] - hi);
    }
    worst
}

/// Clips each device's flows so its SOC stays within bounds, carrying the
/// clipped amount forward to the next slots that have room, earliest first.
///
/// Devices that already respect their SOC bounds are left untouched, so a
/// SOC-feasible schedule comes back unchanged with an empty log.
pub fn adjust_soc(config: &SystemConfig, schedule: &Schedule) -> (Schedule, AdjustmentLog) {
    let sign = if config.soc_sign_literal { 1.0 } else { -1.0 };
    let mut out = schedule.clone();
    let mut log = AdjustmentLog::default();
    for kind in [DeviceKind::Ev, DeviceKind::Tes] {
        let class = *config.class(kind);
        for (k, unit) in config.units(kind).iter().enumerate() {
            let flows = &schedule.flows(kind)[k];
            if soc_ok(sign, &class, unit, flows) {
                continue;
            }
            let (mut fixed, owed) = repair(sign, &class, unit, flows);
            let owed = if owed.abs() > SOC_TOL { settle_back(sign, &class, unit, &mut fixed, owed) } else { owed };
            if owed.abs() > SOC_TOL {
                force(&class, unit, &mut fixed, owed);
                let amount = owed;
                let stretch = stretch(sign, &class, unit, &fixed);
                log::warn!("{kind:?} {} could not absorb {amount:.3} kWh within its bounds", k + 1);
                log.residuals.push(Residual { kind, device: k, amount, stretch });
            }
            for t in unit.window.range() {
                if fixed[t] != flows[t] {
                    log.changes.push(Adjustment { kind, device: k, slot: t, before: flows[t], after: fixed[t] });
                }
            }
            out.flows_mut(kind)[k] = fixed;
        }
    }
    (out, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{penalty_by_slot, ServiceWindow};

    fn one_ev(window: ServiceWindow, soc0: f64) -> SystemConfig {
        let mut c = SystemConfig::default();
        c.evs = vec![StorageUnit { window, soc_initial: soc0 }];
        c.tess.clear();
        c
    }

    #[test]
    fn feasible_schedule_is_untouched() {
        let c = SystemConfig::default();
        let s = Schedule::zeros(&c);
        let (a, log) = adjust_soc(&c, &s);
        assert_eq!(a, s);
        assert!(log.is_empty());
    }

    #[test]
    fn discharge_at_minimum_is_clipped() {
        let c = one_ev(ServiceWindow::new(1, 3), 40.0);
        let mut s = Schedule::zeros(&c);
        s.ev_flow[0][0] = 10.0;
        s.ev_flow[0][1] = -10.0;
        let (a, log) = adjust_soc(&c, &s);
        assert_eq!(a.ev_flow[0][0], 0.0);
        assert_eq!(a.ev_flow[0][..3].iter().sum::<f64>(), 0.0);
        assert!(log.is_clean());
        assert!(penalty_by_slot(&c, &a).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn residual_moves_to_next_slot_with_room() {
        let c = one_ev(ServiceWindow::new(1, 4), 40.0);
        let mut s = Schedule::zeros(&c);
        // discharge 30 first, then charge 30 and hold
        s.ev_flow[0][0] = 30.0;
        s.ev_flow[0][2] = -30.0;
        let (a, log) = adjust_soc(&c, &s);
        assert_eq!(&a.ev_flow[0][..4], &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(log.changes.len(), 2);
    }

    #[test]
    fn unplaceable_residual_is_flagged() {
        let c = one_ev(ServiceWindow::new(1, 2), 40.0);
        let mut s = Schedule::zeros(&c);
        // net-flow violating input: nothing can discharge from the minimum
        s.ev_flow[0][0] = 20.0;
        s.ev_flow[0][1] = 20.0;
        let (a, log) = adjust_soc(&c, &s);
        assert_eq!(log.residuals.len(), 1);
        assert!((log.residuals[0].amount - 40.0).abs() < 1e-12);
        assert!(log.residuals[0].stretch > 0.0);
        assert!((a.ev_flow[0][0] + a.ev_flow[0][1] - 40.0).abs() < 1e-12);
    }
}
