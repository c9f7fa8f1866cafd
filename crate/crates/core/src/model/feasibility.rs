use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::{DeviceKind, SystemConfig};
use super::cost::soc_trajectory;
use super::profile::DayProfile;
use super::schedule::Schedule;
use crate::error::ModelError;

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    ElectricityBalance,
    HeatBalance,
    GridImport,
    GasImport,
    ChpInput,
    BoilerInput,
    /// Dispatch factors negative or summing above one.
    DispatchFactor,
    /// Efficiency-weighted storage flow above its rating.
    StorageFlow,
    /// Non-zero storage flow outside the service window.
    OutsideWindow,
    /// Window net flow differs from zero.
    NetFlow,
    SocBound,
    NonFinite,
}

impl ViolationKind {
    pub fn is_balance(self) -> bool {
        matches!(self, Self::ElectricityBalance | Self::HeatBalance)
    }

    pub fn is_soc(self) -> bool {
        self == Self::SocBound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Zero-based slot.
    pub slot: usize,
    /// Device index within its class, if the constraint belongs to one.
    pub device: Option<(DeviceKind, usize)>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at slot {}", self.kind, self.slot + 1)?;
        if let Some((kind, k)) = self.device {
            write!(f, " on {kind} {}", k + 1)?;
        }
        write!(f, " by {:.6}", self.magnitude)
    }
}

struct Collector {
    tol: f64,
    out: Vec<Violation>,
}

impl Collector {
    /// Records `excess` when it exceeds `tol * max(1, scale)`.
    fn check(&mut self, kind: ViolationKind, slot: usize, device: Option<(DeviceKind, usize)>, excess: f64, scale: f64) {
        if excess.is_nan() {
            self.out.push(Violation { kind: ViolationKind::NonFinite, slot, device, magnitude: f64::INFINITY });
        } else if excess > self.tol * scale.abs().max(1.0) {
            self.out.push(Violation { kind, slot, device, magnitude: excess });
        }
    }

    fn upper(&mut self, kind: ViolationKind, slot: usize, device: Option<(DeviceKind, usize)>, value: f64, max: f64) {
        self.check(kind, slot, device, value - max, max);
        self.check(kind, slot, device, -value, max);
    }
}

/// Every constraint violation of `schedule` against `forecast`.
///
/// Balances are checked with tolerance `tol * max(1, |L|)`, bounds with
/// `tol * max(1, |bound|)`.
pub fn check_feasibility(
    config: &SystemConfig,
    forecast: &DayProfile,
    schedule: &Schedule,
    tol: f64,
) -> Result<Vec<Violation>, ModelError> {
    schedule.check_dimensions(config)?;
    if forecast.slots() != config.slots {
        return Err(ModelError::DimensionMismatch {
            what: "forecast".into(),
            expected: config.slots,
            found: forecast.slots(),
        });
    }
    let mut c = Collector { tol, out: Vec::new() };

    for t in 0..config.slots {
        let sg = schedule.gas_import[t];
        let (vc, vb) = (schedule.chp_share[t], schedule.boiler_share[t]);
        c.upper(ViolationKind::GridImport, t, None, schedule.grid_import[t], config.grid_max);
        c.upper(ViolationKind::GasImport, t, None, sg, config.gas_max);
        c.check(ViolationKind::DispatchFactor, t, None, -vc, 1.0);
        c.check(ViolationKind::DispatchFactor, t, None, -vb, 1.0);
        c.check(ViolationKind::DispatchFactor, t, None, vc + vb - 1.0, 1.0);
        c.check(ViolationKind::ChpInput, t, None, vc * sg - config.chp_max, config.chp_max);
        c.check(ViolationKind::BoilerInput, t, None, vb * sg - config.boiler_max, config.boiler_max);

        let elec_supply = config.eta_transformer * schedule.grid_import[t]
            + config.eta_chp_elec * schedule.chp_gas(t)
            + config.clip_wind(forecast.wind[t])
            + config.clip_pv(forecast.pv[t])
            + schedule.ev_total(t);
        let gap = (elec_supply - forecast.elec_load[t]).abs();
        c.check(ViolationKind::ElectricityBalance, t, None, gap, forecast.elec_load[t]);

        let heat_supply = config.eta_chp_heat * schedule.chp_gas(t)
            + config.eta_boiler * schedule.boiler_gas(t)
            + schedule.tes_total(t);
        let gap = (heat_supply - forecast.heat_load[t]).abs();
        c.check(ViolationKind::HeatBalance, t, None, gap, forecast.heat_load[t]);
    }

    for kind in [DeviceKind::Ev, DeviceKind::Tes] {
        let class = config.class(kind);
        for (k, (unit, flows)) in config.units(kind).iter().zip(schedule.flows(kind)).enumerate() {
            let dev = Some((kind, k));
            for (t, &s) in flows.iter().enumerate() {
                if !unit.window.contains(t) {
                    c.check(ViolationKind::OutsideWindow, t, dev, s.abs(), 0.0);
                    continue;
                }
                let b = class.boundary_flow(s);
                c.check(ViolationKind::StorageFlow, t, dev, b - class.discharge_max, class.discharge_max);
                c.check(ViolationKind::StorageFlow, t, dev, -b - class.charge_max, class.charge_max);
            }
            let net: f64 = unit.window.range().map(|t| flows[t]).sum();
            c.check(ViolationKind::NetFlow, unit.window.t_out - 1, dev, net.abs(), 0.0);

            let soc = soc_trajectory(config, flows, unit.window, unit.soc_initial);
            for (t, s) in unit.window.range().zip(soc) {
                c.check(ViolationKind::SocBound, t, dev, class.soc_min - s, class.soc_min);
                c.check(ViolationKind::SocBound, t, dev, s - class.soc_max, class.soc_max);
            }
        }
    }
    Ok(c.out)
}
