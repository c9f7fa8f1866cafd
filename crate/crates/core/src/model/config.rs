//! Physical parameters of the energy system.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::ModelError;

/// Inclusive service window `[t_in, t_out]` using 1-based slot numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceWindow {
    pub t_in: usize,
    pub t_out: usize,
}

impl ServiceWindow {
    pub fn new(t_in: usize, t_out: usize) -> Self {
        Self { t_in, t_out }
    }

    /// Zero-based slot indices covered by the window.
    pub fn range(&self) -> Range<usize> {
        (self.t_in - 1)..self.t_out
    }

    pub fn contains(&self, slot: usize) -> bool {
        slot + 1 >= self.t_in && slot < self.t_out
    }

    pub fn len(&self) -> usize {
        self.t_out + 1 - self.t_in
    }

    pub fn is_empty(&self) -> bool {
        self.t_out < self.t_in
    }
}

/// Ratings shared by every device of one storage class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageClass {
    pub eta_charge: f64,
    pub eta_discharge: f64,
    /// kWh per slot, measured at the system boundary.
    pub charge_max: f64,
    pub discharge_max: f64,
    pub soc_min: f64,
    pub soc_max: f64,
}

impl StorageClass {
    /// Largest charging flow magnitude once efficiency is accounted for.
    pub fn charge_flow_limit(&self) -> f64 {
        self.eta_charge * self.charge_max
    }

    /// Largest discharging flow once efficiency is accounted for.
    pub fn discharge_flow_limit(&self) -> f64 {
        self.eta_discharge * self.discharge_max
    }

    /// Flow as seen by the system: `S * (I_ch / eta_ch + I_dch / eta_dch)`.
    pub fn boundary_flow(&self, flow: f64) -> f64 {
        if flow > 0.0 {
            flow / self.eta_discharge
        } else if flow < 0.0 {
            flow / self.eta_charge
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageUnit {
    pub window: ServiceWindow,
    pub soc_initial: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeviceKind {
    Ev,
    Tes,
}

impl std::fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeviceKind::Ev => write!(f, "EV"),
            DeviceKind::Tes => write!(f, "TES"),
        }
    }
}

/// Everything about the plant that does not change from day to day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Scheduling slots per day.
    pub slots: usize,
    pub wind_units: usize,
    pub pv_units: usize,

    pub eta_transformer: f64,
    pub eta_chp_elec: f64,
    pub eta_chp_heat: f64,
    pub eta_boiler: f64,

    pub grid_max: f64,
    pub gas_max: f64,
    pub wind_max: f64,
    pub pv_max: f64,
    pub chp_max: f64,
    pub boiler_max: f64,

    pub ev: StorageClass,
    pub tes: StorageClass,
    pub evs: Vec<StorageUnit>,
    pub tess: Vec<StorageUnit>,

    /// Use `SOC = SOC0 + sum(S)` instead of the physical `SOC0 - sum(S)`.
    #[serde(default)]
    pub soc_sign_literal: bool,
}

impl Default for SystemConfig {
    /// Case-study plant: 4 EVs and 2 TESs on hourly slots.
    fn default() -> Self {
        let evs = [(1, 8), (9, 17), (12, 20), (17, 24)]
            .into_iter()
            .map(|(a, b)| StorageUnit {
                window: ServiceWindow::new(a, b),
                soc_initial: 60.0,
            })
            .collect();
        let tess = (0..2)
            .map(|_| StorageUnit {
                window: ServiceWindow::new(1, 24),
                soc_initial: 120.0,
            })
            .collect();
        Self {
            slots: 24,
            wind_units: 1,
            pv_units: 1,
            eta_transformer: 0.98,
            eta_chp_elec: 0.404,
            eta_chp_heat: 0.566,
            eta_boiler: 0.9,
            grid_max: 1000.0,
            gas_max: 1200.0,
            wind_max: 200.0,
            pv_max: 200.0,
            chp_max: 300.0,
            boiler_max: 800.0,
            ev: StorageClass {
                eta_charge: 0.9,
                eta_discharge: 0.9,
                charge_max: 80.0,
                discharge_max: 80.0,
                soc_min: 40.0,
                soc_max: 80.0,
            },
            tes: StorageClass {
                eta_charge: 0.9,
                eta_discharge: 0.9,
                charge_max: 50.0,
                discharge_max: 50.0,
                soc_min: 40.0,
                soc_max: 200.0,
            },
            evs,
            tess,
            soc_sign_literal: false,
        }
    }
}

impl SystemConfig {
    /// The enlarged plant: 6 EVs and 4 TESs.
    pub fn large() -> Self {
        let mut cfg = Self::default();
        cfg.evs = [(1, 8), (6, 14), (9, 17), (12, 20), (15, 22), (17, 24)]
            .into_iter()
            .map(|(a, b)| StorageUnit {
                window: ServiceWindow::new(a, b),
                soc_initial: 60.0,
            })
            .collect();
        cfg.tess = [(1, 24), (1, 24), (1, 12), (13, 24)]
            .into_iter()
            .map(|(a, b)| StorageUnit {
                window: ServiceWindow::new(a, b),
                soc_initial: 120.0,
            })
            .collect();
        cfg
    }

    pub fn ev_count(&self) -> usize {
        self.evs.len()
    }

    pub fn tes_count(&self) -> usize {
        self.tess.len()
    }

    pub fn class(&self, kind: DeviceKind) -> &StorageClass {
        match kind {
            DeviceKind::Ev => &self.ev,
            DeviceKind::Tes => &self.tes,
        }
    }

    pub fn units(&self, kind: DeviceKind) -> &[StorageUnit] {
        match kind {
            DeviceKind::Ev => &self.evs,
            DeviceKind::Tes => &self.tess,
        }
    }

    /// Aggregate wind generation clipped to the installed capacity.
    pub fn clip_wind(&self, value: f64) -> f64 {
        value.clamp(0.0, self.wind_max * self.wind_units as f64)
    }

    pub fn clip_pv(&self, value: f64) -> f64 {
        value.clamp(0.0, self.pv_max * self.pv_units as f64)
    }

    /// Total gas that the converters can take in one slot.
    pub fn converter_gas_limit(&self) -> f64 {
        self.gas_max.min(self.chp_max + self.boiler_max)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.slots == 0 {
            return bad("slot count must be positive".into());
        }
        let effs = [
            ("eta_transformer", self.eta_transformer),
            ("eta_chp_elec", self.eta_chp_elec),
            ("eta_chp_heat", self.eta_chp_heat),
            ("eta_boiler", self.eta_boiler),
            ("ev.eta_charge", self.ev.eta_charge),
            ("ev.eta_discharge", self.ev.eta_discharge),
            ("tes.eta_charge", self.tes.eta_charge),
            ("tes.eta_discharge", self.tes.eta_discharge),
        ];
        for (name, eta) in effs {
            if !(eta > 0.0 && eta <= 1.0) {
                return bad(format!("{name} = {eta} is outside (0, 1]"));
            }
        }
        let limits = [
            ("grid_max", self.grid_max),
            ("gas_max", self.gas_max),
            ("wind_max", self.wind_max),
            ("pv_max", self.pv_max),
            ("chp_max", self.chp_max),
            ("boiler_max", self.boiler_max),
            ("ev.charge_max", self.ev.charge_max),
            ("ev.discharge_max", self.ev.discharge_max),
            ("tes.charge_max", self.tes.charge_max),
            ("tes.discharge_max", self.tes.discharge_max),
        ];
        for (name, lim) in limits {
            if !(lim >= 0.0 && lim.is_finite()) {
                return bad(format!("{name} = {lim} must be a finite non-negative number"));
            }
        }
        for kind in [DeviceKind::Ev, DeviceKind::Tes] {
            let class = self.class(kind);
            if !(class.soc_min <= class.soc_max) {
                return bad(format!("{kind} soc_min exceeds soc_max"));
            }
            for (k, unit) in self.units(kind).iter().enumerate() {
                let w = unit.window;
                if w.t_in < 1 || w.t_in > w.t_out || w.t_out > self.slots {
                    return bad(format!(
                        "{kind} {} window [{}, {}] is not within [1, {}]",
                        k + 1,
                        w.t_in,
                        w.t_out,
                        self.slots
                    ));
                }
                if unit.soc_initial < class.soc_min || unit.soc_initial > class.soc_max {
                    return bad(format!(
                        "{kind} {} initial SOC {} outside [{}, {}]",
                        k + 1,
                        unit.soc_initial,
                        class.soc_min,
                        class.soc_max
                    ));
                }
            }
        }
        Ok(())
    }
}
