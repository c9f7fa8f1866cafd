use serde::{Deserialize, Serialize};

use super::config::{DeviceKind, SystemConfig};
use crate::error::ModelError;

/// Day-ahead decisions for every slot.
///
/// Storage flows are signed: positive discharges into the system, negative
/// charges from it. Charge/discharge indicators are derived from the sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub grid_import: Vec<f64>,
    pub gas_import: Vec<f64>,
    /// `ev_flow[k][t]`
    pub ev_flow: Vec<Vec<f64>>,
    /// `tes_flow[k][t]`
    pub tes_flow: Vec<Vec<f64>>,
    /// Share of the gas import routed to the CHP.
    pub chp_share: Vec<f64>,
    /// Share of the gas import routed to the boiler.
    pub boiler_share: Vec<f64>,
}

impl Schedule {
    pub fn zeros(config: &SystemConfig) -> Self {
        let t = config.slots;
        Self {
            grid_import: vec![0.0; t],
            gas_import: vec![0.0; t],
            ev_flow: vec![vec![0.0; t]; config.ev_count()],
            tes_flow: vec![vec![0.0; t]; config.tes_count()],
            chp_share: vec![0.0; t],
            boiler_share: vec![0.0; t],
        }
    }

    pub fn slots(&self) -> usize {
        self.grid_import.len()
    }

    pub fn chp_gas(&self, t: usize) -> f64 {
        self.chp_share[t] * self.gas_import[t]
    }

    pub fn boiler_gas(&self, t: usize) -> f64 {
        self.boiler_share[t] * self.gas_import[t]
    }

    pub fn flows(&self, kind: DeviceKind) -> &[Vec<f64>] {
        match kind {
            DeviceKind::Ev => &self.ev_flow,
            DeviceKind::Tes => &self.tes_flow,
        }
    }

    pub fn flows_mut(&mut self, kind: DeviceKind) -> &mut Vec<Vec<f64>> {
        match kind {
            DeviceKind::Ev => &mut self.ev_flow,
            DeviceKind::Tes => &mut self.tes_flow,
        }
    }

    pub fn ev_total(&self, t: usize) -> f64 {
        self.ev_flow.iter().map(|f| f[t]).sum()
    }

    pub fn tes_total(&self, t: usize) -> f64 {
        self.tes_flow.iter().map(|f| f[t]).sum()
    }

    /// Checks that every series has the shape implied by `config`.
    pub fn check_dimensions(&self, config: &SystemConfig) -> Result<(), ModelError> {
        let t = config.slots;
        let mismatch = |what: &str, expected: usize, found: usize| {
            Err(ModelError::DimensionMismatch {
                what: what.to_string(),
                expected,
                found,
            })
        };
        for (what, s) in [
            ("grid import", &self.grid_import),
            ("gas import", &self.gas_import),
            ("CHP share", &self.chp_share),
            ("boiler share", &self.boiler_share),
        ] {
            if s.len() != t {
                return mismatch(what, t, s.len());
            }
        }
        for kind in [DeviceKind::Ev, DeviceKind::Tes] {
            let flows = self.flows(kind);
            if flows.len() != config.units(kind).len() {
                return mismatch(&format!("{kind} count"), config.units(kind).len(), flows.len());
            }
            if let Some(f) = flows.iter().find(|f| f.len() != t) {
                return mismatch(&format!("{kind} flow series"), t, f.len());
            }
        }
        Ok(())
    }
}
