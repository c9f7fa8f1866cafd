//! Maps raw network outputs onto schedules that satisfy every flow, window
//! and net-flow constraint by construction.
//!
//! Output layout is channel-major: `raw[c * T + t]` with channels grid,
//! CHP gas, boiler gas, then one per EV and one per TES.

use crate::error::ModelError;
use crate::model::{DeviceKind, ServiceWindow, StorageClass, SystemConfig, Schedule};

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Intermediate values of one storage channel.
#[derive(Debug, Clone)]
struct StorageTrace {
    y: Vec<f64>,
    g: Vec<f64>,
    scale: f64,
    /// Slot that set the rescale ratio when `scale < 1`.
    arg: usize,
    ratio: f64,
}

/// Everything needed to push gradients back through the pipeline.
#[derive(Debug, Clone)]
pub struct EnforceTrace {
    sig: [Vec<f64>; 3],
    /// Unscaled converter inputs and the common gas scale.
    chp_raw: Vec<f64>,
    boiler_raw: Vec<f64>,
    gas_scale: Vec<f64>,
    storage: Vec<StorageTrace>,
    /// Converter inputs after scaling.
    pub chp: Vec<f64>,
    pub boiler: Vec<f64>,
}

/// Gradient of a scalar with respect to the schedule quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleGrad {
    pub grid: Vec<f64>,
    pub chp: Vec<f64>,
    pub boiler: Vec<f64>,
    /// EVs then TESs, one series per device.
    pub storage: Vec<Vec<f64>>,
}

impl ScheduleGrad {
    pub fn zeros(config: &SystemConfig) -> Self {
        let t = config.slots;
        Self {
            grid: vec![0.0; t],
            chp: vec![0.0; t],
            boiler: vec![0.0; t],
            storage: vec![vec![0.0; t]; config.ev_count() + config.tes_count()],
        }
    }
}

fn devices(config: &SystemConfig) -> impl Iterator<Item = (DeviceKind, usize, &StorageClass, ServiceWindow)> {
    [DeviceKind::Ev, DeviceKind::Tes].into_iter().flat_map(move |kind| {
        let class = config.class(kind);
        config.units(kind).iter().enumerate().map(move |(k, u)| (kind, k, class, u.window))
    })
}

fn storage_forward(raw: &[f64], class: &StorageClass, window: ServiceWindow) -> (Vec<f64>, StorageTrace) {
    let hi = class.discharge_flow_limit();
    let lo = class.charge_flow_limit();
    let n = raw.len();
    let y: Vec<f64> = raw.iter().map(|r| r.tanh()).collect();
    let mut g = vec![0.0; n];
    let range = window.range();
    if !range.is_empty() {
        let f = |t: usize| if y[t] >= 0.0 { y[t] * hi } else { y[t] * lo };
        let mean = range.clone().map(f).sum::<f64>() / range.len() as f64;
        for t in range.clone() {
            g[t] = f(t) - mean;
        }
    }
    let mut ratio = 0.0;
    let mut arg = 0;
    for t in range.clone() {
        let r = if g[t] > 0.0 {
            g[t] / hi
        } else if g[t] < 0.0 {
            -g[t] / lo
        } else {
            0.0
        };
        if r > ratio {
            ratio = r;
            arg = t;
        }
    }
    let scale = if ratio > 1.0 { 1.0 / ratio } else { 1.0 };
    let flows = g.iter().map(|v| (v * scale).clamp(-lo, hi)).collect();
    (flows, StorageTrace { y, g, scale, arg, ratio })
}

/// Builds the schedule and the trace for [`enforce_backward`].
pub fn enforce_with_trace(config: &SystemConfig, raw: &[f64]) -> Result<(Schedule, EnforceTrace), ModelError> {
    let t_len = config.slots;
    let channels = 3 + config.ev_count() + config.tes_count();
    if raw.len() != channels * t_len {
        return Err(ModelError::DimensionMismatch {
            what: "network output".into(),
            expected: channels * t_len,
            found: raw.len(),
        });
    }
    let chan = |c: usize| &raw[c * t_len..(c + 1) * t_len];
    let sig: [Vec<f64>; 3] = [0, 1, 2].map(|c| chan(c).iter().map(|&r| sigmoid(r)).collect());

    let mut s = Schedule::zeros(config);
    let mut chp_raw = vec![0.0; t_len];
    let mut boiler_raw = vec![0.0; t_len];
    let mut gas_scale = vec![1.0; t_len];
    let mut chp = vec![0.0; t_len];
    let mut boiler = vec![0.0; t_len];
    for t in 0..t_len {
        s.grid_import[t] = config.grid_max * sig[0][t];
        chp_raw[t] = config.chp_max * sig[1][t];
        boiler_raw[t] = config.boiler_max * sig[2][t];
        let total = chp_raw[t] + boiler_raw[t];
        if total > config.gas_max {
            gas_scale[t] = config.gas_max / total;
        }
        chp[t] = chp_raw[t] * gas_scale[t];
        boiler[t] = boiler_raw[t] * gas_scale[t];
        let gas = chp[t] + boiler[t];
        s.gas_import[t] = gas;
        if gas > 0.0 {
            s.chp_share[t] = chp[t] / gas;
            s.boiler_share[t] = boiler[t] / gas;
        }
    }

    let mut storage = Vec::new();
    for (c, (kind, k, class, window)) in devices(config).enumerate() {
        let (flows, tr) = storage_forward(chan(3 + c), class, window);
        s.flows_mut(kind)[k] = flows;
        storage.push(tr);
    }
    Ok((s, EnforceTrace { sig, chp_raw, boiler_raw, gas_scale, storage, chp, boiler }))
}

/// Squash, scale, window-mask, mean-subtract and rescale `raw` into a schedule.
pub fn enforce_constraints(config: &SystemConfig, raw: &[f64]) -> Result<Schedule, ModelError> {
    enforce_with_trace(config, raw).map(|(s, _)| s)
}

/// `d loss / d raw` from the gradient with respect to the schedule.
///
/// The final clamp of storage flows only absorbs rounding and is treated as
/// the identity.
pub fn enforce_backward(config: &SystemConfig, trace: &EnforceTrace, grad: &ScheduleGrad) -> Vec<f64> {
    let t_len = config.slots;
    let mut out = Vec::with_capacity((3 + grad.storage.len()) * t_len);

    out.extend((0..t_len).map(|t| {
        let s = trace.sig[0][t];
        grad.grid[t] * config.grid_max * s * (1.0 - s)
    }));
    let mut d_chp_raw = vec![0.0; t_len];
    let mut d_boiler_raw = vec![0.0; t_len];
    for t in 0..t_len {
        let (a, b) = (grad.chp[t], grad.boiler[t]);
        let k = trace.gas_scale[t];
        if k < 1.0 {
            let total = trace.chp_raw[t] + trace.boiler_raw[t];
            let shared = -(a * trace.chp_raw[t] + b * trace.boiler_raw[t]) * config.gas_max / (total * total);
            d_chp_raw[t] = a * k + shared;
            d_boiler_raw[t] = b * k + shared;
        } else {
            d_chp_raw[t] = a;
            d_boiler_raw[t] = b;
        }
    }
    out.extend((0..t_len).map(|t| {
        let s = trace.sig[1][t];
        d_chp_raw[t] * config.chp_max * s * (1.0 - s)
    }));
    out.extend((0..t_len).map(|t| {
        let s = trace.sig[2][t];
        d_boiler_raw[t] * config.boiler_max * s * (1.0 - s)
    }));

    for ((_, _, class, window), (tr, dh)) in devices(config).zip(trace.storage.iter().zip(&grad.storage)) {
        let hi = class.discharge_flow_limit();
        let lo = class.charge_flow_limit();
        let range = window.range();
        let mut draw = vec![0.0; t_len];
        if !range.is_empty() {
            // uniform rescale h = s g with s = 1 / max ratio
            let mut dg: Vec<f64> = dh.iter().map(|d| d * tr.scale).collect();
            if tr.scale < 1.0 {
                let t = tr.arg;
                let bound = if tr.g[t] > 0.0 { hi } else { -lo };
                let dot: f64 = range.clone().map(|j| tr.g[j] * dh[j]).sum();
                dg[t] -= dot / (bound * tr.ratio * tr.ratio);
            }
            // mean subtraction
            let mean = range.clone().map(|j| dg[j]).sum::<f64>() / range.len() as f64;
            for t in range {
                let df = dg[t] - mean;
                let y = tr.y[t];
                let dy = df * if y >= 0.0 { hi } else { lo };
                draw[t] = dy * (1.0 - y * y);
            }
        }
        out.extend(draw);
    }
    out
}
