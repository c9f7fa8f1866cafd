//! Expected settlement cost plus SOC penalty, and its gradient.

use super::enforce::{enforce_backward, enforce_with_trace, EnforceTrace, ScheduleGrad};
use super::network::{backward, forward_trace, NetworkParams};
use crate::error::ModelError;
use crate::model::{apply_errors, soc_trajectory, DayProfile, DeviceKind, ErrorSample, PriceBook, Schedule, SystemConfig};

/// Day cost `sum_t C_All` of `schedule` under `actual`; accumulates
/// `weight * d cost / d schedule` into `grad` when given.
///
/// `chp` and `boiler` are the converter inputs `v * S_G`.
pub(crate) fn day_cost(
    config: &SystemConfig,
    prices: &PriceBook,
    schedule: &Schedule,
    chp: &[f64],
    boiler: &[f64],
    actual: &DayProfile,
    weight: f64,
    grad: Option<&mut ScheduleGrad>,
) -> f64 {
    let mut total = 0.0;
    let mut grad = grad;
    let n_ev = config.ev_count();
    let (eta_tf, eta_b) = (config.eta_transformer, config.eta_boiler);
    for t in 0..config.slots {
        let wind = config.clip_wind(actual.wind[t]);
        let pv = config.clip_pv(actual.pv[t]);
        let ev_net = schedule.ev_total(t);
        let tes_net = schedule.tes_total(t);
        let ev_abs: f64 = schedule.ev_flow.iter().map(|f| f[t].abs()).sum();
        let tes_abs: f64 = schedule.tes_flow.iter().map(|f| f[t].abs()).sum();
        let gas = chp[t] + boiler[t];

        let sch = prices.elec_day_ahead[t] * schedule.grid_import[t] + prices.gas_day_ahead[t] * gas
            - prices.reward_tes * tes_abs
            - prices.reward_ev * ev_abs
            - prices.reward_pv * pv
            - prices.reward_wind * wind;
        let d_e = (actual.elec_load[t] - eta_tf * schedule.grid_import[t] - config.eta_chp_elec * chp[t] - wind - pv - ev_net)
            / eta_tf;
        let d_g = (actual.heat_load[t] - config.eta_chp_heat * chp[t] - eta_b * boiler[t] - tes_net) / eta_b;
        let p_e = if d_e >= 0.0 { prices.elec_plus } else { prices.elec_day_ahead[t] - prices.elec_minus };
        let p_g = if d_g >= 0.0 { prices.gas_plus } else { prices.gas_day_ahead[t] - prices.gas_minus };
        total += sch + p_e * d_e + p_g * d_g;

        if let Some(g) = grad.as_deref_mut() {
            g.grid[t] += weight * (prices.elec_day_ahead[t] - p_e);
            g.chp[t] += weight
                * (prices.gas_day_ahead[t] - p_e * config.eta_chp_elec / eta_tf - p_g * config.eta_chp_heat / eta_b);
            g.boiler[t] += weight * (prices.gas_day_ahead[t] - p_g);
            for (d, s) in g.storage.iter_mut().enumerate() {
                let (flow, reward, coupling) = if d < n_ev {
                    (schedule.ev_flow[d][t], prices.reward_ev, p_e / eta_tf)
                } else {
                    (schedule.tes_flow[d - n_ev][t], prices.reward_tes, p_g / eta_b)
                };
                let sign = if flow > 0.0 {
                    1.0
                } else if flow < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                s[t] += weight * (-reward * sign - coupling);
            }
        }
    }
    total
}

/// Total SOC penalty over devices and slots; accumulates `weight * d / d flow`.
pub(crate) fn penalty(config: &SystemConfig, schedule: &Schedule, weight: f64, grad: Option<&mut ScheduleGrad>) -> f64 {
    let sign = if config.soc_sign_literal { 1.0 } else { -1.0 };
    let mut total = 0.0;
    let mut grad = grad;
    let mut d = 0;
    for kind in [DeviceKind::Ev, DeviceKind::Tes] {
        let class = config.class(kind);
        for (unit, flows) in config.units(kind).iter().zip(schedule.flows(kind)) {
            let soc = soc_trajectory(config, flows, unit.window, unit.soc_initial);
            let mut d_soc = vec![0.0; soc.len()];
            for (i, &s) in soc.iter().enumerate() {
                let under = class.soc_min - s;
                let over = s - class.soc_max;
                // first argument wins ties
                if under >= over && under >= 0.0 {
                    total += under;
                    d_soc[i] = -1.0;
                } else if over >= 0.0 {
                    total += over;
                    d_soc[i] = 1.0;
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                // soc[i] = soc0 + sign * sum_{j <= i} flow[j]
                let mut acc = 0.0;
                let start = unit.window.t_in - 1;
                for i in (0..soc.len()).rev() {
                    acc += d_soc[i];
                    g.storage[d][start + i] += weight * sign * acc;
                }
            }
            d += 1;
        }
    }
    total
}

fn check_batch(forecasts: &[DayProfile], errors: &[ErrorSample]) -> Result<(), ModelError> {
    if forecasts.is_empty() || errors.is_empty() {
        return Err(ModelError::InvalidProfile("loss needs at least one forecast and one error sample".into()));
    }
    Ok(())
}

struct Sample {
    trace: super::network::ForwardTrace,
    enforce: EnforceTrace,
    schedule: Schedule,
}

fn run_sample(params: &NetworkParams, config: &SystemConfig, forecast: &DayProfile) -> Result<Sample, ModelError> {
    let trace = forward_trace(params, &forecast.flatten())?;
    let (schedule, enforce) = enforce_with_trace(config, &trace.output)?;
    Ok(Sample { trace, enforce, schedule })
}

fn evaluate(
    params: &NetworkParams,
    config: &SystemConfig,
    prices: &PriceBook,
    forecasts: &[DayProfile],
    errors: &[ErrorSample],
    lambda: f64,
    mut grad: Option<&mut NetworkParams>,
) -> Result<f64, ModelError> {
    check_batch(forecasts, errors)?;
    let pairs = (forecasts.len() * errors.len()) as f64;
    let mut loss = 0.0;
    for forecast in forecasts {
        let sample = run_sample(params, config, forecast)?;
        let mut sg = grad.as_ref().map(|_| ScheduleGrad::zeros(config));
        for err in errors {
            let actual = apply_errors(forecast, err)?;
            loss += day_cost(
                config,
                prices,
                &sample.schedule,
                &sample.enforce.chp,
                &sample.enforce.boiler,
                &actual,
                1.0 / pairs,
                sg.as_mut(),
            ) / pairs;
        }
        let w = lambda / forecasts.len() as f64;
        loss += w * penalty(config, &sample.schedule, w, sg.as_mut());
        if let (Some(g), Some(sg)) = (grad.as_deref_mut(), sg) {
            let d_raw = enforce_backward(config, &sample.enforce, &sg);
            backward(params, &sample.trace, &d_raw, g);
        }
    }
    Ok(loss)
}

/// Mean over (forecast, error) pairs of the settled day cost plus
/// `lambda` times the SOC penalty of the unadjusted schedule.
pub fn loss(
    params: &NetworkParams,
    config: &SystemConfig,
    prices: &PriceBook,
    forecasts: &[DayProfile],
    errors: &[ErrorSample],
    lambda: f64,
) -> Result<f64, ModelError> {
    evaluate(params, config, prices, forecasts, errors, lambda, None)
}

/// Loss and its gradient with respect to every network parameter.
pub fn gradient(
    params: &NetworkParams,
    config: &SystemConfig,
    prices: &PriceBook,
    forecasts: &[DayProfile],
    errors: &[ErrorSample],
    lambda: f64,
) -> Result<(f64, NetworkParams), ModelError> {
    let mut g = params.zeros_like();
    let l = evaluate(params, config, prices, forecasts, errors, lambda, Some(&mut g))?;
    Ok((l, g))
}
