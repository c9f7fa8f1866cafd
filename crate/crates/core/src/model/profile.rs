use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// The four exogenous series of one day, kWh per slot.
///
/// The same type carries day-ahead forecasts and realised actuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayProfile {
    pub elec_load: Vec<f64>,
    pub heat_load: Vec<f64>,
    pub wind: Vec<f64>,
    pub pv: Vec<f64>,
}

/// Relative forecast errors for one day: `actual = (1 + delta) * forecast`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub elec: Vec<f64>,
    pub heat: Vec<f64>,
    pub wind: Vec<f64>,
    pub pv: Vec<f64>,
}

impl DayProfile {
    pub fn zeros(slots: usize) -> Self {
        Self {
            elec_load: vec![0.0; slots],
            heat_load: vec![0.0; slots],
            wind: vec![0.0; slots],
            pv: vec![0.0; slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.elec_load.len()
    }

    pub fn series(&self) -> [&[f64]; 4] {
        [&self.elec_load, &self.heat_load, &self.wind, &self.pv]
    }

    pub fn series_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.elec_load, &mut self.heat_load, &mut self.wind, &mut self.pv]
    }

    /// Builds a profile from four series in the order load E, load H, wind, PV.
    pub fn from_series(series: [Vec<f64>; 4]) -> Self {
        let [elec_load, heat_load, wind, pv] = series;
        Self {
            elec_load,
            heat_load,
            wind,
            pv,
        }
    }

    /// Concatenation of the four series, the network input layout.
    pub fn flatten(&self) -> Vec<f64> {
        self.series().concat()
    }

    pub fn validate(&self, slots: usize) -> Result<(), ModelError> {
        for (name, s) in ["L_E", "L_H", "S_W", "S_PV"].iter().zip(self.series()) {
            if s.len() != slots {
                return Err(ModelError::DimensionMismatch {
                    what: format!("profile series {name}"),
                    expected: slots,
                    found: s.len(),
                });
            }
            if let Some(v) = s.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return Err(ModelError::InvalidProfile(format!("{name} contains {v}")));
            }
        }
        Ok(())
    }
}

impl ErrorSample {
    pub fn zeros(slots: usize) -> Self {
        Self {
            elec: vec![0.0; slots],
            heat: vec![0.0; slots],
            wind: vec![0.0; slots],
            pv: vec![0.0; slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.elec.len()
    }

    pub fn series(&self) -> [&[f64]; 4] {
        [&self.elec, &self.heat, &self.wind, &self.pv]
    }

    pub fn from_series(series: [Vec<f64>; 4]) -> Self {
        let [elec, heat, wind, pv] = series;
        Self { elec, heat, wind, pv }
    }

    pub fn max_abs(&self) -> f64 {
        self.series()
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0_f64, |m, d| m.max(d.abs()))
    }
}

/// Realised values for a forecast under the given relative errors, clipped at zero.
///
/// This is the single routine used both for settlement data and for the
/// trainer's augmented actuals.
pub fn apply_errors(forecast: &DayProfile, err: &ErrorSample) -> Result<DayProfile, ModelError> {
    if err.slots() != forecast.slots() {
        return Err(ModelError::DimensionMismatch {
            what: "error sample".into(),
            expected: forecast.slots(),
            found: err.slots(),
        });
    }
    let mut out = forecast.clone();
    for (dst, delta) in out.series_mut().into_iter().zip(err.series()) {
        if delta.len() != dst.len() {
            return Err(ModelError::DimensionMismatch {
                what: "error series".into(),
                expected: dst.len(),
                found: delta.len(),
            });
        }
        for (v, d) in dst.iter_mut().zip(delta) {
            *v = ((1.0 + d) * *v).max(0.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(value: f64) -> DayProfile {
        DayProfile::from_series([vec![value; 3], vec![value; 3], vec![value; 3], vec![value; 3]])
    }

    #[test]
    fn zero_error_is_identity() {
        let f = flat(100.0);
        assert_eq!(apply_errors(&f, &ErrorSample::zeros(3)).unwrap(), f);
    }

    #[test]
    fn relative_error_scales_values() {
        let f = flat(100.0);
        let mut e = ErrorSample::zeros(3);
        e.elec[0] = 0.1;
        e.heat[1] = -0.45;
        let a = apply_errors(&f, &e).unwrap();
        assert!((a.elec_load[0] - 110.0).abs() < 1e-12);
        assert!((a.heat_load[1] - 55.0).abs() < 1e-12);
        assert_eq!(a.wind[2], 100.0);
    }

    #[test]
    fn actuals_never_go_negative() {
        let f = flat(10.0);
        let mut e = ErrorSample::zeros(3);
        e.pv[0] = -1.5;
        assert_eq!(apply_errors(&f, &e).unwrap().pv[0], 0.0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        assert!(apply_errors(&flat(1.0), &ErrorSample::zeros(4)).is_err());
    }

    #[test]
    fn flatten_orders_series() {
        let p = DayProfile::from_series([vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        assert_eq!(p.flatten(), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
