use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Day-ahead and real-time tariffs plus the flat reward rates, all in £/kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceBook {
    pub elec_day_ahead: Vec<f64>,
    pub gas_day_ahead: Vec<f64>,
    /// Real-time purchase price for an electricity shortfall.
    pub elec_plus: f64,
    /// Real-time refund price for surplus electricity.
    pub elec_minus: f64,
    pub gas_plus: f64,
    pub gas_minus: f64,
    pub reward_wind: f64,
    pub reward_pv: f64,
    pub reward_ev: f64,
    pub reward_tes: f64,
}

impl PriceBook {
    /// Average 2019 U.K. wholesale prices, flat across the day.
    pub fn uk_2019(slots: usize) -> Self {
        Self {
            elec_day_ahead: vec![0.031; slots],
            gas_day_ahead: vec![0.013; slots],
            elec_plus: 0.058,
            elec_minus: 0.025,
            gas_plus: 0.022,
            gas_minus: 0.011,
            reward_wind: 0.02,
            reward_pv: 0.02,
            reward_ev: 0.03,
            reward_tes: 0.01,
        }
    }

    /// A book with every price set to zero.
    pub fn zero(slots: usize) -> Self {
        Self {
            elec_day_ahead: vec![0.0; slots],
            gas_day_ahead: vec![0.0; slots],
            elec_plus: 0.0,
            elec_minus: 0.0,
            gas_plus: 0.0,
            gas_minus: 0.0,
            reward_wind: 0.0,
            reward_pv: 0.0,
            reward_ev: 0.0,
            reward_tes: 0.0,
        }
    }

    pub fn slots(&self) -> usize {
        self.elec_day_ahead.len()
    }

    /// Hard-checks non-negativity and lengths. Returns soft warnings for
    /// real-time prices that do not bracket the day-ahead price.
    pub fn validate(&self, slots: usize) -> Result<Vec<String>, ModelError> {
        for (what, series) in [("elec_day_ahead", &self.elec_day_ahead), ("gas_day_ahead", &self.gas_day_ahead)] {
            if series.len() != slots {
                return Err(ModelError::DimensionMismatch {
                    what: what.to_string(),
                    expected: slots,
                    found: series.len(),
                });
            }
        }
        let scalars = [
            self.elec_plus,
            self.elec_minus,
            self.gas_plus,
            self.gas_minus,
            self.reward_wind,
            self.reward_pv,
            self.reward_ev,
            self.reward_tes,
        ];
        let all_ok = scalars
            .iter()
            .chain(&self.elec_day_ahead)
            .chain(&self.gas_day_ahead)
            .all(|p| *p >= 0.0 && p.is_finite());
        if !all_ok {
            return Err(ModelError::InvalidConfig("prices must be finite and non-negative".into()));
        }

        let mut warnings = Vec::new();
        for t in 0..slots {
            let e = self.elec_day_ahead[t];
            let g = self.gas_day_ahead[t];
            if self.elec_plus < e || self.elec_minus > e {
                warnings.push(format!("slot {}: electricity real-time prices do not bracket {e}", t + 1));
            }
            if self.gas_plus < g || self.gas_minus > g {
                warnings.push(format!("slot {}: gas real-time prices do not bracket {g}", t + 1));
            }
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uk_prices_bracket_day_ahead() {
        let p = PriceBook::uk_2019(24);
        assert!(p.validate(24).unwrap().is_empty());
    }

    #[test]
    fn inverted_spread_is_a_warning_not_an_error() {
        let mut p = PriceBook::uk_2019(24);
        p.elec_plus = 0.01;
        let warnings = p.validate(24).unwrap();
        assert_eq!(warnings.len(), 24);
    }

    #[test]
    fn negative_price_is_rejected() {
        let mut p = PriceBook::uk_2019(24);
        p.gas_minus = -0.1;
        assert!(p.validate(24).is_err());
        assert!(PriceBook::uk_2019(23).validate(24).is_err());
    }
}
