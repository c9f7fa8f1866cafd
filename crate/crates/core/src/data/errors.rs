use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::generate::stream;
use crate::model::ErrorSample;

const TAG_ERRORS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ErrorFamily {
    /// Gaussian innovations; the result is clipped at the cap.
    Gaussian,
    /// Beta(alpha, beta) innovations standardised to zero mean and unit variance.
    Beta { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesErrorSpec {
    pub family: ErrorFamily,
    /// Mean relative error.
    pub bias: f64,
    /// Amplitude of a daily sinusoidal bias, peaking at `diurnal_peak_hour`.
    pub diurnal_bias: f64,
    pub diurnal_peak_hour: f64,
    /// Standard deviation of the stochastic part.
    pub scale: f64,
    /// Lag-one correlation of the stochastic part, in `[0, 1)`.
    pub rho: f64,
}

impl SeriesErrorSpec {
    pub fn gaussian(bias: f64, scale: f64, rho: f64) -> Self {
        Self { family: ErrorFamily::Gaussian, bias, diurnal_bias: 0.0, diurnal_peak_hour: 0.0, scale, rho }
    }
}

/// Relative forecast error model for the four series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub slots: usize,
    pub elec: SeriesErrorSpec,
    pub heat: SeriesErrorSpec,
    pub wind: SeriesErrorSpec,
    pub pv: SeriesErrorSpec,
    /// Hard clip on `|delta|`.
    pub cap: f64,
}

impl Default for ErrorSpec {
    fn default() -> Self {
        Self {
            slots: 24,
            elec: SeriesErrorSpec { diurnal_bias: 0.03, diurnal_peak_hour: 18.0, ..SeriesErrorSpec::gaussian(0.05, 0.03, 0.5) },
            heat: SeriesErrorSpec::gaussian(0.08, 0.05, 0.5),
            wind: SeriesErrorSpec::gaussian(-0.10, 0.12, 0.5),
            pv: SeriesErrorSpec::gaussian(-0.05, 0.10, 0.5),
            cap: 0.45,
        }
    }
}

impl ErrorSpec {
    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    pub fn series(&self) -> [&SeriesErrorSpec; 4] {
        [&self.elec, &self.heat, &self.wind, &self.pv]
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.cap >= 0.0 && self.cap.is_finite()) {
            return Err(format!("error cap {} must be finite and non-negative", self.cap));
        }
        for s in self.series() {
            if !(0.0..1.0).contains(&s.rho) {
                return Err(format!("correlation {} outside [0, 1)", s.rho));
            }
            if !(s.scale >= 0.0) {
                return Err(format!("error scale {} must be non-negative", s.scale));
            }
            if let ErrorFamily::Beta { alpha, beta } = s.family {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(format!("beta parameters ({alpha}, {beta}) must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Error sample `index` of the seeded sequence.
    pub fn sample(&self, seed: u64, index: u64) -> ErrorSample {
        let mut rng = stream(seed, TAG_ERRORS, index);
        let hours_per_slot = 24.0 / self.slots as f64;
        let series = self.series().map(|s| {
            let beta = match s.family {
                ErrorFamily::Beta { alpha, beta } => Some((Beta::new(alpha, beta).expect("validated beta"), alpha, beta)),
                ErrorFamily::Gaussian => None,
            };
            let innovation = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
                match &beta {
                    None => rng.sample(StandardNormal),
                    Some((dist, a, b)) => {
                        let mean = a / (a + b);
                        let sd = (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt();
                        (dist.sample(rng) - mean) / sd
                    }
                }
            };
            let blend = (1.0 - s.rho * s.rho).sqrt();
            let mut z = innovation(&mut rng);
            (0..self.slots)
                .map(|t| {
                    if t > 0 {
                        z = s.rho * z + blend * innovation(&mut rng);
                    }
                    let h = (t as f64 + 0.5) * hours_per_slot;
                    let bias = s.bias + s.diurnal_bias * (2.0 * PI * (h - s.diurnal_peak_hour) / 24.0).cos();
                    (bias + s.scale * z).clamp(-self.cap, self.cap)
                })
                .collect::<Vec<f64>>()
        });
        ErrorSample::from_series(series)
    }
}

/// `n` error samples; sample `i` depends only on `(spec, seed, i)`.
pub fn sample_errors(spec: &ErrorSpec, n: usize, seed: u64) -> Vec<ErrorSample> {
    (0..n as u64).map(|i| spec.sample(seed, i)).collect()
}
