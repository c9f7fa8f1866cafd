use std::f64::consts::PI;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::model::DayProfile;

/// Independent generator for item `index` of a seeded sequence.
pub(crate) fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

const TAG_BASE: u64 = 1;
const TAG_AUGMENT: u64 = 2;

/// Harmonic `amplitude * cos(2 pi k (t - peak_hour) / 24)` on top of the base level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    pub amplitude: f64,
    pub peak_hour: f64,
}

/// Day shape of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesShape {
    /// Mean level, kWh per slot.
    pub base: f64,
    pub harmonics: Vec<Harmonic>,
    /// Generation only between these hours, shaped as a half sine.
    pub daylight: Option<(f64, f64)>,
    pub weekday_scale: f64,
    pub weekend_scale: f64,
    /// Relative seasonal swing; the peak falls on `seasonal_peak_day`.
    pub seasonal_amplitude: f64,
    pub seasonal_peak_day: f64,
    /// Relative standard deviation of a whole-day level shift.
    pub day_noise: f64,
    /// Relative standard deviation of independent per-slot noise.
    pub slot_noise: f64,
    pub cap: f64,
}

impl SeriesShape {
    pub fn flat(base: f64, cap: f64) -> Self {
        Self {
            base,
            harmonics: Vec::new(),
            daylight: None,
            weekday_scale: 1.0,
            weekend_scale: 1.0,
            seasonal_amplitude: 0.0,
            seasonal_peak_day: 0.0,
            day_noise: 0.0,
            slot_noise: 0.0,
            cap,
        }
    }

    /// Noise-free value at hour `h` (slot centre) with the calendar factor applied.
    fn mean_value(&self, h: f64, calendar: f64) -> f64 {
        let mut shape = 1.0;
        for hm in &self.harmonics {
            shape += hm.amplitude * (2.0 * PI * hm.order as f64 * (h - hm.peak_hour) / 24.0).cos();
        }
        if let Some((rise, set)) = self.daylight {
            shape *= if h > rise && h < set { 2.0 * ((h - rise) / (set - rise) * PI).sin() } else { 0.0 };
        }
        self.base * shape * calendar
    }
}

/// Parametric generator for the four exogenous series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub slots: usize,
    pub elec_load: SeriesShape,
    pub heat_load: SeriesShape,
    pub wind: SeriesShape,
    pub pv: SeriesShape,
    /// Day of year of day index 0.
    pub start_day_of_year: u32,
    /// Weekday of day index 0, Monday = 0.
    pub start_weekday: u32,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            slots: 24,
            elec_load: SeriesShape {
                base: 590.0,
                harmonics: vec![
                    Harmonic { order: 1, amplitude: 0.17, peak_hour: 18.0 },
                    Harmonic { order: 2, amplitude: 0.05, peak_hour: 9.0 },
                ],
                weekend_scale: 0.93,
                seasonal_amplitude: 0.06,
                seasonal_peak_day: 15.0,
                day_noise: 0.04,
                slot_noise: 0.02,
                ..SeriesShape::flat(590.0, 950.0)
            },
            heat_load: SeriesShape {
                base: 260.0,
                harmonics: vec![
                    Harmonic { order: 2, amplitude: 0.45, peak_hour: 7.5 },
                    Harmonic { order: 1, amplitude: 0.1, peak_hour: 19.0 },
                ],
                seasonal_amplitude: 0.2,
                seasonal_peak_day: 15.0,
                day_noise: 0.05,
                slot_noise: 0.03,
                ..SeriesShape::flat(260.0, 700.0)
            },
            wind: SeriesShape {
                base: 110.0,
                harmonics: vec![Harmonic { order: 1, amplitude: 0.3, peak_hour: 3.0 }],
                seasonal_amplitude: 0.1,
                seasonal_peak_day: 15.0,
                day_noise: 0.12,
                slot_noise: 0.06,
                ..SeriesShape::flat(110.0, 200.0)
            },
            pv: SeriesShape {
                base: 90.0,
                daylight: Some((5.5, 20.5)),
                seasonal_amplitude: 0.2,
                seasonal_peak_day: 172.0,
                day_noise: 0.08,
                slot_noise: 0.04,
                ..SeriesShape::flat(90.0, 200.0)
            },
            start_day_of_year: 0,
            start_weekday: 0,
        }
    }
}

impl ProfileSpec {
    /// Same world with every heat-load value scaled by `factor`.
    pub fn with_heat_scale(mut self, factor: f64) -> Self {
        self.heat_load.base *= factor;
        self.heat_load.cap *= factor;
        self
    }

    /// The six-EV, four-TES case: heat demand up by 20%.
    pub fn large() -> Self {
        Self::default().with_heat_scale(1.2)
    }

    pub fn shapes(&self) -> [&SeriesShape; 4] {
        [&self.elec_load, &self.heat_load, &self.wind, &self.pv]
    }

    /// Profile of day `day`; depends only on `(self, seed, day)`.
    pub fn day(&self, seed: u64, day: u64) -> DayProfile {
        let mut rng = stream(seed, TAG_BASE, day);
        let doy = ((self.start_day_of_year as u64 + day) % 365) as f64;
        let weekend = (self.start_weekday as u64 + day) % 7 >= 5;
        let hours_per_slot = 24.0 / self.slots as f64;
        let series = self.shapes().map(|shape| {
            let season = 1.0 + shape.seasonal_amplitude * (2.0 * PI * (doy - shape.seasonal_peak_day) / 365.0).cos();
            let week = if weekend { shape.weekend_scale } else { shape.weekday_scale };
            let z: f64 = rng.sample(StandardNormal);
            let level = (1.0 + shape.day_noise * z).max(0.0);
            (0..self.slots)
                .map(|t| {
                    let h = (t as f64 + 0.5) * hours_per_slot;
                    let z: f64 = rng.sample(StandardNormal);
                    let v = shape.mean_value(h, season * week) * level * (1.0 + shape.slot_noise * z);
                    v.clamp(0.0, shape.cap)
                })
                .collect::<Vec<f64>>()
        });
        DayProfile::from_series(series)
    }
}

/// `n_days` consecutive days starting at day index 0.
pub fn generate_base_days(spec: &ProfileSpec, n_days: usize, seed: u64) -> Vec<DayProfile> {
    generate_days(spec, 0, n_days, seed)
}

/// Days `first .. first + n_days` of the seeded calendar.
pub fn generate_days(spec: &ProfileSpec, first: u64, n_days: usize, seed: u64) -> Vec<DayProfile> {
    (0..n_days as u64).map(|d| spec.day(seed, first + d)).collect()
}

/// Weighted sum of base days; weights are used as given.
pub fn combine(base: &[DayProfile], picks: &[(usize, f64)]) -> DayProfile {
    let slots = base[picks[0].0].slots();
    let mut out = DayProfile::zeros(slots);
    for &(i, w) in picks {
        for (dst, src) in out.series_mut().into_iter().zip(base[i].series()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}

/// Random convex combinations of 2 to 4 distinct base days.
///
/// Panics if fewer than two base days are given.
pub fn augment_forecasts(base: &[DayProfile], pool_size: usize, seed: u64) -> Vec<DayProfile> {
    assert!(base.len() >= 2, "augmentation needs at least two base days");
    (0..pool_size as u64)
        .map(|i| {
            let mut rng = stream(seed, TAG_AUGMENT, i);
            let k = rng.random_range(2..=4usize).min(base.len());
            let chosen = index::sample(&mut rng, base.len(), k);
            let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let picks: Vec<(usize, f64)> = chosen.iter().zip(&raw).map(|(d, w)| (d, w / total)).collect();
            combine(base, &picks)
        })
        .collect()
}
