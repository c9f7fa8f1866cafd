//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ies_sched::data::{DatasetSizes, ErrorSpec, ProfileSpec};
use ies_sched::model::{PriceBook, SystemConfig};
use ies_sched::neural::TrainConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemOverrides {
    pub grid_max: Option<f64>,
    pub gas_max: Option<f64>,
    pub wind_max: Option<f64>,
    pub pv_max: Option<f64>,
    pub chp_max: Option<f64>,
    pub boiler_max: Option<f64>,
    pub wind_units: Option<usize>,
    pub pv_units: Option<usize>,
    pub eta_transformer: Option<f64>,
    pub eta_chp_elec: Option<f64>,
    pub eta_chp_heat: Option<f64>,
    pub eta_boiler: Option<f64>,
    pub soc_sign_literal: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceOverrides {
    pub elec_day_ahead: Option<f64>,
    pub gas_day_ahead: Option<f64>,
    pub elec_plus: Option<f64>,
    pub elec_minus: Option<f64>,
    pub gas_plus: Option<f64>,
    pub gas_minus: Option<f64>,
    pub reward_wind: Option<f64>,
    pub reward_pv: Option<f64>,
    pub reward_ev: Option<f64>,
    pub reward_tes: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub learning_rate: Option<f64>,
    pub lambda: Option<f64>,
    pub forecast_batch: Option<usize>,
    pub error_batch: Option<usize>,
    pub batches_per_epoch: Option<usize>,
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataOverrides {
    pub base_days: Option<usize>,
    pub pool: Option<usize>,
    pub errors: Option<usize>,
    pub eval_days: Option<usize>,
    pub error_cap: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathOverrides {
    pub out: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub large: Option<bool>,
    pub paths: PathOverrides,
    pub system: SystemOverrides,
    pub prices: PriceOverrides,
    pub train: TrainOverrides,
    pub data: DataOverrides,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Flags that override the file.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub days: Option<usize>,
    pub pool: Option<usize>,
    pub error_cap: Option<f64>,
    pub large: bool,
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub system: SystemConfig,
    pub prices: PriceBook,
    pub train: TrainConfig,
    pub profile: ProfileSpec,
    pub errors: ErrorSpec,
    pub sizes: DatasetSizes,
    pub eval_days: usize,
    pub out: PathBuf,
    pub data_dir: PathBuf,
    pub checkpoint: PathBuf,
    pub report_dir: PathBuf,
}

fn set<T: Copy>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: FlagOverrides) -> Result<Self, CliError> {
        let large = flags.large || file.large.unwrap_or(false);
        let mut system = if large { SystemConfig::large() } else { SystemConfig::default() };
        let s = &file.system;
        set(&mut system.grid_max, s.grid_max);
        set(&mut system.gas_max, s.gas_max);
        set(&mut system.wind_max, s.wind_max);
        set(&mut system.pv_max, s.pv_max);
        set(&mut system.chp_max, s.chp_max);
        set(&mut system.boiler_max, s.boiler_max);
        set(&mut system.wind_units, s.wind_units);
        set(&mut system.pv_units, s.pv_units);
        set(&mut system.eta_transformer, s.eta_transformer);
        set(&mut system.eta_chp_elec, s.eta_chp_elec);
        set(&mut system.eta_chp_heat, s.eta_chp_heat);
        set(&mut system.eta_boiler, s.eta_boiler);
        set(&mut system.soc_sign_literal, s.soc_sign_literal);
        system.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let mut prices = PriceBook::uk_2019(system.slots);
        let p = &file.prices;
        if let Some(v) = p.elec_day_ahead {
            prices.elec_day_ahead = vec![v; system.slots];
        }
        if let Some(v) = p.gas_day_ahead {
            prices.gas_day_ahead = vec![v; system.slots];
        }
        set(&mut prices.elec_plus, p.elec_plus);
        set(&mut prices.elec_minus, p.elec_minus);
        set(&mut prices.gas_plus, p.gas_plus);
        set(&mut prices.gas_minus, p.gas_minus);
        set(&mut prices.reward_wind, p.reward_wind);
        set(&mut prices.reward_pv, p.reward_pv);
        set(&mut prices.reward_ev, p.reward_ev);
        set(&mut prices.reward_tes, p.reward_tes);
        for w in prices.validate(system.slots).map_err(|e| CliError::Usage(e.to_string()))? {
            log::warn!("{w}");
        }

        let seed = flags.seed.or(file.seed).unwrap_or(0);
        let mut train = TrainConfig { seed, ..TrainConfig::default() };
        let t = &file.train;
        set(&mut train.learning_rate, t.learning_rate);
        set(&mut train.lambda, t.lambda);
        set(&mut train.forecast_batch, t.forecast_batch);
        set(&mut train.error_batch, t.error_batch);
        set(&mut train.batches_per_epoch, t.batches_per_epoch);
        set(&mut train.epochs, t.epochs);
        set(&mut train.epochs, flags.epochs);
        train.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let mut sizes = DatasetSizes::default();
        let d = &file.data;
        set(&mut sizes.base_days, d.base_days);
        set(&mut sizes.pool, d.pool);
        set(&mut sizes.errors, d.errors);
        set(&mut sizes.pool, flags.pool);
        let mut eval_days = 31;
        set(&mut eval_days, d.eval_days);
        set(&mut eval_days, flags.days);

        let mut errors = ErrorSpec::default();
        set(&mut errors.cap, d.error_cap);
        set(&mut errors.cap, flags.error_cap);
        errors.validate().map_err(CliError::Usage)?;
        let profile = if large { ProfileSpec::large() } else { ProfileSpec::default() };

        let out = flags.out.or(file.paths.out).unwrap_or_else(|| PathBuf::from("out"));
        let data_dir = file.paths.data_dir.unwrap_or_else(|| out.join("data"));
        let checkpoint = file.paths.checkpoint.unwrap_or_else(|| out.join("checkpoint.ckpt"));
        let report_dir = file.paths.report_dir.unwrap_or_else(|| out.join("report"));
        let scenario = file.scenario.unwrap_or_else(|| if large { "large".into() } else { "default".into() });
        Ok(Self {
            scenario,
            seed,
            system,
            prices,
            train,
            profile,
            errors,
            sizes,
            eval_days,
            out,
            data_dir,
            checkpoint,
            report_dir,
        })
    }

    /// Calendar day of the first evaluation day: the one after the base days.
    pub fn eval_first_day(&self) -> u64 {
        self.sizes.base_days as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_case_study() {
        let r = RunConfig::resolve(FileConfig::default(), FlagOverrides::default()).unwrap();
        assert_eq!(r.system.ev_count(), 4);
        assert_eq!(r.train.learning_rate, 1e-5);
        assert_eq!((r.train.forecast_batch, r.train.error_batch), (4, 55));
        assert_eq!(r.sizes.pool, 56_172);
        assert_eq!(r.errors.cap, 0.45);
    }

    #[test]
    fn flags_beat_file_values() {
        let file: FileConfig = toml::from_str("seed = 3\n[data]\npool = 50\n[train]\nepochs = 2\n").unwrap();
        let flags = FlagOverrides { seed: Some(9), pool: Some(70), ..FlagOverrides::default() };
        let r = RunConfig::resolve(file, flags).unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.sizes.pool, 70);
        assert_eq!(r.train.epochs, 2);
    }

    #[test]
    fn unknown_keys_and_wrong_types_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[system]\ngrid_maximum = 5\n").is_err());
        assert!(toml::from_str::<FileConfig>("[system]\ngrid_max = \"big\"\n").is_err());
    }

    #[test]
    fn large_preset() {
        let flags = FlagOverrides { large: true, ..FlagOverrides::default() };
        let r = RunConfig::resolve(FileConfig::default(), flags).unwrap();
        assert_eq!((r.system.ev_count(), r.system.tes_count()), (6, 4));
        assert_eq!(r.scenario, "large");
    }
}
