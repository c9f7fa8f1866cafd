//! Plain-text checkpoint: a versioned header of `key = value` lines followed
//! by numeric sections, one weight row per line. Floats are written in their
//! shortest round-trip decimal form, so a reload is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::network::NetworkParams;
use super::train::{AdamState, TrainConfig};
use crate::error::TrainError;

pub const CHECKPOINT_MAGIC: &str = "ies-sched-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParams,
    pub train: TrainConfig,
    pub adam: AdamState,
    /// Completed epochs.
    pub epoch: usize,
    pub dataset_hash: String,
}

fn join(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:?}").unwrap();
    }
    s
}

/// Writes `data` as rows following the layer layout of `dims`.
fn write_rows(out: &mut String, name: &str, dims: &[usize], data: &[f64]) {
    writeln!(out, "[{name}]").unwrap();
    let mut at = 0;
    for w in dims.windows(2) {
        let (i, o) = (w[0], w[1]);
        for _ in 0..o {
            out.push_str(&join(&data[at..at + i]));
            out.push('\n');
            at += i;
        }
        out.push_str(&join(&data[at..at + o]));
        out.push('\n');
        at += o;
    }
}

impl Checkpoint {
    pub fn new(params: NetworkParams, train: TrainConfig, dataset_hash: impl Into<String>) -> Self {
        let adam = AdamState::new(params.len());
        Self { params, train, adam, epoch: 0, dataset_hash: dataset_hash.into() }
    }

    pub fn to_text(&self) -> String {
        let t = &self.train;
        let mut out = String::new();
        writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}").unwrap();
        let dims: Vec<String> = self.params.dims.iter().map(|d| d.to_string()).collect();
        writeln!(out, "dims = {}", dims.join(" ")).unwrap();
        writeln!(out, "slope = {:?}", self.params.slope).unwrap();
        writeln!(out, "learning_rate = {:?}", t.learning_rate).unwrap();
        writeln!(out, "lambda = {:?}", t.lambda).unwrap();
        writeln!(out, "forecast_batch = {}", t.forecast_batch).unwrap();
        writeln!(out, "error_batch = {}", t.error_batch).unwrap();
        writeln!(out, "batches_per_epoch = {}", t.batches_per_epoch).unwrap();
        writeln!(out, "epochs = {}", t.epochs).unwrap();
        writeln!(out, "beta1 = {:?}", t.beta1).unwrap();
        writeln!(out, "beta2 = {:?}", t.beta2).unwrap();
        writeln!(out, "epsilon = {:?}", t.epsilon).unwrap();
        writeln!(out, "seed = {}", t.seed).unwrap();
        writeln!(out, "dataset_hash = {}", self.dataset_hash).unwrap();
        writeln!(out, "epoch = {}", self.epoch).unwrap();
        writeln!(out, "adam_step = {}", self.adam.step).unwrap();
        writeln!(out, "[input_scale]").unwrap();
        writeln!(out, "{}", join(&self.params.input_scale)).unwrap();
        write_rows(&mut out, "params", &self.params.dims, &self.params.data);
        write_rows(&mut out, "adam_m", &self.params.dims, &self.adam.m);
        write_rows(&mut out, "adam_v", &self.params.dims, &self.adam.v);
        out
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, first) = lines.next().ok_or("empty checkpoint")?;
        let mut head = first.split_whitespace();
        if head.next() != Some(CHECKPOINT_MAGIC) {
            return Err(format!("line 1: expected '{CHECKPOINT_MAGIC} <version>'"));
        }
        let version: u32 = head.next().and_then(|v| v.parse().ok()).ok_or("line 1: missing format version")?;
        if version != CHECKPOINT_VERSION {
            return Err(format!("unsupported checkpoint version {version}"));
        }

        let mut keys = std::collections::BTreeMap::new();
        let mut sections: Vec<(String, Vec<f64>)> = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                sections.push((name.to_string(), Vec::new()));
            } else if let Some((_, values)) = sections.last_mut() {
                for tok in line.split_whitespace() {
                    values.push(tok.parse::<f64>().map_err(|_| format!("line {n}: bad number '{tok}'"))?);
                }
            } else {
                let (k, v) = line.split_once('=').ok_or(format!("line {n}: expected 'key = value'"))?;
                keys.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| keys.get(k).ok_or(format!("missing key '{k}'"));
        fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("key '{k}': bad value '{v}'"))
        }
        let field = |k: &str| -> Result<f64, String> { num(k, get(k)?) };
        let count = |k: &str| -> Result<usize, String> { num(k, get(k)?) };

        let dims: Vec<usize> =
            get("dims")?.split_whitespace().map(|d| num("dims", d)).collect::<Result<_, _>>()?;
        if dims.len() < 2 || dims.contains(&0) {
            return Err(format!("invalid dims {dims:?}"));
        }
        let train = TrainConfig {
            learning_rate: field("learning_rate")?,
            lambda: field("lambda")?,
            forecast_batch: count("forecast_batch")?,
            error_batch: count("error_batch")?,
            batches_per_epoch: count("batches_per_epoch")?,
            epochs: count("epochs")?,
            beta1: field("beta1")?,
            beta2: field("beta2")?,
            epsilon: field("epsilon")?,
            seed: num("seed", get("seed")?)?,
        };
        let mut params = NetworkParams::zeros(&dims);
        params.slope = field("slope")?;
        let mut take = |name: &str, len: usize| -> Result<Vec<f64>, String> {
            let pos = sections.iter().position(|(n, _)| n == name).ok_or(format!("missing section [{name}]"))?;
            let values = std::mem::take(&mut sections[pos].1);
            if values.len() != len {
                return Err(format!("section [{name}] has {} values, expected {len}", values.len()));
            }
            Ok(values)
        };
        params.input_scale = take("input_scale", dims[0])?;
        params.data = take("params", params.len())?;
        let adam = AdamState { m: take("adam_m", params.len())?, v: take("adam_v", params.len())?, step: count("adam_step")? as u64 };
        Ok(Self { params, train, adam, epoch: count("epoch")?, dataset_hash: get("dataset_hash")?.clone() })
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| TrainError::Io { path: dir.to_path_buf(), source })?;
        }
        std::fs::write(path, self.to_text()).map_err(|source| TrainError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let text = std::fs::read_to_string(path).map_err(|source| TrainError::Io { path: path.to_path_buf(), source })?;
        Self::from_text(&text).map_err(|message| TrainError::Checkpoint { path: path.to_path_buf(), message })
    }
}
