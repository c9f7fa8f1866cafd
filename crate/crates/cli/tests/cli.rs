use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ies_sched::data::{load_errors, load_profiles, save_profiles};
use ies_sched::model::DayProfile;
use ies_sched::neural::Checkpoint;

const SMALL: &str = r#"
scenario = "small"

[data]
base_days = 10
pool = 40
errors = 8
eval_days = 3

[train]
batches_per_epoch = 2
error_batch = 4
"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("run.toml"), SMALL).unwrap();
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        let config = self.path("run.toml");
        let out = self.path("out");
        Command::new(env!("CARGO_BIN_EXE_ies-sched"))
            .args(args)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let o = self.run(args);
        assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Every row has the header's width and every cell but the method label is numeric.
fn assert_numeric_table(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let width = lines.next().unwrap().split(',').count();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), width, "{}: {line}", path.display());
        for c in cells.iter().filter(|c| !["ideal", "neural", "benchmark"].contains(c)) {
            if c.starts_with("EV") || c.starts_with("TES") || *c == "residual" || c.ends_with("_cost") || *c == "extra_cost_reduction" {
                continue;
            }
            assert!(c.parse::<f64>().is_ok(), "{}: cell '{c}'", path.display());
        }
    }
}

#[test]
fn pool_size_and_error_cap_flags() {
    let ws = Workspace::new();
    ws.ok(&["gen-data", "--days", "31", "--pool", "1000", "--error-cap", "0.45"]);
    let pool = load_profiles(&ws.path("out/data/forecast_pool.csv"), 24).unwrap();
    assert_eq!(pool.len(), 1000);
    let eval = load_profiles(&ws.path("out/data/eval_forecast.csv"), 24).unwrap();
    assert_eq!(eval.len(), 31);
    let errors = load_errors(&ws.path("out/data/errors.csv"), 24).unwrap();
    assert!(errors.iter().all(|e| e.max_abs() <= 0.45));
    let manifest = std::fs::read_to_string(ws.path("out/data/manifest.txt")).unwrap();
    assert!(manifest.contains("pool = 1000"));
    assert!(manifest.contains("error_cap = 0.45"));
}

#[test]
fn manifest_is_reproducible() {
    let (a, b) = (Workspace::new(), Workspace::new());
    a.ok(&["gen-data", "--seed", "3"]);
    b.ok(&["gen-data", "--seed", "3"]);
    let read = |w: &Workspace| std::fs::read_to_string(w.path("out/data/manifest.txt")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn zero_epochs_writes_only_the_initial_checkpoint() {
    let ws = Workspace::new();
    ws.ok(&["gen-data"]);
    ws.ok(&["train", "--epochs", "0"]);
    let names: Vec<String> = std::fs::read_dir(ws.path("out/checkpoints"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["epoch-0000.ckpt".to_string()]);
    let initial = std::fs::read(ws.path("out/checkpoints/epoch-0000.ckpt")).unwrap();
    assert_eq!(std::fs::read(ws.path("out/checkpoint.ckpt")).unwrap(), initial);
}

#[test]
fn fixed_seed_gives_identical_checkpoints() {
    let (a, b) = (Workspace::new(), Workspace::new());
    for w in [&a, &b] {
        w.ok(&["gen-data", "--seed", "7"]);
        w.ok(&["train", "--seed", "7", "--epochs", "1"]);
    }
    let read = |w: &Workspace, f: &str| std::fs::read(w.path(f)).unwrap();
    assert_eq!(read(&a, "out/checkpoint.ckpt"), read(&b, "out/checkpoint.ckpt"));
    assert_eq!(read(&a, "out/checkpoints/epoch-0001.ckpt"), read(&b, "out/checkpoints/epoch-0001.ckpt"));
    assert_ne!(read(&a, "out/checkpoint.ckpt"), read(&a, "out/checkpoints/epoch-0000.ckpt"));
}

#[test]
fn default_hyperparameters_reach_the_checkpoint_header() {
    let ws = Workspace::new();
    std::fs::write(ws.path("run.toml"), "[data]\nbase_days = 4\npool = 4\nerrors = 2\neval_days = 1\n").unwrap();
    ws.ok(&["gen-data"]);
    ws.ok(&["train", "--epochs", "0"]);
    let text = std::fs::read_to_string(ws.path("out/checkpoint.ckpt")).unwrap();
    for line in ["learning_rate = 1e-5", "lambda = 1.0", "forecast_batch = 4", "error_batch = 55", "batches_per_epoch = 10000"] {
        assert!(text.lines().any(|l| l == line), "missing '{line}'");
    }
    let ck = Checkpoint::load(&ws.path("out/checkpoint.ckpt")).unwrap();
    assert_eq!(ck.params.input_dim(), 96);
    assert_eq!(ck.params.output_dim(), 216);
}

#[test]
fn benchmark_on_a_zero_day_imports_nothing() {
    let ws = Workspace::new();
    let file = ws.path("zero.csv");
    save_profiles(&file, &[DayProfile::zeros(24)]).unwrap();
    let stdout = ws.ok(&["schedule", "--method", "benchmark", "--forecast", file.to_str().unwrap()]);
    assert!(stdout.contains("feasibility: 0 device/flow violations, 0 SOC violations"));
    let text = std::fs::read_to_string(ws.path("out/schedules/benchmark.csv")).unwrap();
    assert_eq!(text.lines().count(), 25);
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').skip(2).map(|c| c.parse().unwrap()).collect();
        // grid, gas and both dispatch shares
        assert!(cells[..4].iter().all(|v| v.abs() < 1e-9), "{line}");
        // storage may only trade with other storage, since usage is rewarded
        let (ev, tes): (f64, f64) = (cells[4..8].iter().sum(), cells[8..].iter().sum());
        assert!(ev.abs() < 1e-9 && tes.abs() < 1e-9, "{line}");
    }
}

#[test]
fn neural_schedules_pass_device_checks_and_report_timing() {
    let ws = Workspace::new();
    ws.ok(&["gen-data"]);
    ws.ok(&["train", "--epochs", "0"]);
    let stdout = ws.ok(&["schedule"]);
    assert!(stdout.contains("feasibility: 0 device/flow violations"), "{stdout}");
    let ms: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("timing: median "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(ms < 50.0);
    assert_numeric_table(&ws.path("out/schedules/neural.csv"));
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["frobnicate"])), 1);
    assert_eq!(code(&ws.run(&["schedule", "--method", "sideways"])), 1);
    // nothing generated yet
    assert_eq!(code(&ws.run(&["train"])), 2);
    assert_eq!(code(&ws.run(&["simulate"])), 2);

    std::fs::write(ws.path("bad.toml"), "[train]\nlearning_rate = \"fast\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ies-sched"))
        .args(["gen-data", "--config"])
        .arg(ws.path("bad.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);

    // demand beyond every supply route
    let mut heavy = DayProfile::zeros(24);
    heavy.elec_load[5] = 5000.0;
    let file = ws.path("heavy.csv");
    save_profiles(&file, &[heavy]).unwrap();
    let o = ws.run(&["schedule", "--method", "benchmark", "--forecast", file.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains('6'));
}

#[test]
fn simulate_and_report_tables() {
    let ws = Workspace::new();
    ws.ok(&["gen-data"]);
    ws.ok(&["train", "--epochs", "1"]);
    ws.ok(&["simulate"]);
    let stdout = ws.ok(&["report"]);
    assert!(stdout.contains("extra_cost_reduction,"));

    let daily = std::fs::read_to_string(ws.path("out/report/daily.csv")).unwrap();
    for m in ["ideal", "neural", "benchmark"] {
        assert_eq!(daily.lines().filter(|l| l.starts_with(&format!("{m},"))).count(), 3);
        let settle = std::fs::read_to_string(ws.path(&format!("out/settlement/{m}.csv"))).unwrap();
        assert_eq!(settle.lines().count(), 1 + 3 * 24);
        assert_numeric_table(&ws.path(&format!("out/settlement/{m}.csv")));
    }
    // ideal rows carry no extra cost
    for line in daily.lines().filter(|l| l.starts_with("ideal,")) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[5].parse::<f64>().unwrap().abs() < 1e-6, "{line}");
    }
    let comparison = std::fs::read_to_string(ws.path("out/report/comparison.csv")).unwrap();
    assert!(comparison.contains("neural_adjustment_cost,"));
    for t in ["hourly", "daily", "monthly", "categories", "comparison"] {
        assert_numeric_table(&ws.path(&format!("out/report/{t}.csv")));
    }
}

#[test]
fn emitted_data_files_round_trip() {
    let ws = Workspace::new();
    ws.ok(&["gen-data"]);
    for f in ["base_days.csv", "forecast_pool.csv", "eval_forecast.csv", "eval_actual.csv"] {
        let path = ws.path(&format!("out/data/{f}"));
        let days = load_profiles(&path, 24).unwrap();
        let copy = ws.path("copy.csv");
        save_profiles(&copy, &days).unwrap();
        assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&path).unwrap(), "{f}");
    }
    let errors = load_errors(&ws.path("out/data/errors.csv"), 24).unwrap();
    assert_eq!(errors.len(), 8);

    // a schedule run on the emitted eval forecasts reads them back
    let stdout = ws.ok(&["schedule", "--method", "benchmark", "--forecast", ws.path("out/data/eval_forecast.csv").to_str().unwrap(), "--day", "2"]);
    assert!(stdout.contains("scheduled 1 day(s)"));
}
