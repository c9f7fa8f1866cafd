use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use ies_sched::benchmark::BenchmarkScheduler;
use ies_sched::data::{load_profiles, Dataset, EvalSet, ERROR_FILE, POOL_FILE};
use ies_sched::model::{check_feasibility, DayProfile, Schedule, DEFAULT_TOL};
use ies_sched::neural::{Checkpoint, NeuralScheduler, TrainJob};
use ies_sched::sim::{run_experiment, DayScheduler, EvaluationReport, Method, RunReport};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.txt";

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Data(format!("missing {what}: {} (run the earlier pipeline step first)", path.display())))
    }
}

pub fn gen_data(rc: &RunConfig) -> Result<(), CliError> {
    let dataset = Dataset::synthetic(&rc.profile, &rc.errors, rc.sizes, rc.seed)?;
    dataset.save_dir(&rc.data_dir)?;
    let eval = EvalSet::synthetic(&rc.profile, &rc.errors, rc.eval_first_day(), rc.eval_days, rc.seed)?;
    eval.save_dir(&rc.data_dir)?;

    let mut manifest = String::new();
    writeln!(manifest, "scenario = {}", rc.scenario).unwrap();
    writeln!(manifest, "seed = {}", rc.seed).unwrap();
    writeln!(manifest, "base_days = {}", rc.sizes.base_days).unwrap();
    writeln!(manifest, "pool = {}", rc.sizes.pool).unwrap();
    writeln!(manifest, "errors = {}", rc.sizes.errors).unwrap();
    writeln!(manifest, "eval_days = {}", rc.eval_days).unwrap();
    writeln!(manifest, "eval_first_day = {}", rc.eval_first_day()).unwrap();
    writeln!(manifest, "error_cap = {}", rc.errors.cap).unwrap();
    writeln!(manifest, "dataset_hash = {}", dataset.hash()).unwrap();
    writeln!(manifest, "eval_hash = {}", eval.hash()).unwrap();
    let mut files: Vec<PathBuf> = std::fs::read_dir(&rc.data_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", rc.data_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    for f in files {
        writeln!(manifest, "sha256 {} = {}", f.file_name().unwrap().to_string_lossy(), file_sha256(&f)?).unwrap();
    }
    write(&rc.data_dir.join(MANIFEST_FILE), &manifest)?;
    println!(
        "wrote {} base days, {} forecasts, {} error samples and {} evaluation days to {}",
        dataset.base_days.len(),
        dataset.forecasts.len(),
        dataset.errors.len(),
        eval.len(),
        rc.data_dir.display()
    );
    println!("dataset hash {}", dataset.hash());
    Ok(())
}

fn checkpoint_dir(rc: &RunConfig) -> PathBuf {
    rc.out.join("checkpoints")
}

pub fn train(rc: &RunConfig) -> Result<(), CliError> {
    require(&rc.data_dir.join(POOL_FILE), "forecast pool")?;
    require(&rc.data_dir.join(ERROR_FILE), "error pool")?;
    let dataset = Dataset::load_dir(&rc.data_dir, rc.system.slots)?;
    dataset.validate(&rc.system)?;
    let job = TrainJob {
        config: &rc.system,
        prices: &rc.prices,
        forecasts: &dataset.forecasts,
        errors: &dataset.errors,
        dataset_hash: dataset.hash(),
        train: rc.train,
        diagnostic_path: Some(checkpoint_dir(rc).join("diagnostic.ckpt")),
    };
    let initial = job.initial();
    initial.save(&checkpoint_dir(rc).join("epoch-0000.ckpt"))?;
    let mut trace = String::from("epoch,batch,loss\n");
    let started = Instant::now();
    let (last, epochs) = job.run(Some(initial.clone()), |summary, ckpt| {
        ckpt.save(&checkpoint_dir(rc).join(format!("epoch-{:04}.ckpt", summary.epoch)))?;
        println!("epoch {}: mean loss {:.6}", summary.epoch, summary.mean_loss);
        Ok(())
    })?;
    for s in &epochs {
        for (b, l) in s.batch_losses.iter().enumerate() {
            writeln!(trace, "{},{},{l}", s.epoch, b + 1).unwrap();
        }
    }
    last.save(&rc.checkpoint)?;
    write(&rc.out.join("loss_trace.csv"), &trace)?;
    println!(
        "trained {} epochs of {} batches in {:.1} s; checkpoint {}",
        epochs.len(),
        rc.train.batches_per_epoch,
        started.elapsed().as_secs_f64(),
        rc.checkpoint.display()
    );
    Ok(())
}

fn load_neural(rc: &RunConfig) -> Result<NeuralScheduler, CliError> {
    require(&rc.checkpoint, "checkpoint")?;
    let ckpt = Checkpoint::load(&rc.checkpoint)?;
    Ok(NeuralScheduler::new(rc.system.clone(), ckpt.params)?)
}

fn load_eval(rc: &RunConfig) -> Result<EvalSet, CliError> {
    require(&rc.data_dir.join(ies_sched::data::EVAL_FORECAST_FILE), "evaluation forecasts")?;
    require(&rc.data_dir.join(ies_sched::data::EVAL_ACTUAL_FILE), "evaluation actuals")?;
    let eval = EvalSet::load_dir(&rc.data_dir, rc.system.slots)?;
    if rc.eval_days < eval.len() {
        return Ok(EvalSet {
            forecasts: eval.forecasts[..rc.eval_days].to_vec(),
            actuals: eval.actuals[..rc.eval_days].to_vec(),
        });
    }
    Ok(eval)
}

fn schedule_rows(out: &mut String, rc: &RunConfig, day: usize, s: &Schedule) {
    for t in 0..rc.system.slots {
        write!(out, "{},{},{},{},{},{}", day, t + 1, s.grid_import[t], s.gas_import[t], s.chp_share[t], s.boiler_share[t])
            .unwrap();
        for f in s.ev_flow.iter().chain(&s.tes_flow) {
            write!(out, ",{}", f[t]).unwrap();
        }
        out.push('\n');
    }
}

fn schedule_header(rc: &RunConfig) -> String {
    let mut h = String::from("day,slot,S_E_kwh,S_G_kwh,v_CHP,v_B");
    for k in 0..rc.system.ev_count() {
        write!(h, ",EV{}_kwh", k + 1).unwrap();
    }
    for k in 0..rc.system.tes_count() {
        write!(h, ",TES{}_kwh", k + 1).unwrap();
    }
    h.push('\n');
    h
}

pub fn schedule(
    rc: &RunConfig,
    method: Method,
    forecast: Option<&Path>,
    actual: Option<&Path>,
    day: Option<usize>,
) -> Result<(), CliError> {
    let read = |p: &Path| -> Result<Vec<DayProfile>, CliError> {
        require(p, "profile file")?;
        Ok(load_profiles(p, rc.system.slots)?)
    };
    let (forecasts, actuals) = match forecast {
        Some(path) => {
            let f = read(path)?;
            let a = match actual {
                Some(p) => read(p)?,
                None => f.clone(),
            };
            (f, a)
        }
        None => {
            let e = load_eval(rc)?;
            (e.forecasts, e.actuals)
        }
    };
    if forecasts.len() != actuals.len() {
        return Err(CliError::Data(format!("{} forecast days but {} actual days", forecasts.len(), actuals.len())));
    }
    let days: Vec<usize> = match day {
        Some(d) if d >= 1 && d <= forecasts.len() => vec![d - 1],
        Some(d) => return Err(CliError::Usage(format!("day {d} outside 1..={}", forecasts.len()))),
        None => (0..forecasts.len()).collect(),
    };

    let neural = if method == Method::Neural { Some(load_neural(rc)?) } else { None };
    let lp = BenchmarkScheduler::new(rc.system.clone(), rc.prices.clone());
    let mut body = schedule_header(rc);
    let mut times = Vec::with_capacity(days.len());
    let mut non_soc = 0;
    let mut soc = 0;
    for &d in &days {
        let input = if method == Method::Ideal { &actuals[d] } else { &forecasts[d] };
        let started = Instant::now();
        let s = match &neural {
            Some(nn) => nn.schedule(input)?,
            None => lp.schedule(input)?,
        };
        times.push(started.elapsed().as_secs_f64());
        for v in check_feasibility(&rc.system, input, &s, DEFAULT_TOL)? {
            if v.kind.is_soc() {
                soc += 1;
            } else if !(method == Method::Neural && v.kind.is_balance()) {
                non_soc += 1;
            }
        }
        schedule_rows(&mut body, rc, d + 1, &s);
    }
    let path = rc.out.join("schedules").join(format!("{method}.csv"));
    write(&path, &body)?;
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    println!("{method}: scheduled {} day(s) into {}", days.len(), path.display());
    println!("feasibility: {non_soc} device/flow violations, {soc} SOC violations");
    println!("timing: median {:.3} ms per day", median * 1e3);
    if non_soc > 0 {
        return Err(CliError::Infeasible(format!("{non_soc} constraint violations in the {method} schedules")));
    }
    Ok(())
}

fn run_method(rc: &RunConfig, eval: &EvalSet, method: Method) -> Result<RunReport, CliError> {
    let lp = BenchmarkScheduler::new(rc.system.clone(), rc.prices.clone());
    let days = 0..eval.len();
    let first = rc.eval_first_day();
    let report = match method {
        Method::Ideal => run_experiment(&rc.system, &rc.prices, eval, DayScheduler::Ideal(&lp), days, first)?,
        Method::Benchmark => run_experiment(&rc.system, &rc.prices, eval, DayScheduler::Benchmark(&lp), days, first)?,
        Method::Neural => {
            let nn = load_neural(rc)?;
            run_experiment(&rc.system, &rc.prices, eval, DayScheduler::Neural(&nn), days, first)?
        }
    };
    Ok(report)
}

fn settlement_csv(run: &RunReport) -> String {
    let mut out =
        String::from("day,slot,scheduling,delta_E_kwh,delta_G_kwh,extra_elec,extra_gas,penalty_after_adjustment,total\n");
    for d in &run.days {
        let l = &d.settlement.ledger;
        for t in 0..l.slots() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                d.day + 1,
                t + 1,
                l.scheduling[t],
                l.mismatch_elec[t],
                l.mismatch_gas[t],
                l.extra_elec[t],
                l.extra_gas[t],
                l.penalty[t],
                l.all[t]
            )
            .unwrap();
        }
    }
    out
}

fn adjustments_csv(run: &RunReport) -> String {
    let mut out = String::from("day,device,slot,before_kwh,after_kwh\n");
    for d in &run.days {
        for a in &d.settlement.log.changes {
            writeln!(out, "{},{:?}{},{},{},{}", d.day + 1, a.kind, a.device + 1, a.slot + 1, a.before, a.after).unwrap();
        }
        for r in &d.settlement.log.residuals {
            writeln!(out, "{},{:?}{},residual,{},{}", d.day + 1, r.kind, r.device + 1, r.amount, r.stretch).unwrap();
        }
    }
    out
}

pub fn simulate(rc: &RunConfig, method: Option<Method>) -> Result<(), CliError> {
    let eval = load_eval(rc)?;
    let methods = match method {
        Some(m) => vec![m],
        None => Method::ALL.to_vec(),
    };
    let dir = rc.out.join("settlement");
    for m in methods {
        let run = run_method(rc, &eval, m)?;
        write(&dir.join(format!("{m}.csv")), &settlement_csv(&run))?;
        write(&dir.join(format!("{m}_adjustments.csv")), &adjustments_csv(&run))?;
        println!(
            "{m}: {} days, mean daily cost {:.3}, mean extra cost {:.3}, adjustment cost {:.6}",
            run.days.len(),
            run.mean_daily_cost(),
            run.mean_extra_cost(),
            run.total_adjustment_cost()
        );
    }
    Ok(())
}

pub fn report(rc: &RunConfig) -> Result<(), CliError> {
    let eval = load_eval(rc)?;
    let runs = Method::ALL.iter().map(|&m| run_method(rc, &eval, m)).collect::<Result<Vec<_>, _>>()?;
    let report = EvaluationReport { runs };
    report.write_dir(&rc.report_dir)?;
    print!("{}", report.comparison_csv());
    println!("tables written to {}", rc.report_dir.display());
    Ok(())
}
