//! Multi-day runs and their hourly, daily, monthly and category tables.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::settle::{settle_day, SettlementResult};
use crate::benchmark::BenchmarkScheduler;
use crate::data::EvalSet;
use crate::error::SimError;
use crate::model::{PriceBook, SchedulingBreakdown, SystemConfig};
use crate::neural::NeuralScheduler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Benchmark LP solved on the realised values.
    Ideal,
    Neural,
    /// Benchmark LP solved on the forecasts.
    Benchmark,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ideal, Method::Neural, Method::Benchmark];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ideal => "ideal",
            Method::Neural => "neural",
            Method::Benchmark => "benchmark",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ideal" => Ok(Method::Ideal),
            "neural" | "proposed" => Ok(Method::Neural),
            "benchmark" => Ok(Method::Benchmark),
            other => Err(format!("unknown method '{other}' (expected neural, benchmark or ideal)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DayScheduler<'a> {
    Ideal(&'a BenchmarkScheduler),
    Neural(&'a NeuralScheduler),
    Benchmark(&'a BenchmarkScheduler),
}

impl DayScheduler<'_> {
    pub fn method(&self) -> Method {
        match self {
            DayScheduler::Ideal(_) => Method::Ideal,
            DayScheduler::Neural(_) => Method::Neural,
            DayScheduler::Benchmark(_) => Method::Benchmark,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    /// Index into the evaluation set.
    pub day: usize,
    pub settlement: SettlementResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    /// Calendar day (0 = 1 January) of evaluation day 0.
    pub first_day: u64,
    pub days: Vec<DayResult>,
}

impl RunReport {
    fn mean(&self, f: impl Fn(&DayResult) -> f64) -> f64 {
        if self.days.is_empty() {
            return 0.0;
        }
        self.days.iter().map(f).sum::<f64>() / self.days.len() as f64
    }

    pub fn mean_daily_cost(&self) -> f64 {
        self.mean(|d| d.settlement.ledger.total())
    }

    pub fn mean_extra_cost(&self) -> f64 {
        self.mean(|d| d.settlement.ledger.total_extra())
    }

    pub fn total_adjustment_cost(&self) -> f64 {
        self.days.iter().map(|d| d.settlement.ledger.adjustment_cost).sum()
    }

    /// Daily means of each scheduling component.
    pub fn mean_breakdown(&self) -> SchedulingBreakdown {
        let n = self.days.len().max(1) as f64;
        let sum = self.days.iter().fold(SchedulingBreakdown::default(), |acc, d| {
            let b = d.settlement.ledger.breakdown_total();
            SchedulingBreakdown {
                grid: acc.grid + b.grid,
                gas: acc.gas + b.gas,
                ev_reward: acc.ev_reward + b.ev_reward,
                tes_reward: acc.tes_reward + b.tes_reward,
                renewable_reward: acc.renewable_reward + b.renewable_reward,
            }
        });
        SchedulingBreakdown {
            grid: sum.grid / n,
            gas: sum.gas / n,
            ev_reward: sum.ev_reward / n,
            tes_reward: sum.tes_reward / n,
            renewable_reward: sum.renewable_reward / n,
        }
    }
}

/// Schedules and settles evaluation days `days` with one scheduler.
pub fn run_experiment(
    config: &SystemConfig,
    prices: &PriceBook,
    eval: &EvalSet,
    scheduler: DayScheduler<'_>,
    days: Range<usize>,
    first_day: u64,
) -> Result<RunReport, SimError> {
    if days.end > eval.len() {
        return Err(SimError::Invalid(format!("day range {days:?} exceeds the {} evaluation days", eval.len())));
    }
    let mut out = Vec::with_capacity(days.len());
    for day in days {
        let (forecast, actual) = (&eval.forecasts[day], &eval.actuals[day]);
        let settlement = match scheduler {
            DayScheduler::Ideal(lp) => settle_day(config, prices, &lp.schedule(actual)?, actual, actual)?,
            DayScheduler::Benchmark(lp) => settle_day(config, prices, &lp.schedule(forecast)?, forecast, actual)?,
            DayScheduler::Neural(nn) => settle_day(config, prices, &nn.schedule(forecast)?, forecast, actual)?,
        };
        log::debug!("{} day {}: {:.3}", scheduler.method(), day + 1, settlement.ledger.total());
        out.push(DayResult { day, settlement });
    }
    Ok(RunReport { method: scheduler.method(), first_day, days: out })
}

const MONTH_DAYS: [u64; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// One-based calendar month of a day counted from 1 January.
pub fn month_of(day: u64) -> usize {
    let mut d = day % 365;
    for (m, len) in MONTH_DAYS.iter().enumerate() {
        if d < *len {
            return m + 1;
        }
        d -= len;
    }
    12
}

/// Runs of several schedulers over the same days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub runs: Vec<RunReport>,
}

fn f(v: f64) -> String {
    // keep -0.000000 out of the tables
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

impl EvaluationReport {
    pub fn run(&self, method: Method) -> Option<&RunReport> {
        self.runs.iter().find(|r| r.method == method)
    }

    /// `1 - (neural - ideal) / (benchmark - ideal)` on mean daily cost.
    pub fn extra_cost_reduction(&self) -> Option<f64> {
        let ideal = self.run(Method::Ideal)?.mean_daily_cost();
        let neural = self.run(Method::Neural)?.mean_daily_cost();
        let bench = self.run(Method::Benchmark)?.mean_daily_cost();
        let gap = bench - ideal;
        (gap != 0.0).then(|| 1.0 - (neural - ideal) / gap)
    }

    pub fn hourly_csv(&self) -> String {
        let mut out = String::from("method,slot,scheduling,extra_elec,extra_gas,total\n");
        for r in &self.runs {
            let n = r.days.len().max(1) as f64;
            let slots = r.days.first().map_or(0, |d| d.settlement.ledger.slots());
            for t in 0..slots {
                let sum = |g: fn(&crate::model::CostLedger, usize) -> f64| {
                    r.days.iter().map(|d| g(&d.settlement.ledger, t)).sum::<f64>() / n
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.method,
                    t + 1,
                    f(sum(|l, t| l.scheduling[t])),
                    f(sum(|l, t| l.extra_elec[t])),
                    f(sum(|l, t| l.extra_gas[t])),
                    f(sum(|l, t| l.all[t])),
                )
                .unwrap();
            }
        }
        out
    }

    pub fn daily_csv(&self) -> String {
        let mut out =
            String::from("method,day,scheduling,extra_elec,extra_gas,extra,adjustment,adjusted_slots,residuals,total\n");
        for r in &self.runs {
            for d in &r.days {
                let l = &d.settlement.ledger;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.method,
                    d.day + 1,
                    f(l.total_scheduling()),
                    f(l.total_extra_elec()),
                    f(l.total_extra_gas()),
                    f(l.total_extra()),
                    f(l.adjustment_cost),
                    d.settlement.log.changes.len(),
                    d.settlement.log.residuals.len(),
                    f(l.total()),
                )
                .unwrap();
            }
        }
        out
    }

    pub fn monthly_csv(&self) -> String {
        let mut out = String::from("method,month,days,scheduling,extra,total\n");
        for r in &self.runs {
            let mut months: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
            for d in &r.days {
                let m = month_of(r.first_day + d.day as u64);
                let l = &d.settlement.ledger;
                match months.iter_mut().find(|e| e.0 == m) {
                    Some(e) => {
                        e.1 += 1;
                        e.2 += l.total_scheduling();
                        e.3 += l.total_extra();
                        e.4 += l.total();
                    }
                    None => months.push((m, 1, l.total_scheduling(), l.total_extra(), l.total())),
                }
            }
            for (m, n, sch, extra, total) in months {
                writeln!(out, "{},{},{},{},{},{}", r.method, m, n, f(sch), f(extra), f(total)).unwrap();
            }
        }
        out
    }

    /// Daily averages per cost category; rewards are positive amounts.
    pub fn categories_csv(&self) -> String {
        let mut out =
            String::from("method,grid,gas,ev_reward,tes_reward,renewable_reward,extra,adjustment,total\n");
        for r in &self.runs {
            let b = r.mean_breakdown();
            let n = r.days.len().max(1) as f64;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.method,
                f(b.grid),
                f(b.gas),
                f(b.ev_reward),
                f(b.tes_reward),
                f(b.renewable_reward),
                f(r.mean_extra_cost()),
                f(r.total_adjustment_cost() / n),
                f(r.mean_daily_cost()),
            )
            .unwrap();
        }
        out
    }

    pub fn comparison_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for r in &self.runs {
            writeln!(out, "{}_mean_daily_cost,{}", r.method, f(r.mean_daily_cost())).unwrap();
            writeln!(out, "{}_mean_daily_extra_cost,{}", r.method, f(r.mean_extra_cost())).unwrap();
            writeln!(out, "{}_adjustment_cost,{}", r.method, f(r.total_adjustment_cost())).unwrap();
        }
        if let Some(x) = self.extra_cost_reduction() {
            writeln!(out, "extra_cost_reduction,{}", f(x)).unwrap();
        }
        out
    }

    /// Writes `hourly.csv`, `daily.csv`, `monthly.csv`, `categories.csv` and
    /// `comparison.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), SimError> {
        std::fs::create_dir_all(dir).map_err(|source| SimError::Io { path: dir.to_path_buf(), source })?;
        let tables = [
            ("hourly.csv", self.hourly_csv()),
            ("daily.csv", self.daily_csv()),
            ("monthly.csv", self.monthly_csv()),
            ("categories.csv", self.categories_csv()),
            ("comparison.csv", self.comparison_csv()),
        ];
        for (name, body) in tables {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|source| SimError::Io { path, source })?;
        }
        Ok(())
    }
}
