use ies_sched::benchmark::{build_day_ahead_lp, churn, BenchmarkScheduler};
use ies_sched::data::{generate_days, ProfileSpec};
use ies_sched::lp::{solve, SolveOptions};
use ies_sched::model::{check_feasibility, DayProfile, PriceBook, SystemConfig};
use proptest::prelude::*;

fn synthetic_day(seed: u64, day: u64) -> DayProfile {
    generate_days(&ProfileSpec::default(), day, 1, seed).remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimal_schedules_pass_feasibility(seed in 0u64..1_000, day in 0u64..365, large in any::<bool>()) {
        let c = if large { SystemConfig::large() } else { SystemConfig::default() };
        let spec = if large { ProfileSpec::large() } else { ProfileSpec::default() };
        let f = generate_days(&spec, day, 1, seed).remove(0);
        let lp = BenchmarkScheduler::new(c.clone(), PriceBook::uk_2019(24));
        let (s, report) = lp.solve(&f).unwrap();
        prop_assert!(report.is_optimal());
        prop_assert!(check_feasibility(&c, &f, &s, 1e-6).unwrap().is_empty());
        // the direction plan leaves no slot charging and discharging at once
        prop_assert!(churn(&c, &report.assignment) <= 1e-6);
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let c = SystemConfig::default();
    let p = PriceBook::uk_2019(24);
    let f = synthetic_day(3, 40);
    let lp = BenchmarkScheduler::new(c.clone(), p.clone());
    let (s1, r1) = lp.solve(&f).unwrap();
    let (s2, r2) = lp.solve(&f).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(r1.assignment.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), r2.assignment.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(r1.objective.to_bits(), r2.objective.to_bits());
    assert_eq!(r1.iterations, r2.iterations);
}

#[test]
fn relaxation_churn_is_measurable() {
    let c = SystemConfig::default();
    let p = PriceBook::uk_2019(24);
    let f = synthetic_day(5, 100);
    let lp = build_day_ahead_lp(&c, &f, &p);
    let report = solve(&lp, &SolveOptions::default());
    assert!(report.is_optimal());
    let planned = BenchmarkScheduler::new(c.clone(), p).solve(&f).unwrap().1;
    // the relaxation may only be cheaper, never dearer, than the planned problem
    assert!(report.objective <= planned.objective + 1e-6);
    let ch = churn(&c, &report.assignment);
    assert!(ch.is_finite() && ch >= 0.0);
}

#[test]
fn lp_dump_lists_every_row() {
    let c = SystemConfig::default();
    let lp = build_day_ahead_lp(&c, &synthetic_day(1, 1), &PriceBook::uk_2019(24));
    let text = lp.to_lp_format();
    assert!(text.starts_with("Minimize"));
    for con in &lp.constraints {
        let named = |suffix: &str| text.contains(&format!(" {}{suffix}:", con.name));
        assert!(named("") || named("_lo") || named("_hi"), "{}", con.name);
    }
}
