use ies_sched::data::{
    augment_forecasts, combine, generate_base_days, load_errors, load_profiles, sample_errors, save_errors,
    save_profiles, Dataset, DatasetSizes, ErrorSpec, ProfileSpec, SeriesErrorSpec, SeriesShape,
};
use ies_sched::error::DataError;
use ies_sched::model::{apply_errors, DayProfile, ErrorSample};
use proptest::prelude::*;

#[test]
fn noiseless_days_repeat_and_empty_shapes_are_zero() {
    let mut spec = ProfileSpec::default();
    for s in [&mut spec.elec_load, &mut spec.heat_load, &mut spec.wind, &mut spec.pv] {
        s.day_noise = 0.0;
        s.slot_noise = 0.0;
    }
    assert_eq!(spec.day(5, 17), spec.day(5, 17));
    // without noise the seed plays no part
    assert_eq!(spec.day(5, 17), spec.day(6, 17));

    let zero = ProfileSpec {
        elec_load: SeriesShape::flat(0.0, 950.0),
        heat_load: SeriesShape::flat(0.0, 700.0),
        wind: SeriesShape::flat(0.0, 200.0),
        pv: SeriesShape::flat(0.0, 200.0),
        ..ProfileSpec::default()
    };
    for d in generate_base_days(&zero, 10, 3) {
        assert_eq!(d, DayProfile::zeros(24));
    }
}

#[test]
fn electricity_mean_tracks_the_base_level() {
    let spec = ProfileSpec::default();
    let days = generate_base_days(&spec, 1000, 12);
    let n = (days.len() * 24) as f64;
    let mean: f64 = days.iter().flat_map(|d| d.elec_load.iter()).sum::<f64>() / n;
    let base = spec.elec_load.base;
    assert!((mean - base).abs() <= 0.05 * base, "mean {mean} vs base {base}");
}

#[test]
fn generated_values_respect_caps() {
    for spec in [ProfileSpec::default(), ProfileSpec::large()] {
        for d in generate_base_days(&spec, 365, 2) {
            for (values, shape) in d.series().into_iter().zip(spec.shapes()) {
                assert!(values.iter().all(|&v| (0.0..=shape.cap).contains(&v)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn augmented_days_stay_in_the_envelope(seed in 0u64..10_000, n_base in 2usize..8) {
        let base = generate_base_days(&ProfileSpec::default(), n_base, seed);
        for day in augment_forecasts(&base, 20, seed) {
            for (s, values) in day.series().into_iter().enumerate() {
                for (t, &v) in values.iter().enumerate() {
                    let lo = base.iter().map(|b| b.series()[s][t]).fold(f64::INFINITY, f64::min);
                    let hi = base.iter().map(|b| b.series()[s][t]).fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
                }
            }
        }
    }
}

#[test]
fn unit_weight_reproduces_a_base_day() {
    let base = generate_base_days(&ProfileSpec::default(), 3, 8);
    assert_eq!(combine(&base, &[(0, 1.0), (1, 0.0)]), base[0]);
}

#[test]
fn full_pool_size() {
    let base = generate_base_days(&ProfileSpec::default(), 4, 1);
    assert_eq!(augment_forecasts(&base, 56_172, 1).len(), 56_172);
    assert_eq!(DatasetSizes::default().pool, 56_172);
    assert_eq!(DatasetSizes::default().errors, 233);
}

#[test]
fn cap_bounds_every_error() {
    let spec = ErrorSpec::default().with_cap(0.45);
    let worst = sample_errors(&spec, 100_000, 21).iter().map(ErrorSample::max_abs).fold(0.0, f64::max);
    assert!(worst <= 0.45);
    // the default model does reach the clip
    let wide = ErrorSpec { wind: SeriesErrorSpec::gaussian(0.0, 0.3, 0.0), ..spec };
    assert_eq!(sample_errors(&wide, 1000, 21).iter().map(ErrorSample::max_abs).fold(0.0, f64::max), 0.45);
}

#[test]
fn uncorrelated_errors_have_no_lag_one_correlation() {
    let spec = ErrorSpec { elec: SeriesErrorSpec::gaussian(0.0, 0.1, 0.0), ..ErrorSpec::default() };
    let samples = sample_errors(&spec, 100_000, 5);
    let n = (samples.len() * 24) as f64;
    let mean = samples.iter().flat_map(|e| e.elec.iter()).sum::<f64>() / n;
    let var = samples.iter().flat_map(|e| e.elec.iter()).map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut pairs = 0.0;
    for e in &samples {
        for w in e.elec.windows(2) {
            cov += (w[0] - mean) * (w[1] - mean);
            pairs += 1.0;
        }
    }
    let r = cov / pairs / var;
    assert!(r.abs() <= 0.05, "lag-1 autocorrelation {r}");

    let correlated = ErrorSpec { elec: SeriesErrorSpec::gaussian(0.0, 0.1, 0.6), ..ErrorSpec::default() };
    let samples = sample_errors(&correlated, 20_000, 5);
    let (mut num, mut den) = (0.0, 0.0);
    for e in &samples {
        for w in e.elec.windows(2) {
            num += w[0] * w[1];
        }
        den += e.elec[..23].iter().map(|v| v * v).sum::<f64>();
    }
    assert!((num / den - 0.6).abs() < 0.05);
}

#[test]
fn applying_errors() {
    let f = DayProfile::from_series([vec![100.0; 24], vec![100.0; 24], vec![100.0; 24], vec![100.0; 24]]);
    assert_eq!(apply_errors(&f, &ErrorSample::zeros(24)).unwrap(), f);
    let up = ErrorSample::from_series([vec![0.1; 24], vec![0.0; 24], vec![0.0; 24], vec![0.0; 24]]);
    let a = apply_errors(&f, &up).unwrap();
    assert!((a.elec_load[0] - 110.0).abs() < 1e-12);
    let down = ErrorSample::from_series([vec![-0.45; 24], vec![-0.45; 24], vec![0.0; 24], vec![0.0; 24]]);
    let a = apply_errors(&f, &down).unwrap();
    assert!((a.heat_load[7] - 55.0).abs() < 1e-12);
    assert!(apply_errors(&f, &ErrorSample::zeros(23)).is_err());
}

#[test]
fn csv_round_trip_keeps_the_hash() {
    let sizes = DatasetSizes { base_days: 12, pool: 30, errors: 9 };
    let d = Dataset::synthetic(&ProfileSpec::default(), &ErrorSpec::default(), sizes, 44).unwrap();
    let dir = tempfile::tempdir().unwrap();
    d.save_dir(dir.path()).unwrap();
    let back = Dataset::load_dir(dir.path(), 24).unwrap();
    assert_eq!(back.hash(), d.hash());
    assert_eq!(back.forecasts, d.forecasts);

    let again = Dataset::synthetic(&ProfileSpec::default(), &ErrorSpec::default(), sizes, 44).unwrap();
    assert_eq!(again.hash(), d.hash());
    let other = Dataset::synthetic(&ProfileSpec::default(), &ErrorSpec::default(), sizes, 45).unwrap();
    assert_ne!(other.hash(), d.hash());
}

#[test]
fn short_day_is_rejected_by_number() {
    let days = generate_base_days(&ProfileSpec::default(), 3, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    save_profiles(&path, &days).unwrap();
    // drop the last slot of day 2
    let text = std::fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("2,24,")).collect();
    std::fs::write(&path, kept.join("\n") + "\n").unwrap();
    match load_profiles(&path, 24) {
        Err(DataError::Schema { message, .. }) => assert!(message.contains("day 2"), "{message}"),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn malformed_cells_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    save_errors(&path, &sample_errors(&ErrorSpec::default(), 2, 1)).unwrap();
    let mut lines: Vec<String> = std::fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
    lines[5] = "1,5,abc,0,0,0".into();
    std::fs::write(&path, lines.join("\n")).unwrap();
    match load_errors(&path, 24) {
        Err(DataError::Parse { line, .. }) => assert_eq!(line, 6),
        other => panic!("expected a parse error, got {other:?}"),
    }
    std::fs::write(&path, "day,slot,delta_E\n1,1,0\n").unwrap();
    assert!(matches!(load_errors(&path, 24), Err(DataError::Schema { .. })));
}

#[test]
fn ingested_day_sums_to_the_column_sum() {
    // an hourly export with ragged decimal places, as a meter system might write it
    let mut text = String::from("day,slot,L_E_kwh,L_H_kwh,S_W_kwh,S_PV_kwh\n");
    let mut column = 0.0;
    for t in 1..=24 {
        let load = format!("{}.{:03}", 400 + 7 * t, (t * 37) % 1000);
        column += load.parse::<f64>().unwrap();
        text.push_str(&format!("1,{t},{load},250.5,{}.25,0\n", 10 + t));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("export.csv");
    std::fs::write(&path, text).unwrap();
    let days = load_profiles(&path, 24).unwrap();
    assert_eq!(days.len(), 1);
    let total: f64 = days[0].elec_load.iter().sum();
    assert!((total - column).abs() <= 1e-9 * column);
    assert_eq!(days[0].heat_load.iter().sum::<f64>(), 250.5 * 24.0);
}
