use ies_sched::model::{
    check_feasibility, extra_cost, mismatch, soc_trajectory, total_cost_day, DayProfile, PriceBook, Schedule,
    ServiceWindow, SystemConfig,
};
use proptest::prelude::*;

const T: usize = 24;

fn day() -> impl Strategy<Value = DayProfile> {
    (
        prop::collection::vec(0.0..950.0f64, T),
        prop::collection::vec(0.0..700.0f64, T),
        prop::collection::vec(0.0..250.0f64, T),
        prop::collection::vec(0.0..250.0f64, T),
    )
        .prop_map(|(e, h, w, p)| DayProfile::from_series([e, h, w, p]))
}

/// Arbitrary schedule, not necessarily feasible.
fn schedule() -> impl Strategy<Value = Schedule> {
    (
        prop::collection::vec(0.0..1200.0f64, T),
        prop::collection::vec(0.0..1300.0f64, T),
        prop::collection::vec(0.0..1.0f64, T),
        prop::collection::vec(prop::collection::vec(-80.0..80.0f64, T), 6),
    )
        .prop_map(|(grid, gas, share, flows)| {
            let c = SystemConfig::default();
            let mut s = Schedule::zeros(&c);
            s.grid_import = grid;
            s.gas_import = gas;
            s.boiler_share = share.iter().map(|v| 1.0 - v).collect();
            s.chp_share = share;
            s.ev_flow = flows[..4].to_vec();
            s.tes_flow = flows[4..].to_vec();
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ledger_adds_up_per_slot(s in schedule(), actual in day()) {
        let c = SystemConfig::default();
        let l = total_cost_day(&c, &s, &actual, &PriceBook::uk_2019(T)).unwrap();
        for t in 0..T {
            let parts = l.scheduling[t] + l.extra_elec[t] + l.extra_gas[t];
            prop_assert!((l.all[t] - parts).abs() <= 1e-12 * l.all[t].abs().max(1.0));
        }
    }

    #[test]
    fn balanced_schedule_settles_without_mismatch(
        f in day(),
        chp in prop::collection::vec(0.0..300.0f64, T),
        flows in prop::collection::vec(prop::collection::vec(-40.0..40.0f64, T), 6),
    ) {
        let c = SystemConfig::default();
        let mut s = Schedule::zeros(&c);
        s.ev_flow = flows[..4].to_vec();
        s.tes_flow = flows[4..].to_vec();
        for t in 0..T {
            let ev: f64 = s.ev_flow.iter().map(|f| f[t]).sum();
            let tes: f64 = s.tes_flow.iter().map(|f| f[t]).sum();
            let ren = c.clip_wind(f.wind[t]) + c.clip_pv(f.pv[t]);
            s.grid_import[t] = (f.elec_load[t] - c.eta_chp_elec * chp[t] - ren - ev) / c.eta_transformer;
            let boiler = (f.heat_load[t] - c.eta_chp_heat * chp[t] - tes) / c.eta_boiler;
            s.gas_import[t] = chp[t] + boiler;
            s.chp_share[t] = chp[t] / s.gas_import[t];
            s.boiler_share[t] = boiler / s.gas_import[t];
        }
        let l = total_cost_day(&c, &s, &f, &PriceBook::uk_2019(T)).unwrap();
        for t in 0..T {
            prop_assert!(l.mismatch_elec[t].abs() <= 1e-9 * f.elec_load[t].max(1.0));
            prop_assert!(l.mismatch_gas[t].abs() <= 1e-9 * f.heat_load[t].max(1.0));
        }
        prop_assert!(l.total_extra().abs() <= 1e-9 * l.total().abs().max(1.0));
    }

    #[test]
    fn zero_sum_flows_return_to_start(
        steps in prop::collection::vec(-40i32..40, 1..23),
        soc0 in 40i32..200,
    ) {
        let c = SystemConfig::default();
        let mut flows: Vec<f64> = steps.iter().map(|&v| v as f64).collect();
        flows.push(-flows.iter().sum::<f64>());
        let n = flows.len();
        flows.resize(T, 0.0);
        let soc = soc_trajectory(&c, &flows, ServiceWindow::new(1, n), soc0 as f64);
        prop_assert_eq!(*soc.last().unwrap(), soc0 as f64);
    }

    #[test]
    fn mismatch_is_affine_in_each_input(s in schedule(), a in day(), t in 0..T, h in 1.0..50.0f64) {
        let c = SystemConfig::default();
        let (e0, g0) = mismatch(&c, &s, &a, t).unwrap();
        let eta = c.eta_transformer;

        let mut a1 = a.clone();
        a1.elec_load[t] += h;
        let (e1, g1) = mismatch(&c, &s, &a1, t).unwrap();
        prop_assert!(((e1 - e0) / h - 1.0 / eta).abs() < 1e-9);
        prop_assert_eq!(g1, g0);

        let mut a2 = a.clone();
        a2.heat_load[t] += h;
        let (_, g2) = mismatch(&c, &s, &a2, t).unwrap();
        prop_assert!(((g2 - g0) / h - 1.0 / c.eta_boiler).abs() < 1e-9);

        let mut s1 = s.clone();
        s1.grid_import[t] += h;
        let (e3, _) = mismatch(&c, &s1, &a, t).unwrap();
        prop_assert!(((e3 - e0) / h + 1.0).abs() < 1e-9);

        let mut s2 = s.clone();
        s2.ev_flow[1][t] += h;
        let (e4, _) = mismatch(&c, &s2, &a, t).unwrap();
        prop_assert!(((e4 - e0) / h + 1.0 / eta).abs() < 1e-9);

        let mut s3 = s.clone();
        s3.gas_import[t] += h;
        let (e5, g5) = mismatch(&c, &s3, &a, t).unwrap();
        prop_assert!(((e5 - e0) / h + c.eta_chp_elec * s.chp_share[t] / eta).abs() < 1e-9);
        let heat = c.eta_chp_heat * s.chp_share[t] + c.eta_boiler * s.boiler_share[t];
        prop_assert!(((g5 - g0) / h + heat / c.eta_boiler).abs() < 1e-9);

        // renewables enter below their capacity
        let mut a3 = a.clone();
        a3.wind[t] = 10.0;
        let mut a4 = a3.clone();
        a4.wind[t] = 10.0 + h.min(100.0);
        let (e6, _) = mismatch(&c, &s, &a3, t).unwrap();
        let (e7, _) = mismatch(&c, &s, &a4, t).unwrap();
        prop_assert!(((e7 - e6) / h.min(100.0) + 1.0 / eta).abs() < 1e-9);
    }

    #[test]
    fn feasibility_is_monotone_in_tolerance(s in schedule(), f in day(), k in 0u32..6) {
        let c = SystemConfig::default();
        let tight = 10f64.powi(-(k as i32) - 3);
        let loose = tight * 100.0;
        let a = check_feasibility(&c, &f, &s, tight).unwrap();
        let b = check_feasibility(&c, &f, &s, loose).unwrap();
        for v in &b {
            prop_assert!(a.iter().any(|w| w.kind == v.kind && w.slot == v.slot && w.device == v.device));
        }
    }
}

#[test]
fn extra_cost_is_continuous_at_zero() {
    let p = PriceBook::uk_2019(T);
    assert_eq!(extra_cost(&p, 0.0, 0.0, 0), (0.0, 0.0));
    let (up, _) = extra_cost(&p, 1e-12, 0.0, 0);
    let (down, _) = extra_cost(&p, -1e-12, 0.0, 0);
    assert!(up.abs() < 1e-13 && down.abs() < 1e-13);
}

#[test]
fn single_slot_composition() {
    let mut c = SystemConfig::default();
    c.slots = 1;
    c.evs.clear();
    c.tess.clear();
    let mut s = Schedule::zeros(&c);
    s.grid_import[0] = 100.0;
    let mut p = PriceBook::uk_2019(1);
    p.reward_wind = 0.0;
    p.reward_pv = 0.0;
    // shortfall of 10 kWh at the transformer
    let load = c.eta_transformer * 110.0;
    let actual = DayProfile::from_series([vec![load], vec![0.0], vec![0.0], vec![0.0]]);
    let l = total_cost_day(&c, &s, &actual, &p).unwrap();
    assert!((l.mismatch_elec[0] - 10.0).abs() < 1e-12);
    assert!((l.total() - 3.68).abs() < 1e-12);
}
