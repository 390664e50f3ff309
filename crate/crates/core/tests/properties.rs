use mscet::baselines::{run_sgrr, SgrrConfig};
use mscet::latency::{cs_upper_bound, es_upper_bound, processing_delay, resolve};
use mscet::oracle::exhaustive_small_schedule;
use mscet::radio::{edge_comm_delay, shannon_rate};
use mscet::scenario::{EconParams, RadioParams};
use mscet::schedule::{default_init, run_mscet, run_variant, InitPoint, Variant};
use mscet::solvers::{
    bisection_maximize, ga_solve_alpha_c, ipm_solve_f, kkt_maximize, RatioProblem, ResourceItem,
    SolverConfig,
};
use mscet::utility::{qos_utility, rates_for};
use mscet::{
    check_constraints, generate_scenario, system_utility, GenConfig, OffloadDecision, RegionKind,
    Scenario, TaskSpec,
};
use proptest::prelude::*;

fn scenario(seed: u64, n: usize, overlapping: bool) -> Scenario {
    let region = if overlapping {
        RegionKind::Overlapping
    } else {
        RegionKind::General
    };
    generate_scenario(
        &GenConfig {
            vehicles: n,
            region,
            ..GenConfig::default()
        },
        seed,
    )
    .unwrap()
}

/// Default decisions with ratios and resource replaced from `mix`.
fn random_decisions(sc: &Scenario, mix: &[(f64, f64, f64)]) -> Vec<OffloadDecision> {
    let cap = sc.rsus[0].es_capacity_hz;
    default_init(sc)
        .unwrap()
        .into_iter()
        .zip(mix.iter().cycle())
        .map(|(d, &(a, b, f))| OffloadDecision {
            alpha_e: a,
            alpha_c: b * (1.0 - a),
            resource: (0.01 + f) * cap,
            ..d
        })
        .collect()
}

fn ratio_problem() -> impl Strategy<Value = RatioProblem> {
    (
        0.0f64..30.0,
        -5.0f64..10.0,
        0.0f64..5.0,
        1.0f64..6.0,
        0.0f64..1.0,
    )
        .prop_map(|(gain, omega, delta, deadline, upper)| RatioProblem {
            gain,
            omega,
            delta,
            deadline,
            upper,
        })
}

fn ratio_mix() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn edge_upload_is_linear_in_ratio(bits in 1e6f64..2e8, rate in 1e5f64..1e8, a in 0.0f64..0.99) {
        let task = TaskSpec::new(bits, 5.0, 5.0).unwrap();
        let h = 0.01;
        let d0 = edge_comm_delay(a, &task, rate).unwrap();
        let d1 = edge_comm_delay(a + h, &task, rate).unwrap();
        prop_assert!(d0 >= 0.0);
        let slope = (d1 - d0) / h;
        prop_assert!((slope - bits / rate).abs() <= 1e-6 * bits / rate);
    }

    #[test]
    fn shannon_rate_monotone(p in 0.01f64..1.0, g in 1e-8f64..1e-3, ip in 0.0f64..1.0, ig in 1e-9f64..1e-4, k in 1.01f64..3.0) {
        let radio = RadioParams::default();
        let base = shannon_rate(p, g, &[(ip, ig)], &radio);
        prop_assert!(shannon_rate(p, g, &[(ip * k + 1e-3, ig)], &radio) < base);
        prop_assert!(shannon_rate(p * k, g, &[(ip, ig)], &radio) > base);
    }

    #[test]
    fn delay_is_max_of_branches(seed in 0u64..1000, n in 1usize..8, overlapping in any::<bool>(), mix in ratio_mix()) {
        let sc = scenario(seed, n, overlapping);
        let ds = random_decisions(&sc, &mix);
        let rates = rates_for(&ds, &sc).unwrap();
        for ((d, v), &rate) in ds.iter().zip(&sc.vehicles).zip(&rates) {
            let r = resolve(d, &sc, v, rate).unwrap();
            let b = r.view.branches(d.alpha_e, d.alpha_c, d.resource);
            let inner = r.view.delay(d.alpha_e, d.alpha_c, d.resource);
            prop_assert_eq!(inner, b.local.max(b.edge).max(b.cloud));
            prop_assert!(inner >= b.local && inner >= b.edge && inner >= b.cloud);
            let t = processing_delay(d, &sc, v, rate).unwrap();
            prop_assert!(t >= inner && t >= 0.0);
        }
    }

    #[test]
    fn bounds_dominate_delay(seed in 0u64..1000, n in 1usize..8, overlapping in any::<bool>(), mix in ratio_mix()) {
        let sc = scenario(seed, n, overlapping);
        let ds = random_decisions(&sc, &mix);
        let rates = rates_for(&ds, &sc).unwrap();
        for ((d, v), &rate) in ds.iter().zip(&sc.vehicles).zip(&rates) {
            let t = processing_delay(d, &sc, v, rate).unwrap();
            prop_assert!(cs_upper_bound(d, &sc, v, rate).unwrap().bound >= t);
            prop_assert!(es_upper_bound(d, &sc, v, rate, 1.0).unwrap().bound >= t);
        }
    }

    #[test]
    fn delay_is_continuous(seed in 0u64..500, a in 0.05f64..0.9, b in 0.05f64..0.9, f in 0.1f64..1.0) {
        let sc = scenario(seed, 1, false);
        let d = random_decisions(&sc, &[(a, b, f)]).remove(0);
        let rate = rates_for(std::slice::from_ref(&d), &sc).unwrap()[0];
        let v = &sc.vehicles[0];
        let t = processing_delay(&d, &sc, v, rate).unwrap();
        for h in [1e-7, -1e-7] {
            let near = OffloadDecision { alpha_e: d.alpha_e + h, resource: d.resource * (1.0 + h), ..d.clone() };
            let tn = processing_delay(&near, &sc, v, rate).unwrap();
            prop_assert!((tn - t).abs() <= 1e-4 * t.max(1.0));
        }
    }

    #[test]
    fn qos_is_concave(t in 0.0f64..6.5, h in 1e-3f64..0.2) {
        let econ = EconParams::default();
        prop_assume!(t - h >= 0.0 && t + h < 1.0 + econ.qos_shift);
        let q = |x: f64| qos_utility(x, &econ).unwrap();
        prop_assert!(q(t + h) - 2.0 * q(t) + q(t - h) < 0.0);
    }

    #[test]
    fn system_utility_ignores_vehicle_order(seed in 0u64..500, n in 2usize..8, overlapping in any::<bool>(), mix in ratio_mix()) {
        let sc = scenario(seed, n, overlapping);
        let ds = random_decisions(&sc, &mix);
        let base = system_utility(&ds, &sc).unwrap().total;
        let mut rev = sc.clone();
        rev.vehicles.reverse();
        let rev_ds: Vec<_> = ds.iter().rev().cloned().collect();
        let other = system_utility(&rev_ds, &rev).unwrap().total;
        prop_assert!((base - other).abs() <= 1e-9 * base.abs().max(1.0));
    }

    #[test]
    fn ratio_solvers_stay_feasible(p in ratio_problem(), seed in any::<u64>()) {
        let econ = EconParams::default();
        let cfg = SolverConfig { seed, ga_generations: 30, ..SolverConfig::default() };
        let ga = ga_solve_alpha_c(&[p], &[0], &econ, &cfg)[0];
        let kkt = kkt_maximize(&p, &econ);
        let bis = bisection_maximize(&p, &econ);
        let any_feasible = p.feasible_interval().is_some();
        prop_assert_eq!(ga.feasible, any_feasible);
        prop_assert_eq!(bis.feasible, any_feasible);
        if any_feasible {
            prop_assert!(p.is_feasible(ga.value));
            prop_assert!(p.is_feasible(kkt.value));
            prop_assert!(p.is_feasible(bis.value));
        }
    }

    #[test]
    fn resource_solver_respects_budget_and_deadlines(
        items in prop::collection::vec((0.0f64..1.0, 1e7f64..1e9, 3.0f64..6.0, 0.0f64..3.0), 1..6),
        budget in 1e8f64..3e9,
    ) {
        let items: Vec<ResourceItem> = items
            .into_iter()
            .map(|(comm, work, deadline, floor)| ResourceItem { comm, work, deadline, floor })
            .collect();
        let econ = EconParams::default();
        if let Ok(out) = ipm_solve_f(&items, budget, &econ, &SolverConfig::default()) {
            prop_assert!(out.f.iter().sum::<f64>() <= budget * (1.0 + 1e-9));
            prop_assert!(out.min_slack > 0.0);
            for (it, &f) in items.iter().zip(&out.f) {
                prop_assert!(it.delay(f) <= it.deadline * (1.0 + 1e-9));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schedule_is_hygienic_and_never_below_its_start(seed in 0u64..10_000, n in 1usize..12, overlapping in any::<bool>(), init_seed in any::<u64>()) {
        let sc = scenario(seed, n, overlapping);
        let cfg = SolverConfig::default();
        let init = InitPoint::random(n, init_seed);
        let out = run_mscet(&sc, &cfg, Some(&init)).unwrap();
        let start = out.report.trace[0].utility;
        prop_assert!(out.utility() >= start - 1e-9);
        let caps = cfg.max_outer_iters * (2 + cfg.max_mid_iters * 3) + 1;
        prop_assert!(out.report.trace.len() <= caps);
        let rep = check_constraints(&out.decisions, &sc).unwrap();
        for (d, ok) in out.decisions.iter().zip(&rep.vehicle_ok) {
            prop_assert!(*ok || !d.feasible);
        }
        let again = run_mscet(&sc, &cfg, Some(&init)).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&out.decisions).unwrap(),
            serde_json::to_string(&again.decisions).unwrap()
        );
    }

    #[test]
    fn comparison_schedules_are_hygienic(seed in 0u64..10_000, n in 1usize..12) {
        let sc = scenario(seed, n, false);
        let cfg = SolverConfig::default();
        let outs = [
            run_sgrr(&sc, &SgrrConfig::default()).unwrap(),
            run_variant(&sc, &cfg, &Variant::nearby(), None).unwrap(),
            run_variant(&sc, &cfg, &Variant::edge_terminal(), None).unwrap(),
            run_variant(&sc, &cfg, &Variant::cloud_terminal(), None).unwrap(),
        ];
        for out in &outs {
            let rep = check_constraints(&out.decisions, &sc).unwrap();
            for (d, ok) in out.decisions.iter().zip(&rep.vehicle_ok) {
                prop_assert!(*ok || !d.feasible);
            }
        }
        prop_assert!(outs[2].decisions.iter().all(|d| d.alpha_c.to_bits() == 0));
        prop_assert!(outs[3].decisions.iter().all(|d| d.alpha_e.to_bits() == 0 && d.resource.to_bits() == 0));
    }

    #[test]
    fn exhaustive_oracle_is_deterministic(seed in 0u64..1000, n in 1usize..3, overlapping in any::<bool>()) {
        let sc = scenario(seed, n, overlapping);
        let a = exhaustive_small_schedule(&sc, None, 12).unwrap();
        let b = exhaustive_small_schedule(&sc, None, 12).unwrap();
        prop_assert_eq!(a.decisions, b.decisions);
    }
}
