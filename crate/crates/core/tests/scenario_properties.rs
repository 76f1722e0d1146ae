use gearsync::dynamics::simulate_open_loop;
use gearsync::fis::RULES;
use gearsync::scenario::{
    build_scenario, compare_all, decode, optimize_controller, run_closed_loop, ControllerKind,
    Uncertainty,
};
use gearsync::{
    Controller, ControllerOptions, ControllerSpec, CostWeights64, IT2FisConfig, IT2GaussianMF,
    ParamVector, PidGains, RunOptions64, Scenario64, SpurGearParams64, WoaSettings64,
};
use proptest::prelude::*;

fn short(id: u32, horizon: f64) -> Scenario64 {
    let mut s = build_scenario(id).unwrap();
    s.horizon = horizon;
    s
}

fn small_woa(seed: u64) -> WoaSettings64 {
    WoaSettings64 {
        pop_size: 6,
        max_iters: 5,
        spiral_b: 1.0,
        seed,
        parallel: false,
    }
}

fn in_bounds(kind: ControllerKind) -> impl Strategy<Value = Vec<f64>> {
    let pairs: Vec<(f64, f64)> = kind.bounds::<f64>().pairs().to_vec();
    pairs
        .into_iter()
        .map(|(lo, hi)| (lo..=hi).boxed())
        .collect::<Vec<_>>()
}

#[test]
fn master_matches_open_loop_bitwise() {
    for id in [2, 3, 4] {
        let s = short(id, 20.0);
        let spec = ControllerSpec::Pid(PidGains::new(3.0, 1.0, 0.5).unwrap());
        let r = run_closed_loop(&s, &spec, &RunOptions64::default()).unwrap();
        let open = simulate_open_loop(
            s.reference_init,
            s.horizon,
            s.dt,
            &SpurGearParams64::nominal(),
        )
        .unwrap();
        let master = r.master.unwrap();
        assert_eq!(master.len(), open.len());
        for (m, o) in master.samples.iter().zip(&open.samples) {
            assert_eq!((m.tau, m.x1, m.x2), (o.tau, o.x1, o.x2));
        }
    }
}

#[test]
fn uncertainty_leaves_master_nominal() {
    let mut s = short(2, 10.0);
    let base = run_closed_loop(
        &s,
        &ControllerSpec::Pid(PidGains::zero()),
        &RunOptions64::default(),
    )
    .unwrap();
    s.uncertainty = Some(Uncertainty::new(0.2, -0.1, 0.1).unwrap());
    let perturbed = run_closed_loop(
        &s,
        &ControllerSpec::Pid(PidGains::zero()),
        &RunOptions64::default(),
    )
    .unwrap();
    assert_eq!(base.master, perturbed.master);
    assert_ne!(
        base.samples.last().unwrap().x1,
        perturbed.samples.last().unwrap().x1
    );
}

#[test]
fn synchronized_start_gives_zero_indices() {
    let mut s = short(2, 20.0);
    s.plant_init = s.reference_init;
    for spec in [
        ControllerSpec::Pid(PidGains::new(5.0, 2.0, 1.0).unwrap()),
        decode(
            ControllerKind::FpidT2,
            &vec![1.0; ControllerKind::FpidT2.dim()][..],
        )
        .unwrap(),
    ] {
        let r = run_closed_loop(&s, &spec, &RunOptions64::default()).unwrap();
        assert_eq!(r.report.iae, 0.0);
        assert_eq!(r.report.itae, 0.0);
    }
}

/// Independent closed loop with a type-1 controller evaluated by plain TS inference.
#[test]
fn fpid_loop_matches_oracle_controller() {
    let ce = [-1.5, 0.0, 1.0];
    let se = [0.8, 1.2, 0.6];
    let cd = [-1.0, 0.2, 2.0];
    let sd = [1.5, 0.7, 1.1];
    let kp = [1.0, 4.0, 2.0, 8.0, 0.5, 3.0, 6.0, 9.0, 0.0];
    let ki = [0.2, 0.4, 0.1, 0.3, 0.9, 0.6, 0.0, 0.5, 0.7];
    let kd = [2.0, 1.0, 0.5, 0.0, 3.0, 1.5, 2.5, 0.2, 1.0];
    let sets =
        |c: [f64; 3], s: [f64; 3]| [0, 1, 2].map(|k| IT2GaussianMF::type1(c[k], s[k]).unwrap());
    let cfg = IT2FisConfig::new(sets(ce, se), sets(cd, sd), kp, ki, kd, 0.3).unwrap();
    let mut ctrl =
        Controller::new(ControllerSpec::FpidT1(cfg), ControllerOptions::default()).unwrap();

    let ts = |e: f64, de: f64, th: &[f64; RULES]| {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let w = (-((e - ce[i]) / se[i]).powi(2)).exp()
                    * (-((de - cd[j]) / sd[j]).powi(2)).exp();
                num += th[3 * i + j] * w;
                den += w;
            }
        }
        num / den
    };
    let dt = 0.01;
    let (mut acc, mut prev): (f64, Option<f64>) = (0.0, None);
    for k in 0..1000 {
        let e = (k as f64 * 0.013).sin() * 2.0 + 0.3 * (k as f64 * 0.07).cos();
        let de = prev.map_or(0.0, |p| (e - p) / dt);
        let (p, i, d) = (ts(e, de, &kp), ts(e, de, &ki), ts(e, de, &kd));
        acc = (acc + i * e * dt).clamp(-50.0, 50.0);
        prev = Some(e);
        let want = p * e + acc + d * de;
        let got = ctrl.step(e, dt).u;
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
            "step {k}: {got} vs {want}"
        );
    }
}

#[test]
fn comparison_table_matches_rerun() {
    let scenarios = [short(1, 5.0), short(2, 5.0)];
    let woa = small_woa(4);
    let weights = CostWeights64::default();
    let opts = RunOptions64::default();
    let table = compare_all(&scenarios, &ControllerKind::ALL, &woa, &weights, &opts).unwrap();
    assert_eq!(table.entries.len(), 6);
    for entry in &table.entries {
        let s = scenarios.iter().find(|s| s.id == entry.scenario).unwrap();
        let again = optimize_controller(s, entry.controller, &woa, &weights, &opts).unwrap();
        assert_eq!(again.params, entry.params);
        let report = run_closed_loop(s, &again.params.decode().unwrap(), &opts)
            .unwrap()
            .report;
        assert_eq!(Some(report), entry.report);
        assert_eq!(report.iae + report.itae, entry.best_cost);
    }
    let mut par = woa;
    par.parallel = true;
    assert_eq!(
        compare_all(&scenarios, &ControllerKind::ALL, &par, &weights, &opts).unwrap(),
        table
    );
}

#[test]
fn tuned_pid_survives_parameter_uncertainty() {
    let s = short(1, 20.0);
    let tuned = optimize_controller(
        &s,
        ControllerKind::Pid,
        &small_woa(1),
        &CostWeights64::default(),
        &RunOptions64::default(),
    )
    .unwrap();
    let spec = tuned.params.decode().unwrap();
    for rel in [-0.2, 0.2] {
        let mut p = s.clone();
        p.uncertainty = Some(Uncertainty::new(rel, 0.0, 0.0).unwrap());
        let r = run_closed_loop(&p, &spec, &RunOptions64::default()).unwrap();
        assert!(r.report.iae.is_finite() && r.report.itae.is_finite());
    }
}

#[test]
fn tuned_fpid2_shrinks_sync_error() {
    let s = build_scenario(2).unwrap();
    let woa = WoaSettings64 {
        pop_size: 10,
        max_iters: 15,
        ..small_woa(0)
    };
    let tuned = optimize_controller(
        &s,
        ControllerKind::FpidT2,
        &woa,
        &CostWeights64::default(),
        &RunOptions64::default(),
    )
    .unwrap();
    let r = run_closed_loop(
        &s,
        &tuned.params.decode().unwrap(),
        &RunOptions64::default(),
    )
    .unwrap();
    let e0 = r.samples[0].error.abs();
    let tail = r.samples.last().unwrap().error.abs();
    assert!(tail < e0 / 10.0, "|e(T)| = {tail}, |e(0)| = {e0}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fpid2_vectors_round_trip(v in in_bounds(ControllerKind::FpidT2)) {
        let p = ParamVector::new(ControllerKind::FpidT2, v.clone()).unwrap();
        let spec = p.decode().unwrap();
        prop_assert_eq!(ParamVector::encode(&spec).values, v);
    }

    #[test]
    fn fpid1_vectors_round_trip(v in in_bounds(ControllerKind::FpidT1)) {
        let spec = decode(ControllerKind::FpidT1, &v).unwrap();
        prop_assert_eq!(ParamVector::encode(&spec).values, v);
    }

    #[test]
    fn pid_vectors_round_trip(v in in_bounds(ControllerKind::Pid)) {
        let spec = decode(ControllerKind::Pid, &v).unwrap();
        prop_assert_eq!(ParamVector::encode(&spec).values, v);
    }
}
