use gearsync::dynamics::{
    divergence_metric, rk4_step, rk4_step_with, simulate_open_loop, STIFFNESS,
};
use gearsync::{GearState, SpurGearParams64};
use proptest::prelude::*;

/// Resonant forced oscillator `x'' + x = cos t`, whose solution is
/// `x0 cos t + v0 sin t + t sin t / 2`.
fn forced_error(dt: f64, t_end: f64) -> f64 {
    let (x0, v0) = (0.3, -0.2);
    let n = (t_end / dt).round() as usize;
    let mut y = [x0, v0];
    for k in 0..n {
        y = rk4_step_with(k as f64 * dt, y, dt, |t, y| [y[1], -y[0] + t.cos()]);
    }
    let t = n as f64 * dt;
    let x = x0 * t.cos() + v0 * t.sin() + 0.5 * t * t.sin();
    let v = -x0 * t.sin() + v0 * t.cos() + 0.5 * t.sin() + 0.5 * t * t.cos();
    ((y[0] - x).powi(2) + (y[1] - v).powi(2)).sqrt()
}

#[test]
fn rk4_is_fourth_order() {
    for &dt in &[0.1, 0.05, 0.025] {
        let ratio = forced_error(dt, 10.0) / forced_error(dt / 2.0, 10.0);
        assert!(
            (3.5..=4.5).contains(&ratio.log2()),
            "dt {dt}: ratio {ratio}"
        );
    }
}

fn energy(x1: f64, x2: f64) -> f64 {
    0.5 * x2 * x2 - 0.5 * STIFFNESS * x1 * x1 + 0.25 * STIFFNESS * x1.powi(4)
}

fn conservative() -> SpurGearParams64 {
    SpurGearParams64 {
        epsilon: 0.0,
        ..SpurGearParams64::nominal()
    }
}

#[test]
fn energy_conserved_without_damping_or_forcing() {
    let p = conservative();
    let drift = |dt: f64| {
        let mut s = GearState::at_rest(0.5, 0.3);
        let h0 = energy(s.x1, s.x2);
        let n = (10.0 / dt).round() as usize;
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            s = rk4_step(&s, dt, 0.0, &p).unwrap();
            worst = worst.max((energy(s.x1, s.x2) - h0).abs());
        }
        worst
    };
    let coarse = drift(0.02);
    let fine = drift(0.01);
    assert!(fine < 1e-9, "drift {fine}");
    assert!(coarse / fine > 8.0, "drift ratio {}", coarse / fine);
}

#[test]
fn nearby_starts_separate_tenfold_and_stay_bounded() {
    let p = SpurGearParams64::nominal();
    let runs: Vec<_> = [0.8, 1.0, 1.2]
        .iter()
        .map(|&x2| simulate_open_loop((-2.0, x2), 500.0, 0.01, &p).unwrap())
        .collect();
    let starts = [0.8, 1.0, 1.2];
    for i in 0..3 {
        assert!(runs[i].max_abs_x1() < 100.0);
        for j in i + 1..3 {
            let d = divergence_metric(&runs[i], &runs[j]).unwrap();
            let offset = starts[j] - starts[i];
            assert!(
                d >= 10.0 * offset,
                "x2(0) {} vs {}: {d} < {}",
                starts[i],
                starts[j],
                10.0 * offset
            );
        }
    }
}

#[test]
fn f32_and_f64_agree_over_short_horizon() {
    let p64 = SpurGearParams64::nominal();
    let p32 = gearsync::SpurGearParams32::nominal();
    let a = simulate_open_loop((0.1, 0.0), 5.0, 0.01, &p64).unwrap();
    let b = simulate_open_loop((0.1f32, 0.0f32), 5.0, 0.01, &p32).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!((x.x1 - y.x1 as f64).abs() < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integration_is_deterministic(x1 in -2.0..2.0f64, x2 in -2.0..2.0f64) {
        let p = SpurGearParams64::nominal();
        let a = simulate_open_loop((x1, x2), 20.0, 0.01, &p).unwrap();
        let b = simulate_open_loop((x1, x2), 20.0, 0.01, &p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn time_grid_is_exact(x1 in -2.0..2.0f64, x2 in -2.0..2.0f64, n in 1usize..400) {
        let p = SpurGearParams64::nominal();
        let dt = 0.01;
        let t = simulate_open_loop((x1, x2), n as f64 * dt, dt, &p).unwrap();
        prop_assert_eq!(t.len(), n + 1);
        for (k, s) in t.samples.iter().enumerate() {
            prop_assert_eq!(s.tau, k as f64 * dt);
        }
    }
}
