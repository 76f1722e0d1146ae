use gearsync::woa::{optimize, optimize_observed, update_agent, AgentDraws};
use gearsync::{Agent, Bounds, WoaConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn encircling_contracts_toward_best() {
    let bounds = Bounds::uniform(5, -10.0, 10.0).unwrap();
    let mut shrank = 0;
    let seeds = 40;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pop: Vec<Agent<f64>> = (0..10)
            .map(|_| {
                let position: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
                Agent {
                    cost: sphere(&position),
                    position,
                }
            })
            .collect();
        let best = pop
            .iter()
            .min_by(|a, b| a.cost.total_cmp(&b.cost))
            .unwrap()
            .position
            .clone();
        let a = 0.5;
        let (mut before, mut after) = (0.0, 0.0);
        for agent in &pop {
            let mut d = AgentDraws::draw(&mut rng, 5, pop.len());
            d.p = 0.25;
            let next = update_agent(&agent.position, &best, &pop, a, &d, 1.0, &bounds);
            before += dist(&agent.position, &best);
            after += dist(&next, &best);
        }
        if after < before {
            shrank += 1;
        }
    }
    assert!(
        shrank * 4 >= seeds * 3,
        "contracted in {shrank} of {seeds} seeds"
    );
}

#[test]
fn sphere_regression_baseline() {
    let mut finals: Vec<f64> = (0..5)
        .map(|seed| {
            let mut cfg = WoaConfig::new(Bounds::uniform(10, -100.0, 100.0).unwrap(), seed);
            cfg.pop_size = 30;
            cfg.max_iters = 500;
            optimize(sphere, &cfg).unwrap().best_cost
        })
        .collect();
    finals.sort_by(f64::total_cmp);
    assert!(finals[2] < 1e-2, "median {}", finals[2]);
}

#[test]
fn parallel_and_serial_agree() {
    let mut cfg = WoaConfig::new(Bounds::uniform(4, -5.0, 5.0).unwrap(), 11);
    cfg.pop_size = 12;
    cfg.max_iters = 40;
    let serial = optimize(sphere, &cfg).unwrap();
    cfg.parallel = true;
    assert_eq!(serial, optimize(sphere, &cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_monotone_bounded_and_reproducible(
        seed in any::<u64>(),
        dim in 1usize..6,
        pop in 2usize..12,
        iters in 1usize..40,
        half in 0.5..50.0f64,
        shift in -20.0..20.0f64,
    ) {
        let bounds = Bounds::uniform(dim, shift - half, shift + half).unwrap();
        let mut cfg = WoaConfig::new(bounds.clone(), seed);
        cfg.pop_size = pop;
        cfg.max_iters = iters;
        let cost = |x: &[f64]| x.iter().map(|v| (v - 1.0).powi(2) + v.sin()).sum::<f64>();
        let mut in_bounds = true;
        let r = optimize_observed(cost, &cfg, |_, agents| {
            in_bounds &= agents.iter().all(|a| bounds.contains(&a.position));
        }).unwrap();
        prop_assert!(in_bounds);
        prop_assert_eq!(r.history.len(), iters);
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*r.history.last().unwrap(), r.best_cost);
        prop_assert!(bounds.contains(&r.best_position));
        prop_assert_eq!(r.best_cost, cost(&r.best_position));
        prop_assert_eq!(r.evaluations, pop * iters);
        prop_assert_eq!(&r, &optimize(cost, &cfg).unwrap());
    }
}
