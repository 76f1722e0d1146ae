//! Whale optimization over a box.
//!
//! Every iteration evaluates the population, keeps the best agent seen so far
//! and then moves each agent with one of three rules:
//!
//! * `p < 0.5`, `|A| >= 1`: search around a randomly chosen agent;
//! * `p < 0.5`, `|A| < 1`: shrink-encircle the best agent;
//! * `p >= 0.5`: logarithmic spiral around the best agent.
//!
//! `a` falls linearly from 2 to 0 over the run, so late iterations only
//! encircle or spiral. All random numbers of an iteration are drawn up front
//! in agent order, which keeps parallel cost evaluation bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds<T>(Vec<(T, T)>);

impl<T: Scalar> Bounds<T> {
    pub fn new(pairs: Vec<(T, T)>) -> Result<Self> {
        for (dim, &(lo, hi)) in pairs.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBounds {
                    dim,
                    lo: lo.to_f64_lossy(),
                    hi: hi.to_f64_lossy(),
                });
            }
        }
        if pairs.is_empty() {
            return Err(invalid("bounds", "need at least one dimension"));
        }
        Ok(Self(pairs))
    }

    /// Same interval on every dimension.
    pub fn uniform(dim: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn pairs(&self) -> &[(T, T)] {
        &self.0
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.0)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn clamp(&self, x: &mut [T]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.0) {
            // NaN collapses onto the lower bound.
            *v = if v.is_nan() { lo } else { v.max(lo).min(hi) };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoaConfig<T> {
    pub pop_size: usize,
    pub max_iters: usize,
    pub spiral_b: T,
    pub bounds: Bounds<T>,
    pub seed: u64,
    /// Evaluate the population on the rayon pool.
    pub parallel: bool,
}

impl<T: Scalar> WoaConfig<T> {
    pub fn new(bounds: Bounds<T>, seed: u64) -> Self {
        Self {
            pop_size: 30,
            max_iters: 100,
            spiral_b: T::one(),
            bounds,
            seed,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(invalid("pop_size", "need at least two agents"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        if !self.spiral_b.is_finite() {
            return Err(invalid("spiral_b", "must be finite"));
        }
        Bounds::new(self.bounds.0.clone()).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent<T> {
    pub position: Vec<T>,
    pub cost: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoaResult<T> {
    pub best_position: Vec<T>,
    pub best_cost: T,
    /// Best cost after each iteration.
    pub history: Vec<T>,
    pub evaluations: usize,
    /// Evaluations whose cost came back NaN and were scored `+inf`.
    pub nonfinite_evaluations: usize,
    pub seed: u64,
}

/// Linear decay of `a` from 2 at the first iteration to 0 at the last.
pub fn a_schedule<T: Scalar>(iter: usize, max_iters: usize) -> T {
    if max_iters <= 1 {
        return T::lit(2.0);
    }
    let frac = T::from_count(iter) / T::from_count(max_iters - 1);
    T::lit(2.0) * (T::one() - frac)
}

/// `A = 2 a r - a`, `C = 2 r` for uniform draws `r` in `[0, 1]`.
pub fn coefficients<T: Scalar>(a: T, r_a: &[T], r_c: &[T]) -> (Vec<T>, Vec<T>) {
    let two = T::lit(2.0);
    (
        r_a.iter().map(|&r| two * a * r - a).collect(),
        r_c.iter().map(|&r| two * r).collect(),
    )
}

fn toward<T: Scalar>(x: &[T], anchor: &[T], a: &[T], c: &[T], bounds: &Bounds<T>) -> Vec<T> {
    let mut out: Vec<T> = (0..x.len())
        .map(|d| {
            let dist = (c[d] * anchor[d] - x[d]).abs();
            anchor[d] - a[d] * dist
        })
        .collect();
    bounds.clamp(&mut out);
    out
}

/// Exploration move relative to a random agent.
pub fn search_move<T: Scalar>(
    x: &[T],
    x_rand: &[T],
    a: &[T],
    c: &[T],
    bounds: &Bounds<T>,
) -> Vec<T> {
    toward(x, x_rand, a, c, bounds)
}

/// Shrinking encirclement of the best agent.
pub fn encircle_move<T: Scalar>(
    x: &[T],
    x_star: &[T],
    a: &[T],
    c: &[T],
    bounds: &Bounds<T>,
) -> Vec<T> {
    toward(x, x_star, a, c, bounds)
}

/// Logarithmic spiral around the best agent.
pub fn spiral_move<T: Scalar>(x: &[T], x_star: &[T], b: T, l: T, bounds: &Bounds<T>) -> Vec<T> {
    let factor = (b * l).exp() * (T::lit(2.0) * T::PI() * l).cos();
    let mut out: Vec<T> = x
        .iter()
        .zip(x_star)
        .map(|(&xi, &si)| (si - xi).abs() * factor + si)
        .collect();
    bounds.clamp(&mut out);
    out
}

/// Random numbers consumed by one agent update.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDraws<T> {
    pub p: T,
    /// Shared across dimensions: `A` is a scalar per agent.
    pub r_a: T,
    pub r_c: Vec<T>,
    pub l: T,
    pub partner: usize,
}

impl<T: Scalar> AgentDraws<T> {
    pub fn draw<R: Rng>(rng: &mut R, dim: usize, pop_size: usize) -> Self {
        let p = T::lit(rng.gen::<f64>());
        let r_a = T::lit(rng.gen::<f64>());
        let r_c = (0..dim).map(|_| T::lit(rng.gen::<f64>())).collect();
        let l = T::lit(2.0 * rng.gen::<f64>() - 1.0);
        let partner = rng.gen_range(0..pop_size);
        Self {
            p,
            r_a,
            r_c,
            l,
            partner,
        }
    }
}

/// New position of one agent.
pub fn update_agent<T: Scalar>(
    x: &[T],
    best: &[T],
    population: &[Agent<T>],
    a: T,
    draws: &AgentDraws<T>,
    spiral_b: T,
    bounds: &Bounds<T>,
) -> Vec<T> {
    let half = T::lit(0.5);
    if draws.p < half {
        let r_a = vec![draws.r_a; x.len()];
        let (big_a, c) = coefficients(a, &r_a, &draws.r_c);
        if big_a[0].abs() >= T::one() {
            search_move(x, &population[draws.partner].position, &big_a, &c, bounds)
        } else {
            encircle_move(x, best, &big_a, &c, bounds)
        }
    } else {
        spiral_move(x, best, spiral_b, draws.l, bounds)
    }
}

/// Minimizes `cost` over the configured box.
pub fn optimize<T, F>(cost: F, cfg: &WoaConfig<T>) -> Result<WoaResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    optimize_observed(cost, cfg, |_, _| {})
}

/// Like [`optimize`], calling `observer(iter, population)` after each evaluation sweep.
pub fn optimize_observed<T, F, O>(
    cost: F,
    cfg: &WoaConfig<T>,
    mut observer: O,
) -> Result<WoaResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
    O: FnMut(usize, &[Agent<T>]),
{
    cfg.validate()?;
    let bounds = &cfg.bounds;
    let dim = bounds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut agents: Vec<Agent<T>> = (0..cfg.pop_size)
        .map(|_| {
            let position = bounds
                .pairs()
                .iter()
                .map(|&(lo, hi)| lo + T::lit(rng.gen::<f64>()) * (hi - lo))
                .collect();
            Agent {
                position,
                cost: T::infinity(),
            }
        })
        .collect();

    let mut best = Agent {
        position: agents[0].position.clone(),
        cost: T::infinity(),
    };
    let mut history = Vec::with_capacity(cfg.max_iters);
    let mut evaluations = 0;
    let mut nonfinite = 0;

    for iter in 0..cfg.max_iters {
        if iter > 0 {
            let a = a_schedule::<T>(iter, cfg.max_iters);
            let draws: Vec<AgentDraws<T>> = (0..cfg.pop_size)
                .map(|_| AgentDraws::draw(&mut rng, dim, cfg.pop_size))
                .collect();
            let moved: Vec<Vec<T>> = agents
                .iter()
                .zip(&draws)
                .map(|(agent, d)| {
                    update_agent(
                        &agent.position,
                        &best.position,
                        &agents,
                        a,
                        d,
                        cfg.spiral_b,
                        bounds,
                    )
                })
                .collect();
            for (agent, pos) in agents.iter_mut().zip(moved) {
                agent.position = pos;
            }
        }

        let costs: Vec<T> = if cfg.parallel {
            agents.par_iter().map(|ag| cost(&ag.position)).collect()
        } else {
            agents.iter().map(|ag| cost(&ag.position)).collect()
        };
        evaluations += costs.len();
        for (agent, c) in agents.iter_mut().zip(costs) {
            agent.cost = if c.is_nan() {
                nonfinite += 1;
                T::infinity()
            } else {
                c
            };
            if agent.cost < best.cost {
                best = agent.clone();
            }
        }
        history.push(best.cost);
        observer(iter, &agents);
    }

    Ok(WoaResult {
        best_position: best.position,
        best_cost: best.cost,
        history,
        evaluations,
        nonfinite_evaluations: nonfinite,
        seed: cfg.seed,
    })
}
