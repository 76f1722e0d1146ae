//! Standard optimizer test functions.

use std::f64::consts::PI;

use crate::BenchFunction;

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn function(f: BenchFunction) -> fn(&[f64]) -> f64 {
    match f {
        BenchFunction::Sphere => sphere,
        BenchFunction::Rosenbrock => rosenbrock,
        BenchFunction::Rastrigin => rastrigin,
    }
}

pub fn default_bound(f: BenchFunction) -> f64 {
    match f {
        BenchFunction::Sphere => 100.0,
        BenchFunction::Rosenbrock => 30.0,
        BenchFunction::Rastrigin => 5.12,
    }
}
