//! Forced Duffing-type spur-gear plant and its fixed-step integrator.
//!
//! The plant is
//!
//! ```text
//! x1' = x2
//! x2' = -2 eps mu x2 + 0.1667 (x1 - x1^3) + eps (f_m + f_e w^2 cos(w tau + phi)) + u
//! ```
//!
//! integrated with classical RK4, the control input held constant over each step.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Stiffness coefficient of the linear and cubic restoring terms.
pub const STIFFNESS: f64 = 0.1667;

/// Default cap on the number of integration steps of a single run.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_PORTRAIT_HORIZON: f64 = 500.0;
pub const DEFAULT_CONTROL_HORIZON: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpurGearParams<T> {
    pub epsilon: T,
    pub mu: T,
    pub f_m: T,
    pub f_e: T,
    pub omega_e: T,
    pub phi_e: T,
}

impl<T: Scalar> SpurGearParams<T> {
    /// Nominal chaotic operating point.
    pub fn nominal() -> Self {
        Self {
            epsilon: T::lit(0.01),
            mu: T::lit(9.0),
            f_m: T::one(),
            f_e: T::lit(30.0),
            omega_e: T::lit(0.5),
            phi_e: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.epsilon,
            self.mu,
            self.f_m,
            self.f_e,
            self.omega_e,
            self.phi_e,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(invalid("params", "all gear parameters must be finite"));
        }
        if self.epsilon <= T::zero() {
            return Err(invalid("epsilon", "must be positive"));
        }
        if self.omega_e <= T::zero() {
            return Err(invalid("omega_e", "must be positive"));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for SpurGearParams<T> {
    fn default() -> Self {
        Self::nominal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GearState<T> {
    pub x1: T,
    pub x2: T,
    pub tau: T,
}

impl<T: Scalar> GearState<T> {
    pub fn new(x1: T, x2: T, tau: T) -> Self {
        Self { x1, x2, tau }
    }

    pub fn at_rest(x1: T, x2: T) -> Self {
        Self::new(x1, x2, T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.tau.is_finite()
    }
}

/// Right-hand side of the gear equation.
pub fn gear_rhs<T: Scalar>(state: &GearState<T>, u: T, params: &SpurGearParams<T>) -> (T, T) {
    let k = T::lit(STIFFNESS);
    let two = T::lit(2.0);
    let x1 = state.x1;
    let damping = -two * params.epsilon * params.mu * state.x2;
    let restoring = k * x1 - k * x1 * x1 * x1;
    let w = params.omega_e;
    let forcing =
        params.epsilon * (params.f_m + params.f_e * w * w * (w * state.tau + params.phi_e).cos());
    (state.x2, damping + restoring + forcing + u)
}

/// One classical RK4 step of an arbitrary two-dimensional system `y' = f(t, y)`.
pub fn rk4_step_with<T, F>(t: T, y: [T; 2], dt: T, f: F) -> [T; 2]
where
    T: Scalar,
    F: Fn(T, [T; 2]) -> [T; 2],
{
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let sixth = T::one() / T::lit(6.0);
    let h2 = dt * half;
    let k1 = f(t, y);
    let k2 = f(t + h2, [y[0] + h2 * k1[0], y[1] + h2 * k1[1]]);
    let k3 = f(t + h2, [y[0] + h2 * k2[0], y[1] + h2 * k2[1]]);
    let k4 = f(t + dt, [y[0] + dt * k3[0], y[1] + dt * k3[1]]);
    [
        y[0] + dt * sixth * (k1[0] + two * k2[0] + two * k3[0] + k4[0]),
        y[1] + dt * sixth * (k1[1] + two * k2[1] + two * k3[1] + k4[1]),
    ]
}

/// Advances the plant by `dt` with `u` held constant over the step.
pub fn rk4_step<T: Scalar>(
    state: &GearState<T>,
    dt: T,
    u: T,
    params: &SpurGearParams<T>,
) -> Result<GearState<T>> {
    if dt == T::zero() {
        return Ok(*state);
    }
    let y = rk4_step_with(state.tau, [state.x1, state.x2], dt, |tau, y| {
        let (d1, d2) = gear_rhs(&GearState::new(y[0], y[1], tau), u, params);
        [d1, d2]
    });
    let next = GearState::new(y[0], y[1], state.tau + dt);
    if next.is_finite() && u.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFiniteState {
            tau: state.tau.to_f64_lossy(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub tau: T,
    pub x1: T,
    pub x2: T,
    pub u: T,
}

/// Uniformly sampled state history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    pub samples: Vec<Sample<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }

    pub fn max_abs_x1(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, s| acc.max(s.x1.abs()))
    }

    /// Writes `tau,x1,x2,u` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "tau,x1,x2,u")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_real(s.tau),
                fmt_real(s.x1),
                fmt_real(s.x2),
                fmt_real(s.u)
            )?;
        }
        Ok(())
    }
}

/// Formats a value with 17 significant digits.
pub fn fmt_real<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

/// Number of steps needed to reach `t_end`, checked against `max_steps`.
pub fn step_count<T: Scalar>(t_end: T, dt: T, max_steps: usize) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(invalid("dt", "must be positive and finite"));
    }
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(invalid("t_end", "must be positive and finite"));
    }
    let ratio = (t_end / dt).round().to_f64_lossy();
    if ratio > max_steps as f64 {
        return Err(Error::StepBudgetExceeded {
            requested: if ratio >= usize::MAX as f64 {
                usize::MAX
            } else {
                ratio as usize
            },
            budget: max_steps,
        });
    }
    Ok((ratio as usize).max(1))
}

/// Integrates the uncontrolled plant from `init` at `tau = 0`.
pub fn simulate_open_loop<T: Scalar>(
    init: (T, T),
    t_end: T,
    dt: T,
    params: &SpurGearParams<T>,
) -> Result<Trajectory<T>> {
    simulate_open_loop_with_budget(init, t_end, dt, params, DEFAULT_MAX_STEPS)
}

pub fn simulate_open_loop_with_budget<T: Scalar>(
    init: (T, T),
    t_end: T,
    dt: T,
    params: &SpurGearParams<T>,
    max_steps: usize,
) -> Result<Trajectory<T>> {
    params.validate()?;
    let steps = step_count(t_end, dt, max_steps)?;
    let mut state = GearState::at_rest(init.0, init.1);
    if !state.is_finite() {
        return Err(Error::NonFiniteState { tau: 0.0 });
    }
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(Sample {
        tau: state.tau,
        x1: state.x1,
        x2: state.x2,
        u: T::zero(),
    });
    for k in 1..=steps {
        state = advance(&state, k, dt, T::zero(), params)?;
        samples.push(Sample {
            tau: state.tau,
            x1: state.x1,
            x2: state.x2,
            u: T::zero(),
        });
    }
    Ok(Trajectory { dt, samples })
}

/// RK4 step that pins the new time to `k * dt` so long runs keep a uniform grid.
pub(crate) fn advance<T: Scalar>(
    state: &GearState<T>,
    k: usize,
    dt: T,
    u: T,
    params: &SpurGearParams<T>,
) -> Result<GearState<T>> {
    let mut next = rk4_step(state, dt, u, params)?;
    next.tau = T::from_count(k) * dt;
    Ok(next)
}

/// Largest Euclidean distance in the (x1, x2) plane between matching samples.
pub fn divergence_metric<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.dt != b.dt {
        return Err(Error::StepMismatch {
            left: a.dt.to_f64_lossy(),
            right: b.dt.to_f64_lossy(),
        });
    }
    Ok(a.samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| (p.x1 - q.x1).hypot(p.x2 - q.x2))
        .fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn nominal() -> SpurGearParams<f64> {
        SpurGearParams::nominal()
    }

    #[test]
    fn nominal_values() {
        let p = nominal();
        assert_eq!(
            (p.f_m, p.epsilon, p.f_e, p.mu, p.omega_e, p.phi_e),
            (1.0, 0.01, 30.0, 9.0, 0.5, 0.0)
        );
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_nonpositive_epsilon_and_frequency() {
        let mut p = nominal();
        p.epsilon = 0.0;
        assert!(p.validate().is_err());
        let mut p = nominal();
        p.omega_e = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rhs_hand_values() {
        let p = nominal();
        let (d1, d2) = gear_rhs(&GearState::new(0.0, 0.0, 0.0), 0.0, &p);
        assert_eq!(d1, 0.0);
        assert_abs_diff_eq!(d2, 0.085, epsilon = 1e-15);

        let (d1, d2) = gear_rhs(&GearState::new(1.0, 0.0, 0.0), 0.0, &p);
        assert_eq!(d1, 0.0);
        assert_abs_diff_eq!(d2, 0.085, epsilon = 1e-15);

        let (d1, d2) = gear_rhs(&GearState::new(0.0, 1.0, 0.0), 0.0, &p);
        assert_eq!(d1, 1.0);
        assert_abs_diff_eq!(d2, -0.095, epsilon = 1e-15);
    }

    #[test]
    fn rk4_exponential_surrogate() {
        let y = rk4_step_with(0.0, [1.0, 0.0], 0.1, |_, y| [y[0], 0.0]);
        assert!((y[0] - 0.1f64.exp()).abs() < 1e-7);
        assert_abs_diff_eq!(y[0], 1.105_170_833_333_333_3, epsilon = 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let s = GearState::new(0.3, -0.7, 2.5);
        assert_eq!(rk4_step(&s, 0.0, 1.0, &nominal()).unwrap(), s);
    }

    #[test]
    fn nonfinite_stage_is_an_error() {
        let s = GearState::new(1e200, 0.0, 0.0);
        let err = rk4_step(&s, 0.01, 0.0, &nominal()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }

    #[test]
    fn single_step_horizon_has_two_samples() {
        let tr = simulate_open_loop((-2.0, 1.0), 0.01, 0.01, &nominal()).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.samples[0].tau, 0.0);
        assert_eq!(tr.samples[1].tau, 0.01);
    }

    #[test]
    fn step_budget_is_enforced() {
        let err =
            simulate_open_loop_with_budget((0.0, 0.0), 10.0, 0.01, &nominal(), 100).unwrap_err();
        assert_eq!(
            err,
            Error::StepBudgetExceeded {
                requested: 1000,
                budget: 100
            }
        );
    }

    #[test]
    fn uniform_time_grid() {
        let tr = simulate_open_loop((-2.0, 1.0), 50.0, 0.01, &nominal()).unwrap();
        for w in tr.samples.windows(2) {
            let gap = w[1].tau - w[0].tau;
            assert!(((gap - 0.01) / 0.01).abs() < 1e-9, "gap {gap}");
        }
    }

    #[test]
    fn divergence_trivial_cases() {
        let a = simulate_open_loop((-2.0, 1.0), 5.0, 0.01, &nominal()).unwrap();
        assert_eq!(divergence_metric(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        for s in &mut b.samples {
            s.x1 += 1.0;
        }
        assert_abs_diff_eq!(divergence_metric(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
        b.samples.pop();
        assert!(matches!(
            divergence_metric(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn csv_header_and_precision() {
        let tr = simulate_open_loop((-2.0, 1.0), 0.02, 0.01, &nominal()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,x1,x2,u"));
        let row: Vec<f64> = lines
            .nth(1)
            .unwrap()
            .split(',')
            .map(|f| f.parse().unwrap())
            .collect();
        assert_eq!(row[1], tr.samples[1].x1);
        assert_eq!(row[2], tr.samples[1].x2);
    }

    #[test]
    fn works_in_single_precision() {
        let p = SpurGearParams::<f32>::nominal();
        let (_, d2) = gear_rhs(&GearState::new(0.0f32, 0.0, 0.0), 0.0, &p);
        assert!((d2 - 0.085).abs() < 1e-6);
        let tr = simulate_open_loop((-2.0f32, 1.0), 10.0, 0.01, &p).unwrap();
        assert_eq!(tr.len(), 1001);
    }
}
