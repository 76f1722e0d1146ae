//! Discrete PID and fuzzy-scheduled PID laws.
//!
//! Both laws share the same bookkeeping: a backward-difference error rate
//! (zero on the first call), a rectangle-rule integral with the integral gain
//! inside the sum, and an anti-windup clamp on the accumulator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fis::{evaluate_gains, IT2FisConfig, GAIN_MAX};
use crate::scalar::Scalar;

/// Default anti-windup limit on the integral accumulator.
pub const DEFAULT_U_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
}

impl<T: Scalar> PidGains<T> {
    pub fn new(kp: T, ki: T, kd: T) -> Result<Self> {
        let g = Self { kp, ki, kd };
        g.validate()?;
        Ok(g)
    }

    pub fn zero() -> Self {
        Self {
            kp: T::zero(),
            ki: T::zero(),
            kd: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let max = T::lit(GAIN_MAX);
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(v >= T::zero() && v <= max) {
                return Err(invalid(name, format!("must lie in [0, {GAIN_MAX}]")));
            }
        }
        Ok(())
    }
}

/// Which control law to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    bound = "T: Scalar"
)]
pub enum ControllerSpec<T> {
    Pid(PidGains<T>),
    FpidT1(IT2FisConfig<T>),
    FpidT2(IT2FisConfig<T>),
}

impl<T: Scalar> ControllerSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pid(g) => g.validate(),
            Self::FpidT1(cfg) if !cfg.is_type1() => Err(invalid(
                "fpid_t1",
                "type-1 configs need sigma_lower == sigma_upper on every set",
            )),
            Self::FpidT1(_) | Self::FpidT2(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState<T> {
    pub integral_acc: T,
    pub prev_error: T,
    pub initialized: bool,
}

impl<T: Scalar> ControllerState<T> {
    pub fn new() -> Self {
        Self {
            integral_acc: T::zero(),
            prev_error: T::zero(),
            initialized: false,
        }
    }
}

/// Backward-difference error rate; zero before any history exists.
pub fn error_derivative<T: Scalar>(e: T, state: &ControllerState<T>, dt: T) -> T {
    if state.initialized {
        (e - state.prev_error) / dt
    } else {
        T::zero()
    }
}

/// Shared PID update given the error rate and the gains of this step.
fn pid_law<T: Scalar>(
    e: T,
    de: T,
    gains: &PidGains<T>,
    state: &mut ControllerState<T>,
    dt: T,
    u_max: T,
) -> T {
    state.integral_acc = (state.integral_acc + gains.ki * e * dt)
        .max(-u_max)
        .min(u_max);
    state.prev_error = e;
    state.initialized = true;
    gains.kp * e + state.integral_acc + gains.kd * de
}

/// Fixed-gain PID step with the default anti-windup limit.
pub fn pid_step<T: Scalar>(e: T, state: &mut ControllerState<T>, gains: &PidGains<T>, dt: T) -> T {
    let de = error_derivative(e, state, dt);
    pid_law(e, de, gains, state, dt, T::lit(DEFAULT_U_MAX))
}

/// Fuzzy-scheduled PID step; returns the control and the gains used.
pub fn fpid_step<T: Scalar>(
    e: T,
    state: &mut ControllerState<T>,
    cfg: &IT2FisConfig<T>,
    dt: T,
) -> (T, PidGains<T>) {
    let de = error_derivative(e, state, dt);
    let gains = evaluate_gains(e, de, cfg);
    let u = pid_law(e, de, &gains, state, dt, T::lit(DEFAULT_U_MAX));
    (u, gains)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerOptions<T> {
    /// Anti-windup bound on the integral accumulator.
    pub u_max: T,
    /// Optional symmetric clamp on the applied control.
    pub output_limit: Option<T>,
}

impl<T: Scalar> Default for ControllerOptions<T> {
    fn default() -> Self {
        Self {
            u_max: T::lit(DEFAULT_U_MAX),
            output_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput<T> {
    pub u: T,
    /// Gains applied this step; `None` for fixed-gain PID.
    pub scheduled: Option<PidGains<T>>,
}

/// A controller instance owning its runtime state.
#[derive(Debug, Clone)]
pub struct Controller<T> {
    spec: ControllerSpec<T>,
    state: ControllerState<T>,
    options: ControllerOptions<T>,
}

impl<T: Scalar> Controller<T> {
    pub fn new(spec: ControllerSpec<T>, options: ControllerOptions<T>) -> Result<Self> {
        spec.validate()?;
        if !(options.u_max >= T::zero()) {
            return Err(invalid("u_max", "must be nonnegative"));
        }
        if let Some(lim) = options.output_limit {
            if !(lim > T::zero()) {
                return Err(invalid("output_limit", "must be positive"));
            }
        }
        Ok(Self {
            spec,
            state: ControllerState::new(),
            options,
        })
    }

    pub fn spec(&self) -> &ControllerSpec<T> {
        &self.spec
    }

    pub fn state(&self) -> &ControllerState<T> {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = ControllerState::new();
    }

    pub fn step(&mut self, e: T, dt: T) -> ControlOutput<T> {
        let de = error_derivative(e, &self.state, dt);
        let (gains, scheduled) = match &self.spec {
            ControllerSpec::Pid(g) => (*g, false),
            ControllerSpec::FpidT1(cfg) | ControllerSpec::FpidT2(cfg) => {
                (evaluate_gains(e, de, cfg), true)
            }
        };
        let mut u = pid_law(e, de, &gains, &mut self.state, dt, self.options.u_max);
        if let Some(lim) = self.options.output_limit {
            u = u.max(-lim).min(lim);
        }
        ControlOutput {
            u,
            scheduled: scheduled.then_some(gains),
        }
    }
}
