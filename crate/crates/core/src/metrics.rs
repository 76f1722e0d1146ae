//! Integral error indices and the tuning cost built from them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexReport<T> {
    pub iae: T,
    pub itae: T,
    pub horizon: T,
    pub dt: T,
}

impl<T: Scalar> IndexReport<T> {
    /// Indices of a left-endpoint error sequence sampled every `dt`.
    pub fn from_errors(errors: &[T], dt: T) -> Result<Self> {
        Ok(Self {
            iae: iae(errors, dt)?,
            itae: itae(errors, dt)?,
            horizon: T::from_count(errors.len()) * dt,
            dt,
        })
    }
}

fn check<T: Scalar>(errors: &[T], dt: T) -> Result<()> {
    if errors.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !(dt > T::zero()) {
        return Err(invalid("dt", "must be positive"));
    }
    Ok(())
}

/// Integral of absolute error, left rectangle rule.
pub fn iae<T: Scalar>(errors: &[T], dt: T) -> Result<T> {
    check(errors, dt)?;
    Ok(errors.iter().fold(T::zero(), |acc, e| acc + e.abs()) * dt)
}

/// Integral of time-weighted absolute error, `t_k = k dt`.
pub fn itae<T: Scalar>(errors: &[T], dt: T) -> Result<T> {
    check(errors, dt)?;
    Ok(errors.iter().enumerate().fold(T::zero(), |acc, (k, e)| {
        acc + T::from_count(k) * dt * e.abs()
    }) * dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights<T> {
    pub iae: T,
    pub itae: T,
}

impl<T: Scalar> CostWeights<T> {
    pub fn new(iae: T, itae: T) -> Result<Self> {
        let w = Self { iae, itae };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.iae >= T::zero() && self.itae >= T::zero())
            || !self.iae.is_finite()
            || !self.itae.is_finite()
        {
            return Err(invalid("weights", "must be finite and nonnegative"));
        }
        if self.iae == T::zero() && self.itae == T::zero() {
            return Err(invalid("weights", "must not both be zero"));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for CostWeights<T> {
    fn default() -> Self {
        Self {
            iae: T::one(),
            itae: T::one(),
        }
    }
}

/// Weighted index sum.
pub fn cost<T: Scalar>(report: &IndexReport<T>, weights: &CostWeights<T>) -> T {
    weights.iae * report.iae + weights.itae * report.itae
}

/// Cost of a run that may have diverged; failed runs cost `+inf`.
pub fn run_cost<T: Scalar>(report: Result<IndexReport<T>>, weights: &CostWeights<T>) -> T {
    match report {
        Ok(r) => {
            let c = cost(&r, weights);
            if c.is_finite() {
                c
            } else {
                T::infinity()
            }
        }
        Err(_) => T::infinity(),
    }
}
