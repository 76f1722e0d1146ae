//! Interval type-2 fuzzy inference over (error, error rate).
//!
//! Each input carries three Gaussian sets whose width is uncertain: the lower
//! membership uses `sigma_lower`, the upper one `sigma_upper`. The nine rules
//! of the full 3x3 grid fire with the product t-norm and every output is a
//! singleton-consequent Takagi-Sugeno sum reduced by the closed-form
//! m-weighted blend of the normalized lower and upper firing vectors:
//!
//! ```text
//! F(x | theta) = theta . (m zeta_upper(x) + (1 - m) zeta_lower(x))
//! ```
//!
//! A type-1 system is the special case `sigma_lower == sigma_upper`.

use serde::{Deserialize, Serialize};

use crate::control::PidGains;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Sets per input.
pub const SETS_PER_INPUT: usize = 3;
/// Rules in the full grid.
pub const RULES: usize = SETS_PER_INPUT * SETS_PER_INPUT;
/// Upper bound of every consequent singleton and scheduled gain.
pub const GAIN_MAX: f64 = 10.0;

/// Gaussian set with an interval of widths.
///
/// Stored as the lower width plus a nonnegative widening so that
/// `sigma_upper >= sigma_lower` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MfRecord<T>", into = "MfRecord<T>", bound = "T: Scalar")]
pub struct IT2GaussianMF<T> {
    center: T,
    sigma_lower: T,
    widening: T,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
struct MfRecord<T> {
    center: T,
    sigma_lower: T,
    sigma_upper: T,
}

impl<T: Scalar> TryFrom<MfRecord<T>> for IT2GaussianMF<T> {
    type Error = crate::Error;

    fn try_from(r: MfRecord<T>) -> Result<Self> {
        Self::new(r.center, r.sigma_lower, r.sigma_upper)
    }
}

impl<T: Scalar> From<IT2GaussianMF<T>> for MfRecord<T> {
    fn from(mf: IT2GaussianMF<T>) -> Self {
        MfRecord {
            center: mf.center,
            sigma_lower: mf.sigma_lower,
            sigma_upper: mf.sigma_upper(),
        }
    }
}

impl<T: Scalar> IT2GaussianMF<T> {
    pub fn new(center: T, sigma_lower: T, sigma_upper: T) -> Result<Self> {
        if sigma_upper < sigma_lower {
            return Err(invalid("sigma_upper", "must not be below sigma_lower"));
        }
        Self::with_widening(center, sigma_lower, sigma_upper - sigma_lower)
    }

    pub fn with_widening(center: T, sigma_lower: T, widening: T) -> Result<Self> {
        if !center.is_finite() {
            return Err(invalid("center", "must be finite"));
        }
        if !(sigma_lower > T::zero()) || !sigma_lower.is_finite() {
            return Err(invalid("sigma_lower", "must be positive and finite"));
        }
        if !(widening >= T::zero()) || !widening.is_finite() {
            return Err(invalid("widening", "must be nonnegative and finite"));
        }
        Ok(Self {
            center,
            sigma_lower,
            widening,
        })
    }

    /// Type-1 set: both widths equal.
    pub fn type1(center: T, sigma: T) -> Result<Self> {
        Self::with_widening(center, sigma, T::zero())
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn sigma_lower(&self) -> T {
        self.sigma_lower
    }

    pub fn sigma_upper(&self) -> T {
        self.sigma_lower + self.widening
    }

    pub fn widening(&self) -> T {
        self.widening
    }

    pub fn is_type1(&self) -> bool {
        self.widening == T::zero()
    }
}

/// `(lower, upper)` membership grades of `x`.
pub fn mf_grades<T: Scalar>(x: T, mf: &IT2GaussianMF<T>) -> (T, T) {
    let d2 = (x - mf.center) * (x - mf.center);
    let lower = (-d2 / (mf.sigma_lower * mf.sigma_lower)).exp();
    if mf.is_type1() {
        return (lower, lower);
    }
    let su = mf.sigma_upper();
    (lower, (-d2 / (su * su)).exp())
}

/// Rule base and consequents of the gain-scheduling system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FisRecord<T>", into = "FisRecord<T>", bound = "T: Scalar")]
pub struct IT2FisConfig<T> {
    e_mfs: [IT2GaussianMF<T>; SETS_PER_INPUT],
    de_mfs: [IT2GaussianMF<T>; SETS_PER_INPUT],
    theta_kp: [T; RULES],
    theta_ki: [T; RULES],
    theta_kd: [T; RULES],
    m: T,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(bound = "T: Scalar")]
struct FisRecord<T> {
    e_mfs: [IT2GaussianMF<T>; SETS_PER_INPUT],
    de_mfs: [IT2GaussianMF<T>; SETS_PER_INPUT],
    theta_kp: [T; RULES],
    theta_ki: [T; RULES],
    theta_kd: [T; RULES],
    m: T,
}

impl<T: Scalar> TryFrom<FisRecord<T>> for IT2FisConfig<T> {
    type Error = crate::Error;

    fn try_from(r: FisRecord<T>) -> Result<Self> {
        Self::new(r.e_mfs, r.de_mfs, r.theta_kp, r.theta_ki, r.theta_kd, r.m)
    }
}

impl<T: Scalar> From<IT2FisConfig<T>> for FisRecord<T> {
    fn from(c: IT2FisConfig<T>) -> Self {
        FisRecord {
            e_mfs: c.e_mfs,
            de_mfs: c.de_mfs,
            theta_kp: c.theta_kp,
            theta_ki: c.theta_ki,
            theta_kd: c.theta_kd,
            m: c.m,
        }
    }
}

impl<T: Scalar> IT2FisConfig<T> {
    pub fn new(
        e_mfs: [IT2GaussianMF<T>; SETS_PER_INPUT],
        de_mfs: [IT2GaussianMF<T>; SETS_PER_INPUT],
        theta_kp: [T; RULES],
        theta_ki: [T; RULES],
        theta_kd: [T; RULES],
        m: T,
    ) -> Result<Self> {
        let gain_max = T::lit(GAIN_MAX);
        for (name, theta) in [
            ("theta_kp", &theta_kp),
            ("theta_ki", &theta_ki),
            ("theta_kd", &theta_kd),
        ] {
            if theta.iter().any(|&v| !(v >= T::zero() && v <= gain_max)) {
                return Err(invalid(
                    name,
                    format!("entries must lie in [0, {GAIN_MAX}]"),
                ));
            }
        }
        if !(m >= T::zero() && m <= T::one()) {
            return Err(invalid("m", "must lie in [0, 1]"));
        }
        Ok(Self {
            e_mfs,
            de_mfs,
            theta_kp,
            theta_ki,
            theta_kd,
            m,
        })
    }

    pub fn e_mfs(&self) -> &[IT2GaussianMF<T>; SETS_PER_INPUT] {
        &self.e_mfs
    }

    pub fn de_mfs(&self) -> &[IT2GaussianMF<T>; SETS_PER_INPUT] {
        &self.de_mfs
    }

    pub fn theta_kp(&self) -> &[T; RULES] {
        &self.theta_kp
    }

    pub fn theta_ki(&self) -> &[T; RULES] {
        &self.theta_ki
    }

    pub fn theta_kd(&self) -> &[T; RULES] {
        &self.theta_kd
    }

    pub fn m(&self) -> T {
        self.m
    }

    /// True when every set has equal lower and upper widths.
    pub fn is_type1(&self) -> bool {
        self.e_mfs
            .iter()
            .chain(&self.de_mfs)
            .all(|mf| mf.is_type1())
    }
}

/// Lower and upper product firing strengths, row-major over (e set, de set).
pub fn rule_firings<T: Scalar>(e: T, de: T, cfg: &IT2FisConfig<T>) -> ([T; RULES], [T; RULES]) {
    let ge = cfg.e_mfs.map(|mf| mf_grades(e, &mf));
    let gde = cfg.de_mfs.map(|mf| mf_grades(de, &mf));
    let mut lower = [T::zero(); RULES];
    let mut upper = [T::zero(); RULES];
    for (i, &(el, eu)) in ge.iter().enumerate() {
        for (j, &(dl, du)) in gde.iter().enumerate() {
            lower[i * SETS_PER_INPUT + j] = el * dl;
            upper[i * SETS_PER_INPUT + j] = eu * du;
        }
    }
    (lower, upper)
}

/// Normalized lower and upper firing vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiringVectors<T> {
    pub zeta_lower: [T; RULES],
    pub zeta_upper: [T; RULES],
}

impl<T: Scalar> FiringVectors<T> {
    /// `m * zeta_upper + (1 - m) * zeta_lower`.
    pub fn blend(&self, m: T) -> [T; RULES] {
        let mut out = [T::zero(); RULES];
        for (l, o) in out.iter_mut().enumerate() {
            *o = m * self.zeta_upper[l] + (T::one() - m) * self.zeta_lower[l];
        }
        out
    }
}

fn normalize_band<T: Scalar>(w: &[T; RULES]) -> [T; RULES] {
    let floor = T::lit(1e-300).max(T::min_positive_value());
    let sum = w.iter().fold(T::zero(), |acc, &v| acc + v);
    if !(sum >= floor) {
        return [T::one() / T::from_count(RULES); RULES];
    }
    w.map(|v| v / sum)
}

/// Divides each band by its sum; a band that underflows to zero becomes uniform.
pub fn normalize<T: Scalar>(w_lower: &[T; RULES], w_upper: &[T; RULES]) -> FiringVectors<T> {
    FiringVectors {
        zeta_lower: normalize_band(w_lower),
        zeta_upper: normalize_band(w_upper),
    }
}

/// `theta . weights` for nonnegative weights summing to one.
///
/// Evaluated relative to the smallest consequent so that constant consequents
/// come back exactly, then clamped to the consequent range.
pub fn convex_output<T: Scalar>(theta: &[T], weights: &[T]) -> T {
    debug_assert_eq!(theta.len(), weights.len());
    let lo = theta.iter().copied().fold(T::infinity(), T::min);
    let hi = theta.iter().copied().fold(T::neg_infinity(), T::max);
    let acc = theta
        .iter()
        .zip(weights)
        .fold(T::zero(), |acc, (&t, &w)| acc + (t - lo) * w);
    (lo + acc).max(lo).min(hi)
}

/// Closed-form interval type-2 reduction of one output.
pub fn biglarbegian_output<T: Scalar>(zeta_upper: &[T], zeta_lower: &[T], theta: &[T], m: T) -> T {
    let blended: Vec<T> = zeta_upper
        .iter()
        .zip(zeta_lower)
        .map(|(&u, &l)| m * u + (T::one() - m) * l)
        .collect();
    convex_output(theta, &blended)
}

/// Normalized firing vectors for an input pair.
pub fn firing_vectors<T: Scalar>(e: T, de: T, cfg: &IT2FisConfig<T>) -> FiringVectors<T> {
    let (lower, upper) = rule_firings(e, de, cfg);
    normalize(&lower, &upper)
}

/// Scheduled PID gains for the input pair.
pub fn evaluate_gains<T: Scalar>(e: T, de: T, cfg: &IT2FisConfig<T>) -> PidGains<T> {
    let zeta = firing_vectors(e, de, cfg).blend(cfg.m);
    PidGains {
        kp: convex_output(&cfg.theta_kp, &zeta),
        ki: convex_output(&cfg.theta_ki, &zeta),
        kd: convex_output(&cfg.theta_kd, &zeta),
    }
}
