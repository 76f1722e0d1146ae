//! Simulation and tuning workbench for a chaotic spur-gear pair.
//!
//! * [`dynamics`]: the forced Duffing-type gear plant and its RK4 integrator.
//! * [`fis`]: interval type-2 fuzzy inference used to schedule PID gains.
//! * [`control`]: fixed-gain and fuzzy-scheduled PID laws.
//! * [`woa`]: whale optimization over a box.
//! * [`metrics`]: IAE / ITAE indices and the tuning cost.
//! * [`scenario`]: the regulation and synchronization experiments.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the double-precision instantiation used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
mod error;
pub mod fis;
pub mod metrics;
mod scalar;
pub mod scenario;
pub mod woa;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use control::{Controller, ControllerOptions, ControllerSpec, ControllerState, PidGains};
pub use dynamics::{GearState, SpurGearParams, Trajectory};
pub use fis::{FiringVectors, IT2FisConfig, IT2GaussianMF};
pub use metrics::{CostWeights, IndexReport};
pub use scenario::{
    ComparisonTable, ControllerKind, ParamVector, RunOptions, Scenario, ScenarioMode,
    ScenarioResult, TunedController, Uncertainty, WoaSettings,
};
pub use woa::{Agent, Bounds, WoaConfig, WoaResult};

pub type SpurGearParams64 = SpurGearParams<f64>;
pub type GearState64 = GearState<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type IT2FisConfig64 = IT2FisConfig<f64>;
pub type IT2GaussianMF64 = IT2GaussianMF<f64>;
pub type PidGains64 = PidGains<f64>;
pub type ControllerSpec64 = ControllerSpec<f64>;
pub type IndexReport64 = IndexReport<f64>;
pub type CostWeights64 = CostWeights<f64>;
pub type WoaConfig64 = WoaConfig<f64>;
pub type WoaResult64 = WoaResult<f64>;
pub type Scenario64 = Scenario<f64>;
pub type ScenarioResult64 = ScenarioResult<f64>;
pub type ParamVector64 = ParamVector<f64>;
pub type RunOptions64 = RunOptions<f64>;
pub type WoaSettings64 = WoaSettings<f64>;
pub type ComparisonTable64 = ComparisonTable<f64>;

pub type SpurGearParams32 = SpurGearParams<f32>;
pub type IT2FisConfig32 = IT2FisConfig<f32>;
pub type Scenario32 = Scenario<f32>;
