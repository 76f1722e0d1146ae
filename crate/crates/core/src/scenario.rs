//! The four regulation and synchronization experiments, controller tuning and
//! the comparison tables built from them.

use std::fmt::{self, Write as _};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{Controller, ControllerOptions, ControllerSpec, PidGains};
use crate::dynamics::{
    advance, fmt_real, step_count, GearState, Sample, SpurGearParams, Trajectory,
    DEFAULT_CONTROL_HORIZON, DEFAULT_DT, DEFAULT_MAX_STEPS,
};
use crate::error::{invalid, Error, Result};
use crate::fis::{IT2FisConfig, IT2GaussianMF, GAIN_MAX, RULES, SETS_PER_INPUT};
use crate::metrics::{cost, CostWeights, IndexReport};
use crate::scalar::Scalar;
use crate::woa::{optimize, Bounds, WoaConfig, WoaResult};

/// Largest relative perturbation accepted on a plant parameter.
pub const MAX_UNCERTAINTY: f64 = 0.5;

pub const CENTER_RANGE: (f64, f64) = (-4.0, 4.0);
pub const SIGMA_RANGE: (f64, f64) = (0.05, 4.0);
pub const WIDENING_RANGE: (f64, f64) = (0.0, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    /// Drive `x1` to the constant `reference_init.0`.
    Regulation,
    /// Track `x1` of an uncontrolled master started at `reference_init`.
    Synchronization,
}

/// Relative perturbation of the plant's damping and forcing terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty<T> {
    pub mu: T,
    pub f_m: T,
    pub f_e: T,
}

impl<T: Scalar> Uncertainty<T> {
    pub fn new(mu: T, f_m: T, f_e: T) -> Result<Self> {
        let u = Self { mu, f_m, f_e };
        u.validate()?;
        Ok(u)
    }

    pub fn none() -> Self {
        Self {
            mu: T::zero(),
            f_m: T::zero(),
            f_e: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lim = T::lit(MAX_UNCERTAINTY);
        if [self.mu, self.f_m, self.f_e]
            .iter()
            .any(|v| !(v.abs() <= lim))
        {
            return Err(invalid(
                "uncertainty",
                format!("each entry must lie in [-{MAX_UNCERTAINTY}, {MAX_UNCERTAINTY}]"),
            ));
        }
        Ok(())
    }
}

/// Scales `mu`, `f_m` and `f_e` by `1 + rel`; the rest is untouched.
pub fn apply_uncertainty<T: Scalar>(
    params: &SpurGearParams<T>,
    rel: &Uncertainty<T>,
) -> SpurGearParams<T> {
    SpurGearParams {
        mu: params.mu * (T::one() + rel.mu),
        f_m: params.f_m * (T::one() + rel.f_m),
        f_e: params.f_e * (T::one() + rel.f_e),
        ..*params
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Scenario<T> {
    pub id: u32,
    pub mode: ScenarioMode,
    pub reference_init: (T, T),
    pub plant_init: (T, T),
    pub horizon: T,
    pub dt: T,
    #[serde(default)]
    pub uncertainty: Option<Uncertainty<T>>,
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(invalid("horizon", "must be positive and finite"));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be positive and finite"));
        }
        let inits = [
            self.reference_init.0,
            self.reference_init.1,
            self.plant_init.0,
            self.plant_init.1,
        ];
        if inits.iter().any(|v| !v.is_finite()) {
            return Err(invalid("init", "initial conditions must be finite"));
        }
        if let Some(u) = &self.uncertainty {
            u.validate()?;
        }
        Ok(())
    }

    /// Plant parameters after the scenario's perturbation, if any.
    pub fn plant_params(&self, nominal: &SpurGearParams<T>) -> SpurGearParams<T> {
        match &self.uncertainty {
            Some(u) => apply_uncertainty(nominal, u),
            None => *nominal,
        }
    }
}

/// One of the four reference experiments with default horizon and step.
pub fn build_scenario<T: Scalar>(id: u32) -> Result<Scenario<T>> {
    let z = T::zero();
    let (mode, reference_init, plant_init) = match id {
        1 => (ScenarioMode::Regulation, (z, z), (z, z)),
        2 => (ScenarioMode::Synchronization, (T::one(), -T::one()), (z, z)),
        3 => (
            ScenarioMode::Synchronization,
            (-T::one(), T::lit(0.5)),
            (z, z),
        ),
        4 => (
            ScenarioMode::Synchronization,
            (z, z),
            (-T::one(), T::lit(2.0)),
        ),
        other => return Err(Error::UnknownScenario(other)),
    };
    Ok(Scenario {
        id,
        mode,
        reference_init,
        plant_init,
        horizon: T::lit(DEFAULT_CONTROL_HORIZON),
        dt: T::lit(DEFAULT_DT),
        uncertainty: None,
    })
}

/// Per-scenario overrides as read from a scenario config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ScenarioOverride<T> {
    pub id: u32,
    #[serde(default)]
    pub mode: Option<ScenarioMode>,
    #[serde(default)]
    pub reference_init: Option<(T, T)>,
    #[serde(default)]
    pub plant_init: Option<(T, T)>,
    #[serde(default)]
    pub horizon: Option<T>,
    #[serde(default)]
    pub dt: Option<T>,
    #[serde(default)]
    pub uncertainty: Option<Uncertainty<T>>,
}

impl<T: Scalar> ScenarioOverride<T> {
    pub fn resolve(&self) -> Result<Scenario<T>> {
        let mut s = build_scenario(self.id)?;
        if let Some(m) = self.mode {
            s.mode = m;
        }
        if let Some(r) = self.reference_init {
            s.reference_init = r;
        }
        if let Some(p) = self.plant_init {
            s.plant_init = p;
        }
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        s.uncertainty = self.uncertainty;
        s.validate()?;
        Ok(s)
    }
}

/// JSON scenario config: overrides plus optional cost weights.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ScenarioFile<T> {
    #[serde(default)]
    pub weights: Option<CostWeights<T>>,
    pub scenarios: Vec<ScenarioOverride<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "pid")]
    Pid,
    #[serde(rename = "fpid1", alias = "fpid_t1")]
    FpidT1,
    #[serde(rename = "fpid2", alias = "fpid_t2")]
    FpidT2,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [Self::Pid, Self::FpidT1, Self::FpidT2];

    /// Short identifier used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Self::Pid => "pid",
            Self::FpidT1 => "fpid1",
            Self::FpidT2 => "fpid2",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Pid => "PID",
            Self::FpidT1 => "FPID type-I",
            Self::FpidT2 => "FPID type-II",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pid" => Some(Self::Pid),
            "fpid1" | "fpid_t1" => Some(Self::FpidT1),
            "fpid2" | "fpid_t2" => Some(Self::FpidT2),
            _ => None,
        }
    }

    /// Length of the flat parameter vector.
    pub fn dim(self) -> usize {
        match self {
            Self::Pid => 3,
            Self::FpidT1 => 2 * 2 * SETS_PER_INPUT + 3 * RULES,
            Self::FpidT2 => 2 * 3 * SETS_PER_INPUT + 3 * RULES + 1,
        }
    }

    fn antecedent_ranges(self) -> Vec<(f64, f64)> {
        let per_set: &[(f64, f64)] = match self {
            Self::Pid => &[],
            Self::FpidT1 => &[CENTER_RANGE, SIGMA_RANGE],
            Self::FpidT2 => &[CENTER_RANGE, SIGMA_RANGE, WIDENING_RANGE],
        };
        let mut out = Vec::new();
        for _input in 0..2 {
            for &r in per_set {
                out.extend(std::iter::repeat_n(r, SETS_PER_INPUT));
            }
        }
        out
    }

    /// Search box of the flat parameter vector.
    pub fn bounds<T: Scalar>(self) -> Bounds<T> {
        let gain = (0.0, GAIN_MAX);
        let mut ranges = match self {
            Self::Pid => vec![gain; 3],
            _ => {
                let mut r = self.antecedent_ranges();
                r.extend(std::iter::repeat_n(gain, 3 * RULES));
                r
            }
        };
        if self == Self::FpidT2 {
            ranges.push((0.0, 1.0));
        }
        Bounds::new(
            ranges
                .into_iter()
                .map(|(lo, hi)| (T::lit(lo), T::lit(hi)))
                .collect(),
        )
        .expect("static layout bounds are valid")
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat, optimizer-facing encoding of a controller.
///
/// Layouts:
/// * `pid`: `[kp, ki, kd]`
/// * `fpid1`: per input (e, then de) 3 centers and 3 widths, then 9+9+9 consequents
/// * `fpid2`: per input 3 centers, 3 lower widths and 3 widenings, then 27 consequents and `m`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ParamVector<T> {
    pub kind: ControllerKind,
    pub values: Vec<T>,
}

impl<T: Scalar> ParamVector<T> {
    pub fn new(kind: ControllerKind, values: Vec<T>) -> Result<Self> {
        if values.len() != kind.dim() {
            return Err(Error::ParamLength {
                kind: kind.name(),
                expected: kind.dim(),
                got: values.len(),
            });
        }
        if !kind.bounds::<T>().contains(&values) {
            return Err(invalid(
                "params",
                format!("entries outside the {} search box", kind.name()),
            ));
        }
        Ok(Self { kind, values })
    }

    pub fn decode(&self) -> Result<ControllerSpec<T>> {
        decode(self.kind, &self.values)
    }

    pub fn encode(spec: &ControllerSpec<T>) -> Self {
        let (kind, values) = match spec {
            ControllerSpec::Pid(g) => (ControllerKind::Pid, vec![g.kp, g.ki, g.kd]),
            ControllerSpec::FpidT1(cfg) => (ControllerKind::FpidT1, encode_fis(cfg, false)),
            ControllerSpec::FpidT2(cfg) => (ControllerKind::FpidT2, encode_fis(cfg, true)),
        };
        Self { kind, values }
    }
}

fn encode_fis<T: Scalar>(cfg: &IT2FisConfig<T>, interval: bool) -> Vec<T> {
    let mut out = Vec::new();
    for sets in [cfg.e_mfs(), cfg.de_mfs()] {
        out.extend(sets.iter().map(|m| m.center()));
        out.extend(sets.iter().map(|m| m.sigma_lower()));
        if interval {
            out.extend(sets.iter().map(|m| m.widening()));
        }
    }
    out.extend_from_slice(cfg.theta_kp());
    out.extend_from_slice(cfg.theta_ki());
    out.extend_from_slice(cfg.theta_kd());
    if interval {
        out.push(cfg.m());
    }
    out
}

/// Builds a controller from a flat vector of the given layout.
pub fn decode<T: Scalar>(kind: ControllerKind, v: &[T]) -> Result<ControllerSpec<T>> {
    if v.len() != kind.dim() {
        return Err(Error::ParamLength {
            kind: kind.name(),
            expected: kind.dim(),
            got: v.len(),
        });
    }
    if kind == ControllerKind::Pid {
        return Ok(ControllerSpec::Pid(PidGains::new(v[0], v[1], v[2])?));
    }
    let interval = kind == ControllerKind::FpidT2;
    let n = SETS_PER_INPUT;
    let block = if interval { 3 * n } else { 2 * n };
    let sets = |off: usize| -> Result<[IT2GaussianMF<T>; SETS_PER_INPUT]> {
        let mut out = [IT2GaussianMF::type1(T::zero(), T::one())?; SETS_PER_INPUT];
        for (k, slot) in out.iter_mut().enumerate() {
            let widening = if interval {
                v[off + 2 * n + k]
            } else {
                T::zero()
            };
            *slot = IT2GaussianMF::with_widening(v[off + k], v[off + n + k], widening)?;
        }
        Ok(out)
    };
    let e_mfs = sets(0)?;
    let de_mfs = sets(block)?;
    let theta = |k: usize| -> [T; RULES] {
        let start = 2 * block + k * RULES;
        let mut t = [T::zero(); RULES];
        t.copy_from_slice(&v[start..start + RULES]);
        t
    };
    let m = if interval {
        v[2 * block + 3 * RULES]
    } else {
        T::one()
    };
    let cfg = IT2FisConfig::new(e_mfs, de_mfs, theta(0), theta(1), theta(2), m)?;
    Ok(if interval {
        ControllerSpec::FpidT2(cfg)
    } else {
        ControllerSpec::FpidT1(cfg)
    })
}

/// Simulation settings shared by every closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunOptions<T> {
    pub params: SpurGearParams<T>,
    pub controller: ControllerOptions<T>,
    pub max_steps: usize,
}

impl<T: Scalar> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            params: SpurGearParams::nominal(),
            controller: ControllerOptions::default(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopSample<T> {
    pub tau: T,
    pub x1: T,
    pub x2: T,
    pub reference: T,
    pub error: T,
    pub u: T,
    pub gains: Option<PidGains<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult<T> {
    pub scenario_id: u32,
    pub dt: T,
    pub samples: Vec<ClosedLoopSample<T>>,
    /// Master trajectory for synchronization runs.
    pub master: Option<Trajectory<T>>,
    pub report: IndexReport<T>,
}

impl<T: Scalar> ScenarioResult<T> {
    /// Writes `tau,x1,x2,ref,e,u` plus `kp,ki,kd` when gains were scheduled.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let scheduled = self.samples.iter().any(|s| s.gains.is_some());
        write!(out, "tau,x1,x2,ref,e,u")?;
        if scheduled {
            write!(out, ",kp,ki,kd")?;
        }
        writeln!(out)?;
        for s in &self.samples {
            write!(
                out,
                "{},{},{},{},{},{}",
                fmt_real(s.tau),
                fmt_real(s.x1),
                fmt_real(s.x2),
                fmt_real(s.reference),
                fmt_real(s.error),
                fmt_real(s.u)
            )?;
            if scheduled {
                let g = s.gains.unwrap_or_else(PidGains::zero);
                write!(
                    out,
                    ",{},{},{}",
                    fmt_real(g.kp),
                    fmt_real(g.ki),
                    fmt_real(g.kd)
                )?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Core loop; `sink` sees every sample, the returned report covers `[0, horizon)`.
fn closed_loop<T: Scalar>(
    scenario: &Scenario<T>,
    spec: &ControllerSpec<T>,
    options: &RunOptions<T>,
    mut sink: impl FnMut(&ClosedLoopSample<T>, Option<&GearState<T>>),
) -> Result<IndexReport<T>> {
    scenario.validate()?;
    options.params.validate()?;
    let dt = scenario.dt;
    let steps = step_count(scenario.horizon, dt, options.max_steps)?;
    let plant_params = scenario.plant_params(&options.params);
    let mut controller = Controller::new(spec.clone(), options.controller)?;
    let mut plant = GearState::at_rest(scenario.plant_init.0, scenario.plant_init.1);
    let mut master = match scenario.mode {
        ScenarioMode::Synchronization => Some(GearState::at_rest(
            scenario.reference_init.0,
            scenario.reference_init.1,
        )),
        ScenarioMode::Regulation => None,
    };
    let mut errors = Vec::with_capacity(steps);
    for k in 0..=steps {
        let reference = match &master {
            Some(m) => m.x1,
            None => scenario.reference_init.0,
        };
        let e = reference - plant.x1;
        let out = controller.step(e, dt);
        sink(
            &ClosedLoopSample {
                tau: plant.tau,
                x1: plant.x1,
                x2: plant.x2,
                reference,
                error: e,
                u: out.u,
                gains: out.scheduled,
            },
            master.as_ref(),
        );
        if k == steps {
            break;
        }
        errors.push(e);
        plant = advance(&plant, k + 1, dt, out.u, &plant_params)?;
        if let Some(m) = master.as_mut() {
            *m = advance(m, k + 1, dt, T::zero(), &options.params)?;
        }
    }
    IndexReport::from_errors(&errors, dt)
}

/// Runs one controller on one scenario and keeps the full record.
pub fn run_closed_loop<T: Scalar>(
    scenario: &Scenario<T>,
    spec: &ControllerSpec<T>,
    options: &RunOptions<T>,
) -> Result<ScenarioResult<T>> {
    let mut samples = Vec::new();
    let mut master_samples = Vec::new();
    let report = closed_loop(scenario, spec, options, |s, m| {
        samples.push(*s);
        if let Some(m) = m {
            master_samples.push(Sample {
                tau: m.tau,
                x1: m.x1,
                x2: m.x2,
                u: T::zero(),
            });
        }
    })?;
    let master = (scenario.mode == ScenarioMode::Synchronization).then_some(Trajectory {
        dt: scenario.dt,
        samples: master_samples,
    });
    Ok(ScenarioResult {
        scenario_id: scenario.id,
        dt: scenario.dt,
        samples,
        master,
        report,
    })
}

/// Indices only, without storing the trajectory.
pub fn evaluate_indices<T: Scalar>(
    scenario: &Scenario<T>,
    spec: &ControllerSpec<T>,
    options: &RunOptions<T>,
) -> Result<IndexReport<T>> {
    closed_loop(scenario, spec, options, |_, _| {})
}

/// Tuning cost of a flat parameter vector; diverged or invalid runs cost `+inf`.
pub fn param_cost<T: Scalar>(
    scenario: &Scenario<T>,
    kind: ControllerKind,
    values: &[T],
    weights: &CostWeights<T>,
    options: &RunOptions<T>,
) -> T {
    let report = decode(kind, values).and_then(|spec| evaluate_indices(scenario, &spec, options));
    crate::metrics::run_cost(report, weights)
}

/// Optimizer budget; the search box comes from the controller layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WoaSettings<T> {
    pub pop_size: usize,
    pub max_iters: usize,
    pub spiral_b: T,
    pub seed: u64,
    pub parallel: bool,
}

impl<T: Scalar> Default for WoaSettings<T> {
    fn default() -> Self {
        Self {
            pop_size: 30,
            max_iters: 100,
            spiral_b: T::one(),
            seed: 0,
            parallel: false,
        }
    }
}

impl<T: Scalar> WoaSettings<T> {
    pub fn config(&self, bounds: Bounds<T>) -> WoaConfig<T> {
        WoaConfig {
            pop_size: self.pop_size,
            max_iters: self.max_iters,
            spiral_b: self.spiral_b,
            bounds,
            seed: self.seed,
            parallel: self.parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunedController<T> {
    pub params: ParamVector<T>,
    pub woa: WoaResult<T>,
}

/// Tunes every parameter of `kind` on `scenario` against the weighted index cost.
pub fn optimize_controller<T: Scalar>(
    scenario: &Scenario<T>,
    kind: ControllerKind,
    woa: &WoaSettings<T>,
    weights: &CostWeights<T>,
    options: &RunOptions<T>,
) -> Result<TunedController<T>> {
    scenario.validate()?;
    weights.validate()?;
    let cfg = woa.config(kind.bounds());
    let result = optimize(
        |x: &[T]| param_cost(scenario, kind, x, weights, options),
        &cfg,
    )?;
    let params = ParamVector::new(kind, result.best_position.clone())?;
    Ok(TunedController {
        params,
        woa: result,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonEntry<T> {
    pub controller: ControllerKind,
    pub scenario: u32,
    pub params: ParamVector<T>,
    /// `None` when the tuned controller still diverges.
    pub report: Option<IndexReport<T>>,
    pub best_cost: T,
}

impl<T: Scalar> ComparisonEntry<T> {
    pub fn failed(&self) -> bool {
        self.report.is_none()
    }
}

/// IAE/ITAE per controller kind and scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable<T> {
    pub scenarios: Vec<u32>,
    pub controllers: Vec<ControllerKind>,
    pub entries: Vec<ComparisonEntry<T>>,
}

impl<T: Scalar> ComparisonTable<T> {
    pub fn get(&self, controller: ControllerKind, scenario: u32) -> Option<&ComparisonEntry<T>> {
        self.entries
            .iter()
            .find(|e| e.controller == controller && e.scenario == scenario)
    }

    pub fn any_failed(&self) -> bool {
        self.entries.iter().any(ComparisonEntry::failed)
    }

    /// Aligned text table, indices to four decimals.
    pub fn render(&self) -> String {
        let mut header = vec!["Controller".to_string()];
        for s in &self.scenarios {
            header.push(format!("IAE-S{s}"));
            header.push(format!("ITAE-S{s}"));
        }
        let mut rows = vec![header];
        for &c in &self.controllers {
            let mut row = vec![c.label().to_string()];
            for &s in &self.scenarios {
                match self.get(c, s).and_then(|e| e.report) {
                    Some(r) => {
                        row.push(format!("{:.4}", r.iae.to_f64_lossy()));
                        row.push(format!("{:.4}", r.itae.to_f64_lossy()));
                    }
                    None => {
                        row.push("failed".into());
                        row.push("failed".into());
                    }
                }
            }
            rows.push(row);
        }
        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (n, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    if i == 0 {
                        format!("{cell:<w$}", w = widths[i])
                    } else {
                        format!("{cell:>w$}", w = widths[i])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  "));
            if n == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (cols - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        out
    }

    /// `controller,scenario,iae,itae` rows; failed cells hold `inf`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "controller,scenario,iae,itae")?;
        for &c in &self.controllers {
            for &s in &self.scenarios {
                if let Some(e) = self.get(c, s) {
                    let (iae, itae) = match e.report {
                        Some(r) => (fmt_real(r.iae), fmt_real(r.itae)),
                        None => ("inf".into(), "inf".into()),
                    };
                    writeln!(out, "{},{},{},{}", c.name(), s, iae, itae)?;
                }
            }
        }
        Ok(())
    }
}

/// Tunes every controller kind on every scenario and re-evaluates the winners.
pub fn compare_all<T: Scalar>(
    scenarios: &[Scenario<T>],
    kinds: &[ControllerKind],
    woa: &WoaSettings<T>,
    weights: &CostWeights<T>,
    options: &RunOptions<T>,
) -> Result<ComparisonTable<T>> {
    if scenarios.is_empty() {
        return Err(invalid("scenarios", "need at least one scenario"));
    }
    if kinds.is_empty() {
        return Err(invalid("controllers", "need at least one controller kind"));
    }
    let cells: Vec<(&Scenario<T>, ControllerKind)> = kinds
        .iter()
        .flat_map(|&k| scenarios.iter().map(move |s| (s, k)))
        .collect();
    let run_cell =
        |&(scenario, kind): &(&Scenario<T>, ControllerKind)| -> Result<ComparisonEntry<T>> {
            let tuned = optimize_controller(scenario, kind, woa, weights, options)?;
            let report = tuned
                .params
                .decode()
                .and_then(|spec| run_closed_loop(scenario, &spec, options))
                .map(|r| r.report)
                .ok();
            Ok(ComparisonEntry {
                controller: kind,
                scenario: scenario.id,
                params: tuned.params,
                report,
                best_cost: tuned.woa.best_cost,
            })
        };
    let entries: Vec<ComparisonEntry<T>> = if woa.parallel {
        cells.par_iter().map(run_cell).collect::<Result<_>>()?
    } else {
        cells.iter().map(run_cell).collect::<Result<_>>()?
    };
    Ok(ComparisonTable {
        scenarios: scenarios.iter().map(|s| s.id).collect(),
        controllers: kinds.to_vec(),
        entries,
    })
}

/// Combined cost of a finished run.
pub fn result_cost<T: Scalar>(result: &ScenarioResult<T>, weights: &CostWeights<T>) -> T {
    cost(&result.report, weights)
}
