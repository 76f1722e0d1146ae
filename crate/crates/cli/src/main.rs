use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gearsync::dynamics::{simulate_open_loop, DEFAULT_DT, DEFAULT_PORTRAIT_HORIZON};
use gearsync::metrics::cost;
use gearsync::scenario::{
    build_scenario, compare_all, decode, optimize_controller, run_closed_loop, ControllerKind,
    ScenarioFile,
};
use gearsync::woa::{optimize, Bounds, WoaConfig};
use gearsync::{CostWeights64, Error, RunOptions64, Scenario64, SpurGearParams64, WoaSettings64};
use serde::{Deserialize, Serialize};
use serde_json::json;

mod bench;

/// Chaotic spur-gear simulation, fuzzy PID control and whale-optimization tuning.
#[derive(Parser, Debug)]
#[command(name = "gearsync", version)]
struct Cli {
    /// RNG seed for optimizer runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Integration step; defaults to 0.01.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Simulation horizon; defaults to 500 for portraits and 100 for scenarios.
    #[arg(long, global = true, allow_negative_numbers = true)]
    horizon: Option<f64>,

    /// Output directory.
    #[arg(long, global = true, env = "GEARSYNC_OUT", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the uncontrolled plant and write its trajectory.
    PhasePortrait(PortraitArgs),
    /// Run one controller on one scenario.
    Simulate(SimulateArgs),
    /// Tune one controller kind on one scenario.
    Optimize(OptimizeArgs),
    /// Tune every controller kind on a list of scenarios and tabulate IAE/ITAE.
    Compare(CompareArgs),
    /// Run the optimizer on a standard benchmark function.
    WoaBench(BenchArgs),
}

#[derive(Args, Debug)]
struct PortraitArgs {
    #[arg(long, allow_negative_numbers = true)]
    x1: f64,
    #[arg(long, allow_negative_numbers = true)]
    x2: f64,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "phase_portrait.csv")]
    name: String,
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// JSON file overriding scenario definitions and cost weights.
    #[arg(long)]
    scenario_config: Option<PathBuf>,
    /// Weight of IAE in the cost.
    #[arg(long)]
    w_iae: Option<f64>,
    /// Weight of ITAE in the cost.
    #[arg(long)]
    w_itae: Option<f64>,
    /// Anti-windup bound on the integral term.
    #[arg(long, default_value_t = gearsync::control::DEFAULT_U_MAX)]
    u_max: f64,
    /// Optional symmetric clamp on the control signal.
    #[arg(long)]
    u_limit: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario id, 1 to 4.
    #[arg(long)]
    scenario: u32,
    /// Controller kind: pid, fpid1 or fpid2.
    #[arg(long, value_parser = parse_kind)]
    controller: ControllerKind,
    /// Parameter file as written by `optimize`.
    #[arg(long)]
    params: PathBuf,
    #[command(flatten)]
    common: ScenarioArgs,
}

#[derive(Args, Debug, Clone)]
struct WoaArgs {
    /// Number of search agents.
    #[arg(long, default_value_t = 30)]
    pop: usize,
    /// Number of iterations, the first being the initial evaluation.
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Logarithmic spiral shape constant.
    #[arg(long, default_value_t = 1.0)]
    spiral_b: f64,
    /// Evaluate agents on all cores.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Scenario id, 1 to 4.
    #[arg(long)]
    scenario: u32,
    /// Controller kind: pid, fpid1 or fpid2.
    #[arg(long, value_parser = parse_kind)]
    controller: ControllerKind,
    #[command(flatten)]
    woa: WoaArgs,
    #[command(flatten)]
    common: ScenarioArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Comma separated scenario ids, e.g. `1,2`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    scenarios: Vec<u32>,
    /// Controller kinds to tune.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_values = ["pid", "fpid1", "fpid2"])]
    controllers: Vec<ControllerKind>,
    #[command(flatten)]
    woa: WoaArgs,
    #[command(flatten)]
    common: ScenarioArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BenchFunction {
    Sphere,
    Rosenbrock,
    Rastrigin,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    function: BenchFunction,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 30)]
    pop: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 1.0)]
    spiral_b: f64,
    /// Half-width of the search box; defaults to the function's usual domain.
    #[arg(long)]
    bound: Option<f64>,
}

fn parse_kind(s: &str) -> Result<ControllerKind, String> {
    ControllerKind::parse(s)
        .ok_or_else(|| format!("unknown controller `{s}` (expected pid, fpid1 or fpid2)"))
}

/// Parameter file written by `optimize` and read by `simulate`.
#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    controller: ControllerKind,
    best_position: Vec<f64>,
    #[serde(default)]
    best_cost: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    scenario: Option<u32>,
    #[serde(default)]
    iae: Option<f64>,
    #[serde(default)]
    itae: Option<f64>,
    #[serde(default)]
    decoded: Option<gearsync::ControllerSpec64>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating output directory {}", cli.out_dir.display()))?;
    if let Some(dt) = cli.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(usage("--dt must be positive"));
        }
    }
    if let Some(h) = cli.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(usage("--horizon must be positive"));
        }
    }
    match &cli.command {
        Command::PhasePortrait(a) => cmd_phase_portrait(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Optimize(a) => cmd_optimize(cli, a),
        Command::Compare(a) => cmd_compare(cli, a),
        Command::WoaBench(a) => cmd_woa_bench(cli, a),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_manifest(
    cli: &Cli,
    command: &str,
    resolved: serde_json::Value,
    files: &[&str],
) -> anyhow::Result<()> {
    let manifest = json!({
        "tool": "gearsync",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "argv": std::env::args().collect::<Vec<_>>(),
        "seed": cli.seed,
        "dt": cli.dt,
        "horizon": cli.horizon,
        "resolved": resolved,
        "outputs": files,
    });
    write_json(&cli.out_dir.join("run-manifest.json"), &manifest)
}

fn cmd_phase_portrait(cli: &Cli, a: &PortraitArgs) -> CmdResult {
    let params = SpurGearParams64::nominal();
    let dt = cli.dt.unwrap_or(DEFAULT_DT);
    let horizon = cli.horizon.unwrap_or(DEFAULT_PORTRAIT_HORIZON);
    let tr = simulate_open_loop((a.x1, a.x2), horizon, dt, &params).map_err(sim_failure)?;
    let path = cli.out_dir.join(&a.name);
    let mut w = create(&path)?;
    tr.write_csv(&mut w)?;
    w.flush()?;
    write_manifest(
        cli,
        "phase-portrait",
        json!({ "init": [a.x1, a.x2], "dt": dt, "horizon": horizon, "params": params }),
        &[&a.name],
    )?;
    println!("wrote {} samples to {}", tr.len(), path.display());
    Ok(())
}

fn sim_failure(e: Error) -> Failure {
    match e {
        Error::NonFiniteState { tau } => {
            Failure::Runtime(anyhow::anyhow!("run diverged at tau = {tau}"))
        }
        Error::InvalidParameter { .. } | Error::UnknownScenario(_) | Error::ParamLength { .. } => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Runtime(other.into()),
    }
}

/// Scenarios with CLI/global overrides applied, plus the cost weights.
fn resolve_scenarios(
    cli: &Cli,
    ids: &[u32],
    common: &ScenarioArgs,
) -> Result<(Vec<Scenario64>, CostWeights64), Failure> {
    let file: Option<ScenarioFile<f64>> = match &common.scenario_config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| usage(format!("bad scenario config: {e}")))?,
            )
        }
        None => None,
    };
    let mut scenarios = Vec::new();
    for &id in ids {
        let overridden = file
            .as_ref()
            .and_then(|f| f.scenarios.iter().find(|s| s.id == id));
        let mut s = match overridden {
            Some(o) => o.resolve(),
            None => build_scenario(id),
        }
        .map_err(|e| usage(e.to_string()))?;
        if let Some(dt) = cli.dt {
            s.dt = dt;
        }
        if let Some(h) = cli.horizon {
            s.horizon = h;
        }
        s.validate().map_err(|e| usage(e.to_string()))?;
        scenarios.push(s);
    }
    let mut weights = file.and_then(|f| f.weights).unwrap_or_default();
    if let Some(w) = common.w_iae {
        weights.iae = w;
    }
    if let Some(w) = common.w_itae {
        weights.itae = w;
    }
    weights.validate().map_err(|e| usage(e.to_string()))?;
    Ok((scenarios, weights))
}

fn run_options(common: &ScenarioArgs) -> Result<RunOptions64, Failure> {
    let mut opts = RunOptions64::default();
    opts.controller.u_max = common.u_max;
    opts.controller.output_limit = common.u_limit;
    gearsync::Controller::new(
        gearsync::ControllerSpec64::Pid(gearsync::PidGains64::zero()),
        opts.controller,
    )
    .map_err(|e| usage(e.to_string()))?;
    Ok(opts)
}

fn woa_settings(cli: &Cli, w: &WoaArgs) -> Result<WoaSettings64, Failure> {
    if w.pop < 2 {
        return Err(usage("--pop must be at least 2"));
    }
    if w.iters == 0 {
        return Err(usage("--iters must be positive"));
    }
    Ok(WoaSettings64 {
        pop_size: w.pop,
        max_iters: w.iters,
        spiral_b: w.spiral_b,
        seed: cli.seed,
        parallel: w.parallel,
    })
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> CmdResult {
    let text =
        fs::read_to_string(&a.params).with_context(|| format!("reading {}", a.params.display()))?;
    let file: ParamsFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("malformed params file: {e}")))?;
    if file.controller != a.controller {
        return Err(usage(format!(
            "params file holds a {} controller, --controller asked for {}",
            file.controller, a.controller
        )));
    }
    let spec = decode(a.controller, &file.best_position)
        .map_err(|e| usage(format!("malformed params file: {e}")))?;
    let (scenarios, weights) = resolve_scenarios(cli, &[a.scenario], &a.common)?;
    let scenario = &scenarios[0];
    let opts = run_options(&a.common)?;
    let result = run_closed_loop(scenario, &spec, &opts).map_err(sim_failure)?;

    let mut w = create(&cli.out_dir.join("trajectory.csv"))?;
    result.write_csv(&mut w)?;
    w.flush()?;
    let r = result.report;
    write_json(
        &cli.out_dir.join("indices.json"),
        &json!({
            "scenario": scenario.id,
            "controller": a.controller,
            "iae": r.iae,
            "itae": r.itae,
            "horizon": r.horizon,
            "dt": r.dt,
            "cost": cost(&r, &weights),
            "weights": weights,
        }),
    )?;
    write_manifest(
        cli,
        "simulate",
        json!({ "scenario": scenario, "controller": a.controller, "params_file": a.params, "weights": weights, "options": opts }),
        &["trajectory.csv", "indices.json"],
    )?;
    println!("IAE {:.4}  ITAE {:.4}", r.iae, r.itae);
    Ok(())
}

fn write_convergence(path: &Path, history: &[f64]) -> anyhow::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "iter,best_cost")?;
    for (i, c) in history.iter().enumerate() {
        writeln!(w, "{i},{}", gearsync::dynamics::fmt_real(*c))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_optimize(cli: &Cli, a: &OptimizeArgs) -> CmdResult {
    let (scenarios, weights) = resolve_scenarios(cli, &[a.scenario], &a.common)?;
    let scenario = &scenarios[0];
    let opts = run_options(&a.common)?;
    let woa = woa_settings(cli, &a.woa)?;
    let tuned = optimize_controller(scenario, a.controller, &woa, &weights, &opts)
        .map_err(|e| Failure::Runtime(e.into()))?;
    if !tuned.woa.best_cost.is_finite() {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "every candidate diverged"
        )));
    }
    let spec = tuned
        .params
        .decode()
        .map_err(|e| Failure::Runtime(e.into()))?;
    let report = run_closed_loop(scenario, &spec, &opts)
        .map_err(sim_failure)?
        .report;
    let file = ParamsFile {
        controller: a.controller,
        best_position: tuned.woa.best_position.clone(),
        best_cost: Some(tuned.woa.best_cost),
        seed: Some(cli.seed),
        scenario: Some(scenario.id),
        iae: Some(report.iae),
        itae: Some(report.itae),
        decoded: Some(spec),
    };
    write_json(&cli.out_dir.join("best_params.json"), &file)?;
    write_convergence(&cli.out_dir.join("convergence.csv"), &tuned.woa.history)?;
    write_manifest(
        cli,
        "optimize",
        json!({
            "scenario": scenario,
            "controller": a.controller,
            "woa": woa,
            "weights": weights,
            "options": opts,
            "evaluations": tuned.woa.evaluations,
            "nonfinite_evaluations": tuned.woa.nonfinite_evaluations,
        }),
        &["best_params.json", "convergence.csv"],
    )?;
    println!(
        "best cost {:.6}  (IAE {:.4}, ITAE {:.4})",
        tuned.woa.best_cost, report.iae, report.itae
    );
    Ok(())
}

fn cmd_compare(cli: &Cli, a: &CompareArgs) -> CmdResult {
    if a.scenarios.is_empty() {
        return Err(usage("--scenarios needs at least one scenario id"));
    }
    if a.controllers.is_empty() {
        return Err(usage("--controllers needs at least one kind"));
    }
    let (scenarios, weights) = resolve_scenarios(cli, &a.scenarios, &a.common)?;
    let opts = run_options(&a.common)?;
    let woa = woa_settings(cli, &a.woa)?;
    let table = compare_all(&scenarios, &a.controllers, &woa, &weights, &opts)
        .map_err(|e| Failure::Runtime(e.into()))?;
    print!("{}", table.render());

    let mut w = create(&cli.out_dir.join("comparison.csv"))?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let mut outputs = vec!["comparison.csv".to_string()];
    for e in &table.entries {
        let name = format!("params_s{}_{}.json", e.scenario, e.controller);
        let file = ParamsFile {
            controller: e.controller,
            best_position: e.params.values.clone(),
            best_cost: Some(e.best_cost),
            seed: Some(cli.seed),
            scenario: Some(e.scenario),
            iae: e.report.map(|r| r.iae),
            itae: e.report.map(|r| r.itae),
            decoded: e.params.decode().ok(),
        };
        write_json(&cli.out_dir.join(&name), &file)?;
        outputs.push(name);
    }
    let refs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    write_manifest(
        cli,
        "compare",
        json!({ "scenarios": scenarios, "controllers": a.controllers, "woa": woa, "weights": weights, "options": opts }),
        &refs,
    )?;
    if table.any_failed() {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "at least one tuned controller diverged"
        )));
    }
    Ok(())
}

fn cmd_woa_bench(cli: &Cli, a: &BenchArgs) -> CmdResult {
    if a.dim == 0 {
        return Err(usage("--dim must be positive"));
    }
    let half = a.bound.unwrap_or_else(|| bench::default_bound(a.function));
    let bounds = Bounds::uniform(a.dim, -half, half).map_err(|e| usage(e.to_string()))?;
    let cfg = WoaConfig {
        pop_size: a.pop,
        max_iters: a.iters,
        spiral_b: a.spiral_b,
        bounds,
        seed: cli.seed,
        parallel: false,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let f = bench::function(a.function);
    let result = optimize(f, &cfg).map_err(|e| Failure::Runtime(e.into()))?;
    write_convergence(&cli.out_dir.join("convergence.csv"), &result.history)?;
    write_json(
        &cli.out_dir.join("woa_result.json"),
        &json!({
            "function": a.function,
            "best_position": result.best_position,
            "best_cost": result.best_cost,
            "seed": result.seed,
        }),
    )?;
    write_manifest(
        cli,
        "woa-bench",
        json!({ "function": a.function, "dim": a.dim, "pop": a.pop, "iters": a.iters, "spiral_b": a.spiral_b, "bound": half }),
        &["convergence.csv", "woa_result.json"],
    )?;
    println!("best cost {:e}", result.best_cost);
    Ok(())
}
