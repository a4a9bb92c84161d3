//! Batch front-end for the molsig engines.
//!
//! Two subcommands: `run` executes the selected engines on a scenario file;
//! `reproduce` executes the bundled reference setups (`fig2`, `fig3`,
//! `table1`). Outputs are one CSV per curve plus a `summary.json`; every
//! file header carries the manifest that produced it and reruns are
//! byte-identical given the same manifest and seed.

pub mod manifest;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use manifest::{RunManifest, TOOL_NAME, TOOL_VERSION};
use molsig::config::{self, ScenarioParams};
use molsig::expectation;
use molsig::montecarlo;
use molsig::particle::{AbsorptionMode, ParticleSimConfig};
use molsig::scenario::ValidatedScenario;
use molsig::signal::Observable;
use molsig::{Component, Error as CoreError, ReceiverKind, SignalCurve};
use output::{CurveSummary, Summary, TableEntry};
use std::path::PathBuf;
use std::time::Instant;

pub const FIG2_TOML: &str = include_str!("../scenarios/fig2.toml");
pub const FIG3_TOML: &str = include_str!("../scenarios/fig3.toml");

/// Reference peak net-change values for the bundled `fig2` configuration
/// (sampling interval 0.01 s), used by `reproduce table1`.
pub const TABLE1_REFERENCE: [(ReceiverKind, Component, f64); 4] = [
    (ReceiverKind::Passive, Component::Nearest, 149.57),
    (ReceiverKind::Absorbing, Component::Nearest, 354.52),
    (ReceiverKind::Passive, Component::Interferers, 9.252),
    (ReceiverKind::Absorbing, Component::Interferers, 59.42),
];

const COMPONENTS: [Component; 3] = [Component::Nearest, Component::Interferers, Component::All];

#[derive(Parser, Debug)]
#[command(name = TOOL_NAME, version, about = "Expected molecular signal at a spherical receiver from a Poisson field of transmitters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run engines on a scenario file and emit CSV curves + a JSON summary.
    Run(RunArgs),
    /// Run a bundled reference setup.
    Reproduce(ReproduceArgs),
    /// Sample transmitter realizations and dump their positions as CSV.
    DumpPoints(DumpPointsArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Scenario file (.toml or .json).
    #[arg(long)]
    pub scenario: PathBuf,

    /// Which observable the curves report.
    #[arg(long, value_enum, default_value_t = ObservableArg::Net)]
    pub observable: ObservableArg,

    #[command(flatten)]
    pub engine_args: EngineArgs,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Bundled target to reproduce.
    #[arg(value_enum)]
    pub target: Target,

    #[command(flatten)]
    pub engine_args: EngineArgs,
}

#[derive(Args, Debug)]
pub struct DumpPointsArgs {
    /// Scenario file (.toml or .json).
    #[arg(long)]
    pub scenario: PathBuf,

    /// Number of realizations to sample.
    #[arg(long, default_value_t = 1)]
    pub realizations: usize,

    /// Master seed; realization i uses the same derived stream as the
    /// Monte Carlo engine, so dumped points match `--engine montecarlo`
    /// runs at the same seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output directory (default: $MOLSIG_OUT_DIR or ./out).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Scenario override, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args, Debug)]
pub struct EngineArgs {
    /// Engine selection.
    #[arg(long, value_enum, default_value_t = EngineChoice::Analytic)]
    pub engine: EngineChoice,

    /// Master seed for all stochastic engines.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output directory (default: $MOLSIG_OUT_DIR or ./out).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Scenario override, repeatable: e.g. --override lambda=2e-4.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Monte Carlo realizations.
    #[arg(long, default_value_t = 10_000)]
    pub realizations: usize,

    /// Particle time step in seconds (default: the sampling interval).
    #[arg(long)]
    pub dt: Option<f64>,

    /// Particle transmitter-placement permutations.
    #[arg(long, default_value_t = 100)]
    pub permutations: usize,

    /// Particle repetitions per permutation.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,

    /// Molecules per transmitter (default: the pulse amplitude).
    #[arg(long)]
    pub molecules: Option<usize>,

    /// How the absorbing receiver detects arrivals.
    #[arg(long, value_enum, default_value_t = AbsorptionArg::StepEnd)]
    pub absorption: AbsorptionArg,

    /// Also write per-run particle traces to <prefix>_particle_runs_*.csv.
    #[arg(long)]
    pub dump_runs: bool,

    /// Suppress progress output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineChoice {
    Analytic,
    Montecarlo,
    Particle,
    All,
}

impl EngineChoice {
    fn engines(self) -> Vec<Engine> {
        match self {
            EngineChoice::Analytic => vec![Engine::Analytic],
            EngineChoice::Montecarlo => vec![Engine::Montecarlo],
            EngineChoice::Particle => vec![Engine::Particle],
            EngineChoice::All => vec![Engine::Analytic, Engine::Montecarlo, Engine::Particle],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Analytic,
    Montecarlo,
    Particle,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Montecarlo => "montecarlo",
            Engine::Particle => "particle",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableArg {
    Net,
    Level,
}

impl From<ObservableArg> for Observable {
    fn from(o: ObservableArg) -> Observable {
        match o {
            ObservableArg::Net => Observable::NetChange,
            ObservableArg::Level => Observable::Level,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsorptionArg {
    /// Check step-boundary positions only.
    StepEnd,
    /// Also apply the radial crossing probability inside each step.
    IntraStep,
}

impl From<AbsorptionArg> for AbsorptionMode {
    fn from(a: AbsorptionArg) -> AbsorptionMode {
        match a {
            AbsorptionArg::StepEnd => AbsorptionMode::StepEndCheck,
            AbsorptionArg::IntraStep => AbsorptionMode::IntraStepCorrection,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Fig2,
    Fig3,
    Table1,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
            Target::Table1 => "table1",
        }
    }
}

/// Error report printed to stderr as JSON; carries the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind, "message": self.message }
        })
        .to_string()
    }

    fn io(e: std::io::Error) -> Self {
        CliError {
            kind: "io",
            message: e.to_string(),
            exit_code: 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let (kind, exit_code) = match &e {
            CoreError::InvalidScenario { .. } => ("validation", 2),
            CoreError::Config(_) => ("config", 2),
            CoreError::Domain(_) => ("domain", 2),
            CoreError::QuadratureNonConvergence { .. } => ("quadrature", 3),
        };
        CliError {
            kind,
            exit_code,
            message: e.to_string(),
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Reproduce(args) => reproduce_command(args),
        Command::DumpPoints(args) => dump_points_command(args),
    }
}

fn out_dir(args: &EngineArgs) -> PathBuf {
    args.out.clone().unwrap_or_else(|| {
        std::env::var_os("MOLSIG_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    })
}

fn engine_params(args: &EngineArgs, scenario: &ValidatedScenario) -> Vec<(String, String)> {
    vec![
        ("realizations".into(), args.realizations.to_string()),
        (
            "dt".into(),
            args.dt.unwrap_or(scenario.sampling.interval).to_string(),
        ),
        ("permutations".into(), args.permutations.to_string()),
        ("reps".into(), args.reps.to_string()),
        (
            "molecules".into(),
            args.molecules
                .unwrap_or(scenario.field.pulse_amplitude.round() as usize)
                .to_string(),
        ),
        (
            "absorption".into(),
            match args.absorption {
                AbsorptionArg::StepEnd => "step-end".into(),
                AbsorptionArg::IntraStep => "intra-step".into(),
            },
        ),
    ]
}

fn load_params(args: &RunArgs) -> Result<ScenarioParams, CliError> {
    let mut params = config::params_from_path(&args.scenario)?;
    apply_overrides(&mut params, &args.engine_args.overrides)?;
    Ok(params)
}

fn apply_overrides(params: &mut ScenarioParams, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let Some((key, value)) = item.split_once('=') else {
            return Err(CliError {
                kind: "config",
                message: format!("override {item:?} is not KEY=VALUE"),
                exit_code: 2,
            });
        };
        params.set(key.trim(), value.trim())?;
    }
    Ok(())
}

/// One engine's output: curves for every component with per-component
/// runtimes, plus optional per-run particle trace rows.
struct EngineOutput {
    curves: Vec<(Component, SignalCurve, u128)>,
    particle_runs: Option<Vec<String>>,
}

fn compute_curves(
    engine: Engine,
    scenario: &ValidatedScenario,
    observable: Observable,
    args: &EngineArgs,
) -> Result<EngineOutput, CliError> {
    let kind = scenario.receiver.kind;
    let mut curves = Vec::new();
    let mut particle_runs = None;
    match engine {
        Engine::Analytic => {
            for component in COMPONENTS {
                let start = Instant::now();
                let curve = match observable {
                    Observable::Level => expectation::level_curve(scenario, kind, component)?,
                    Observable::NetChange => {
                        expectation::net_change_curve(scenario, kind, component)?
                    }
                };
                curves.push((component, curve, start.elapsed().as_millis()));
            }
        }
        Engine::Montecarlo => {
            for component in COMPONENTS {
                let start = Instant::now();
                let estimates = montecarlo::mc_observable_curve(
                    scenario,
                    kind,
                    component,
                    observable,
                    args.realizations,
                    args.seed,
                )?;
                let curve = montecarlo::estimates_to_curve(scenario, &estimates);
                curves.push((component, curve, start.elapsed().as_millis()));
            }
        }
        Engine::Particle => {
            let start = Instant::now();
            let mut cfg = ParticleSimConfig::from_scenario(
                scenario,
                args.dt.unwrap_or(scenario.sampling.interval),
            );
            if let Some(m) = args.molecules {
                cfg.molecules_per_tx = m;
            }
            cfg.absorption_mode = args.absorption.into();
            let mut trace_rows = args.dump_runs.then(Vec::new);
            let scale = scenario.field.pulse_amplitude / cfg.molecules_per_tx as f64;
            let ensemble = molsig::particle::simulate_ensemble_observed(
                scenario,
                &cfg,
                args.permutations,
                args.reps,
                args.seed,
                |run, out| {
                    if let Some(rows) = trace_rows.as_mut() {
                        for k in 0..out.sample_times.len() {
                            rows.push(format!(
                                "{run},{},{},{},{}",
                                out.sample_times[k],
                                out.nearest[k] as f64 * scale,
                                out.interferers[k] as f64 * scale,
                                out.total[k] as f64 * scale,
                            ));
                        }
                    }
                },
            )?;
            let elapsed = start.elapsed().as_millis();
            let set = match observable {
                Observable::Level => &ensemble.level,
                Observable::NetChange => &ensemble.net,
            };
            for component in COMPONENTS {
                curves.push((component, set.get(component).clone(), elapsed));
            }
            particle_runs = trace_rows;
        }
    }
    Ok(EngineOutput {
        curves,
        particle_runs,
    })
}

/// Runs the selected engines on one validated scenario and writes the
/// outputs. Returns the per-curve summaries.
fn emit_scenario_curves(
    prefix: &str,
    scenario: &ValidatedScenario,
    observable: Observable,
    engines: &[Engine],
    args: &EngineArgs,
    run_manifest: &RunManifest,
) -> Result<Vec<CurveSummary>, CliError> {
    let kind = scenario.receiver.kind;
    let receiver = kind.to_string();
    let dir = &run_manifest.out_dir;
    let mut summaries = Vec::new();
    for &engine in engines {
        let mut manifest = run_manifest.clone();
        manifest.engine = engine.name().into();
        let engine_output = compute_curves(engine, scenario, observable, args)?;
        if let Some(rows) = &engine_output.particle_runs {
            let file_name = format!("{prefix}_particle_runs_{receiver}.csv");
            let path = dir.join(&file_name);
            let mut text = String::new();
            for line in manifest.header_lines(&receiver, "per-run") {
                text.push_str(&line);
                text.push('\n');
            }
            text.push_str("run_id,t_s,nearest,aggregate,all\n");
            for row in rows {
                text.push_str(row);
                text.push('\n');
            }
            std::fs::write(&path, text).map_err(CliError::io)?;
            if !args.quiet {
                println!("wrote {}", path.display());
            }
        }
        for (component, curve, runtime_ms) in engine_output.curves {
            let component_name = component.to_string();
            let file_name = format!(
                "{prefix}_{}_{receiver}_{component_name}_{}.csv",
                engine.name(),
                run_manifest.observable
            );
            let path = output::write_curve_csv(
                dir,
                &file_name,
                &manifest,
                &receiver,
                &component_name,
                &curve,
            )
            .map_err(CliError::io)?;
            if !args.quiet {
                println!("wrote {}", path.display());
            }
            let (peak_value, peak_t) = output::peak_of(&curve);
            let truncation_bound = if engine == Engine::Analytic {
                None
            } else {
                let t_end = scenario.sampling.t_end();
                Some(expectation::truncation_tail(scenario, kind, t_end)?)
            };
            summaries.push(CurveSummary {
                file: file_name,
                engine: engine.name().into(),
                receiver: receiver.clone(),
                component: component_name,
                observable: run_manifest.observable.clone(),
                n_points: curve.len(),
                peak_value,
                peak_t,
                truncation_bound,
                runtime_ms,
            });
        }
    }
    Ok(summaries)
}

fn run_command(args: RunArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let params = load_params(&args)?;
    let scenario = params.build()?;
    let observable: Observable = args.observable.into();
    let engines = args.engine_args.engine.engines();

    let dir = out_dir(&args.engine_args);
    std::fs::create_dir_all(&dir).map_err(CliError::io)?;

    let manifest = RunManifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command: "run".into(),
        scenario: args.scenario.display().to_string(),
        engine: String::new(),
        observable: observable.to_string(),
        seed: args.engine_args.seed,
        overrides: args.engine_args.overrides.clone(),
        engine_params: engine_params(&args.engine_args, &scenario),
        out_dir: dir,
    };

    let curves = emit_scenario_curves(
        "run",
        &scenario,
        observable,
        &engines,
        &args.engine_args,
        &manifest,
    )?;

    let summary = Summary {
        manifest,
        curves,
        table: None,
        nearest_tail_mass: tail_mass_of(&scenario),
        total_runtime_ms: start.elapsed().as_millis(),
    };
    let path = output::write_summary(&summary.manifest.out_dir, &summary).map_err(CliError::io)?;
    if !args.engine_args.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn tail_mass_of(scenario: &ValidatedScenario) -> Option<f64> {
    scenario.max_placement_radius.is_finite().then(|| {
        molsig::geometry::nearest_tail_mass(
            scenario.field.active_density(),
            scenario.receiver.radius,
            scenario.max_placement_radius,
        )
    })
}

fn dump_points_command(args: DumpPointsArgs) -> Result<(), CliError> {
    let mut params = config::params_from_path(&args.scenario)?;
    apply_overrides(&mut params, &args.overrides)?;
    let scenario = params.build()?;
    if !scenario.max_placement_radius.is_finite() {
        return Err(CoreError::domain(
            "dumping realizations requires a finite max_placement_radius",
        )
        .into());
    }
    let dir = args.out.clone().unwrap_or_else(|| {
        std::env::var_os("MOLSIG_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    });
    std::fs::create_dir_all(&dir).map_err(CliError::io)?;

    let manifest = RunManifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command: "dump-points".into(),
        scenario: args.scenario.display().to_string(),
        engine: "geometry".into(),
        observable: "positions".into(),
        seed: args.seed,
        overrides: args.overrides.clone(),
        engine_params: vec![("realizations".into(), args.realizations.to_string())],
        out_dir: dir.clone(),
    };

    let path = dir.join("points.csv");
    let mut text = String::new();
    for line in manifest.header_lines(&scenario.receiver.kind.to_string(), "positions") {
        text.push_str(&line);
        text.push('\n');
    }
    text.push_str("realization_id,point_id,x,y,z\n");
    for i in 0..args.realizations {
        let seed = molsig::seeding::derive_seed(
            args.seed,
            &[molsig::seeding::domain::MC_REALIZATION, i as u64],
        );
        let realization = molsig::geometry::sample_ppp_shell(
            scenario.field.active_density(),
            scenario.receiver.radius,
            scenario.max_placement_radius,
            seed,
        )?;
        for (j, p) in realization.positions.iter().enumerate() {
            text.push_str(&format!("{i},{j},{},{},{}\n", p[0], p[1], p[2]));
        }
    }
    std::fs::write(&path, text).map_err(CliError::io)?;
    if !args.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn builtin_params(target: Target) -> Result<ScenarioParams, CliError> {
    let text = match target {
        Target::Fig2 | Target::Table1 => FIG2_TOML,
        Target::Fig3 => FIG3_TOML,
    };
    Ok(config::params_from_toml(text)?)
}

fn reproduce_command(args: ReproduceArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let target = args.target;
    let dir = out_dir(&args.engine_args);
    std::fs::create_dir_all(&dir).map_err(CliError::io)?;

    let mut base = builtin_params(target)?;
    apply_overrides(&mut base, &args.engine_args.overrides)?;

    // fig2 reports net changes per sampling interval, fig3 level curves.
    let observable = match target {
        Target::Fig2 | Target::Table1 => Observable::NetChange,
        Target::Fig3 => Observable::Level,
    };
    let engines = match target {
        Target::Table1 => vec![Engine::Analytic],
        _ => args.engine_args.engine.engines(),
    };

    let manifest = RunManifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command: format!("reproduce {}", target.name()),
        scenario: format!("builtin:{}", target.name()),
        engine: String::new(),
        observable: observable.to_string(),
        seed: args.engine_args.seed,
        overrides: args.engine_args.overrides.clone(),
        engine_params: Vec::new(),
        out_dir: dir,
    };

    let mut curves = Vec::new();
    let mut tail_mass = None;
    for kind in [ReceiverKind::Absorbing, ReceiverKind::Passive] {
        let mut params = base.clone();
        params.receiver_kind = kind;
        let scenario = params.build()?;
        tail_mass = tail_mass_of(&scenario);
        let mut m = manifest.clone();
        m.engine_params = engine_params(&args.engine_args, &scenario);
        curves.extend(emit_scenario_curves(
            target.name(),
            &scenario,
            observable,
            &engines,
            &args.engine_args,
            &m,
        )?);
    }

    let table = if target == Target::Table1 {
        Some(build_table1(&curves, &manifest, &args.engine_args)?)
    } else {
        None
    };

    let summary = Summary {
        manifest,
        curves,
        table,
        nearest_tail_mass: tail_mass,
        total_runtime_ms: start.elapsed().as_millis(),
    };
    let path = output::write_summary(&summary.manifest.out_dir, &summary).map_err(CliError::io)?;
    if !args.engine_args.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Extracts the four reference peak values from the analytic net curves and
/// writes `table1.csv` with the relative errors.
fn build_table1(
    curves: &[CurveSummary],
    manifest: &RunManifest,
    args: &EngineArgs,
) -> Result<Vec<TableEntry>, CliError> {
    let mut entries = Vec::new();
    for (kind, component, reference) in TABLE1_REFERENCE {
        let receiver = kind.to_string();
        let component_name = component.to_string();
        let found = curves
            .iter()
            .find(|c| {
                c.engine == "analytic" && c.receiver == receiver && c.component == component_name
            })
            .ok_or_else(|| CliError {
                kind: "internal",
                message: format!("missing analytic curve {receiver}/{component_name}"),
                exit_code: 3,
            })?;
        entries.push(TableEntry {
            receiver,
            component: component_name,
            peak_net: found.peak_value,
            reference,
            relative_error: (found.peak_value - reference) / reference,
        });
    }

    let path = manifest.out_dir.join("table1.csv");
    let mut text = String::new();
    for line in manifest.header_lines("both", "scaling-peaks") {
        text.push_str(&line);
        text.push('\n');
    }
    text.push_str("receiver,component,peak_net,reference,relative_error\n");
    for e in &entries {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            e.receiver, e.component, e.peak_net, e.reference, e.relative_error
        ));
    }
    std::fs::write(&path, text).map_err(CliError::io)?;
    if !args.quiet {
        println!("wrote {}", path.display());
        println!("receiver   component  peak       reference  rel_error");
        for e in &entries {
            println!(
                "{:<10} {:<10} {:<10.4} {:<10.4} {:+.4}%",
                e.receiver,
                e.component,
                e.peak_net,
                e.reference,
                e.relative_error * 100.0
            );
        }
    }
    Ok(entries)
}
