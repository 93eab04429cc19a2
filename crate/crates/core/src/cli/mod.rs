//! The `netres` command line.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 model assumption violated
//! (not strongly connected, not symmetrizable), 4 numeric failure.
//! `NETRES_THREADS` caps the worker pool used by sweeps.

pub mod manifest;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{self, energy_sweep, mean_kinetic_energy, resonance_peak, uniform_grid, Stimulus};
use crate::beats::{detect_beats, estimate_drive_frequency, omen_score, BeatConfig, BeatReport};
use crate::error::{Error, ErrorClass, Result};
use crate::flaming::{plan_rescale, rescale_network};
use crate::model::NetworkModel;
use crate::simulator::{SimConfig, Simulator};

use manifest::{load_command, run_record, write_manifest, RunManifest};
use output::{emit, json_bytes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "netres",
    version,
    about = "Resonance and beat analysis on weighted directed networks",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    /// Replay a run from a manifest, or from a JSON report with a `run` record.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "lowercase")]
pub enum Command {
    /// Masses, eigenvalues and eigenvectors of a graph.
    Analyze(AnalyzeArgs),
    /// Oscillation energy of every node over a frequency grid.
    Sweep(SweepArgs),
    /// Rescale link weights so a mode sits on the driving frequency.
    Rescale(RescaleArgs),
    /// Integrate the forced, damped dynamics in time.
    Simulate(SimulateArgs),
    /// Look for beats in a simulation CSV.
    Beats(BeatsArgs),
    /// Run the whole pipeline on the bundled example graphs.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Driven node.
    #[arg(long)]
    pub node: usize,
    /// Stimulus amplitude.
    #[arg(long = "F", default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.02)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega_min: f64,
    /// Defaults to 1.2 times the largest eigenfrequency.
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long, default_value_t = analytic::DEFAULT_SWEEP_STEPS)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RescaleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub omega: f64,
    /// Where to write the rescaled edge list.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the plan; stdout otherwise.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub node: usize,
    #[arg(long)]
    pub omega: f64,
    #[arg(long = "F", default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.02)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    #[arg(long)]
    pub t_end: f64,
    /// Moving-average window in samples; one driving period by default.
    #[arg(long)]
    pub ma_window: Option<usize>,
    /// Keep every n-th integrator step.
    #[arg(long, default_value_t = SimConfig::DEFAULT_STRIDE)]
    pub stride: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BeatsArgs {
    /// Simulation CSV with columns t,node,x,v,K,K_ma.
    #[arg(long)]
    pub input: PathBuf,
    /// Analyse one node only.
    #[arg(long)]
    pub node: Option<usize>,
    /// Driving frequency; read from the input's manifest or estimated when absent.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Graph for the predicted beat frequency; read from the input's manifest when absent.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DemoArgs {
    #[arg(long, default_value = "netres-demo")]
    pub out_dir: PathBuf,
}

impl Command {
    /// Input files whose digests go into the manifest.
    pub fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Analyze(a) => vec![&a.graph],
            Command::Sweep(a) => vec![&a.graph],
            Command::Rescale(a) => vec![&a.graph],
            Command::Simulate(a) => vec![&a.graph],
            Command::Beats(a) => std::iter::once(&a.input).chain(&a.graph).collect(),
            Command::Demo(_) => vec![],
        }
        .into_iter()
        .map(PathBuf::as_path)
        .collect()
    }
}

const GRAPH4: &str = include_str!("../../data/graph4.txt");
const GRAPH5: &str = include_str!("../../data/graph5.txt");

pub fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Io => 1,
        ErrorClass::Usage => 2,
        ErrorClass::Model => 3,
        ErrorClass::Numeric => 4,
    }
}

/// Parse `argv`, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    configure_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var("NETRES_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => log::warn!("ignoring NETRES_THREADS={raw:?}"),
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let command = match (cli.config, cli.command) {
        (Some(path), _) => load_command(&path)?,
        (None, Some(cmd)) => cmd,
        (None, None) => {
            return Err(Error::InvalidParameter("a subcommand or --config is required".into()))
        }
    };
    execute(&command)
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Analyze(a) => analyze(command, a),
        Command::Sweep(a) => sweep(command, a),
        Command::Rescale(a) => rescale(command, a),
        Command::Simulate(a) => simulate(command, a),
        Command::Beats(a) => beats(command, a),
        Command::Demo(a) => demo(a),
    }
}

fn load_model(path: &Path) -> Result<NetworkModel> {
    NetworkModel::parse(&std::fs::read_to_string(path)?)
}

fn finish(command: &Command, out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    emit(out, bytes)?;
    if let Some(path) = out {
        write_manifest(path, command)?;
    }
    Ok(())
}

fn analyze(command: &Command, args: &AnalyzeArgs) -> Result<()> {
    let model = load_model(&args.graph)?;
    let spec = &model.spectrum;
    let bytes = match args.format {
        Format::Csv => output::spectrum_csv(spec)?,
        Format::Json => json_bytes(&json!({
            "run": run_record(command)?,
            "n": model.n(),
            "m": model.masses().as_slice(),
            "lambdas": spec.lambdas,
            "omegas": spec.omegas,
            "eigenvectors": (0..spec.n()).map(|mu| spec.vector(mu).as_slice().to_vec()).collect::<Vec<_>>(),
            "symmetry_residual": model.symmetrization.asymmetry,
        }))?,
    };
    finish(command, args.out.as_deref(), &bytes)
}

fn sweep(command: &Command, args: &SweepArgs) -> Result<()> {
    let model = load_model(&args.graph)?;
    let spec = &model.spectrum;
    let omega_max = args
        .omega_max
        .unwrap_or(analytic::DEFAULT_SWEEP_SPAN * spec.omega_max());
    let grid = uniform_grid(args.omega_min, omega_max, args.steps)?;
    let template = Stimulus::new(args.node, args.amplitude, 0.0, args.gamma)?;
    let table = energy_sweep(spec, model.masses(), &template, &grid)?;
    let bytes = match args.format {
        Format::Csv => output::sweep_csv(&table)?,
        Format::Json => {
            let peaks: Vec<_> = (0..table.node_count())
                .filter_map(|i| table.peak(i).map(|(w, e)| json!({"node": i, "omega": w, "energy": e})))
                .collect();
            let predicted: Vec<_> = spec
                .omegas
                .iter()
                .map(|&w| resonance_peak(w, args.gamma))
                .collect();
            json_bytes(&json!({
                "run": run_record(command)?,
                "omegas": table.omegas,
                "energies": table.energies,
                "peaks": peaks,
                "predicted_peaks": predicted,
            }))?
        }
    };
    finish(command, args.out.as_deref(), &bytes)
}

fn rescale(command: &Command, args: &RescaleArgs) -> Result<()> {
    let model = load_model(&args.graph)?;
    let plan = plan_rescale(&model.spectrum, args.omega)?;
    let moved = NetworkModel::new(rescale_network(&model.graph, &plan)?)?;
    if let Some(out) = &args.out {
        finish(command, Some(out), moved.graph.to_edge_list().as_bytes())?;
    }
    let report = json_bytes(&json!({
        "run": run_record(command)?,
        "plan": plan,
        "omegas_before": model.spectrum.omegas,
        "omegas_after": moved.spectrum.omegas,
    }))?;
    finish(command, args.plan.as_deref(), &report)
}

fn simulate(command: &Command, args: &SimulateArgs) -> Result<()> {
    let model = load_model(&args.graph)?;
    let stim = Stimulus::new(args.node, args.amplitude, args.omega, args.gamma)?;
    let mut cfg = SimConfig::new(stim, args.dt, args.t_end);
    cfg.sample_stride = args.stride;
    cfg.ma_window_steps = args.ma_window.map(|w| w * args.stride);
    cfg.omega_max = Some(model.spectrum.omega_max());
    let run = Simulator::new(&model.graph, model.masses())?.run(&cfg)?;
    let bytes = match args.format {
        Format::Csv => output::simulation_csv(&run)?,
        Format::Json => json_bytes(&json!({
            "run": run_record(command)?,
            "dt": run.dt,
            "stride": run.stride,
            "ma_window_steps": run.ma_window_steps,
            "ma_offset": run.ma_offset,
            "stability": run.stability,
            "times": run.times,
            "nodes": output::node_series(&run),
        }))?,
    };
    finish(command, args.out.as_deref(), &bytes)
}

/// Parameters of the simulation that produced `input`, from its manifest.
fn sibling_simulation(input: &Path) -> Option<SimulateArgs> {
    let text = std::fs::read_to_string(manifest::manifest_path(input)).ok()?;
    let manifest: RunManifest = serde_json::from_str(&text).ok()?;
    match manifest.to_command().ok()? {
        Command::Simulate(a) => Some(a),
        _ => None,
    }
}

#[derive(Debug, Serialize)]
struct NodeBeats {
    node: usize,
    #[serde(flatten)]
    report: BeatReport,
    omen_score: Option<f64>,
}

fn beats(command: &Command, args: &BeatsArgs) -> Result<()> {
    if args.format != Format::Json {
        return Err(Error::InvalidParameter("beats reports are JSON only".into()));
    }
    let traces = output::read_simulation_csv(std::fs::File::open(&args.input)?)?;
    let sim = sibling_simulation(&args.input);
    let graph = args.graph.clone().or_else(|| sim.as_ref().map(|s| s.graph.clone()));
    let gamma = args.gamma.or_else(|| sim.as_ref().map(|s| s.gamma));
    let model = graph.as_deref().map(load_model).transpose()?;

    let mut reports = Vec::new();
    for (&node, trace) in &traces {
        if args.node.is_some_and(|n| n != node) {
            continue;
        }
        let omega = args
            .omega
            .or_else(|| sim.as_ref().map(|s| s.omega))
            .or_else(|| estimate_drive_frequency(&trace.x, &trace.times));
        let cfg = match omega {
            Some(w) => BeatConfig::default().with_drive(w),
            None => BeatConfig::default(),
        };
        let mut report = detect_beats(&trace.kinetic_ma, &trace.ma_times, &cfg)?;
        let mut score = None;
        if let (Some(model), Some(gamma)) = (&model, gamma) {
            report = report.with_prediction(&model.spectrum, gamma);
            if let (Some(w), Some(s)) = (omega, &sim) {
                let stim = Stimulus::new(s.node, s.amplitude, w, gamma)?;
                let reference = peak_kinetic_energy(model, &stim, node)?;
                score = Some(omen_score(&report, reference));
            }
        }
        reports.push(NodeBeats {
            node,
            report,
            omen_score: score,
        });
    }
    if reports.is_empty() {
        return Err(Error::InvalidParameter("no matching node in the input".into()));
    }
    let bytes = json_bytes(&json!({
        "run": run_record(command)?,
        "frequency_domain": "energy",
        "nodes": reports,
    }))?;
    finish(command, args.out.as_deref(), &bytes)
}

/// Analytic mean kinetic energy of `node` with the drive moved onto the
/// resonance peak of the mode nearest `stim.omega`.
pub fn peak_kinetic_energy(model: &NetworkModel, stim: &Stimulus, node: usize) -> Result<f64> {
    let spec = &model.spectrum;
    let mu = spec.nearest_mode(stim.omega);
    let peak = resonance_peak(spec.omegas[mu], stim.damping).unwrap_or(stim.omega);
    mean_kinetic_energy(spec, model.masses(), &stim.with_omega(peak), node)
}

fn demo(args: &DemoArgs) -> Result<()> {
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;
    for (name, text) in [("graph4", GRAPH4), ("graph5", GRAPH5)] {
        let graph = dir.join(format!("{name}.txt"));
        std::fs::write(&graph, text)?;
        let model = NetworkModel::parse(text)?;
        let spec = &model.spectrum;
        let omega1 = spec.smallest_nonzero_omega().unwrap_or(1.0);
        // drive the node that couples most strongly to the first mode
        let node = (0..model.n())
            .max_by(|&a, &b| spec.component(1, a).abs().total_cmp(&spec.component(1, b).abs()))
            .unwrap_or(0);
        let out = |suffix: &str| Some(dir.join(format!("{name}-{suffix}")));

        let steps = [
            Command::Analyze(AnalyzeArgs {
                graph: graph.clone(),
                format: Format::Json,
                out: out("analyze.json"),
            }),
            Command::Sweep(SweepArgs {
                graph: graph.clone(),
                node,
                amplitude: 1.0,
                gamma: 0.02,
                omega_min: 0.0,
                omega_max: None,
                steps: analytic::DEFAULT_SWEEP_STEPS,
                format: Format::Csv,
                out: out("sweep.csv"),
            }),
            Command::Rescale(RescaleArgs {
                graph: graph.clone(),
                omega: 1.1 * omega1,
                out: out("rescaled.txt"),
                plan: out("rescale.json"),
            }),
            Command::Simulate(SimulateArgs {
                graph: graph.clone(),
                node,
                omega: omega1 - 0.05,
                amplitude: 1.0,
                gamma: 0.02,
                dt: 0.001,
                t_end: 600.0,
                ma_window: None,
                stride: SimConfig::DEFAULT_STRIDE,
                format: Format::Csv,
                out: out("simulate.csv"),
            }),
            Command::Beats(BeatsArgs {
                input: dir.join(format!("{name}-simulate.csv")),
                node: None,
                omega: None,
                graph: None,
                gamma: None,
                format: Format::Json,
                out: out("beats.json"),
            }),
        ];
        for step in &steps {
            execute(step)?;
        }
        println!("{name}: outputs written to {}", dir.display());
    }
    Ok(())
}
