//! `covertauth` command-line front end.

mod gates;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use covertauth::config::{load_config, ConfigError, ScenarioConfig};
use covertauth::harness::experiments::solve_scenario;
use covertauth::harness::{run_experiment, Experiment};

use manifest::{EmittedFile, RunManifest};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "covertauth",
    version,
    about = "Covert beam alignment and weighted energy-detector authentication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the Monte Carlo validation gates; exit 3 if any fails.
    Validate(CommonArgs),
    /// Covert design sweeps: rate against epsilon and SNR, convergence traces.
    Covert(CommonArgs),
    /// Authentication experiments: weight comparison, worst case, side lobes.
    Auth(CommonArgs),
    /// Run one named experiment, or all of them.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Experiment name; omit to run every experiment.
        #[arg(long)]
        experiment: Option<Experiment>,
    },
    /// Transmit beam pattern with and without mutual coupling.
    Pattern(CommonArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials, overriding the configuration.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Infeasible(String),
    Validation(String),
    Other(String),
}

impl From<covertauth::Error> for Failure {
    fn from(e: covertauth::Error) -> Self {
        match e {
            covertauth::Error::Infeasible(_) => Failure::Infeasible(e.to_string()),
            covertauth::Error::UnknownExperiment(_) => Failure::Usage(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(format!("config: {e}"))
    }
}

fn load(args: &CommonArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("COVERTAUTH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("COVERTAUTH_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Other(e.to_string()))
}

fn emit(
    experiments: &[Experiment],
    cfg: &ScenarioConfig,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<(), Failure> {
    std::fs::create_dir_all(out).map_err(|e| Failure::Other(format!("{}: {e}", out.display())))?;
    for &exp in experiments {
        let result = run_experiment(exp, cfg, cfg.seed)?;
        let path = out.join(exp.file_name(cfg.seed));
        result.table.write(&path)?;
        manifest.files.push(EmittedFile {
            experiment: exp.name().to_string(),
            path: path.display().to_string(),
            rows: result.table.rows.len(),
            summary: result.summary.into_iter().collect(),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<RunManifest, Failure> {
    configure_threads()?;
    let start = Instant::now();
    let (name, args, experiments): (&str, CommonArgs, Vec<Experiment>) = match cli.command {
        Command::Validate(a) => ("validate", a, vec![Experiment::ValidatePdf, Experiment::ValidateRoc]),
        Command::Covert(a) => (
            "covert",
            a,
            vec![
                Experiment::CovertSweepEps,
                Experiment::CovertSweepSnr,
                Experiment::Convergence,
            ],
        ),
        Command::Auth(a) => (
            "auth",
            a,
            vec![
                Experiment::WeightCompare,
                Experiment::WorstCase,
                Experiment::SidelobeRoc,
            ],
        ),
        Command::Sweep { common, experiment } => {
            let list = experiment.map_or_else(|| Experiment::ALL.to_vec(), |e| vec![e]);
            ("sweep", common, list)
        }
        Command::Pattern(a) => ("pattern", a, vec![Experiment::BeamPattern]),
    };
    let cfg = load(&args)?;
    let mut manifest = RunManifest::new(name, &args.config, &cfg);

    if experiments.iter().any(|&e| e != Experiment::BeamPattern) {
        solve_scenario(&cfg, cfg.seed)?;
    }

    let mut failed = Vec::new();
    if name == "validate" {
        manifest.gates = gates::run_gates(&cfg)?;
        failed = manifest
            .gates
            .iter()
            .filter(|g| !g.passed)
            .map(|g| g.metric.clone())
            .collect();
    }

    let out = match (&args.out, name) {
        (Some(dir), _) => Some(dir.clone()),
        (None, "validate") => None,
        (None, _) => Some(PathBuf::from("results")),
    };
    if let Some(dir) = &out {
        manifest.output_dir = Some(dir.display().to_string());
        emit(&experiments, &cfg, dir, &mut manifest)?;
    }
    manifest.duration_secs = start.elapsed().as_secs_f64();

    if failed.is_empty() {
        Ok(manifest)
    } else {
        print_manifest(&manifest);
        Err(Failure::Validation(format!("failed gates: {}", failed.join(", "))))
    }
}

fn print_manifest(manifest: &RunManifest) {
    match serde_json::to_string_pretty(manifest) {
        Ok(text) => println!("{text}"),
        Err(e) => eprintln!("error: cannot serialize manifest: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(manifest) => {
            print_manifest(&manifest);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let (code, msg) = match failure {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Infeasible(m) => (EXIT_INFEASIBLE, m),
                Failure::Validation(m) => (EXIT_VALIDATION, m),
                Failure::Other(m) => (EXIT_USAGE, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
