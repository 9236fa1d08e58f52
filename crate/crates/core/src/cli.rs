//! Command-line front end.
//!
//! Failures print one line `error:<category>: <message>` on stderr, with
//! category `config` (exit 2), `runtime` or `interrupted` (exit 3), or
//! `budget` (exit 4).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use clap::{Args, Parser, Subcommand};

use crate::experiments::{
    oracle_check, run_config, write_outputs, ConfigError, ConfigMap, ExperimentError, ScenarioConfig,
    CONFIG_KEYS, ORACLE_CHECK_TOLERANCE,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "CAVITY_RWA_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

fn keys_help() -> String {
    let mut s = String::from("Config keys ([section] key = value; override with --set section.key=value):\n");
    for k in CONFIG_KEYS {
        s.push_str(&format!("  {:<34} [{}] {}\n", k.key, k.unit, k.help));
    }
    s.push_str(&format!("\nDefault output directory: ${OUTPUT_DIR_ENV}, else ./out"));
    s
}

#[derive(Parser, Debug)]
#[command(name = "cavity-rwa", version, about = "Three atoms in a 1D cavity under the RWA: light-cone diagnostics")]
#[command(after_help = keys_help())]
pub struct Cli {
    /// Print per-run progress.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioArgs {
    /// Config file (INI-style sections).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario preset (fig1..fig6, custom); overrides scenario.id.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Desk-scale factor; overrides scenario.scale.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Override a key: --set section.key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a scenario (its preset sweep included, if any).
    Run(ScenarioArgs),
    /// Run a convergence sweep over mode counts.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated mode counts; overrides modes.sweep.
        #[arg(long, value_delimiter = ',')]
        counts: Vec<u64>,
    },
    /// Check a config file without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Compare the integrator against exact propagation on the 8-mode test system.
    OracleCheck,
}

enum Failure {
    Config(String),
    Runtime(String),
    Interrupted(String),
    Budget(String),
}

impl Failure {
    fn report(&self, err: &mut dyn Write) -> i32 {
        let (cat, msg, code) = match self {
            Failure::Config(m) => ("config", m, EXIT_CONFIG),
            Failure::Runtime(m) => ("runtime", m, EXIT_RUNTIME),
            Failure::Interrupted(m) => ("interrupted", m, EXIT_RUNTIME),
            Failure::Budget(m) => ("budget", m, EXIT_BUDGET),
        };
        let _ = writeln!(err, "error:{cat}: {}", msg.replace('\n', " "));
        code
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(_) | ExperimentError::Config(_) => Failure::Config(e.to_string()),
            ExperimentError::Budget { .. } => Failure::Budget(e.to_string()),
            ExperimentError::Interrupted { .. } => Failure::Interrupted(e.to_string()),
            // under-resolved steps and similar are configuration problems
            ExperimentError::Dynamics(ref d) if matches!(
                d,
                crate::DynamicsError::UnderResolved { .. }
                    | crate::DynamicsError::InvalidStepSize { .. }
                    | crate::DynamicsError::InvalidConfig(_)
            ) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn load_config(path: Option<&Path>, args_overrides: &[String]) -> Result<ConfigMap, Failure> {
    let mut map = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::default(),
    };
    for o in args_overrides {
        map.apply_override(o)?;
    }
    Ok(map)
}

fn scenario_from_args(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let mut map = load_config(args.config.as_deref(), &[])?;
    if let Some(s) = &args.scenario {
        map.set("scenario.id", s)?;
    }
    if let Some(s) = args.scale {
        map.set("scenario.scale", &s.to_string())?;
    }
    for o in &args.overrides {
        map.apply_override(o)?;
    }
    let mut cfg = map.to_scenario()?;
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cfg: &ScenarioConfig, verbose: bool, out: &mut dyn Write) -> Result<(), Failure> {
    cfg.validate()?;
    cfg.check_budget()?;
    if verbose {
        let _ = writeln!(
            out,
            "running {} ({} run(s), estimated {:.1} s each at most)",
            cfg.scenario,
            cfg.sweep.len().max(1),
            cfg.estimated_seconds()
        );
    }
    let runs = run_config(cfg, Some(&INTERRUPTED))?;
    let dir = output_dir(cfg);
    let stem = cfg.scenario.to_string();
    let written = write_outputs(&dir, &stem, &runs).map_err(|e| Failure::Runtime(e.to_string()))?;
    for run in &runs {
        let row = run.tail_row();
        let _ = writeln!(
            out,
            "summary scenario={} modes={} steps={} max_norm_dev={:e} max_energy_drift={:e} \
             tail_fraction={:e} precausal_avg={:e}",
            cfg.scenario,
            row.mode_count,
            run.steps,
            run.series.max_norm_deviation(),
            run.series.max_relative_energy_drift(),
            row.tail_fraction,
            row.precausal_avg
        );
    }
    if verbose {
        for p in &written {
            let _ = writeln!(out, "wrote {}", p.display());
        }
    }
    if let Some(stopped) = runs.iter().find(|r| !r.complete) {
        let t = stopped.series.rows.last().map_or(0.0, |r| r.t);
        return Err(Failure::Interrupted(format!("stopped at t = {t}; partial output flushed")));
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => execute(&scenario_from_args(&args)?, cli.verbose, out),
        Command::Sweep { scenario, counts } => {
            let mut cfg = scenario_from_args(&scenario)?;
            if !counts.is_empty() {
                cfg.sweep = counts;
            }
            if cfg.sweep.is_empty() {
                return Err(Failure::Config("sweep needs mode counts (--counts or modes.sweep)".into()));
            }
            execute(&cfg, cli.verbose, out)
        }
        Command::Validate { config, overrides } => {
            let cfg = load_config(Some(&config), &overrides)?.to_scenario()?;
            cfg.validate()?;
            cfg.check_budget()?;
            let _ = writeln!(
                out,
                "ok scenario={} modes={} estimated_seconds={:.1}",
                cfg.scenario,
                cfg.modes.mode_count(),
                cfg.estimated_seconds()
            );
            Ok(())
        }
        Command::OracleCheck => {
            let err = oracle_check().map_err(|e| Failure::Runtime(e.to_string()))?;
            let _ = writeln!(
                out,
                "oracle-check max_amplitude_error={err:e} tolerance={ORACLE_CHECK_TOLERANCE:e}"
            );
            if err <= ORACLE_CHECK_TOLERANCE {
                Ok(())
            } else {
                Err(Failure::Runtime(format!("oracle deviation {err:e} above tolerance")))
            }
        }
    }
}

/// Parses `argv` and runs the command, writing results to `out` and errors
/// to `err`. Returns the process exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Failure::Config(first).report(err);
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => f.report(err),
    }
}

/// Entry point for the binary: installs the Ctrl-C handler and uses the
/// process's standard streams.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    #[cfg(not(target_arch = "wasm32"))]
    let _ = ctrlc::set_handler(|| INTERRUPTED.store(true, std::sync::atomic::Ordering::Relaxed));
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
