use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dispersia_core::scenario::{emit_figure_dataset, run_scenario, write_datasets, Dataset, Figure, ScenarioConfig};
use dispersia_core::selftest::{group_primary, run_criterion, Criterion};
use dispersia_core::DispersiaError;

/// Atom-surface dispersion forces: Casimir-Polder scans and quantum friction.
#[derive(Parser)]
#[command(name = "dispersia", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML scenario and write one CSV per method.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir` in the file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a configuration key, e.g. `--set surface.gamma=1e-3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Emit a figure dataset from its built-in preset.
    Figure {
        /// fig2, fig3, fig4 or fig5
        figure: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the acceptance checks and print one line per criterion.
    Selftest {
        /// Restrict to check ids such as `c05` or `c04b`.
        #[arg(long)]
        only: Vec<String>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_for(e: &DispersiaError) -> ExitCode {
    match e {
        DispersiaError::Configuration(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_NUMERIC),
    }
}

fn configure_threads() -> Result<(), DispersiaError> {
    let Ok(raw) = std::env::var("DISPERSIA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| DispersiaError::Configuration(format!("DISPERSIA_THREADS: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| DispersiaError::Configuration(format!("DISPERSIA_THREADS: {e}")))
}

fn write(datasets: &[Dataset], dir: &Path) -> Result<(), DispersiaError> {
    let r = write_datasets(datasets, dir);
    for d in datasets {
        eprintln!("wrote {}", dir.join(format!("{}.csv", d.name)).display());
    }
    r.map(|_| ())
}

fn run(cli: Cli) -> Result<ExitCode, DispersiaError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out, set } => {
            let mut cfg = ScenarioConfig::from_file(&config)?;
            for s in &set {
                cfg.set(s)?;
            }
            let (spec, datasets) = run_scenario(&cfg)?;
            let dir = out.or(spec.dir).unwrap_or_else(|| PathBuf::from("."));
            write(&datasets, &dir)?;
        }
        Command::Figure { figure, out, set } => {
            let fig: Figure = figure.parse()?;
            let datasets = emit_figure_dataset(fig, &set)?;
            write(&datasets, &out)?;
        }
        Command::Selftest { only } => {
            let checks: Vec<Criterion> = if only.is_empty() {
                Criterion::ALL.to_vec()
            } else {
                only.iter()
                    .map(|id| {
                        Criterion::from_id(id)
                            .ok_or_else(|| DispersiaError::Configuration(format!("--only: unknown check `{id}`")))
                    })
                    .collect::<Result<_, _>>()?
            };
            let outcomes: Vec<_> = checks.into_iter().map(run_criterion).collect();
            let grouped = group_primary(&outcomes);
            for g in &grouped {
                println!("{g}");
            }
            let failed = grouped.iter().filter(|g| !g.passed()).count();
            println!("{} of {} criteria passed", grouped.len() - failed, grouped.len());
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
