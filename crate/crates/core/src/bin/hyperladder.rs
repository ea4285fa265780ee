//! Command-line front end: spectrum, converge, selftest, dump-matrices.
//!
//! Report bytes go to the configured output file and depend only on (config,
//! code version); progress, timings and cache outcomes go to stderr and are
//! suppressed by --quiet. Exit codes: 0 success, 1 internal error, 2 bad
//! config (nothing written), 3 a rung failed to bind (partial table
//! written), 4 cache corruption.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyperladder::pipeline::{self, CacheOutcome, Overrides, RunConfig, ValidatedRun};

#[derive(Parser)]
#[command(
    name = "hyperladder",
    version,
    about = "Bound-state spectra of one- and two-electron ions by hyperspherical matrix factorization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the configured term and write the spectrum table.
    Spectrum(RunArgs),
    /// Sweep Kmax and tabulate ground-state convergence.
    Converge(ConvergeArgs),
    /// Run the built-in consistency checks; one line per check on stdout.
    Selftest,
    /// Write the rung operators (W, beta, alpha, a, spectral) as JSON.
    DumpMatrices(DumpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override [output].path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override [output].format: csv or structured.
    #[arg(long)]
    format: Option<String>,
    /// Override the assembled-matrix cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Suppress stderr progress and timing lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Strictly ascending Kmax values, e.g. --kmax-list 0,4,8,12.
    #[arg(long, value_delimiter = ',', required = true)]
    kmax_list: Vec<u32>,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Ladder rung n >= 1.
    #[arg(long)]
    rung: u32,
}

fn validated(args: &RunArgs) -> hyperladder::Result<ValidatedRun> {
    let config = RunConfig::load(&args.config)?;
    let over = Overrides {
        output: args.output.clone(),
        format: args.format.clone(),
        cache_dir: args.cache_dir.clone(),
    };
    pipeline::validate(&config, &over)
}

fn log_cache(quiet: bool, cache: CacheOutcome) {
    if quiet {
        return;
    }
    let what = match cache {
        CacheOutcome::Disabled => "cache disabled",
        CacheOutcome::Cold => "cache cold (assembled and stored)",
        CacheOutcome::Warm => "cache warm (loaded)",
    };
    eprintln!("{what}");
}

fn log_phases(quiet: bool, phases: &[pipeline::Phase]) {
    if quiet {
        return;
    }
    for p in phases {
        eprintln!("{}: {:.3} s", p.name, p.seconds);
    }
}

fn run(cli: Cli) -> hyperladder::Result<ExitCode> {
    match cli.cmd {
        Cmd::Spectrum(args) => {
            let run = validated(&args)?;
            let out = pipeline::cmd_spectrum(&run)?;
            log_cache(args.quiet, out.cache);
            log_phases(args.quiet, &out.timings);
            if !args.quiet {
                eprintln!(
                    "wrote {} ({}, {} states, basis {})",
                    run.output.display(),
                    run.format.name(),
                    out.report.states.len(),
                    out.report.basis_size
                );
            }
            if let Some(t) = &out.report.truncated {
                eprintln!(
                    "no bound state at rung {} (lowest eigenvalue {:.6e} >= 0); table is partial",
                    t.rung, t.lambda_au
                );
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Converge(args) => {
            let run = validated(&args.run)?;
            let out = pipeline::cmd_converge(&run, &args.kmax_list)?;
            log_phases(args.run.quiet, &out.timings);
            if !args.run.quiet {
                eprintln!(
                    "wrote {} ({}, {} rows)",
                    run.output.display(),
                    run.format.name(),
                    out.report.points.len()
                );
            }
            if let Some(t) = &out.report.truncated {
                eprintln!(
                    "no bound state at rung {} (lowest eigenvalue {:.6e} >= 0); sweep is partial",
                    t.rung, t.lambda_au
                );
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest => {
            let report = pipeline::run_selftest(None);
            print!("{}", report.render());
            if report.all_ok() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Cmd::DumpMatrices(args) => {
            let run = validated(&args.run)?;
            let out = pipeline::cmd_dump_matrices(&run, args.rung)?;
            log_cache(args.run.quiet, out.cache);
            if !args.run.quiet {
                eprintln!(
                    "wrote {} (rung {}, {} channels)",
                    run.output.display(),
                    args.rung,
                    out.dump.channels.len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
