//! `quadprop`: simulations, kernel grids and trap stability scans from a
//! configuration file.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{load_config, Format, RunConfig};
use error::CliError;
use output::{emit, write_file};

#[derive(Parser)]
#[command(name = "quadprop", version, about = "Propagators and Gaussian dynamics for time-dependent quadratic Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of coefficients, state parameters and observables.
    Simulate(Common),
    /// Kernel values on an (x, x') grid at one time.
    Kernel(Common),
    /// Floquet stability of the trap over an (a, q) grid.
    Scan(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output file (defaults to the configured path, else stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn prepare(args: &Common) -> Result<(RunConfig, Format), CliError> {
    let mut cfg = load_config(&args.config)?;
    for (name, value, slot) in [("--rtol", args.rtol, &mut cfg.rtol), ("--atol", args.atol, &mut cfg.atol)] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::config(format!("{name} must be positive (got {v})")));
            }
            *slot = v;
        }
    }
    let format = run::resolve_format(args.format.map(Format::from), &cfg);
    Ok((cfg, format))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let (cfg, format) = prepare(&args)?;
            let out = run::simulate(&cfg)?;
            let dest = run::destination(args.output.as_deref(), cfg.path.as_deref());
            let mut written: Vec<PathBuf> = Vec::new();
            let result = (|| {
                if let Some((path, table)) = &out.wigner {
                    write_file(path, &table.render(format))?;
                    written.push(path.clone());
                }
                if let Some(summary) = run::summary_destination(dest) {
                    write_file(&summary, &format!("{}\n", out.summary))?;
                    written.push(summary);
                }
                emit(&out.table.render(format), dest)
            })();
            if result.is_err() {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
            }
            result
        }
        Command::Kernel(args) => {
            let (cfg, format) = prepare(&args)?;
            let table = run::kernel(&cfg)?;
            let configured = cfg.kernel.as_ref().and_then(|k| k.path.as_deref());
            emit(&table.render(format), run::destination(args.output.as_deref(), configured))
        }
        Command::Scan(args) => {
            let threads = run::thread_count(std::env::var(run::THREADS_ENV).ok().as_deref())?;
            let (cfg, format) = prepare(&args)?;
            let table = run::scan(&cfg, threads)?;
            let configured = cfg.scan.as_ref().and_then(|s| s.path.as_deref());
            emit(&table.render(format), run::destination(args.output.as_deref(), configured))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config(e.to_string().lines().next().unwrap_or("invalid arguments").to_string());
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

