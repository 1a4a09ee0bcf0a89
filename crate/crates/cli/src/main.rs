use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deformq_cli::commands::{self, Axis, Method, Observable, Route, SweepArgs};
use deformq_cli::config::{CommonArgs, Format, LawArgs};
use deformq_cli::output::{emit, format_float, write_json};
use deformq_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "deformq",
    version,
    about = "Spectra and thermodynamics under [x,p] = iħ(1+sH)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels from the ODE and/or the closed forms
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Highest level index
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Undeformed and deformed density of states on an energy grid
    Dos {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        e_min: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        e_max: f64,
        #[arg(long, default_value_t = 20)]
        e_count: usize,
    },
    /// Z, U and C on a temperature list
    Thermo {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        /// Comma-separated temperatures
        #[arg(
            long = "T",
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        temperatures: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
    },
    /// One observable across a parameter range, rows evaluated in parallel
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum)]
        observable: Observable,
        /// Temperature for thermodynamic observables off the T axis
        #[arg(long = "T", default_value_t = 1.0, allow_hyphen_values = true)]
        temperature: f64,
        #[arg(long, value_enum, default_value_t = Route::Exact)]
        route: Route,
        /// Level index for the E observable
        #[arg(long)]
        level: Option<u64>,
    },
    /// Run the built-in oracle checks
    Selftest {
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum {
            common,
            n_max,
            method,
        } => {
            let cfg = common.resolve()?;
            emit(&commands::spectrum(&cfg, n_max, method)?, "spectrum", &cfg)
        }
        Command::Dos {
            common,
            e_min,
            e_max,
            e_count,
        } => {
            let cfg = common.resolve()?;
            emit(&commands::dos(&cfg, e_min, e_max, e_count)?, "dos", &cfg)
        }
        Command::Thermo {
            common,
            law,
            temperatures,
            route,
        } => {
            let mut cfg = common.resolve()?;
            law.apply(&mut cfg);
            emit(
                &commands::thermo(&cfg, &temperatures, route)?,
                "thermo",
                &cfg,
            )
        }
        Command::Sweep {
            common,
            law,
            axis,
            start,
            stop,
            count,
            observable,
            temperature,
            route,
            level,
        } => {
            let mut cfg = common.resolve()?;
            law.apply(&mut cfg);
            let args = SweepArgs {
                axis,
                start,
                stop,
                count,
                observable,
                temperature,
                route,
                level,
            };
            let out = commands::sweep(&cfg, &args)?;
            emit(&out.table, "sweep", &cfg)?;
            if out.failed == out.table.rows.len() {
                return Err(CliError::AllRowsFailed);
            }
            Ok(())
        }
        Command::Selftest { format } => {
            let (table, checks) = commands::selftest();
            if format == Some(Format::Json) {
                write_json(
                    &table,
                    "selftest",
                    &RunConfig::default(),
                    std::io::stdout().lock(),
                )?;
            } else {
                for c in &checks {
                    let verdict = if c.passed { "PASS" } else { "FAIL" };
                    let mut line = format!(
                        "{verdict} [{:>2}] {}: observed {} (threshold {})",
                        c.id,
                        c.name,
                        format_float(c.observed),
                        c.threshold
                    );
                    if !c.detail.is_empty() {
                        line.push_str(&format!("; {}", c.detail));
                    }
                    println!("{line}");
                }
            }
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(CliError::SelftestFailed(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(field) = e.field() {
                eprintln!("field: {field}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
