use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use paradox_lab::io::{parse_instance, run_command, sweep_points, Column, Command, Parity, Report, SweepResult};
use paradox_lab::likelihood::{ExtremesConfig, Family, Mode, Precision, DEFAULT_BUDGET_STATES};
use paradox_lab::Error;

/// Doctrinal paradox likelihood under quota rules.
#[derive(Parser, Debug)]
#[command(name = "paradox-lab", version)]
struct Cli {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    instance: Option<PathBuf>,

    /// Cap on histogram states of the exact recursion.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET_STATES)]
    budget_states: u128,

    /// Cap on the number of distribution assignments per agent count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_assignments: u128,

    /// Worker threads; defaults to PARADOX_LAB_THREADS, then the core count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Scalar for exact computations.
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::Auto)]
    precision: PrecisionArg,

    /// Denominator size (bits) up to which `auto` stays with fractions.
    #[arg(long, global = true, default_value_t = 128)]
    max_denominator_bits: u64,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Conditions kappa1..kappa4 and the rate classification.
    Check {
        #[arg(long)]
        n: u64,
    },
    /// Exact max and min paradox probability with witnesses.
    Exact {
        #[arg(long)]
        n: u64,
    },
    /// Monte Carlo max and min paradox probability.
    Mc {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Max and min over a range of agent counts, as CSV.
    Sweep {
        #[arg(long)]
        n_from: u64,
        #[arg(long)]
        n_to: u64,
        #[arg(long, default_value_t = 1)]
        step: u64,
        #[arg(long, value_enum, default_value_t = ParityArg::All)]
        parity: ParityArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit an asymptotic curve to a sweep CSV.
    Fit {
        /// exp-plus-const, exp-decay, inv-sqrt-shift or log-linear.
        #[arg(long)]
        family: Family,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ColumnArg::Both)]
        column: ColumnArg,
    },
    /// Print every paradox polyhedron.
    Polyhedra,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrecisionArg {
    Auto,
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ColumnArg {
    Max,
    Min,
    Both,
}

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_FIT: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Dimension { .. }
        | Error::Range { .. }
        | Error::Invalid { .. }
        | Error::Validation { .. }
        | Error::Precondition(_) => EXIT_VALIDATION,
        Error::Resource { .. } => EXIT_RESOURCE,
        Error::Fit { .. } => EXIT_FIT,
        Error::Io(_) => EXIT_OTHER,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let precision = match cli.precision {
        PrecisionArg::Auto => Precision::Auto {
            max_denominator_bits: cli.max_denominator_bits,
        },
        PrecisionArg::Rational => Precision::Rational,
        PrecisionArg::Float => Precision::Float,
    };
    let mut config = ExtremesConfig {
        mode: Mode::Exact(precision),
        budget_states: cli.budget_states,
        budget_assignments: cli.budget_assignments,
        threads: cli.threads,
    };

    let instance = match &cli.instance {
        Some(path) => {
            let parsed = parse_instance(path)?;
            let strict = matches!(cli.command, Sub::Check { .. });
            if !strict {
                for w in &parsed.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Some(parsed.instance)
        }
        None => None,
    };

    let mut output = None;
    let command = match cli.command {
        Sub::Check { n } => Command::Check { n },
        Sub::Exact { n } => Command::Exact { n },
        Sub::Mc { n, trials, seed } => Command::MonteCarlo { n, trials, seed },
        Sub::Sweep {
            n_from,
            n_to,
            step,
            parity,
            mode,
            trials,
            seed,
            output: out,
        } => {
            let parity = match parity {
                ParityArg::Odd => Parity::Odd,
                ParityArg::Even => Parity::Even,
                ParityArg::All => Parity::All,
            };
            if let ModeArg::Mc = mode {
                config.mode = Mode::MonteCarlo { trials, seed };
            }
            output = out;
            Command::Sweep {
                ns: sweep_points(n_from, n_to, step, parity)?,
            }
        }
        Sub::Fit { family, input, column } => {
            let file = File::open(&input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let input = SweepResult::read_csv(BufReader::new(file))?;
            let columns = match column {
                ColumnArg::Max => vec![Column::Max],
                ColumnArg::Min => vec![Column::Min],
                ColumnArg::Both => vec![Column::Max, Column::Min],
            };
            Command::Fit { family, input, columns }
        }
        Sub::Polyhedra => Command::Polyhedra,
    };

    let report = run_command(&command, instance.as_ref(), &config)?;
    match (&report, output) {
        (Report::Sweep(result), Some(path)) => {
            let file = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            result.write_csv(file)?;
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.render().as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
