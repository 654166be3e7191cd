//! `qsim`: batch front end for the photon-statistics simulations.

mod config;
mod error;
mod experiments;
mod output;
mod tools;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "qsim", version, about = "Photon-statistics simulations and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Cross-correlate two time-tag files (binary or CSV) into a histogram CSV.
    CorrelateFile {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        bin_ps: u64,
        #[arg(long)]
        window_ps: u64,
        /// Channel to take from file A; defaults to the lowest present.
        #[arg(long)]
        channel_a: Option<u8>,
        #[arg(long)]
        channel_b: Option<u8>,
        /// Normalize to the outer FRACTION of bins instead of the singles rates.
        #[arg(long, value_name = "FRACTION")]
        plateau: Option<f64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print J_n(β) and J_n(β)² as CSV.
    Bessel {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        max_order: Option<u32>,
    },
    /// Print the etalon spectrum of a phase-modulated line as CSV.
    Spectrum {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        drive_ghz: f64,
        #[arg(long, default_value_t = 100.0)]
        linewidth_mhz: f64,
        #[arg(long, default_value_t = 100.0)]
        etalon_mhz: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::field("QSIM_THREADS", format!("must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run { config } => {
            let cfg = config::load(&config)?.resolve()?;
            let mut out = output::Output::create(&cfg.output_dir)?;
            let summary = experiments::run(&cfg, &mut out)?;
            println!("{}", summary.line());
        }
        Command::CorrelateFile {
            a,
            b,
            bin_ps,
            window_ps,
            channel_a,
            channel_b,
            plateau,
            out,
        } => {
            let to_stdout = out.is_none();
            let line = tools::correlate_file(&tools::CorrelateArgs {
                a,
                b,
                channel_a,
                channel_b,
                bin_ps,
                window_ps,
                plateau,
                out,
            })?;
            if to_stdout {
                eprintln!("{line}");
            } else {
                println!("{line}");
            }
        }
        Command::Bessel { beta, max_order } => {
            let mut stdout = std::io::stdout().lock();
            tools::bessel(beta, max_order, &mut stdout)?;
        }
        Command::Spectrum {
            beta,
            drive_ghz,
            linewidth_mhz,
            etalon_mhz,
            out,
        } => tools::spectrum(beta, drive_ghz, linewidth_mhz, etalon_mhz, out.as_deref())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // bad arguments count as validation failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
