//! `ldp-lab`: command-line front end for the large-deviation laboratory.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ldp_core::LabError;

use commands::{cycles, ising, measures, nets, wigner, Outcome};
use report::Sinks;

const THREADS_ENV: &str = "LDP_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ldp-lab", version, about = "Numerical experiments on nonlinear large deviations")]
#[command(after_help = "Every subcommand writes CSV with a header line, one row per record, \
numbers with 17 significant digits and LF line endings.  Exit status: 0 on success, \
2 on argument errors, 3 on numerical or certification failures.")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the CSV table here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write a JSON report: to PATH, else next to --out, else to stdout
    /// in place of the CSV.
    #[arg(long, global = true, value_name = "PATH", num_args = 0..=1)]
    json: Option<Option<PathBuf>>,

    /// Worker threads (falls back to LDP_LAB_THREADS).  Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    Legendre(measures::LegendreArgs),
    IsingCertify(ising::CertifyArgs),
    IsingSolve(ising::SolveArgs),
    WignerRate(wigner::RateArgs),
    WignerMc(wigner::McArgs),
    WignerShift(wigner::ShiftArgs),
    CyclesPhi(cycles::PhiArgs),
    CyclesCandidates(cycles::CandidatesArgs),
    CyclesOpt(cycles::OptArgs),
    CyclesMc(cycles::McArgs),
    NetsVerify(nets::VerifyArgs),
}

impl Command {
    fn run(&self, seed: u64) -> ldp_core::Result<Outcome> {
        match self {
            Command::Legendre(a) => measures::legendre(a, seed),
            Command::IsingCertify(a) => ising::certify(a, seed),
            Command::IsingSolve(a) => ising::solve(a, seed),
            Command::WignerRate(a) => wigner::rate(a, seed),
            Command::WignerMc(a) => wigner::mc(a, seed),
            Command::WignerShift(a) => wigner::shift(a, seed),
            Command::CyclesPhi(a) => cycles::phi_table(a, seed),
            Command::CyclesCandidates(a) => cycles::candidates(a, seed),
            Command::CyclesOpt(a) => cycles::opt(a, seed),
            Command::CyclesMc(a) => cycles::mc(a, seed),
            Command::NetsVerify(a) => nets::verify(a, seed),
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(t) = flag {
        return if t == 0 { Err("--threads must be at least 1".into()) } else { Ok(Some(t)) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
        _ => Ok(None),
    }
}

fn exit_for(err: &LabError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_numerical() { 3 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let run = || cli.command.run(cli.seed);
    let result = match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {t} worker threads: {e}");
                return ExitCode::from(2);
            }
        },
        None => run(),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => return exit_for(&e),
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let sinks = Sinks { csv: cli.out.clone(), json: cli.json.clone() };
    if let Err(e) = sinks.emit(&outcome.report) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match &outcome.failure {
        Some(e) => exit_for(e),
        None => ExitCode::SUCCESS,
    }
}
