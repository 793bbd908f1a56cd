//! Command-line driver. `ERGOLAT_WORKERS` caps the worker threads; results do
//! not depend on it.

use clap::{Args, Parser, Subcommand};
use ergolat::channel::FadingModel;
use ergolat::experiments::{parse_range, parse_snr_grid, run, Command, ExperimentSpec};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ergolat", version, about = "Lattice coding over ergodic fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rate, capacity and gap of an N_t × N_r channel over SNR and N_r.
    RateMimo(Opts),
    /// Many-antenna Rayleigh gap bound over N_r with the measured gap.
    GapBounds(Opts),
    /// Single-antenna rate, capacity, gap and bounds over SNR.
    SisoCurves(Opts),
    /// Corner points of every decoding order (first SNR and N_r).
    MacRegion(Opts),
    /// Sum-capacity gap of the multiple-access scheme.
    MacGap(Opts),
    /// Point-to-point lattice decoding trials.
    SimulatePtp(Opts),
    /// Successive-cancellation decoding trials.
    SimulateMac(Opts),
    /// Numerical checks of the supporting inequalities.
    VerifyLemmas {
        #[command(flatten)]
        opts: Opts,
        /// Run every check (the only mode; kept for scripts).
        #[arg(long)]
        all: bool,
    },
}

#[derive(Args)]
struct Opts {
    /// rayleigh, nakagami:m=<m>, or fixed:<matrix file>
    #[arg(long, default_value = "rayleigh")]
    model: String,
    #[arg(long, default_value_t = 1)]
    nt: usize,
    /// Receive antennas, a count or lo..hi
    #[arg(long, default_value = "1")]
    nr: String,
    #[arg(long, default_value_t = 2)]
    users: usize,
    /// start..end:step in dB, or one value
    #[arg(long = "snr-db", default_value = "0", allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Blocks per decoding experiment
    #[arg(long, default_value_t = 2_000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long = "block-len", default_value_t = 4)]
    block_len: usize,
    /// Construction-A field size
    #[arg(long, default_value_t = 5)]
    p: u64,
    /// Construction-A code dimension
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn spec(command: Command, o: Opts) -> ergolat::Result<ExperimentSpec> {
    let mut s = ExperimentSpec::new(command, o.seed, o.out);
    s.model = FadingModel::parse(&o.model)?;
    s.model_key = o.model;
    s.n_t = o.nt;
    s.n_r = parse_range(&o.nr)?;
    s.users = o.users;
    s.snr_db = parse_snr_grid(&o.snr_db)?;
    s.samples = o.samples;
    s.trials = o.trials;
    s.epsilon = o.epsilon;
    s.block_len = o.block_len;
    s.p = o.p;
    s.k = o.k;
    Ok(s)
}

#[cfg(feature = "parallel")]
fn configure_workers() -> Result<(), String> {
    let Ok(v) = std::env::var("ERGOLAT_WORKERS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| format!("ERGOLAT_WORKERS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn configure_workers() -> Result<(), String> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (command, opts) = match cli.command {
        Cmd::RateMimo(o) => (Command::RateMimo, o),
        Cmd::GapBounds(o) => (Command::GapBounds, o),
        Cmd::SisoCurves(o) => (Command::SisoCurves, o),
        Cmd::MacRegion(o) => (Command::MacRegion, o),
        Cmd::MacGap(o) => (Command::MacGap, o),
        Cmd::SimulatePtp(o) => (Command::SimulatePtp, o),
        Cmd::SimulateMac(o) => (Command::SimulateMac, o),
        Cmd::VerifyLemmas { opts, .. } => (Command::VerifyLemmas, opts),
    };
    let summary = match spec(command, opts).and_then(|s| run(&s)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("{command}: {} rows -> {}", summary.rows, summary.csv.display());
    for f in &summary.failures {
        println!("FAIL {f}");
    }
    if summary.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
