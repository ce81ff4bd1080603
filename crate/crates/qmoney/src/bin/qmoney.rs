//! Experiment front door. Every subcommand maps onto one driver in
//! `qmoney::experiments`; this file only parses flags, resolves the seed,
//! and writes the rendered report.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unwritable
//! output, unknown variants), 2 when an experiment violates an invariant.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use qmoney::experiments;
use qmoney::report::{ExperimentConfig, Format};
use qmoney::rng::seed_from_env;

#[derive(Parser)]
#[command(
    name = "qmoney",
    version = qmoney::VERSION,
    about = "Quantum money laboratory: seeded experiments over an exact dense simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Register width in qubits.
    #[arg(long, default_value_t = 4)]
    n: usize,

    /// Sampled trials or experiment runs.
    #[arg(long, default_value_t = 1000)]
    trials: u64,

    /// Tolerance knob for the interaction-free protocols.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,

    /// RNG seed. Defaults to $QMONEY_SEED, then a fixed constant; identical
    /// seeds give byte-identical reports.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the report to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Report encoding: json or csv.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run the core invariant battery.
    Selftest(Common),
    /// Counterfeit Wiesner notes and measure the both-pass rate.
    Wiesner {
        #[command(flatten)]
        common: Common,
        /// Strategy: naive, optimal, or resend.
        #[arg(long, default_value = "naive")]
        attack: String,
    },
    /// PRF-derived bank keys: counterfeiting rate plus avalanche statistics.
    Bbbw(Common),
    /// Interaction-free bomb test verdict and explosion statistics.
    Bomb(Common),
    /// Extract bank keys: adaptive resubmission or interaction-free probes.
    Attack {
        #[command(flatten)]
        common: Common,
        /// Method: adaptive or bomb.
        #[arg(long, default_value = "adaptive")]
        method: String,
    },
    /// Hidden-shift recovery statistics.
    Simon(Common),
    /// Search amplitudes against the closed form plus sampled searches.
    Grover(Common),
    /// Hidden-subspace money: verification, forging, reduction, noisy attack.
    Hs {
        #[command(flatten)]
        common: Common,
        /// Experiment: verify, forge, reduction, or noisy.
        #[arg(long, default_value = "verify")]
        exp: String,
    },
    /// Branch-decoding demo fidelities.
    Hh(Common),
    /// Cloning-channel gradient ascent and the resulting pass rates.
    Clonopt(Common),
}

impl Command {
    fn into_parts(self) -> (&'static str, Option<String>, Common) {
        match self {
            Command::Selftest(c) => ("selftest", None, c),
            Command::Wiesner { common, attack } => ("wiesner", Some(attack), common),
            Command::Bbbw(c) => ("bbbw", None, c),
            Command::Bomb(c) => ("bomb", None, c),
            Command::Attack { common, method } => ("attack", Some(method), common),
            Command::Simon(c) => ("simon", None, c),
            Command::Grover(c) => ("grover", None, c),
            Command::Hs { common, exp } => ("hs", Some(exp), common),
            Command::Hh(c) => ("hh", None, c),
            Command::Clonopt(c) => ("clonopt", None, c),
        }
    }
}

fn build_config(command: Command) -> qmoney::Result<ExperimentConfig> {
    let (name, variant, common) = command.into_parts();
    let seed = match common.seed {
        Some(s) => s,
        None => seed_from_env()?,
    };
    Ok(ExperimentConfig {
        command: name.into(),
        variant,
        n: common.n,
        trials: common.trials,
        epsilon: common.epsilon,
        seed,
        output: common.output,
        format: common.format.parse::<Format>()?,
    })
}

const USAGE_ERROR: u8 = 1;
const INVARIANT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match build_config(cli.command) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    if let Err(e) = experiments::validate(&config) {
        eprintln!("error: {e}");
        return ExitCode::from(USAGE_ERROR);
    }

    let started = Instant::now();
    let mut report = match experiments::run(&config) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INVARIANT_ERROR);
        }
    };
    report.wall_clock = started.elapsed().as_secs_f64();

    let text = match report.render(config.format) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INVARIANT_ERROR);
        }
    };
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(USAGE_ERROR);
            }
        }
        None => print!("{text}"),
    }
    // Timing goes to stderr only; reports stay reproducible byte for byte.
    eprintln!("wall_clock_seconds {:.3}", report.wall_clock);
    ExitCode::SUCCESS
}
