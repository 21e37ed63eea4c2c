//! Command line front end for the sweep pipelines.
//!
//! Exit codes: 0 on success, 2 for configuration problems (bad file, bad
//! key, bad value, bad format), 3 for numerical or model failures during a
//! run.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use whichpath_core::{
    export, oracle, run_sweep, Error, ExperimentConfig, OutputFormat, Result, RunOptions,
    SweepAxis,
};

/// Enumeration-vs-closed-form deviations beyond this fail `oracle-check`.
const ORACLE_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "whichpath",
    version,
    about = "Simulates controlled dephasing of a two-path interferometer by a point-contact charge detector"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Collector current versus magnetic field at a fixed detector state
    SweepField(SweepArgs),
    /// Dot conductance and dragged detector transmission versus plunger gate
    SweepPlunger(SweepArgs),
    /// Operating point and visibility versus detector gate, per bias value
    SweepGate(SweepArgs),
    /// Visibility versus detector bias at a fixed gate operating point
    SweepBias(SweepArgs),
    /// Cross-checks the closed forms against brute-force enumeration
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration file (TOML); built-in defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Override one configuration key, e.g. --set qpc.v_half=0.19
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; output bytes do not depend on this
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Largest probe count drawn per trial (enumeration cost is 2^n)
    #[arg(long, default_value_t = 14)]
    max_n: u32,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::SweepField(a) => sweep(a, SweepAxis::Field),
        Cmd::SweepPlunger(a) => sweep(a, SweepAxis::Plunger),
        Cmd::SweepGate(a) => sweep(a, SweepAxis::QpcGate),
        Cmd::SweepBias(a) => sweep(a, SweepAxis::Bias),
        Cmd::OracleCheck(a) => oracle_check(a),
    }
}

fn sweep(args: SweepArgs, axis: SweepAxis) -> Result<()> {
    let format: OutputFormat = args.format.parse()?;
    let mut cfg = match &args.config {
        Some(path) => whichpath_core::load_config(path)?,
        None => ExperimentConfig::default(),
    };
    for assignment in &args.set {
        cfg.apply_set(assignment)?;
    }
    // the subcommand, not the file, decides what is swept
    cfg.sweep.axis = axis;
    let opts = RunOptions {
        threads: args.threads,
        base_dir: args
            .config
            .as_deref()
            .and_then(|p| p.parent())
            .map(PathBuf::from),
    };
    let result = run_sweep(&cfg, &opts)?;
    match &args.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            export::write(&result, format, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = std::io::BufWriter::new(stdout.lock());
            export::write(&result, format, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn oracle_check(args: OracleArgs) -> Result<()> {
    let report = oracle::self_check(args.seed, args.trials, args.max_n)?;
    println!(
        "oracle check: {} trials, seed {}, probe counts up to {}",
        report.trials, report.seed, report.max_n
    );
    println!(
        "max |enumeration - closed form| = {:e} (at n = {})",
        report.worst_coherence, report.worst_coherence_n
    );
    println!(
        "max binomial mean/width deviation = {:e}",
        report.worst_binomial
    );
    let worst = report.worst_coherence.max(report.worst_binomial);
    if worst.is_nan() || worst > ORACLE_TOL {
        return Err(Error::InconsistentModel {
            what: "oracle deviation",
            value: worst,
        });
    }
    println!("all within {ORACLE_TOL:e}");
    Ok(())
}
