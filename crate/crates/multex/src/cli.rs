//! Command-line interface: exact verification runs, bound tables,
//! simulation sweeps, and chaoticity reports.
//!
//! Exit codes: 0 when the command succeeded and every check passed, 1 when
//! checks ran and at least one failed, 2 on usage or input errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num::BigUint;
use serde::Serialize;

use crate::analysis::{
    read_sweep_dir, report_from_runs, summarize, tagged_file_name, trajectory_file_name,
    write_report_csv, write_summary_json,
};
use crate::error::{Error, Result};
use crate::exact::{tv_bound_check, verify_sufficiency};
use crate::generators::random_multi_exchangeable_law;
use crate::rng::{substream_seed, SplitMix64};
use crate::sim::{sweep_runs, write_tagged_csv, write_trajectory_csv, ModelSpec};
use crate::system::{Caps, SystemShape};

/// Exact and Monte Carlo tools for multi-class systems that are
/// exchangeable within classes.
#[derive(Debug, Parser)]
#[command(name = "multex", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check on seeded random multi-exchangeable laws that conditioning on
    /// the empirical measure vector yields uniform within-class orderings
    /// (exact rational arithmetic; exit 1 on any counterexample).
    VerifyOracle(VerifyOracleArgs),
    /// Tabulate the worst total-variation gap between with- and
    /// without-replacement k-tuple measures against its exact bounds.
    TvBound(TvBoundArgs),
    /// Run seeded replications of the mean-field dynamics across system
    /// sizes and write trajectory CSVs.
    Simulate(SimulateArgs),
    /// Read simulation CSVs and write the covariance/concentration report
    /// with pass/fail chaoticity flags.
    ChaosReport(ChaosReportArgs),
}

#[derive(Debug, Args)]
pub struct VerifyOracleArgs {
    /// Comma-separated class sizes, e.g. 2,2
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Comma-separated alphabet sizes, one per class
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphabets: Vec<usize>,
    /// Number of seeded random laws to check
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// RNG seed; 0 draws a seed from entropy and echoes it
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Cap on enumerated configurations
    #[arg(long, default_value_t = Caps::default().enumeration)]
    pub enum_cap: u64,
    /// Cap on enumerated within-class permutations
    #[arg(long, default_value_t = Caps::default().permutation)]
    pub perm_cap: u64,
    /// Emit the report as JSON instead of text
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TvBoundArgs {
    /// Largest class size N to tabulate
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_n: u64,
    /// Largest tuple length k to tabulate (additionally capped at each N)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_k: u64,
    /// Alphabet size the class draws its states from
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub alphabet: u64,
    /// Write the CSV to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model JSON file ({classes, a, b, rho, q, steps}); defaults to the
    /// built-in coupled two-class model
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated strictly increasing system sizes; each is applied
    /// to every class
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Override the model's step count
    #[arg(long)]
    pub steps: Option<usize>,
    /// Replications per system size
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// RNG seed; 0 draws a seed from entropy and echoes it
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for CSVs and run_config.json
    #[arg(long, env = "MULTEX_OUTDIR")]
    pub outdir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChaosReportArgs {
    /// Directory holding trajectories_n<N>.csv / tagged_n<N>.csv pairs
    #[arg(long)]
    pub indir: PathBuf,
    /// Where to write report.csv and summary.json (default: the input
    /// directory)
    #[arg(long)]
    pub outdir: Option<PathBuf>,
}

/// Replaces the sentinel seed 0 with one drawn from wall-clock and process
/// entropy; any other seed is returned unchanged. The resolved value is
/// echoed into every output.
fn resolve_seed(seed: u64) -> u64 {
    if seed != 0 {
        return seed;
    }
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let drawn = SplitMix64::new(nanos ^ (u64::from(std::process::id()) << 32)).next_u64();
    drawn.max(1)
}

#[derive(Serialize)]
struct OracleCounterexample {
    trial: u64,
    law: String,
}

#[derive(Serialize)]
struct OracleReport {
    sizes: Vec<usize>,
    alphabets: Vec<usize>,
    seed: u64,
    trials: u64,
    failures: u64,
    pass: bool,
    counterexamples: Vec<OracleCounterexample>,
}

fn run_verify_oracle(args: VerifyOracleArgs) -> Result<i32> {
    let shape = SystemShape::with_numeric_alphabets(&args.sizes, &args.alphabets)?;
    let caps = Caps {
        enumeration: args.enum_cap,
        permutation: args.perm_cap,
    };
    let configurations = shape.configuration_count();
    if configurations > BigUint::from(caps.enumeration) {
        return Err(Error::StateSpaceTooLarge {
            configurations,
            cap: caps.enumeration,
        });
    }
    let seed = resolve_seed(args.seed);
    let mut counterexamples = Vec::new();
    for trial in 0..args.trials {
        let law = random_multi_exchangeable_law(&shape, substream_seed(seed, trial), caps)?;
        let report = verify_sufficiency(&law)?;
        if !report.holds {
            counterexamples.push(OracleCounterexample {
                trial,
                law: law.to_string(),
            });
        }
    }
    let report = OracleReport {
        sizes: args.sizes,
        alphabets: args.alphabets,
        seed,
        trials: args.trials,
        failures: counterexamples.len() as u64,
        pass: counterexamples.is_empty(),
        counterexamples,
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!("shape: {shape}");
        println!("seed: {}", report.seed);
        println!("trials: {}", report.trials);
        println!("failures: {}", report.failures);
        for counterexample in &report.counterexamples {
            println!("counterexample (trial {}):", counterexample.trial);
            println!("{}", counterexample.law);
        }
        println!("result: {}", if report.pass { "PASS" } else { "FAIL" });
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn run_tv_bound(args: TvBoundArgs) -> Result<i32> {
    if args.max_k > args.max_n {
        return Err(Error::InvalidShape(format!(
            "max-k {} exceeds max-n {}",
            args.max_k, args.max_n
        )));
    }
    let mut all_hold = true;
    let mut lines = vec!["N,k,worst_tv,intermediate_bound,final_bound".to_string()];
    for n in 1..=args.max_n {
        for k in 1..=args.max_k.min(n) {
            let report = tv_bound_check(n as usize, k as usize, args.alphabet as usize)?;
            all_hold &= report.holds;
            lines.push(format!(
                "{n},{k},{},{},{}",
                report.worst_tv, report.intermediate_bound, report.final_bound
            ));
        }
    }
    let rows = lines.len() - 1;
    let text = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            println!(
                "wrote {} ({rows} rows, all bounds hold: {all_hold})",
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(if all_hold { 0 } else { 1 })
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    model: &'a ModelSpec,
    n_values: &'a [usize],
    replications: usize,
    seed: u64,
}

fn run_simulate(args: SimulateArgs) -> Result<i32> {
    let mut model = match &args.model {
        Some(path) => ModelSpec::from_json(&std::fs::read_to_string(path)?)?,
        None => ModelSpec::default_coupled(),
    };
    if let Some(steps) = args.steps {
        model.steps = steps;
    }
    model.validate()?;
    let seed = resolve_seed(args.seed);
    let sweep = sweep_runs(&model, &args.n, args.reps, seed)?;
    std::fs::create_dir_all(&args.outdir)?;
    for entry in &sweep {
        let trajectories = args.outdir.join(trajectory_file_name(entry.n));
        write_trajectory_csv(&trajectories, entry.seed, &entry.records)?;
        let tagged = args.outdir.join(tagged_file_name(entry.n));
        write_tagged_csv(&tagged, entry.seed, &entry.records)?;
    }
    let config = RunConfig {
        command: "simulate",
        model: &model,
        n_values: &args.n,
        replications: args.reps,
        seed,
    };
    let text = serde_json::to_string_pretty(&config).expect("config serializes") + "\n";
    std::fs::write(args.outdir.join("run_config.json"), &text)?;
    print!("{text}");
    Ok(0)
}

fn run_chaos_report(args: ChaosReportArgs) -> Result<i32> {
    let runs = read_sweep_dir(&args.indir)?;
    let rows = report_from_runs(&runs)?;
    let summary = summarize(&runs, &rows)?;
    let outdir = args.outdir.as_ref().unwrap_or(&args.indir);
    std::fs::create_dir_all(outdir)?;
    write_report_csv(&outdir.join("report.csv"), &rows)?;
    write_summary_json(&outdir.join("summary.json"), &summary)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(if summary.all_pass { 0 } else { 1 })
}

/// Dispatches a parsed command line; the returned integer is the process
/// exit code for a command that ran to completion.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::VerifyOracle(args) => run_verify_oracle(args),
        Command::TvBound(args) => run_tv_bound(args),
        Command::Simulate(args) => run_simulate(args),
        Command::ChaosReport(args) => run_chaos_report(args),
    }
}
