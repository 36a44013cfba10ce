//! `opf solve CASE`: global AC OPF on a MATPOWER case.
//!
//! Exit codes: 0 optimal or budget reached, 2 infeasible, 1 error, 64 bad
//! command line.

use std::path::PathBuf;
use std::process::ExitCode;

use acopf_core::bnc::{solve, AlgorithmParams, Method, RunReport, Status};
use acopf_core::case::load_case;
use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "opf", version, about = "Global AC optimal power flow solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a case: root cutting-plane loop, then spatial branch-and-cut.
    Solve(SolveArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    SocpOnly,
    SepM,
    SepS,
    SepMs,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::SocpOnly => Method::SocpOnly,
            MethodArg::SepM => Method::SepM,
            MethodArg::SepS => Method::SepS,
            MethodArg::SepMs => Method::SepMs,
        }
    }
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    /// MATPOWER case file.
    case: PathBuf,
    #[arg(long, value_enum, default_value = "sep-ms")]
    method: MethodArg,
    /// Stop after the root loop.
    #[arg(long)]
    root_only: bool,
    /// Total wall-clock budget in seconds.
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Tightening radius of the first root round.
    #[arg(long, default_value_t = 2)]
    r1: usize,
    /// Tightening radius of later rounds and of nodes.
    #[arg(long, default_value_t = 4)]
    r2: usize,
    /// Root tightening and separation rounds.
    #[arg(long, default_value_t = 5)]
    rounds: usize,
    /// Root rounds that enlarge the cycle set.
    #[arg(long, default_value_t = 1)]
    cycle_rounds: usize,
    /// Largest bus count for which cycles are enlarged.
    #[arg(long, default_value_t = 118)]
    bmax: usize,
    /// Known upper bound on the optimal cost.
    #[arg(long)]
    ub: Option<f64>,
    /// Worker threads for tightening and separation.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest number of tree nodes to process.
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Write the JSON run report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print a gap table row instead of the summary line.
    #[arg(long)]
    table: bool,
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl SolveArgs {
    fn params(&self) -> AlgorithmParams {
        AlgorithmParams {
            rounds: self.rounds,
            cycle_rounds: self.cycle_rounds,
            r1: self.r1,
            r2: self.r2,
            eps: self.eps,
            bmax: self.bmax,
            time_limit: self.time_limit,
            method: self.method.into(),
            ub: self.ub,
            threads: self.threads,
            root_only: self.root_only,
            max_nodes: self.max_nodes,
        }
    }
}

fn summary(r: &RunReport) -> String {
    let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    format!(
        "{} {} status={:?} lb={} ub={} gap={} root_gap={} nodes={} time={:.2}s",
        r.instance,
        r.method,
        r.status,
        num(r.final_bounds.lb),
        num(r.final_bounds.ub),
        num(r.final_bounds.gap),
        num(r.root.gap),
        r.nodes_processed,
        r.timings.total
    )
}

fn run_solve(args: &SolveArgs) -> anyhow::Result<Status> {
    let params = args.params();
    params.validate().map_err(|e| anyhow::anyhow!(UsageError(e)))?;
    let net = load_case(&args.case).with_context(|| format!("loading {}", args.case.display()))?;
    let report = solve(&net, &params);
    if args.table {
        print!("{}", report.table());
    } else {
        println!("{}", summary(&report));
    }
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.status)
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    let Command::Solve(args) = cli.command;
    let level = match args.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run_solve(&args) {
        Ok(Status::Optimal | Status::Budget) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => ExitCode::from(2),
        Ok(Status::Error) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(64)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
