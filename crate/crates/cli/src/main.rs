//! Command line front end: instance generation, solving, policy comparison
//! sweeps and LP export.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for unreadable or invalid
//! input data, 3 when a solver gives up (size guards, numerical failure).

mod ilp;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cachesched::baselines::{run_pba, run_rba};
use cachesched::instgen::{generate, partition_reduction, GenConfig, PartitionInput};
use cachesched::model::{avg_aoi, backhaul_load, total_cost, CostBreakdown, Schedule};
use cachesched::oracle;
use cachesched::rounding::{gap_pct, solve};
use cachesched::sweep::{run_sweep, SweepParam, SweepSpec};
use cachesched::{Error, Instance};

#[derive(Parser)]
#[command(name = "cachesched", version, about = "Time-slotted cache scheduling solver")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated (or reduction) instance to a JSON file
    Generate(GenerateArgs),
    /// Solve one instance and print a JSON cost report
    Solve(SolveArgs),
    /// Compare all policies over a parameter grid, emitting CSV
    Sweep(SweepArgs),
    /// Write the instance's integer program in LP text format
    ExportLp(ExportLpArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of users
    #[arg(long, default_value_t = 60)]
    users: u32,
    /// Number of contents
    #[arg(long, default_value_t = 20)]
    contents: u32,
    /// Number of time slots
    #[arg(long, default_value_t = 24)]
    slots: u32,
    /// ZipF popularity exponent
    #[arg(long, default_value_t = 0.54)]
    gamma: f64,
    /// Cache capacity as a fraction of the total content size
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight of the age penalty in the objective
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Cost per data unit served from the server
    #[arg(long, default_value_t = 10.0)]
    cs: f64,
    /// Cost per data unit served from the cache
    #[arg(long, default_value_t = 1.0)]
    cb: f64,
    /// Encode an even-split question over these values instead of sampling
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "N1,N2,...",
        conflicts_with_all = [
            "users", "contents", "slots", "gamma", "rho", "seed", "lambda", "cs", "cb",
        ]
    )]
    partition: Option<Vec<u64>>,
    /// Instance file to write
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Algo {
    Cga,
    Pba,
    Rba,
    Exact,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Cga => "cga",
            Algo::Pba => "pba",
            Algo::Rba => "rba",
            Algo::Exact => "exact",
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON)
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Cga)]
    algorithm: Algo,
    /// Seed for the randomized policy
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept parameter: U (users), F (contents) or lambda
    #[arg(long, value_parser = SweepParam::parse)]
    param: SweepParam,
    /// Comma-separated grid values for the swept parameter
    #[arg(long, value_delimiter = ',', value_name = "V1,V2,...", required = true)]
    grid: Vec<f64>,
    /// Seeds per grid point; instances use seeds 1..=N
    #[arg(long, default_value_t = 20)]
    seeds: u32,
    /// Base number of users
    #[arg(long, default_value_t = 60)]
    users: u32,
    /// Base number of contents
    #[arg(long, default_value_t = 20)]
    contents: u32,
    /// Number of time slots
    #[arg(long, default_value_t = 24)]
    slots: u32,
    /// ZipF popularity exponent
    #[arg(long, default_value_t = 0.54)]
    gamma: f64,
    /// Cache capacity as a fraction of the total content size
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Base weight of the age penalty
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Cost per data unit served from the server
    #[arg(long, default_value_t = 10.0)]
    cs: f64,
    /// Cost per data unit served from the cache
    #[arg(long, default_value_t = 1.0)]
    cb: f64,
    /// CSV file to write; stdout when omitted
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportLpArgs {
    /// Instance file (JSON)
    instance: PathBuf,
    /// LP file to write; stdout when omitted
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

/// Failures past argument parsing: bad input data (exit 2) or an algorithm
/// giving up (exit 3).
enum Failure {
    Data(String),
    Solver(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Data(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Data(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::InvalidInstance(_) | Error::InvalidConfig(_) => Failure::Data(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::ExportLp(args) => cmd_export_lp(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Data(format!("invalid instance in {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let (inst, note) = match &args.partition {
        Some(values) => {
            let input = PartitionInput { values: values.clone() };
            let (inst, threshold) = partition_reduction(&input)?;
            (inst, format!(", even-split threshold cost {threshold}"))
        }
        None => {
            let cfg = GenConfig {
                num_users: args.users,
                num_contents: args.contents,
                num_slots: args.slots,
                zipf_gamma: args.gamma,
                capacity_ratio: args.rho,
                seed: args.seed,
                cost_server: args.cs,
                cost_cache: args.cb,
                aoi_weight: args.lambda,
                ..GenConfig::default()
            };
            (generate(&cfg)?, String::new())
        }
    };
    let json = serde_json::to_string_pretty(&inst)
        .map_err(|e| Failure::Data(format!("cannot encode instance: {e}")))?;
    write_text(&args.output, &json)?;
    let total: u64 = (0..inst.num_contents()).map(|f| inst.total_demand(f)).sum();
    println!(
        "wrote {}: F={} contents, T={} slots, capacity S={}, total demand {total}{note}",
        args.output.display(),
        inst.num_contents(),
        inst.num_slots(),
        inst.capacity(),
    );
    Ok(())
}

#[derive(Serialize)]
struct Report {
    algorithm: &'static str,
    cost: CostBreakdown,
    #[serde(skip_serializing_if = "Option::is_none")]
    lb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
    backhaul_load: f64,
    avg_aoi: f64,
    runtime_ms: u64,
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.instance)?;
    let started = Instant::now();
    let (schedule, lb): (Schedule, Option<f64>) = match args.algorithm {
        Algo::Cga => {
            let out = solve(&inst)?;
            (out.schedule, Some(out.lower_bound))
        }
        Algo::Pba => (run_pba(&inst, args.seed)?, None),
        Algo::Rba => (run_rba(&inst, args.seed)?, None),
        Algo::Exact => (oracle::exact_optimum(&inst)?.0, None),
    };
    let runtime_ms = started.elapsed().as_millis() as u64;
    let cost = total_cost(&inst, &schedule)?;
    let report = Report {
        algorithm: args.algorithm.name(),
        gap: lb.map(|lb| gap_pct(cost.total, lb)),
        lb,
        backhaul_load: backhaul_load(&inst, &schedule)?,
        avg_aoi: avg_aoi(&inst, &schedule)?,
        runtime_ms,
        cost,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Data(format!("cannot encode report: {e}")))?;
    println!("{json}");
    if let Some(path) = &args.output {
        write_text(path, &json)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let spec = SweepSpec {
        param: args.param,
        grid: args.grid.clone(),
        num_seeds: args.seeds,
        base: GenConfig {
            num_users: args.users,
            num_contents: args.contents,
            num_slots: args.slots,
            zipf_gamma: args.gamma,
            capacity_ratio: args.rho,
            cost_server: args.cs,
            cost_cache: args.cb,
            aoi_weight: args.lambda,
            ..GenConfig::default()
        },
    };
    let rows = run_sweep(&spec)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer
            .serialize(row)
            .map_err(|e| Failure::Data(format!("cannot encode CSV row: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Failure::Data(format!("cannot finish CSV: {e}")))?;
    match &args.output {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::Data(format!("cannot write CSV: {e}")))?,
    }
    Ok(())
}

fn cmd_export_lp(args: ExportLpArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.instance)?;
    let text = ilp::ilp_text(&inst);
    match &args.output {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
