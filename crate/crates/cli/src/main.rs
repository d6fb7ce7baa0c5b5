//! `hjsort`: solve, convergence studies and Pareto ranking from the command line.
//!
//! Exit codes: 0 on success, 1 on runtime errors (solver failures, unreadable
//! or malformed input), 2 on invalid configuration.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hjsort", version, about = "Monotone schemes for the nondominated sorting PDE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one scheme on one grid and write the field with a JSON report
    Solve(SolveArgs),
    /// Run a convergence study over a mesh sequence
    Convergence(ConvergenceArgs),
    /// Sort a point cloud into Pareto fronts and rank it with a solved field
    Pareto(ParetoArgs),
}

/// Where the right-hand side comes from.
#[derive(Args, Debug, Clone)]
struct RhsArgs {
    /// Builtin case: f1, f2, f3 or const:<c>
    #[arg(long, default_value = "f2", conflicts_with = "f_file")]
    case: String,
    /// Frequency k of f2
    #[arg(long, default_value_t = hjsort::testcases::DEFAULT_K)]
    k: f64,
    /// Constant C of f3
    #[arg(long = "bigc", default_value_t = hjsort::testcases::DEFAULT_BIG_C)]
    big_c: f64,
    /// Right-hand side sampled on the grid, in the binary field format
    #[arg(long)]
    f_file: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FieldFormat {
    Bin,
    Csv,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, default_value = "s2")]
    scheme: hjsort::SchemeKind,
    #[command(flatten)]
    rhs: RhsArgs,
    /// Dimension
    #[arg(long)]
    n: usize,
    /// Grid intervals per axis (h = 1/m)
    #[arg(long)]
    m: usize,
    /// Output directory
    #[arg(long, env = "HJSORT_OUT_DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FieldFormat::Bin)]
    format: FieldFormat,
    /// Use bisection even where a closed form exists
    #[arg(long)]
    force_bisection: bool,
    /// Keep only a rolling window; writes the report but no field
    #[arg(long, conflicts_with = "emit_levelsets")]
    rolling: bool,
    /// Also write node coordinates with u-scale values for contour plots
    #[arg(long)]
    emit_levelsets: bool,
    /// Largest full grid, in bytes, allowed without --rolling
    #[arg(long, env = "HJSORT_MEM_CAP", default_value_t = 8 << 30)]
    mem_cap: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Markdown,
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    /// Schemes to run
    #[arg(long, value_delimiter = ',', default_value = "s1,s2,s3")]
    scheme: Vec<hjsort::SchemeKind>,
    /// Builtin case: f1, f2, f3 or const:<c>
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = hjsort::testcases::DEFAULT_K)]
    k: f64,
    #[arg(long = "bigc", default_value_t = hjsort::testcases::DEFAULT_BIG_C)]
    big_c: f64,
    #[arg(long)]
    n: usize,
    /// Number of meshes from the standard sequence (40*4^k in 2D, 20*2^k in 3D, 4*2^k above)
    #[arg(long, default_value_t = 4, conflicts_with = "meshes")]
    max_k: usize,
    /// Explicit increasing list of m values
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = TableFormat::Markdown)]
    format: TableFormat,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solves running at once
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    force_bisection: bool,
}

#[derive(Args, Debug)]
struct ParetoArgs {
    /// Point cloud CSV, one point per row
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "s2")]
    scheme: hjsort::SchemeKind,
    #[command(flatten)]
    rhs: RhsArgs,
    /// Grid intervals per axis for the ranking solve
    #[arg(long, default_value_t = 640)]
    m: usize,
    /// Keep coordinates as given instead of rescaling each axis to [0,1]
    #[arg(long)]
    no_normalize: bool,
    /// Output CSV; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force_bisection: bool,
    #[arg(long, env = "HJSORT_MEM_CAP", default_value_t = 8 << 30)]
    mem_cap: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Pareto(a) => commands::pareto(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
