use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use tdcount::cli::{run, DecompositionSource, Input, RunConfig};
use tdcount::decompose::Strategy;
use tdcount::formula::VarMode;

/// Exact #SAT model counter: dynamic programming over a tree-decomposition
/// of the formula's incidence graph.
#[derive(Parser)]
#[command(name = "tdcount", version)]
struct Args {
    /// DIMACS CNF input file; `-` or absent reads standard input
    input: Option<PathBuf>,

    /// Elimination heuristic for the built-in decomposer
    #[arg(long, value_enum, default_value_t = HeuristicArg::MinFill, conflicts_with = "td")]
    heuristic: HeuristicArg,

    /// Use a tree-decomposition from a PACE 2017 .td file instead of the
    /// heuristic (validated before use)
    #[arg(long)]
    td: Option<PathBuf>,

    /// Write the decomposition that was used to a PACE 2017 .td file
    #[arg(long)]
    emit_td: Option<PathBuf>,

    /// Write the incidence graph to a PACE 2017 .gr file
    #[arg(long)]
    emit_gr: Option<PathBuf>,

    /// Count assignments of occurring variables only, ignoring declared but
    /// unused variables
    #[arg(long)]
    strict_vars: bool,

    /// Cross-check the count against brute-force enumeration (small inputs)
    #[arg(long)]
    verify: bool,

    /// Print a JSON stats object (width, nodes, clause size, table rows,
    /// wall time) to standard error
    #[arg(long)]
    stats: bool,

    /// Print each node's table (nonzero rows) as JSON lines to standard error
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    MinFill,
    MinDegree,
}

impl From<HeuristicArg> for Strategy {
    fn from(arg: HeuristicArg) -> Strategy {
        match arg {
            HeuristicArg::MinFill => Strategy::MinFill,
            HeuristicArg::MinDegree => Strategy::MinDegree,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let input = match &args.input {
        None => Input::Stdin,
        Some(path) if path.as_os_str() == "-" => Input::Stdin,
        Some(path) => Input::Path(path.clone()),
    };
    let source = match args.td {
        Some(path) => DecompositionSource::File(path),
        None => DecompositionSource::Heuristic(args.heuristic.into()),
    };
    let config = RunConfig {
        input,
        source,
        mode: if args.strict_vars {
            VarMode::Strict
        } else {
            VarMode::Declared
        },
        verify: args.verify,
        stats: args.stats,
        trace: args.trace,
        emit_td: args.emit_td,
        emit_gr: args.emit_gr,
    };

    match run(&config, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
