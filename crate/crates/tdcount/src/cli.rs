//! Pipeline wiring for the command-line front end: parse, build the
//! incidence graph, obtain a decomposition, make it nice, count. The count
//! goes to standard output alone; every diagnostic goes to standard error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::counter::{self, CounterError};
use crate::decompose::{self, heuristic_decompose, validate, Strategy, TreeDecomposition};
use crate::formula::{parse_dimacs, Formula, ParseError, VarMode};
use crate::incidence::{build_incidence, write_gr, IncidenceGraph};
use crate::nicety::{make_nice, NicetyError};
use crate::oracle::{self, OracleError};

/// Where the tree-decomposition comes from. Exactly one source per run.
#[derive(Clone, Debug)]
pub enum DecompositionSource {
    Heuristic(Strategy),
    File(PathBuf),
}

/// Where the DIMACS input comes from.
#[derive(Clone, Debug)]
pub enum Input {
    Path(PathBuf),
    Stdin,
    /// In-memory input, mainly for tests.
    Text(String),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Input,
    pub source: DecompositionSource,
    pub mode: VarMode,
    pub verify: bool,
    pub stats: bool,
    pub trace: bool,
    pub emit_td: Option<PathBuf>,
    pub emit_gr: Option<PathBuf>,
}

#[derive(Error, Debug)]
pub enum CliError {
    #[error("cannot read input: {0}")]
    Input(io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("cannot read decomposition file: {0}")]
    TdRead(io::Error),
    #[error("imported decomposition: {0}")]
    TdParse(#[from] decompose::TdParseError),
    #[error("imported decomposition rejected: {0}")]
    InvalidDecomposition(String),
    #[error("verification failed: counted {counted} but the oracle says {expected}")]
    OracleMismatch { counted: String, expected: String },
    #[error("verification skipped: {0}")]
    VerifyGuard(OracleError),
    #[error("cannot write {path}: {source}")]
    Emit { path: String, source: io::Error },
    #[error(transparent)]
    Engine(#[from] CounterError),
    #[error(transparent)]
    Nicety(#[from] NicetyError),
    #[error("cannot write output: {0}")]
    Output(io::Error),
}

impl CliError {
    /// Stable process exit status for each failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Parse(_) => 2,
            CliError::TdRead(_) | CliError::TdParse(_) | CliError::InvalidDecomposition(_) => 3,
            CliError::OracleMismatch { .. } => 4,
            CliError::VerifyGuard(_) => 5,
            CliError::Emit { .. }
            | CliError::Engine(_)
            | CliError::Nicety(_)
            | CliError::Output(_) => 1,
        }
    }
}

/// Run diagnostics printed as JSON with `--stats`: the width, node count and
/// largest clause size appearing in the runtime bound, plus the largest table
/// and the wall time actually spent.
#[derive(Serialize, Debug)]
pub struct RunStats {
    pub width: usize,
    pub node_count: usize,
    pub largest_clause_size: usize,
    pub max_table_rows: usize,
    pub wall_time_ms: f64,
}

fn read_input(input: &Input) -> Result<String, CliError> {
    match input {
        Input::Path(path) => fs::read_to_string(path).map_err(CliError::Input),
        Input::Stdin => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(CliError::Input)?;
            Ok(text)
        }
        Input::Text(text) => Ok(text.clone()),
    }
}

fn obtain_decomposition(
    source: &DecompositionSource,
    formula: &Formula,
    graph: &IncidenceGraph,
) -> Result<TreeDecomposition, CliError> {
    match source {
        DecompositionSource::Heuristic(strategy) => Ok(heuristic_decompose(graph, *strategy)),
        DecompositionSource::File(path) => {
            let text = fs::read_to_string(path).map_err(CliError::TdRead)?;
            let td =
                decompose::parse_td(&text, formula.declared_var_count(), formula.clause_count())?;
            let report =
                validate(graph, &td).map_err(|e| CliError::InvalidDecomposition(e.to_string()))?;
            if !report.is_valid() {
                return Err(CliError::InvalidDecomposition(describe_report(&report)));
            }
            Ok(td)
        }
    }
}

fn describe_report(report: &decompose::ValidationReport) -> String {
    if let Some(v) = report.uncovered_vertex {
        format!("vertex {v} is in no bag")
    } else if let Some((u, v)) = report.uncovered_edge {
        format!("edge {{{u}, {v}}} is covered by no bag")
    } else if let Some(v) = report.disconnected_vertex {
        format!("bags containing {v} do not form a connected subtree")
    } else {
        "unknown defect".to_string()
    }
}

/// Executes one counting run. Prints the model count in decimal on a single
/// stdout line; all other output (stats, trace, verification notes) goes to
/// `stderr`.
pub fn run(
    config: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let started = Instant::now();
    let text = read_input(&config.input)?;
    let formula = parse_dimacs(&text)?;
    let graph = build_incidence(&formula, config.mode);

    if let Some(path) = &config.emit_gr {
        fs::write(path, write_gr(&graph)).map_err(|source| CliError::Emit {
            path: path.display().to_string(),
            source,
        })?;
    }

    let td = obtain_decomposition(&config.source, &formula, &graph)?;
    if let Some(path) = &config.emit_td {
        let text = decompose::write_td(&td, formula.declared_var_count(), formula.clause_count());
        fs::write(path, text).map_err(|source| CliError::Emit {
            path: path.display().to_string(),
            source,
        })?;
    }

    let nice = make_nice(&td, &graph)?;

    let count = if config.trace {
        let mut trace_error = None;
        let count = counter::count_models_traced(&formula, &nice, config.mode, |node, table| {
            if trace_error.is_some() {
                return;
            }
            let rows: Vec<serde_json::Value> = table
                .counts()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(row, c)| serde_json::json!({ "row": row, "count": c.to_string() }))
                .collect();
            let line = serde_json::json!({
                "node": node,
                "kind": nice.kind(node).to_string(),
                "bag": nice.bag(node).iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "rows": rows,
            });
            if let Err(e) = writeln!(stderr, "{line}") {
                trace_error = Some(e);
            }
        })?;
        if let Some(e) = trace_error {
            return Err(CliError::Output(e));
        }
        count
    } else {
        counter::count_models(&formula, &nice, config.mode)?
    };

    if config.verify {
        let expected =
            oracle::brute_force_count(&formula, config.mode).map_err(CliError::VerifyGuard)?;
        if expected != count {
            return Err(CliError::OracleMismatch {
                counted: count.to_string(),
                expected: expected.to_string(),
            });
        }
        writeln!(stderr, "verified against brute force: {expected}").map_err(CliError::Output)?;
    }

    if config.stats {
        let stats = RunStats {
            width: nice.width(),
            node_count: nice.node_count(),
            largest_clause_size: formula.largest_clause_size(),
            max_table_rows: (0..nice.node_count())
                .map(|i| 1usize << nice.bag(i).len())
                .max()
                .unwrap_or(1),
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        let json = serde_json::to_string(&stats).expect("stats serialization cannot fail");
        writeln!(stderr, "{json}").map_err(CliError::Output)?;
    }

    writeln!(stdout, "{count}").map_err(CliError::Output)?;
    Ok(())
}
