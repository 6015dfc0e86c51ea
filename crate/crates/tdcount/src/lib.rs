//! Exact #SAT model counting by dynamic programming over a nice
//! tree-decomposition of the formula's incidence graph.
//!
//! The pipeline: [`formula::parse_dimacs`] reads a CNF formula,
//! [`incidence::build_incidence`] builds its bipartite incidence graph,
//! [`decompose::heuristic_decompose`] (or an imported PACE `.td` file) yields
//! a tree-decomposition, [`nicety::make_nice`] normalizes it, and
//! [`counter::count_models`] runs the table recurrences bottom-up to produce
//! the exact count as an arbitrary-precision integer.
//!
//! The runtime is governed by the decomposition width `k`: tables hold
//! `2^|bag|` rows and a join touches up to `4^k` row pairs per assignment,
//! times the cost of big-integer arithmetic.

pub mod cli;
pub mod counter;
pub mod decompose;
pub mod formula;
pub mod incidence;
pub mod nicety;
pub mod oracle;

pub use counter::{count_models, CountTable};
pub use decompose::{heuristic_decompose, Strategy, TreeDecomposition};
pub use formula::{parse_dimacs, Formula, VarMode};
pub use incidence::{build_incidence, IncidenceGraph};
pub use nicety::{make_nice, NiceDecomposition};
