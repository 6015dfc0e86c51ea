//! Brute-force reference counters. These enumerate whole assignment spaces
//! and evaluate clauses directly on bit vectors, sharing no satisfaction
//! logic with the table machinery they are used to check.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::counter::{BagLayout, CountTable, CounterError};
use crate::formula::{Formula, Var, VarMode};
use crate::incidence::IncidenceVertex;
use crate::nicety::NiceDecomposition;

/// Enumeration guard for [`brute_force_count`].
pub const MAX_COUNT_VARS: usize = 24;
/// Enumeration guard for [`brute_force_table`].
pub const MAX_TABLE_VARS: usize = 20;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} variables exceed the enumeration guard of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error(transparent)]
    Table(#[from] CounterError),
}

/// A clause compiled against a variable ordering: the bit positions whose
/// values make it true. Literals over variables outside the ordering are
/// dropped; they can never satisfy the clause here.
struct CompiledClause {
    /// (bit position, value that satisfies the literal)
    tests: Vec<(usize, bool)>,
}

impl CompiledClause {
    fn compile(clause: &crate::formula::Clause, vars: &[Var]) -> CompiledClause {
        let tests = clause
            .literals()
            .iter()
            .filter_map(|lit| vars.binary_search(&lit.var).ok().map(|i| (i, !lit.negated)))
            .collect();
        CompiledClause { tests }
    }

    /// True iff some literal holds under the bit vector `bits` (bit i holds
    /// the value of `vars[i]`).
    fn satisfied(&self, bits: usize) -> bool {
        self.tests
            .iter()
            .any(|&(i, wanted)| ((bits >> i) & 1 == 1) == wanted)
    }
}

/// Counts satisfying assignments by enumerating every assignment of the
/// counted variable set: occurring variables in strict mode, all declared
/// variables otherwise.
pub fn brute_force_count(formula: &Formula, mode: VarMode) -> Result<BigUint, OracleError> {
    let vars: Vec<Var> = match mode {
        VarMode::Strict => formula.occurring_vars().into_iter().collect(),
        VarMode::Declared => (1..=formula.declared_var_count()).map(Var::new).collect(),
    };
    if vars.len() > MAX_COUNT_VARS {
        return Err(OracleError::TooManyVariables {
            count: vars.len(),
            limit: MAX_COUNT_VARS,
        });
    }
    let compiled: Vec<CompiledClause> = formula
        .clauses()
        .iter()
        .map(|c| CompiledClause::compile(c, &vars))
        .collect();
    let mut count = BigUint::zero();
    for bits in 0..(1usize << vars.len()) {
        if compiled.iter().all(|c| c.satisfied(bits)) {
            count += 1u32;
        }
    }
    Ok(count)
}

/// Recomputes the table of `node` from its definition: enumerate every
/// assignment of the subtree's variables, and tally it at the row given by
/// its bag-variable values and the exact set of subtree clauses it leaves
/// unsatisfied. Assignments leaving a clause outside the bag unsatisfied
/// belong to no row and are dropped.
pub fn brute_force_table(
    formula: &Formula,
    nice: &NiceDecomposition,
    node: usize,
) -> Result<CountTable, OracleError> {
    let mut subtree_vertices: BTreeSet<IncidenceVertex> = BTreeSet::new();
    let mut stack = vec![node];
    while let Some(current) = stack.pop() {
        subtree_vertices.extend(nice.bag(current).iter().copied());
        stack.extend(nice.children(current).iter().copied());
    }
    let vars: Vec<Var> = subtree_vertices
        .iter()
        .filter_map(|v| match v {
            IncidenceVertex::Var(x) => Some(*x),
            IncidenceVertex::Clause(_) => None,
        })
        .collect();
    let clauses: Vec<usize> = subtree_vertices
        .iter()
        .filter_map(|v| match v {
            IncidenceVertex::Clause(c) => Some(*c),
            IncidenceVertex::Var(_) => None,
        })
        .collect();
    if vars.len() > MAX_TABLE_VARS {
        return Err(OracleError::TooManyVariables {
            count: vars.len(),
            limit: MAX_TABLE_VARS,
        });
    }

    let layout = BagLayout::new(nice.bag(node))?;
    let mut counts = vec![BigUint::zero(); layout.rows()];
    let bag_positions: Vec<(usize, usize)> = vars
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| layout.position(IncidenceVertex::Var(v)).map(|bit| (i, bit)))
        .collect();
    let compiled: Vec<(CompiledClause, Option<usize>)> = clauses
        .iter()
        .map(|&c| {
            (
                CompiledClause::compile(formula.clause(c), &vars),
                layout.position(IncidenceVertex::Clause(c)),
            )
        })
        .collect();

    for bits in 0..(1usize << vars.len()) {
        let mut row = 0usize;
        for &(i, bit) in &bag_positions {
            if (bits >> i) & 1 == 1 {
                row |= 1 << bit;
            }
        }
        let mut in_range = true;
        for (clause, bag_bit) in &compiled {
            if !clause.satisfied(bits) {
                match bag_bit {
                    Some(bit) => row |= 1 << bit,
                    None => {
                        // unsatisfied clause outside the bag: no valid row
                        in_range = false;
                        break;
                    }
                }
            }
        }
        if in_range {
            counts[row] += 1u32;
        }
    }
    Ok(CountTable::new(layout, counts))
}
