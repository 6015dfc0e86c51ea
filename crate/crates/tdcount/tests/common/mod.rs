//! Instance generators shared by the integration suites. Seeded ChaCha keeps
//! every run reproducible.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tdcount::formula::{Clause, Formula};

pub struct FormulaParams {
    pub max_vars: u32,
    pub max_clauses: usize,
    pub max_clause_width: usize,
    /// Roughly one clause in twenty comes out empty when set.
    pub allow_empty_clauses: bool,
}

pub fn random_formula(rng: &mut ChaCha8Rng, params: &FormulaParams) -> Formula {
    let vars = rng.gen_range(1..=params.max_vars);
    let clause_count = rng.gen_range(0..=params.max_clauses);
    let clauses = (0..clause_count).map(|_| {
        let width = if params.allow_empty_clauses && rng.gen_ratio(1, 20) {
            0
        } else {
            rng.gen_range(1..=params.max_clause_width)
        };
        Clause::from_dimacs((0..width).map(|_| {
            let var = rng.gen_range(1..=vars) as i64;
            if rng.gen() {
                -var
            } else {
                var
            }
        }))
    });
    Formula::new(vars, clauses).expect("generated literals are in range")
}

/// DIMACS text of the implication chain x_{i+1} -> x_i: n clauses
/// {x_i, ¬x_{i+1}} over n+1 variables. Its incidence graph is a path, so the
/// decomposition width stays constant while n grows.
pub fn chain_formula_text(n: u32) -> String {
    std::iter::once(format!("p cnf {} {}\n", n + 1, n))
        .chain((1..=n).map(|i| format!("{} -{} 0\n", i, i + 1)))
        .collect()
}

/// DIMACS text of a grid of implications over w*h variables: one clause per
/// horizontally or vertically adjacent pair. The incidence treewidth grows
/// with the smaller grid dimension.
pub fn grid_formula_text(width: u32, height: u32) -> String {
    let var = |i: u32, j: u32| i * height + j + 1;
    let mut clauses = Vec::new();
    for i in 0..width {
        for j in 0..height {
            if i + 1 < width {
                clauses.push(format!("{} -{} 0\n", var(i, j), var(i + 1, j)));
            }
            if j + 1 < height {
                clauses.push(format!("{} -{} 0\n", var(i, j), var(i, j + 1)));
            }
        }
    }
    format!(
        "p cnf {} {}\n{}",
        width * height,
        clauses.len(),
        clauses.concat()
    )
}

/// A formula whose incidence graph is a forest with at least one edge: every
/// clause takes at most one already-used variable plus fresh ones, so no
/// cycle can close.
pub fn tree_incidence_formula(rng: &mut ChaCha8Rng, clause_count: usize) -> Formula {
    let clause_count = clause_count.max(1);
    let mut next_var: u32 = 1;
    let mut used: Vec<u32> = Vec::new();
    let mut clauses = Vec::new();
    for _ in 0..clause_count {
        let mut ids: Vec<u32> = Vec::new();
        if !used.is_empty() && rng.gen_ratio(3, 4) {
            ids.push(used[rng.gen_range(0..used.len())]);
        }
        let fresh = rng.gen_range(if ids.is_empty() { 1 } else { 0 }..=3u32);
        for _ in 0..fresh {
            ids.push(next_var);
            used.push(next_var);
            next_var += 1;
        }
        clauses.push(Clause::from_dimacs(ids.iter().map(|&v| {
            if rng.gen() {
                -(v as i64)
            } else {
                v as i64
            }
        })));
    }
    Formula::new(next_var - 1, clauses).expect("fresh variables are declared")
}
