//! The bipartite incidence graph of a formula: one vertex per variable, one
//! per clause, an edge wherever the variable occurs in the clause.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::formula::{Formula, Var, VarMode};

/// A vertex of the incidence graph. The derived ordering puts variable
/// vertices before clause vertices, each side ascending by id; bag layouts
/// and file numbering rely on this.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IncidenceVertex {
    Var(Var),
    /// A clause, identified by its index in the formula.
    Clause(usize),
}

impl IncidenceVertex {
    pub fn is_var(self) -> bool {
        matches!(self, IncidenceVertex::Var(_))
    }

    pub fn is_clause(self) -> bool {
        matches!(self, IncidenceVertex::Clause(_))
    }

    /// The 1-based file id under the documented numbering: variables keep
    /// their DIMACS id `1..=n`, clause `j` becomes `n + j + 1`.
    pub fn file_id(self, var_count: u32) -> usize {
        match self {
            IncidenceVertex::Var(v) => v.id() as usize,
            IncidenceVertex::Clause(j) => var_count as usize + j + 1,
        }
    }

    /// Inverse of [`file_id`](Self::file_id). `None` if out of range.
    pub fn from_file_id(id: usize, var_count: u32, clause_count: usize) -> Option<IncidenceVertex> {
        if id == 0 {
            None
        } else if id <= var_count as usize {
            Some(IncidenceVertex::Var(Var::new(id as u32)))
        } else if id <= var_count as usize + clause_count {
            Some(IncidenceVertex::Clause(id - var_count as usize - 1))
        } else {
            None
        }
    }
}

impl fmt::Debug for IncidenceVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IncidenceVertex::Var(v) => write!(f, "{v}"),
            IncidenceVertex::Clause(j) => write!(f, "C{}", j + 1),
        }
    }
}

impl fmt::Display for IncidenceVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Bipartite incidence graph. Immutable once built.
#[derive(Clone, Debug)]
pub struct IncidenceGraph {
    adjacency: BTreeMap<IncidenceVertex, BTreeSet<IncidenceVertex>>,
    var_count: u32,
    clause_count: usize,
    edge_count: usize,
}

impl IncidenceGraph {
    pub fn vertices(&self) -> impl Iterator<Item = IncidenceVertex> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn contains(&self, v: IncidenceVertex) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn neighbors(&self, v: IncidenceVertex) -> impl Iterator<Item = IncidenceVertex> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    pub fn has_edge(&self, u: IncidenceVertex, v: IncidenceVertex) -> bool {
        self.adjacency.get(&u).is_some_and(|ns| ns.contains(&v))
    }

    /// Edges with the variable endpoint first.
    pub fn edges(&self) -> impl Iterator<Item = (IncidenceVertex, IncidenceVertex)> + '_ {
        self.adjacency
            .iter()
            .filter(|(v, _)| v.is_var())
            .flat_map(|(&v, ns)| ns.iter().map(move |&c| (v, c)))
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Declared variable count of the underlying formula; fixes the file
    /// numbering universe even when unused variables are absent.
    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn clause_count(&self) -> usize {
        self.clause_count
    }

    /// Size of the file numbering universe (`n + m`).
    pub fn universe_size(&self) -> usize {
        self.var_count as usize + self.clause_count
    }
}

/// Builds the incidence graph of `formula`. In [`VarMode::Declared`] every
/// declared variable gets a vertex (unused ones isolated); in
/// [`VarMode::Strict`] only occurring variables do. A variable occurring with
/// both polarities in a clause still yields a single edge.
pub fn build_incidence(formula: &Formula, mode: VarMode) -> IncidenceGraph {
    let mut adjacency: BTreeMap<IncidenceVertex, BTreeSet<IncidenceVertex>> = BTreeMap::new();
    match mode {
        VarMode::Declared => {
            for id in 1..=formula.declared_var_count() {
                adjacency.insert(IncidenceVertex::Var(Var::new(id)), BTreeSet::new());
            }
        }
        VarMode::Strict => {
            for var in formula.occurring_vars() {
                adjacency.insert(IncidenceVertex::Var(var), BTreeSet::new());
            }
        }
    }
    let mut edge_count = 0;
    for (index, clause) in formula.clauses().iter().enumerate() {
        let cv = IncidenceVertex::Clause(index);
        adjacency.entry(cv).or_default();
        for var in clause.vars() {
            let vv = IncidenceVertex::Var(var);
            if adjacency.get_mut(&vv).unwrap().insert(cv) {
                adjacency.get_mut(&cv).unwrap().insert(vv);
                edge_count += 1;
            }
        }
    }
    IncidenceGraph {
        adjacency,
        var_count: formula.declared_var_count(),
        clause_count: formula.clause_count(),
        edge_count,
    }
}

/// Serializes the graph in PACE 2017 `.gr` format (`p tw <n> <m>` header, one
/// edge per line) under the documented file numbering. The vertex universe is
/// always `n + m`, so strict- and declared-mode graphs of the same formula
/// export identically (isolated vertices carry no edges).
pub fn write_gr(graph: &IncidenceGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "p tw {} {}\n",
        graph.universe_size(),
        graph.edge_count()
    ));
    for (u, v) in graph.edges() {
        out.push_str(&format!(
            "{} {}\n",
            u.file_id(graph.var_count()),
            v.file_id(graph.var_count())
        ));
    }
    out
}
