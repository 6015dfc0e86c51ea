//! CNF formulas as sets of clauses, DIMACS parsing, and partial-assignment
//! clause satisfaction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A propositional variable, identified by its 1-based DIMACS index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from a 1-based index.
    ///
    /// Panics if `id` is zero; DIMACS variable indices start at 1.
    pub fn new(id: u32) -> Var {
        assert!(id >= 1, "variable ids are 1-based");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A possibly negated variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: Var,
    pub negated: bool,
}

impl Literal {
    pub fn positive(var: Var) -> Literal {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn negative(var: Var) -> Literal {
        Literal { var, negated: true }
    }

    /// Converts a nonzero DIMACS literal (`3`, `-7`, ...).
    pub fn from_dimacs(lit: i64) -> Literal {
        assert!(lit != 0, "DIMACS literals are nonzero");
        Literal {
            var: Var::new(lit.unsigned_abs() as u32),
            negated: lit < 0,
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.id());
        if self.negated {
            -id
        } else {
            id
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// A clause: a finite set of literals. May be empty, and may contain both
/// polarities of the same variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Clause {
    literals: Vec<Literal>, // sorted and deduplicated
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Clause {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort_unstable();
        literals.dedup();
        Clause { literals }
    }

    pub fn from_dimacs(lits: impl IntoIterator<Item = i64>) -> Clause {
        Clause::new(lits.into_iter().map(Literal::from_dimacs))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    /// The set of variables occurring (either polarity) in this clause.
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let mut last = None;
        self.literals.iter().filter_map(move |lit| {
            if last == Some(lit.var) {
                None
            } else {
                last = Some(lit.var);
                Some(lit.var)
            }
        })
    }
}

/// Whether counting ranges over all variables declared in the DIMACS header
/// or only over variables that actually occur in some clause.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum VarMode {
    /// Count assignments of all declared variables (DIMACS convention).
    #[default]
    Declared,
    /// Count assignments of occurring variables only.
    Strict,
}

/// A CNF formula: a deduplicated set of clauses. Each clause carries a stable
/// index (its position) used as its graph-vertex identity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Formula {
    clauses: Vec<Clause>,
    declared_var_count: u32,
}

impl Formula {
    /// Builds a formula, collapsing duplicate clauses (first occurrence keeps
    /// its position). Fails if a clause mentions a variable above
    /// `declared_var_count`.
    pub fn new(
        declared_var_count: u32,
        clauses: impl IntoIterator<Item = Clause>,
    ) -> Result<Formula, FormulaError> {
        let mut seen = BTreeSet::new();
        let mut deduped = Vec::new();
        for clause in clauses {
            for lit in clause.literals() {
                if lit.var.id() > declared_var_count {
                    return Err(FormulaError::UndeclaredVariable {
                        var: lit.var,
                        declared: declared_var_count,
                    });
                }
            }
            if seen.insert(clause.clone()) {
                deduped.push(clause);
            }
        }
        Ok(Formula {
            clauses: deduped,
            declared_var_count,
        })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn declared_var_count(&self) -> u32 {
        self.declared_var_count
    }

    /// Variables occurring in at least one clause, ascending.
    pub fn occurring_vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    /// Size of a largest clause (0 for the empty formula).
    pub fn largest_clause_size(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable {var} exceeds the declared variable count {declared}")]
    UndeclaredVariable { var: Var, declared: u32 },
}

/// A partial truth assignment: total on its domain, undefined elsewhere.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Assignment {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

/// True iff some literal of `clause` is over a variable in `alpha`'s domain
/// and is made true by `alpha`. Variables outside the domain never satisfy a
/// literal, so an assignment with empty overlap cannot satisfy the clause.
pub fn satisfies(alpha: &Assignment, clause: &Clause) -> bool {
    clause
        .literals()
        .iter()
        .any(|lit| alpha.get(lit.var) == Some(!lit.negated))
}

/// An error raised while parsing DIMACS CNF input, with the 1-based line it
/// was detected on.
#[derive(Error, Debug, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: clause data before the `p cnf` header")]
    MissingHeader { line: usize },
    #[error("no `p cnf` header found")]
    NoHeader,
    #[error("line {line}: duplicate `p cnf` header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: literal {lit} out of range: {n} variables declared")]
    LiteralOutOfRange { line: usize, lit: i64, n: u32 },
    #[error("line {line}: last clause is missing its terminating 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: expected an integer, found `{token}`")]
    InvalidToken { line: usize, token: String },
}

/// Parses DIMACS CNF text. Comment lines starting with `c` may appear
/// anywhere; clauses are sequences of nonzero literals terminated by `0` and
/// may span lines. Duplicate literals within a clause and duplicate clauses
/// are collapsed, so the resulting clause count may be below the header's.
pub fn parse_dimacs(text: &str) -> Result<Formula, ParseError> {
    let mut declared: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_lit_line = 0;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if declared.is_some() {
                return Err(ParseError::DuplicateHeader { line });
            }
            declared = Some(parse_header(trimmed, line)?);
            continue;
        }
        let Some((n, _)) = declared else {
            return Err(ParseError::MissingHeader { line });
        };
        for token in trimmed.split_ascii_whitespace() {
            let lit: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line,
                token: token.to_string(),
            })?;
            if lit == 0 {
                clauses.push(Clause::from_dimacs(current.drain(..)));
            } else {
                if lit.unsigned_abs() > u64::from(n) {
                    return Err(ParseError::LiteralOutOfRange { line, lit, n });
                }
                current.push(lit);
                last_lit_line = line;
            }
        }
    }

    if !current.is_empty() {
        return Err(ParseError::MissingTerminator {
            line: last_lit_line,
        });
    }
    let Some((n, _)) = declared else {
        return Err(ParseError::NoHeader);
    };
    // Range was checked per literal, so this cannot fail.
    Ok(Formula::new(n, clauses).expect("literals already range-checked"))
}

fn parse_header(line_text: &str, line: usize) -> Result<(u32, usize), ParseError> {
    let err = |msg: &str| ParseError::MalformedHeader {
        line,
        msg: msg.to_string(),
    };
    let mut tokens = line_text.split_ascii_whitespace();
    if tokens.next() != Some("p") {
        return Err(err("expected `p`"));
    }
    if tokens.next() != Some("cnf") {
        return Err(err("expected format `cnf`"));
    }
    let n = tokens
        .next()
        .ok_or_else(|| err("missing variable count"))?
        .parse::<u32>()
        .map_err(|_| err("variable count is not a non-negative integer"))?;
    let m = tokens
        .next()
        .ok_or_else(|| err("missing clause count"))?
        .parse::<usize>()
        .map_err(|_| err("clause count is not a non-negative integer"))?;
    if tokens.next().is_some() {
        return Err(err("trailing tokens after clause count"));
    }
    Ok((n, m))
}

/// Serializes a formula back to DIMACS. Together with [`parse_dimacs`] this
/// round-trips: the output parses to an identical formula.
pub fn write_dimacs(formula: &Formula) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "p cnf {} {}\n",
        formula.declared_var_count(),
        formula.clause_count()
    ));
    for clause in formula.clauses() {
        for lit in clause.literals() {
            out.push_str(&format!("{} ", lit.to_dimacs()));
        }
        out.push_str("0\n");
    }
    out
}
