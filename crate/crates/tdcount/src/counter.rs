//! Bottom-up table computation over a nice decomposition. Each node carries a
//! table with one arbitrary-precision count per combination of a bag-variable
//! assignment and a bag-clause subset; the root table yields the model count.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::decompose::Bag;
use crate::formula::{Formula, Var, VarMode};
use crate::incidence::IncidenceVertex;
use crate::nicety::{NiceDecomposition, NodeKind};

/// Largest supported bag: tables are dense with `2^|bag|` rows, so a wider
/// bag means multi-gigabyte tables and a hopeless `4^k` run anyway.
pub const MAX_BAG_SIZE: usize = 24;

/// Fixed bit layout of a bag: members sorted ascending with variables in a
/// contiguous prefix followed by clauses, bit `i` belonging to `members[i]`.
/// Row indices encode the variable assignment in the low bits and the
/// "still unsatisfied" clause subset in the high bits.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BagLayout {
    members: Vec<IncidenceVertex>,
    var_count: usize,
}

impl BagLayout {
    pub fn new(bag: &Bag) -> Result<BagLayout, CounterError> {
        if bag.len() > MAX_BAG_SIZE {
            return Err(CounterError::TableTooLarge {
                bag_size: bag.len(),
            });
        }
        // BTreeSet order is variables ascending, then clauses ascending.
        let members: Vec<IncidenceVertex> = bag.iter().copied().collect();
        let var_count = members.iter().filter(|v| v.is_var()).count();
        Ok(BagLayout { members, var_count })
    }

    pub fn members(&self) -> &[IncidenceVertex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of variable members (the size of the variable prefix).
    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clause_count(&self) -> usize {
        self.members.len() - self.var_count
    }

    pub fn position(&self, v: IncidenceVertex) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    pub fn rows(&self) -> usize {
        1 << self.members.len()
    }

    pub fn bag(&self) -> Bag {
        self.members.iter().copied().collect()
    }

    /// Bitmask selecting the variable prefix of a row index.
    fn var_mask(&self) -> usize {
        (1 << self.var_count) - 1
    }

    /// (positive, negative) occurrence masks of `clause` over the variable
    /// prefix. A tautological clause may set the same bit in both.
    fn polarity_masks(&self, clause: &crate::formula::Clause) -> (usize, usize) {
        let mut pos = 0;
        let mut neg = 0;
        for lit in clause.literals() {
            if let Some(bit) = self.position(IncidenceVertex::Var(lit.var)) {
                if lit.negated {
                    neg |= 1 << bit;
                } else {
                    pos |= 1 << bit;
                }
            }
        }
        (pos, neg)
    }
}

/// A node table: dense sequence of `2^|bag|` counts indexed by row bitmask.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CountTable {
    layout: BagLayout,
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn new(layout: BagLayout, counts: Vec<BigUint>) -> CountTable {
        assert_eq!(counts.len(), layout.rows(), "table length must be 2^|bag|");
        CountTable { layout, counts }
    }

    fn zeroed(layout: BagLayout) -> CountTable {
        let rows = layout.rows();
        CountTable {
            layout,
            counts: vec![BigUint::zero(); rows],
        }
    }

    pub fn layout(&self) -> &BagLayout {
        &self.layout
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, row: usize) -> &BigUint {
        &self.counts[row]
    }

    /// Sum of the rows with an empty clause subset: the aggregation read off
    /// at the root.
    pub fn empty_clause_sum(&self) -> BigUint {
        let vars = 1 << self.layout.var_count();
        self.counts[..vars].iter().sum()
    }

    /// Sum over the whole table, used by mass-conservation checks.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum CounterError {
    #[error("bag of {bag_size} vertices exceeds the supported maximum of {MAX_BAG_SIZE}")]
    TableTooLarge { bag_size: usize },
    #[error("clause index {index} out of range ({count} clauses)")]
    ClauseOutOfRange { index: usize, count: usize },
    #[error("introduced vertex {0} already present in the child bag")]
    AlreadyPresent(String),
    #[error("forgotten vertex {0} missing from the child bag")]
    NotPresent(String),
    #[error("join children have different bags")]
    LayoutMismatch,
    #[error("node {node}: children inconsistent with node kind")]
    MalformedNode { node: usize },
    #[error("node {node}: computed bag does not match the node's bag")]
    BagMismatch { node: usize },
    #[error("decomposition does not cover the formula: {0}")]
    NotCovering(String),
    #[error("decomposition mentions variable {0} beyond the declared count")]
    UnknownVariable(Var),
}

/// Removes bit `pos` from `row`, closing the gap.
fn drop_bit(row: usize, pos: usize) -> usize {
    (row & ((1 << pos) - 1)) | ((row >> (pos + 1)) << pos)
}

/// Inserts a zero bit at `pos`, shifting higher bits up.
fn insert_zero_bit(row: usize, pos: usize) -> usize {
    ((row >> pos) << (pos + 1)) | (row & ((1 << pos) - 1))
}

fn clause_of(formula: &Formula, index: usize) -> Result<&crate::formula::Clause, CounterError> {
    formula
        .clauses()
        .get(index)
        .ok_or(CounterError::ClauseOutOfRange {
            index,
            count: formula.clause_count(),
        })
}

/// Builds a leaf's table: a row is 1 exactly when its clause subset equals
/// the set of bag clauses its variable assignment leaves unsatisfied.
pub fn leaf_table(bag: &Bag, formula: &Formula) -> Result<CountTable, CounterError> {
    let layout = BagLayout::new(bag)?;
    let p = layout.var_count();
    let masks = clause_polarity_masks(&layout, formula)?;
    let mut table = CountTable::zeroed(layout);
    for assignment in 0..(1usize << p) {
        let mut unsat = 0;
        for (j, &(pos, neg)) in masks.iter().enumerate() {
            if !satisfied_by_bits(assignment, pos, neg, table.layout.var_mask()) {
                unsat |= 1 << j;
            }
        }
        table.counts[assignment | (unsat << p)] = BigUint::one();
    }
    Ok(table)
}

fn clause_polarity_masks(
    layout: &BagLayout,
    formula: &Formula,
) -> Result<Vec<(usize, usize)>, CounterError> {
    layout.members()[layout.var_count()..]
        .iter()
        .map(|&member| {
            let IncidenceVertex::Clause(index) = member else {
                unreachable!("clause suffix of the layout");
            };
            Ok(layout.polarity_masks(clause_of(formula, index)?))
        })
        .collect()
}

fn satisfied_by_bits(assignment: usize, pos: usize, neg: usize, var_mask: usize) -> bool {
    (pos & assignment) != 0 || (neg & !assignment & var_mask) != 0
}

/// Introduces variable `x`: each row either dies (some clause in its subset
/// contains the literal `x` is set against) or collects the child rows whose
/// subset extends it by clauses that mention that literal.
pub fn introduce_var_table(
    child: &CountTable,
    x: Var,
    formula: &Formula,
) -> Result<CountTable, CounterError> {
    let vertex = IncidenceVertex::Var(x);
    if child.layout.position(vertex).is_some() {
        return Err(CounterError::AlreadyPresent(vertex.to_string()));
    }
    let mut bag = child.layout.bag();
    bag.insert(vertex);
    let layout = BagLayout::new(&bag)?;
    let x_bit = layout.position(vertex).expect("x was just inserted");
    let child_p = child.layout.var_count();

    // Per truth value of x: mask (in child row coordinates) of the bag
    // clauses containing the literal falsified by that value.
    let mut blocked = [0usize; 2];
    for (j, &member) in child.layout.members()[child_p..].iter().enumerate() {
        let IncidenceVertex::Clause(index) = member else {
            unreachable!("clause suffix of the layout");
        };
        let clause = clause_of(formula, index)?;
        if clause.contains(crate::formula::Literal::negative(x)) {
            blocked[0] |= 1 << (child_p + j);
        }
        if clause.contains(crate::formula::Literal::positive(x)) {
            blocked[1] |= 1 << (child_p + j);
        }
    }

    let mut table = CountTable::zeroed(layout);
    for row in 0..table.counts.len() {
        let value = (row >> x_bit) & 1;
        let rest = drop_bit(row, x_bit); // child coordinates: (α, A)
        let blocking = blocked[value];
        if rest & blocking != 0 {
            continue; // a clause in A contains the falsified literal
        }
        // sum the child rows over every subset of the blocked clauses
        let mut sum = BigUint::zero();
        let mut subset = blocking;
        loop {
            sum += &child.counts[rest | subset];
            if subset == 0 {
                break;
            }
            subset = (subset - 1) & blocking;
        }
        table.counts[row] = sum;
    }
    Ok(table)
}

/// Introduces clause `index`: a row survives iff the clause's membership in
/// the row's subset matches its non-satisfaction under the row's assignment.
pub fn introduce_clause_table(
    child: &CountTable,
    index: usize,
    formula: &Formula,
) -> Result<CountTable, CounterError> {
    let vertex = IncidenceVertex::Clause(index);
    if child.layout.position(vertex).is_some() {
        return Err(CounterError::AlreadyPresent(vertex.to_string()));
    }
    let mut bag = child.layout.bag();
    bag.insert(vertex);
    let layout = BagLayout::new(&bag)?;
    let clause_bit = layout.position(vertex).expect("clause was just inserted");
    let (pos, neg) = layout.polarity_masks(clause_of(formula, index)?);
    let var_mask = layout.var_mask();

    let mut table = CountTable::zeroed(layout);
    for row in 0..table.counts.len() {
        let in_subset = (row >> clause_bit) & 1 == 1;
        let satisfied = satisfied_by_bits(row & var_mask, pos, neg, var_mask);
        if in_subset != satisfied {
            table.counts[row] = child.counts[drop_bit(row, clause_bit)].clone();
        }
    }
    Ok(table)
}

/// Forgets variable `x`: sums the two child rows extending the assignment.
pub fn forget_var_table(child: &CountTable, x: Var) -> Result<CountTable, CounterError> {
    let vertex = IncidenceVertex::Var(x);
    let Some(x_bit) = child.layout.position(vertex) else {
        return Err(CounterError::NotPresent(vertex.to_string()));
    };
    let mut bag = child.layout.bag();
    bag.remove(&vertex);
    let layout = BagLayout::new(&bag)?;
    let mut table = CountTable::zeroed(layout);
    for row in 0..table.counts.len() {
        let low = insert_zero_bit(row, x_bit);
        table.counts[row] = &child.counts[low] + &child.counts[low | (1 << x_bit)];
    }
    Ok(table)
}

/// Forgets clause `index`: keeps only the rows where the clause is already
/// satisfied. Rows still containing it are dropped for good — every variable
/// of the clause has been seen below this node, so those assignments can
/// never satisfy it.
pub fn forget_clause_table(child: &CountTable, index: usize) -> Result<CountTable, CounterError> {
    let vertex = IncidenceVertex::Clause(index);
    let Some(clause_bit) = child.layout.position(vertex) else {
        return Err(CounterError::NotPresent(vertex.to_string()));
    };
    let mut bag = child.layout.bag();
    bag.remove(&vertex);
    let layout = BagLayout::new(&bag)?;
    let mut table = CountTable::zeroed(layout);
    for row in 0..table.counts.len() {
        table.counts[row] = child.counts[insert_zero_bit(row, clause_bit)].clone();
    }
    Ok(table)
}

/// Combines the tables of a join's children: for every assignment and every
/// pair of clause subsets, the product lands on their intersection.
pub fn join_tables(left: &CountTable, right: &CountTable) -> Result<CountTable, CounterError> {
    if left.layout != right.layout {
        return Err(CounterError::LayoutMismatch);
    }
    let p = left.layout.var_count();
    let q = left.layout.clause_count();
    let mut table = CountTable::zeroed(left.layout.clone());
    for assignment in 0..(1usize << p) {
        for left_subset in 0..(1usize << q) {
            let l = &left.counts[assignment | (left_subset << p)];
            if l.is_zero() {
                continue;
            }
            for right_subset in 0..(1usize << q) {
                let r = &right.counts[assignment | (right_subset << p)];
                if r.is_zero() {
                    continue;
                }
                let target = assignment | ((left_subset & right_subset) << p);
                table.counts[target] += l * r;
            }
        }
    }
    Ok(table)
}

/// Runs the bottom-up evaluation, handing each finished table to `observer`
/// before its children are released, and returns the root table.
pub fn evaluate<F>(
    formula: &Formula,
    nice: &NiceDecomposition,
    mut observer: F,
) -> Result<CountTable, CounterError>
where
    F: FnMut(usize, &CountTable),
{
    let mut stack: Vec<CountTable> = Vec::new();
    for node in nice.postorder() {
        let children = nice.children(node);
        let table = match (nice.kind(node), children.len()) {
            (NodeKind::Leaf, 0) => leaf_table(nice.bag(node), formula)?,
            (NodeKind::IntroduceVar(x), 1) => {
                let child = stack.pop().expect("postorder provides the child");
                introduce_var_table(&child, x, formula)?
            }
            (NodeKind::IntroduceClause(c), 1) => {
                let child = stack.pop().expect("postorder provides the child");
                introduce_clause_table(&child, c, formula)?
            }
            (NodeKind::ForgetVar(x), 1) => {
                let child = stack.pop().expect("postorder provides the child");
                forget_var_table(&child, x)?
            }
            (NodeKind::ForgetClause(c), 1) => {
                let child = stack.pop().expect("postorder provides the child");
                forget_clause_table(&child, c)?
            }
            (NodeKind::Join, 2) => {
                let right = stack.pop().expect("postorder provides the children");
                let left = stack.pop().expect("postorder provides the children");
                join_tables(&left, &right)?
            }
            _ => return Err(CounterError::MalformedNode { node }),
        };
        if &table.layout.bag() != nice.bag(node) {
            return Err(CounterError::BagMismatch { node });
        }
        observer(node, &table);
        stack.push(table);
    }
    Ok(stack.pop().expect("root table remains"))
}

/// Counts the satisfying assignments of `formula` using `nice`, which must be
/// a valid nice decomposition of the formula's incidence graph. The raw root
/// aggregation counts assignments of the variables the decomposition covers;
/// the mode then fixes the final variable universe: `Declared` multiplies by
/// two per declared-but-uncovered variable, `Strict` divides out the
/// non-occurring variables the decomposition happened to carry (each is an
/// exact factor of two, being constrained by no clause).
pub fn count_models(
    formula: &Formula,
    nice: &NiceDecomposition,
    mode: VarMode,
) -> Result<BigUint, CounterError> {
    count_models_traced(formula, nice, mode, |_, _| {})
}

/// [`count_models`] with a per-node hook; each table is observed right after
/// it is built.
pub fn count_models_traced<F>(
    formula: &Formula,
    nice: &NiceDecomposition,
    mode: VarMode,
    observer: F,
) -> Result<BigUint, CounterError>
where
    F: FnMut(usize, &CountTable),
{
    check_coverage(formula, nice)?;
    let root = evaluate(formula, nice, observer)?;
    let raw = root.empty_clause_sum();
    adjust_for_mode(raw, formula, &nice.vertices(), mode)
}

/// Cheap necessary conditions before evaluation: every bag must be narrow
/// enough to tabulate (checked up front so wide decompositions fail in
/// microseconds, not after building millions of rows bottom-up), the
/// decomposition must mention every clause and every occurring variable, and
/// must not mention undeclared variables. Full validation is the
/// decomposition pipeline's job.
fn check_coverage(formula: &Formula, nice: &NiceDecomposition) -> Result<(), CounterError> {
    if let Some(widest) = (0..nice.node_count()).map(|i| nice.bag(i).len()).max() {
        if widest > MAX_BAG_SIZE {
            return Err(CounterError::TableTooLarge { bag_size: widest });
        }
    }
    let vertices = nice.vertices();
    for index in 0..formula.clause_count() {
        if !vertices.contains(&IncidenceVertex::Clause(index)) {
            return Err(CounterError::NotCovering(format!(
                "clause {} appears in no bag",
                index + 1
            )));
        }
    }
    for var in formula.occurring_vars() {
        if !vertices.contains(&IncidenceVertex::Var(var)) {
            return Err(CounterError::NotCovering(format!(
                "variable {var} appears in no bag"
            )));
        }
    }
    for v in &vertices {
        if let IncidenceVertex::Var(x) = v {
            if x.id() > formula.declared_var_count() {
                return Err(CounterError::UnknownVariable(*x));
            }
        }
    }
    Ok(())
}

fn adjust_for_mode(
    raw: BigUint,
    formula: &Formula,
    covered: &BTreeSet<IncidenceVertex>,
    mode: VarMode,
) -> Result<BigUint, CounterError> {
    let covered_vars: BTreeSet<Var> = covered
        .iter()
        .filter_map(|v| match v {
            IncidenceVertex::Var(x) => Some(*x),
            IncidenceVertex::Clause(_) => None,
        })
        .collect();
    match mode {
        VarMode::Declared => {
            let missing = formula.declared_var_count() as usize - covered_vars.len();
            Ok(raw << missing)
        }
        VarMode::Strict => {
            let occurring = formula.occurring_vars();
            let extra = covered_vars.difference(&occurring).count();
            debug_assert!((&raw >> extra) << extra == raw);
            Ok(raw >> extra)
        }
    }
}
