//! Tree-decompositions of the incidence graph: construction by elimination
//! heuristics, the three-condition validator, and PACE 2017 `.td` I/O.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::incidence::{IncidenceGraph, IncidenceVertex};

pub type Bag = BTreeSet<IncidenceVertex>;

/// An undirected tree of bags over incidence-graph vertices. Node ids are
/// dense indices; edges are stored normalized with the smaller id first.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TreeDecomposition {
    bags: Vec<Bag>,
    edges: BTreeSet<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new() -> TreeDecomposition {
        TreeDecomposition::default()
    }

    pub fn add_node(&mut self, bag: Bag) -> usize {
        self.bags.push(bag);
        self.bags.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a < self.bags.len() && b < self.bags.len() && a != b);
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    pub fn bag(&self, node: usize) -> &Bag {
        &self.bags[node]
    }

    pub fn bags(&self) -> &[Bag] {
        &self.bags
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbor lists indexed by node id.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(Bag::len).max().unwrap_or(0)
    }

    /// Maximum bag size minus one. A decomposition whose largest bag is empty
    /// reports 0, since -1 is meaningless to every consumer.
    pub fn width(&self) -> Result<usize, DecomposeError> {
        if self.bags.is_empty() {
            return Err(DecomposeError::EmptyDecomposition);
        }
        Ok(self.max_bag_size().saturating_sub(1))
    }

    /// All vertices appearing in some bag.
    pub fn vertices(&self) -> BTreeSet<IncidenceVertex> {
        self.bags.iter().flatten().copied().collect()
    }

    /// Checks that the node/edge structure is a tree: connected with exactly
    /// `node_count - 1` edges. The empty decomposition is not a tree.
    pub fn is_tree(&self) -> bool {
        if self.bags.is_empty() || self.edges.len() != self.bags.len() - 1 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.bags.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(node) = queue.pop_front() {
            for &next in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    reached += 1;
                    queue.push_back(next);
                }
            }
        }
        reached == self.bags.len()
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("decomposition has no nodes")]
    EmptyDecomposition,
    #[error(
        "decomposition structure is not a tree (must be connected with |edges| = |nodes| - 1)"
    )]
    NotATree,
}

/// Outcome of checking the three decomposition conditions. Each field is the
/// first witness of a violation, or `None` if the condition holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// A graph vertex contained in no bag.
    pub uncovered_vertex: Option<IncidenceVertex>,
    /// A graph edge whose endpoints share no bag.
    pub uncovered_edge: Option<(IncidenceVertex, IncidenceVertex)>,
    /// A vertex whose occurrence nodes do not induce a connected subtree.
    pub disconnected_vertex: Option<IncidenceVertex>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.uncovered_vertex.is_none()
            && self.uncovered_edge.is_none()
            && self.disconnected_vertex.is_none()
    }
}

/// Checks the three tree-decomposition conditions of `td` against `graph`:
/// every vertex covered, every edge covered, and connected occurrences per
/// vertex. Connectedness is checked for every vertex appearing in a bag, not
/// just graph vertices, since downstream table building depends on it.
pub fn validate(
    graph: &IncidenceGraph,
    td: &TreeDecomposition,
) -> Result<ValidationReport, DecomposeError> {
    if !td.is_tree() {
        return Err(DecomposeError::NotATree);
    }

    let mut occurrences: BTreeMap<IncidenceVertex, Vec<usize>> = BTreeMap::new();
    for (node, bag) in td.bags().iter().enumerate() {
        for &v in bag {
            occurrences.entry(v).or_default().push(node);
        }
    }

    let uncovered_vertex = graph.vertices().find(|v| !occurrences.contains_key(v));

    let uncovered_edge = graph.edges().find(|&(u, v)| {
        let (Some(us), Some(vs)) = (occurrences.get(&u), occurrences.get(&v)) else {
            return true;
        };
        // occurrence lists are sorted by construction
        !intersects(us, vs)
    });

    let adj = td.adjacency();
    let disconnected_vertex = occurrences
        .iter()
        .find(|(_, nodes)| !occurrence_connected(nodes, &adj))
        .map(|(&v, _)| v);

    Ok(ValidationReport {
        uncovered_vertex,
        uncovered_edge,
        disconnected_vertex,
    })
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn occurrence_connected(nodes: &[usize], adj: &[Vec<usize>]) -> bool {
    let members: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut seen = BTreeSet::from([nodes[0]]);
    let mut queue = VecDeque::from([nodes[0]]);
    while let Some(node) = queue.pop_front() {
        for &next in &adj[node] {
            if members.contains(&next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen.len() == members.len()
}

/// Elimination-ordering heuristic used by [`heuristic_decompose`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Strategy {
    /// Eliminate the vertex whose neighborhood needs the fewest fill edges.
    #[default]
    MinFill,
    /// Eliminate a vertex of minimum current degree.
    MinDegree,
}

/// Computes a tree-decomposition by vertex elimination: repeatedly pick a
/// vertex by the strategy's score (ties broken by smallest vertex, so output
/// is deterministic), record `{v} ∪ N(v)` as its bag, and turn `N(v)` into a
/// clique. Bags are wired to the bag of the earliest-eliminated remaining
/// neighbor; components are joined under a single root at the end. The
/// result always satisfies [`validate`]; its width is heuristic, not minimal.
pub fn heuristic_decompose(graph: &IncidenceGraph, strategy: Strategy) -> TreeDecomposition {
    let vertices: Vec<IncidenceVertex> = graph.vertices().collect();
    if vertices.is_empty() {
        let mut td = TreeDecomposition::new();
        td.add_node(Bag::new());
        return td;
    }
    let count = vertices.len();
    let index_of: BTreeMap<IncidenceVertex, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    for (u, v) in graph.edges() {
        let (ui, vi) = (index_of[&u], index_of[&v]);
        adj[ui].insert(vi);
        adj[vi].insert(ui);
    }

    let score = |adj: &[BTreeSet<usize>], strategy: Strategy, v: usize| -> usize {
        match strategy {
            Strategy::MinDegree => adj[v].len(),
            Strategy::MinFill => {
                let mut missing = 0;
                let neighbors: Vec<usize> = adj[v].iter().copied().collect();
                for (i, &a) in neighbors.iter().enumerate() {
                    for &b in &neighbors[i + 1..] {
                        if !adj[a].contains(&b) {
                            missing += 1;
                        }
                    }
                }
                missing
            }
        }
    };

    // ordered (score, vertex) queue: min score first, ties by smallest vertex
    let mut active = strategy;
    let mut scores: Vec<usize> = (0..count).map(|v| score(&adj, active, v)).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..count).map(|v| (scores[v], v)).collect();
    let mut eliminated = vec![false; count];
    let mut elimination_pos = vec![0usize; count];
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(count);
    let mut order: Vec<usize> = Vec::with_capacity(count);

    while let Some(&(s, v)) = queue.iter().next() {
        queue.remove(&(s, v));
        eliminated[v] = true;
        elimination_pos[v] = order.len();
        order.push(v);

        let neighborhood: Vec<usize> = adj[v].iter().copied().collect();
        let mut bag = neighborhood.clone();
        bag.push(v);
        let bag_size = bag.len();
        bags.push(bag);

        for &w in &neighborhood {
            adj[w].remove(&v);
        }
        for (i, &a) in neighborhood.iter().enumerate() {
            for &b in &neighborhood[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }

        // Once a bag is too wide to ever tabulate, decomposition quality is
        // moot; drop to degree scoring so dense instances fail fast instead
        // of burning minutes in fill counting.
        if active == Strategy::MinFill && bag_size > crate::counter::MAX_BAG_SIZE {
            active = Strategy::MinDegree;
            queue.clear();
            for w in 0..count {
                if !eliminated[w] {
                    scores[w] = score(&adj, active, w);
                    queue.insert((scores[w], w));
                }
            }
            continue;
        }

        // Rescore vertices whose neighborhoods the elimination touched:
        // neighbors always; for min-fill also their neighbors, since fill
        // counts look two steps out.
        let mut dirty: BTreeSet<usize> = neighborhood.iter().copied().collect();
        if active == Strategy::MinFill {
            for &w in &neighborhood {
                dirty.extend(adj[w].iter().copied());
            }
        }
        for w in dirty {
            if eliminated[w] {
                continue;
            }
            let new_score = score(&adj, active, w);
            if new_score != scores[w] {
                queue.remove(&(scores[w], w));
                scores[w] = new_score;
                queue.insert((new_score, w));
            }
        }
    }

    // Assemble the tree: the bag created for v hangs off the bag of its
    // earliest-eliminated neighbor. Neighborless bags are component roots.
    let mut td = TreeDecomposition::new();
    for bag in &bags {
        td.add_node(bag.iter().map(|&i| vertices[i]).collect());
    }
    let mut roots = Vec::new();
    for (pos, bag) in bags.iter().enumerate() {
        let parent = bag
            .iter()
            .filter(|&&w| w != order[pos])
            .map(|&w| elimination_pos[w])
            .min();
        match parent {
            Some(parent_pos) => td.add_edge(pos, parent_pos),
            None => roots.push(pos),
        }
    }
    // Multiple components: hook every extra root under the last one so the
    // structure is a single tree. The linked bags share no vertices, so the
    // three conditions are unaffected.
    if let Some((&main_root, rest)) = roots.split_last() {
        for &r in rest {
            td.add_edge(r, main_root);
        }
    }
    td
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum TdParseError {
    #[error("line {line}: malformed: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("no `s td` header found")]
    NoHeader,
    #[error("line {line}: duplicate `s td` header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: bag id {id} out of range 1..={max}")]
    BagIdOutOfRange { line: usize, id: usize, max: usize },
    #[error("line {line}: duplicate bag id {id}")]
    DuplicateBag { line: usize, id: usize },
    #[error("line {line}: vertex id {id} outside the universe 1..={max}")]
    UnknownVertex { line: usize, id: usize, max: usize },
    #[error("line {line}: bag of size {actual} exceeds declared maximum bag size {declared}")]
    BagTooLarge {
        line: usize,
        actual: usize,
        declared: usize,
    },
    #[error("header declares a universe of {declared} vertices, expected {expected}")]
    UniverseMismatch { declared: usize, expected: usize },
    #[error("edge set does not form a tree over the declared nodes")]
    NotATree,
}

/// Parses PACE 2017 `.td` text against a formula with `var_count` variables
/// and `clause_count` clauses. Vertex ids follow the documented numbering:
/// `1..=n` are variables, `n+1..=n+m` are clauses. Bag ids missing a `b` line
/// get an empty bag.
pub fn parse_td(
    text: &str,
    var_count: u32,
    clause_count: usize,
) -> Result<TreeDecomposition, TdParseError> {
    let universe = var_count as usize + clause_count;
    let mut header: Option<(usize, usize)> = None; // (node count, max bag size)
    let mut bags: Vec<Option<Bag>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let malformed = |msg: &str| TdParseError::Malformed {
            line,
            msg: msg.to_string(),
        };
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut tokens = trimmed.split_ascii_whitespace();
        match tokens.next() {
            Some("s") => {
                if header.is_some() {
                    return Err(TdParseError::DuplicateHeader { line });
                }
                if tokens.next() != Some("td") {
                    return Err(malformed("expected `s td`"));
                }
                let nodes: usize = tokens
                    .next()
                    .ok_or_else(|| malformed("missing node count"))?
                    .parse()
                    .map_err(|_| malformed("node count is not an integer"))?;
                let max_bag: usize = tokens
                    .next()
                    .ok_or_else(|| malformed("missing maximum bag size"))?
                    .parse()
                    .map_err(|_| malformed("maximum bag size is not an integer"))?;
                let declared_universe: usize = tokens
                    .next()
                    .ok_or_else(|| malformed("missing vertex count"))?
                    .parse()
                    .map_err(|_| malformed("vertex count is not an integer"))?;
                if tokens.next().is_some() {
                    return Err(malformed("trailing tokens in header"));
                }
                if declared_universe != universe {
                    return Err(TdParseError::UniverseMismatch {
                        declared: declared_universe,
                        expected: universe,
                    });
                }
                bags = vec![None; nodes];
                header = Some((nodes, max_bag));
            }
            Some("b") => {
                let Some((node_count, max_bag)) = header else {
                    return Err(malformed("bag line before the `s td` header"));
                };
                let id: usize = tokens
                    .next()
                    .ok_or_else(|| malformed("missing bag id"))?
                    .parse()
                    .map_err(|_| malformed("bag id is not an integer"))?;
                if id == 0 || id > node_count {
                    return Err(TdParseError::BagIdOutOfRange {
                        line,
                        id,
                        max: node_count,
                    });
                }
                let mut bag = Bag::new();
                for token in tokens {
                    let vid: usize = token
                        .parse()
                        .map_err(|_| malformed("bag vertex is not an integer"))?;
                    let vertex = IncidenceVertex::from_file_id(vid, var_count, clause_count)
                        .ok_or(TdParseError::UnknownVertex {
                            line,
                            id: vid,
                            max: universe,
                        })?;
                    bag.insert(vertex);
                }
                if bag.len() > max_bag {
                    return Err(TdParseError::BagTooLarge {
                        line,
                        actual: bag.len(),
                        declared: max_bag,
                    });
                }
                if bags[id - 1].replace(bag).is_some() {
                    return Err(TdParseError::DuplicateBag { line, id });
                }
            }
            Some(first) => {
                let Some((node_count, _)) = header else {
                    return Err(malformed("edge line before the `s td` header"));
                };
                let a: usize = first
                    .parse()
                    .map_err(|_| malformed("edge endpoint is not an integer"))?;
                let b: usize = tokens
                    .next()
                    .ok_or_else(|| malformed("edge needs two endpoints"))?
                    .parse()
                    .map_err(|_| malformed("edge endpoint is not an integer"))?;
                if tokens.next().is_some() {
                    return Err(malformed("trailing tokens after edge"));
                }
                for id in [a, b] {
                    if id == 0 || id > node_count {
                        return Err(TdParseError::BagIdOutOfRange {
                            line,
                            id,
                            max: node_count,
                        });
                    }
                }
                if a == b {
                    return Err(TdParseError::NotATree);
                }
                edges.push((a - 1, b - 1));
            }
            None => unreachable!("blank lines are skipped"),
        }
    }

    if header.is_none() {
        return Err(TdParseError::NoHeader);
    }
    let mut td = TreeDecomposition::new();
    for bag in bags {
        td.add_node(bag.unwrap_or_default());
    }
    for (a, b) in edges {
        td.add_edge(a, b);
    }
    if !td.is_tree() {
        return Err(TdParseError::NotATree);
    }
    Ok(td)
}

/// Serializes a decomposition in PACE 2017 `.td` format under the documented
/// numbering. `parse_td` of the output reproduces the decomposition exactly.
pub fn write_td(td: &TreeDecomposition, var_count: u32, clause_count: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "s td {} {} {}\n",
        td.node_count(),
        td.max_bag_size(),
        var_count as usize + clause_count
    ));
    for (node, bag) in td.bags().iter().enumerate() {
        out.push_str(&format!("b {}", node + 1));
        for &v in bag {
            out.push_str(&format!(" {}", v.file_id(var_count)));
        }
        out.push('\n');
    }
    for (a, b) in td.edges() {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    out
}
