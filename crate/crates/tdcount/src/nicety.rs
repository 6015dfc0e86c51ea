//! Transformation of an arbitrary tree-decomposition into a rooted nice
//! decomposition where every node is a leaf, a join with equal child bags, or
//! an introduce/forget step changing the bag by one vertex.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{validate, Bag, DecomposeError, TreeDecomposition};
use crate::formula::Var;
use crate::incidence::{IncidenceGraph, IncidenceVertex};

/// What a node of a nice decomposition does to its bag.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeKind {
    Leaf,
    Join,
    IntroduceVar(Var),
    IntroduceClause(usize),
    ForgetVar(Var),
    ForgetClause(usize),
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeKind::Leaf => write!(f, "leaf"),
            NodeKind::Join => write!(f, "join"),
            NodeKind::IntroduceVar(x) => write!(f, "introduce {x}"),
            NodeKind::IntroduceClause(c) => write!(f, "introduce C{}", c + 1),
            NodeKind::ForgetVar(x) => write!(f, "forget {x}"),
            NodeKind::ForgetClause(c) => write!(f, "forget C{}", c + 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NiceNode {
    pub bag: Bag,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

/// A rooted binary tree-decomposition in nice form. The root bag is always
/// empty, so the final count sits in a single table cell.
#[derive(Clone, Debug)]
pub struct NiceDecomposition {
    nodes: Vec<NiceNode>,
    root: usize,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum NicetyError {
    #[error("input decomposition is invalid: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Structure(#[from] DecomposeError),
    #[error("node {node}: bag relation to children matches no nice node kind")]
    Unclassifiable { node: usize },
}

impl NiceDecomposition {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &NiceNode {
        &self.nodes[id]
    }

    pub fn bag(&self, id: usize) -> &Bag {
        &self.nodes[id].bag
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        self.nodes[id].kind
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].children
    }

    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// All vertices appearing in some bag.
    pub fn vertices(&self) -> BTreeSet<IncidenceVertex> {
        self.nodes
            .iter()
            .flat_map(|n| n.bag.iter().copied())
            .collect()
    }

    /// Node ids in evaluation order: children before parents, left to right.
    pub fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            order.push(node);
            stack.extend(self.nodes[node].children.iter().copied());
        }
        // reversed preorder with children pushed left-to-right gives a
        // postorder that visits left subtrees first
        order.reverse();
        order
    }

    /// Determines a node's kind from its child count and bag deltas alone.
    /// Errors when the structure matches no kind, which signals a broken
    /// transform rather than bad user input.
    pub fn classify(&self, id: usize) -> Result<NodeKind, NicetyError> {
        let node = &self.nodes[id];
        match node.children.as_slice() {
            [] => Ok(NodeKind::Leaf),
            [a, b] => {
                let (left, right) = (&self.nodes[*a].bag, &self.nodes[*b].bag);
                if left == &node.bag && right == &node.bag {
                    Ok(NodeKind::Join)
                } else {
                    Err(NicetyError::Unclassifiable { node: id })
                }
            }
            [child] => {
                let child_bag = &self.nodes[*child].bag;
                let added: Vec<_> = node.bag.difference(child_bag).copied().collect();
                let removed: Vec<_> = child_bag.difference(&node.bag).copied().collect();
                match (added.as_slice(), removed.as_slice()) {
                    ([v], []) => Ok(match v {
                        IncidenceVertex::Var(x) => NodeKind::IntroduceVar(*x),
                        IncidenceVertex::Clause(c) => NodeKind::IntroduceClause(*c),
                    }),
                    ([], [v]) => Ok(match v {
                        IncidenceVertex::Var(x) => NodeKind::ForgetVar(*x),
                        IncidenceVertex::Clause(c) => NodeKind::ForgetClause(*c),
                    }),
                    _ => Err(NicetyError::Unclassifiable { node: id }),
                }
            }
            _ => Err(NicetyError::Unclassifiable { node: id }),
        }
    }

    /// Re-checks every structural invariant: at most two children, stored
    /// kinds match [`classify`], the root bag is empty, and the underlying
    /// (tree, bags) pair still passes the decomposition validator.
    pub fn check_invariants(&self, graph: &IncidenceGraph) -> Result<(), NicetyError> {
        for id in 0..self.nodes.len() {
            let kind = self.classify(id)?;
            if kind != self.nodes[id].kind {
                return Err(NicetyError::Unclassifiable { node: id });
            }
        }
        if !self.bag(self.root).is_empty() {
            return Err(NicetyError::InvalidInput("root bag not empty".into()));
        }
        let td = self.to_tree_decomposition();
        let report = validate(graph, &td)?;
        if !report.is_valid() {
            return Err(NicetyError::InvalidInput(format!("{report:?}")));
        }
        Ok(())
    }

    /// The underlying undirected decomposition, for validation and export.
    pub fn to_tree_decomposition(&self) -> TreeDecomposition {
        let mut td = TreeDecomposition::new();
        for node in &self.nodes {
            td.add_node(node.bag.clone());
        }
        for (id, node) in self.nodes.iter().enumerate() {
            for &child in &node.children {
                td.add_edge(id, child);
            }
        }
        td
    }

    /// Debug dump (node id, kind, bag, children) as JSON.
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct NodeDump<'a> {
            id: usize,
            kind: String,
            bag: Vec<String>,
            children: &'a [usize],
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            root: usize,
            nodes: Vec<NodeDump<'a>>,
        }
        let dump = Dump {
            root: self.root,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeDump {
                    id,
                    kind: n.kind.to_string(),
                    bag: n.bag.iter().map(|v| v.to_string()).collect(),
                    children: &n.children,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("dump serialization cannot fail")
    }
}

/// Builder that grows the node vector while the transform walks the input
/// tree.
struct NiceBuilder {
    nodes: Vec<NiceNode>,
}

impl NiceBuilder {
    fn push(&mut self, bag: Bag, kind: NodeKind, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode {
            bag,
            kind,
            children,
        });
        self.nodes.len() - 1
    }

    /// A leaf with empty bag followed by one introduce per vertex of `bag`.
    fn leaf_chain(&mut self, bag: &Bag) -> usize {
        let mut top = self.push(Bag::new(), NodeKind::Leaf, Vec::new());
        let mut current = Bag::new();
        for &v in bag {
            current.insert(v);
            top = self.push(current.clone(), introduce_kind(v), vec![top]);
        }
        top
    }

    /// Extends the chain on top of `top` (whose bag is `from`) until its bag
    /// equals `to`: forgets first, then introduces. Equal bags add nothing,
    /// which is what merges adjacent duplicate bags.
    fn morph(&mut self, mut top: usize, from: &Bag, to: &Bag) -> usize {
        let mut current = from.clone();
        for v in from.difference(to).copied().collect::<Vec<_>>() {
            current.remove(&v);
            top = self.push(current.clone(), forget_kind(v), vec![top]);
        }
        for v in to.difference(from).copied().collect::<Vec<_>>() {
            current.insert(v);
            top = self.push(current.clone(), introduce_kind(v), vec![top]);
        }
        top
    }
}

fn introduce_kind(v: IncidenceVertex) -> NodeKind {
    match v {
        IncidenceVertex::Var(x) => NodeKind::IntroduceVar(x),
        IncidenceVertex::Clause(c) => NodeKind::IntroduceClause(c),
    }
}

fn forget_kind(v: IncidenceVertex) -> NodeKind {
    match v {
        IncidenceVertex::Var(x) => NodeKind::ForgetVar(x),
        IncidenceVertex::Clause(c) => NodeKind::ForgetClause(c),
    }
}

/// Turns a valid tree-decomposition into a nice one rooted at an empty bag.
///
/// The input is validated first. The tree is rooted at node 0; each input
/// leaf becomes a leaf-plus-introduce chain, each tree edge a forget/introduce
/// chain, and nodes with several children are binarized into a left-to-right
/// chain of join nodes. Every vertex is forgotten exactly once on the way to
/// the root, and the width never exceeds the input width.
pub fn make_nice(
    td: &TreeDecomposition,
    graph: &IncidenceGraph,
) -> Result<NiceDecomposition, NicetyError> {
    let report = validate(graph, td)?;
    if !report.is_valid() {
        return Err(NicetyError::InvalidInput(format!("{report:?}")));
    }

    // Root the input tree at node 0 and order children deterministically.
    let adj = td.adjacency();
    let root = 0;
    let mut parent = vec![usize::MAX; td.node_count()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); td.node_count()];
    let mut dfs_order = Vec::with_capacity(td.node_count());
    let mut stack = vec![root];
    let mut seen = vec![false; td.node_count()];
    seen[root] = true;
    while let Some(node) = stack.pop() {
        dfs_order.push(node);
        let mut kids: Vec<usize> = adj[node].iter().copied().filter(|&n| !seen[n]).collect();
        kids.sort_unstable();
        for &kid in &kids {
            seen[kid] = true;
            parent[kid] = node;
            stack.push(kid);
        }
        children[node] = kids;
    }

    let mut builder = NiceBuilder { nodes: Vec::new() };
    // Bottom-up over the reversed DFS order; each input node resolves to the
    // id of a nice node carrying exactly its bag.
    let mut resolved: Vec<Option<usize>> = vec![None; td.node_count()];
    for &node in dfs_order.iter().rev() {
        let bag = td.bag(node);
        let top = if children[node].is_empty() {
            builder.leaf_chain(bag)
        } else {
            let mut acc: Option<usize> = None;
            for &child in &children[node] {
                let child_top = resolved[child].expect("children resolved first");
                let morphed = builder.morph(child_top, td.bag(child), bag);
                acc = Some(match acc {
                    None => morphed,
                    Some(left) => builder.push(bag.clone(), NodeKind::Join, vec![left, morphed]),
                });
            }
            acc.expect("at least one child")
        };
        resolved[node] = Some(top);
    }

    // Forget everything still in the original root's bag so the final root
    // bag is empty.
    let top = resolved[root].expect("root resolved");
    let nice_root = builder.morph(top, td.bag(root), &Bag::new());

    Ok(NiceDecomposition {
        nodes: builder.nodes,
        root: nice_root,
    })
}
