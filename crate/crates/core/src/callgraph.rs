//! The four call-graph variants used for impact prediction.
//!
//! * `S` lifts every method to the topmost declaration of its signature, so
//!   overriding methods have no node of their own.
//! * `B` has one node per declared method and a call edge per statically
//!   resolved call site.
//! * `H` adds an override edge from each overridden or implemented
//!   declaration to its overrider.
//! * `F` adds field nodes: a reader points at the field, the field points at
//!   each writer, so reverse traversal from a writer reaches the readers.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{CheckedProgram, FieldRef, MethodRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GraphVariant {
    S,
    B,
    H,
    F,
}

impl GraphVariant {
    pub const ALL: [GraphVariant; 4] = [
        GraphVariant::S,
        GraphVariant::B,
        GraphVariant::H,
        GraphVariant::F,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphVariant::S => "S",
            GraphVariant::B => "B",
            GraphVariant::H => "H",
            GraphVariant::F => "F",
        }
    }
}

impl fmt::Display for GraphVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Ok(GraphVariant::S),
            "B" => Ok(GraphVariant::B),
            "H" => Ok(GraphVariant::H),
            "F" => Ok(GraphVariant::F),
            _ => Err(Error::Format(format!(
                "unknown graph variant `{s}` (expected s, b, h or f)"
            ))),
        }
    }
}

/// Orientation of field edges in variant F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldOrientation {
    /// reader -> field, field -> writer
    #[default]
    Formal,
    /// writer -> field, field -> reader
    Figure,
}

impl FromStr for FieldOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formal" => Ok(FieldOrientation::Formal),
            "figure" => Ok(FieldOrientation::Figure),
            _ => Err(Error::Format(format!("unknown field orientation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphNode {
    Method(MethodRef),
    Field(FieldRef),
}

impl fmt::Display for GraphNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphNode::Method(m) => m.fmt(f),
            GraphNode::Field(x) => x.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Call,
    Override,
    FieldRead,
    FieldWrite,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Call => "call",
            EdgeKind::Override => "override",
            EdgeKind::FieldRead => "field_read",
            EdgeKind::FieldWrite => "field_write",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge<'g> {
    pub from: &'g GraphNode,
    pub to: &'g GraphNode,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct CallGraph {
    variant: GraphVariant,
    nodes: Vec<GraphNode>,
    index: HashMap<GraphNode, usize>,
    /// Sorted, deduplicated (from, to, kind) triples.
    edges: Vec<(usize, usize, EdgeKind)>,
    preds: Vec<Vec<usize>>,
    degree: Vec<u32>,
    tests: BTreeSet<MethodRef>,
    declared: BTreeSet<MethodRef>,
}

impl PartialEq for CallGraph {
    fn eq(&self, other: &Self) -> bool {
        self.variant == other.variant && self.nodes == other.nodes && self.edges == other.edges
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub field_orientation: FieldOrientation,
}

struct Builder {
    nodes: BTreeSet<GraphNode>,
    edges: BTreeSet<(GraphNode, GraphNode, EdgeKind)>,
}

impl Builder {
    fn edge(&mut self, from: GraphNode, to: GraphNode, kind: EdgeKind) {
        debug_assert!(self.nodes.contains(&from) && self.nodes.contains(&to));
        self.edges.insert((from, to, kind));
    }
}

pub fn build(checked: &CheckedProgram, variant: GraphVariant) -> CallGraph {
    build_with(checked, variant, BuildOptions::default())
}

pub fn build_with(
    checked: &CheckedProgram,
    variant: GraphVariant,
    options: BuildOptions,
) -> CallGraph {
    let mut b = Builder {
        nodes: BTreeSet::new(),
        edges: BTreeSet::new(),
    };
    let method = |m: &MethodRef| GraphNode::Method(m.clone());

    if variant == GraphVariant::S {
        let lift = |m: &MethodRef| GraphNode::Method(checked.topmost_declaration(m).clone());
        for m in checked.methods.keys() {
            if checked.overridden(m).is_none() {
                b.nodes.insert(method(m));
            }
        }
        for (m, uses) in &checked.uses {
            for callee in &uses.calls {
                b.edge(lift(m), lift(callee), EdgeKind::Call);
            }
        }
    } else {
        for m in checked.methods.keys() {
            b.nodes.insert(method(m));
        }
        for (m, uses) in &checked.uses {
            for callee in &uses.calls {
                b.edge(method(m), method(callee), EdgeKind::Call);
            }
        }
        if matches!(variant, GraphVariant::H | GraphVariant::F) {
            for (child, parents) in &checked.overrides {
                for p in parents {
                    b.edge(method(p), method(child), EdgeKind::Override);
                }
            }
        }
        if variant == GraphVariant::F {
            for f in checked.fields.keys() {
                b.nodes.insert(GraphNode::Field(f.clone()));
            }
            for (m, uses) in &checked.uses {
                for f in &uses.reads {
                    let (m, f) = (method(m), GraphNode::Field(f.clone()));
                    match options.field_orientation {
                        FieldOrientation::Formal => b.edge(m, f, EdgeKind::FieldRead),
                        FieldOrientation::Figure => b.edge(f, m, EdgeKind::FieldRead),
                    }
                }
                for f in &uses.writes {
                    let (m, f) = (method(m), GraphNode::Field(f.clone()));
                    match options.field_orientation {
                        FieldOrientation::Formal => b.edge(f, m, EdgeKind::FieldWrite),
                        FieldOrientation::Figure => b.edge(m, f, EdgeKind::FieldWrite),
                    }
                }
            }
        }
    }

    let tests = checked.tests.iter().cloned().collect();
    let declared = checked.methods.keys().cloned().collect();
    CallGraph::assemble(variant, b.nodes, b.edges, tests, declared)
}

impl CallGraph {
    fn assemble(
        variant: GraphVariant,
        nodes: BTreeSet<GraphNode>,
        edges: BTreeSet<(GraphNode, GraphNode, EdgeKind)>,
        tests: BTreeSet<MethodRef>,
        declared: BTreeSet<MethodRef>,
    ) -> CallGraph {
        let nodes: Vec<GraphNode> = nodes.into_iter().collect();
        let index: HashMap<GraphNode, usize> = nodes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let mut idx_edges: Vec<(usize, usize, EdgeKind)> = edges
            .iter()
            .map(|(f, t, k)| (index[f], index[t], *k))
            .collect();
        idx_edges.sort();
        idx_edges.dedup();
        let mut preds = vec![Vec::new(); nodes.len()];
        let mut degree = vec![0u32; nodes.len()];
        for &(f, t, _) in &idx_edges {
            preds[t].push(f);
            degree[f] += 1;
            degree[t] += 1;
        }
        for p in &mut preds {
            p.sort_unstable();
            p.dedup();
        }
        CallGraph {
            variant,
            nodes,
            index,
            edges: idx_edges,
            preds,
            degree,
            tests,
            declared,
        }
    }

    pub fn variant(&self) -> GraphVariant {
        self.variant
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge<'_>> + '_ {
        self.edges.iter().map(|&(f, t, kind)| Edge {
            from: &self.nodes[f],
            to: &self.nodes[t],
            kind,
        })
    }

    pub fn contains(&self, node: &GraphNode) -> bool {
        self.index.contains_key(node)
    }

    pub fn index_of(&self, node: &GraphNode) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn node(&self, idx: usize) -> &GraphNode {
        &self.nodes[idx]
    }

    /// Direct predecessors (sources of incoming edges) of node `idx`.
    pub fn predecessors(&self, idx: usize) -> &[usize] {
        &self.preds[idx]
    }

    pub fn has_edge(&self, from: &GraphNode, to: &GraphNode, kind: EdgeKind) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(f), Some(t)) => self.edges.binary_search(&(f, t, kind)).is_ok(),
            _ => false,
        }
    }

    pub fn tests(&self) -> &BTreeSet<MethodRef> {
        &self.tests
    }

    pub fn is_declared(&self, method: &MethodRef) -> bool {
        self.declared.contains(method)
    }

    /// The node representing `method`, or `None` when the variant gives it
    /// no node of its own (an overriding method in variant S).
    pub fn node_for(&self, method: &MethodRef) -> Option<&GraphNode> {
        let key = GraphNode::Method(method.clone());
        self.index.get(&key).map(|&i| &self.nodes[i])
    }

    /// True when `node` has no incident edge of any kind. Nodes outside the
    /// graph are reported isolated.
    pub fn is_isolated(&self, node: &GraphNode) -> bool {
        self.index_of(node).is_none_or(|i| self.degree[i] == 0)
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            variant: self.variant,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    id: n.to_string(),
                    kind: match n {
                        GraphNode::Method(_) => NodeKindJson::Method,
                        GraphNode::Field(_) => NodeKindJson::Field,
                    },
                })
                .collect(),
            edges: self
                .edges()
                .map(|e| EdgeJson {
                    from: e.from.to_string(),
                    to: e.to.to_string(),
                    kind: e.kind,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("graph serializes")
    }

    /// Assembles a graph from explicit parts. Every edge endpoint must be
    /// listed among `nodes`.
    pub fn from_parts(
        variant: GraphVariant,
        nodes: impl IntoIterator<Item = GraphNode>,
        edges: impl IntoIterator<Item = (GraphNode, GraphNode, EdgeKind)>,
        tests: impl IntoIterator<Item = MethodRef>,
    ) -> Result<CallGraph> {
        let nodes: BTreeSet<GraphNode> = nodes.into_iter().collect();
        let edges: BTreeSet<_> = edges.into_iter().collect();
        for (f, t, _) in &edges {
            for end in [f, t] {
                if !nodes.contains(end) {
                    return Err(Error::Format(format!(
                        "edge endpoint `{end}` is not a node"
                    )));
                }
            }
        }
        let declared = nodes
            .iter()
            .filter_map(|n| match n {
                GraphNode::Method(m) => Some(m.clone()),
                GraphNode::Field(_) => None,
            })
            .collect();
        Ok(CallGraph::assemble(
            variant,
            nodes,
            edges,
            tests.into_iter().collect(),
            declared,
        ))
    }

    /// Reads a graph written by [`CallGraph::to_json`]. Test membership is
    /// not part of the format, so the imported graph has no test nodes marked.
    pub fn from_json(text: &str) -> Result<CallGraph> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let mut nodes = Vec::new();
        let mut by_id = HashMap::new();
        for n in doc.nodes {
            let node = match n.kind {
                NodeKindJson::Method => {
                    GraphNode::Method(n.id.parse().map_err(|e| Error::Format(format!("{e}")))?)
                }
                NodeKindJson::Field => {
                    GraphNode::Field(n.id.parse().map_err(|e| Error::Format(format!("{e}")))?)
                }
            };
            if by_id.insert(n.id.clone(), node.clone()).is_some() {
                return Err(Error::Format(format!("duplicate node `{}`", n.id)));
            }
            nodes.push(node);
        }
        let mut edges = Vec::new();
        for e in doc.edges {
            let lookup = |id: &str| {
                by_id
                    .get(id)
                    .cloned()
                    .ok_or_else(|| Error::Format(format!("edge endpoint `{id}` is not a node")))
            };
            edges.push((lookup(&e.from)?, lookup(&e.to)?, e.kind));
        }
        CallGraph::from_parts(doc.variant, nodes, edges, [])
    }

    /// Marks `tests` as test methods (used after importing from JSON).
    pub fn with_tests(mut self, tests: impl IntoIterator<Item = MethodRef>) -> CallGraph {
        self.tests = tests.into_iter().collect();
        self
    }

    /// Graphviz rendering: methods as ellipses, tests as double ellipses,
    /// fields as boxes, edge kinds as labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph \"CG_{}\" {{", self.variant).unwrap();
        out.push_str("    node [fontname=\"Helvetica\"];\n");
        for n in &self.nodes {
            let attrs = match n {
                GraphNode::Method(m) if self.tests.contains(m) => "shape=ellipse, peripheries=2",
                GraphNode::Method(_) => "shape=ellipse",
                GraphNode::Field(_) => "shape=box",
            };
            writeln!(out, "    {} [{attrs}];", dot_id(&n.to_string())).unwrap();
        }
        for e in self.edges() {
            writeln!(
                out,
                "    {} -> {} [label=\"{}\"];",
                dot_id(&e.from.to_string()),
                dot_id(&e.to.to_string()),
                e.kind.as_str()
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    variant: GraphVariant,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: String,
    kind: NodeKindJson,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum NodeKindJson {
    Method,
    Field,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    kind: EdgeKind,
}
