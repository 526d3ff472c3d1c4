// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Network graph, node budgets, partitions and topology metrics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// Computational class of a node's local operations: type I nodes run
/// stabilizer operations only, type II nodes are universal.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub enum OpClass {
    #[serde(rename = "type_i")]
    TypeI,
    #[default]
    #[serde(rename = "type_ii")]
    TypeII,
}

/// EPR supply on every edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endowment {
    Finite(u64),
    Infinite,
}

impl Serialize for Endowment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Endowment::Finite(n) => s.serialize_u64(*n),
            Endowment::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Endowment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(Endowment::Finite(n)),
            Raw::Word(w) if w == "infinite" => Ok(Endowment::Infinite),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "endowment must be \"infinite\" or an integer, got \"{w}\""
            ))),
        }
    }
}

/// A node as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: usize,
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_class: Option<OpClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl NodeSpec {
    pub fn new(id: usize, qubits: usize) -> Self {
        Self {
            id,
            qubits,
            capacity: None,
            op_class: None,
            name: None,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = Some(capacity);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_op_class(mut self, class: OpClass) -> Self {
        self.op_class = Some(class);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub qubit_budget: usize,
    pub capacity: usize,
    pub op_class: OpClass,
    pub name: Option<String>,
}

/// Immutable network graph. Edges are undirected and stored as `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    edges: BTreeSet<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
    endowment: Endowment,
}

fn normalize(a: usize, b: usize) -> (NodeId, NodeId) {
    if a < b {
        (NodeId(a), NodeId(b))
    } else {
        (NodeId(b), NodeId(a))
    }
}

/// Validate node specs and edges and build the graph.
///
/// Capacities default to `qubits + max(neighbor qubits)`, the minimum a node
/// needs to host a neighbor's qubits during LOCC compilation. An explicit
/// capacity only has to be at least the node's own budget here; the stricter
/// rule is reported by [`NetworkGraph::capacity_rule_violations`].
pub fn build_network(
    specs: &[NodeSpec],
    edges: &[(usize, usize)],
    endowment: Endowment,
) -> Result<NetworkGraph> {
    if specs.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let mut sorted: Vec<&NodeSpec> = specs.iter().collect();
    sorted.sort_by_key(|s| s.id);
    for (i, s) in sorted.iter().enumerate() {
        if s.id != i {
            return Err(Error::BadNode(
                s.id,
                format!("node ids must be dense 0..{}", specs.len()),
            ));
        }
        if s.qubits == 0 {
            return Err(Error::BadNode(
                s.id,
                "qubit budget must be at least 1".into(),
            ));
        }
    }
    let n = sorted.len();
    let mut edge_set = BTreeSet::new();
    for &(a, b) in edges {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        if a >= n || b >= n {
            return Err(Error::DanglingEdge(a, b));
        }
        if !edge_set.insert(normalize(a, b)) {
            return Err(Error::DuplicateEdge(a, b));
        }
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &edge_set {
        adjacency[a.0].push(b);
        adjacency[b.0].push(a);
    }
    for adj in &mut adjacency {
        adj.sort();
    }
    let mut nodes = Vec::with_capacity(n);
    for s in sorted {
        let neighbor_max = adjacency[s.id]
            .iter()
            .map(|m| specs.iter().find(|t| t.id == m.0).map_or(0, |t| t.qubits))
            .max()
            .unwrap_or(0);
        let capacity = s.capacity.unwrap_or(s.qubits + neighbor_max);
        if capacity < s.qubits {
            return Err(Error::BadNode(
                s.id,
                format!("capacity {capacity} is below the qubit budget {}", s.qubits),
            ));
        }
        nodes.push(Node {
            id: NodeId(s.id),
            qubit_budget: s.qubits,
            capacity,
            op_class: s.op_class.unwrap_or_default(),
            name: s.name.clone(),
        });
    }
    Ok(NetworkGraph {
        nodes,
        edges: edge_set,
        adjacency,
        endowment,
    })
}

impl NetworkGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.edges
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id.0]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.contains(&normalize(a.0, b.0))
    }

    pub fn endowment(&self) -> Endowment {
        self.endowment
    }

    pub fn qubit_budget(&self, id: NodeId) -> usize {
        self.nodes[id.0].qubit_budget
    }

    pub fn capacity(&self, id: NodeId) -> usize {
        self.nodes[id.0].capacity
    }

    /// Total protocol qubits |V| = Σ|Pᵢ|.
    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| n.qubit_budget).sum()
    }

    /// log₂ of the network dimension; the dimension itself is never formed.
    pub fn dimension_bits(&self) -> usize {
        self.size()
    }

    /// Display label: explicit name if given, else `P{i}`.
    pub fn label(&self, id: NodeId) -> String {
        self.node(id)
            .and_then(|n| n.name.clone())
            .unwrap_or_else(|| id.to_string())
    }

    /// Nodes whose capacity is below `|Pᵢ| + max(neighbor |Pⱼ|)`.
    pub fn capacity_rule_violations(&self) -> Vec<(NodeId, usize, usize)> {
        self.nodes
            .iter()
            .filter_map(|n| {
                let need = n.qubit_budget
                    + self.adjacency[n.id.0]
                        .iter()
                        .map(|m| self.nodes[m.0].qubit_budget)
                        .max()
                        .unwrap_or(0);
                (n.capacity < need).then_some((n.id, n.capacity, need))
            })
            .collect()
    }

    fn bfs(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[src.0] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.0].unwrap();
            for &v in &self.adjacency[u.0] {
                if dist[v.0].is_none() {
                    dist[v.0] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop distances from `src`; `None` for unreachable nodes.
    pub fn distances_from(&self, src: NodeId) -> Vec<Option<usize>> {
        self.bfs(src)
    }

    pub fn is_connected(&self) -> bool {
        self.bfs(NodeId(0)).iter().all(Option::is_some)
    }

    /// Largest shortest-path hop count over node pairs. Also the lower bound
    /// on scrambling rounds (a broadcast cannot finish faster).
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for n in &self.nodes {
            for d in self.bfs(n.id) {
                best = best.max(d.ok_or(Error::DisconnectedGraph)?);
            }
        }
        Ok(best)
    }

    /// Node specs that rebuild this graph (capacities made explicit).
    pub fn to_specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| NodeSpec {
                id: n.id.0,
                qubits: n.qubit_budget,
                capacity: Some(n.capacity),
                op_class: Some(n.op_class),
                name: n.name.clone(),
            })
            .collect()
    }
}

/// Free function form of [`NetworkGraph::diameter`].
pub fn diameter(net: &NetworkGraph) -> Result<usize> {
    net.diameter()
}

/// Named, pairwise-disjoint node blocks covering a declared scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: BTreeMap<String, BTreeSet<NodeId>>,
    sizes: BTreeMap<String, usize>,
    scope: BTreeSet<NodeId>,
}

impl Partition {
    pub fn blocks(&self) -> &BTreeMap<String, BTreeSet<NodeId>> {
        &self.blocks
    }

    pub fn block(&self, label: &str) -> Option<&BTreeSet<NodeId>> {
        self.blocks.get(label)
    }

    /// |Vᵢ| = Σ_{P ∈ Vᵢ} |P| in qubits.
    pub fn block_size(&self, label: &str) -> Option<usize> {
        self.sizes.get(label).copied()
    }

    pub fn scope(&self) -> &BTreeSet<NodeId> {
        &self.scope
    }
}

/// Split `scope` (all nodes when `None`) into the labelled blocks.
pub fn make_partition(
    net: &NetworkGraph,
    assignment: &BTreeMap<String, BTreeSet<NodeId>>,
    scope: Option<&BTreeSet<NodeId>>,
) -> Result<Partition> {
    if assignment.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let scope: BTreeSet<NodeId> = match scope {
        Some(s) => s.clone(),
        None => net.node_ids().collect(),
    };
    let mut owner: BTreeMap<NodeId, &str> = BTreeMap::new();
    for (label, nodes) in assignment {
        for &n in nodes {
            if net.node(n).is_none() || !scope.contains(&n) {
                return Err(Error::BadParams(format!(
                    "block `{label}` contains {n}, which is outside the partition scope"
                )));
            }
            if let Some(first) = owner.insert(n, label) {
                return Err(Error::OverlappingBlocks {
                    node: n,
                    first: first.to_string(),
                    second: label.clone(),
                });
            }
        }
    }
    if let Some(&missing) = scope.iter().find(|n| !owner.contains_key(n)) {
        return Err(Error::UncoveredNode(missing));
    }
    let sizes = assignment
        .iter()
        .map(|(l, ns)| (l.clone(), ns.iter().map(|&n| net.qubit_budget(n)).sum()))
        .collect();
    Ok(Partition {
        blocks: assignment.clone(),
        sizes,
        scope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Path { n: usize },
    Ring { n: usize },
    Grid { rows: usize, cols: usize },
    Star { n: usize },
    Complete { n: usize },
    RandomRegular { n: usize, degree: usize, seed: u64 },
}

/// Generate a standard topology with `qubits` per node and infinite
/// endowment. `RandomRegular` is deterministic in its seed.
pub fn generate_topology(kind: Topology, qubits: usize) -> Result<NetworkGraph> {
    let bad = |m: &str| Err(Error::BadParams(m.to_string()));
    let edges: Vec<(usize, usize)> = match kind {
        Topology::Path { n } => {
            if n == 0 {
                return bad("path needs at least one node");
            }
            (1..n).map(|i| (i - 1, i)).collect()
        }
        Topology::Ring { n } => {
            if n < 3 {
                return bad("ring needs at least 3 nodes");
            }
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        }
        Topology::Grid { rows, cols } => {
            if rows == 0 || cols == 0 {
                return bad("grid dimensions must be positive");
            }
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if c + 1 < cols {
                        e.push((i, i + 1));
                    }
                    if r + 1 < rows {
                        e.push((i, i + cols));
                    }
                }
            }
            e
        }
        Topology::Star { n } => {
            if n < 2 {
                return bad("star needs a center and at least one leaf");
            }
            (1..n).map(|i| (0, i)).collect()
        }
        Topology::Complete { n } => {
            if n == 0 {
                return bad("complete graph needs at least one node");
            }
            (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect()
        }
        Topology::RandomRegular { n, degree, seed } => random_regular_edges(n, degree, seed)?,
    };
    let n = match kind {
        Topology::Path { n }
        | Topology::Ring { n }
        | Topology::Star { n }
        | Topology::Complete { n }
        | Topology::RandomRegular { n, .. } => n,
        Topology::Grid { rows, cols } => rows * cols,
    };
    if qubits == 0 {
        return bad("nodes need at least one qubit");
    }
    let specs: Vec<NodeSpec> = (0..n).map(|i| NodeSpec::new(i, qubits)).collect();
    build_network(&specs, &edges, Endowment::Infinite)
}

/// Configuration-model sampling with rejection of loops and multi-edges.
fn random_regular_edges(n: usize, degree: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if degree == 0 || degree >= n || (n * degree) % 2 == 1 {
        return Err(Error::BadParams(format!(
            "no simple {degree}-regular graph on {n} nodes"
        )));
    }
    let mut rng = seeded(seed);
    'attempt: for _ in 0..10_000 {
        let mut stubs: Vec<usize> = (0..n)
            .flat_map(|i| std::iter::repeat_n(i, degree))
            .collect();
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue 'attempt;
            }
        }
        return Ok(seen.into_iter().collect());
    }
    Err(Error::BadParams(
        "random regular sampling did not converge".into(),
    ))
}
