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

use crate::network::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the simulator can report.
///
/// Variants are grouped by the subsystem that raises them. The CLI and the
/// C bindings map these onto stable exit/status codes via [`Error::class`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // network
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("edge ({0}, {1}) references a node that does not exist")]
    DanglingEdge(usize, usize),
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) is listed more than once")]
    DuplicateEdge(usize, usize),
    #[error("node {0} has an invalid qubit budget or capacity: {1}")]
    BadNode(usize, String),
    #[error("node {node} appears in blocks `{first}` and `{second}`")]
    OverlappingBlocks {
        node: NodeId,
        first: String,
        second: String,
    },
    #[error("node {0} is in scope but not covered by any block")]
    UncoveredNode(NodeId),
    #[error("partition has no blocks")]
    EmptyPartition,
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("bad parameters: {0}")]
    BadParams(String),

    // dense engine
    #[error("amplitudes are not normalized (norm² = {0})")]
    BadAmplitudes(f64),
    #[error("qubit {0} is not in |0⟩")]
    QubitNotFresh(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subset of {0} qubits exceeds the density-matrix cap of {1}")]
    SubsetTooLarge(usize, usize),
    #[error("reduced states live on different qubit subsets")]
    SubsetMismatch,
    #[error("qubit subsets overlap")]
    OverlappingSubsets,
    #[error("{0} qubits exceed the dense cap of {1}")]
    TooLarge(usize, usize),
    #[error("cut must be a proper, nonempty subset of the register")]
    BadCut,
    #[error("qubit index {0} out of range")]
    BadIndex(usize),
    #[error("operation is not Clifford and cannot run on the stabilizer engine")]
    NonClifford,

    // causal trace
    #[error("cause {0} does not exist in the trace")]
    UnknownCause(usize),
    #[error("event {0} does not exist in the trace")]
    UnknownEvent(usize),
    #[error("trace contains a cycle")]
    CycleDetected,
    #[error("trace failed validation: {0}")]
    InvalidTrace(String),

    // ledger
    #[error("insufficient balance of {species}: have {have}, need {need}")]
    InsufficientBalance {
        species: String,
        have: u64,
        need: u64,
    },

    // protocols
    #[error("nodes {0} and {1} share no entanglement")]
    NoSharedEntanglement(NodeId, NodeId),
    #[error("node {0} has no free qubit")]
    NoFreeQubit(NodeId),
    #[error("missing Bell pair between {0} and {1}")]
    MissingPair(NodeId, NodeId),
    #[error("no GHZ state shared among {0}, {1}, {2}")]
    MissingGhz(NodeId, NodeId, NodeId),
    #[error("nodes {0} and {1} are not neighbors")]
    NotNeighbors(NodeId, NodeId),
    #[error("node {node} capacity {capacity} cannot host {needed} qubits")]
    CapacityExceeded {
        node: NodeId,
        capacity: usize,
        needed: usize,
    },
    #[error("illegal channel use: {0}")]
    IllegalChannelUse(String),
    #[error("node {0} is type I and cannot run a non-stabilizer operation")]
    OpClassViolation(NodeId),
    #[error("node {0} holds no qubit at slot {1}")]
    NoSuchQubit(NodeId, usize),

    // scenario / cli
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes used for exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Semantic,
    Engine,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } => ErrorClass::Parse,
            Error::Semantic(_) => ErrorClass::Semantic,
            Error::Io(_) => ErrorClass::Io,
            Error::EmptyNetwork
            | Error::DanglingEdge(..)
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::BadNode(..)
            | Error::OverlappingBlocks { .. }
            | Error::UncoveredNode(_)
            | Error::EmptyPartition
            | Error::BadParams(_) => ErrorClass::Semantic,
            _ => ErrorClass::Engine,
        }
    }
}

/// Read a whole file; the error names the path.
pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
