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

//! Scenario files: parsing, defaults and semantic checks.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dense::DENSE_QUBIT_CAP;
use crate::emit::RenderMode;
use crate::error::{Error, Result};
use crate::gate::GateOp;
use crate::network::{
    build_network, generate_topology, Endowment, NetworkGraph, NodeId, NodeSpec, Topology,
};
use crate::protocol::{EngineKind, GhzMode, SwapSchedule};
use crate::scrambling::{
    check_schedule, GateSource, Granularity, SchedulePolicy, ScramblingScenario,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    #[default]
    Auto,
    Dense,
    Stabilizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub network: NetworkSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scrambling: Option<ScramblingSection>,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> usize {
    1
}

fn default_epsilon() -> f64 {
    crate::trace::DEFAULT_EPSILON
}

fn infinite() -> Endowment {
    Endowment::Infinite
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(usize, usize)>,
    /// Generated topology, used instead of `nodes`/`edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    /// Qubits per node for a generated topology.
    #[serde(default = "one")]
    pub qubits_per_node: usize,
    #[serde(default = "infinite")]
    pub endowment: Endowment,
}

/// Input qubit for a protocol trial.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    /// Haar-random, redrawn every trial.
    #[default]
    Random,
    Zero,
    One,
    Plus,
    Minus,
    /// (re, im) of the |0⟩ and |1⟩ amplitudes.
    Amplitudes([[f64; 2]; 2]),
}

impl InputState {
    pub fn is_stabilizer(self) -> bool {
        !matches!(self, InputState::Random | InputState::Amplitudes(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpSpec {
    /// A Haar-random unitary on every wire of both nodes, redrawn per trial.
    Haar,
    /// Gates on the joint wire list `[wires of a…, wires of b…]`.
    Gates(Vec<GateOp>),
}

fn all_messages() -> Vec<u8> {
    vec![0, 1, 2, 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolSection {
    Teleport {
        src: usize,
        #[serde(default)]
        qubit: usize,
        dst: usize,
        #[serde(default)]
        state: InputState,
    },
    Superdense {
        src: usize,
        dst: usize,
        #[serde(default = "all_messages")]
        messages: Vec<u8>,
        #[serde(default)]
        noise: f64,
    },
    EntanglementSwap {
        chain: Vec<usize>,
        #[serde(default)]
        schedule: SwapSchedule,
    },
    DistributedCnot {
        control: usize,
        #[serde(default)]
        control_qubit: usize,
        target: usize,
        #[serde(default)]
        target_qubit: usize,
        #[serde(default)]
        control_state: InputState,
        #[serde(default)]
        target_state: InputState,
    },
    ControlledTeleport {
        src: usize,
        #[serde(default)]
        qubit: usize,
        controller: usize,
        dst: usize,
        #[serde(default = "cooperate")]
        mode: GhzMode,
        #[serde(default)]
        state: InputState,
    },
    SharedCoin {
        a: usize,
        b: usize,
        flips: u64,
    },
    Compile {
        a: usize,
        b: usize,
        op: OpSpec,
    },
}

fn cooperate() -> GhzMode {
    GhzMode::Cooperate
}

impl ProtocolSection {
    pub fn kind(&self) -> &'static str {
        match self {
            ProtocolSection::Teleport { .. } => "teleport",
            ProtocolSection::Superdense { .. } => "superdense",
            ProtocolSection::EntanglementSwap { .. } => "entanglement_swap",
            ProtocolSection::DistributedCnot { .. } => "distributed_cnot",
            ProtocolSection::ControlledTeleport { .. } => "controlled_teleport",
            ProtocolSection::SharedCoin { .. } => "shared_coin",
            ProtocolSection::Compile { .. } => "compile",
        }
    }

    /// Whether every state and gate involved is a stabilizer operation.
    pub fn is_clifford(&self) -> bool {
        match self {
            ProtocolSection::Teleport { state, .. }
            | ProtocolSection::ControlledTeleport { state, .. } => state.is_stabilizer(),
            ProtocolSection::DistributedCnot {
                control_state,
                target_state,
                ..
            } => control_state.is_stabilizer() && target_state.is_stabilizer(),
            ProtocolSection::Compile { op, .. } => match op {
                OpSpec::Haar => false,
                OpSpec::Gates(g) => g.iter().all(|op| op.gate.is_clifford()),
            },
            ProtocolSection::Superdense { noise, .. } => *noise == 0.0,
            ProtocolSection::EntanglementSwap { .. } | ProtocolSection::SharedCoin { .. } => true,
        }
    }

    fn nodes(&self) -> Vec<usize> {
        match self {
            ProtocolSection::Teleport { src, dst, .. } => vec![*src, *dst],
            ProtocolSection::Superdense { src, dst, .. } => vec![*src, *dst],
            ProtocolSection::EntanglementSwap { chain, .. } => chain.clone(),
            ProtocolSection::DistributedCnot {
                control, target, ..
            } => vec![*control, *target],
            ProtocolSection::ControlledTeleport {
                src,
                controller,
                dst,
                ..
            } => vec![*src, *controller, *dst],
            ProtocolSection::SharedCoin { a, b, .. } => vec![*a, *b],
            ProtocolSection::Compile { a, b, .. } => vec![*a, *b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataCenterSection {
    pub size: usize,
    /// (node, wire) pairs in V_A; the first `size` V_A wires when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<(usize, usize)>>,
}

fn default_sigmas() -> f64 {
    3.0
}

fn haar() -> GateSource {
    GateSource::Haar
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScramblingSection {
    /// Node R holding the secret.
    pub secret_node: usize,
    pub rounds: usize,
    #[serde(default = "haar")]
    pub gate_source: GateSource,
    #[serde(default)]
    pub schedule: SchedulePolicy,
    /// Explicit rounds of edges; replaces the generated schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_schedule: Option<Vec<Vec<(usize, usize)>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_center: Option<DataCenterSection>,
    /// |V_E| values to sweep; every size when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub granularity: Granularity,
    /// Standard errors of slack allowed by the decoupling-bound check.
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Output directory, relative to the working directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub report: String,
    pub trace: String,
    pub dot: String,
    pub svg: String,
    pub sweep: String,
    pub csv: String,
    pub render: RenderMode,
    /// Diagram style overrides, relative to the scenario file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<PathBuf>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            dir: None,
            report: "report.json".into(),
            trace: "trace.jsonl".into(),
            dot: "trace.dot".into(),
            svg: "trace.svg".into(),
            sweep: "sweep.json".into(),
            csv: "sweep.csv".into(),
            render: RenderMode::Full,
            style: None,
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&crate::error::read_text(path)?)
    }

    pub fn build_network(&self) -> Result<NetworkGraph> {
        let n = &self.network;
        match n.topology {
            Some(kind) => {
                if !n.nodes.is_empty() || !n.edges.is_empty() {
                    return Err(Error::Semantic(
                        "give either `topology` or `nodes`/`edges`, not both".into(),
                    ));
                }
                let g = generate_topology(kind, n.qubits_per_node)?;
                let edges: Vec<(usize, usize)> =
                    g.edges().iter().map(|&(a, b)| (a.0, b.0)).collect();
                build_network(&g.to_specs(), &edges, n.endowment)
            }
            None => build_network(&n.nodes, &n.edges, n.endowment),
        }
    }
}

/// A scenario that passed every semantic check, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub net: Arc<NetworkGraph>,
    pub engine: EngineKind,
    pub body: Body,
}

#[derive(Debug, Clone)]
pub enum Body {
    Protocol(ProtocolSection),
    Scrambling(Box<ScramblingScenario>),
}

fn semantic(e: Error) -> Error {
    match e {
        Error::Semantic(_) | Error::Parse { .. } | Error::Io(_) => e,
        other => Error::Semantic(other.to_string()),
    }
}

/// Every semantic check: section exclusivity, network shape, the capacity
/// rule, node references, schedule edges and engine caps.
pub fn prepare(scenario: &Scenario) -> Result<Prepared> {
    match (&scenario.protocol, &scenario.scrambling) {
        (Some(_), Some(_)) => {
            return Err(Error::Semantic(
                "a scenario has either `protocol` or `scrambling`, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Semantic(
                "a scenario needs a `protocol` or a `scrambling` section".into(),
            ))
        }
        _ => {}
    }
    if scenario.trials == 0 {
        return Err(Error::Semantic("`trials` must be at least 1".into()));
    }
    if scenario.epsilon.is_nan() || scenario.epsilon <= 0.0 {
        return Err(Error::Semantic("`epsilon` must be positive".into()));
    }
    let net = scenario.build_network().map_err(semantic)?;
    if let Some(&(node, capacity, need)) = net.capacity_rule_violations().first() {
        return Err(Error::Semantic(format!(
            "capacity rule violated at {}: capacity {capacity} < |P_i| + max neighbor |P_j| = {need}",
            net.label(node)
        )));
    }
    let net = Arc::new(net);
    let exists = |i: usize| -> Result<NodeId> {
        net.node(NodeId(i))
            .map(|n| n.id)
            .ok_or_else(|| Error::Semantic(format!("node {i} is not in the network")))
    };

    if let Some(p) = &scenario.protocol {
        for i in p.nodes() {
            exists(i)?;
        }
        check_protocol(p, &net)?;
        let n = net.size();
        let engine = match scenario.engine {
            EngineChoice::Dense => EngineKind::Dense,
            EngineChoice::Stabilizer => EngineKind::Stabilizer,
            EngineChoice::Auto if p.is_clifford() && n + PROTOCOL_SCRATCH > DENSE_QUBIT_CAP => {
                EngineKind::Stabilizer
            }
            EngineChoice::Auto => EngineKind::Dense,
        };
        match engine {
            EngineKind::Dense if n + PROTOCOL_SCRATCH > DENSE_QUBIT_CAP => {
                return Err(Error::Semantic(format!(
                    "{} qubits (including {PROTOCOL_SCRATCH} scratch) exceed the dense cap of {DENSE_QUBIT_CAP}",
                    n + PROTOCOL_SCRATCH
                )))
            }
            EngineKind::Stabilizer if !p.is_clifford() => {
                return Err(Error::Semantic(format!(
                    "protocol `{}` uses non-stabilizer states or gates and cannot run on the stabilizer engine",
                    p.kind()
                )))
            }
            _ => {}
        }
        return Ok(Prepared {
            scenario: scenario.clone(),
            net,
            engine,
            body: Body::Protocol(p.clone()),
        });
    }

    let s = scenario.scrambling.as_ref().expect("checked above");
    let r = exists(s.secret_node)?;
    if s.sigmas < 0.0 {
        return Err(Error::Semantic("`sigmas` must be non-negative".into()));
    }
    let rounds = match &s.explicit_schedule {
        Some(rounds) => rounds.len().max(1),
        None => s.rounds,
    };
    let mut sc = ScramblingScenario::new(
        Arc::clone(&net),
        r,
        rounds,
        s.gate_source,
        s.schedule,
        scenario.seed,
    )
    .map_err(semantic)?;
    if let Some(rounds) = &s.explicit_schedule {
        let schedule: Vec<Vec<(NodeId, NodeId)>> = rounds
            .iter()
            .map(|round| round.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect())
            .collect();
        check_schedule(&net, &schedule).map_err(semantic)?;
        sc = sc.with_schedule(schedule).map_err(semantic)?;
    }
    if let Some(dc) = &s.data_center {
        let targets = dc
            .targets
            .as_ref()
            .map(|t| t.iter().map(|&(n, k)| (NodeId(n), k)).collect());
        sc = sc.with_data_center(dc.size, targets).map_err(semantic)?;
    }
    sc = match scenario.engine {
        EngineChoice::Auto => sc,
        EngineChoice::Dense => sc.with_engine(EngineKind::Dense).map_err(semantic)?,
        EngineChoice::Stabilizer => sc.with_engine(EngineKind::Stabilizer).map_err(semantic)?,
    };
    let limit = match s.granularity {
        Granularity::Qubit => sc.v_size(),
        Granularity::Node => net.node_count(),
    };
    if let Some(bad) = s.sizes.iter().flatten().find(|&&k| k == 0 || k > limit) {
        return Err(Error::Semantic(format!(
            "sweep size {bad} is outside 1..={limit}"
        )));
    }
    Ok(Prepared {
        scenario: scenario.clone(),
        net,
        engine: sc.engine(),
        body: Body::Scrambling(Box::new(sc)),
    })
}

/// Scratch qubits a built-in protocol may hold on top of the wires.
pub const PROTOCOL_SCRATCH: usize = 3;

fn check_protocol(p: &ProtocolSection, net: &NetworkGraph) -> Result<()> {
    let wire = |node: usize, k: usize| -> Result<()> {
        if k < net.qubit_budget(NodeId(node)) {
            Ok(())
        } else {
            Err(Error::Semantic(format!("node {node} has no wire {k}")))
        }
    };
    let amps = |s: &InputState| -> Result<()> {
        if let InputState::Amplitudes([[a, b], [c, d]]) = s {
            let norm = a * a + b * b + c * c + d * d;
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Semantic(format!(
                    "input amplitudes have norm² {norm}, expected 1"
                )));
            }
        }
        Ok(())
    };
    match p {
        ProtocolSection::Teleport {
            src,
            qubit,
            dst,
            state,
        } => {
            wire(*src, *qubit)?;
            amps(state)?;
            if src == dst {
                return Err(Error::Semantic(
                    "teleport needs distinct src and dst".into(),
                ));
            }
        }
        ProtocolSection::Superdense {
            messages, noise, ..
        } => {
            if let Some(m) = messages.iter().find(|&&m| m > 3) {
                return Err(Error::Semantic(format!(
                    "superdense message {m} is not two bits"
                )));
            }
            if !(0.0..=1.0).contains(noise) {
                return Err(Error::Semantic(format!(
                    "noise {noise} is not a probability"
                )));
            }
        }
        ProtocolSection::EntanglementSwap { chain, .. } => {
            if chain.len() < 3 {
                return Err(Error::Semantic(
                    "a swap chain needs at least three nodes".into(),
                ));
            }
            for w in chain.windows(2) {
                if !net.has_edge(NodeId(w[0]), NodeId(w[1])) {
                    return Err(Error::Semantic(format!(
                        "chain hop ({}, {}) is not a network edge",
                        w[0], w[1]
                    )));
                }
            }
        }
        ProtocolSection::DistributedCnot {
            control,
            control_qubit,
            target,
            target_qubit,
            control_state,
            target_state,
        } => {
            wire(*control, *control_qubit)?;
            wire(*target, *target_qubit)?;
            amps(control_state)?;
            amps(target_state)?;
        }
        ProtocolSection::ControlledTeleport {
            src, qubit, state, ..
        } => {
            wire(*src, *qubit)?;
            amps(state)?;
        }
        ProtocolSection::SharedCoin { flips, .. } => {
            if *flips == 0 {
                return Err(Error::Semantic("`flips` must be at least 1".into()));
            }
        }
        ProtocolSection::Compile { a, b, op } => {
            if !net.has_edge(NodeId(*a), NodeId(*b)) {
                return Err(Error::Semantic(format!(
                    "nodes {a} and {b} are not neighbors"
                )));
            }
            let k = net.qubit_budget(NodeId(*a)) + net.qubit_budget(NodeId(*b));
            if let OpSpec::Gates(gates) = op {
                for g in gates {
                    if g.qubits.len() != g.gate.arity() || g.qubits.iter().any(|&q| q >= k) {
                        return Err(Error::Semantic(format!(
                            "gate {:?} on {:?} does not fit {k} wires",
                            g.gate, g.qubits
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}
