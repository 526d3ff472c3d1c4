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

//! Scrambling a secret across the network and measuring how well it hides.
//!
//! The secret lives on node R, maximally entangled with an off-network
//! reference R′. An optional data center D purifies part of the rest of the
//! network. Neighbor unitaries drawn from a [`GateSource`] are compiled into
//! LOCC steps along a [`Schedule`]; afterwards any subset V_E of network
//! qubits can be compared with the maximally mixed state and with R′.

mod schedule;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use schedule::{build_schedule, check_schedule, schedule_reach, Schedule, SchedulePolicy};

use crate::dense::{self, haar_unitary, QubitId, QubitRole, DENSE_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::gate::{Gate, GateOp};
use crate::network::{NetworkGraph, NodeId};
use crate::protocol::{EngineKind, NeighborOp, ProtocolRun, QuantumState};
use crate::rng::{streams, RngStream, StreamFactory};
use crate::stabilizer::{bind, random_two_qubit_clifford};
use crate::trace::EventId;

/// Where neighbor unitaries come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSource {
    Haar,
    /// Random two-qubit Cliffords on random wire pairs.
    Clifford,
    /// Clifford, plus one T on a random wire after each unitary until `t`
    /// T gates have been placed.
    TDoped {
        t: usize,
    },
    /// No-op unitaries (still compiled and paid for).
    Identity,
}

impl GateSource {
    pub fn is_clifford(self) -> bool {
        matches!(self, GateSource::Clifford | GateSource::Identity)
    }
}

/// How V_E sizes are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    Qubit,
    Node,
}

/// Extra qubits a compiled neighbor unitary holds at its peak.
const SCRATCH_PEAK: usize = 2;

#[derive(Debug, Clone)]
pub struct ScramblingScenario {
    net: Arc<NetworkGraph>,
    r: NodeId,
    d_size: usize,
    d_targets: Vec<(NodeId, usize)>,
    gate_source: GateSource,
    schedule: Schedule,
    seed: u64,
    engine: EngineKind,
}

impl ScramblingScenario {
    /// Scenario without a data center. The schedule is drawn from the
    /// schedule stream of `seed`.
    pub fn new(
        net: Arc<NetworkGraph>,
        r: NodeId,
        rounds: usize,
        gate_source: GateSource,
        policy: SchedulePolicy,
        seed: u64,
    ) -> Result<Self> {
        if net.node(r).is_none() {
            return Err(Error::BadIndex(r.0));
        }
        if net.qubit_budget(r) == 0 {
            return Err(Error::BadParams(format!("secret node {r} holds no qubits")));
        }
        let mut rng = StreamFactory::new(seed).stream(streams::SCHEDULE);
        let schedule = build_schedule(&net, rounds, policy, &mut rng)?;
        let mut s = Self {
            net,
            r,
            d_size: 0,
            d_targets: Vec::new(),
            gate_source,
            schedule,
            seed,
            engine: EngineKind::Dense,
        };
        s.engine = s.auto_engine()?;
        Ok(s)
    }

    /// Add a data center of `size` qubits, each maximally entangled with one
    /// V_A wire. Without `targets` the first `size` V_A wires are used.
    pub fn with_data_center(
        mut self,
        size: usize,
        targets: Option<Vec<(NodeId, usize)>>,
    ) -> Result<Self> {
        let v_a: Vec<(NodeId, usize)> = self
            .net
            .node_ids()
            .filter(|&n| n != self.r)
            .flat_map(|n| (0..self.net.qubit_budget(n)).map(move |k| (n, k)))
            .collect();
        let targets = match targets {
            Some(t) => t,
            None => v_a.iter().copied().take(size).collect(),
        };
        if targets.len() != size {
            return Err(Error::BadParams(format!(
                "data center of {size} qubits needs {size} distinct V_A targets, have {}",
                targets.len()
            )));
        }
        let distinct: BTreeSet<_> = targets.iter().collect();
        if distinct.len() != targets.len() || targets.iter().any(|t| !v_a.contains(t)) {
            return Err(Error::BadParams(
                "data-center targets must be distinct V_A wires".into(),
            ));
        }
        self.d_size = size;
        self.d_targets = targets;
        self.engine = self.auto_engine()?;
        Ok(self)
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::BadParams(
                "a schedule needs at least one round".into(),
            ));
        }
        check_schedule(&self.net, &schedule)?;
        self.schedule = schedule;
        Ok(self)
    }

    pub fn with_engine(mut self, engine: EngineKind) -> Result<Self> {
        self.check_engine(engine)?;
        self.engine = engine;
        Ok(self)
    }

    fn check_engine(&self, engine: EngineKind) -> Result<()> {
        match engine {
            EngineKind::Dense if self.total_qubits() + SCRATCH_PEAK > DENSE_QUBIT_CAP => Err(
                Error::TooLarge(self.total_qubits() + SCRATCH_PEAK, DENSE_QUBIT_CAP),
            ),
            EngineKind::Stabilizer if !self.gate_source.is_clifford() => Err(Error::NonClifford),
            _ => Ok(()),
        }
    }

    fn auto_engine(&self) -> Result<EngineKind> {
        if self.check_engine(EngineKind::Dense).is_ok() {
            Ok(EngineKind::Dense)
        } else {
            self.check_engine(EngineKind::Stabilizer)?;
            Ok(EngineKind::Stabilizer)
        }
    }

    pub fn network(&self) -> &Arc<NetworkGraph> {
        &self.net
    }

    pub fn r(&self) -> NodeId {
        self.r
    }

    pub fn r_size(&self) -> usize {
        self.net.qubit_budget(self.r)
    }

    pub fn d_size(&self) -> usize {
        self.d_size
    }

    pub fn d_targets(&self) -> &[(NodeId, usize)] {
        &self.d_targets
    }

    /// |V| in qubits.
    pub fn v_size(&self) -> usize {
        self.net.size()
    }

    /// |V| + |R′| + |D|.
    pub fn total_qubits(&self) -> usize {
        self.v_size() + self.r_size() + self.d_size
    }

    pub fn gate_source(&self) -> GateSource {
        self.gate_source
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn rounds(&self) -> usize {
        self.schedule.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn engine(&self) -> EngineKind {
        self.engine
    }

    /// Off-network node id holding R′.
    pub fn reference_node(&self) -> NodeId {
        NodeId(self.net.node_count())
    }

    /// Off-network node id holding D.
    pub fn data_center_node(&self) -> NodeId {
        NodeId(self.net.node_count() + 1)
    }
}

/// Reach of the future light cone of R's first event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeCoverage {
    pub first_r_event: Option<EventId>,
    pub reached: BTreeSet<NodeId>,
    pub covers_all: bool,
    /// Whether the union of scheduled edges connects R to every node.
    pub schedule_connected: bool,
}

/// A finished scrambling run.
#[derive(Debug, Clone)]
pub struct ScramblingRun {
    pub run: ProtocolRun,
    pub r_prime: Vec<QubitId>,
    pub d: Vec<QubitId>,
    pub t_used: usize,
    pub coverage: ConeCoverage,
    pub warnings: Vec<String>,
}

impl ScramblingRun {
    pub fn state(&self) -> &QuantumState {
        self.run.state()
    }

    /// Positions of every network wire, by (node, slot).
    pub fn v_positions(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for n in self.run.network().node_ids() {
            out.extend(self.run.register().positions(&self.run.wires(n))?);
        }
        Ok(out)
    }

    pub fn node_positions(&self, nodes: &[NodeId]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &n in nodes {
            out.extend(self.run.register().positions(&self.run.wires(n))?);
        }
        Ok(out)
    }

    pub fn r_prime_positions(&self) -> Result<Vec<usize>> {
        self.run.register().positions(&self.r_prime)
    }

    pub fn d_positions(&self) -> Result<Vec<usize>> {
        self.run.register().positions(&self.d)
    }
}

fn draw_op(
    source: GateSource,
    k: usize,
    rng: &mut RngStream,
    t_left: &mut usize,
) -> Result<NeighborOp> {
    let clifford = |rng: &mut RngStream| -> Vec<GateOp> {
        if k == 1 {
            return random_two_qubit_clifford(rng)
                .into_iter()
                .filter(|op| op.qubits == [0])
                .collect();
        }
        let mut ops = Vec::new();
        for _ in 0..k {
            let pair = sample(rng, k, 2);
            ops.extend(bind(
                &random_two_qubit_clifford(rng),
                pair.index(0),
                pair.index(1),
            ));
        }
        ops
    };
    Ok(match source {
        GateSource::Identity => NeighborOp::Gates(Vec::new()),
        GateSource::Haar => NeighborOp::Unitary(haar_unitary(k, rng)?),
        GateSource::Clifford => NeighborOp::Gates(clifford(rng)),
        GateSource::TDoped { .. } => {
            let mut ops = clifford(rng);
            if *t_left > 0 {
                ops.push(GateOp::new(Gate::T, &[rng.random_range(0..k)]));
                *t_left -= 1;
            }
            NeighborOp::Gates(ops)
        }
    })
}

/// Offset of the gate-draw stream from the run stream, so both engines see
/// the same circuit whatever their measurements consume.
const GATE_STREAM_OFFSET: u64 = 1 << 40;

/// Prepare R′R and D, then compile every scheduled neighbor unitary.
/// Protocol randomness draws from `rng`, gates from a sibling stream.
pub fn run_scrambling(scenario: &ScramblingScenario, rng: RngStream) -> Result<ScramblingRun> {
    let net = Arc::clone(&scenario.net);
    let mut gate_rng = rng.clone();
    gate_rng.set_stream(rng.get_stream().wrapping_add(GATE_STREAM_OFFSET));
    let mut run = ProtocolRun::new(Arc::clone(&net), scenario.engine, rng)?;

    let r_prime = run.add_system(
        scenario.reference_node(),
        QubitRole::Reference,
        scenario.r_size(),
    )?;
    for (i, &q) in r_prime.iter().enumerate() {
        let a = run.pos(q)?;
        let b = run.wire(scenario.r, i)?;
        run.state_mut().apply_gate(Gate::H, &[a])?;
        run.state_mut().apply_gate(Gate::Cnot, &[a, b])?;
    }
    let d = run.add_system(
        scenario.data_center_node(),
        QubitRole::DataCenter,
        scenario.d_size,
    )?;
    for (&q, &(node, local)) in d.iter().zip(&scenario.d_targets) {
        let a = run.pos(q)?;
        let b = run.wire(node, local)?;
        run.state_mut().apply_gate(Gate::H, &[a])?;
        run.state_mut().apply_gate(Gate::Cnot, &[a, b])?;
    }
    run.resync_detector();

    let mut t_left = match scenario.gate_source {
        GateSource::TDoped { t } => t,
        _ => 0,
    };
    let t_budget = t_left;
    for round in &scenario.schedule {
        for &(a, b) in round {
            let k = net.qubit_budget(a) + net.qubit_budget(b);
            if k == 0 {
                continue;
            }
            let op = draw_op(scenario.gate_source, k, &mut gate_rng, &mut t_left)?;
            run.compile_neighbor_unitary(&op, a, b)?;
        }
    }

    let mut warnings = Vec::new();
    let reach = schedule_reach(&net, &scenario.schedule, scenario.r);
    let schedule_connected = reach.len() == net.node_count();
    if !schedule_connected {
        let missing: Vec<String> = net
            .node_ids()
            .filter(|n| !reach.contains(n))
            .map(|n| net.label(n))
            .collect();
        warnings.push(format!(
            "ScheduleDisconnected: no scheduled path from R to {}",
            missing.join(", ")
        ));
    }
    let first_r_event = run.trace().lane(scenario.r).first().copied();
    let reached = match first_r_event {
        Some(e) => run.trace().cone_nodes(e)?,
        None => BTreeSet::from([scenario.r]),
    };
    let covers_all = reached.len() == net.node_count();
    if schedule_connected && !covers_all {
        warnings.push("future cone of R misses nodes that act before R does".into());
    }
    Ok(ScramblingRun {
        run,
        r_prime,
        d,
        t_used: t_budget - t_left,
        coverage: ConeCoverage {
            first_r_event,
            reached,
            covers_all,
            schedule_connected,
        },
        warnings,
    })
}

/// √((d_E² − 1)/(d_E·d_B + 1)) with d = 2ⁿ.
pub fn decoupling_bound(n_e: usize, n_b: usize) -> f64 {
    if n_e == 0 {
        return 0.0;
    }
    if n_e < 500 && n_b < 500 {
        let de = (n_e as f64).exp2();
        let db = (n_b as f64).exp2();
        ((de * de - 1.0) / (de * db + 1.0)).sqrt()
    } else {
        ((n_e as f64 - n_b as f64) / 2.0).exp2()
    }
}

/// ‖ρ_E − I/d_E‖₁ of a pure global state.
pub fn decoupling_deviation(state: &QuantumState, e: &[usize]) -> Result<f64> {
    match state {
        QuantumState::Dense(s) => dense::deviation_from_mixed(s, e),
        QuantumState::Stabilizer(t) => t.deviation_from_mixed(e),
    }
}

/// I(A:B) in bits.
pub fn mutual_information(state: &QuantumState, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    match state {
        QuantumState::Dense(s) => dense::mutual_information(s, a, b),
        QuantumState::Stabilizer(t) => Ok(t.mutual_information_stab(a, b)? as f64),
    }
}

/// |2|R| − I(R′:rest) − I(R′:D)|.
pub fn conservation_check(
    state: &QuantumState,
    r_prime: &[usize],
    d: &[usize],
    rest: &[usize],
) -> Result<f64> {
    let total = 2.0 * r_prime.len() as f64;
    let to_rest = mutual_information(state, r_prime, rest)?;
    let to_d = mutual_information(state, r_prime, d)?;
    Ok((total - to_rest - to_d).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingRow {
    /// Requested |V_E| in qubits or nodes.
    pub size: usize,
    /// Mean |V_E| and |V_B| in qubits.
    pub n_e: f64,
    pub n_b: f64,
    pub trials: usize,
    pub mean_deviation: f64,
    /// Standard error; undefined for fewer than two trials.
    pub stderr_deviation: Option<f64>,
    /// Mean of the per-trial bound.
    pub bound: f64,
    pub mean_mi: f64,
    pub stderr_mi: Option<f64>,
}

impl DecouplingRow {
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.mean_deviation <= self.bound + sigmas * self.stderr_deviation.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingReport {
    pub granularity: Granularity,
    pub trials: usize,
    pub rows: Vec<DecouplingRow>,
    pub max_conservation_residual: f64,
    pub mean_conservation_residual: f64,
    /// Fraction of trials whose future cone of R covered every node.
    pub cone_coverage: f64,
    pub warnings: Vec<String>,
}

impl DecouplingReport {
    pub fn row(&self, size: usize) -> Option<&DecouplingRow> {
        self.rows.iter().find(|r| r.size == size)
    }

    /// Mean I(R′:V_E) never drops by more than `sigmas` combined standard
    /// errors from one size to the next.
    pub fn monotone(&self, sigmas: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let se = |r: &DecouplingRow| r.stderr_mi.unwrap_or(0.0).powi(2);
            let slack = sigmas * (se(&w[0]) + se(&w[1])).sqrt();
            w[1].mean_mi + slack >= w[0].mean_mi
        })
    }
}

fn mean_stderr(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, None);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

struct Sample {
    n_e: usize,
    n_b: usize,
    deviation: f64,
    mi: f64,
}

struct TrialRecord {
    samples: Vec<Sample>,
    residual: f64,
    covered: bool,
    warnings: Vec<String>,
}

fn one_trial(
    scenario: &ScramblingScenario,
    k: u64,
    sizes: &[usize],
    granularity: Granularity,
) -> Result<TrialRecord> {
    let factory = StreamFactory::new(scenario.seed);
    let mut sr = run_scrambling(scenario, factory.trial(k))?;
    let v = sr.v_positions()?;
    let rp = sr.r_prime_positions()?;
    let d = sr.d_positions()?;
    let residual = conservation_check(sr.state(), &rp, &d, &v)?;
    let nodes: Vec<NodeId> = scenario.net.node_ids().collect();
    let mut samples = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let e: Vec<usize> = match granularity {
            Granularity::Qubit => {
                let idx = sample(sr.run.rng(), v.len(), size);
                idx.iter().map(|i| v[i]).collect()
            }
            Granularity::Node => {
                let idx = sample(sr.run.rng(), nodes.len(), size);
                let pick: Vec<NodeId> = idx.iter().map(|i| nodes[i]).collect();
                sr.node_positions(&pick)?
            }
        };
        let mut e = e;
        e.sort_unstable();
        samples.push(Sample {
            n_e: e.len(),
            n_b: v.len() - e.len(),
            deviation: decoupling_deviation(sr.state(), &e)?,
            mi: mutual_information(sr.state(), &rp, &e)?,
        });
    }
    Ok(TrialRecord {
        samples,
        residual,
        covered: sr.coverage.covers_all,
        warnings: std::mem::take(&mut sr.warnings),
    })
}

/// For each size in `sizes` (all of `1..=|V|` when `None`), the trial mean
/// of the V_E deviation and of I(R′:V_E). V_E is resampled every trial;
/// trials run in parallel and are merged in trial order.
pub fn threshold_sweep(
    scenario: &ScramblingScenario,
    trials: usize,
    sizes: Option<&[usize]>,
    granularity: Granularity,
) -> Result<DecouplingReport> {
    if trials == 0 {
        return Err(Error::BadParams("at least one trial is required".into()));
    }
    let limit = match granularity {
        Granularity::Qubit => scenario.v_size(),
        Granularity::Node => scenario.net.node_count(),
    };
    let sizes: Vec<usize> = match sizes {
        Some(s) => s.to_vec(),
        None => (1..=limit).collect(),
    };
    if let Some(&bad) = sizes.iter().find(|&&s| s > limit) {
        return Err(Error::BadParams(format!("|V_E| = {bad} exceeds {limit}")));
    }
    let records: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|k| one_trial(scenario, k, &sizes, granularity))
        .collect::<Result<_>>()?;

    let rows = sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let col: Vec<&Sample> = records.iter().map(|r| &r.samples[i]).collect();
            let devs: Vec<f64> = col.iter().map(|s| s.deviation).collect();
            let mis: Vec<f64> = col.iter().map(|s| s.mi).collect();
            let bounds: Vec<f64> = col.iter().map(|s| decoupling_bound(s.n_e, s.n_b)).collect();
            let (mean_deviation, stderr_deviation) = mean_stderr(&devs);
            let (mean_mi, stderr_mi) = mean_stderr(&mis);
            let n = col.len() as f64;
            DecouplingRow {
                size,
                n_e: col.iter().map(|s| s.n_e as f64).sum::<f64>() / n,
                n_b: col.iter().map(|s| s.n_b as f64).sum::<f64>() / n,
                trials,
                mean_deviation,
                stderr_deviation,
                bound: bounds.iter().sum::<f64>() / n,
                mean_mi,
                stderr_mi,
            }
        })
        .collect();

    let residuals: Vec<f64> = records.iter().map(|r| r.residual).collect();
    let mut warnings: Vec<String> = Vec::new();
    for w in records.iter().flat_map(|r| &r.warnings) {
        if !warnings.contains(w) {
            warnings.push(w.clone());
        }
    }
    Ok(DecouplingReport {
        granularity,
        trials,
        rows,
        max_conservation_residual: residuals.iter().copied().fold(0.0, f64::max),
        mean_conservation_residual: residuals.iter().sum::<f64>() / trials as f64,
        cone_coverage: records.iter().filter(|r| r.covered).count() as f64 / trials as f64,
        warnings,
    })
}

/// One row of [`threshold_sweep`] for a single qubit count.
pub fn sample_decoupling(
    scenario: &ScramblingScenario,
    n_e: usize,
    trials: usize,
) -> Result<DecouplingRow> {
    let report = threshold_sweep(scenario, trials, Some(&[n_e]), Granularity::Qubit)?;
    Ok(report.rows.into_iter().next().expect("one row per size"))
}

/// Complexity class of learning a circuit with `t` T gates on `n` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryCost {
    pub n: usize,
    pub t: usize,
    pub class: String,
}

impl fmt::Display for QueryCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}, t={})", self.class, self.n, self.t)
    }
}

pub fn query_cost_estimate(n: usize, t: usize) -> QueryCost {
    let class = if t == 0 {
        format!("poly({n})")
    } else {
        format!("poly({n})·exp({t})")
    };
    QueryCost { n, t, class }
}

#[cfg(test)]
mod tests;
