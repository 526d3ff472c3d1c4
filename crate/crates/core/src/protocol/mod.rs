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

//! LOCC protocol execution over a network, with causal events and resource
//! accounting for every step.

mod builtin;
mod compile;
mod locc;
mod state;

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

pub use builtin::{
    coin_inequality, controlled_teleport_inequality, distributed_cnot_inequality,
    superdense_inequality, swap_inequality, teleport_inequality, GhzMode, SwapSchedule, GHZ,
    NONLOCAL_CNOT,
};
pub use compile::{compile_inequality, CompileReport, NeighborOp};
pub use locc::{LocalOp, LoccOutcome, LoccStep};
pub use state::{EngineKind, QuantumState};

use crate::dense::{
    partial_trace, subset_entropy, MixedState, PureState, QubitId, QubitInit, QubitRegister,
    QubitRole, DENSITY_QUBIT_CAP,
};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::ledger::{EntryKind, Ledger, Species};
use crate::network::{Endowment, NetworkGraph, NodeId};
use crate::rng::RngStream;
use crate::trace::{CausalTrace, Channel, Event, EventDetectorState, EventId, ResourceTag};

/// Depolarizing noise attached to an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseMarker {
    pub event: EventId,
    pub p: f64,
    /// Whether the error branch was sampled.
    pub fired: bool,
}

/// How measurement outcomes are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasurementPolicy {
    /// Born-rule sampling from the run stream.
    Sampled,
    /// Post-select the listed outcomes in order, then sample.
    Forced(VecDeque<u8>),
}

type PairKey = (NodeId, NodeId);

fn pair_key(a: NodeId, b: NodeId) -> PairKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A materialized shared pair: qubit at the lower node id, then the higher.
#[derive(Debug, Clone)]
struct LivePair {
    lo: QubitId,
    hi: QubitId,
    tag: ResourceTag,
}

/// One protocol execution: network, global state, trace and ledger.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    net: Arc<NetworkGraph>,
    state: QuantumState,
    register: QubitRegister,
    trace: CausalTrace,
    ledger: Ledger,
    rng: RngStream,
    step: u64,
    policy: MeasurementPolicy,
    branch_probability: f64,
    stocks: BTreeMap<PairKey, VecDeque<ResourceTag>>,
    live: BTreeMap<PairKey, Vec<LivePair>>,
    multiparty: BTreeMap<(String, Vec<NodeId>), VecDeque<ResourceTag>>,
    next_instance: u64,
    detector: EventDetectorState,
    /// Qubits behind each detector snapshot.
    watched: BTreeMap<NodeId, Vec<QubitId>>,
    noise: Vec<NoiseMarker>,
    notes: Vec<String>,
    ancillas: BTreeMap<NodeId, Vec<QubitId>>,
}

impl ProtocolRun {
    /// All wires start in |0⟩. Finite endowments are handed out up front.
    pub fn new(net: Arc<NetworkGraph>, engine: EngineKind, rng: RngStream) -> Result<Self> {
        let mut register = QubitRegister::for_network(&net);
        let state = QuantumState::zero(engine, register.len())?;
        if state.num_qubits() > register.len() {
            // the tableau starts with one column; leave it vacant
            let id = register.push(NodeId(usize::MAX), QubitRole::Scratch);
            register.release(id, false)?;
        }
        let mut run = Self {
            net,
            state,
            register,
            trace: CausalTrace::new(),
            ledger: Ledger::new(),
            rng,
            step: 0,
            policy: MeasurementPolicy::Sampled,
            branch_probability: 1.0,
            stocks: BTreeMap::new(),
            live: BTreeMap::new(),
            multiparty: BTreeMap::new(),
            next_instance: 0,
            detector: EventDetectorState::default(),
            watched: BTreeMap::new(),
            noise: Vec::new(),
            notes: Vec::new(),
            ancillas: BTreeMap::new(),
        };
        match run.net.endowment() {
            Endowment::Infinite => run.ledger.exempt(Species::Qq),
            Endowment::Finite(k) if k > 0 => {
                let edges: Vec<_> = run.net.edges().iter().copied().collect();
                for (a, b) in edges {
                    for _ in 0..k {
                        let tag = run.new_tag(Species::Qq, &[a, b]);
                        run.create_at_all(&[a, b], &tag, EntryKind::Endowment)?;
                        run.stocks.entry((a, b)).or_default().push_back(tag);
                    }
                }
                run.tick();
            }
            Endowment::Finite(_) => {}
        }
        run.seed_detector();
        Ok(run)
    }

    pub fn network(&self) -> &NetworkGraph {
        &self.net
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut QuantumState {
        &mut self.state
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn trace(&self) -> &CausalTrace {
        &self.trace
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn noise_markers(&self) -> &[NoiseMarker] {
        &self.noise
    }

    pub fn detector(&self) -> &EventDetectorState {
        &self.detector
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.detector = EventDetectorState::new(epsilon);
        self.seed_detector();
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    pub fn set_policy(&mut self, policy: MeasurementPolicy) {
        self.policy = policy;
    }

    /// Product of post-selected branch probabilities so far.
    pub fn branch_probability(&self) -> f64 {
        self.branch_probability
    }

    /// Consume the run, keeping the state, trace and ledger.
    pub fn into_parts(self) -> (QuantumState, QubitRegister, CausalTrace, Ledger) {
        (self.state, self.register, self.trace, self.ledger)
    }

    fn tick(&mut self) {
        self.step += 1;
    }

    fn emit(&mut self, event: Event) -> Result<EventId> {
        self.trace.record(event.at_step(self.step))
    }

    fn new_tag(&mut self, species: Species, parties: &[NodeId]) -> ResourceTag {
        let tag = ResourceTag {
            species: species.label().to_owned(),
            parties: crate::ledger::party_key(&species, parties),
            instance: self.next_instance,
        };
        self.next_instance += 1;
        tag
    }

    /// ResourceCreate at every party; the ledger credit links to the first.
    fn create_at_all(
        &mut self,
        parties: &[NodeId],
        tag: &ResourceTag,
        kind: EntryKind,
    ) -> Result<Vec<EventId>> {
        let mut ids = Vec::new();
        for &p in parties {
            ids.push(self.emit(Event::create(p, tag.clone()))?);
        }
        let species = Species::try_from(tag.species.clone()).map_err(Error::BadParams)?;
        self.ledger.credit(species, &tag.parties, 1, ids[0], kind)?;
        Ok(ids)
    }

    fn consume(&mut self, at: NodeId, tag: &ResourceTag) -> Result<EventId> {
        let ev = self.emit(Event::consume(at, tag.clone()))?;
        let species = Species::try_from(tag.species.clone()).map_err(Error::BadParams)?;
        self.ledger.debit(species, &tag.parties, 1, ev)?;
        Ok(ev)
    }

    /// Send/Receive pair plus the channel meter. Returns (send, receive).
    fn deliver(&mut self, send: Event, to: NodeId) -> Result<(EventId, EventId)> {
        let (from, channel, units) = (send.node, send.channel, send.units);
        let s = self.emit(send)?;
        let species = match channel {
            Channel::Quantum => Species::QuantumBit,
            _ => Species::ClassicalBit,
        };
        self.ledger.channel_use(species, from, to, units, s)?;
        self.tick();
        let recv = Event::receive(to, self.trace.event(s)?);
        let r = self.emit(recv)?;
        Ok((s, r))
    }

    /// One classical message of `bits` bits.
    fn classical(
        &mut self,
        from: NodeId,
        to: NodeId,
        bits: u64,
        label: &str,
        post: bool,
    ) -> Result<(EventId, EventId)> {
        let mut send = Event::send(from, Channel::Classical, bits, label);
        if post {
            send = send.after_consumption();
        }
        self.deliver(send, to)
    }

    // ---- qubit bookkeeping ----------------------------------------------

    fn alloc(&mut self, node: NodeId, role: QubitRole) -> Result<QubitId> {
        if !self.state.compacts() {
            if let Some(pos) = self.register.vacant() {
                return self.register.reuse(node, role, pos);
            }
        }
        let pos = self.state.push_qubit()?;
        let id = self.register.push(node, role);
        debug_assert_eq!(self.register.position(id)?, pos);
        Ok(id)
    }

    /// Return a qubit in a basis state to the pool.
    fn free(&mut self, id: QubitId) -> Result<()> {
        let pos = self.register.position(id)?;
        self.state.clear(pos)?;
        self.state.remove_qubit(pos)?;
        self.register.release(id, self.state.compacts())?;
        Ok(())
    }

    pub fn pos(&self, id: QubitId) -> Result<usize> {
        self.register.position(id)
    }

    /// Global position of local wire `local` at `node`.
    pub fn wire(&self, node: NodeId, local: usize) -> Result<usize> {
        self.register.global(node, local)
    }

    pub fn wires(&self, node: NodeId) -> Vec<QubitId> {
        self.register.wires_at(node).to_vec()
    }

    /// Positions of every qubit located at `node` (wires and ancillas).
    pub fn located_positions(&self, node: NodeId) -> Result<Vec<usize>> {
        self.register.positions(&self.register.located_at(node))
    }

    /// Append `count` qubits on an off-network node (reference systems).
    pub fn add_system(
        &mut self,
        node: NodeId,
        role: QubitRole,
        count: usize,
    ) -> Result<Vec<QubitId>> {
        (0..count).map(|_| self.alloc(node, role)).collect()
    }

    fn measure(&mut self, pos: usize) -> Result<u8> {
        if let MeasurementPolicy::Forced(queue) = &mut self.policy {
            if let Some(v) = queue.pop_front() {
                let p = self.state.project(pos, v)?;
                self.branch_probability *= p;
                return Ok(v);
            }
        }
        self.state.measure(pos, &mut self.rng)
    }

    /// Load a value into a fresh wire (setup, no event).
    pub fn prepare(&mut self, node: NodeId, local: usize, init: QubitInit) -> Result<()> {
        let pos = self.wire(node, local)?;
        self.state.prepare(pos, init)?;
        self.reseed(node);
        Ok(())
    }

    /// Engine-level gate on global positions (setup, no event).
    pub fn apply_raw(&mut self, gate: Gate, positions: &[usize]) -> Result<()> {
        self.state.apply_gate(gate, positions)?;
        self.resync_detector();
        Ok(())
    }

    /// Take fresh detector snapshots at every node, e.g. after setup
    /// through [`ProtocolRun::state_mut`].
    pub fn resync_detector(&mut self) {
        self.seed_detector();
    }

    /// Replace the state with a uniformly random Pauli with probability `p`.
    fn depolarize_pos(&mut self, pos: usize, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParams(format!(
                "noise probability {p} outside [0, 1]"
            )));
        }
        if p == 0.0 || self.rng.random::<f64>() >= p {
            return Ok(false);
        }
        match self.rng.random_range(0..4u8) {
            1 => self.state.apply_gate(Gate::X, &[pos])?,
            2 => self.state.apply_gate(Gate::Y, &[pos])?,
            3 => self.state.apply_gate(Gate::Z, &[pos])?,
            _ => {}
        }
        Ok(true)
    }

    /// Noisy local identity on one wire, as its own marked event.
    pub fn depolarize(&mut self, node: NodeId, local: usize, p: f64) -> Result<EventId> {
        let pos = self.wire(node, local)?;
        let fired = self.depolarize_pos(pos, p)?;
        let ev = self.emit(Event::local(node).noisy(p > 0.0))?;
        self.noise.push(NoiseMarker {
            event: ev,
            p,
            fired,
        });
        Ok(ev)
    }

    // ---- shared resources ------------------------------------------------

    /// Hand out a stock of a multiparty species (GHZ, W) to `parties`.
    pub fn endow_multiparty(
        &mut self,
        species: &str,
        parties: &[NodeId],
        count: u64,
    ) -> Result<()> {
        if parties.len() < 3 {
            return Err(Error::BadParams(format!(
                "{species} needs at least three parties"
            )));
        }
        for &p in parties {
            if self.net.node(p).is_none() {
                return Err(Error::BadIndex(p.0));
            }
        }
        let key_parties = crate::ledger::party_key(&Species::named(species), parties);
        for _ in 0..count {
            let tag = self.new_tag(Species::named(species), parties);
            self.create_at_all(&key_parties, &tag, EntryKind::Endowment)?;
            self.multiparty
                .entry((species.to_owned(), key_parties.clone()))
                .or_default()
                .push_back(tag);
        }
        self.tick();
        Ok(())
    }

    fn take_multiparty(&mut self, species: &str, parties: &[NodeId]) -> Option<ResourceTag> {
        let key = (
            species.to_owned(),
            crate::ledger::party_key(&Species::named(species), parties),
        );
        self.multiparty.get_mut(&key)?.pop_front()
    }

    /// Number of [qq] available between two nodes right now.
    pub fn pairs_available(&self, a: NodeId, b: NodeId) -> Option<u64> {
        let key = pair_key(a, b);
        let live = self.live.get(&key).map_or(0, Vec::len) as u64;
        let stock = self.stocks.get(&key).map_or(0, VecDeque::len) as u64;
        if self.net.has_edge(a, b) && self.net.endowment() == Endowment::Infinite {
            None
        } else {
            Some(live + stock)
        }
    }

    /// Obtain a Bell pair between `a` and `b` as scratch qubits
    /// (qubit at `a`, qubit at `b`, tag). Does not consume it.
    fn acquire_pair(&mut self, a: NodeId, b: NodeId) -> Result<(QubitId, QubitId, ResourceTag)> {
        let key = pair_key(a, b);
        if let Some(p) = self.live.get_mut(&key).and_then(Vec::pop) {
            let (qa, qb) = if a <= b { (p.lo, p.hi) } else { (p.hi, p.lo) };
            return Ok((qa, qb, p.tag));
        }
        let tag = if let Some(tag) = self.stocks.get_mut(&key).and_then(VecDeque::pop_front) {
            tag
        } else if self.net.has_edge(a, b) && self.net.endowment() == Endowment::Infinite {
            self.distribute(a, b)?
        } else {
            return Err(Error::NoSharedEntanglement(a, b));
        };
        let qa = self.alloc(a, QubitRole::Scratch)?;
        let qb = self.alloc(b, QubitRole::Scratch)?;
        let (pa, pb) = (self.pos(qa)?, self.pos(qb)?);
        self.state.apply_gate(Gate::H, &[pa])?;
        self.state.apply_gate(Gate::Cnot, &[pa, pb])?;
        Ok((qa, qb, tag))
    }

    /// Fresh pair over an infinitely endowed edge: created at `a`, half sent
    /// to `b` over the edge, created at `b`.
    fn distribute(&mut self, a: NodeId, b: NodeId) -> Result<ResourceTag> {
        let tag = self.new_tag(Species::Qq, &[a, b]);
        let ca = self.emit(Event::create(a, tag.clone()))?;
        self.ledger
            .credit(Species::Qq, &tag.parties, 1, ca, EntryKind::Endowment)?;
        let s = self.emit(Event::send(a, Channel::Quantum, 1, "epr"))?;
        self.tick();
        let recv = Event::receive(b, self.trace.event(s)?);
        self.emit(recv)?;
        self.emit(Event::create(b, tag.clone()))?;
        Ok(tag)
    }

    fn store_live(&mut self, a: NodeId, qa: QubitId, b: NodeId, qb: QubitId, tag: ResourceTag) {
        let (lo, hi) = if a <= b { (qa, qb) } else { (qb, qa) };
        self.live
            .entry(pair_key(a, b))
            .or_default()
            .push(LivePair { lo, hi, tag });
    }

    /// Qubits of the most recent live pair between `a` and `b`.
    pub fn live_pair(&self, a: NodeId, b: NodeId) -> Option<(usize, usize)> {
        let p = self.live.get(&pair_key(a, b))?.last()?;
        let (lo, hi) = (self.pos(p.lo).ok()?, self.pos(p.hi).ok()?);
        Some(if a <= b { (lo, hi) } else { (hi, lo) })
    }

    // ---- local-event detector ---------------------------------------------

    /// Reduced state of everything located at `node`, indexed locally so
    /// snapshots survive position shifts elsewhere in the register.
    fn node_rho(&self, node: NodeId) -> Result<Option<(Vec<QubitId>, MixedState)>> {
        let Some(s) = self.state.as_dense() else {
            return Ok(None);
        };
        let ids = self.register.located_at(node);
        if ids.is_empty() || ids.len() > DENSITY_QUBIT_CAP {
            return Ok(None);
        }
        let rho = partial_trace(s, &self.register.positions(&ids)?)?;
        let local = MixedState::new(rho.rho().clone(), (0..ids.len()).collect())?;
        Ok(Some((ids, local)))
    }

    fn seed_detector(&mut self) {
        let nodes: Vec<NodeId> = self.net.node_ids().collect();
        for n in nodes {
            self.reseed(n);
        }
    }

    fn reseed(&mut self, node: NodeId) {
        if let Ok(Some((ids, rho))) = self.node_rho(node) {
            self.detector.seed(node, rho);
            self.watched.insert(node, ids);
        }
    }

    /// Whether the reduced state of `node` moved by at least ε since its
    /// last event. A changed qubit set counts as a move. Nodes without a
    /// snapshot fire on every touch.
    pub fn observe(&mut self, node: NodeId) -> Result<bool> {
        match self.node_rho(node)? {
            Some((ids, rho)) => {
                if self.watched.get(&node) != Some(&ids) {
                    self.detector.seed(node, rho);
                    self.watched.insert(node, ids);
                    return Ok(true);
                }
                self.detector.detect_local_event(node, &rho)
            }
            None => {
                self.note(format!(
                    "local-event detector fell back to fire-on-touch at {}",
                    self.net.label(node)
                ));
                Ok(self.detector.touch_without_snapshot(node))
            }
        }
    }

    /// Dense state with qubits reordered as: every wire by (node, slot),
    /// then the remaining qubits by position.
    pub fn wire_frame_state(&self) -> Result<PureState> {
        let s = self.state.as_dense().ok_or(Error::NonClifford)?;
        let mut order = Vec::with_capacity(s.num_qubits());
        for node in self.net.node_ids() {
            order.extend(self.register.positions(self.register.wires_at(node))?);
        }
        let mut rest: Vec<usize> = (0..s.num_qubits()).filter(|p| !order.contains(p)).collect();
        order.append(&mut rest);
        s.permuted(&order)
    }

    /// Entanglement entropy (bits) between the qubits located at `nodes`
    /// and everything else.
    pub fn cut_entropy(&self, nodes: &[NodeId]) -> Result<f64> {
        let mut pos = Vec::new();
        for &n in nodes {
            pos.extend(self.located_positions(n)?);
        }
        pos.sort_unstable();
        match &self.state {
            QuantumState::Dense(s) => {
                if pos.is_empty() || pos.len() == s.num_qubits() {
                    return Ok(0.0);
                }
                subset_entropy(s, &pos)
            }
            QuantumState::Stabilizer(t) => Ok(t.subset_entropy(&pos)? as f64),
        }
    }
}
