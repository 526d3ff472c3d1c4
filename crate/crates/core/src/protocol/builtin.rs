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

//! Built-in LOCC protocols.

use serde::{Deserialize, Serialize};

use super::{NoiseMarker, ProtocolRun};
use crate::dense::{QubitId, QubitRole};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::ledger::{EntryKind, ResourceInequality, Species, Term};
use crate::network::NodeId;
use crate::trace::{Channel, Event, EventId};

/// Ledger label of a three-party GHZ stock.
pub const GHZ: &str = "[qqq]";

/// Ledger label of one nonlocal CNOT.
pub const NONLOCAL_CNOT: &str = "CNOT";

/// What R does in a GHZ-controlled teleport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzMode {
    Cooperate,
    Withhold,
}

/// Ordering of swaps along a repeater chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapSchedule {
    #[default]
    Sequential,
    /// Node-disjoint swaps share wall steps.
    Parallel,
}

fn bit(v: u8) -> bool {
    v & 1 == 1
}

impl ProtocolRun {
    fn cond(&mut self, gate: Gate, on: bool, q: QubitId) -> Result<()> {
        if on {
            let p = self.pos(q)?;
            self.state.apply_gate(gate, &[p])?;
        }
        Ok(())
    }

    pub(super) fn gate_ids(&mut self, gate: Gate, ids: &[QubitId]) -> Result<()> {
        let pos = self.register.positions(ids)?;
        self.state.apply_gate(gate, &pos)
    }

    pub(super) fn measure_id(&mut self, q: QubitId) -> Result<u8> {
        let p = self.pos(q)?;
        self.measure(p)
    }

    pub(super) fn local(&mut self, node: NodeId, payload: String) -> Result<EventId> {
        self.emit(Event::local(node).with_payload(payload))
    }

    pub(super) fn wire_id(&self, node: NodeId, local: usize) -> Result<QubitId> {
        self.register
            .wires_at(node)
            .get(local)
            .copied()
            .ok_or(Error::NoSuchQubit(node, local))
    }

    fn has_pair(&self, a: NodeId, b: NodeId) -> bool {
        self.pairs_available(a, b).is_none_or(|n| n > 0)
    }

    /// Move local wire `src_local` of `src` to `dst`. Returns its new local
    /// index at `dst`.
    pub fn teleport(&mut self, src: NodeId, src_local: usize, dst: NodeId) -> Result<usize> {
        if src == dst {
            return Err(Error::BadParams("teleport needs two distinct nodes".into()));
        }
        let w = self.wire_id(src, src_local)?;
        if self.register.wires_at(dst).len() + 1 > self.net.capacity(dst) {
            return Err(Error::NoFreeQubit(dst));
        }
        self.teleport_id(w, src, dst)?;
        Ok(self.register.wires_at(dst).len() - 1)
    }

    /// Teleport the qubit `w` held at `src` to `dst` without a capacity check.
    pub(crate) fn teleport_id(&mut self, w: QubitId, src: NodeId, dst: NodeId) -> Result<()> {
        let (a_s, a_d, tag) = self.acquire_pair(src, dst)?;
        self.consume(src, &tag)?;
        self.gate_ids(Gate::Cnot, &[w, a_s])?;
        self.gate_ids(Gate::H, &[w])?;
        let m1 = self.measure_id(w)?;
        let m2 = self.measure_id(a_s)?;
        self.local(src, format!("bell measurement ({m1},{m2})"))?;
        self.tick();
        self.classical(src, dst, 1, "bit", true)?;
        self.tick();
        self.classical(src, dst, 1, "bit", true)?;
        self.tick();
        self.cond(Gate::X, bit(m2), a_d)?;
        self.cond(Gate::Z, bit(m1), a_d)?;
        let done = self.local(dst, format!("correction X^{m2} Z^{m1}"))?;
        // the state now sits on a_d; move it onto w's id
        self.gate_ids(Gate::Swap, &[w, a_d])?;
        self.free(a_s)?;
        self.free(a_d)?;
        self.register.relocate(w, dst)?;
        self.ledger
            .produce(Species::QuantumBit, &[src, dst], 1, done)?;
        self.tick();
        self.reseed(src);
        self.reseed(dst);
        Ok(())
    }

    /// Send two classical bits with one shared pair and one qubit. With
    /// `noise_p > 0` the travelling qubit is depolarized. Returns the
    /// decoded value.
    pub fn superdense_send(
        &mut self,
        src: NodeId,
        dst: NodeId,
        bits: u8,
        noise_p: f64,
    ) -> Result<u8> {
        if bits > 3 {
            return Err(Error::BadParams(format!(
                "superdense payload {bits} does not fit in two bits"
            )));
        }
        if !(0.0..=1.0).contains(&noise_p) {
            return Err(Error::BadParams(format!(
                "noise probability {noise_p} outside [0, 1]"
            )));
        }
        if src == dst {
            return Err(Error::BadParams(
                "superdense coding needs two distinct nodes".into(),
            ));
        }
        let (a_s, a_d, tag) = self.acquire_pair(src, dst)?;
        self.consume(src, &tag)?;
        self.cond(Gate::X, bits & 1 == 1, a_s)?;
        self.cond(Gate::Z, bits & 2 == 2, a_s)?;
        self.local(src, format!("encode {bits:02b}"))?;
        self.tick();

        let pos = self.pos(a_s)?;
        let fired = self.depolarize_pos(pos, noise_p)?;
        let send = Event::send(src, Channel::Quantum, 1, "qubit").noisy(noise_p > 0.0);
        let (s, _) = self.deliver(send, dst)?;
        if noise_p > 0.0 {
            self.noise.push(NoiseMarker {
                event: s,
                p: noise_p,
                fired,
            });
        }
        self.register.relocate(a_s, dst)?;
        self.tick();

        self.gate_ids(Gate::Cnot, &[a_s, a_d])?;
        self.gate_ids(Gate::H, &[a_s])?;
        let z = self.measure_id(a_s)?;
        let x = self.measure_id(a_d)?;
        let received = x | (z << 1);
        let done = self.local(dst, format!("decode {received:02b}"))?;
        self.ledger
            .produce(Species::ClassicalBit, &[src, dst], 2, done)?;
        self.free(a_s)?;
        self.free(a_d)?;
        self.tick();
        Ok(received)
    }

    /// Swap at `q`: pairs (r,q) and (q,s) become one pair (r,s).
    pub fn entanglement_swap(&mut self, q: NodeId, r: NodeId, s: NodeId) -> Result<()> {
        self.swap_round(&[(q, r, s)])
    }

    /// Run swaps that share wall steps phase by phase: all Bell
    /// measurements, then all messages, then all corrections.
    fn swap_round(&mut self, swaps: &[(NodeId, NodeId, NodeId)]) -> Result<()> {
        for &(q, r, s) in swaps {
            if q == r || q == s || r == s {
                return Err(Error::BadParams("swap needs three distinct nodes".into()));
            }
            for (a, b) in [(r, q), (q, s)] {
                if !self.has_pair(a, b) {
                    return Err(Error::MissingPair(a, b));
                }
            }
        }
        let mut pending = Vec::new();
        for &(q, r, s) in swaps {
            let (x_q1, x_r, t1) = self.acquire_pair(q, r)?;
            let (x_q2, x_s, t2) = self.acquire_pair(q, s)?;
            self.consume(q, &t1)?;
            self.consume(q, &t2)?;
            self.gate_ids(Gate::Cnot, &[x_q1, x_q2])?;
            self.gate_ids(Gate::H, &[x_q1])?;
            let m1 = self.measure_id(x_q1)?;
            let m2 = self.measure_id(x_q2)?;
            self.local(q, format!("bell measurement ({m1},{m2})"))?;
            self.free(x_q1)?;
            self.free(x_q2)?;
            pending.push((q, r, s, x_r, x_s, m1, m2));
        }
        self.tick();
        let t = self.step;
        let mut end = t;
        for &(q, r, s, ..) in &pending {
            self.step = t;
            self.classical(q, r, 1, "bit", true)?;
            self.step = t;
            self.classical(q, s, 1, "bit", true)?;
            end = end.max(self.step);
        }
        self.step = end + 1;
        for (_, r, s, x_r, x_s, m1, m2) in pending {
            self.cond(Gate::Z, bit(m1), x_r)?;
            self.local(r, format!("correction Z^{m1}"))?;
            self.cond(Gate::X, bit(m2), x_s)?;
            self.local(s, format!("correction X^{m2}"))?;
            let tag = self.new_tag(Species::Qq, &[r, s]);
            self.create_at_all(&[r, s], &tag, EntryKind::Produced)?;
            self.store_live(r, x_r, s, x_s, tag);
            self.reseed(r);
            self.reseed(s);
        }
        self.tick();
        Ok(())
    }

    /// Entangle the two ends of `chain` by swapping at every interior
    /// node. Returns the number of swap rounds.
    pub fn swap_chain(&mut self, chain: &[NodeId], schedule: SwapSchedule) -> Result<usize> {
        if chain.len() < 2 {
            return Err(Error::BadParams(
                "swap chain needs at least two nodes".into(),
            ));
        }
        let mut rounds = 0;
        match schedule {
            SwapSchedule::Sequential => {
                for i in 1..chain.len() - 1 {
                    self.entanglement_swap(chain[i], chain[0], chain[i + 1])?;
                    rounds += 1;
                }
            }
            SwapSchedule::Parallel => {
                let mut alive = chain.to_vec();
                while alive.len() > 2 {
                    let swaps: Vec<_> = (1..alive.len() - 1)
                        .step_by(2)
                        .map(|i| (alive[i], alive[i - 1], alive[i + 1]))
                        .collect();
                    self.swap_round(&swaps)?;
                    alive = alive
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i == 0 || *i == alive.len() - 1 || i % 2 == 0)
                        .map(|(_, &n)| n)
                        .collect();
                    rounds += 1;
                }
            }
        }
        Ok(rounds)
    }

    /// CNOT from wire `c_local` at `c` onto wire `t_local` at `t` using one
    /// shared pair and one classical bit each way.
    pub fn distributed_cnot(
        &mut self,
        c: NodeId,
        c_local: usize,
        t: NodeId,
        t_local: usize,
    ) -> Result<()> {
        if c == t {
            return Err(Error::BadParams(
                "distributed CNOT needs two distinct nodes".into(),
            ));
        }
        let qc = self.wire_id(c, c_local)?;
        let qt = self.wire_id(t, t_local)?;
        let (a_c, a_t, tag) = self.acquire_pair(c, t)?;
        self.consume(c, &tag)?;
        self.gate_ids(Gate::Cnot, &[qc, a_c])?;
        let m1 = self.measure_id(a_c)?;
        self.local(c, format!("cat entangle, outcome {m1}"))?;
        self.tick();
        self.classical(c, t, 1, "bit", true)?;
        self.tick();
        self.cond(Gate::X, bit(m1), a_t)?;
        self.gate_ids(Gate::Cnot, &[a_t, qt])?;
        self.gate_ids(Gate::H, &[a_t])?;
        let m2 = self.measure_id(a_t)?;
        self.local(t, format!("cat disentangle, outcome {m2}"))?;
        self.tick();
        self.classical(t, c, 1, "bit", true)?;
        self.tick();
        self.cond(Gate::Z, bit(m2), qc)?;
        let done = self.local(c, format!("correction Z^{m2}"))?;
        self.ledger
            .produce(Species::named(NONLOCAL_CNOT), &[c, t], 1, done)?;
        self.free(a_c)?;
        self.free(a_t)?;
        self.tick();
        self.reseed(c);
        self.reseed(t);
        Ok(())
    }

    /// Teleport wire `q_local` of `q` to `s` over a GHZ state shared with
    /// `r`. With [`GhzMode::Withhold`] R never answers and S holds no copy.
    /// Returns the new local index at `s` when the transfer completes.
    pub fn controlled_teleport_ghz(
        &mut self,
        q: NodeId,
        q_local: usize,
        r: NodeId,
        s: NodeId,
        mode: GhzMode,
    ) -> Result<Option<usize>> {
        if q == r || q == s || r == s {
            return Err(Error::BadParams(
                "controlled teleport needs three distinct nodes".into(),
            ));
        }
        let w = self.wire_id(q, q_local)?;
        if mode == GhzMode::Cooperate && self.register.wires_at(s).len() + 1 > self.net.capacity(s)
        {
            return Err(Error::NoFreeQubit(s));
        }
        let tag = self
            .take_multiparty(GHZ, &[q, r, s])
            .ok_or(Error::MissingGhz(q, r, s))?;
        let g_q = self.alloc(q, QubitRole::Scratch)?;
        let g_r = self.alloc(r, QubitRole::Scratch)?;
        let g_s = self.alloc(s, QubitRole::Scratch)?;
        self.gate_ids(Gate::H, &[g_q])?;
        self.gate_ids(Gate::Cnot, &[g_q, g_r])?;
        self.gate_ids(Gate::Cnot, &[g_q, g_s])?;

        self.consume(q, &tag)?;
        self.gate_ids(Gate::Cnot, &[w, g_q])?;
        self.gate_ids(Gate::H, &[w])?;
        let m1 = self.measure_id(w)?;
        let m2 = self.measure_id(g_q)?;
        self.local(q, format!("bell measurement ({m1},{m2})"))?;
        self.free(g_q)?;
        self.tick();
        self.classical(q, r, 2, "bit", true)?;
        self.tick();
        if mode == GhzMode::Withhold {
            self.note("controlled teleport: R withheld its message");
            return Ok(None);
        }

        self.gate_ids(Gate::H, &[g_r])?;
        let x = self.measure_id(g_r)?;
        self.local(r, format!("x measurement {x}"))?;
        self.free(g_r)?;
        self.tick();
        self.classical(r, s, 2, "bit", true)?;
        self.tick();
        self.cond(Gate::X, bit(m2), g_s)?;
        self.cond(Gate::Z, bit(m1 ^ x), g_s)?;
        let done = self.local(s, format!("correction X^{m2} Z^{}", m1 ^ x))?;
        self.gate_ids(Gate::Swap, &[w, g_s])?;
        self.free(g_s)?;
        self.register.relocate(w, s)?;
        self.ledger.produce(Species::QuantumBit, &[q, s], 1, done)?;
        self.tick();
        self.reseed(q);
        self.reseed(s);
        Ok(Some(self.register.wires_at(s).len() - 1))
    }

    /// Both nodes measure Z on a shared pair and keep the outcome.
    pub fn shared_coin(&mut self, a: NodeId, b: NodeId) -> Result<(u8, u8)> {
        if a == b {
            return Err(Error::BadParams(
                "coin flip needs two distinct nodes".into(),
            ));
        }
        let (x_a, x_b, tag) = self.acquire_pair(a, b)?;
        self.consume(a, &tag)?;
        let u = self.measure_id(x_a)?;
        self.local(a, format!("coin {u}"))?;
        let v = self.measure_id(x_b)?;
        self.local(b, format!("coin {v}"))?;
        let cc = self.new_tag(Species::Cc, &[a, b]);
        self.create_at_all(&[a, b], &cc, EntryKind::Produced)?;
        self.free(x_a)?;
        self.free(x_b)?;
        self.tick();
        Ok((u, v))
    }

    /// Materialize a pair between `a` and `b` as addressable ancillas.
    /// Returns their local indices in the ancilla range of each node (see
    /// [`ProtocolRun::locc_round`]).
    pub fn attach_pair(&mut self, a: NodeId, b: NodeId) -> Result<(usize, usize)> {
        if a == b {
            return Err(Error::BadParams("a pair needs two distinct nodes".into()));
        }
        let (x_a, x_b, tag) = self.acquire_pair(a, b)?;
        self.consume(a, &tag)?;
        let base_a = self.register.wires_at(a).len();
        let base_b = self.register.wires_at(b).len();
        let la = self.ancillas.entry(a).or_default();
        la.push(x_a);
        let ia = base_a + la.len() - 1;
        let lb = self.ancillas.entry(b).or_default();
        lb.push(x_b);
        let ib = base_b + lb.len() - 1;
        self.tick();
        Ok((ia, ib))
    }
}

/// 1 [qq] + 2 [c→c] ≥ 1 [q→q] per teleported qubit.
pub fn teleport_inequality(k: u64) -> ResourceInequality {
    ResourceInequality::teleportation(k)
}

pub fn superdense_inequality(k: u64) -> ResourceInequality {
    let one = ResourceInequality::superdense();
    scale(one, k)
}

/// `m` swaps: 2m [qq] + 2m [c→c] ≥ m [qq].
pub fn swap_inequality(m: u64) -> ResourceInequality {
    ResourceInequality::new(
        "entanglement_swapping",
        vec![
            Term::new(2 * m, Species::Qq),
            Term::new(2 * m, Species::ClassicalBit),
        ],
        vec![Term::new(m, Species::Qq)],
    )
}

pub fn distributed_cnot_inequality(k: u64) -> ResourceInequality {
    ResourceInequality::new(
        "distributed_cnot",
        vec![
            Term::new(k, Species::Qq),
            Term::new(2 * k, Species::ClassicalBit),
        ],
        vec![Term::new(k, Species::named(NONLOCAL_CNOT))],
    )
}

/// [qqq]_{QRS} + 2[c→c]_{Q→R} + 2[c→c]_{R→S} ≥ [q→q]_{Q→S}; when R
/// withholds only the first two terms are spent and nothing is achieved.
pub fn controlled_teleport_inequality(
    q: NodeId,
    r: NodeId,
    s: NodeId,
    mode: GhzMode,
) -> ResourceInequality {
    let mut consumed = vec![
        Term::between(1, Species::named(GHZ), &[q, r, s]),
        Term::between(2, Species::ClassicalBit, &[q, r]),
    ];
    let mut produced = Vec::new();
    if mode == GhzMode::Cooperate {
        consumed.push(Term::between(2, Species::ClassicalBit, &[r, s]));
        produced.push(Term::between(1, Species::QuantumBit, &[q, s]));
    }
    ResourceInequality::new("controlled_teleportation", consumed, produced)
}

/// [qq] ≥ [cc] per flip.
pub fn coin_inequality(k: u64) -> ResourceInequality {
    ResourceInequality::new(
        "shared_coin",
        vec![Term::new(k, Species::Qq)],
        vec![Term::new(k, Species::Cc)],
    )
}

fn scale(mut ineq: ResourceInequality, k: u64) -> ResourceInequality {
    for t in ineq.consumed.iter_mut().chain(ineq.produced.iter_mut()) {
        t.count *= k;
    }
    ineq
}
