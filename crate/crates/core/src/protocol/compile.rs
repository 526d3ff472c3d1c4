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

//! Compiling a unitary on two neighboring nodes into node-local operations.

use rand::seq::index::sample;
use serde::Serialize;

use super::ProtocolRun;
use crate::dense::{QubitId, Unitary};
use crate::error::{Error, Result};
use crate::gate::GateOp;
use crate::ledger::{ResourceInequality, Species, Term};
use crate::network::{NodeId, OpClass};
use crate::trace::Event;

/// An operation on the joint wire list `[wires of A…, wires of B…]`.
#[derive(Debug, Clone)]
pub enum NeighborOp {
    Unitary(Unitary),
    Gates(Vec<GateOp>),
}

impl NeighborOp {
    pub fn is_clifford(&self) -> bool {
        match self {
            NeighborOp::Unitary(_) => false,
            NeighborOp::Gates(g) => g.iter().all(|op| op.gate.is_clifford()),
        }
    }

    fn max_index(&self) -> Option<usize> {
        match self {
            NeighborOp::Unitary(u) => u.targets().iter().copied().max(),
            NeighborOp::Gates(g) => g.iter().flat_map(|op| op.qubits.iter().copied()).max(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompileReport {
    pub host: NodeId,
    pub guest: NodeId,
    pub coin: u8,
    /// Host-side physical qubits picked to travel back, as indices into the
    /// host's qubit list at the time of the pick.
    pub returned: Vec<usize>,
    pub inequality: ResourceInequality,
}

/// (2g+1)[qq] + 4g[c→c] ≥ 2g[q→q] + [cc] for a guest of `g` wires.
pub fn compile_inequality(g: u64) -> ResourceInequality {
    ResourceInequality::new(
        "neighbor_unitary",
        vec![
            Term::new(2 * g + 1, Species::Qq),
            Term::new(4 * g, Species::ClassicalBit),
        ],
        vec![
            Term::new(2 * g, Species::QuantumBit),
            Term::new(1, Species::Cc),
        ],
    )
}

impl ProtocolRun {
    fn joint_wires(&self, a: NodeId, b: NodeId) -> Vec<QubitId> {
        let mut ids = self.register.wires_at(a).to_vec();
        ids.extend_from_slice(self.register.wires_at(b));
        ids
    }

    fn apply_on(&mut self, op: &NeighborOp, ids: &[QubitId]) -> Result<()> {
        if op.max_index().is_some_and(|m| m >= ids.len()) {
            return Err(Error::DimensionMismatch(format!(
                "operation addresses wire {} of {}",
                op.max_index().unwrap_or(0),
                ids.len()
            )));
        }
        match op {
            NeighborOp::Unitary(u) => {
                let targets = u
                    .targets()
                    .iter()
                    .map(|&t| self.pos(ids[t]))
                    .collect::<Result<Vec<_>>>()?;
                self.state.apply_unitary(&u.on(targets)?)
            }
            NeighborOp::Gates(gates) => {
                for g in gates {
                    let pos = g
                        .qubits
                        .iter()
                        .map(|&t| self.pos(ids[t]))
                        .collect::<Result<Vec<_>>>()?;
                    self.state.apply_gate(g.gate, &pos)?;
                }
                Ok(())
            }
        }
    }

    /// Apply `op` to the wires of `a` and `b` directly, with no events or
    /// resources. Reference for [`ProtocolRun::compile_neighbor_unitary`].
    pub fn apply_direct(&mut self, op: &NeighborOp, a: NodeId, b: NodeId) -> Result<()> {
        let ids = self.joint_wires(a, b);
        self.apply_on(op, &ids)
    }

    /// Run `op` across the edge (a, b): a coin picks the host, the guest
    /// teleports its wires over, the host applies `op` and sends back as
    /// many qubits as it received, picked at random.
    pub fn compile_neighbor_unitary(
        &mut self,
        op: &NeighborOp,
        a: NodeId,
        b: NodeId,
    ) -> Result<CompileReport> {
        if a == b || !self.net.has_edge(a, b) {
            return Err(Error::NotNeighbors(a, b));
        }
        if !op.is_clifford() && self.state.as_stabilizer().is_some() {
            return Err(Error::NonClifford);
        }
        let ids = self.joint_wires(a, b);
        if let Some(m) = op.max_index().filter(|&m| m >= ids.len()) {
            return Err(Error::DimensionMismatch(format!(
                "operation addresses wire {m} of {}",
                ids.len()
            )));
        }
        let need = ids.len();
        let class = if op.is_clifford() {
            OpClass::TypeI
        } else {
            OpClass::TypeII
        };
        let fits = |run: &Self, n: NodeId| run.net.capacity(n) >= need;
        let allowed = |run: &Self, n: NodeId| {
            class == OpClass::TypeI
                || run
                    .net
                    .node(n)
                    .is_some_and(|x| x.op_class == OpClass::TypeII)
        };
        let candidates: Vec<NodeId> = [a, b].into_iter().filter(|&n| fits(self, n)).collect();
        if candidates.is_empty() {
            let n = if self.net.capacity(a) >= self.net.capacity(b) {
                a
            } else {
                b
            };
            return Err(Error::CapacityExceeded {
                node: n,
                capacity: self.net.capacity(n),
                needed: need,
            });
        }
        let candidates: Vec<NodeId> = candidates
            .into_iter()
            .filter(|&n| allowed(self, n))
            .collect();
        if candidates.is_empty() {
            return Err(Error::OpClassViolation(a));
        }

        let (coin, _) = self.shared_coin(a, b)?;
        let pick = if coin == 0 { a } else { b };
        let host = if candidates.contains(&pick) {
            pick
        } else {
            candidates[0]
        };
        if host != pick {
            self.note(format!(
                "compile: coin picked {} but only {} can host",
                self.net.label(pick),
                self.net.label(host)
            ));
        }
        let guest = if host == a { b } else { a };

        let host_ids = self.register.wires_at(host).to_vec();
        let guest_ids = self.register.wires_at(guest).to_vec();
        for &w in &guest_ids {
            self.teleport_id(w, guest, host)?;
        }

        // apply, then route the guest's logical wires onto a random subset
        self.apply_on(op, &ids)?;
        let physical = self.register.wires_at(host).to_vec();
        let mut returned = sample(&mut self.rng, physical.len(), guest_ids.len()).into_vec();
        returned.sort_unstable();
        let back: Vec<QubitId> = returned.iter().map(|&i| physical[i]).collect();
        let stay: Vec<QubitId> = physical
            .iter()
            .copied()
            .filter(|q| !back.contains(q))
            .collect();
        let logical: Vec<QubitId> = host_ids.iter().chain(&guest_ids).copied().collect();
        let target: Vec<QubitId> = stay.iter().chain(&back).copied().collect();
        self.route(&logical, &target)?;
        let payload = format!(
            "op={} return={:?}",
            if op.is_clifford() {
                "clifford"
            } else {
                "unitary"
            },
            returned
        );
        self.emit(Event::local(host).with_class(class).with_payload(payload))?;
        self.tick();

        for &w in &back {
            self.teleport_id(w, host, guest)?;
        }
        self.register.set_slots(host, stay);
        self.register.set_slots(guest, back);
        self.reseed(a);
        self.reseed(b);
        Ok(CompileReport {
            host,
            guest,
            coin,
            returned,
            inequality: compile_inequality(guest_ids.len() as u64),
        })
    }

    /// Local SWAPs so that the content of `logical[i]` ends up on `target[i]`.
    fn route(&mut self, logical: &[QubitId], target: &[QubitId]) -> Result<()> {
        // holder[k] = qubit currently carrying logical[k]
        let mut holder: Vec<QubitId> = logical.to_vec();
        for i in 0..logical.len() {
            let from = holder[i];
            let to = target[i];
            if from == to {
                continue;
            }
            self.gate_ids(crate::gate::Gate::Swap, &[from, to])?;
            if let Some(j) = holder.iter().position(|&h| h == to) {
                holder[j] = from;
            }
            holder[i] = to;
        }
        Ok(())
    }
}
