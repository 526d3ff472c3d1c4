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

//! Scripted local unitaries and LOCC rounds.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ProtocolRun;
use crate::dense::{QubitId, Unitary};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::network::{NodeId, OpClass};
use crate::trace::{Channel, Event};

/// An operation on one node. Qubit indices are local: the node's wires
/// first, then any ancillas from [`ProtocolRun::attach_pair`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalOp {
    Gate {
        gate: Gate,
        qubits: Vec<usize>,
    },
    #[serde(skip)]
    Unitary(Unitary),
}

impl LocalOp {
    fn is_clifford(&self) -> bool {
        match self {
            LocalOp::Gate { gate, .. } => gate.is_clifford(),
            LocalOp::Unitary(_) => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum LoccStep {
    Local {
        node: NodeId,
        op: LocalOp,
    },
    /// Z measurement stored under `key`, known to `node` only.
    Measure {
        node: NodeId,
        qubit: usize,
        key: String,
    },
    /// Forward the bit `key` from `from` to `to`.
    Send {
        from: NodeId,
        to: NodeId,
        channel: Channel,
        key: String,
    },
    /// Run `then` when the bit `key`, held at `node`, is 1.
    IfBit {
        node: NodeId,
        key: String,
        then: Vec<LoccStep>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoccOutcome {
    pub bits: BTreeMap<String, u8>,
    pub local_events: usize,
    pub entropy_before: Option<f64>,
    pub entropy_after: Option<f64>,
}

fn check_script(steps: &[LoccStep], lu: bool, at: Option<NodeId>) -> Result<()> {
    for step in steps {
        let acting = match step {
            LoccStep::Local { node, .. } => *node,
            LoccStep::Measure { node, .. } => {
                if lu {
                    return Err(Error::IllegalChannelUse(format!(
                        "measurement at {node} inside a local-unitary transform"
                    )));
                }
                *node
            }
            LoccStep::Send {
                from, to, channel, ..
            } => {
                if *channel == Channel::Quantum {
                    return Err(Error::IllegalChannelUse(format!(
                        "quantum send {from} → {to}"
                    )));
                }
                if lu {
                    return Err(Error::IllegalChannelUse(format!(
                        "send {from} → {to} inside a local-unitary transform"
                    )));
                }
                *from
            }
            LoccStep::IfBit { node, then, .. } => {
                if lu {
                    return Err(Error::IllegalChannelUse(
                        "classical control inside a local-unitary transform".into(),
                    ));
                }
                check_script(then, lu, Some(*node))?;
                *node
            }
        };
        if let Some(holder) = at.filter(|&h| h != acting) {
            return Err(Error::IllegalChannelUse(format!(
                "step at {acting} conditioned on a bit held by {holder}"
            )));
        }
    }
    Ok(())
}

#[derive(Default)]
struct Bits {
    values: BTreeMap<String, u8>,
    holders: BTreeMap<String, BTreeSet<NodeId>>,
}

impl Bits {
    fn read(&self, key: &str, node: NodeId) -> Result<u8> {
        match (self.values.get(key), self.holders.get(key)) {
            (Some(&v), Some(h)) if h.contains(&node) => Ok(v),
            (Some(_), _) => Err(Error::IllegalChannelUse(format!(
                "{node} reads bit `{key}` it never received"
            ))),
            _ => Err(Error::BadParams(format!("bit `{key}` is not defined"))),
        }
    }
}

impl ProtocolRun {
    fn local_qubit(&self, node: NodeId, idx: usize) -> Result<QubitId> {
        let wires = self.register.wires_at(node);
        if let Some(&q) = wires.get(idx) {
            return Ok(q);
        }
        self.ancillas
            .get(&node)
            .and_then(|a| a.get(idx - wires.len()))
            .copied()
            .ok_or(Error::NoSuchQubit(node, idx))
    }

    fn apply_local(&mut self, node: NodeId, op: &LocalOp) -> Result<()> {
        if !op.is_clifford()
            && self
                .net
                .node(node)
                .is_some_and(|n| n.op_class == OpClass::TypeI)
        {
            return Err(Error::OpClassViolation(node));
        }
        match op {
            LocalOp::Gate { gate, qubits } => {
                if qubits.len() != gate.arity() {
                    return Err(Error::DimensionMismatch(format!(
                        "{gate:?} takes {} qubits",
                        gate.arity()
                    )));
                }
                let ids = qubits
                    .iter()
                    .map(|&i| self.local_qubit(node, i))
                    .collect::<Result<Vec<_>>>()?;
                self.gate_ids(*gate, &ids)
            }
            LocalOp::Unitary(u) => {
                let pos = u
                    .targets()
                    .iter()
                    .map(|&i| self.local_qubit(node, i).and_then(|q| self.pos(q)))
                    .collect::<Result<Vec<_>>>()?;
                self.state.apply_unitary(&u.on(pos)?)
            }
        }
    }

    fn run_steps(&mut self, steps: &[LoccStep], bits: &mut Bits, events: &mut usize) -> Result<()> {
        for step in steps {
            match step {
                LoccStep::Local { node, op } => {
                    self.apply_local(*node, op)?;
                    if self.observe(*node)? {
                        let class = if op.is_clifford() {
                            OpClass::TypeI
                        } else {
                            OpClass::TypeII
                        };
                        self.emit(Event::local(*node).with_class(class))?;
                        *events += 1;
                    }
                }
                LoccStep::Measure { node, qubit, key } => {
                    let q = self.local_qubit(*node, *qubit)?;
                    let v = self.measure_id(q)?;
                    self.observe(*node)?;
                    self.local(*node, format!("measure {key}={v}"))?;
                    *events += 1;
                    bits.values.insert(key.clone(), v);
                    bits.holders.insert(key.clone(), BTreeSet::from([*node]));
                }
                LoccStep::Send { from, to, key, .. } => {
                    bits.read(key, *from)?;
                    self.tick();
                    self.classical(*from, *to, 1, key, false)?;
                    self.tick();
                    bits.holders.entry(key.clone()).or_default().insert(*to);
                }
                LoccStep::IfBit { node, key, then } => {
                    if bits.read(key, *node)? == 1 {
                        self.run_steps(then, bits, events)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn run_script(
        &mut self,
        steps: &[LoccStep],
        cut: Option<&[NodeId]>,
        lu: bool,
    ) -> Result<LoccOutcome> {
        check_script(steps, lu, None)?;
        let entropy_before = cut.map(|c| self.cut_entropy(c)).transpose()?;
        let mut bits = Bits::default();
        let mut events = 0;
        self.run_steps(steps, &mut bits, &mut events)?;
        self.tick();
        let entropy_after = cut.map(|c| self.cut_entropy(c)).transpose()?;
        Ok(LoccOutcome {
            bits: bits.values,
            local_events: events,
            entropy_before,
            entropy_after,
        })
    }

    /// One LOCC round. With `cut`, the entanglement entropy across the cut
    /// is reported before and after.
    pub fn locc_round(
        &mut self,
        steps: &[LoccStep],
        cut: Option<&[NodeId]>,
    ) -> Result<LoccOutcome> {
        self.run_script(steps, cut, false)
    }

    /// Local unitaries only: no measurement and no communication.
    pub fn lu_transform(
        &mut self,
        steps: &[LoccStep],
        cut: Option<&[NodeId]>,
    ) -> Result<LoccOutcome> {
        self.run_script(steps, cut, true)
    }
}
