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

//! Mapping between network-local qubit slots and global qubit positions.
//!
//! Qubits get a stable [`QubitId`] when allocated. The global *position*
//! (the bit index in the amplitude vector or the tableau column) may shift
//! when a lower qubit is released from a compacting engine; ids never do.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

/// What a register qubit is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitRole {
    /// A protocol qubit, counted in the node budget.
    Wire,
    /// Reference system R′ entangled with the secret.
    Reference,
    /// Data-center qubit purifying part of the network.
    DataCenter,
    /// Transient half of a Bell pair or GHZ state.
    Scratch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitInfo {
    pub position: usize,
    pub node: NodeId,
    pub role: QubitRole,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QubitRegister {
    by_position: Vec<Option<QubitId>>,
    info: BTreeMap<QubitId, QubitInfo>,
    slots: BTreeMap<NodeId, Vec<QubitId>>,
    next_id: u32,
}

impl QubitRegister {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wires for every node budget, ordered by (node id, local index).
    pub fn for_network(net: &NetworkGraph) -> Self {
        let mut reg = Self::new();
        for node in net.nodes() {
            for _ in 0..node.qubit_budget {
                reg.push(node.id, QubitRole::Wire);
            }
        }
        reg
    }

    /// `n` wires on a single node, for engine-level tests.
    pub fn flat(n: usize) -> Self {
        let mut reg = Self::new();
        for _ in 0..n {
            reg.push(NodeId(0), QubitRole::Wire);
        }
        reg
    }

    /// Number of positions (including any released but uncompacted ones).
    pub fn len(&self) -> usize {
        self.by_position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_position.is_empty()
    }

    /// Allocate a qubit at the next free top position.
    pub fn push(&mut self, node: NodeId, role: QubitRole) -> QubitId {
        let position = self.by_position.len();
        self.place(node, role, position)
    }

    /// Allocate a qubit at an existing vacant position (non-compacting engines).
    pub fn reuse(&mut self, node: NodeId, role: QubitRole, position: usize) -> Result<QubitId> {
        match self.by_position.get(position) {
            Some(None) => Ok(self.place(node, role, position)),
            _ => Err(Error::BadIndex(position)),
        }
    }

    fn place(&mut self, node: NodeId, role: QubitRole, position: usize) -> QubitId {
        let id = QubitId(self.next_id);
        self.next_id += 1;
        if position == self.by_position.len() {
            self.by_position.push(Some(id));
        } else {
            self.by_position[position] = Some(id);
        }
        self.info.insert(
            id,
            QubitInfo {
                position,
                node,
                role,
            },
        );
        if role == QubitRole::Wire {
            self.slots.entry(node).or_default().push(id);
        }
        id
    }

    /// Forget a qubit. With `compact`, higher positions shift down by one.
    pub fn release(&mut self, id: QubitId, compact: bool) -> Result<usize> {
        let info = self
            .info
            .remove(&id)
            .ok_or(Error::BadIndex(id.0 as usize))?;
        if info.role == QubitRole::Wire {
            if let Some(list) = self.slots.get_mut(&info.node) {
                list.retain(|&q| q != id);
            }
        }
        if compact {
            self.by_position.remove(info.position);
            for q in self.by_position.iter().skip(info.position).flatten() {
                self.info.get_mut(q).unwrap().position -= 1;
            }
        } else {
            self.by_position[info.position] = None;
        }
        Ok(info.position)
    }

    /// Lowest vacant position, if any.
    pub fn vacant(&self) -> Option<usize> {
        self.by_position.iter().position(Option::is_none)
    }

    pub fn position(&self, id: QubitId) -> Result<usize> {
        self.info
            .get(&id)
            .map(|i| i.position)
            .ok_or(Error::BadIndex(id.0 as usize))
    }

    pub fn positions(&self, ids: &[QubitId]) -> Result<Vec<usize>> {
        ids.iter().map(|&q| self.position(q)).collect()
    }

    pub fn info(&self, id: QubitId) -> Option<&QubitInfo> {
        self.info.get(&id)
    }

    pub fn id_at(&self, position: usize) -> Option<QubitId> {
        self.by_position.get(position).copied().flatten()
    }

    pub fn node_of(&self, id: QubitId) -> Option<NodeId> {
        self.info.get(&id).map(|i| i.node)
    }

    /// Wires currently held by `node`, in local slot order.
    pub fn wires_at(&self, node: NodeId) -> &[QubitId] {
        self.slots.get(&node).map_or(&[], Vec::as_slice)
    }

    /// (node, local index) → global position.
    pub fn global(&self, node: NodeId, local: usize) -> Result<usize> {
        let id = self
            .wires_at(node)
            .get(local)
            .copied()
            .ok_or(Error::NoSuchQubit(node, local))?;
        self.position(id)
    }

    /// Every qubit of `role`, by ascending position.
    pub fn with_role(&self, role: QubitRole) -> Vec<QubitId> {
        self.by_position
            .iter()
            .flatten()
            .copied()
            .filter(|q| self.info[q].role == role)
            .collect()
    }

    /// All qubits physically located at `node` (any role), by position.
    pub fn located_at(&self, node: NodeId) -> Vec<QubitId> {
        self.by_position
            .iter()
            .flatten()
            .copied()
            .filter(|q| self.info[q].node == node)
            .collect()
    }

    /// Move a qubit to another node. Wires are appended to the new node's
    /// slot list.
    pub fn relocate(&mut self, id: QubitId, node: NodeId) -> Result<()> {
        let info = self
            .info
            .get_mut(&id)
            .ok_or(Error::BadIndex(id.0 as usize))?;
        let old = info.node;
        info.node = node;
        if info.role == QubitRole::Wire {
            if let Some(list) = self.slots.get_mut(&old) {
                list.retain(|&q| q != id);
            }
            self.slots.entry(node).or_default().push(id);
        }
        Ok(())
    }

    /// Replace the slot order of `node` (used after a random teleport-back).
    pub fn set_slots(&mut self, node: NodeId, wires: Vec<QubitId>) {
        self.slots.insert(node, wires);
    }
}
