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

use std::collections::BTreeMap;

use crate::dense::{trace_distance_l1, MixedState};
use crate::error::Result;
use crate::network::NodeId;

/// Default threshold in L1 units.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Per-node snapshot of the reduced state at the last recorded event.
#[derive(Debug, Clone)]
pub struct EventDetectorState {
    epsilon: f64,
    snapshots: BTreeMap<NodeId, MixedState>,
    fallback_nodes: Vec<NodeId>,
}

impl Default for EventDetectorState {
    fn default() -> Self {
        Self::new(DEFAULT_EPSILON)
    }
}

impl EventDetectorState {
    /// Non-positive thresholds fall back to the default.
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon: if epsilon > 0.0 {
                epsilon
            } else {
                DEFAULT_EPSILON
            },
            snapshots: BTreeMap::new(),
            fallback_nodes: Vec::new(),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Store the reference state for `node` without testing it.
    pub fn seed(&mut self, node: NodeId, rho: MixedState) {
        self.snapshots.insert(node, rho);
    }

    pub fn snapshot(&self, node: NodeId) -> Option<&MixedState> {
        self.snapshots.get(&node)
    }

    /// True iff ‖ρ − snapshot‖₁ ≥ ε; the snapshot is then replaced. A node
    /// with no snapshot is seeded and reports false.
    pub fn detect_local_event(&mut self, node: NodeId, current: &MixedState) -> Result<bool> {
        let Some(prev) = self.snapshots.get(&node) else {
            self.seed(node, current.clone());
            return Ok(false);
        };
        let fired = trace_distance_l1(prev, current)? >= self.epsilon;
        if fired {
            self.seed(node, current.clone());
        }
        Ok(fired)
    }

    /// Nodes too large for a snapshot fire on every touch.
    pub fn touch_without_snapshot(&mut self, node: NodeId) -> bool {
        if !self.fallback_nodes.contains(&node) {
            self.fallback_nodes.push(node);
        }
        true
    }

    /// Nodes that used the fire-on-touch fallback.
    pub fn fallback_nodes(&self) -> &[NodeId] {
        &self.fallback_nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{partial_trace, PureState};
    use crate::error::Error;
    use crate::gate::Gate;

    #[test]
    fn fires_only_on_real_changes() {
        let mut det = EventDetectorState::default();
        let mut s = PureState::zero(2).unwrap();
        s.bell_pair(0, 1).unwrap();
        det.seed(NodeId(0), partial_trace(&s, &[0]).unwrap());

        // identity
        assert!(!det
            .detect_local_event(NodeId(0), &partial_trace(&s, &[0]).unwrap())
            .unwrap());
        // remote party acts on its half
        s.apply_gate(Gate::H, &[1]).unwrap();
        s.apply_gate(Gate::S, &[1]).unwrap();
        assert!(!det
            .detect_local_event(NodeId(0), &partial_trace(&s, &[0]).unwrap())
            .unwrap());

        let mut p = PureState::zero(1).unwrap();
        det.seed(NodeId(1), partial_trace(&p, &[0]).unwrap());
        p.apply_gate(Gate::X, &[0]).unwrap();
        let rho = partial_trace(&p, &[0]).unwrap();
        assert!(det.detect_local_event(NodeId(1), &rho).unwrap());
        assert!(!det.detect_local_event(NodeId(1), &rho).unwrap());

        let other = partial_trace(&s, &[1]).unwrap();
        assert!(matches!(
            det.detect_local_event(NodeId(1), &other),
            Err(Error::SubsetMismatch)
        ));
    }

    #[test]
    fn missing_snapshot_seeds() {
        let mut det = EventDetectorState::new(0.0);
        assert_eq!(det.epsilon(), DEFAULT_EPSILON);
        let rho = partial_trace(&PureState::zero(1).unwrap(), &[0]).unwrap();
        assert!(!det.detect_local_event(NodeId(4), &rho).unwrap());
        assert!(det.snapshot(NodeId(4)).is_some());
        assert!(det.touch_without_snapshot(NodeId(5)));
        assert_eq!(det.fallback_nodes(), &[NodeId(5)]);
    }
}
