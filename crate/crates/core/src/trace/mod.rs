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

//! Append-only causal event DAG with happened-before queries, Hasse
//! reduction, validation and the local-event detector.

pub mod dag;
mod detector;
mod event;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use detector::{EventDetectorState, DEFAULT_EPSILON};
pub use event::{Channel, Event, EventId, EventKind, ResourceTag};

use crate::error::{Error, Result};
use crate::network::NodeId;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CausalTrace {
    events: Vec<Event>,
    edges: BTreeSet<(EventId, EventId)>,
    lanes: BTreeMap<NodeId, Vec<EventId>>,
}

/// One problem found by [`CausalTrace::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum Finding {
    CycleDetected,
    UnknownCause { event: EventId, cause: EventId },
    PairingViolation { event: EventId, reason: String },
    LaneOrder { node: NodeId, event: EventId },
    WallStepRegression { node: NodeId, event: EventId },
    ConsumeWithoutCreate { event: EventId },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

impl CausalTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an event. Its id is assigned here; causes must already exist.
    pub fn record(&mut self, mut event: Event) -> Result<EventId> {
        let id = self.events.len();
        if let Some(&bad) = event.causes.iter().find(|&&c| c >= id) {
            return Err(Error::UnknownCause(bad));
        }
        event.id = id;
        event.causes.sort_unstable();
        event.causes.dedup();
        self.link(&event);
        self.events.push(event);
        Ok(id)
    }

    fn link(&mut self, event: &Event) {
        let lane = self.lanes.entry(event.node).or_default();
        if let Some(&prev) = lane.last() {
            self.edges.insert((prev, event.id));
        }
        lane.push(event.id);
        for &c in &event.causes {
            if c != event.id {
                self.edges.insert((c, event.id));
            }
        }
    }

    /// Rebuild a trace from stored events without checking causes.
    pub fn from_events_unchecked(events: Vec<Event>) -> Self {
        let mut t = Self::new();
        for e in &events {
            t.link(e);
        }
        t.edges
            .retain(|&(a, b)| a < events.len() && b < events.len());
        t.events = events;
        t
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: EventId) -> Result<&Event> {
        self.events.get(id).ok_or(Error::UnknownEvent(id))
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn edges(&self) -> &BTreeSet<(EventId, EventId)> {
        &self.edges
    }

    pub fn lanes(&self) -> &BTreeMap<NodeId, Vec<EventId>> {
        &self.lanes
    }

    pub fn lane(&self, node: NodeId) -> &[EventId] {
        self.lanes.get(&node).map_or(&[], Vec::as_slice)
    }

    /// Strict order: true iff a path a → … → b exists.
    pub fn happened_before(&self, a: EventId, b: EventId) -> Result<bool> {
        self.event(a)?;
        self.event(b)?;
        Ok(dag::reachable_from(self.len(), &self.edges, a).contains(b))
    }

    /// Everything reachable from `e`, excluding `e`.
    pub fn future_cone(&self, e: EventId) -> Result<BTreeSet<EventId>> {
        self.event(e)?;
        let mut s: BTreeSet<_> = dag::reachable_from(self.len(), &self.edges, e)
            .iter()
            .collect();
        s.remove(&e);
        Ok(s)
    }

    /// Everything that reaches `e`, excluding `e`.
    pub fn past_cone(&self, e: EventId) -> Result<BTreeSet<EventId>> {
        self.event(e)?;
        let rev: BTreeSet<_> = self.edges.iter().map(|&(a, b)| (b, a)).collect();
        let mut s: BTreeSet<_> = dag::reachable_from(self.len(), &rev, e).iter().collect();
        s.remove(&e);
        Ok(s)
    }

    /// Nodes hosting at least one event in the future cone of `e`, plus
    /// `e`'s own node.
    pub fn cone_nodes(&self, e: EventId) -> Result<BTreeSet<NodeId>> {
        let mut nodes: BTreeSet<NodeId> = self
            .future_cone(e)?
            .into_iter()
            .map(|i| self.events[i].node)
            .collect();
        nodes.insert(self.events[e].node);
        Ok(nodes)
    }

    /// Transitive reduction of the causal edges.
    pub fn hasse_reduce(&self) -> Result<BTreeSet<(EventId, EventId)>> {
        dag::transitive_reduction(self.len(), &self.edges)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut findings = Vec::new();
        let n = self.len();
        for e in &self.events {
            for &c in &e.causes {
                if c >= n {
                    findings.push(Finding::UnknownCause {
                        event: e.id,
                        cause: c,
                    });
                }
            }
        }
        let closure = match dag::transitive_closure(n, &self.edges) {
            Ok(c) => Some(c),
            Err(_) => {
                findings.push(Finding::CycleDetected);
                None
            }
        };
        for (&node, lane) in &self.lanes {
            for w in lane.windows(2) {
                let (a, b) = (&self.events[w[0]], &self.events[w[1]]);
                if a.id >= b.id {
                    findings.push(Finding::LaneOrder { node, event: b.id });
                }
                if a.wall_step > b.wall_step {
                    findings.push(Finding::WallStepRegression { node, event: b.id });
                }
            }
        }
        let mut matched: BTreeMap<EventId, usize> = BTreeMap::new();
        for e in self.events.iter().filter(|e| e.kind == EventKind::Receive) {
            let sends: Vec<&Event> = e
                .causes
                .iter()
                .filter_map(|&c| self.events.get(c))
                .filter(|c| c.kind == EventKind::Send)
                .collect();
            let violation = |reason: &str| Finding::PairingViolation {
                event: e.id,
                reason: reason.to_owned(),
            };
            match sends.as_slice() {
                [s] => {
                    *matched.entry(s.id).or_default() += 1;
                    if s.id >= e.id || s.wall_step > e.wall_step {
                        findings.push(violation("receive precedes its send"));
                    } else if s.channel != e.channel {
                        findings.push(violation("channel differs from its send"));
                    } else if s.node == e.node {
                        findings.push(violation("send and receive on the same node"));
                    }
                }
                [] => findings.push(violation("receive cites no send")),
                _ => findings.push(violation("receive cites several sends")),
            }
        }
        for e in self.events.iter().filter(|e| e.kind == EventKind::Send) {
            match matched.get(&e.id).copied().unwrap_or(0) {
                1 => {}
                0 => findings.push(Finding::PairingViolation {
                    event: e.id,
                    reason: "send is never received".into(),
                }),
                _ => findings.push(Finding::PairingViolation {
                    event: e.id,
                    reason: "send is received more than once".into(),
                }),
            }
        }
        if let Some(closure) = closure {
            for e in self
                .events
                .iter()
                .filter(|e| e.kind == EventKind::ResourceConsume)
            {
                let Some(tag) = &e.resource else {
                    findings.push(Finding::ConsumeWithoutCreate { event: e.id });
                    continue;
                };
                let created = self.events.iter().any(|c| {
                    c.kind == EventKind::ResourceCreate
                        && c.resource.as_ref().is_some_and(|t| {
                            t.species == tag.species && same_parties(&t.parties, &tag.parties)
                        })
                        && closure[c.id].contains(e.id)
                });
                if !created {
                    findings.push(Finding::ConsumeWithoutCreate { event: e.id });
                }
            }
        }
        ValidationReport { findings }
    }
}

fn same_parties(a: &[NodeId], b: &[NodeId]) -> bool {
    let sa: BTreeSet<_> = a.iter().collect();
    let sb: BTreeSet<_> = b.iter().collect();
    sa == sb
}
