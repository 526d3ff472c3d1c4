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

//! Which edges act in which round.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkGraph, NodeId};
use crate::rng::RngStream;

pub type Schedule = Vec<Vec<(NodeId, NodeId)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePolicy {
    /// Cycle through a fixed edge coloring.
    #[default]
    Sweep,
    /// A fresh random maximal matching every round.
    RandomEdgeMatching,
}

type ColorClass = (Vec<(NodeId, NodeId)>, BTreeSet<NodeId>);

/// Greedy proper edge coloring over edges in sorted order.
fn color_classes(net: &NetworkGraph) -> Vec<Vec<(NodeId, NodeId)>> {
    let mut classes: Vec<ColorClass> = Vec::new();
    for &(a, b) in net.edges() {
        match classes
            .iter_mut()
            .find(|(_, used)| !used.contains(&a) && !used.contains(&b))
        {
            Some((list, used)) => {
                list.push((a, b));
                used.extend([a, b]);
            }
            None => classes.push((vec![(a, b)], BTreeSet::from([a, b]))),
        }
    }
    classes.into_iter().map(|(l, _)| l).collect()
}

fn random_matching(net: &NetworkGraph, rng: &mut RngStream) -> Vec<(NodeId, NodeId)> {
    let mut edges: Vec<_> = net.edges().iter().copied().collect();
    edges.shuffle(rng);
    let mut used = BTreeSet::new();
    let mut out: Vec<_> = edges
        .into_iter()
        .filter(|&(a, b)| {
            let free = !used.contains(&a) && !used.contains(&b);
            if free {
                used.extend([a, b]);
            }
            free
        })
        .collect();
    out.sort_unstable();
    out
}

/// One matching of edges per round.
pub fn build_schedule(
    net: &NetworkGraph,
    rounds: usize,
    policy: SchedulePolicy,
    rng: &mut RngStream,
) -> Result<Schedule> {
    if rounds == 0 {
        return Err(Error::BadParams(
            "a schedule needs at least one round".into(),
        ));
    }
    if net.edges().is_empty() {
        return Ok(vec![Vec::new(); rounds]);
    }
    Ok(match policy {
        SchedulePolicy::Sweep => {
            let classes = color_classes(net);
            (0..rounds)
                .map(|k| classes[k % classes.len()].clone())
                .collect()
        }
        SchedulePolicy::RandomEdgeMatching => {
            (0..rounds).map(|_| random_matching(net, rng)).collect()
        }
    })
}

/// Check that every round is a matching over existing edges.
pub fn check_schedule(net: &NetworkGraph, schedule: &Schedule) -> Result<()> {
    for (k, round) in schedule.iter().enumerate() {
        let mut used = BTreeSet::new();
        for &(a, b) in round {
            if !net.has_edge(a, b) {
                return Err(Error::NotNeighbors(a, b));
            }
            if !used.insert(a) || !used.insert(b) {
                return Err(Error::BadParams(format!("round {k} uses a node twice")));
            }
        }
    }
    Ok(())
}

/// Nodes reachable from `src` over the union of scheduled edges.
pub fn schedule_reach(net: &NetworkGraph, schedule: &Schedule, src: NodeId) -> BTreeSet<NodeId> {
    let union: BTreeSet<(NodeId, NodeId)> = schedule.iter().flatten().copied().collect();
    let mut seen = BTreeSet::from([src]);
    let mut stack = vec![src];
    while let Some(u) = stack.pop() {
        for &(a, b) in &union {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    debug_assert!(seen.iter().all(|n| n.0 < net.node_count()));
    seen
}
