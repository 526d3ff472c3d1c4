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

use serde::{Deserialize, Serialize};

use crate::network::{NodeId, OpClass};

pub type EventId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Local,
    Send,
    Receive,
    ResourceCreate,
    ResourceConsume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Classical,
    Quantum,
    None,
}

/// Which resource instance a create/consume event refers to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTag {
    pub species: String,
    pub parties: Vec<NodeId>,
    pub instance: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub id: EventId,
    pub node: NodeId,
    pub kind: EventKind,
    pub channel: Channel,
    pub post_consumption: bool,
    pub op_class: OpClass,
    pub noisy: bool,
    pub units: u64,
    pub unit_label: String,
    pub wall_step: u64,
    pub causes: Vec<EventId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<ResourceTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
}

impl Event {
    fn base(node: NodeId, kind: EventKind, channel: Channel) -> Self {
        Self {
            id: 0,
            node,
            kind,
            channel,
            post_consumption: false,
            op_class: OpClass::TypeI,
            noisy: false,
            units: 0,
            unit_label: String::new(),
            wall_step: 0,
            causes: Vec::new(),
            resource: None,
            payload: None,
        }
    }

    pub fn local(node: NodeId) -> Self {
        Self::base(node, EventKind::Local, Channel::None)
    }

    pub fn send(node: NodeId, channel: Channel, units: u64, unit_label: &str) -> Self {
        let mut e = Self::base(node, EventKind::Send, channel);
        e.units = units;
        e.unit_label = unit_label.to_owned();
        e
    }

    pub fn receive(node: NodeId, send: &Event) -> Self {
        let mut e = Self::base(node, EventKind::Receive, send.channel);
        e.units = send.units;
        e.unit_label = send.unit_label.clone();
        e.post_consumption = send.post_consumption;
        e.causes.push(send.id);
        e
    }

    pub fn create(node: NodeId, tag: ResourceTag) -> Self {
        let mut e = Self::base(node, EventKind::ResourceCreate, Channel::None);
        e.units = 1;
        e.unit_label = tag.species.clone();
        e.resource = Some(tag);
        e
    }

    pub fn consume(node: NodeId, tag: ResourceTag) -> Self {
        let mut e = Self::base(node, EventKind::ResourceConsume, Channel::None);
        e.units = 1;
        e.unit_label = tag.species.clone();
        e.resource = Some(tag);
        e
    }

    pub fn at_step(mut self, step: u64) -> Self {
        self.wall_step = step;
        self
    }

    pub fn caused_by(mut self, ids: impl IntoIterator<Item = EventId>) -> Self {
        self.causes.extend(ids);
        self
    }

    pub fn after_consumption(mut self) -> Self {
        self.post_consumption = true;
        self
    }

    pub fn type_ii(mut self) -> Self {
        self.op_class = OpClass::TypeII;
        self
    }

    pub fn with_class(mut self, class: OpClass) -> Self {
        self.op_class = class;
        self
    }

    pub fn noisy(mut self, noisy: bool) -> Self {
        self.noisy = noisy;
        self
    }

    pub fn with_units(mut self, units: u64, label: &str) -> Self {
        self.units = units;
        self.unit_label = label.to_owned();
        self
    }

    pub fn with_payload(mut self, payload: impl Into<String>) -> Self {
        self.payload = Some(payload.into());
        self
    }
}
