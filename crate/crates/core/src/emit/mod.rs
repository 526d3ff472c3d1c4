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

//! Space-time diagrams (DOT, SVG) and the JSONL event stream.

mod dot;
mod jsonl;
mod svg;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dot::to_dot;
pub use jsonl::{read_jsonl, to_jsonl};
pub use svg::to_svg;

use crate::error::{Error, Result};
use crate::network::{NodeId, OpClass};
use crate::trace::{CausalTrace, Channel, Event, EventId, EventKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    /// Every causal edge, including lane edges implied by others.
    #[default]
    Full,
    /// Transitively reduced edges only.
    Hasse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stroke {
    Solid,
    Dotted,
    Dashed,
}

impl Stroke {
    fn dot_name(self) -> &'static str {
        match self {
            Stroke::Solid => "solid",
            Stroke::Dotted => "dotted",
            Stroke::Dashed => "dashed",
        }
    }

    fn dasharray(self) -> Option<&'static str> {
        match self {
            Stroke::Solid => None,
            Stroke::Dotted => Some("1.5 3"),
            Stroke::Dashed => Some("6 4"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    Dot,
    Cross,
    KetDot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanShape {
    Curve,
    Angle,
    WShape,
}

impl SpanShape {
    fn class(self) -> &'static str {
        match self {
            SpanShape::Curve => "curve",
            SpanShape::Angle => "angle",
            SpanShape::WShape => "w-shape",
        }
    }
}

/// How a message edge is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGlyph {
    pub stroke: Stroke,
    pub double: bool,
    pub pen_width: f64,
}

/// Glyph map for both renderers. Any subset of fields can be overridden
/// from a JSON style file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagramStyle {
    pub classical: Stroke,
    pub quantum: Stroke,
    pub lane: Stroke,
    pub pen_width: f64,
    /// Pen-width factor for messages sent after a resource was consumed.
    pub post_consumption_scale: f64,
    pub type_i: Marker,
    pub type_ii: Marker,
    pub noisy: Marker,
    pub pair_span: SpanShape,
    pub multiparty_span: SpanShape,
    pub pitch_x: f64,
    pub pitch_y: f64,
}

impl Default for DiagramStyle {
    fn default() -> Self {
        Self {
            classical: Stroke::Dashed,
            quantum: Stroke::Solid,
            lane: Stroke::Solid,
            pen_width: 1.0,
            post_consumption_scale: 2.0,
            type_i: Marker::Dot,
            type_ii: Marker::KetDot,
            noisy: Marker::Cross,
            pair_span: SpanShape::Curve,
            multiparty_span: SpanShape::WShape,
            pitch_x: 48.0,
            pitch_y: 64.0,
        }
    }
}

impl DiagramStyle {
    pub fn from_json(text: &str) -> Result<Self> {
        let style: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if !(style.pitch_x > 0.0 && style.pitch_y > 0.0 && style.pen_width > 0.0) {
            return Err(Error::BadParams(
                "pitches and pen width must be positive".into(),
            ));
        }
        if style.post_consumption_scale < 1.0 {
            return Err(Error::BadParams(
                "post_consumption_scale must be at least 1".into(),
            ));
        }
        Ok(style)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&crate::error::read_text(path)?)
    }

    pub fn marker(&self, e: &Event) -> Marker {
        if e.noisy {
            self.noisy
        } else if e.kind == EventKind::Local && e.op_class == OpClass::TypeII {
            self.type_ii
        } else {
            self.type_i
        }
    }

    /// Glyph for the message leaving a send event.
    pub fn message(&self, send: &Event) -> LineGlyph {
        let stroke = match send.channel {
            Channel::Classical => self.classical,
            Channel::Quantum => self.quantum,
            Channel::None => self.lane,
        };
        let double = send.post_consumption;
        let scale = if double {
            self.post_consumption_scale
        } else {
            1.0
        };
        LineGlyph {
            stroke,
            double,
            pen_width: self.pen_width * scale,
        }
    }

    pub fn span(&self, parties: usize) -> SpanShape {
        if parties > 2 {
            self.multiparty_span
        } else {
            self.pair_span
        }
    }
}

fn checked(trace: &CausalTrace) -> Result<()> {
    let report = trace.validate();
    if report.is_clean() {
        return Ok(());
    }
    let detail = report
        .findings
        .iter()
        .map(|f| format!("{f:?}"))
        .collect::<Vec<_>>()
        .join("; ");
    Err(Error::InvalidTrace(detail))
}

fn edges(trace: &CausalTrace, mode: RenderMode) -> Result<Vec<(EventId, EventId)>> {
    Ok(match mode {
        RenderMode::Full => trace.edges().iter().copied().collect(),
        RenderMode::Hasse => trace.hasse_reduce()?.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeKind {
    Lane,
    Message,
    Causal,
}

fn edge_kind(trace: &CausalTrace, a: EventId, b: EventId) -> EdgeKind {
    let (ea, eb) = (&trace.events()[a], &trace.events()[b]);
    if ea.kind == EventKind::Send && eb.kind == EventKind::Receive && eb.causes.contains(&a) {
        EdgeKind::Message
    } else if ea.node == eb.node {
        EdgeKind::Lane
    } else {
        EdgeKind::Causal
    }
}

/// Resource instances created at two or more parties, keyed by
/// (species, sorted parties, instance); values are create events by id.
fn spans(trace: &CausalTrace) -> Vec<Vec<EventId>> {
    let mut groups: BTreeMap<(String, Vec<NodeId>, u64), Vec<EventId>> = BTreeMap::new();
    for e in trace.events() {
        if e.kind != EventKind::ResourceCreate {
            continue;
        }
        if let Some(tag) = &e.resource {
            let mut parties = tag.parties.clone();
            parties.sort();
            groups
                .entry((tag.species.clone(), parties, tag.instance))
                .or_default()
                .push(e.id);
        }
    }
    groups.into_values().filter(|ids| ids.len() >= 2).collect()
}

/// Number of multi-party resource spans a rendering draws.
pub fn span_count(trace: &CausalTrace) -> usize {
    spans(trace).len()
}

fn unit_text(e: &Event) -> String {
    if e.unit_label.is_empty() {
        e.units.to_string()
    } else {
        format!("{} {}", e.units, e.unit_label)
    }
}

#[cfg(test)]
mod tests;
