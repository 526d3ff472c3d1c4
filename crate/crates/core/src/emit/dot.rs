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

use std::fmt::Write;

use super::{
    checked, edge_kind, edges, spans, unit_text, DiagramStyle, EdgeKind, Marker, RenderMode,
};
use crate::error::Result;
use crate::trace::{CausalTrace, EventKind};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::Local => "local",
        EventKind::Send => "send",
        EventKind::Receive => "receive",
        EventKind::ResourceCreate => "create",
        EventKind::ResourceConsume => "consume",
    }
}

/// Graphviz rendering: one cluster per node lane, time running left to
/// right. Causal edges carry `class=lane|message|causal`; resource spans are
/// extra undirected `class=span` edges that do not constrain the layout.
pub fn to_dot(trace: &CausalTrace, style: &DiagramStyle, mode: RenderMode) -> Result<String> {
    checked(trace)?;
    let edge_list = edges(trace, mode)?;
    let mut out = String::new();
    out.push_str("digraph trace {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=point, width=0.1];\n");
    out.push_str("  edge [arrowsize=0.6];\n");

    for (node, lane) in trace.lanes() {
        let _ = writeln!(out, "  subgraph cluster_{} {{", node.index());
        let _ = writeln!(out, "    label={};", quote(&node.to_string()));
        out.push_str("    style=invis;\n");
        for &id in lane {
            let e = &trace.events()[id];
            let shape = match style.marker(e) {
                Marker::Dot => "shape=point".to_owned(),
                Marker::Cross => format!("shape=plaintext, label={}", quote("×")),
                Marker::KetDot => format!("shape=plaintext, label={}", quote("|•⟩")),
            };
            let mut tip = format!("{} t={}", kind_name(e.kind), e.wall_step);
            if let Some(p) = &e.payload {
                let _ = write!(tip, " {p}");
            }
            let _ = writeln!(out, "    e{id} [{shape}, tooltip={}];", quote(&tip));
        }
        out.push_str("  }\n");
    }

    for (a, b) in edge_list {
        let attrs = match edge_kind(trace, a, b) {
            EdgeKind::Lane => format!(
                "class=lane, style={}, arrowhead=none, color=gray50",
                style.lane.dot_name()
            ),
            EdgeKind::Causal => "class=causal, style=solid".to_owned(),
            EdgeKind::Message => {
                let send = &trace.events()[a];
                let g = style.message(send);
                format!(
                    "class=message, style={}, penwidth={}, label={}",
                    g.stroke.dot_name(),
                    g.pen_width,
                    quote(&unit_text(send))
                )
            }
        };
        let _ = writeln!(out, "  e{a} -> e{b} [{attrs}];");
    }

    for ids in spans(trace) {
        let shape = style.span(ids.len());
        let label = &trace.events()[ids[0]].unit_label;
        for w in ids.windows(2) {
            let _ = writeln!(
                out,
                "  e{} -> e{} [class=span, shape={}, dir=none, constraint=false, style=bold, color=gray30, tooltip={}];",
                w[0],
                w[1],
                shape.class(),
                quote(label)
            );
        }
    }
    out.push_str("}\n");
    Ok(out)
}
