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
use std::fmt::Write;

use super::{
    checked, edge_kind, spans, unit_text, DiagramStyle, EdgeKind, LineGlyph, Marker, SpanShape,
};
use crate::error::Result;
use crate::network::NodeId;
use crate::trace::{CausalTrace, EventKind};

const LEFT: f64 = 64.0;
const TOP: f64 = 32.0;
const RIGHT: f64 = 32.0;

struct Layout {
    lanes: Vec<NodeId>,
    x: Vec<f64>,
    y: Vec<f64>,
    width: f64,
    height: f64,
}

/// Columns advance with `wall_step`. Events sharing a step on one lane get
/// consecutive sub-columns, and every lane reserves the widest step.
fn layout(trace: &CausalTrace, style: &DiagramStyle) -> Layout {
    let lanes: Vec<NodeId> = trace.lanes().keys().copied().collect();
    let row: BTreeMap<NodeId, usize> = lanes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut count: BTreeMap<(u64, NodeId), usize> = BTreeMap::new();
    let mut slot = vec![0usize; trace.len()];
    for e in trace.events() {
        let c = count.entry((e.wall_step, e.node)).or_default();
        slot[e.id] = *c;
        *c += 1;
    }
    let mut width_of: BTreeMap<u64, usize> = BTreeMap::new();
    for (&(step, _), &c) in &count {
        let w = width_of.entry(step).or_default();
        *w = (*w).max(c);
    }
    let mut start: BTreeMap<u64, usize> = BTreeMap::new();
    let mut cols = 0;
    for (&step, &w) in &width_of {
        start.insert(step, cols);
        cols += w;
    }
    let x = trace
        .events()
        .iter()
        .map(|e| LEFT + (start[&e.wall_step] + slot[e.id]) as f64 * style.pitch_x)
        .collect();
    let y = trace
        .events()
        .iter()
        .map(|e| TOP + row[&e.node] as f64 * style.pitch_y)
        .collect();
    let width = LEFT + cols.saturating_sub(1) as f64 * style.pitch_x + RIGHT;
    let height = 2.0 * TOP + lanes.len().saturating_sub(1) as f64 * style.pitch_y;
    Layout {
        lanes,
        x,
        y,
        width,
        height,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn dash(glyph: &LineGlyph) -> String {
    glyph
        .stroke
        .dasharray()
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default()
}

fn span_path(points: &[(f64, f64)], shape: SpanShape, bulge: f64) -> String {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut d = format!("M {:.1} {:.1}", pts[0].0, pts[0].1);
    match shape {
        SpanShape::Angle => {
            let ax = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - bulge;
            let ay = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            for p in &pts[1..] {
                let _ = write!(d, " L {ax:.1} {ay:.1} L {:.1} {:.1}", p.0, p.1);
            }
        }
        SpanShape::Curve | SpanShape::WShape => {
            for w in pts.windows(2) {
                let hx = w[0].0.min(w[1].0) - bulge;
                let hy = (w[0].1 + w[1].1) / 2.0;
                let op = if shape == SpanShape::Curve { "Q" } else { "L" };
                let sep = if op == "Q" { "" } else { " L" };
                let _ = write!(d, " {op} {hx:.1} {hy:.1}{sep} {:.1} {:.1}", w[1].0, w[1].1);
            }
        }
    }
    d
}

/// Hand-laid SVG: one horizontal lane per node, time running left to right,
/// slanted message arrows and curved resource spans.
pub fn to_svg(trace: &CausalTrace, style: &DiagramStyle) -> Result<String> {
    checked(trace)?;
    let lay = layout(trace, style);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.1}\" height=\"{h:.1}\" viewBox=\"0 0 {w:.1} {h:.1}\" font-family=\"sans-serif\" font-size=\"12\">",
        w = lay.width,
        h = lay.height
    );
    out.push_str("<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>\n");

    out.push_str("<g class=\"lanes\">\n");
    let lane_dash = style
        .lane
        .dasharray()
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default();
    for (i, node) in lay.lanes.iter().enumerate() {
        let y = TOP + i as f64 * style.pitch_y;
        let _ = writeln!(
            out,
            "<line class=\"lane\" x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#999\"{lane_dash}/>",
            LEFT - 16.0,
            lay.width - RIGHT / 2.0
        );
        let _ = writeln!(
            out,
            "<text class=\"lane-label\" x=\"8\" y=\"{:.1}\">{}</text>",
            y + 4.0,
            node
        );
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"spans\">\n");
    for ids in spans(trace) {
        let shape = style.span(ids.len());
        let points: Vec<(f64, f64)> = ids.iter().map(|&i| (lay.x[i], lay.y[i])).collect();
        let kind = if ids.len() > 2 { "multiparty" } else { "pair" };
        let _ = writeln!(
            out,
            "<path class=\"span {kind} {}\" d=\"{}\" fill=\"none\" stroke=\"#555\" stroke-width=\"{:.1}\"><title>{}</title></path>",
            shape.class(),
            span_path(&points, shape, style.pitch_x * 0.75),
            style.pen_width,
            escape(&trace.events()[ids[0]].unit_label)
        );
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"messages\">\n");
    for &(a, b) in trace.edges() {
        let (x1, y1, x2, y2) = (lay.x[a], lay.y[a], lay.x[b], lay.y[b]);
        match edge_kind(trace, a, b) {
            EdgeKind::Lane => {}
            EdgeKind::Causal => {
                let _ = writeln!(
                    out,
                    "<line class=\"causal\" x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"#777\" stroke-width=\"{:.1}\" marker-end=\"url(#arrow)\"/>",
                    style.pen_width
                );
            }
            EdgeKind::Message => {
                let send = &trace.events()[a];
                let g = style.message(send);
                let channel = if send.channel == crate::trace::Channel::Quantum {
                    "quantum"
                } else {
                    "classical"
                };
                let double = if g.double { " double" } else { "" };
                let _ = writeln!(out, "<g class=\"message {channel}{double}\">");
                let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt().max(1e-9);
                let (nx, ny) = (-(y2 - y1) / len, (x2 - x1) / len);
                let offsets: &[f64] = if g.double { &[-1.5, 1.5] } else { &[0.0] };
                for &o in offsets {
                    let _ = writeln!(
                        out,
                        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"{:.1}\"{} marker-end=\"url(#arrow)\"/>",
                        x1 + o * nx,
                        y1 + o * ny,
                        x2 + o * nx,
                        y2 + o * ny,
                        style.pen_width,
                        dash(&g)
                    );
                }
                let _ = writeln!(
                    out,
                    "<text class=\"units\" x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\">{}</text>",
                    (x1 + x2) / 2.0 + 4.0,
                    (y1 + y2) / 2.0,
                    escape(&unit_text(send))
                );
                out.push_str("</g>\n");
            }
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"events\">\n");
    for e in trace.events() {
        let (x, y) = (lay.x[e.id], lay.y[e.id]);
        let kind = match e.kind {
            EventKind::Local => "local",
            EventKind::Send => "send",
            EventKind::Receive => "receive",
            EventKind::ResourceCreate => "create",
            EventKind::ResourceConsume => "consume",
        };
        let m = style.marker(e);
        let _ = write!(out, "<g class=\"event {kind}\" id=\"e{}\">", e.id);
        let _ = write!(
            out,
            "<title>{}</title>",
            escape(&format!("e{} {kind} t={}", e.id, e.wall_step))
        );
        match m {
            Marker::Dot => {
                let _ = write!(
                    out,
                    "<circle class=\"marker dot\" cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3.5\"/>"
                );
            }
            Marker::Cross => {
                let r = 5.0;
                let _ = write!(
                    out,
                    "<path class=\"marker cross\" d=\"M {:.1} {:.1} L {:.1} {:.1} M {:.1} {:.1} L {:.1} {:.1}\" stroke=\"black\" stroke-width=\"2\"/>",
                    x - r, y - r, x + r, y + r, x - r, y + r, x + r, y - r
                );
            }
            Marker::KetDot => {
                let _ = write!(
                    out,
                    "<g class=\"marker ket-dot\"><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"16\">|</text><circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3\"/><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"16\">⟩</text></g>",
                    x - 9.0, y + 5.5, x + 4.0, y + 5.5
                );
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
