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

use std::collections::BTreeSet;
use std::sync::Arc;

use super::*;
use crate::network::{build_network, Endowment, NodeSpec};
use crate::protocol::{EngineKind, ProtocolRun};
use crate::rng::seeded;
use crate::trace::ResourceTag;

fn line_run(n: usize, seed: u64) -> ProtocolRun {
    let specs: Vec<_> = (0..n).map(|i| NodeSpec::new(i, 1)).collect();
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    let net = Arc::new(build_network(&specs, &edges, Endowment::Infinite).unwrap());
    ProtocolRun::new(net, EngineKind::Dense, seeded(seed)).unwrap()
}

fn teleport_trace(seed: u64) -> CausalTrace {
    let mut r = line_run(2, seed);
    r.teleport(NodeId(0), 0, NodeId(1)).unwrap();
    r.trace().clone()
}

fn swap_trace() -> CausalTrace {
    let mut r = line_run(3, 5);
    r.entanglement_swap(NodeId(1), NodeId(0), NodeId(2))
        .unwrap();
    r.trace().clone()
}

fn single_local(noisy: bool) -> CausalTrace {
    let mut t = CausalTrace::new();
    t.record(Event::local(NodeId(0)).noisy(noisy)).unwrap();
    t
}

fn count(haystack: &str, needle: &str) -> usize {
    haystack.matches(needle).count()
}

#[test]
fn empty_trace_renders_frame_only() {
    let dot = to_dot(
        &CausalTrace::new(),
        &DiagramStyle::default(),
        RenderMode::Full,
    )
    .unwrap();
    assert_eq!(
        dot,
        "digraph trace {\n  rankdir=LR;\n  node [shape=point, width=0.1];\n  edge [arrowsize=0.6];\n}\n"
    );
    assert_eq!(to_jsonl(&CausalTrace::new()), "");
}

#[test]
fn cyclic_trace_is_rejected() {
    let mut a = Event::local(NodeId(0));
    a.id = 0;
    a.causes = vec![1];
    let mut b = Event::local(NodeId(1));
    b.id = 1;
    b.causes = vec![0];
    let t = CausalTrace::from_events_unchecked(vec![a, b]);
    let style = DiagramStyle::default();
    assert!(matches!(
        to_dot(&t, &style, RenderMode::Full),
        Err(Error::InvalidTrace(_))
    ));
    assert!(matches!(
        to_dot(&t, &style, RenderMode::Hasse),
        Err(Error::InvalidTrace(_))
    ));
    assert!(matches!(to_svg(&t, &style), Err(Error::InvalidTrace(_))));
}

#[test]
fn dot_lists_each_event_and_edge_once() {
    let t = teleport_trace(3);
    let style = DiagramStyle::default();
    let full = to_dot(&t, &style, RenderMode::Full).unwrap();
    for e in t.events() {
        assert_eq!(count(&full, &format!("    e{} [", e.id)), 1);
    }
    for &(a, b) in t.edges() {
        assert_eq!(
            count(&full, &format!("  e{a} -> e{b} [class=lane"))
                + count(&full, &format!("  e{a} -> e{b} [class=message"))
                + count(&full, &format!("  e{a} -> e{b} [class=causal")),
            1
        );
    }
    let causal = full
        .lines()
        .filter(|l| l.contains("->") && !l.contains("class=span"))
        .count();
    assert_eq!(causal, t.edges().len());

    let hasse = to_dot(&t, &style, RenderMode::Hasse).unwrap();
    let reduced = hasse
        .lines()
        .filter(|l| l.contains("->") && !l.contains("class=span"))
        .count();
    assert_eq!(reduced, t.hasse_reduce().unwrap().len());
    assert!(reduced <= causal);
}

#[test]
fn teleport_messages_are_dashed_and_doubled() {
    let t = teleport_trace(1);
    let dot = to_dot(&t, &DiagramStyle::default(), RenderMode::Full).unwrap();
    let messages: Vec<&str> = dot
        .lines()
        .filter(|l| l.contains("class=message"))
        .collect();
    let classical = t
        .events()
        .iter()
        .filter(|e| e.kind == EventKind::Send && e.channel == Channel::Classical)
        .count();
    let dashed_double = messages
        .iter()
        .filter(|l| l.contains("style=dashed") && l.contains("penwidth=2"))
        .count();
    assert_eq!(classical, 2);
    assert_eq!(dashed_double, 2);
    assert!(messages.iter().all(|l| l.contains("label=\"1 ")));
}

#[test]
fn rendering_is_deterministic() {
    let style = DiagramStyle::default();
    let (a, b) = (teleport_trace(9), teleport_trace(9));
    assert_eq!(
        to_dot(&a, &style, RenderMode::Full).unwrap(),
        to_dot(&b, &style, RenderMode::Full).unwrap()
    );
    assert_eq!(to_svg(&a, &style).unwrap(), to_svg(&b, &style).unwrap());
}

#[test]
fn swap_svg_has_three_lanes_and_every_span() {
    let t = swap_trace();
    let svg = to_svg(&t, &DiagramStyle::default()).unwrap();
    assert_eq!(count(&svg, "<line class=\"lane\""), 3);

    let mut tags = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for e in t
        .events()
        .iter()
        .filter(|e| e.kind == EventKind::ResourceCreate)
    {
        let tag = e.resource.as_ref().unwrap();
        let key = (
            tag.species.clone(),
            tag.instance,
            tag.parties.iter().collect::<BTreeSet<_>>(),
        );
        if !seen.insert(key.clone()) {
            tags.insert(key);
        }
    }
    assert_eq!(count(&svg, "class=\"span pair curve\""), tags.len());
    assert!(tags
        .iter()
        .any(|(_, _, parties)| parties.contains(&NodeId(0)) && parties.contains(&NodeId(2))));
    assert_eq!(count(&svg, "<g class=\"event "), t.len());
}

#[test]
fn single_local_event_is_one_dot() {
    let svg = to_svg(&single_local(false), &DiagramStyle::default()).unwrap();
    assert_eq!(count(&svg, "<line class=\"lane\""), 1);
    assert_eq!(count(&svg, "class=\"marker dot\""), 1);
    assert_eq!(count(&svg, "class=\"marker"), 1);
}

#[test]
fn noisy_event_gets_a_cross() {
    let svg = to_svg(&single_local(true), &DiagramStyle::default()).unwrap();
    assert_eq!(count(&svg, "class=\"marker cross\""), 1);
    let dot = to_dot(
        &single_local(true),
        &DiagramStyle::default(),
        RenderMode::Full,
    )
    .unwrap();
    assert!(dot.contains("label=\"×\""));
}

#[test]
fn every_attribute_combination_has_one_glyph() {
    let style = DiagramStyle::default();
    let kinds = [
        EventKind::Local,
        EventKind::Send,
        EventKind::Receive,
        EventKind::ResourceCreate,
        EventKind::ResourceConsume,
    ];
    for kind in kinds {
        for channel in [Channel::Classical, Channel::Quantum, Channel::None] {
            for class in [OpClass::TypeI, OpClass::TypeII] {
                for noisy in [false, true] {
                    for post in [false, true] {
                        let mut e = Event::local(NodeId(0));
                        e.kind = kind;
                        e.channel = channel;
                        e.op_class = class;
                        e.noisy = noisy;
                        e.post_consumption = post;
                        let expect = if noisy {
                            Marker::Cross
                        } else if kind == EventKind::Local && class == OpClass::TypeII {
                            Marker::KetDot
                        } else {
                            Marker::Dot
                        };
                        assert_eq!(style.marker(&e), expect);
                        let g = style.message(&e);
                        assert_eq!(g.double, post);
                        assert_eq!(g.pen_width, if post { 2.0 } else { 1.0 });
                    }
                }
            }
        }
    }
}

#[test]
fn style_overrides_apply() {
    let style = DiagramStyle::from_json(r#"{"classical": "dotted", "type_ii": "dot"}"#).unwrap();
    assert_eq!(style.classical, Stroke::Dotted);
    assert_eq!(style.quantum, Stroke::Solid);
    let dot = to_dot(&teleport_trace(2), &style, RenderMode::Full).unwrap();
    assert!(dot.contains("style=dotted, penwidth=2"));
    assert!(matches!(
        DiagramStyle::from_json("{\n  \"colour\": 1}"),
        Err(Error::Parse { line: 2, .. })
    ));
    assert!(DiagramStyle::from_json(r#"{"pitch_x": 0}"#).is_err());
}

#[test]
fn multiparty_span_is_a_w_bracket() {
    let mut t = CausalTrace::new();
    let tag = ResourceTag {
        species: "[qqq]".into(),
        parties: vec![NodeId(0), NodeId(1), NodeId(2)],
        instance: 0,
    };
    for i in 0..3 {
        t.record(Event::create(NodeId(i), tag.clone())).unwrap();
    }
    let svg = to_svg(&t, &DiagramStyle::default()).unwrap();
    assert_eq!(count(&svg, "class=\"span multiparty w-shape\""), 1);
    let dot = to_dot(&t, &DiagramStyle::default(), RenderMode::Full).unwrap();
    assert_eq!(count(&dot, "class=span"), 2);
    assert_eq!(span_count(&t), 1);
}

#[test]
fn jsonl_round_trips_bytes() {
    let t = swap_trace();
    let text = to_jsonl(&t);
    assert_eq!(text.lines().count(), t.len());
    let back = read_jsonl(&text).unwrap();
    assert_eq!(back, t);
    assert_eq!(to_jsonl(&back), text);
}

#[test]
fn thousand_events_give_thousand_lines() {
    let mut t = CausalTrace::new();
    for i in 0..1000 {
        t.record(Event::local(NodeId(i % 7)).at_step(i as u64))
            .unwrap();
    }
    assert_eq!(to_jsonl(&t).lines().count(), 1000);
}

#[test]
fn malformed_jsonl_reports_line() {
    let mut text = to_jsonl(&single_local(false));
    text.push_str("{\"id\": 1,\n");
    match read_jsonl(&text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
