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

use super::*;
use crate::network::{build_network, Endowment, NodeSpec};
use crate::rng::seeded;

fn complete(budgets: &[usize]) -> Arc<NetworkGraph> {
    let specs: Vec<_> = budgets
        .iter()
        .enumerate()
        .map(|(i, &q)| NodeSpec::new(i, q))
        .collect();
    let mut edges = Vec::new();
    for a in 0..budgets.len() {
        for b in a + 1..budgets.len() {
            edges.push((a, b));
        }
    }
    Arc::new(build_network(&specs, &edges, Endowment::Infinite).unwrap())
}

fn path(n: usize) -> Arc<NetworkGraph> {
    let specs: Vec<_> = (0..n).map(|i| NodeSpec::new(i, 1)).collect();
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Arc::new(build_network(&specs, &edges, Endowment::Infinite).unwrap())
}

fn p(i: usize) -> NodeId {
    NodeId(i)
}

#[test]
fn sweep_on_a_path_alternates_edges() {
    let s = build_schedule(&path(3), 2, SchedulePolicy::Sweep, &mut seeded(0)).unwrap();
    assert_eq!(s, vec![vec![(p(0), p(1))], vec![(p(1), p(2))]]);
    let s = build_schedule(&path(2), 1, SchedulePolicy::Sweep, &mut seeded(0)).unwrap();
    assert_eq!(s, vec![vec![(p(0), p(1))]]);
    assert!(build_schedule(&path(2), 0, SchedulePolicy::Sweep, &mut seeded(0)).is_err());
}

#[test]
fn random_matchings_replay_and_are_matchings() {
    let net = complete(&[1; 6]);
    let a = build_schedule(&net, 10, SchedulePolicy::RandomEdgeMatching, &mut seeded(5)).unwrap();
    let b = build_schedule(&net, 10, SchedulePolicy::RandomEdgeMatching, &mut seeded(5)).unwrap();
    assert_eq!(a, b);
    check_schedule(&net, &a).unwrap();
    assert!(a.iter().all(|r| r.len() == 3));
}

#[test]
fn bound_values() {
    assert!((decoupling_bound(3, 13) / 0.03125 - 1.0).abs() < 0.02);
    assert!((decoupling_bound(5, 15) / 0.03125 - 1.0).abs() < 0.02);
    assert!(decoupling_bound(1, 11) <= 0.03125);
    assert_eq!(decoupling_bound(0, 5), 0.0);
    assert!((decoupling_bound(2, 4) - (15.0f64 / 65.0).sqrt()).abs() < 1e-12);
    assert!((decoupling_bound(2, 5) - (15.0f64 / 129.0).sqrt()).abs() < 1e-12);
    assert!((decoupling_bound(600, 620) - 2f64.powi(-10)).abs() < 1e-15);
}

#[test]
fn query_cost_classes() {
    assert_eq!(query_cost_estimate(12, 0).class, "poly(12)");
    assert_eq!(query_cost_estimate(12, 12).class, "poly(12)·exp(12)");
    let empty = query_cost_estimate(0, 0);
    assert_eq!((empty.n, empty.t), (0, 0));
    assert_eq!(empty.to_string(), "poly(0) (n=0, t=0)");
}

#[test]
fn deviation_of_pure_and_bell_halves() {
    let mut s = dense::PureState::zero(3).unwrap();
    s.bell_pair(0, 1).unwrap();
    let q = QuantumState::Dense(s);
    assert!(decoupling_deviation(&q, &[0]).unwrap().abs() < 1e-12);
    let whole = decoupling_deviation(&q, &[0, 1, 2]).unwrap();
    assert!((whole - 2.0 * (1.0 - 1.0 / 8.0)).abs() < 1e-12);
}

#[test]
fn identity_source_leaves_the_state_alone() {
    let net = complete(&[1, 2, 2]);
    let sc = ScramblingScenario::new(net, p(0), 4, GateSource::Identity, SchedulePolicy::Sweep, 1)
        .unwrap();
    let a = run_scrambling(&sc, seeded(3)).unwrap();
    let sc0 = ScramblingScenario::new(
        sc.network().clone(),
        p(0),
        1,
        GateSource::Identity,
        SchedulePolicy::Sweep,
        1,
    )
    .unwrap()
    .with_schedule(vec![vec![]])
    .unwrap();
    let b = run_scrambling(&sc0, seeded(3)).unwrap();
    let diff = a
        .run
        .wire_frame_state()
        .unwrap()
        .max_abs_diff(&b.run.wire_frame_state().unwrap());
    assert!(diff < 1e-10, "{diff}");
    assert!(a.run.trace().validate().is_clean());
}

#[test]
fn three_node_haar_run_has_the_compiled_pattern() {
    use crate::network::OpClass;
    use crate::trace::{Channel, EventKind};
    let net = path(3);
    let sc =
        ScramblingScenario::new(net, p(0), 2, GateSource::Haar, SchedulePolicy::Sweep, 9).unwrap();
    let sr = run_scrambling(&sc, seeded(9)).unwrap();
    let ev = sr.run.trace().events();
    assert_eq!(
        ev.iter().filter(|e| e.op_class == OpClass::TypeII).count(),
        2
    );
    // each unitary: one coin (no sends), two one-qubit teleports of two bits
    let bits: u64 = ev
        .iter()
        .filter(|e| e.kind == EventKind::Send && e.channel == Channel::Classical)
        .map(|e| e.units)
        .sum();
    assert_eq!(bits, 2 * 2 * 2);
    assert!(sr.run.trace().validate().is_clean());
    assert!(sr.coverage.covers_all);
    assert!(sr.warnings.is_empty());
}

#[test]
fn missing_node_breaks_coverage() {
    let net = path(5);
    let sched = vec![vec![(p(0), p(1))], vec![(p(1), p(2))], vec![(p(2), p(3))]];
    let sc = ScramblingScenario::new(net, p(0), 1, GateSource::Clifford, SchedulePolicy::Sweep, 2)
        .unwrap()
        .with_schedule(sched)
        .unwrap();
    let sr = run_scrambling(&sc, seeded(2)).unwrap();
    assert!(!sr.coverage.covers_all);
    assert!(!sr.coverage.reached.contains(&p(4)));
    assert!(sr
        .warnings
        .iter()
        .any(|w| w.starts_with("ScheduleDisconnected")));
}

#[test]
fn connected_schedule_covers_every_node() {
    let net = complete(&[1; 5]);
    let sc = ScramblingScenario::new(net, p(2), 5, GateSource::Clifford, SchedulePolicy::Sweep, 4)
        .unwrap();
    let sr = run_scrambling(&sc, seeded(4)).unwrap();
    assert!(sr.coverage.schedule_connected);
    assert_eq!(sr.coverage.reached.len(), 5);
}

#[test]
fn conservation_holds_with_a_data_center() {
    for d in 0..=3 {
        let sc = ScramblingScenario::new(
            complete(&[1, 2, 2, 2]),
            p(0),
            6,
            GateSource::Haar,
            SchedulePolicy::Sweep,
            10 + d as u64,
        )
        .unwrap()
        .with_data_center(d, None)
        .unwrap();
        let sr = run_scrambling(&sc, seeded(d as u64)).unwrap();
        let res = conservation_check(
            sr.state(),
            &sr.r_prime_positions().unwrap(),
            &sr.d_positions().unwrap(),
            &sr.v_positions().unwrap(),
        )
        .unwrap();
        assert!(res < 1e-9, "|D|={d}: {res}");
    }
}

#[test]
fn complementary_halves_share_the_secret() {
    // I(R′:E) + I(R′:B) = 2|R| for complementary E, B of a pure V_A run
    let sc = ScramblingScenario::new(
        complete(&[1, 2, 2]),
        p(0),
        6,
        GateSource::Haar,
        SchedulePolicy::Sweep,
        3,
    )
    .unwrap();
    let sr = run_scrambling(&sc, seeded(3)).unwrap();
    let v = sr.v_positions().unwrap();
    let rp = sr.r_prime_positions().unwrap();
    for split in 1..v.len() {
        let (e, b) = v.split_at(split);
        let sum = mutual_information(sr.state(), &rp, e).unwrap()
            + mutual_information(sr.state(), &rp, b).unwrap();
        assert!((sum - 2.0).abs() < 1e-9);
    }
}

#[test]
fn sweep_is_deterministic_and_zero_size_is_silent() {
    let sc = ScramblingScenario::new(
        complete(&[1, 1, 1, 1]),
        p(0),
        4,
        GateSource::Clifford,
        SchedulePolicy::Sweep,
        8,
    )
    .unwrap();
    let a = threshold_sweep(&sc, 8, Some(&[0, 1, 2]), Granularity::Qubit).unwrap();
    let b = threshold_sweep(&sc, 8, Some(&[0, 1, 2]), Granularity::Qubit).unwrap();
    assert_eq!(a, b);
    let zero = a.row(0).unwrap();
    assert_eq!(zero.mean_mi, 0.0);
    assert_eq!(zero.mean_deviation, 0.0);
    assert!(a.max_conservation_residual < 1e-9);
    let nodes = threshold_sweep(&sc, 4, Some(&[2]), Granularity::Node).unwrap();
    assert_eq!(nodes.rows[0].n_e, 2.0);
}

#[test]
fn stabilizer_and_dense_scrambles_agree_on_entropies() {
    let net = complete(&[1, 1, 2]);
    let dense_sc = ScramblingScenario::new(
        net.clone(),
        p(0),
        4,
        GateSource::Clifford,
        SchedulePolicy::Sweep,
        6,
    )
    .unwrap();
    let stab_sc = dense_sc
        .clone()
        .with_engine(EngineKind::Stabilizer)
        .unwrap();
    let a = run_scrambling(&dense_sc, seeded(6)).unwrap();
    let b = run_scrambling(&stab_sc, seeded(6)).unwrap();
    let (va, vb) = (a.v_positions().unwrap(), b.v_positions().unwrap());
    let (ra, rb) = (
        a.r_prime_positions().unwrap(),
        b.r_prime_positions().unwrap(),
    );
    for k in 1..=va.len() {
        let ia = mutual_information(a.state(), &ra, &va[..k]).unwrap();
        let ib = mutual_information(b.state(), &rb, &vb[..k]).unwrap();
        assert!((ia - ib).abs() < 1e-9, "k={k}: {ia} vs {ib}");
    }
}

#[test]
fn engine_choice_follows_size_and_gates() {
    let big = complete(&[1; 30]);
    let sc = ScramblingScenario::new(
        big.clone(),
        p(0),
        1,
        GateSource::Clifford,
        SchedulePolicy::Sweep,
        0,
    )
    .unwrap();
    assert_eq!(sc.engine(), EngineKind::Stabilizer);
    assert!(matches!(
        ScramblingScenario::new(big, p(0), 1, GateSource::Haar, SchedulePolicy::Sweep, 0),
        Err(Error::NonClifford)
    ));
    let small = complete(&[1, 1]);
    let sc = ScramblingScenario::new(
        small,
        p(0),
        1,
        GateSource::TDoped { t: 1 },
        SchedulePolicy::Sweep,
        0,
    )
    .unwrap();
    assert!(sc.clone().with_engine(EngineKind::Stabilizer).is_err());
    let sr = run_scrambling(&sc, seeded(0)).unwrap();
    assert_eq!(sr.t_used, 1);
}
