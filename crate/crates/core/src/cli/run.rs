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

//! Executing prepared scenarios.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{Body, InputState, OpSpec, Prepared, ProtocolSection};
use crate::dense::{haar_unitary, QubitInit};
use crate::error::{Error, Result};
use crate::gate::{Gate, C64};
use crate::ledger::{check_inequality, InequalityReport, ResourceInequality};
use crate::network::{NetworkGraph, NodeId};
use crate::protocol::{
    coin_inequality, controlled_teleport_inequality, distributed_cnot_inequality,
    superdense_inequality, swap_inequality, teleport_inequality, CompileReport, EngineKind,
    GhzMode, NeighborOp, ProtocolRun, GHZ,
};
use crate::rng::{streams, RngStream, StreamFactory};
use crate::scrambling::{
    mutual_information, query_cost_estimate, run_scrambling, threshold_sweep, ConeCoverage,
    DecouplingReport, GateSource, QueryCost, ScramblingScenario,
};
use crate::trace::CausalTrace;

/// Fidelity and equivalence tolerances of the built-in checks.
pub const FIDELITY_TOL: f64 = 1e-12;
pub const EQUIVALENCE_TOL: f64 = 1e-10;
pub const ENTROPY_TOL: f64 = 1e-9;
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Input states are drawn from their own streams so that they do not shift
/// the measurement randomness of a trial.
const INPUT_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_owned(),
            pass,
            value: None,
            tolerance: None,
            detail: detail.into(),
        }
    }

    fn measured(mut self, value: f64, tolerance: f64) -> Self {
        self.value = Some(value);
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Stats {
    fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        Some(Self {
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolResult {
    pub kind: String,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutual_information: Option<Stats>,
    /// Largest amplitude difference between compiled and direct application.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    /// Decoded superdense messages of the first trial.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub decoded: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heads_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compile: Option<CompileReport>,
    /// Ledger check of the first trial.
    pub inequality: InequalityReport,
    pub inequality_passed_every_trial: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScramblingResult {
    pub secret_node: NodeId,
    pub total_qubits: usize,
    pub v_size: usize,
    pub r_size: usize,
    pub d_size: usize,
    pub gate_source: GateSource,
    pub schedule: Vec<Vec<(NodeId, NodeId)>>,
    pub t_used: usize,
    pub query_cost: QueryCost,
    pub diameter: Option<usize>,
    /// Cone coverage of the run whose trace is written out.
    pub coverage: ConeCoverage,
    pub decoupling: DecouplingReport,
}

pub(super) struct Executed {
    pub protocol: Option<ProtocolResult>,
    pub scrambling: Option<ScramblingResult>,
    pub checks: Vec<Check>,
    pub trace: CausalTrace,
    pub ledger: crate::ledger::LedgerSummary,
    pub warnings: Vec<String>,
}

pub(super) fn execute(prep: &Prepared) -> Result<Executed> {
    match &prep.body {
        Body::Protocol(p) => run_protocol(prep, p),
        Body::Scrambling(sc) => run_scrambling_scenario(prep, sc),
    }
}

fn amplitudes(init: QubitInit) -> (C64, C64) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    match init {
        QubitInit::Zero => (r(1.0), r(0.0)),
        QubitInit::One => (r(0.0), r(1.0)),
        QubitInit::Plus => (r(h), r(h)),
        QubitInit::Minus => (r(h), r(-h)),
        QubitInit::Custom(a, b) => (a, b),
    }
}

fn draw_input(state: InputState, rng: &mut RngStream) -> Result<QubitInit> {
    Ok(match state {
        InputState::Random => {
            let u = haar_unitary(1, rng)?;
            let m = u.matrix();
            QubitInit::Custom(m[(0, 0)], m[(1, 0)])
        }
        InputState::Zero => QubitInit::Zero,
        InputState::One => QubitInit::One,
        InputState::Plus => QubitInit::Plus,
        InputState::Minus => QubitInit::Minus,
        InputState::Amplitudes([[a, b], [c, d]]) => {
            QubitInit::Custom(C64::new(a, b), C64::new(c, d))
        }
    })
}

/// Index of (node, local) in the wire frame of [`ProtocolRun::wire_frame_state`].
fn frame_index(net: &NetworkGraph, run: &ProtocolRun, node: NodeId, local: usize) -> usize {
    net.node_ids()
        .take_while(|&n| n != node)
        .map(|n| run.wires(n).len())
        .sum::<usize>()
        + local
}

struct TrialOut {
    fidelity: Option<f64>,
    mi: Option<f64>,
    deviation: Option<f64>,
    decoded: Vec<u8>,
    errors: usize,
    heads: u64,
    agree: u64,
    rounds: Option<usize>,
    compile: Option<CompileReport>,
    inequality: InequalityReport,
    valid: bool,
    run: Option<ProtocolRun>,
}

fn protocol_trial(prep: &Prepared, p: &ProtocolSection, k: u64) -> Result<TrialOut> {
    let factory = StreamFactory::new(prep.scenario.seed);
    let mut inputs = factory.stream(INPUT_STREAM_BASE + k);
    let mut run = ProtocolRun::new(Arc::clone(&prep.net), prep.engine, factory.trial(k))?;
    run.set_epsilon(prep.scenario.epsilon);
    let dense = prep.engine == EngineKind::Dense;
    let mut out = TrialOut {
        fidelity: None,
        mi: None,
        deviation: None,
        decoded: Vec::new(),
        errors: 0,
        heads: 0,
        agree: 0,
        rounds: None,
        compile: None,
        inequality: check_inequality(
            run.ledger(),
            &ResourceInequality::new("none", vec![], vec![]),
        ),
        valid: true,
        run: None,
    };
    let n = NodeId;
    let ineq = match p {
        ProtocolSection::Teleport {
            src,
            qubit,
            dst,
            state,
        } => {
            let init = draw_input(*state, &mut inputs)?;
            run.prepare(n(*src), *qubit, init)?;
            let at = run.teleport(n(*src), *qubit, n(*dst))?;
            if dense {
                let (a, b) = amplitudes(init);
                out.fidelity = Some(run.state().qubit_fidelity(run.wire(n(*dst), at)?, a, b)?);
            }
            teleport_inequality(1)
        }
        ProtocolSection::Superdense {
            src,
            dst,
            messages,
            noise,
        } => {
            for &m in messages {
                let got = run.superdense_send(n(*src), n(*dst), m, *noise)?;
                out.decoded.push(got);
                out.errors += usize::from(got != m);
            }
            superdense_inequality(messages.len() as u64)
        }
        ProtocolSection::EntanglementSwap { chain, schedule } => {
            let nodes: Vec<NodeId> = chain.iter().map(|&i| n(i)).collect();
            out.rounds = Some(run.swap_chain(&nodes, *schedule)?);
            let a = run.located_positions(nodes[0])?;
            let b = run.located_positions(*nodes.last().expect("chain has nodes"))?;
            out.mi = Some(mutual_information(run.state(), &a, &b)?);
            swap_inequality(chain.len() as u64 - 2)
        }
        ProtocolSection::DistributedCnot {
            control,
            control_qubit,
            target,
            target_qubit,
            control_state,
            target_state,
        } => {
            let ci = draw_input(*control_state, &mut inputs)?;
            let ti = draw_input(*target_state, &mut inputs)?;
            run.prepare(n(*control), *control_qubit, ci)?;
            run.prepare(n(*target), *target_qubit, ti)?;
            let ideal = if dense {
                let mut s = run.wire_frame_state()?;
                let c = frame_index(&prep.net, &run, n(*control), *control_qubit);
                let t = frame_index(&prep.net, &run, n(*target), *target_qubit);
                s.apply_gate(Gate::Cnot, &[c, t])?;
                Some(s)
            } else {
                None
            };
            run.distributed_cnot(n(*control), *control_qubit, n(*target), *target_qubit)?;
            if let Some(ideal) = ideal {
                out.fidelity = Some(ideal.overlap(&run.wire_frame_state()?)?);
            }
            distributed_cnot_inequality(1)
        }
        ProtocolSection::ControlledTeleport {
            src,
            qubit,
            controller,
            dst,
            mode,
            state,
        } => {
            let (q, r, s) = (n(*src), n(*controller), n(*dst));
            run.endow_multiparty(GHZ, &[q, r, s], 1)?;
            let init = draw_input(*state, &mut inputs)?;
            run.prepare(q, *qubit, init)?;
            if let Some(at) = run.controlled_teleport_ghz(q, *qubit, r, s, *mode)? {
                if dense {
                    let (a, b) = amplitudes(init);
                    out.fidelity = Some(run.state().qubit_fidelity(run.wire(s, at)?, a, b)?);
                }
            }
            controlled_teleport_inequality(q, r, s, *mode)
        }
        ProtocolSection::SharedCoin { a, b, flips } => {
            for _ in 0..*flips {
                let (u, v) = run.shared_coin(n(*a), n(*b))?;
                out.agree += u64::from(u == v);
                out.heads += u64::from(u);
            }
            coin_inequality(*flips)
        }
        ProtocolSection::Compile { a, b, op } => {
            let (a, b) = (n(*a), n(*b));
            let k = prep.net.qubit_budget(a) + prep.net.qubit_budget(b);
            if dense {
                let wires: Vec<usize> = prep
                    .net
                    .node_ids()
                    .flat_map(|id| (0..prep.net.qubit_budget(id)).map(move |j| (id, j)))
                    .map(|(id, j)| run.wire(id, j))
                    .collect::<Result<_>>()?;
                let u = haar_unitary(wires.len(), &mut inputs)?;
                run.state_mut().apply_unitary(&u.on(wires)?)?;
                run.resync_detector();
            }
            let op = match op {
                OpSpec::Haar => NeighborOp::Unitary(haar_unitary(k, &mut inputs)?),
                OpSpec::Gates(g) => NeighborOp::Gates(g.clone()),
            };
            let mut direct = dense.then(|| run.clone());
            if let Some(d) = direct.as_mut() {
                d.apply_direct(&op, a, b)?;
            }
            let report = run.compile_neighbor_unitary(&op, a, b)?;
            if let Some(d) = direct {
                out.deviation = Some(d.wire_frame_state()?.max_abs_diff(&run.wire_frame_state()?));
            }
            let ineq = report.inequality.clone();
            out.compile = Some(report);
            ineq
        }
    };
    out.inequality = check_inequality(run.ledger(), &ineq);
    out.valid = run.trace().validate().is_clean();
    if k == 0 {
        out.run = Some(run);
    }
    Ok(out)
}

fn run_protocol(prep: &Prepared, p: &ProtocolSection) -> Result<Executed> {
    let trials = prep.scenario.trials;
    let mut outs: Vec<TrialOut> = (0..trials as u64)
        .into_par_iter()
        .map(|k| protocol_trial(prep, p, k))
        .collect::<Result<_>>()?;
    let first_run = outs[0].run.take().expect("trial 0 keeps its run");
    let fidelities: Vec<f64> = outs.iter().filter_map(|o| o.fidelity).collect();
    let mis: Vec<f64> = outs.iter().filter_map(|o| o.mi).collect();
    let deviations: Vec<f64> = outs.iter().filter_map(|o| o.deviation).collect();
    let ineq_all = outs.iter().all(|o| o.inequality.pass);
    let valid_all = outs.iter().all(|o| o.valid);

    let mut checks = vec![
        Check::new(
            "trace_valid",
            valid_all,
            format!(
                "{} of {trials} traces pass validation",
                outs.iter().filter(|o| o.valid).count()
            ),
        ),
        Check::new(
            "ledger_inequality",
            ineq_all,
            format!("{} on every trial", outs[0].inequality.inequality),
        ),
    ];
    let fidelity = Stats::of(&fidelities);
    if let Some(f) = fidelity {
        checks.push(
            Check::new(
                "fidelity",
                (1.0 - f.min).abs() <= FIDELITY_TOL,
                "minimum fidelity with the ideal output",
            )
            .measured(f.min, FIDELITY_TOL),
        );
    }
    let mutual_information = Stats::of(&mis);
    if let Some(m) = mutual_information {
        let worst = mis.iter().map(|x| (x - 2.0).abs()).fold(0.0, f64::max);
        checks.push(
            Check::new(
                "end_to_end_pair",
                worst <= ENTROPY_TOL,
                "I(first:last) equals 2 bits",
            )
            .measured(m.min, ENTROPY_TOL),
        );
    }
    let max_deviation =
        (!deviations.is_empty()).then(|| deviations.iter().copied().fold(0.0, f64::max));
    if let Some(d) = max_deviation {
        checks.push(
            Check::new(
                "compile_equivalence",
                d <= EQUIVALENCE_TOL,
                "compiled and direct application agree",
            )
            .measured(d, EQUIVALENCE_TOL),
        );
    }
    let mut error_rate = None;
    let mut heads_fraction = None;
    match p {
        ProtocolSection::Superdense {
            messages, noise, ..
        } => {
            let sent = (messages.len() * trials) as f64;
            let errors: usize = outs.iter().map(|o| o.errors).sum();
            error_rate = Some(if sent > 0.0 {
                errors as f64 / sent
            } else {
                0.0
            });
            if *noise == 0.0 {
                checks.push(Check::new(
                    "decoding_exact",
                    errors == 0,
                    format!("{errors} decoding errors"),
                ));
            }
        }
        ProtocolSection::SharedCoin { flips, .. } => {
            let total = flips * trials as u64;
            let agree: u64 = outs.iter().map(|o| o.agree).sum();
            let heads: u64 = outs.iter().map(|o| o.heads).sum();
            heads_fraction = Some(heads as f64 / total as f64);
            checks.push(Check::new(
                "coin_agreement",
                agree == total,
                format!("{agree} of {total} flips agree"),
            ));
        }
        _ => {}
    }
    let mut notes = first_run.notes().to_vec();
    if prep.engine == EngineKind::Stabilizer
        && matches!(
            p,
            ProtocolSection::Teleport { .. }
                | ProtocolSection::DistributedCnot { .. }
                | ProtocolSection::ControlledTeleport { .. }
                | ProtocolSection::Compile { .. }
        )
    {
        notes.push("fidelity checks need the dense engine and were skipped".into());
    }
    if let ProtocolSection::ControlledTeleport {
        mode: GhzMode::Withhold,
        ..
    } = p
    {
        notes.push("controller withheld its bit; no fidelity is defined at the receiver".into());
    }
    let first = &outs[0];
    let result = ProtocolResult {
        kind: p.kind().to_owned(),
        trials,
        fidelity,
        mutual_information,
        max_deviation,
        decoded: first.decoded.clone(),
        error_rate,
        heads_fraction,
        swap_rounds: first.rounds,
        compile: first.compile.clone(),
        inequality: first.inequality.clone(),
        inequality_passed_every_trial: ineq_all,
        notes,
    };
    let net = Arc::clone(&prep.net);
    let ledger = first_run.ledger().summary(&|n| net.label(n));
    Ok(Executed {
        protocol: Some(result),
        scrambling: None,
        checks,
        trace: first_run.trace().clone(),
        ledger,
        warnings: Vec::new(),
    })
}

fn run_scrambling_scenario(prep: &Prepared, sc: &ScramblingScenario) -> Result<Executed> {
    let section = prep
        .scenario
        .scrambling
        .as_ref()
        .expect("scrambling body has a section");
    let rng = StreamFactory::new(prep.scenario.seed).stream(streams::PROTOCOL);
    let shown = run_scrambling(sc, rng)?;
    let decoupling = threshold_sweep(
        sc,
        prep.scenario.trials,
        section.sizes.as_deref(),
        section.granularity,
    )?;

    let mut checks = vec![
        Check::new(
            "schedule_connected",
            shown.coverage.schedule_connected,
            "scheduled edges connect the secret node to every node",
        ),
        Check::new(
            "trace_valid",
            shown.run.trace().validate().is_clean(),
            "trace of the rendered run passes validation",
        ),
        Check::new(
            "conservation_identity",
            decoupling.max_conservation_residual <= CONSERVATION_TOL,
            "I(R′:R) = I(R′:V∖D) + I(R′:D)",
        )
        .measured(decoupling.max_conservation_residual, CONSERVATION_TOL),
    ];
    if sc.d_size() == 0 {
        let failing: Vec<String> = decoupling
            .rows
            .iter()
            .filter(|r| !r.within_bound(section.sigmas))
            .map(|r| r.size.to_string())
            .collect();
        checks.push(Check::new(
            "decoupling_bound",
            failing.is_empty(),
            if failing.is_empty() {
                format!("every row within bound + {}·stderr", section.sigmas)
            } else {
                format!(
                    "rows above bound + {}·stderr: {}",
                    section.sigmas,
                    failing.join(", ")
                )
            },
        ));
    }
    let t_used = shown.t_used;
    let mut warnings = shown.warnings.clone();
    for w in &decoupling.warnings {
        if !warnings.contains(w) {
            warnings.push(w.clone());
        }
    }
    let net = Arc::clone(&prep.net);
    let ledger = shown.run.ledger().summary(&|n| net.label(n));
    let result = ScramblingResult {
        secret_node: sc.r(),
        total_qubits: sc.total_qubits(),
        v_size: sc.v_size(),
        r_size: sc.r_size(),
        d_size: sc.d_size(),
        gate_source: sc.gate_source(),
        schedule: sc.schedule().clone(),
        t_used,
        query_cost: query_cost_estimate(sc.v_size(), t_used),
        diameter: prep.net.diameter().ok(),
        coverage: shown.coverage.clone(),
        decoupling,
    };
    Ok(Executed {
        protocol: None,
        scrambling: Some(result),
        checks,
        trace: shown.run.trace().clone(),
        ledger,
        warnings,
    })
}

/// Sweep rows for `sizes` (the scenario's sizes when `None`).
pub(super) fn sweep(prep: &Prepared, sizes: Option<&[usize]>) -> Result<DecouplingReport> {
    let Body::Scrambling(sc) = &prep.body else {
        return Err(Error::Semantic(
            "sweep needs a scenario with a `scrambling` section".into(),
        ));
    };
    let section = prep
        .scenario
        .scrambling
        .as_ref()
        .expect("scrambling body has a section");
    let sizes = sizes.or(section.sizes.as_deref());
    threshold_sweep(sc, prep.scenario.trials, sizes, section.granularity)
}
