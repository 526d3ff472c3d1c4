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

//! Scenario-driven commands behind the `qnetsim` binary.

mod run;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use run::{
    Check, ProtocolResult, ScramblingResult, Stats, CONSERVATION_TOL, ENTROPY_TOL, EQUIVALENCE_TOL,
    FIDELITY_TOL,
};
pub use scenario::{prepare, Body, EngineChoice, Prepared, Scenario, SCHEMA_VERSION};

use crate::emit::{to_dot, to_jsonl, to_svg, DiagramStyle};
use crate::error::{Error, ErrorClass, Result};
use crate::ledger::LedgerSummary;
use crate::network::NodeId;
use crate::protocol::EngineKind;
use crate::scrambling::{schedule_reach, DecouplingReport};
use crate::trace::{CausalTrace, Finding};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "QNETSIM_OUT";
pub const DEFAULT_OUT: &str = "qnetsim-out";

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const FAILED_CHECKS: i32 = 2;
    pub const ENGINE: i32 = 3;
}

/// Exit code for an error: parse and I/O problems are usage errors, an
/// invalid scenario is a failed check, anything else is an engine error.
pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Parse | ErrorClass::Io => exit::USAGE,
        ErrorClass::Semantic => exit::FAILED_CHECKS,
        ErrorClass::Engine => exit::ENGINE,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunOptions {
    fn apply(&self, scenario: &mut Scenario) {
        if let Some(s) = self.seed {
            scenario.seed = s;
        }
        if let Some(t) = self.trials {
            scenario.trials = t;
        }
        if let Some(e) = self.epsilon {
            scenario.epsilon = e;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub kind: String,
    pub engine: EngineKind,
    pub nodes: usize,
    pub qubits: usize,
    pub warnings: Vec<String>,
}

fn load_prepared(path: &Path, opts: &RunOptions) -> Result<Prepared> {
    let mut scenario = Scenario::load(path)?;
    opts.apply(&mut scenario);
    prepare(&scenario)
}

pub fn cmd_validate(path: &Path) -> Result<Diagnostics> {
    let prep = load_prepared(path, &RunOptions::default())?;
    let mut warnings = Vec::new();
    let kind = match &prep.body {
        Body::Protocol(p) => p.kind().to_owned(),
        Body::Scrambling(sc) => {
            let reach = schedule_reach(&prep.net, sc.schedule(), sc.r());
            let missing: Vec<String> = prep
                .net
                .node_ids()
                .filter(|n| !reach.contains(n))
                .map(|n| n.to_string())
                .collect();
            if !missing.is_empty() {
                warnings.push(format!(
                    "ScheduleDisconnected: no scheduled path from {} to {}",
                    sc.r(),
                    missing.join(", ")
                ));
            }
            "scrambling".to_owned()
        }
    };
    Ok(Diagnostics {
        kind,
        engine: prep.engine,
        nodes: prep.net.node_count(),
        qubits: prep.net.size(),
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub events: usize,
    pub edges: usize,
    pub hasse_edges: usize,
    pub lanes: Vec<NodeId>,
    pub valid: bool,
    pub findings: Vec<Finding>,
}

impl TraceSummary {
    fn of(trace: &CausalTrace) -> Self {
        let report = trace.validate();
        Self {
            events: trace.len(),
            edges: trace.edges().len(),
            hasse_edges: trace.hasse_reduce().map(|h| h.len()).unwrap_or(0),
            lanes: trace.lanes().keys().copied().collect(),
            valid: report.is_clean(),
            findings: report.findings,
        }
    }
}

/// Artifact file names, relative to the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct Artifacts {
    pub report: String,
    pub trace: String,
    pub dot: String,
    pub svg: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub generator: String,
    pub scenario: Scenario,
    pub engine: EngineKind,
    pub seed: u64,
    pub trials: usize,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scrambling: Option<ScramblingResult>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub ledger: LedgerSummary,
    pub trace: TraceSummary,
    pub artifacts: Artifacts,
    pub warnings: Vec<String>,
    /// The only field that differs between runs with the same seed.
    pub timing: Timing,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            exit::OK
        } else {
            exit::FAILED_CHECKS
        }
    }
}

/// Output directory: the explicit override, then the scenario's own
/// `outputs.dir`, then `$QNETSIM_OUT`, then `./qnetsim-out`.
pub fn resolve_out(explicit: Option<&Path>, scenario: &Scenario) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| scenario.outputs.dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load_style(path: &Path, scenario: &Scenario) -> Result<DiagramStyle> {
    match &scenario.outputs.style {
        None => Ok(DiagramStyle::default()),
        Some(p) => {
            let full = path
                .parent()
                .map(|d| d.join(p))
                .unwrap_or_else(|| p.clone());
            DiagramStyle::load(&full)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub out_dir: PathBuf,
}

/// Run a scenario and write the report, trace JSONL, DOT and SVG.
pub fn cmd_run(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    let prep = load_prepared(path, opts)?;
    let scenario = &prep.scenario;
    let style = load_style(path, scenario)?;
    let exec = run::execute(&prep)?;

    let outputs = &scenario.outputs;
    let out_dir = resolve_out(opts.out.as_deref(), scenario);
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join(&outputs.trace), to_jsonl(&exec.trace))?;
    fs::write(
        out_dir.join(&outputs.dot),
        to_dot(&exec.trace, &style, outputs.render)?,
    )?;
    fs::write(out_dir.join(&outputs.svg), to_svg(&exec.trace, &style)?)?;

    let passed = exec.checks.iter().all(|c| c.pass);
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        generator: format!("qnetsim {}", env!("CARGO_PKG_VERSION")),
        scenario: scenario.clone(),
        engine: prep.engine,
        seed: scenario.seed,
        trials: scenario.trials,
        epsilon: scenario.epsilon,
        protocol: exec.protocol,
        scrambling: exec.scrambling,
        checks: exec.checks,
        passed,
        ledger: exec.ledger,
        trace: TraceSummary::of(&exec.trace),
        artifacts: Artifacts {
            report: outputs.report.clone(),
            trace: outputs.trace.clone(),
            dot: outputs.dot.clone(),
            svg: outputs.svg.clone(),
        },
        warnings: exec.warnings,
        timing: Timing {
            elapsed_ms: start.elapsed().as_millis(),
        },
    };
    fs::write(out_dir.join(&outputs.report), report.to_json())?;
    Ok(RunOutcome { report, out_dir })
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub sizes: Option<Vec<usize>>,
    pub run: RunOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub generator: String,
    pub scenario: Scenario,
    pub engine: EngineKind,
    pub seed: u64,
    pub trials: usize,
    pub decoupling: DecouplingReport,
    pub timing: Timing,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub json: PathBuf,
    pub csv: PathBuf,
}

/// Threshold sweep over |V_E|: a JSON report plus a CSV of the rows.
pub fn cmd_sweep(path: &Path, opts: &SweepOptions) -> Result<SweepOutcome> {
    let start = Instant::now();
    let prep = load_prepared(path, &opts.run)?;
    let decoupling = run::sweep(&prep, opts.sizes.as_deref()).map_err(|e| match e {
        Error::BadParams(m) => Error::Semantic(m),
        e => e,
    })?;
    let scenario = &prep.scenario;
    let out_dir = resolve_out(opts.run.out.as_deref(), scenario);
    fs::create_dir_all(&out_dir)?;
    let json = out_dir.join(&scenario.outputs.sweep);
    let csv_path = out_dir.join(&scenario.outputs.csv);

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &decoupling.rows {
        w.serialize(row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    fs::write(&csv_path, bytes)?;

    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        generator: format!("qnetsim {}", env!("CARGO_PKG_VERSION")),
        scenario: scenario.clone(),
        engine: prep.engine,
        seed: scenario.seed,
        trials: scenario.trials,
        decoupling,
        timing: Timing {
            elapsed_ms: start.elapsed().as_millis(),
        },
    };
    fs::write(
        &json,
        serde_json::to_string_pretty(&report).expect("reports always serialize") + "\n",
    )?;
    Ok(SweepOutcome {
        report,
        json,
        csv: csv_path,
    })
}
