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

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qnetsim::cli::{self, exit, RunOptions, SweepOptions};
use qnetsim::Error;

#[derive(Parser)]
#[command(
    name = "qnetsim",
    version,
    about = "Causal-trace quantum network simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: scenario `outputs.dir`, then $QNETSIM_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file without running it.
    Validate { file: PathBuf },
    /// Run a scenario and write the report, trace and diagrams.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Override the local-event detection threshold.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Decoupling threshold sweep over |V_E| for a scrambling scenario.
    Sweep {
        file: PathBuf,
        /// Comma-separated subset sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Error> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::BadParams("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::BadParams(e.to_string()))?;
    }
    Ok(())
}

fn options(common: &Common, epsilon: Option<f64>) -> RunOptions {
    RunOptions {
        seed: common.seed,
        trials: common.trials,
        epsilon,
        out: common.out.clone(),
    }
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Validate { file } => {
            let d = cli::cmd_validate(&file)?;
            println!(
                "ok: {} scenario, {} nodes, {} qubits, {} engine",
                d.kind,
                d.nodes,
                d.qubits,
                serde_json::to_value(d.engine)
                    .unwrap_or_default()
                    .as_str()
                    .unwrap_or("?")
            );
            for w in &d.warnings {
                println!("warning: {w}");
            }
            Ok(exit::OK)
        }
        Command::Run {
            file,
            common,
            epsilon,
        } => {
            set_jobs(common.jobs)?;
            let outcome = cli::cmd_run(&file, &options(&common, epsilon))?;
            let report = &outcome.report;
            for c in &report.checks {
                println!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            for w in &report.warnings {
                println!("warning: {w}");
            }
            println!(
                "report: {}",
                outcome.out_dir.join(&report.artifacts.report).display()
            );
            Ok(report.exit_code())
        }
        Command::Sweep {
            file,
            sizes,
            common,
        } => {
            set_jobs(common.jobs)?;
            let opts = SweepOptions {
                sizes,
                run: options(&common, None),
            };
            let outcome = cli::cmd_sweep(&file, &opts)?;
            println!("size,mean_mi,stderr_mi,mean_deviation,bound");
            for r in &outcome.report.decoupling.rows {
                let se = r
                    .stderr_mi
                    .map_or_else(|| "null".to_owned(), |s| format!("{s:.4}"));
                println!(
                    "{},{:.4},{se},{:.4},{:.4}",
                    r.size, r.mean_mi, r.mean_deviation, r.bound
                );
            }
            println!("report: {}", outcome.json.display());
            println!("csv: {}", outcome.csv.display());
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match dispatch(parsed.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BadParams(_) => exit::USAGE,
                ref e => cli::exit_code(e),
            }
        }
    };
    ExitCode::from(code as u8)
}
