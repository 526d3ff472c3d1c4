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

/// One event per line, in id order. An empty trace yields an empty string.
pub fn to_jsonl(trace: &CausalTrace) -> String {
    let mut out = String::new();
    for e in trace.events() {
        out.push_str(&serde_json::to_string(e).expect("events always serialize"));
        out.push('\n');
    }
    out
}

/// Inverse of [`to_jsonl`]. Ids must be dense and in order; causes are not
/// checked here, call [`CausalTrace::validate`] for that.
pub fn read_jsonl(text: &str) -> Result<CausalTrace> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: Event = serde_json::from_str(line).map_err(|err| Error::Parse {
            line: i + 1,
            column: err.column(),
            message: err.to_string(),
        })?;
        if e.id != events.len() {
            return Err(Error::InvalidTrace(format!(
                "line {} carries id {}, expected {}",
                i + 1,
                e.id,
                events.len()
            )));
        }
        events.push(e);
    }
    Ok(CausalTrace::from_events_unchecked(events))
}
