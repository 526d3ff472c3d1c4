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

//! Exact statevector simulation and reduced-state analysis.

mod mixed;
mod register;
mod schmidt;
mod state;
mod unitary;

pub use mixed::{
    deviation_from_mixed, entropy, l1_norm, mutual_information, partial_trace, partial_trace_mixed,
    subset_entropy, trace_distance_l1, MixedState,
};
pub use register::{QubitId, QubitInfo, QubitRegister, QubitRole};
pub use schmidt::{distillation_rate, nielsen_convertible, schmidt_spectrum};
pub use state::{init_product_state, PureState, QubitInit};
pub use unitary::{haar_unitary, Unitary};

/// Largest pure statevector, in qubits.
pub const DENSE_QUBIT_CAP: usize = 24;
/// Largest materialized density matrix, in qubits.
pub const DENSITY_QUBIT_CAP: usize = 12;
/// Normalization and unitarity tolerance.
pub const NORM_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as zero before taking logs.
pub const EIG_CLIP: f64 = 1e-12;
