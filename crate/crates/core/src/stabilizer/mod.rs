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

//! Clifford-only simulation on bit-packed stabilizer tableaux.

mod clifford2;
mod tableau;

pub use clifford2::{
    bind, random_two_qubit_clifford, two_qubit_clifford, TWO_QUBIT_CLIFFORD_COUNT,
};
pub use tableau::{init_tableau, PauliRow, StabilizerTableau};

/// Largest tableau the engine will build.
pub const STABILIZER_QUBIT_CAP: usize = 4096;
