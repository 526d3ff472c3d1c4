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

use serde::{Deserialize, Serialize};

use crate::dense::{PureState, QubitInit, Unitary, NORM_TOL};
use crate::error::{Error, Result};
use crate::gate::{Gate, C64};
use crate::rng::RngStream;
use crate::stabilizer::{init_tableau, StabilizerTableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Dense,
    Stabilizer,
}

/// Global state held by a run.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Dense(PureState),
    Stabilizer(StabilizerTableau),
}

impl QuantumState {
    pub fn zero(engine: EngineKind, n: usize) -> Result<Self> {
        Ok(match engine {
            EngineKind::Dense => QuantumState::Dense(PureState::zero(n)?),
            // an empty tableau is not representable; grow from one qubit
            EngineKind::Stabilizer => QuantumState::Stabilizer(init_tableau(n.max(1))?),
        })
    }

    pub fn engine(&self) -> EngineKind {
        match self {
            QuantumState::Dense(_) => EngineKind::Dense,
            QuantumState::Stabilizer(_) => EngineKind::Stabilizer,
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            QuantumState::Dense(s) => s.num_qubits(),
            QuantumState::Stabilizer(t) => t.num_qubits(),
        }
    }

    pub fn as_dense(&self) -> Option<&PureState> {
        match self {
            QuantumState::Dense(s) => Some(s),
            QuantumState::Stabilizer(_) => None,
        }
    }

    pub fn as_stabilizer(&self) -> Option<&StabilizerTableau> {
        match self {
            QuantumState::Stabilizer(t) => Some(t),
            QuantumState::Dense(_) => None,
        }
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        match self {
            QuantumState::Dense(s) => s.apply_gate(gate, qubits),
            QuantumState::Stabilizer(t) => t.apply_clifford(gate, qubits),
        }
    }

    pub fn apply_unitary(&mut self, u: &Unitary) -> Result<()> {
        match self {
            QuantumState::Dense(s) => s.apply_unitary(u),
            QuantumState::Stabilizer(_) => Err(Error::NonClifford),
        }
    }

    pub fn measure(&mut self, q: usize, rng: &mut RngStream) -> Result<u8> {
        match self {
            QuantumState::Dense(s) => s.measure_z(q, rng),
            QuantumState::Stabilizer(t) => t.measure_z_stab(q, rng),
        }
    }

    pub fn project(&mut self, q: usize, outcome: u8) -> Result<f64> {
        match self {
            QuantumState::Dense(s) => s.project_z(q, outcome),
            QuantumState::Stabilizer(t) => t.project_z(q, outcome),
        }
    }

    /// Value of `q` if it is in a computational basis state.
    pub fn basis_value(&self, q: usize) -> Result<Option<u8>> {
        match self {
            QuantumState::Dense(s) => {
                let p1 = s.prob_one(q)?;
                Ok(if p1 <= NORM_TOL {
                    Some(0)
                } else if p1 >= 1.0 - NORM_TOL {
                    Some(1)
                } else {
                    None
                })
            }
            QuantumState::Stabilizer(t) => t.deterministic_z(q),
        }
    }

    /// Bring `q` to |0⟩ given that it is in a basis state.
    pub fn clear(&mut self, q: usize) -> Result<()> {
        match self.basis_value(q)? {
            Some(0) => Ok(()),
            Some(_) => self.apply_gate(Gate::X, &[q]),
            None => Err(Error::QubitNotFresh(q)),
        }
    }

    pub fn push_qubit(&mut self) -> Result<usize> {
        match self {
            QuantumState::Dense(s) => s.push_qubit(),
            QuantumState::Stabilizer(t) => t.push_qubit(),
        }
    }

    /// Remove a |0⟩ qubit from a dense state (stabilizer columns are kept).
    pub fn remove_qubit(&mut self, q: usize) -> Result<()> {
        match self {
            QuantumState::Dense(s) => s.remove_qubit(q),
            QuantumState::Stabilizer(_) => Ok(()),
        }
    }

    pub fn compacts(&self) -> bool {
        matches!(self, QuantumState::Dense(_))
    }

    /// Load a single-qubit value into a fresh qubit.
    pub fn prepare(&mut self, q: usize, init: QubitInit) -> Result<()> {
        if self.basis_value(q)? != Some(0) {
            return Err(Error::QubitNotFresh(q));
        }
        match init {
            QubitInit::Zero => Ok(()),
            QubitInit::One => self.apply_gate(Gate::X, &[q]),
            QubitInit::Plus => self.apply_gate(Gate::H, &[q]),
            QubitInit::Minus => {
                self.apply_gate(Gate::X, &[q])?;
                self.apply_gate(Gate::H, &[q])
            }
            QubitInit::Custom(a, b) => {
                let norm = a.norm_sqr() + b.norm_sqr();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::BadAmplitudes(norm));
                }
                let m = nalgebra::DMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()]);
                self.apply_unitary(&Unitary::new(m, vec![q])?)
            }
        }
    }

    /// Reduced-state fidelity ⟨ψ|ρ_q|ψ⟩ of one qubit with (a, b).
    pub fn qubit_fidelity(&self, q: usize, a: C64, b: C64) -> Result<f64> {
        let s = self.as_dense().ok_or(Error::NonClifford)?;
        let rho = crate::dense::partial_trace(s, &[q])?;
        let r = rho.rho();
        let f = a.conj() * r[(0, 0)] * a
            + a.conj() * r[(0, 1)] * b
            + b.conj() * r[(1, 0)] * a
            + b.conj() * r[(1, 1)] * b;
        Ok(f.re)
    }
}
