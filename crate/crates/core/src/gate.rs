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

//! Named gate set shared by the dense and stabilizer engines.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    T,
    Tdg,
    Cnot,
    Cz,
    Swap,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, Gate::T | Gate::Tdg)
    }

    pub fn inverse(self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            g => g,
        }
    }

    /// Matrix in little-endian local order: for two-qubit gates bit 0 of the
    /// row index is the first operand (the control for CNOT).
    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let t = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match self {
            Gate::H => DMatrix::from_row_slice(2, 2, &[h, h, h, -h]),
            Gate::S => DMatrix::from_row_slice(2, 2, &[l, o, o, i]),
            Gate::Sdg => DMatrix::from_row_slice(2, 2, &[l, o, o, -i]),
            Gate::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Gate::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Gate::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
            Gate::T => DMatrix::from_row_slice(2, 2, &[l, o, o, t]),
            Gate::Tdg => DMatrix::from_row_slice(2, 2, &[l, o, o, t.conj()]),
            Gate::Cnot => permutation(&[0, 3, 2, 1]),
            Gate::Swap => permutation(&[0, 2, 1, 3]),
            Gate::Cz => {
                let mut m = DMatrix::identity(4, 4);
                m[(3, 3)] = -l;
                m
            }
        }
    }
}

fn permutation(image: &[usize]) -> DMatrix<C64> {
    let n = image.len();
    let mut m = DMatrix::zeros(n, n);
    for (col, &row) in image.iter().enumerate() {
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    m
}

/// A gate bound to operand positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOp {
    pub gate: Gate,
    pub qubits: Vec<usize>,
}

impl GateOp {
    pub fn new(gate: Gate, qubits: &[usize]) -> Self {
        Self {
            gate,
            qubits: qubits.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_are_unitary_and_inverses_compose() {
        let all = [
            Gate::H,
            Gate::S,
            Gate::Sdg,
            Gate::X,
            Gate::Y,
            Gate::Z,
            Gate::T,
            Gate::Tdg,
            Gate::Cnot,
            Gate::Cz,
            Gate::Swap,
        ];
        for g in all {
            let m = g.matrix();
            let d = m.nrows();
            assert_eq!(d, 1 << g.arity());
            let id = &m * g.inverse().matrix();
            assert!(
                (id - DMatrix::<C64>::identity(d, d)).norm() < 1e-12,
                "{g:?}"
            );
        }
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let m = Gate::Cnot.matrix();
        // |c=1,t=0> is local index 1, maps to |c=1,t=1> = index 3
        assert_eq!(m[(3, 1)], C64::new(1.0, 0.0));
        assert_eq!(m[(2, 2)], C64::new(1.0, 0.0));
    }
}
