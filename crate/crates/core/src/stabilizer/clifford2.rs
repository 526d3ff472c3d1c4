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

//! Uniform sampling from the two-qubit Clifford group (11520 elements up to
//! phase), via its four-class coset decomposition.

use rand::Rng;

use crate::gate::{Gate, GateOp};
use crate::rng::RngStream;

pub const TWO_QUBIT_CLIFFORD_COUNT: usize = 11520;

const SINGLE_CLASS: usize = 576;
const CNOT_CLASS: usize = 5184;
const ISWAP_CLASS: usize = 5184;

/// One of the 24 single-qubit Cliffords: a symplectic part then a Pauli.
fn single(index: usize, q: usize, out: &mut Vec<GateOp>) {
    const SYM: [&[Gate]; 6] = [
        &[],
        &[Gate::H],
        &[Gate::S],
        &[Gate::H, Gate::S],
        &[Gate::S, Gate::H],
        &[Gate::H, Gate::S, Gate::H],
    ];
    const PAULI: [Option<Gate>; 4] = [None, Some(Gate::X), Some(Gate::Y), Some(Gate::Z)];
    for &g in SYM[index / 4] {
        out.push(GateOp::new(g, &[q]));
    }
    if let Some(g) = PAULI[index % 4] {
        out.push(GateOp::new(g, &[q]));
    }
}

/// Powers of the order-3 Clifford cycling X → Z → Y.
fn s1(index: usize, q: usize, out: &mut Vec<GateOp>) {
    for _ in 0..index {
        out.push(GateOp::new(Gate::H, &[q]));
        out.push(GateOp::new(Gate::S, &[q]));
    }
}

/// Gate sequence (time order) for element `index` in `0..11520`, on local
/// qubits 0 and 1.
pub fn two_qubit_clifford(index: usize) -> Vec<GateOp> {
    assert!(
        index < TWO_QUBIT_CLIFFORD_COUNT,
        "clifford index out of range"
    );
    let mut out = Vec::new();
    let c1 = index % SINGLE_CLASS;
    single(c1 / 24, 0, &mut out);
    single(c1 % 24, 1, &mut out);
    let cnot = |a: usize, b: usize| GateOp::new(Gate::Cnot, &[a, b]);
    if index < SINGLE_CLASS {
        return out;
    }
    let rest = index - SINGLE_CLASS;
    if rest < CNOT_CLASS {
        let k = rest / SINGLE_CLASS;
        out.push(cnot(0, 1));
        s1(k / 3, 0, &mut out);
        s1(k % 3, 1, &mut out);
    } else if rest < CNOT_CLASS + ISWAP_CLASS {
        let k = (rest - CNOT_CLASS) / SINGLE_CLASS;
        out.push(cnot(0, 1));
        out.push(cnot(1, 0));
        s1(k / 3, 0, &mut out);
        s1(k % 3, 1, &mut out);
    } else {
        out.push(GateOp::new(Gate::Swap, &[0, 1]));
    }
    out
}

/// Uniformly random two-qubit Clifford as a gate sequence on local qubits
/// 0 and 1.
pub fn random_two_qubit_clifford(rng: &mut RngStream) -> Vec<GateOp> {
    two_qubit_clifford(rng.random_range(0..TWO_QUBIT_CLIFFORD_COUNT))
}

/// Rebind a local two-qubit sequence onto global targets `(a, b)`.
pub fn bind(ops: &[GateOp], a: usize, b: usize) -> Vec<GateOp> {
    ops.iter()
        .map(|op| GateOp {
            gate: op.gate,
            qubits: op
                .qubits
                .iter()
                .map(|&q| if q == 0 { a } else { b })
                .collect(),
        })
        .collect()
}
