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

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::unitary::Unitary;
use super::{DENSE_QUBIT_CAP, NORM_TOL};
use crate::error::{Error, Result};
use crate::gate::{Gate, C64};
use crate::rng::RngStream;

/// Initial assignment for one qubit of a product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitInit {
    Zero,
    One,
    Plus,
    Minus,
    Custom(C64, C64),
}

impl QubitInit {
    fn amplitudes(self) -> Result<(C64, C64)> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            QubitInit::Zero => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            QubitInit::One => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            QubitInit::Plus => (C64::new(h, 0.0), C64::new(h, 0.0)),
            QubitInit::Minus => (C64::new(h, 0.0), C64::new(-h, 0.0)),
            QubitInit::Custom(a, b) => (a, b),
        };
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::BadAmplitudes(norm));
        }
        Ok((a, b))
    }
}

/// Pure state over `n` qubits. Qubit `q` is bit `q` of the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

/// Spread the bits of `i` around zero bits at the (ascending) `holes`.
#[inline]
pub(crate) fn insert_zero_bits(mut i: usize, holes: &[usize]) -> usize {
    for &h in holes {
        let low = i & ((1 << h) - 1);
        i = low | ((i >> h) << (h + 1));
    }
    i
}

impl PureState {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n > DENSE_QUBIT_CAP {
            return Err(Error::TooLarge(n, DENSE_QUBIT_CAP));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "{len} amplitudes is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > DENSE_QUBIT_CAP {
            return Err(Error::TooLarge(n, DENSE_QUBIT_CAP));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::BadAmplitudes(norm));
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        let ip: C64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(ip.norm_sqr())
    }

    /// max |aᵢ − bᵢ| over amplitudes.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::BadIndex(q))
        } else {
            Ok(())
        }
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> q & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Apply a matrix to the listed target positions (bit j of the matrix
    /// index ↔ `targets[j]`).
    pub fn apply_matrix(&mut self, m: &DMatrix<C64>, targets: &[usize]) -> Result<()> {
        let k = targets.len();
        let dim = 1usize << k;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {k} qubits",
                m.nrows(),
                m.ncols()
            )));
        }
        for (j, &t) in targets.iter().enumerate() {
            self.check_qubit(t)?;
            if targets[..j].contains(&t) {
                return Err(Error::DimensionMismatch(format!("repeated target {t}")));
            }
        }
        let offsets: Vec<usize> = (0..dim)
            .map(|l| {
                (0..k)
                    .filter(|j| l >> j & 1 == 1)
                    .map(|j| 1usize << targets[j])
                    .sum()
            })
            .collect();
        let mut holes = targets.to_vec();
        holes.sort_unstable();
        let rows: Vec<C64> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for i in 0..(1usize << (self.n - k)) {
            let base = insert_zero_bits(i, &holes);
            for (b, off) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &rows[r * dim..(r + 1) * dim];
                self.amps[base + off] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        if qubits.len() != gate.arity() {
            return Err(Error::DimensionMismatch(format!(
                "{gate:?} takes {} qubits",
                gate.arity()
            )));
        }
        self.apply_matrix(&gate.matrix(), qubits)
    }

    pub fn apply_unitary(&mut self, u: &Unitary) -> Result<()> {
        self.apply_matrix(u.matrix(), u.targets())
    }

    /// Projective Z measurement with Born-rule sampling.
    pub fn measure_z(&mut self, q: usize, rng: &mut RngStream) -> Result<u8> {
        let p1 = self.prob_one(q)?;
        let outcome = u8::from(rng.random::<f64>() < p1);
        self.project_z(q, outcome)?;
        Ok(outcome)
    }

    /// Project qubit `q` onto `outcome` and renormalize. Returns the branch
    /// probability. A zero-probability branch leaves the state untouched.
    pub fn project_z(&mut self, q: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(q)?;
        let mut p = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if (i >> q & 1) as u8 == outcome {
                p += a.norm_sqr();
            }
        }
        if p <= 0.0 {
            return Ok(0.0);
        }
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> q & 1) as u8 == outcome {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Append a fresh |0⟩ qubit at the top position.
    /// Relabel qubits: qubit `k` of the result is qubit `order[k]` here.
    pub fn permuted(&self, order: &[usize]) -> Result<PureState> {
        let n = self.n;
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&q| q >= n || std::mem::replace(&mut seen[q], true))
        {
            return Err(Error::DimensionMismatch(format!(
                "{order:?} is not a permutation of {n} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let j = order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &q)| acc | (((i >> q) & 1) << k));
            amps[j] = a;
        }
        Ok(PureState { n, amps })
    }

    pub fn push_qubit(&mut self) -> Result<usize> {
        if self.n + 1 > DENSE_QUBIT_CAP {
            return Err(Error::TooLarge(self.n + 1, DENSE_QUBIT_CAP));
        }
        self.amps.resize(self.amps.len() * 2, C64::new(0.0, 0.0));
        self.n += 1;
        Ok(self.n - 1)
    }

    /// Remove qubit `q`, which must be in |0⟩; higher qubits shift down.
    pub fn remove_qubit(&mut self, q: usize) -> Result<()> {
        if self.prob_one(q)? > NORM_TOL {
            return Err(Error::QubitNotFresh(q));
        }
        let amps = (0..1usize << (self.n - 1))
            .map(|i| self.amps[insert_zero_bits(i, &[q])])
            .collect();
        self.amps = amps;
        self.n -= 1;
        Ok(())
    }

    /// True if every listed qubit is |0⟩ (no amplitude with those bits set).
    pub fn qubits_fresh(&self, qubits: &[usize]) -> bool {
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            <= NORM_TOL
    }

    fn require_fresh(&self, qubits: &[usize]) -> Result<()> {
        for (j, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..j].contains(&q) {
                return Err(Error::DimensionMismatch(format!("repeated target {q}")));
            }
            if !self.qubits_fresh(&[q]) {
                return Err(Error::QubitNotFresh(q));
            }
        }
        Ok(())
    }

    /// |Φ⁺⟩ on two fresh qubits.
    pub fn bell_pair(&mut self, a: usize, b: usize) -> Result<()> {
        self.require_fresh(&[a, b])?;
        self.apply_gate(Gate::H, &[a])?;
        self.apply_gate(Gate::Cnot, &[a, b])
    }

    /// (|0…0⟩ + |1…1⟩)/√2 on fresh qubits.
    pub fn ghz(&mut self, qubits: &[usize]) -> Result<()> {
        self.require_fresh(qubits)?;
        let Some((&first, rest)) = qubits.split_first() else {
            return Ok(());
        };
        self.apply_gate(Gate::H, &[first])?;
        for &q in rest {
            self.apply_gate(Gate::Cnot, &[first, q])?;
        }
        Ok(())
    }

    /// Equal superposition of single excitations on fresh qubits.
    pub fn w_state(&mut self, qubits: &[usize]) -> Result<()> {
        self.require_fresh(qubits)?;
        if qubits.is_empty() {
            return Ok(());
        }
        let scale = 1.0 / (qubits.len() as f64).sqrt();
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                continue;
            }
            let a = std::mem::replace(&mut self.amps[i], C64::new(0.0, 0.0));
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for &q in qubits {
                self.amps[i | 1 << q] = a * scale;
            }
        }
        Ok(())
    }
}

/// Product state from per-qubit assignments.
pub fn init_product_state(assignments: &[QubitInit]) -> Result<PureState> {
    if assignments.len() > DENSE_QUBIT_CAP {
        return Err(Error::TooLarge(assignments.len(), DENSE_QUBIT_CAP));
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for init in assignments {
        let (a, b) = init.amplitudes()?;
        let mut next = Vec::with_capacity(amps.len() * 2);
        next.extend(amps.iter().map(|x| x * a));
        next.extend(amps.iter().map(|x| x * b));
        amps = next;
    }
    Ok(PureState {
        n: assignments.len(),
        amps,
    })
}
