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

use super::state::{insert_zero_bits, PureState};
use super::{DENSITY_QUBIT_CAP, EIG_CLIP, NORM_TOL};
use crate::error::{Error, Result};
use crate::gate::C64;

/// Reduced density operator. Bit `j` of a row index is qubit `subset[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    rho: DMatrix<C64>,
    subset: Vec<usize>,
}

impl MixedState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: DMatrix<C64>, subset: Vec<usize>) -> Result<Self> {
        let dim = 1usize << subset.len();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix on {} qubits",
                rho.nrows(),
                rho.ncols(),
                subset.len()
            )));
        }
        let ms = Self { rho, subset };
        ms.check()?;
        Ok(ms)
    }

    pub fn maximally_mixed(subset: Vec<usize>) -> Result<Self> {
        if subset.len() > DENSITY_QUBIT_CAP {
            return Err(Error::SubsetTooLarge(subset.len(), DENSITY_QUBIT_CAP));
        }
        let d = 1usize << subset.len();
        Ok(Self {
            rho: DMatrix::identity(d, d) / C64::new(d as f64, 0.0),
            subset,
        })
    }

    fn check(&self) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint())
            .iter()
            .all(|x| x.norm() <= NORM_TOL);
        if !herm {
            return Err(Error::DimensionMismatch(
                "density matrix is not Hermitian".into(),
            ));
        }
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::BadAmplitudes(tr.re));
        }
        if self.eigenvalues().iter().any(|&l| l < -NORM_TOL) {
            return Err(Error::DimensionMismatch(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(())
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Real eigenvalues, unsorted.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    for (j, &q) in subset.iter().enumerate() {
        if q >= n {
            return Err(Error::BadIndex(q));
        }
        if subset[..j].contains(&q) {
            return Err(Error::DimensionMismatch(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

fn local_offsets(positions: &[usize]) -> Vec<usize> {
    (0..1usize << positions.len())
        .map(|a| {
            positions
                .iter()
                .enumerate()
                .filter(|(j, _)| a >> j & 1 == 1)
                .map(|(_, &p)| 1usize << p)
                .sum()
        })
        .collect()
}

/// Reduced state of a pure state on `keep`, as ρ = M M† with M the
/// amplitude vector reshaped to (keep × rest).
pub fn partial_trace(state: &PureState, keep: &[usize]) -> Result<MixedState> {
    let n = state.num_qubits();
    check_subset(n, keep)?;
    if keep.len() > DENSITY_QUBIT_CAP {
        return Err(Error::SubsetTooLarge(keep.len(), DENSITY_QUBIT_CAP));
    }
    let dk = 1usize << keep.len();
    let dr = 1usize << (n - keep.len());
    let offsets = local_offsets(keep);
    let mut holes = keep.to_vec();
    holes.sort_unstable();
    let amps = state.amplitudes();
    let m = DMatrix::<C64>::from_fn(dk, dr, |a, b| {
        amps[insert_zero_bits(b, &holes) + offsets[a]]
    });
    let rho = &m * m.adjoint();
    Ok(MixedState {
        rho,
        subset: keep.to_vec(),
    })
}

/// Further trace a reduced state down to `keep` ⊆ its subset.
pub fn partial_trace_mixed(ms: &MixedState, keep: &[usize]) -> Result<MixedState> {
    let local: Vec<usize> = keep
        .iter()
        .map(|q| {
            ms.subset
                .iter()
                .position(|s| s == q)
                .ok_or(Error::SubsetMismatch)
        })
        .collect::<Result<_>>()?;
    check_subset(ms.subset.len(), &local)?;
    let offsets = local_offsets(&local);
    let mut holes = local.clone();
    holes.sort_unstable();
    let dk = 1usize << keep.len();
    let dr = 1usize << (ms.subset.len() - keep.len());
    let mut rho = DMatrix::<C64>::zeros(dk, dk);
    for b in 0..dr {
        let base = insert_zero_bits(b, &holes);
        for a in 0..dk {
            for a2 in 0..dk {
                rho[(a, a2)] += ms.rho[(base + offsets[a], base + offsets[a2])];
            }
        }
    }
    Ok(MixedState {
        rho,
        subset: keep.to_vec(),
    })
}

/// ‖M‖₁ = Tr√(M†M), the sum of singular values.
pub fn l1_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// ‖a − b‖₁ in [0, 2].
pub fn trace_distance_l1(a: &MixedState, b: &MixedState) -> Result<f64> {
    if a.subset != b.subset {
        return Err(Error::SubsetMismatch);
    }
    let diff = &a.rho - &b.rho;
    Ok(hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum())
}

fn entropy_of(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&l| l > EIG_CLIP)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn entropy(ms: &MixedState) -> f64 {
    entropy_of(&ms.eigenvalues()).max(0.0)
}

fn complement(n: usize, subset: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !subset.contains(q)).collect()
}

/// S(A) of a pure state, computed on whichever of A and its complement is
/// smaller.
pub fn subset_entropy(state: &PureState, a: &[usize]) -> Result<f64> {
    let n = state.num_qubits();
    check_subset(n, a)?;
    if a.is_empty() || a.len() == n {
        return Ok(0.0);
    }
    let side = if 2 * a.len() > n {
        complement(n, a)
    } else {
        a.to_vec()
    };
    Ok(entropy(&partial_trace(state, &side)?))
}

/// I(A:B) = S(A) + S(B) − S(AB), in bits.
pub fn mutual_information(state: &PureState, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.iter().any(|q| b.contains(q)) {
        return Err(Error::OverlappingSubsets);
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(subset_entropy(state, a)? + subset_entropy(state, b)? - subset_entropy(state, &ab)?)
}

/// ‖ρ_E − I/d_E‖₁ for a pure global state.
///
/// When E is the larger side the spectrum of ρ_E is that of ρ_Ē padded
/// with zeros, so only the smaller side is ever materialized.
pub fn deviation_from_mixed(state: &PureState, e: &[usize]) -> Result<f64> {
    let n = state.num_qubits();
    check_subset(n, e)?;
    let inv_de = (-(e.len() as f64)).exp2();
    if 2 * e.len() <= n {
        if e.is_empty() {
            return Ok(0.0);
        }
        let eigs = partial_trace(state, e)?.eigenvalues();
        return Ok(eigs.iter().map(|l| (l - inv_de).abs()).sum());
    }
    let rest = complement(n, e);
    let eigs = if rest.is_empty() {
        vec![1.0]
    } else {
        partial_trace(state, &rest)?.eigenvalues()
    };
    let zeros = 1.0 - eigs.len() as f64 * inv_de;
    Ok(eigs.iter().map(|l| (l - inv_de).abs()).sum::<f64>() + zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{haar_unitary, init_product_state, QubitInit};
    use crate::gate::Gate;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn bell() -> PureState {
        let mut s = PureState::zero(2).unwrap();
        s.bell_pair(0, 1).unwrap();
        s
    }

    fn random_state(n: usize, seed: u64) -> PureState {
        let mut s = PureState::zero(n).unwrap();
        let u = haar_unitary(n, &mut seeded(seed)).unwrap();
        s.apply_unitary(&u).unwrap();
        s
    }

    fn pure_rho(a: C64, b: C64) -> MixedState {
        let v = nalgebra::DVector::from_vec(vec![a, b]);
        MixedState::new(&v * v.adjoint(), vec![0]).unwrap()
    }

    #[test]
    fn partial_trace_examples() {
        let r = partial_trace(&bell(), &[0]).unwrap();
        let half = MixedState::maximally_mixed(vec![0]).unwrap();
        assert!(trace_distance_l1(&r, &half).unwrap() < 1e-14);

        let s = init_product_state(&[QubitInit::Zero, QubitInit::One]).unwrap();
        let r = partial_trace(&s, &[1]).unwrap();
        assert!((r.rho()[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(r.rho()[(0, 0)].norm() < 1e-15);

        let mut g = PureState::zero(3).unwrap();
        g.ghz(&[0, 1, 2]).unwrap();
        let r = partial_trace(&g, &[0, 1]).unwrap();
        assert!((r.rho()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r.rho()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(r.rho()[(0, 3)].norm() < 1e-15);

        assert!(matches!(
            partial_trace(&PureState::zero(13).unwrap(), &(0..13).collect::<Vec<_>>()),
            Err(Error::SubsetTooLarge(13, 12))
        ));
    }

    #[test]
    fn partial_trace_respects_keep_order() {
        let s = init_product_state(&[QubitInit::One, QubitInit::Zero]).unwrap();
        let r = partial_trace(&s, &[1, 0]).unwrap();
        // qubit 1 is bit 0 (=0), qubit 0 is bit 1 (=1) → index 2
        assert!((r.rho()[(2, 2)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_trace_matches_pure_trace() {
        let s = random_state(4, 9);
        let r = partial_trace(&s, &[3, 1, 0]).unwrap();
        let a = partial_trace_mixed(&r, &[0, 3]).unwrap();
        let b = partial_trace(&s, &[0, 3]).unwrap();
        assert!((a.rho() - b.rho()).norm() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let zero = pure_rho(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let one = pure_rho(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let half = MixedState::maximally_mixed(vec![0]).unwrap();
        assert_eq!(trace_distance_l1(&zero, &zero).unwrap(), 0.0);
        assert!((trace_distance_l1(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
        assert!((trace_distance_l1(&half, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!((l1_norm(&(half.rho() - zero.rho())) - 1.0).abs() < 1e-12);
        let other = MixedState::maximally_mixed(vec![1]).unwrap();
        assert!(matches!(
            trace_distance_l1(&half, &other),
            Err(Error::SubsetMismatch)
        ));
    }

    #[test]
    fn entropy_examples() {
        let half = MixedState::maximally_mixed(vec![0]).unwrap();
        assert!((entropy(&half) - 1.0).abs() < 1e-12);
        let b = bell();
        assert!((mutual_information(&b, &[0], &[1]).unwrap() - 2.0).abs() < 1e-12);
        let p = init_product_state(&[QubitInit::Plus, QubitInit::Minus]).unwrap();
        assert!(mutual_information(&p, &[0], &[1]).unwrap().abs() < 1e-10);
        assert!(matches!(
            mutual_information(&b, &[0], &[0, 1]),
            Err(Error::OverlappingSubsets)
        ));
    }

    #[test]
    fn deviation_examples() {
        let b = bell();
        assert!(deviation_from_mixed(&b, &[0]).unwrap() < 1e-12);
        for n in 1..5 {
            let s = random_state(n, n as u64);
            let all: Vec<usize> = (0..n).collect();
            let want = 2.0 * (1.0 - (-(n as f64)).exp2());
            assert!((deviation_from_mixed(&s, &all).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn deviation_large_side_matches_direct() {
        let s = random_state(5, 31);
        for e in [vec![0, 1, 2], vec![4, 2, 1, 0]] {
            let direct = {
                let r = partial_trace(&s, &e).unwrap();
                let m = MixedState::maximally_mixed(e.clone()).unwrap();
                trace_distance_l1(&r, &m).unwrap()
            };
            assert!((deviation_from_mixed(&s, &e).unwrap() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn no_signaling_under_remote_operations() {
        let mut rng = seeded(4);
        let mut s = bell();
        let before = partial_trace(&s, &[0]).unwrap();
        s.apply_gate(Gate::H, &[1]).unwrap();
        s.apply_gate(Gate::T, &[1]).unwrap();
        let u = haar_unitary(1, &mut rng).unwrap().on(vec![1]).unwrap();
        s.apply_unitary(&u).unwrap();
        let after = partial_trace(&s, &[0]).unwrap();
        assert!(trace_distance_l1(&before, &after).unwrap() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn trace_distance_is_a_metric(seed in 0u64..10_000) {
            let states: Vec<MixedState> = (0..3)
                .map(|k| partial_trace(&random_state(3, seed * 3 + k), &[0, 2]).unwrap())
                .collect();
            let d = |i: usize, j: usize| trace_distance_l1(&states[i], &states[j]).unwrap();
            prop_assert_eq!(d(0, 1), d(1, 0));
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                prop_assert!((0.0..=2.0 + 1e-12).contains(&d(i, j)));
            }
        }

        #[test]
        fn purity_duality(seed in 0u64..10_000, mask in 1u32..31) {
            let s = random_state(5, seed);
            let a: Vec<usize> = (0..5).filter(|q| mask >> q & 1 == 1).collect();
            let b: Vec<usize> = (0..5).filter(|q| mask >> q & 1 == 0).collect();
            let sa = entropy(&partial_trace(&s, &a).unwrap());
            let sb = entropy(&partial_trace(&s, &b).unwrap());
            prop_assert!((sa - sb).abs() < 1e-9);
        }

        #[test]
        fn norm_preserved_by_unitaries(seed in 0u64..10_000, depth in 1usize..12) {
            let mut rng = seeded(seed);
            let mut s = PureState::zero(4).unwrap();
            for k in 0..depth {
                let u = haar_unitary(2, &mut rng).unwrap().on(vec![k % 4, (k + 1) % 4]).unwrap();
                s.apply_unitary(&u).unwrap();
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }
}
