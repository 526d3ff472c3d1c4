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

use super::mixed::{partial_trace, subset_entropy};
use super::state::PureState;
use super::DENSITY_QUBIT_CAP;
use crate::error::{Error, Result};

const MAJORIZATION_TOL: f64 = 1e-12;

fn check_cut(state: &PureState, cut: &[usize]) -> Result<Vec<usize>> {
    let n = state.num_qubits();
    let mut sorted = cut.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if cut.is_empty()
        || sorted.len() != cut.len()
        || sorted.len() >= n
        || sorted[sorted.len() - 1] >= n
    {
        return Err(Error::BadCut);
    }
    Ok(sorted)
}

/// Squared Schmidt coefficients across `cut`, descending.
pub fn schmidt_spectrum(state: &PureState, cut: &[usize]) -> Result<Vec<f64>> {
    let cut = check_cut(state, cut)?;
    let n = state.num_qubits();
    let side = if 2 * cut.len() > n {
        (0..n).filter(|q| !cut.contains(q)).collect()
    } else {
        cut
    };
    if side.len() > DENSITY_QUBIT_CAP {
        return Err(Error::SubsetTooLarge(side.len(), DENSITY_QUBIT_CAP));
    }
    let mut eigs: Vec<f64> = partial_trace(state, &side)?
        .eigenvalues()
        .into_iter()
        .map(|l| l.max(0.0))
        .collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    Ok(eigs)
}

/// Whether a pure state with spectrum `source` can be turned into one with
/// spectrum `target` by LOCC: `source` must be majorized by `target`.
pub fn nielsen_convertible(source: &[f64], target: &[f64]) -> bool {
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (a, b) = (sorted(source), sorted(target));
    let len = a.len().max(b.len());
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..len {
        sa += a.get(k).copied().unwrap_or(0.0);
        sb += b.get(k).copied().unwrap_or(0.0);
        if sa > sb + MAJORIZATION_TOL {
            return false;
        }
    }
    true
}

/// Asymptotic EPR distillation rate across `cut`: the entanglement entropy.
pub fn distillation_rate(state: &PureState, cut: &[usize]) -> Result<f64> {
    let cut = check_cut(state, cut)?;
    subset_entropy(state, &cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{init_product_state, QubitInit};
    use crate::gate::C64;

    fn binary_entropy(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn bell_spectrum_and_rate() {
        let mut s = PureState::zero(2).unwrap();
        s.bell_pair(0, 1).unwrap();
        let sp = schmidt_spectrum(&s, &[0]).unwrap();
        assert!((sp[0] - 0.5).abs() < 1e-12 && (sp[1] - 0.5).abs() < 1e-12);
        assert!((distillation_rate(&s, &[0]).unwrap() - 1.0).abs() < 1e-12);

        let p = init_product_state(&[QubitInit::Plus, QubitInit::Zero]).unwrap();
        assert!(distillation_rate(&p, &[1]).unwrap().abs() < 1e-12);
        assert!(matches!(schmidt_spectrum(&p, &[]), Err(Error::BadCut)));
        assert!(matches!(schmidt_spectrum(&p, &[0, 1]), Err(Error::BadCut)));
    }

    #[test]
    fn partially_entangled_rate() {
        let th = std::f64::consts::PI / 6.0;
        let mut amps = vec![C64::new(0.0, 0.0); 4];
        amps[0] = C64::new(th.cos(), 0.0);
        amps[3] = C64::new(th.sin(), 0.0);
        let s = PureState::from_amplitudes(amps).unwrap();
        let want = binary_entropy(0.25);
        assert!((want - 0.8113).abs() < 1e-4);
        assert!((distillation_rate(&s, &[0]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn majorization() {
        assert!(nielsen_convertible(&[0.5, 0.5], &[1.0, 0.0]));
        assert!(!nielsen_convertible(&[1.0, 0.0], &[0.5, 0.5]));
        assert!(nielsen_convertible(&[0.5, 0.3, 0.2], &[0.6, 0.4]));
        assert!(!nielsen_convertible(&[0.6, 0.4], &[0.5, 0.3, 0.2]));
    }
}
