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
use rand_distr::{Distribution, StandardNormal};

use super::{DENSITY_QUBIT_CAP, NORM_TOL};
use crate::error::{Error, Result};
use crate::gate::C64;
use crate::rng::RngStream;

/// A unitary bound to an ordered list of target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: DMatrix<C64>,
    targets: Vec<usize>,
}

impl Unitary {
    pub fn new(matrix: DMatrix<C64>, targets: Vec<usize>) -> Result<Self> {
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        let u = Self { matrix, targets };
        if !u.is_unitary(NORM_TOL) {
            return Err(Error::DimensionMismatch("matrix is not unitary".into()));
        }
        Ok(u)
    }

    pub fn identity(targets: Vec<usize>) -> Self {
        let d = 1 << targets.len();
        Self {
            matrix: DMatrix::identity(d, d),
            targets,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn num_qubits(&self) -> usize {
        self.targets.len()
    }

    /// max |(UU† − I)ᵢⱼ| ≤ tol.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.matrix.nrows();
        let p = &self.matrix * self.matrix.adjoint() - DMatrix::<C64>::identity(d, d);
        p.iter().all(|x| x.norm() <= tol)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            targets: self.targets.clone(),
        }
    }

    /// Same matrix, different targets.
    pub fn on(&self, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != self.targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} targets for a {}-qubit unitary",
                targets.len(),
                self.targets.len()
            )));
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            targets,
        })
    }
}

/// Haar-random `k`-qubit unitary acting on targets `0..k`.
///
/// QR of a complex Ginibre matrix, with the phases of R's diagonal folded
/// back into Q.
pub fn haar_unitary(k: usize, rng: &mut RngStream) -> Result<Unitary> {
    if k > DENSITY_QUBIT_CAP {
        return Err(Error::TooLarge(k, DENSITY_QUBIT_CAP));
    }
    let d = 1usize << k;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rj = r[(j, j)];
        let phase = if rj.norm() > 0.0 {
            rj / rj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(Unitary {
        matrix: q,
        targets: (0..k).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{init_product_state, PureState, QubitInit};
    use crate::rng::seeded;

    #[test]
    fn haar_is_unitary_and_replayable() {
        let u = haar_unitary(3, &mut seeded(5)).unwrap();
        assert!(u.is_unitary(1e-10));
        let v = haar_unitary(3, &mut seeded(5)).unwrap();
        assert_eq!(u, v);
        assert!(matches!(
            haar_unitary(13, &mut seeded(0)),
            Err(Error::TooLarge(13, _))
        ));
    }

    #[test]
    fn haar_first_moment() {
        // E|U₀₀|² = 1/d
        let mut rng = seeded(17);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| haar_unitary(1, &mut rng).unwrap().matrix()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }

    #[test]
    fn haar_phases_are_not_biased() {
        // Without the diagonal phase fix, U₀₀ would be real and positive.
        let mut rng = seeded(23);
        let n = 4000;
        let mean_re: f64 = (0..n)
            .map(|_| haar_unitary(1, &mut rng).unwrap().matrix()[(0, 0)].re)
            .sum::<f64>()
            / n as f64;
        assert!(mean_re.abs() < 0.05, "{mean_re}");
    }

    #[test]
    fn inverse_composition_is_identity() {
        let mut rng = seeded(2);
        let u = haar_unitary(2, &mut rng).unwrap().on(vec![2, 0]).unwrap();
        let init = init_product_state(&[
            QubitInit::Plus,
            QubitInit::One,
            QubitInit::Custom(C64::new(0.6, 0.0), C64::new(0.0, 0.8)),
        ])
        .unwrap();
        let mut s: PureState = init.clone();
        s.apply_unitary(&u).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        s.apply_unitary(&u.adjoint()).unwrap();
        assert!(s.max_abs_diff(&init) < 1e-10);
    }

    #[test]
    fn rejects_bad_shapes() {
        let m = DMatrix::<C64>::identity(4, 4);
        assert!(Unitary::new(m.clone(), vec![0]).is_err());
        let mut bad = m;
        bad[(0, 0)] = C64::new(2.0, 0.0);
        assert!(Unitary::new(bad, vec![0, 1]).is_err());
    }
}
