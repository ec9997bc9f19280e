//! Two-qubit concurrence and the quasi-steady reduced states.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::basis::Subsystem;
use crate::error::{DjcmError, Result};
use crate::linalg::{hermitian_eig, kron, pauli_y, ComplexMatrix};
use crate::states::{PairState, ReductionTarget};

/// Eigenvalues of the input state down to this value are clipped to zero.
pub const STATE_NEGATIVITY_TOL: f64 = 1e-8;
/// Values of `λ_i` down to this value are clipped to zero.
pub const PRODUCT_NEGATIVITY_TOL: f64 = 1e-10;

const X_STATE_TOL: f64 = 1e-10;

/// Positive root of `63 r² + 50 r − 49`, the purity above which the
/// nonlocal quasi-steady pairs stay entangled.
pub const STEADY_THRESHOLD_R: f64 = 0.570_256_902_331_924_9;

/// Wootters concurrence.
///
/// The `λ_i` (square roots of the spectrum of `ρ ρ̃`) are the singular values
/// of `M = √ρ (σy⊗σy) √ρ*`, since `M M† = √ρ ρ̃ √ρ`. They are read off the
/// Hermitian dilation `[[0, M], [M†, 0]]`, whose spectrum is `±λ_i`, so no
/// square root of a noisy near-zero eigenvalue is ever taken.
pub fn concurrence(p: &PairState) -> Result<f64> {
    let rho = p.matrix();
    let eig = hermitian_eig(rho)?;
    let lowest = *eig.eigenvalues.last().expect("4 eigenvalues");
    if lowest < -STATE_NEGATIVITY_TOL {
        return Err(DjcmError::NotPositive {
            eigenvalue: lowest,
            tolerance: -STATE_NEGATIVITY_TOL,
        });
    }
    let mut sqrt_rho = eig.reconstruct_with(|x| x.max(0.0).sqrt());
    sqrt_rho.hermitian_from_upper();

    let yy = kron(&pauli_y(), &pauli_y());
    let m = sqrt_rho.matmul(&yy).matmul(&sqrt_rho.conj());
    let dilation = ComplexMatrix::from_fn(8, |i, j| match (i < 4, j < 4) {
        (true, false) => m[(i, j - 4)],
        (false, true) => m[(j, i - 4)].conj(),
        _ => C64::new(0.0, 0.0),
    });

    let spectrum = hermitian_eig(&dilation)?.eigenvalues;
    let lambdas: Vec<f64> = spectrum[..4]
        .iter()
        .map(|&l| {
            if l < -PRODUCT_NEGATIVITY_TOL {
                Err(DjcmError::NotPositive {
                    eigenvalue: l,
                    tolerance: -PRODUCT_NEGATIVITY_TOL,
                })
            } else {
                Ok(l.max(0.0))
            }
        })
        .collect::<Result<_>>()?;
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Closed-form concurrence of a state supported on the diagonal and
/// anti-diagonal only: `2 max(0, |ρ23| − √(ρ11ρ44), |ρ14| − √(ρ22ρ33))`.
pub fn concurrence_x_state(p: &PairState) -> Result<f64> {
    let m = p.matrix();
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 && m[(i, j)].norm() > X_STATE_TOL {
                return Err(DjcmError::NotXState {
                    row: i,
                    col: j,
                    magnitude: m[(i, j)].norm(),
                });
            }
        }
    }
    let d: Vec<f64> = m.diagonal_real().into_iter().map(|x| x.max(0.0)).collect();
    let inner = m[(1, 2)].norm() - (d[0] * d[3]).sqrt();
    let outer = m[(0, 3)].norm() - (d[1] * d[2]).sqrt();
    Ok(2.0 * inner.max(outer).max(0.0))
}

fn check_purity(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(DjcmError::PurityOutOfRange(r));
    }
    Ok(())
}

/// Quasi-steady state shared by the AB, ab, Ab and aB pairs.
pub fn steady_pair_nonlocal(r: f64) -> Result<PairState> {
    check_purity(r)?;
    let mut m = ComplexMatrix::from_diag(&[
        (1.0 - r) / 64.0,
        (7.0 + r) / 64.0,
        (7.0 + r) / 64.0,
        (49.0 - r) / 64.0,
    ]);
    m[(1, 2)] = C64::new(r / 8.0, 0.0);
    m[(2, 1)] = C64::new(r / 8.0, 0.0);
    PairState::unlabeled(m)
}

/// Quasi-steady state of each atom with its own cavity; independent of `r`.
pub fn steady_pair_local() -> PairState {
    let e = 1.0 / 8.0;
    let m = ComplexMatrix::from_real_rows(&[
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, e, e, 0.0],
        &[0.0, e, e, 0.0],
        &[0.0, 0.0, 0.0, 0.75],
    ])
    .expect("4x4");
    PairState::new(m, (Subsystem::AtomA, Subsystem::CavityA)).expect("valid steady state")
}

/// The quasi-steady target state for a given pair.
pub fn steady_pair(target: ReductionTarget, r: f64) -> Result<PairState> {
    if target.is_local() {
        check_purity(r)?;
        Ok(steady_pair_local())
    } else {
        steady_pair_nonlocal(r)
    }
}

/// Concurrence of [`steady_pair_nonlocal`] in closed form.
pub fn steady_concurrence_nonlocal(r: f64) -> Result<f64> {
    check_purity(r)?;
    Ok(steady_concurrence_expression(r).max(0.0) * 2.0)
}

/// `r/8 − √((1−r)(49−r))/64`; its sign decides entanglement.
pub fn steady_concurrence_expression(r: f64) -> f64 {
    r / 8.0 - ((1.0 - r) * (49.0 - r)).max(0.0).sqrt() / 64.0
}

/// Concurrence of every pair at one time, keyed by pair name.
#[derive(Debug, Clone, Serialize)]
pub struct ConcurrenceRecord {
    pub t: f64,
    pub values: BTreeMap<String, f64>,
}

impl ConcurrenceRecord {
    pub fn from_pairs(t: f64, pairs: &[(ReductionTarget, PairState)]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (target, state) in pairs {
            values.insert(target.name().to_string(), concurrence(state)?);
        }
        Ok(Self { t, values })
    }

    pub fn get(&self, target: ReductionTarget) -> Option<f64> {
        self.values.get(target.name()).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn werner(r: f64) -> PairState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = ComplexMatrix::projector(&[z, C64::new(s, 0.0), C64::new(s, 0.0), z]);
        let m = &bell.scale_real(r) + &ComplexMatrix::identity(4).scale_real((1.0 - r) / 4.0);
        PairState::unlabeled(m).unwrap()
    }

    #[test]
    fn bell_is_maximally_entangled() {
        assert_abs_diff_eq!(concurrence(&werner(1.0)).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            concurrence_x_state(&werner(1.0)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn product_state_is_separable() {
        let a = ComplexMatrix::from_real_rows(&[&[0.6, 0.3], &[0.3, 0.4]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[0.2, -0.1], &[-0.1, 0.8]]).unwrap();
        let p = PairState::unlabeled(kron(&a, &b)).unwrap();
        assert_abs_diff_eq!(concurrence(&p).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn werner_family() {
        for k in 0..=20 {
            let r = k as f64 / 20.0;
            let expected = ((3.0 * r - 1.0) / 2.0).max(0.0);
            assert_abs_diff_eq!(concurrence(&werner(r)).unwrap(), expected, epsilon = 1e-9);
            assert_abs_diff_eq!(
                concurrence_x_state(&werner(r)).unwrap(),
                expected,
                epsilon = 1e-14
            );
        }
        assert_abs_diff_eq!(concurrence(&werner(0.5)).unwrap(), 0.25, epsilon = 1e-10);
    }

    #[test]
    fn x_state_rejects_general_states() {
        let mut m = ComplexMatrix::identity(4).scale_real(0.25);
        m[(0, 1)] = C64::new(0.05, 0.0);
        m[(1, 0)] = C64::new(0.05, 0.0);
        let p = PairState::unlabeled(m).unwrap();
        assert!(matches!(
            concurrence_x_state(&p),
            Err(DjcmError::NotXState { row: 0, col: 1, .. })
        ));
        let mixed = PairState::unlabeled(ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        assert_eq!(concurrence_x_state(&mixed).unwrap(), 0.0);
    }

    #[test]
    fn negative_states_rejected() {
        let m = ComplexMatrix::from_diag(&[0.5, 0.5, 0.1, -0.1]);
        let p = PairState::unlabeled(m).unwrap();
        assert!(matches!(
            concurrence(&p),
            Err(DjcmError::NotPositive { .. })
        ));
    }

    #[test]
    fn steady_states() {
        let local = steady_pair_local();
        assert_abs_diff_eq!(local.matrix().trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence_x_state(&local).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence(&local).unwrap(), 0.25, epsilon = 1e-10);

        let r1 = steady_pair_nonlocal(1.0).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.125, 0.125, 0.0],
            &[0.0, 0.125, 0.125, 0.0],
            &[0.0, 0.0, 0.0, 0.75],
        ])
        .unwrap();
        assert!(r1.matrix().max_abs_diff(&expected) < 1e-15);
        assert_abs_diff_eq!(concurrence_x_state(&r1).unwrap(), 0.25, epsilon = 1e-15);

        let r0 = steady_pair_nonlocal(0.0).unwrap();
        assert!(
            r0.matrix().max_abs_diff(&ComplexMatrix::from_diag(&[
                1.0 / 64.0,
                7.0 / 64.0,
                7.0 / 64.0,
                49.0 / 64.0
            ])) < 1e-15
        );
        assert_eq!(concurrence(&r0).unwrap(), 0.0);

        for k in 0..=10 {
            let r = k as f64 / 10.0;
            assert_abs_diff_eq!(
                steady_pair_nonlocal(r).unwrap().matrix().trace().re,
                1.0,
                epsilon = 1e-15
            );
        }
        assert!(steady_pair_nonlocal(1.2).is_err());
    }

    #[test]
    fn local_steady_state_is_dressed_mixture() {
        // (1/4)|E1+><E1+| + (3/4)|E0><E0| written in (atom, cavity) order:
        // |E1+> = (|g,1> + |e,0>)/√2 sits on basis indices 2 and 1.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let e_plus = [z, C64::new(h, 0.0), C64::new(h, 0.0), z];
        let e_zero = [z, z, z, C64::new(1.0, 0.0)];
        let m = &ComplexMatrix::projector(&e_plus).scale_real(0.25)
            + &ComplexMatrix::projector(&e_zero).scale_real(0.75);
        assert!(steady_pair_local().matrix().max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn steady_concurrence_examples() {
        assert_abs_diff_eq!(
            steady_concurrence_nonlocal(1.0).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert_eq!(steady_concurrence_nonlocal(0.0).unwrap(), 0.0);
        assert_eq!(steady_concurrence_nonlocal(0.5).unwrap(), 0.0);
    }

    #[test]
    fn threshold_is_quadratic_root() {
        let r = STEADY_THRESHOLD_R;
        assert_abs_diff_eq!(63.0 * r * r + 50.0 * r - 49.0, 0.0, epsilon = 1e-12);
        assert!(steady_concurrence_expression(r - 1e-6) < 0.0);
        assert!(steady_concurrence_expression(r + 1e-6) > 0.0);
    }
}
