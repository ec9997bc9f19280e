//! Single atom–cavity–reservoir partition: time-dependent decay rates, their
//! running integrals, and the closed-form propagator of the 3×3 dressed-basis
//! density matrix.
//!
//! Dressed basis order is `{|E1+>, |E1->, |E0>}` (indices 0, 1, 2). The
//! `|E1+>` branch decays with `γ(ω0+Ω, t)`, the `|E1->` branch with
//! `γ(ω0−Ω, t)`; both feed `|E0>`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{DjcmError, Result};
use crate::linalg::ComplexMatrix;

/// Physical parameters of one partition. Rates and frequencies share one
/// time unit; the figure presets use `gamma0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcmParams {
    /// Atomic Bohr frequency ω0.
    #[serde(default)]
    pub omega0: f64,
    /// Atom–cavity coupling Ω.
    pub omega: f64,
    /// Reservoir relaxation rate γ0.
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    /// Reservoir spectral width λ.
    pub lambda: f64,
}

fn default_gamma0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// λ > 2γ0.
    Markovian,
    /// λ < 2γ0.
    NonMarkovian,
    /// λ = 2γ0 exactly.
    Boundary,
}

impl JcmParams {
    pub fn new(omega0: f64, omega: f64, gamma0: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            omega0,
            omega,
            gamma0,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant partition in units of γ0 with ω0 = 0.
    pub fn scaled(omega: f64, lambda: f64) -> Result<Self> {
        Self::new(0.0, omega, 1.0, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega0, self.omega, self.gamma0, self.lambda]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(DjcmError::InvalidParams(format!(
                "non-finite parameter in {self:?}"
            )));
        }
        if self.gamma0 <= 0.0 {
            return Err(DjcmError::InvalidParams(format!(
                "gamma0 must be > 0, got {}",
                self.gamma0
            )));
        }
        if self.lambda <= 0.0 {
            return Err(DjcmError::InvalidParams(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if self.omega < 0.0 {
            return Err(DjcmError::InvalidParams(format!(
                "omega must be >= 0, got {}",
                self.omega
            )));
        }
        if self.omega0 < 0.0 {
            return Err(DjcmError::InvalidParams(format!(
                "omega0 must be >= 0, got {}",
                self.omega0
            )));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        let threshold = 2.0 * self.gamma0;
        if self.lambda > threshold {
            Regime::Markovian
        } else if self.lambda < threshold {
            Regime::NonMarkovian
        } else {
            Regime::Boundary
        }
    }

    /// Asymptotic decay rate of the `|E1+>` branch, `γ0 λ² / (4Ω² + λ²)`.
    pub fn plus_branch_rate(&self) -> f64 {
        self.gamma0 * self.lambda * self.lambda / self.plus_denominator()
    }

    fn plus_denominator(&self) -> f64 {
        4.0 * self.omega * self.omega + self.lambda * self.lambda
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(DjcmError::NegativeTime(t));
    }
    Ok(())
}

/// `γ(ω0−Ω, t) = γ0 (1 − e^{−λt})`.
pub fn decay_rate_minus(p: &JcmParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(p.gamma0 * (1.0 - (-p.lambda * t).exp()))
}

/// `γ(ω0+Ω, t)`. Can go negative transiently when λ ≪ Ω; not clamped.
pub fn decay_rate_plus(p: &JcmParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let two_omega_t = 2.0 * p.omega * t;
    let bracket = (2.0 * p.omega / p.lambda) * two_omega_t.sin() - two_omega_t.cos();
    Ok(p.plus_branch_rate() * (1.0 + bracket * (-p.lambda * t).exp()))
}

/// `I−(t) = ∫₀ᵗ γ(ω0−Ω, s) ds`.
pub fn accumulated_i_minus(p: &JcmParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(p.gamma0 * t + (p.gamma0 / p.lambda) * ((-p.lambda * t).exp() - 1.0))
}

/// `I+(t) = ∫₀ᵗ γ(ω0+Ω, s) ds`.
pub fn accumulated_i_plus(p: &JcmParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let (om, lam) = (p.omega, p.lambda);
    let d = p.plus_denominator();
    let decay = (-lam * t).exp();
    let two_omega_t = 2.0 * om * t;
    let oscillating = -4.0 * om * decay * two_omega_t.sin() / d;
    let relaxing = (lam * lam - 4.0 * om * om) * (decay * two_omega_t.cos() - 1.0) / (lam * d);
    Ok(p.plus_branch_rate() * (t + oscillating + relaxing))
}

/// The eight independent propagator coefficients of one partition at time `t`.
///
/// Naming: `a12` multiplies `R12(0)` to give `R12(t)`; `a33_11` feeds
/// `R11(0)` into `R33(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorCoeffs {
    pub t: f64,
    pub a11: C64,
    pub a12: C64,
    pub a13: C64,
    pub a22: C64,
    pub a23: C64,
    pub a33_11: C64,
    pub a33_22: C64,
    pub a33_33: C64,
}

impl PropagatorCoeffs {
    pub fn at(p: &JcmParams, t: f64) -> Result<Self> {
        coefficients(p, t)
    }

    pub fn a21(&self) -> C64 {
        self.a12.conj()
    }

    pub fn a31(&self) -> C64 {
        self.a13.conj()
    }

    pub fn a32(&self) -> C64 {
        self.a23.conj()
    }

    /// Propagation factor of element `(i, j)` onto itself, 0-based.
    pub fn self_factor(&self, i: usize, j: usize) -> C64 {
        match (i, j) {
            (0, 0) => self.a11,
            (0, 1) => self.a12,
            (0, 2) => self.a13,
            (1, 0) => self.a21(),
            (1, 1) => self.a22,
            (1, 2) => self.a23,
            (2, 0) => self.a31(),
            (2, 1) => self.a32(),
            (2, 2) => self.a33_33,
            _ => panic!("dressed index ({i}, {j}) out of range"),
        }
    }
}

pub fn coefficients(p: &JcmParams, t: f64) -> Result<PropagatorCoeffs> {
    let i_plus = accumulated_i_plus(p, t)?;
    let i_minus = accumulated_i_minus(p, t)?;
    let a11 = (-0.5 * i_plus).exp();
    let a22 = (-0.5 * i_minus).exp();
    let phase = |w: f64| C64::from_polar(1.0, -w * t);
    Ok(PropagatorCoeffs {
        t,
        a11: C64::new(a11, 0.0),
        a12: phase(2.0 * p.omega) * (-0.25 * (i_plus + i_minus)).exp(),
        a13: phase(p.omega0 + p.omega) * (-0.25 * i_plus).exp(),
        a22: C64::new(a22, 0.0),
        a23: phase(p.omega0 - p.omega) * (-0.25 * i_minus).exp(),
        a33_11: C64::new(1.0 - a11, 0.0),
        a33_22: C64::new(1.0 - a22, 0.0),
        a33_33: C64::new(1.0, 0.0),
    })
}

/// Density matrix of one partition in the dressed basis `{|E1+>, |E1->, |E0>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState3(ComplexMatrix);

impl DressedState3 {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 3 {
            return Err(DjcmError::Dimension(format!(
                "expected 3x3, got {0}x{0}",
                m.dim()
            )));
        }
        m.check_hermitian(Self::TOL)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > Self::TOL || tr.im.abs() > Self::TOL {
            return Err(DjcmError::Consistency(format!("trace {tr} differs from 1")));
        }
        Ok(Self(m))
    }

    /// `|k><k|` for dressed index `k`.
    pub fn basis_projector(k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(3);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// Closed-form evolution of a single partition to time `t`.
pub fn propagate_single(r0: &DressedState3, p: &JcmParams, t: f64) -> Result<DressedState3> {
    let a = coefficients(p, t)?;
    let r = r0.matrix();
    let mut out = ComplexMatrix::zeros(3);
    out[(0, 0)] = a.a11 * r[(0, 0)];
    out[(0, 1)] = a.a12 * r[(0, 1)];
    out[(0, 2)] = a.a13 * r[(0, 2)];
    out[(1, 1)] = a.a22 * r[(1, 1)];
    out[(1, 2)] = a.a23 * r[(1, 2)];
    out[(2, 2)] = a.a33_11 * r[(0, 0)] + a.a33_22 * r[(1, 1)] + a.a33_33 * r[(2, 2)];
    out.hermitian_from_upper();

    let (defect, i, j) = out.hermiticity_defect();
    if defect > DressedState3::TOL {
        return Err(DjcmError::Consistency(format!(
            "propagated state not Hermitian at ({i}, {j}): {defect:e}"
        )));
    }
    Ok(DressedState3(out))
}

/// Smallest value of `I+` on a uniform grid of `samples` points over `[0, t_max]`.
pub fn min_i_plus_on_grid(p: &JcmParams, t_max: f64, samples: usize) -> Result<f64> {
    let n = samples.max(2);
    (0..n)
        .map(|k| accumulated_i_plus(p, t_max * k as f64 / (n - 1) as f64))
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
}

/// Smallest value of `γ(ω0+Ω, t)` on a uniform grid; negative values mark
/// transient information backflow.
pub fn min_rate_plus_on_grid(p: &JcmParams, t_max: f64, samples: usize) -> Result<f64> {
    let n = samples.max(2);
    (0..n)
        .map(|k| decay_rate_plus(p, t_max * k as f64 / (n - 1) as f64))
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
}
