use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{DjcmError, Result};
use crate::propagator::JcmParams;

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Lorentzian reservoir spectrum centred on `ω1 = ω0 − Ω`.
pub fn spectral_density(p: &JcmParams, omega: f64) -> f64 {
    let center = p.omega0 - p.omega;
    let detuning = center - omega;
    p.gamma0 * p.lambda * p.lambda / (2.0 * PI * (detuning * detuning + p.lambda * p.lambda))
}

/// Reservoir correlation function: the Fourier transform of the Lorentzian
/// spectrum over the whole frequency axis, `(γ0 λ / 2) e^{−λ|τ|}` measured
/// in the frame rotating at the spectral centre.
pub fn memory_kernel(p: &JcmParams, tau: f64) -> f64 {
    0.5 * p.gamma0 * p.lambda * (-p.lambda * tau.abs()).exp()
}

/// Second-order decay rate at transition frequency `omega`,
/// `γ(ω, t) = 2 Re ∫₀ᵗ e^{i(ω−ω1)τ} k(τ) dτ`, by adaptive quadrature with
/// absolute tolerance 1e-10.
pub fn rate_from_spectral_density(p: &JcmParams, omega: f64, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(DjcmError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let detuning = omega - (p.omega0 - p.omega);
    let integrand =
        |tau: f64| 2.0 * (C64::from_polar(1.0, detuning * tau) * memory_kernel(p, tau)).re;

    // Panels of about a quarter oscillation or e-fold keep Simpson honest.
    let fastest = detuning.abs().max(p.lambda).max(1e-12);
    let panels = ((t * fastest) / (0.5 * PI)).ceil().clamp(1.0, 1e6) as usize;
    let tol = 1e-10;
    let width = t / panels as f64;
    Ok((0..panels)
        .map(|k| {
            let a = k as f64 * width;
            let b = if k + 1 == panels { t } else { a + width };
            adaptive_simpson(&integrand, a, b, tol / panels as f64)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_polynomial_and_trig() {
        let cubic = |x: f64| x * x * x - 2.0 * x;
        assert_abs_diff_eq!(
            adaptive_simpson(&cubic, 0.0, 2.0, 1e-12),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            adaptive_simpson(&f64::sin, 0.0, PI, 1e-12),
            2.0,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(
            adaptive_simpson(&f64::exp, 0.0, 1.0, 1e-12),
            1.0f64.exp() - 1.0,
            epsilon = 1e-11
        );
    }

    #[test]
    fn rate_at_zero_time() {
        let p = JcmParams::scaled(1.0, 5.0).unwrap();
        assert_eq!(
            rate_from_spectral_density(&p, p.omega0 - p.omega, 0.0).unwrap(),
            0.0
        );
        assert!(rate_from_spectral_density(&p, 0.0, -1.0).is_err());
    }

    #[test]
    fn spectrum_normalisation() {
        // ∫ J dω = γ0 λ / 2 = k(0). Integrate in the variable u = atan((ω − ω1)/λ).
        let p = JcmParams::scaled(1.0, 0.7).unwrap();
        let center = p.omega0 - p.omega;
        let g = |u: f64| {
            let w = center + p.lambda * u.tan();
            spectral_density(&p, w) * p.lambda / (u.cos() * u.cos())
        };
        let total = adaptive_simpson(&g, -0.5 * PI + 1e-9, 0.5 * PI - 1e-9, 1e-12);
        assert_abs_diff_eq!(total, memory_kernel(&p, 0.0), epsilon = 1e-8);
    }
}
