//! Fixed-step RK4 integration of the TCL2 master equation
//!
//! ```text
//! dR/dt = −i[H, R] + Σ_k (γ_k(t)/2) (L_k R L_k† − ½{L_k† L_k, R})
//! ```
//!
//! with `H = diag(ω0/2 + Ω, ω0/2 − Ω, −ω0/2)` in the dressed basis and jump
//! operators `|E0><E1+|` (rate `γ(ω0+Ω, t)`) and `|E0><E1−|` (rate
//! `γ(ω0−Ω, t)`). Two partitions use `H_A ⊗ 1 + 1 ⊗ H_B` and the jump
//! operators of each partition tensored with the identity of the other.

use num_complex::Complex64 as C64;

use crate::basis::{E_MINUS, E_PLUS, E_ZERO};
use crate::error::{DjcmError, Result};
use crate::evolution::DjcmState;
use crate::linalg::ComplexMatrix;
use crate::propagator::{decay_rate_minus, decay_rate_plus, DressedState3, JcmParams};

/// Drift of the trace over a run above this aborts the integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
/// Step must not exceed this fraction of the fastest timescale.
pub const STEP_FRACTION: f64 = 1.0 / 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl IntegratorConfig {
    /// Largest step admitted for the given partitions.
    pub fn max_step(params: &[JcmParams]) -> f64 {
        let mut fastest = 0.0_f64;
        for p in params {
            fastest = fastest
                .max(p.lambda)
                .max(p.gamma0)
                .max(p.omega)
                .max(p.omega0 + p.omega);
        }
        STEP_FRACTION / fastest
    }

    /// Config using the largest admissible step.
    pub fn for_params(params: &[JcmParams], t_end: f64, record_every: usize) -> Self {
        Self {
            step: Self::max_step(params),
            t_end,
            record_every,
        }
    }

    pub fn validate(&self, params: &[JcmParams]) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(DjcmError::IntegratorConfig(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(DjcmError::IntegratorConfig(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(DjcmError::IntegratorConfig(
                "record_every must be >= 1".into(),
            ));
        }
        let bound = Self::max_step(params);
        if self.step > bound * (1.0 + 1e-12) {
            return Err(DjcmError::IntegratorConfig(format!(
                "step {} exceeds the bound {bound} set by the fastest timescale",
                self.step
            )));
        }
        Ok(())
    }

    /// Number of RK4 steps; the actual step is `t_end / steps <= step`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.step - 1e-9).ceil().max(0.0) as usize
    }
}

/// Recorded integration output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub params: Vec<JcmParams>,
    /// Largest `|tr R(t) − tr R(0)|` seen at any step.
    pub max_trace_drift: f64,
    /// Largest Hermiticity defect seen at any recorded state.
    pub max_hermiticity_defect: f64,
}

/// Operator stored as a list of nonzero entries.
#[derive(Debug, Clone)]
struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn new(dim: usize, entries: Vec<(usize, usize, C64)>) -> Self {
        Self { dim, entries }
    }

    fn adjoint(&self) -> Self {
        Self::new(
            self.dim,
            self.entries
                .iter()
                .map(|&(i, j, v)| (j, i, v.conj()))
                .collect(),
        )
    }

    fn compose(&self, other: &Self) -> Self {
        let mut dense = ComplexMatrix::zeros(self.dim);
        for &(i, k, a) in &self.entries {
            for &(k2, j, b) in &other.entries {
                if k == k2 {
                    dense[(i, j)] += a * b;
                }
            }
        }
        Self::from_dense(&dense)
    }

    fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::new(n, entries)
    }

    /// `self ⊗ 1_n` (left) or `1_n ⊗ self` (right).
    fn embed(&self, n: usize, left: bool) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len() * n);
        for &(i, j, v) in &self.entries {
            for k in 0..n {
                if left {
                    entries.push((i * n + k, j * n + k, v));
                } else {
                    entries.push((k * self.dim + i, k * self.dim + j, v));
                }
            }
        }
        Self::new(self.dim * n, entries)
    }

    fn sum(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(self.dim, entries)
    }

    /// `out += c · S M`.
    fn left_mul_into(&self, m: &ComplexMatrix, c: C64, out: &mut ComplexMatrix) {
        let n = self.dim;
        for &(i, k, v) in &self.entries {
            let f = c * v;
            for j in 0..n {
                out[(i, j)] += f * m[(k, j)];
            }
        }
    }

    /// `out += c · M S`.
    fn right_mul_into(&self, m: &ComplexMatrix, c: C64, out: &mut ComplexMatrix) {
        let n = self.dim;
        for &(k, j, v) in &self.entries {
            let f = c * v;
            for i in 0..n {
                out[(i, j)] += f * m[(i, k)];
            }
        }
    }

    fn left_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        self.left_mul_into(m, C64::new(1.0, 0.0), &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
struct Channel {
    jump: SparseOp,
    jump_adj: SparseOp,
    number: SparseOp,
    params: JcmParams,
    branch: Branch,
}

impl Channel {
    fn new(jump: SparseOp, params: JcmParams, branch: Branch) -> Self {
        let jump_adj = jump.adjoint();
        let number = jump_adj.compose(&jump);
        Self {
            jump,
            jump_adj,
            number,
            params,
            branch,
        }
    }

    fn rate(&self, t: f64) -> Result<f64> {
        match self.branch {
            Branch::Plus => decay_rate_plus(&self.params, t),
            Branch::Minus => decay_rate_minus(&self.params, t),
        }
    }
}

/// Time-dependent master-equation generator.
#[derive(Debug, Clone)]
struct Generator {
    hamiltonian: SparseOp,
    channels: Vec<Channel>,
}

fn single_hamiltonian(p: &JcmParams) -> SparseOp {
    let c = |x: f64| C64::new(x, 0.0);
    SparseOp::new(
        3,
        vec![
            (E_PLUS, E_PLUS, c(0.5 * p.omega0 + p.omega)),
            (E_MINUS, E_MINUS, c(0.5 * p.omega0 - p.omega)),
            (E_ZERO, E_ZERO, c(-0.5 * p.omega0)),
        ],
    )
}

fn lowering(from: usize) -> SparseOp {
    SparseOp::new(3, vec![(E_ZERO, from, C64::new(1.0, 0.0))])
}

impl Generator {
    fn single(p: &JcmParams) -> Self {
        Self {
            hamiltonian: single_hamiltonian(p),
            channels: vec![
                Channel::new(lowering(E_PLUS), *p, Branch::Plus),
                Channel::new(lowering(E_MINUS), *p, Branch::Minus),
            ],
        }
    }

    fn pair(pa: &JcmParams, pb: &JcmParams) -> Self {
        let ha = single_hamiltonian(pa).embed(3, true);
        let hb = single_hamiltonian(pb).embed(3, false);
        let mut channels = Vec::with_capacity(4);
        for (from, branch) in [(E_PLUS, Branch::Plus), (E_MINUS, Branch::Minus)] {
            channels.push(Channel::new(lowering(from).embed(3, true), *pa, branch));
            channels.push(Channel::new(lowering(from).embed(3, false), *pb, branch));
        }
        Self {
            hamiltonian: ha.sum(&hb),
            channels,
        }
    }

    fn apply(&self, t: f64, r: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(r.dim());
        let minus_i = C64::new(0.0, -1.0);
        self.hamiltonian.left_mul_into(r, minus_i, &mut out);
        self.hamiltonian.right_mul_into(r, -minus_i, &mut out);
        for ch in &self.channels {
            let half_rate = 0.5 * ch.rate(t)?;
            if half_rate == 0.0 {
                continue;
            }
            let lr = ch.jump.left_mul(r);
            ch.jump_adj
                .right_mul_into(&lr, C64::new(half_rate, 0.0), &mut out);
            let quarter = C64::new(-0.5 * half_rate, 0.0);
            ch.number.left_mul_into(r, quarter, &mut out);
            ch.number.right_mul_into(r, quarter, &mut out);
        }
        Ok(out)
    }
}

fn axpy(base: &ComplexMatrix, k: &ComplexMatrix, h: f64) -> ComplexMatrix {
    &base.clone() + &k.scale_real(h)
}

fn run(
    generator: &Generator,
    r0: &ComplexMatrix,
    cfg: &IntegratorConfig,
    params: Vec<JcmParams>,
) -> Result<Trajectory> {
    cfg.validate(&params)?;
    let steps = cfg.steps();
    let h = if steps == 0 {
        0.0
    } else {
        cfg.t_end / steps as f64
    };
    let trace0 = r0.trace();

    let mut r = r0.clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![r.clone()],
        params,
        max_trace_drift: 0.0,
        max_hermiticity_defect: r.hermiticity_defect().0,
    };

    for step in 1..=steps {
        let t = (step - 1) as f64 * h;
        let k1 = generator.apply(t, &r)?;
        let k2 = generator.apply(t + 0.5 * h, &axpy(&r, &k1, 0.5 * h))?;
        let k3 = generator.apply(t + 0.5 * h, &axpy(&r, &k2, 0.5 * h))?;
        let k4 = generator.apply(t + h, &axpy(&r, &k3, h))?;
        let mut incr = &(&k1 + &k4) + &(&k2 + &k3).scale_real(2.0);
        incr = incr.scale_real(h / 6.0);
        r = &r + &incr;

        let drift = (r.trace() - trace0).norm();
        traj.max_trace_drift = traj.max_trace_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(DjcmError::Consistency(format!(
                "RK4 trace drift {drift:e} at t = {}",
                step as f64 * h
            )));
        }
        if step % cfg.record_every == 0 || step == steps {
            traj.max_hermiticity_defect = traj.max_hermiticity_defect.max(r.hermiticity_defect().0);
            traj.times.push(step as f64 * h);
            traj.states.push(r.clone());
        }
    }
    Ok(traj)
}

/// Integrates a single partition from `r0`.
pub fn integrate_single(
    r0: &DressedState3,
    p: &JcmParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    p.validate()?;
    run(&Generator::single(p), r0.matrix(), cfg, vec![*p])
}

/// Integrates two non-interacting partitions from `r0`.
pub fn integrate_pair(
    r0: &DjcmState,
    pa: &JcmParams,
    pb: &JcmParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    pa.validate()?;
    pb.validate()?;
    run(&Generator::pair(pa, pb), r0.matrix(), cfg, vec![*pa, *pb])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_bound_enforced() {
        let p = JcmParams::scaled(50.0, 5.0).unwrap();
        let ok = IntegratorConfig::for_params(&[p], 1.0, 1);
        assert!((ok.step - 1.0 / 2500.0).abs() < 1e-15);
        assert!(ok.validate(&[p]).is_ok());
        let bad = IntegratorConfig { step: 0.01, ..ok };
        assert!(matches!(
            bad.validate(&[p]),
            Err(DjcmError::IntegratorConfig(_))
        ));
        assert!(IntegratorConfig {
            record_every: 0,
            ..ok
        }
        .validate(&[p])
        .is_err());
        assert!(IntegratorConfig { step: -1.0, ..ok }
            .validate(&[p])
            .is_err());
    }

    #[test]
    fn ground_state_is_constant() {
        let p = JcmParams::scaled(1.0, 5.0).unwrap();
        let cfg = IntegratorConfig::for_params(&[p], 5.0, 10);
        let traj = integrate_single(&DressedState3::basis_projector(E_ZERO), &p, &cfg).unwrap();
        for s in &traj.states {
            assert_eq!(s, DressedState3::basis_projector(E_ZERO).matrix());
        }
        assert_eq!(*traj.times.last().unwrap(), 5.0);
    }

    #[test]
    fn times_strictly_increasing() {
        let p = JcmParams::scaled(1.0, 0.05).unwrap();
        let cfg = IntegratorConfig::for_params(&[p], 3.3, 7);
        let traj = integrate_single(&DressedState3::basis_projector(E_PLUS), &p, &cfg).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.times.len(), traj.states.len());
        assert!((traj.times.last().unwrap() - 3.3).abs() < 1e-12);
    }
}
