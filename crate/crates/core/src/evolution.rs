//! Two-partition evolution in the dressed product basis.
//!
//! The partitions do not interact, so every element of the 9×9 matrix evolves
//! by a product of one coefficient from each partition, plus feeding terms
//! into the `|E0>` sectors. The rules are written out below as a static table
//! indexed with the 1-based numbering `|1> = |E1+E1+>` … `|9> = |E0E0>`, so
//! each line can be checked against the published element-wise solution.

use log::warn;
use num_complex::Complex64 as C64;

use crate::error::{DjcmError, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::propagator::{coefficients, JcmParams, PropagatorCoeffs};

/// One single-partition coefficient, `Cij` standing for `A_ij^ij` / `B_ij^ij`
/// and `C33_mm` for the feeding coefficient `A_33^mm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coef {
    C11,
    C12,
    C13,
    C21,
    C22,
    C23,
    C31,
    C32,
    C33_11,
    C33_22,
    C33_33,
}

impl Coef {
    pub fn value(self, c: &PropagatorCoeffs) -> C64 {
        match self {
            Coef::C11 => c.a11,
            Coef::C12 => c.a12,
            Coef::C13 => c.a13,
            Coef::C21 => c.a21(),
            Coef::C22 => c.a22,
            Coef::C23 => c.a23,
            Coef::C31 => c.a31(),
            Coef::C32 => c.a32(),
            Coef::C33_11 => c.a33_11,
            Coef::C33_22 => c.a33_22,
            Coef::C33_33 => c.a33_33,
        }
    }
}

/// `A(a) · B(b) · R_src(0)` with a 1-based source index.
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub a: Coef,
    pub b: Coef,
    pub src: (usize, usize),
}

/// `R_target(t) = Σ terms`, 1-based target index with `row <= col`.
#[derive(Debug, Clone, Copy)]
pub struct Rule {
    pub target: (usize, usize),
    pub terms: &'static [Term],
}

macro_rules! term {
    ($a:ident, $b:ident, $r:literal, $c:literal) => {
        Term {
            a: Coef::$a,
            b: Coef::$b,
            src: ($r, $c),
        }
    };
}

macro_rules! rule {
    ($r:literal, $c:literal => $($a:ident * $b:ident @ ($sr:literal, $sc:literal)),+ $(,)?) => {
        Rule { target: ($r, $c), terms: &[$(term!($a, $b, $sr, $sc)),+] }
    };
}

/// Diagonal rules.
pub const DIAGONAL_RULES: [Rule; 9] = [
    rule!(1, 1 => C11 * C11 @ (1, 1)),
    rule!(2, 2 => C11 * C22 @ (2, 2)),
    rule!(3, 3 => C11 * C33_11 @ (1, 1), C11 * C33_22 @ (2, 2), C11 * C33_33 @ (3, 3)),
    rule!(4, 4 => C22 * C11 @ (4, 4)),
    rule!(5, 5 => C22 * C22 @ (5, 5)),
    rule!(6, 6 => C22 * C33_11 @ (4, 4), C22 * C33_22 @ (5, 5), C22 * C33_33 @ (6, 6)),
    rule!(7, 7 => C33_11 * C11 @ (1, 1), C33_22 * C11 @ (4, 4), C33_33 * C11 @ (7, 7)),
    rule!(8, 8 => C33_11 * C22 @ (2, 2), C33_22 * C22 @ (5, 5), C33_33 * C22 @ (8, 8)),
    rule!(9, 9 =>
        C33_11 * C33_11 @ (1, 1), C33_11 * C33_22 @ (2, 2), C33_11 * C33_33 @ (3, 3),
        C33_22 * C33_11 @ (4, 4), C33_22 * C33_22 @ (5, 5), C33_22 * C33_33 @ (6, 6),
        C33_33 * C33_11 @ (7, 7), C33_33 * C33_22 @ (8, 8), C33_33 * C33_33 @ (9, 9),
    ),
];

/// Strictly upper-triangular rules; the lower triangle follows by conjugation.
pub const OFF_DIAGONAL_RULES: [Rule; 36] = [
    rule!(1, 2 => C11 * C12 @ (1, 2)),
    rule!(1, 3 => C11 * C13 @ (1, 3)),
    rule!(1, 4 => C12 * C11 @ (1, 4)),
    rule!(1, 5 => C12 * C12 @ (1, 5)),
    rule!(1, 6 => C12 * C13 @ (1, 6)),
    rule!(1, 7 => C13 * C11 @ (1, 7)),
    rule!(1, 8 => C13 * C12 @ (1, 8)),
    rule!(1, 9 => C13 * C13 @ (1, 9)),
    rule!(2, 3 => C11 * C23 @ (2, 3)),
    rule!(2, 4 => C12 * C21 @ (2, 4)),
    rule!(2, 5 => C12 * C22 @ (2, 5)),
    rule!(2, 6 => C12 * C23 @ (2, 6)),
    rule!(2, 7 => C13 * C21 @ (2, 7)),
    rule!(2, 8 => C13 * C22 @ (2, 8)),
    rule!(2, 9 => C13 * C23 @ (2, 9)),
    rule!(3, 4 => C12 * C31 @ (3, 4)),
    rule!(3, 5 => C12 * C32 @ (3, 5)),
    rule!(3, 6 => C12 * C33_11 @ (1, 4), C12 * C33_22 @ (2, 5), C12 * C33_33 @ (3, 6)),
    rule!(3, 7 => C13 * C31 @ (3, 7)),
    rule!(3, 8 => C13 * C32 @ (3, 8)),
    rule!(3, 9 => C13 * C33_11 @ (1, 7), C13 * C33_22 @ (2, 8), C13 * C33_33 @ (3, 9)),
    rule!(4, 5 => C22 * C12 @ (4, 5)),
    rule!(4, 6 => C22 * C13 @ (4, 6)),
    rule!(4, 7 => C23 * C11 @ (4, 7)),
    rule!(4, 8 => C23 * C12 @ (4, 8)),
    rule!(4, 9 => C23 * C13 @ (4, 9)),
    rule!(5, 6 => C22 * C23 @ (5, 6)),
    rule!(5, 7 => C23 * C21 @ (5, 7)),
    rule!(5, 8 => C23 * C22 @ (5, 8)),
    rule!(5, 9 => C23 * C23 @ (5, 9)),
    rule!(6, 7 => C23 * C31 @ (6, 7)),
    rule!(6, 8 => C23 * C32 @ (6, 8)),
    rule!(6, 9 => C23 * C33_11 @ (4, 7), C23 * C33_22 @ (5, 8), C23 * C33_33 @ (6, 9)),
    rule!(7, 8 => C33_11 * C12 @ (1, 2), C33_22 * C12 @ (4, 5), C33_33 * C12 @ (7, 8)),
    rule!(7, 9 => C33_11 * C13 @ (1, 3), C33_22 * C13 @ (4, 6), C33_33 * C13 @ (7, 9)),
    rule!(8, 9 => C33_11 * C23 @ (2, 3), C33_22 * C23 @ (5, 6), C33_33 * C23 @ (8, 9)),
];

/// Tolerances for the state invariants.
pub const STATE_TOL: f64 = 1e-10;
pub const POSITIVITY_WARN: f64 = -1e-8;
const TRACE_DRIFT_TOL: f64 = 1e-12;

/// Two-partition density matrix in the dressed product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DjcmState(ComplexMatrix);

impl DjcmState {
    /// Validates Hermiticity and unit trace. Positivity is only diagnosed.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 9 {
            return Err(DjcmError::Dimension(format!(
                "expected 9x9, got {0}x{0}",
                m.dim()
            )));
        }
        m.check_hermitian(STATE_TOL)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(DjcmError::Consistency(format!("trace {tr} differs from 1")));
        }
        Ok(Self(m))
    }

    /// `|k><k|` for a 0-based product index.
    pub fn basis_projector(k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(9);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Element with 1-based indices.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.0[(row - 1, col - 1)]
    }

    /// Smallest eigenvalue. Second-order TCL dynamics is not guaranteed to be
    /// completely positive, so this is reported rather than enforced.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = hermitian_eig(&self.0)?;
        Ok(*e.eigenvalues.last().expect("non-empty spectrum"))
    }
}

/// Applies the rule table with coefficient sets `a` (partition A) and `b`
/// (partition B).
pub fn apply_rules(
    r0: &ComplexMatrix,
    a: &PropagatorCoeffs,
    b: &PropagatorCoeffs,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(9);
    for rule in DIAGONAL_RULES.iter().chain(OFF_DIAGONAL_RULES.iter()) {
        let value: C64 = rule
            .terms
            .iter()
            .map(|t| t.a.value(a) * t.b.value(b) * r0[(t.src.0 - 1, t.src.1 - 1)])
            .sum();
        out[(rule.target.0 - 1, rule.target.1 - 1)] = value;
    }
    out.hermitian_from_upper();
    out
}

/// Closed-form evolution of the two-partition state to time `t`.
pub fn propagate_pair(r0: &DjcmState, pa: &JcmParams, pb: &JcmParams, t: f64) -> Result<DjcmState> {
    pa.validate()?;
    pb.validate()?;
    let a = coefficients(pa, t)?;
    let b = if identical_partition_check(pa, pb) {
        a
    } else {
        coefficients(pb, t)?
    };
    let out = apply_rules(r0.matrix(), &a, &b);

    let drift = (out.trace() - r0.matrix().trace()).norm();
    if drift > TRACE_DRIFT_TOL {
        return Err(DjcmError::Consistency(format!(
            "trace drift {drift:e} at t = {t}"
        )));
    }
    let (defect, i, j) = out.hermiticity_defect();
    if defect > STATE_TOL {
        return Err(DjcmError::Consistency(format!(
            "Hermiticity defect {defect:e} at ({i}, {j}), t = {t}"
        )));
    }
    Ok(DjcmState(out))
}

/// Like [`propagate_pair`] but also diagnoses positivity, logging a warning
/// when the smallest eigenvalue drops below [`POSITIVITY_WARN`].
pub fn propagate_pair_checked(
    r0: &DjcmState,
    pa: &JcmParams,
    pb: &JcmParams,
    t: f64,
) -> Result<(DjcmState, f64)> {
    let state = propagate_pair(r0, pa, pb, t)?;
    let min_eig = state.min_eigenvalue()?;
    if min_eig < POSITIVITY_WARN {
        warn!("state at t = {t} has eigenvalue {min_eig:e}; TCL2 positivity violated");
    }
    Ok((state, min_eig))
}

/// True when every parameter agrees to relative precision 1e-12.
pub fn identical_partition_check(pa: &JcmParams, pb: &JcmParams) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
    close(pa.omega0, pb.omega0)
        && close(pa.omega, pb.omega)
        && close(pa.gamma0, pb.gamma0)
        && close(pa.lambda, pb.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::propagator::{propagate_single, DressedState3};

    /// Single-partition map as a list of (target, source, coefficient),
    /// 0-based, derived from the 3×3 closed form without reference to the
    /// two-partition table.
    fn single_map(c: &PropagatorCoeffs) -> Vec<((usize, usize), (usize, usize), C64)> {
        let mut v = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) == (2, 2) {
                    v.push(((2, 2), (0, 0), c.a33_11));
                    v.push(((2, 2), (1, 1), c.a33_22));
                    v.push(((2, 2), (2, 2), c.a33_33));
                } else {
                    v.push(((i, j), (i, j), c.self_factor(i, j)));
                }
            }
        }
        v
    }

    fn tensor_map(r0: &ComplexMatrix, a: &PropagatorCoeffs, b: &PropagatorCoeffs) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(9);
        for &((ia, ja), (ma, na), ca) in &single_map(a) {
            for &((ib, jb), (mb, nb), cb) in &single_map(b) {
                out[(3 * ia + ib, 3 * ja + jb)] += ca * cb * r0[(3 * ma + mb, 3 * na + nb)];
            }
        }
        out
    }

    fn random_state(seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..81)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let g = ComplexMatrix::from_vec(entries).unwrap();
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        m.scale_real(1.0 / tr)
    }

    #[test]
    fn table_covers_upper_triangle_once() {
        let mut seen = [[0u8; 9]; 9];
        for r in DIAGONAL_RULES.iter().chain(OFF_DIAGONAL_RULES.iter()) {
            let (i, j) = r.target;
            assert!(i <= j);
            seen[i - 1][j - 1] += 1;
        }
        for i in 0..9 {
            for j in i..9 {
                assert_eq!(seen[i][j], 1, "element ({}, {})", i + 1, j + 1);
            }
        }
    }

    #[test]
    fn table_matches_tensor_product_of_single_maps() {
        let pa = JcmParams::new(0.7, 1.3, 1.0, 0.4).unwrap();
        let pb = JcmParams::new(0.2, 3.0, 0.8, 5.0).unwrap();
        let r0 = random_state(7);
        for t in [0.0, 0.3, 1.1, 4.0] {
            let a = coefficients(&pa, t).unwrap();
            let b = coefficients(&pb, t).unwrap();
            let table = apply_rules(&r0, &a, &b);
            let reference = tensor_map(&r0, &a, &b);
            assert!(table.max_abs_diff(&reference) < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn product_states_factorize() {
        let pa = JcmParams::scaled(1.0, 5.0).unwrap();
        let pb = JcmParams::scaled(2.0, 0.5).unwrap();
        let ra =
            ComplexMatrix::from_real_rows(&[&[0.5, 0.2, 0.1], &[0.2, 0.3, 0.0], &[0.1, 0.0, 0.2]])
                .unwrap();
        let rb = ComplexMatrix::from_real_rows(&[
            &[0.1, 0.0, 0.05],
            &[0.0, 0.6, 0.1],
            &[0.05, 0.1, 0.3],
        ])
        .unwrap();
        let r0 = DjcmState::new(kron(&ra, &rb)).unwrap();
        let t = 0.8;
        let ea = propagate_single(&DressedState3::new(ra).unwrap(), &pa, t).unwrap();
        let eb = propagate_single(&DressedState3::new(rb).unwrap(), &pb, t).unwrap();
        let pair = propagate_pair(&r0, &pa, &pb, t).unwrap();
        assert!(pair.matrix().max_abs_diff(&kron(ea.matrix(), eb.matrix())) < 1e-15);
    }

    #[test]
    fn identity_at_zero_and_ground_fixed_point() {
        let p = JcmParams::scaled(1.0, 5.0).unwrap();
        let r0 = DjcmState::new(random_state(3)).unwrap();
        let out = propagate_pair(&r0, &p, &p, 0.0).unwrap();
        assert!(out.matrix().max_abs_diff(r0.matrix()) < 1e-15);

        let ground = DjcmState::basis_projector(8);
        for t in [0.1, 2.0, 30.0] {
            assert_eq!(propagate_pair(&ground, &p, &p, t).unwrap(), ground);
        }
    }

    #[test]
    fn partition_identity_check() {
        let p = JcmParams::scaled(1.0, 5.0).unwrap();
        assert!(identical_partition_check(&p, &p));
        let q = JcmParams { lambda: 5.5, ..p };
        assert!(!identical_partition_check(&p, &q));
        for k in 0..20 {
            let t = 0.25 * k as f64;
            assert_eq!(
                coefficients(&p, t).unwrap(),
                coefficients(&p.clone(), t).unwrap()
            );
        }
    }

    #[test]
    fn trace_and_hermiticity() {
        let p = JcmParams::scaled(3.0, 0.5).unwrap();
        let r0 = DjcmState::new(random_state(11)).unwrap();
        for k in 0..100 {
            let t = 0.5 * k as f64;
            let s = propagate_pair(&r0, &p, &p, t).unwrap();
            assert!((s.matrix().trace().re - 1.0).abs() < 1e-14);
            assert!(s.matrix().hermiticity_defect().0 <= 1e-12);
        }
    }
}
