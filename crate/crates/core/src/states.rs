//! Initial states, basis changes between the standard and dressed
//! partition bases, the four-qubit embedding, and bipartite reductions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{Subsystem, PARTITION_EMBEDDING, TOTAL_QUBITS};
use crate::error::{DjcmError, Result};
use crate::evolution::DjcmState;
use crate::linalg::{kron, partial_trace_qubits, ComplexMatrix};

const SUPPORT_TOL: f64 = 1e-14;

/// One of the six bipartite subsystems. The first-named subsystem is the
/// left tensor factor of the reduced state.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReductionTarget {
    AB,
    ab,
    Aa,
    Bb,
    Ab,
    aB,
}

impl ReductionTarget {
    /// Column order used in all outputs.
    pub const ALL: [ReductionTarget; 6] = [
        ReductionTarget::AB,
        ReductionTarget::ab,
        ReductionTarget::Aa,
        ReductionTarget::Bb,
        ReductionTarget::Ab,
        ReductionTarget::aB,
    ];

    pub fn subsystems(self) -> (Subsystem, Subsystem) {
        use Subsystem::*;
        match self {
            ReductionTarget::AB => (AtomA, AtomB),
            ReductionTarget::ab => (CavityA, CavityB),
            ReductionTarget::Aa => (AtomA, CavityA),
            ReductionTarget::Bb => (AtomB, CavityB),
            ReductionTarget::Ab => (AtomA, CavityB),
            ReductionTarget::aB => (CavityA, AtomB),
        }
    }

    /// Two-letter name such as `"aB"`.
    pub fn name(self) -> &'static str {
        match self {
            ReductionTarget::AB => "AB",
            ReductionTarget::ab => "ab",
            ReductionTarget::Aa => "Aa",
            ReductionTarget::Bb => "Bb",
            ReductionTarget::Ab => "Ab",
            ReductionTarget::aB => "aB",
        }
    }

    /// Whether the pair is an atom and its own cavity.
    pub fn is_local(self) -> bool {
        matches!(self, ReductionTarget::Aa | ReductionTarget::Bb)
    }

    /// Image under exchange of the two partitions.
    pub fn swapped(self) -> ReductionTarget {
        match self {
            ReductionTarget::Aa => ReductionTarget::Bb,
            ReductionTarget::Bb => ReductionTarget::Aa,
            ReductionTarget::Ab => ReductionTarget::aB,
            ReductionTarget::aB => ReductionTarget::Ab,
            other => other,
        }
    }
}

impl fmt::Display for ReductionTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionTarget {
    type Err = DjcmError;
    fn from_str(s: &str) -> Result<Self> {
        ReductionTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| DjcmError::InvalidParams(format!("unknown subsystem pair {s:?}")))
    }
}

/// Reduced two-qubit state in the basis `{|11>, |10>, |01>, |00>}` of
/// `(first, second)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    matrix: ComplexMatrix,
    labels: (Subsystem, Subsystem),
}

impl PairState {
    pub const TOL: f64 = 1e-10;

    pub fn new(matrix: ComplexMatrix, labels: (Subsystem, Subsystem)) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(DjcmError::Dimension(format!(
                "expected 4x4, got {0}x{0}",
                matrix.dim()
            )));
        }
        matrix.check_hermitian(Self::TOL)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TOL || tr.im.abs() > Self::TOL {
            return Err(DjcmError::Consistency(format!("trace {tr} differs from 1")));
        }
        Ok(Self { matrix, labels })
    }

    /// Pair state with placeholder labels, for states not tied to the model.
    pub fn unlabeled(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, (Subsystem::AtomA, Subsystem::AtomB))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> (Subsystem, Subsystem) {
        self.labels
    }
}

/// Per-partition unitary taking standard coordinates `{|1g>, |0e>, |0g>}`
/// to dressed coordinates `{|E1+>, |E1->, |E0>}`, and its two-partition
/// product.
#[derive(Debug, Clone)]
pub struct BasisTransform {
    single: ComplexMatrix,
    pair: ComplexMatrix,
}

impl BasisTransform {
    pub fn new() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let single =
            ComplexMatrix::from_real_rows(&[&[s, s, 0.0], &[s, -s, 0.0], &[0.0, 0.0, 1.0]])
                .expect("3x3");
        let pair = kron(&single, &single);
        Self { single, pair }
    }

    pub fn single(&self) -> &ComplexMatrix {
        &self.single
    }

    pub fn pair(&self) -> &ComplexMatrix {
        &self.pair
    }

    /// `U ρ U†`.
    pub fn to_dressed(&self, standard: &ComplexMatrix) -> ComplexMatrix {
        self.pair.conjugate_by(standard)
    }

    /// `U† ρ U`.
    pub fn to_standard(&self, dressed: &ComplexMatrix) -> ComplexMatrix {
        self.pair.adjoint().conjugate_by(dressed)
    }
}

impl Default for BasisTransform {
    fn default() -> Self {
        Self::new()
    }
}

pub fn dressed_to_standard(s: &DjcmState) -> ComplexMatrix {
    BasisTransform::new().to_standard(s.matrix())
}

pub fn standard_to_dressed(m: &ComplexMatrix) -> ComplexMatrix {
    BasisTransform::new().to_dressed(m)
}

/// Reorders the qubits of a 2^n operator: qubit `k` of the result is qubit
/// `order[k]` of the input.
fn permute_qubits(m: &ComplexMatrix, order: &[usize]) -> ComplexMatrix {
    let n = order.len();
    let map = |idx: usize| {
        let mut src = 0usize;
        for (k, &q) in order.iter().enumerate() {
            let bit = (idx >> (n - 1 - k)) & 1;
            src |= bit << (n - 1 - q);
        }
        src
    };
    ComplexMatrix::from_fn(m.dim(), |i, j| m[(map(i), map(j))])
}

/// Four-qubit index of standard partition states `(s_A, s_B)`.
fn embedded_index(sa: usize, sb: usize) -> usize {
    4 * PARTITION_EMBEDDING[sa] + PARTITION_EMBEDDING[sb]
}

/// Standard-basis 9×9 state placed into the 16-dim register `(a, A, b, B)`.
pub fn embed_standard(standard: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(16);
    for i in 0..9 {
        for j in 0..9 {
            out[(embedded_index(i / 3, i % 3), embedded_index(j / 3, j % 3))] = standard[(i, j)];
        }
    }
    out
}

/// Inverse of [`embed_standard`], failing if the register has weight outside
/// the one-excitation-per-partition subspace.
pub fn compress_to_standard(full: &ComplexMatrix) -> Result<ComplexMatrix> {
    if full.dim() != 16 {
        return Err(DjcmError::Dimension(format!(
            "expected 16x16, got {0}x{0}",
            full.dim()
        )));
    }
    let allowed: Vec<usize> = (0..9).map(|k| embedded_index(k / 3, k % 3)).collect();
    for i in 0..16 {
        for j in 0..16 {
            if (!allowed.contains(&i) || !allowed.contains(&j)) && full[(i, j)].norm() > SUPPORT_TOL
            {
                return Err(DjcmError::Consistency(format!(
                    "four-qubit state has weight {:e} at ({i}, {j}) outside the truncated space",
                    full[(i, j)].norm()
                )));
            }
        }
    }
    Ok(ComplexMatrix::from_fn(9, |i, j| {
        full[(allowed[i], allowed[j])]
    }))
}

/// Largest modulus of any entry touching a doubly-excited `|1e>` level of
/// either partition.
pub fn doubly_excited_weight(full: &ComplexMatrix) -> f64 {
    let touches = |k: usize| (k >> 2) == 0 || (k & 3) == 0;
    let mut worst = 0.0_f64;
    for i in 0..16 {
        for j in 0..16 {
            if touches(i) || touches(j) {
                worst = worst.max(full[(i, j)].norm());
            }
        }
    }
    worst
}

/// Two-cavity extended Werner state `r |φ+><φ+| + (1−r)/4 I` with both atoms
/// in `|g>`, as a four-qubit register `(a, A, b, B)`.
pub fn initial_register(r: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(DjcmError::PurityOutOfRange(r));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = C64::new(0.0, 0.0);
    let phi_plus = [zero, C64::new(s, 0.0), C64::new(s, 0.0), zero];
    let werner = &ComplexMatrix::projector(&phi_plus).scale_real(r)
        + &ComplexMatrix::identity(4).scale_real((1.0 - r) / 4.0);
    let ground = ComplexMatrix::from_diag(&[0.0, 1.0]);
    // (a, b, A, B) -> (a, A, b, B)
    let abab = kron(&werner, &kron(&ground, &ground));
    Ok(permute_qubits(&abab, &[0, 2, 1, 3]))
}

/// Initial two-partition state in the dressed product basis.
pub fn initial_state(r: f64) -> Result<DjcmState> {
    let register = initial_register(r)?;
    let standard = compress_to_standard(&register)?;
    DjcmState::new(standard_to_dressed(&standard))
}

/// Four-qubit register of a dressed two-partition state.
pub fn register_of(s: &DjcmState) -> ComplexMatrix {
    embed_standard(&dressed_to_standard(s))
}

/// Reduced state of one bipartite subsystem.
pub fn reduce(s: &DjcmState, target: ReductionTarget) -> Result<PairState> {
    reduce_register(&register_of(s), target)
}

pub fn reduce_register(register: &ComplexMatrix, target: ReductionTarget) -> Result<PairState> {
    let (first, second) = target.subsystems();
    let m = partial_trace_qubits(register, TOTAL_QUBITS, &[first.qubit(), second.qubit()])?;
    PairState::new(m, (first, second))
}

/// All six reductions in [`ReductionTarget::ALL`] order.
pub fn reduce_all(s: &DjcmState) -> Result<Vec<PairState>> {
    let register = register_of(s);
    ReductionTarget::ALL
        .iter()
        .map(|&t| reduce_register(&register, t))
        .collect()
}
