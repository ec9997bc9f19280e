//! Frozen basis orderings. Every index convention used by the crate lives here.
//!
//! Partition level (one atom–cavity pair, one excitation at most):
//!
//! * dressed basis: `|E1+> = (|1g> + |0e>)/√2`, `|E1-> = (|1g> - |0e>)/√2`,
//!   `|E0> = |0g>`, indices 0, 1, 2;
//! * standard basis: `|1g>, |0e>, |0g>`, indices 0, 1, 2 (cavity photon number
//!   first, atom second).
//!
//! Two partitions: product index `3 * i_A + i_B`, so the dressed product
//! basis is `|E1+E1+>, |E1+E1->, |E1+E0>, |E1-E1+>, |E1-E1->, |E1-E0>,
//! |E0E1+>, |E0E1->, |E0E0>`; the rule table numbers them 1..9.
//!
//! Four-qubit embedding: qubit order `(a, A, b, B)` = (cavity a, atom A,
//! cavity b, atom B), qubit 0 most significant. For every qubit bit value 0
//! means occupied/excited (`|1>` or `|e>`) and 1 means empty/ground (`|0>` or
//! `|g>`), so two-qubit reductions come out in the order
//! `{|11>, |10>, |01>, |00>}`.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const DRESSED_LABELS: [&str; 3] = ["E1+", "E1-", "E0"];
pub const STANDARD_LABELS: [&str; 3] = ["1g", "0e", "0g"];

/// Dressed indices.
pub const E_PLUS: usize = 0;
pub const E_MINUS: usize = 1;
pub const E_ZERO: usize = 2;

/// Position of each standard partition state inside the cavity⊗atom
/// two-qubit space `{|1e>, |1g>, |0e>, |0g>}`. `|1e>` (index 0) is never
/// populated.
pub const PARTITION_EMBEDDING: [usize; 3] = [1, 2, 3];

/// Qubit positions in the four-qubit register.
pub const QUBIT_CAVITY_A: usize = 0;
pub const QUBIT_ATOM_A: usize = 1;
pub const QUBIT_CAVITY_B: usize = 2;
pub const QUBIT_ATOM_B: usize = 3;
pub const TOTAL_QUBITS: usize = 4;

/// Index of `|x_A x_B>` in the two-partition product basis.
pub const fn pair_index(a: usize, b: usize) -> usize {
    3 * a + b
}

/// Split a two-partition index into `(partition A, partition B)` indices.
pub const fn split_pair_index(k: usize) -> (usize, usize) {
    (k / 3, k % 3)
}

/// Permutation of the 9 product indices under exchange of the partitions.
pub const fn swap_partitions(k: usize) -> usize {
    let (a, b) = split_pair_index(k);
    pair_index(b, a)
}

/// Human-readable label of a two-partition dressed index, e.g. `E1+E0`.
pub fn pair_label(k: usize) -> String {
    let (a, b) = split_pair_index(k);
    format!("{}{}", DRESSED_LABELS[a], DRESSED_LABELS[b])
}

/// The four subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    /// Atom A.
    #[serde(rename = "A")]
    AtomA,
    /// Atom B.
    #[serde(rename = "B")]
    AtomB,
    /// Cavity a.
    #[serde(rename = "a")]
    CavityA,
    /// Cavity b.
    #[serde(rename = "b")]
    CavityB,
}

impl Subsystem {
    pub fn qubit(self) -> usize {
        match self {
            Subsystem::CavityA => QUBIT_CAVITY_A,
            Subsystem::AtomA => QUBIT_ATOM_A,
            Subsystem::CavityB => QUBIT_CAVITY_B,
            Subsystem::AtomB => QUBIT_ATOM_B,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Subsystem::AtomA => 'A',
            Subsystem::AtomB => 'B',
            Subsystem::CavityA => 'a',
            Subsystem::CavityB => 'b',
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}
