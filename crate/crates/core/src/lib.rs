//! Entanglement dynamics of two double Jaynes-Cummings partitions, each an
//! atom coupled to a cavity mode that leaks into a Lorentzian reservoir.
//!
//! The closed-form propagator lives in [`propagator`] (one partition) and
//! [`evolution`] (two partitions). [`states`] maps between the dressed and
//! standard bases and forms the six two-qubit reductions, [`entanglement`]
//! computes concurrence, and [`oracle`] holds the numerical cross-checks.

pub mod basis;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod oracle;
pub mod propagator;
pub mod scenario;
pub mod states;

pub use entanglement::{concurrence, concurrence_x_state, steady_pair, STEADY_THRESHOLD_R};
pub use error::{DjcmError, Result};
pub use evolution::{propagate_pair, DjcmState};
pub use linalg::{ComplexMatrix, C64};
pub use propagator::{
    coefficients, propagate_single, DressedState3, JcmParams, PropagatorCoeffs, Regime,
};
pub use scenario::{evolve, validate_scenario, ConcurrenceTable, Preset, ScenarioConfig};
pub use states::{initial_state, reduce, reduce_all, PairState, ReductionTarget};
