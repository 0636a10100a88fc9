//! Dense state-vector and density-matrix engine over small labelled qubit
//! systems.
//!
//! Basis ordering: the first label of a state is the most significant bit of
//! the basis index. Clusters are laid out register first (`N_1 … N_r`), then
//! the electron, then ancillas, so that `|k⟩_N ⊗ |e⟩` maps directly onto
//! array indices.

mod density;
mod gate;
pub(crate) mod kernel;
mod label;
mod ops;
mod pure;

pub use density::{make_werner, DensityState};
pub use gate::{Basis, Gate, GateSpec};
pub use label::{Label, QubitRef};
pub use ops::{
    apply_controlled_unitary, apply_gate, fidelity, measure_qubit, measure_qubit_branches,
    project_register, AnyState, KrausOutcome, MeasurementOutcome, QuantumState, RegisterProjection,
};
pub use pure::{bell_state, BellState, PureState};

pub(crate) use gate::projector;
pub(crate) use ops::{gate_operator, sample_index};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Dense complex square matrix used for gates and Kraus operators.
pub type Matrix = nalgebra::DMatrix<C64>;

/// Tolerance for structural checks (normalisation, hermiticity, unitarity).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for analytic equalities.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Outcome probabilities below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const EIGENVALUE_TOL: f64 = 1e-8;

/// Largest pure state the engine accepts.
pub const MAX_PURE_QUBITS: usize = 12;
/// Largest density matrix the engine accepts.
pub const MAX_DENSITY_QUBITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("unknown qubit label `{0}`")]
    UnknownLabel(Label),
    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(Label),
    #[error("amplitude vector of length {len} does not match {qubits} labels")]
    DimensionMismatch { len: usize, qubits: usize },
    #[error("state is not normalised (norm² = {0})")]
    NotNormalized(f64),
    #[error("amplitude or matrix entry is not finite")]
    NonFinite,
    #[error("density matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("density matrix has trace {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("MEASURE is not a unitary gate; use the measurement operation")]
    MeasureNotUnitary,
    #[error("control and target are both `{0}`")]
    ControlIsTarget(Label),
    #[error("label sets overlap on `{0}`")]
    LabelCollision(Label),
    #[error("branch gate addresses `{0}`, which is outside the cluster")]
    OutsideCluster(Label),
    #[error("branch gate addresses register qubit `{0}`")]
    TouchesRegister(Label),
    #[error("branch index {index} exceeds register capacity {capacity}")]
    BranchOutOfRange { index: usize, capacity: usize },
    #[error("readout row is not unit norm (norm² = {0})")]
    ReadoutNotNormalized(f64),
    #[error("operator dimension {found} does not match {expected}")]
    OperatorDimension { expected: usize, found: usize },
    #[error("Werner fidelity {0} outside [0, 1]")]
    FidelityOutOfRange(f64),
    #[error("{qubits} qubits exceed the dense limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, QuantumError>;
