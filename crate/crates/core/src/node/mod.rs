//! Local decoder for one electron–nuclear cluster.
//!
//! Two views of the same physics are provided. The executors in this module
//! simulate the register literally: reset, prepare, apply the controlled
//! unitary `Σ_k |k⟩⟨k| ⊗ U_k`, then read the register out. The
//! [`kraus_operators`] view folds the register away and returns the heralded
//! operators `K_j = Σ_k d*_{j,k} c_k U_k` acting on the electron and whichever
//! data qubits the branches touch. The controller uses the second view on
//! network-wide states.

mod cluster;
mod execute;
mod kraus;

use thiserror::Error;

use crate::isa::{IsaError, Mode, ValidationError};
use crate::quantum::QuantumError;

pub use cluster::ClusterState;
pub use execute::{
    execute_coherent, execute_coherent_branches, execute_deterministic,
    execute_deterministic_branches, ExecutionResult,
};
pub use kraus::{apply_instrument, kraus_operators, InstrumentOutcome, KrausBranch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodeError {
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("expected a {expected} instruction")]
    WrongMode { expected: Mode },
    #[error("instruction for {instr} executed on cluster {cluster}")]
    WrongCluster {
        instr: crate::isa::Address,
        cluster: crate::isa::Address,
    },
    #[error("instrument is not complete: ‖Σ K†K − I‖ = {0:e}")]
    Incomplete(f64),
}

impl From<Vec<ValidationError>> for NodeError {
    fn from(errors: Vec<ValidationError>) -> Self {
        NodeError::Isa(IsaError::Invalid(errors))
    }
}

pub type Result<T> = std::result::Result<T, NodeError>;
