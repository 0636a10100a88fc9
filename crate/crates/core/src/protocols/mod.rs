//! Protocol drivers built on the controller.

mod bbpssw;
mod transfer;
mod witness;

use thiserror::Error;

use crate::controller::ControllerError;
use crate::node::NodeError;
use crate::quantum::QuantumError;

pub use bbpssw::{
    bbpssw, bbpssw_links, bbpssw_nodes, bbpssw_program, recurrence, PurificationMode,
    PurificationResult,
};
pub use transfer::{
    entanglement_transfer, transfer_nodes, transfer_program, TransferBasis, TransferOutcome,
    TransferResult,
};
pub use witness::{
    calibrate, phase_scan, witness, witness_instruction, CalibrationPoint, PhaseScan, Sign,
    WitnessMode, WitnessResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("fidelity {0} outside [0, 1]")]
    FidelityOutOfRange(f64),
    #[error("Monte Carlo mode needs at least one trial")]
    ZeroTrials,
    #[error("sampled mode needs at least one shot")]
    ZeroShots,
    #[error("over-rotation {0} outside (−π, π)")]
    EpsilonOutOfRange(f64),
    #[error("electron state must be a single qubit")]
    NotSingleQubit,
    #[error("phase {0} is not finite")]
    NonFinitePhase(f64),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Node(#[from] NodeError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;
