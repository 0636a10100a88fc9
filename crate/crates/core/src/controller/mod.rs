//! Time-slotted controller driving a network of nodes.
//!
//! The network state covers only data qubits (electrons and ancillas).
//! Registers are folded into each instruction's Kraus instrument, which is
//! exact because every instruction resets its register and reads it out
//! before the round ends.

mod network;
mod record;
mod run;

use thiserror::Error;

use crate::isa::{Address, ValidationError};
use crate::node::NodeError;
use crate::quantum::{Label, QuantumError};

pub use network::{LinkSpec, LinkState, NetworkState};
pub use record::{parity_sift, ClassicalEntry, ClassicalRecord, InstructionTrace, RoundTrace};
pub use run::{
    compile, compile_round, run_compiled, run_compiled_exact, run_program, run_program_exact,
    run_round, run_round_exact, twirl_vector, Branch, CompiledProgram, CompiledRound,
    ProgramOutput, RoundOutput,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("round {found} cannot follow round {current}")]
    RoundOutOfOrder { current: u64, found: u64 },
    #[error("no node with index {0}")]
    UnknownNode(usize),
    #[error("node list position {position} holds node {index}")]
    NodeIndex { position: usize, index: usize },
    #[error("two instructions address {0}")]
    AddressCollision(Address),
    #[error("two instructions in one round act on {0}")]
    OperandOverlap(Label),
    #[error("instruction for {address} is invalid: {}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        address: Address,
        errors: Vec<ValidationError>,
    },
    #[error("bad link: {0}")]
    BadLink(String),
    #[error("no recorded outcome for {0}")]
    MissingOutcome(Address),
    #[error("round {round}: {source}")]
    Round {
        round: u64,
        source: Box<ControllerError>,
    },
    #[error(transparent)]
    Node(#[from] NodeError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, ControllerError>;
