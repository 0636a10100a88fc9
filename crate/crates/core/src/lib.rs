//! Controller-driven instruction-set simulator for NV-center repeater nodes.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] – dense pure/mixed state engine over labelled qubits.
//! * [`isa`] – instruction format, validation, binding tables and the text
//!   wire format.
//! * [`node`] – the local decoder: deterministic and coherent execution on an
//!   electron–nuclear cluster and the induced Kraus/LCU instrument.
//! * [`controller`] – time-slotted rounds across a network of nodes.
//! * [`protocols`] – purification, entanglement transfer and the
//!   interferometric fidelity witness.
//! * [`perf`] – analytic round-throughput model.

pub mod controller;
pub mod isa;
pub mod node;
pub mod perf;
pub mod protocols;
pub mod quantum;
pub mod rng;
