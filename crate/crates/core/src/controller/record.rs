use std::collections::BTreeMap;

use serde::Serialize;

use crate::isa::Address;

use super::{ControllerError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalEntry {
    pub round: u64,
    pub address: Address,
    pub bit: u8,
}

/// Per-node append-only lists `C_m` of measurement outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassicalRecord {
    nodes: BTreeMap<usize, Vec<ClassicalEntry>>,
}

impl ClassicalRecord {
    pub fn push(&mut self, entry: ClassicalEntry) {
        self.nodes
            .entry(entry.address.node)
            .or_default()
            .push(entry);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = ClassicalEntry>) {
        for e in entries {
            self.push(e);
        }
    }

    /// `C_m` for node `m`.
    pub fn node(&self, m: usize) -> &[ClassicalEntry] {
        self.nodes.get(&m).map_or(&[], Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ClassicalEntry> {
        self.nodes.values().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.values().all(Vec::is_empty)
    }

    /// Most recent bit recorded for `address`.
    pub fn last_bit(&self, address: Address) -> Option<u8> {
        self.node(address.node)
            .iter()
            .rev()
            .find(|e| e.address == address)
            .map(|e| e.bit)
    }
}

/// Keeps a pair when the last outcomes at `a` and `b` agree.
pub fn parity_sift(record: &ClassicalRecord, a: Address, b: Address) -> Result<bool> {
    let bit_a = record
        .last_bit(a)
        .ok_or(ControllerError::MissingOutcome(a))?;
    let bit_b = record
        .last_bit(b)
        .ok_or(ControllerError::MissingOutcome(b))?;
    Ok(bit_a == bit_b)
}

/// What one instruction did in a round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstructionTrace {
    pub address: Address,
    /// Readout row for coherent instructions.
    pub outcome_index: Option<usize>,
    pub bits: Vec<u8>,
    /// Probability of the realised outcome given the preceding ones.
    pub probability: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// One line of the trace log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrace {
    pub round: u64,
    pub instructions: Vec<InstructionTrace>,
}
