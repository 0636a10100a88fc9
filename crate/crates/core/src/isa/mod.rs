//! Controller-facing instruction format.
//!
//! An instruction addressed to electron `e` of node `m` carries an opcode,
//! its continuous and addressing parameters, the set of register
//! configurations (the pattern) that enable it and the programmability mode.
//! Coherent instructions additionally carry the register preparation
//! amplitudes `c_k` and the readout basis rows `d_{j,k}`.

mod binding;
mod codec;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::quantum::{Basis, Gate, Label, C64};

pub use binding::{resolve_branches, Binding, BindingTable, Resolution};
pub use codec::{decode, decode_with_lines, encode};
pub use validate::{validate, ValidationError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    Idle,
    X,
    Y,
    Z,
    H,
    Ry,
    Rz,
    Cnot,
    Measure,
}

impl Opcode {
    pub const ALL: [Opcode; 9] = [
        Opcode::Idle,
        Opcode::X,
        Opcode::Y,
        Opcode::Z,
        Opcode::H,
        Opcode::Ry,
        Opcode::Rz,
        Opcode::Cnot,
        Opcode::Measure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Opcode::Idle => "IDLE",
            Opcode::X => "X",
            Opcode::Y => "Y",
            Opcode::Z => "Z",
            Opcode::H => "H",
            Opcode::Ry => "RY",
            Opcode::Rz => "RZ",
            Opcode::Cnot => "CNOT",
            Opcode::Measure => "MEASURE",
        }
    }

    pub fn takes_theta(self) -> bool {
        matches!(self, Opcode::Ry | Opcode::Rz)
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Opcode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Opcode::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown opcode `{s}`"))
    }
}

/// Continuous parameters and qubit addressing of an instruction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    pub theta: Option<f64>,
    pub control: Option<Label>,
    pub target: Option<Label>,
    pub basis: Option<Basis>,
}

/// Non-empty set of enabled register configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern(BTreeSet<u32>);

impl Pattern {
    pub fn new(members: impl IntoIterator<Item = u32>) -> Result<Self, IsaError> {
        let set: BTreeSet<u32> = members.into_iter().collect();
        if set.is_empty() {
            return Err(IsaError::EmptyPattern);
        }
        Ok(Pattern(set))
    }

    pub fn single(k: u32) -> Self {
        Pattern(BTreeSet::from([k]))
    }

    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, k: u32) -> bool {
        self.0.contains(&k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lowest(&self) -> u32 {
        *self.0.iter().next().expect("pattern is non-empty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Deterministic,
    Coherent,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Deterministic => "deterministic",
            Mode::Coherent => "coherent",
        })
    }
}

/// Register preparation for coherent mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Preparation {
    /// Explicit amplitudes `c_k`; missing pattern members have amplitude 0.
    Amplitudes(BTreeMap<u32, C64>),
    /// `(|k0⟩ + e^{iφ}|k1⟩)/√2` over the two pattern members `k0 < k1`.
    RelativePhase(f64),
}

impl Preparation {
    /// Amplitudes keyed by register value. `None` when a relative phase is
    /// used with a pattern that does not have exactly two members.
    pub fn amplitudes(&self, pattern: &Pattern) -> Option<BTreeMap<u32, C64>> {
        match self {
            Preparation::Amplitudes(a) => Some(a.clone()),
            Preparation::RelativePhase(phi) => {
                if pattern.len() != 2 {
                    return None;
                }
                let mut it = pattern.members();
                let (k0, k1) = (it.next()?, it.next()?);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Some(BTreeMap::from([
                    (k0, C64::new(s, 0.0)),
                    (k1, C64::from_polar(s, *phi)),
                ]))
            }
        }
    }
}

/// Orthonormal readout rows `|φ_j⟩ = Σ_k d_{j,k}|k⟩` for the register.
#[derive(Clone, Debug, PartialEq)]
pub enum ReadoutBasis {
    Computational,
    /// Hadamard basis on every register qubit; row `j` has entries
    /// `(−1)^{popcount(j & k)} / √(2^r)`.
    XBasis,
    Rows(Vec<Vec<C64>>),
}

impl ReadoutBasis {
    pub fn rows(&self, register_size: usize) -> Vec<Vec<C64>> {
        let d = 1usize << register_size;
        match self {
            ReadoutBasis::Computational => (0..d)
                .map(|j| {
                    (0..d)
                        .map(|k| C64::new(if j == k { 1.0 } else { 0.0 }, 0.0))
                        .collect()
                })
                .collect(),
            ReadoutBasis::XBasis => {
                let a = 1.0 / (d as f64).sqrt();
                (0..d)
                    .map(|j| {
                        (0..d)
                            .map(|k| {
                                let sign = if (j & k).count_ones() % 2 == 0 {
                                    1.0
                                } else {
                                    -1.0
                                };
                                C64::new(sign * a, 0.0)
                            })
                            .collect()
                    })
                    .collect()
            }
            ReadoutBasis::Rows(rows) => rows.clone(),
        }
    }
}

/// `(node m, electron e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Address {
    pub node: usize,
    pub electron: usize,
}

impl Address {
    pub fn new(node: usize, electron: usize) -> Self {
        Address { node, electron }
    }

    pub fn electron_label(&self) -> Label {
        Label::electron(self.node, self.electron)
    }

    pub fn register_labels(&self, r: usize) -> Vec<Label> {
        (0..r)
            .map(|i| Label::register(self.node, self.electron, i))
            .collect()
    }

    pub fn ancilla_label(&self, index: usize) -> Label {
        Label::ancilla(self.node, self.electron, index)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.electron)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub address: Address,
    pub opcode: Opcode,
    pub params: Params,
    pub pattern: Pattern,
    pub mode: Mode,
    pub preparation: Option<Preparation>,
    pub readout: Option<ReadoutBasis>,
    pub branch_override: BTreeMap<u32, Vec<Gate>>,
}

impl Instruction {
    pub fn deterministic(address: Address, opcode: Opcode, pattern: Pattern) -> Self {
        Instruction {
            address,
            opcode,
            params: Params::default(),
            pattern,
            mode: Mode::Deterministic,
            preparation: None,
            readout: None,
            branch_override: BTreeMap::new(),
        }
    }

    pub fn coherent(
        address: Address,
        opcode: Opcode,
        pattern: Pattern,
        preparation: Preparation,
        readout: ReadoutBasis,
    ) -> Self {
        Instruction {
            mode: Mode::Coherent,
            preparation: Some(preparation),
            readout: Some(readout),
            ..Instruction::deterministic(address, opcode, pattern)
        }
    }

    pub fn theta(mut self, theta: f64) -> Self {
        self.params.theta = Some(theta);
        self
    }

    pub fn control(mut self, label: impl Into<Label>) -> Self {
        self.params.control = Some(label.into());
        self
    }

    pub fn target(mut self, label: impl Into<Label>) -> Self {
        self.params.target = Some(label.into());
        self
    }

    pub fn basis(mut self, basis: Basis) -> Self {
        self.params.basis = Some(basis);
        self
    }

    pub fn with_override(mut self, k: u32, gates: Vec<Gate>) -> Self {
        self.branch_override.insert(k, gates);
        self
    }

    /// Register configuration executed in deterministic mode: the lowest
    /// pattern member.
    pub fn selected(&self) -> u32 {
        self.pattern.lowest()
    }
}

/// Instructions broadcast in one time slot.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct InstructionVector {
    pub round: u64,
    pub entries: Vec<Instruction>,
}

impl InstructionVector {
    pub fn new(round: u64, entries: Vec<Instruction>) -> Self {
        InstructionVector { round, entries }
    }
}

/// A protocol of `T` rounds, numbered `1..=T` in increasing order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub rounds: Vec<InstructionVector>,
}

impl Program {
    pub fn new(rounds: Vec<InstructionVector>) -> Self {
        Program { rounds }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.rounds.iter().flat_map(|v| v.entries.iter())
    }
}

/// Static description of one node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeConfig {
    pub index: usize,
    pub electrons: usize,
    /// Register qubits per electron (`r`).
    pub register_size: usize,
    /// Ancilla nuclear spins per electron cluster.
    pub ancillas: usize,
    pub bindings: BindingTable,
}

impl NodeConfig {
    /// Node with the default binding table for `register_size`.
    pub fn new(index: usize, electrons: usize, register_size: usize, ancillas: usize) -> Self {
        NodeConfig {
            index,
            electrons,
            register_size,
            ancillas,
            bindings: BindingTable::default_for(register_size),
        }
    }

    /// Data qubits of the node: every electron followed by its ancillas.
    pub fn data_labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        for e in 0..self.electrons {
            out.push(Label::electron(self.index, e));
            for a in 0..self.ancillas {
                out.push(Label::ancilla(self.index, e, a));
            }
        }
        out
    }

    /// Whether `label` is a data qubit (electron or ancilla) of this node.
    pub fn owns(&self, label: &Label) -> bool {
        use crate::quantum::QubitRef;
        match label.qubit_ref() {
            Some(QubitRef::Electron { node, electron }) => {
                node == self.index && electron < self.electrons
            }
            Some(QubitRef::Ancilla {
                node,
                electron,
                index,
            }) => node == self.index && electron < self.electrons && index < self.ancillas,
            _ => false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsaError {
    #[error("pattern must not be empty")]
    EmptyPattern,
    #[error("configuration {0} has no binding and no override")]
    Unbound(u32),
    #[error("binding for configuration {k} needs ancilla {ancilla}")]
    MissingAncilla { k: u32, ancilla: usize },
    #[error("{opcode} requires {what}")]
    MissingParam { opcode: Opcode, what: &'static str },
    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("invalid instruction: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationError>),
}
