use std::collections::BTreeMap;

use crate::quantum::{Basis, Gate, GateSpec};

use super::{Instruction, IsaError, Mode, Opcode};

/// What a register configuration selects, before instruction parameters are
/// filled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Identity,
    X,
    Y,
    Z,
    H,
    /// `Ry(θ)` with θ taken from the instruction.
    Ry,
    Rz,
    /// CNOT from the electron onto its ancilla with the given index.
    CnotToAncilla(usize),
    /// CNOT with control and target taken from the instruction.
    Cnot,
    /// Projective measurement; basis and target from the instruction, default
    /// `Z` on the electron.
    Measure,
}

impl Binding {
    pub fn opcode(self) -> Opcode {
        match self {
            Binding::Identity => Opcode::Idle,
            Binding::X => Opcode::X,
            Binding::Y => Opcode::Y,
            Binding::Z => Opcode::Z,
            Binding::H => Opcode::H,
            Binding::Ry => Opcode::Ry,
            Binding::Rz => Opcode::Rz,
            Binding::CnotToAncilla(_) | Binding::Cnot => Opcode::Cnot,
            Binding::Measure => Opcode::Measure,
        }
    }

    pub(crate) fn gates(self, instr: &Instruction) -> Result<Vec<Gate>, IsaError> {
        let e = instr.address.electron_label();
        let p = &instr.params;
        let theta = |opcode| {
            p.theta.ok_or(IsaError::MissingParam {
                opcode,
                what: "theta",
            })
        };
        Ok(vec![match self {
            Binding::Identity => Gate::on(GateSpec::I, e),
            Binding::X => Gate::on(GateSpec::X, e),
            Binding::Y => Gate::on(GateSpec::Y, e),
            Binding::Z => Gate::on(GateSpec::Z, e),
            Binding::H => Gate::on(GateSpec::H, e),
            Binding::Ry => Gate::on(GateSpec::Ry(theta(Opcode::Ry)?), e),
            Binding::Rz => Gate::on(GateSpec::Rz(theta(Opcode::Rz)?), e),
            Binding::CnotToAncilla(i) => Gate::cnot(e, instr.address.ancilla_label(i)),
            Binding::Cnot => match (&p.control, &p.target) {
                (Some(c), Some(t)) => Gate::cnot(c.clone(), t.clone()),
                _ => {
                    return Err(IsaError::MissingParam {
                        opcode: Opcode::Cnot,
                        what: "control and target",
                    })
                }
            },
            Binding::Measure => Gate::on(
                GateSpec::Measure(p.basis.unwrap_or(Basis::Z)),
                p.target.clone().unwrap_or(e),
            ),
        }])
    }
}

/// Node-local map from register configuration `k` to the operation it
/// selects.
#[derive(Clone, Debug, PartialEq)]
pub struct BindingTable {
    entries: BTreeMap<u32, Binding>,
}

impl BindingTable {
    pub fn new(entries: impl IntoIterator<Item = (u32, Binding)>) -> Self {
        BindingTable {
            entries: entries.into_iter().collect(),
        }
    }

    /// Six-entry table sufficient for BBPSSW: `000:I 001:X 010:Y 011:Z
    /// 100:CNOT 101:MEASURE`.
    pub fn purification() -> Self {
        BindingTable::new([
            (0, Binding::Identity),
            (1, Binding::X),
            (2, Binding::Y),
            (3, Binding::Z),
            (4, Binding::Cnot),
            (5, Binding::Measure),
        ])
    }

    /// Two-qubit register table: `00:I 01:X 10:Ry(θ) 11:CNOT(E→N_A)`.
    pub fn two_qubit_register() -> Self {
        BindingTable::new([
            (0, Binding::Identity),
            (1, Binding::X),
            (2, Binding::Ry),
            (3, Binding::CnotToAncilla(0)),
        ])
    }

    /// Default table for a register of `r` qubits: the two-qubit register
    /// table (truncated to `2^r` entries) for `r ≤ 2`, the purification table
    /// otherwise.
    pub fn default_for(r: usize) -> Self {
        if r >= 3 {
            return BindingTable::purification();
        }
        let cap = 1u32 << r;
        BindingTable {
            entries: BindingTable::two_qubit_register()
                .entries
                .into_iter()
                .filter(|(k, _)| *k < cap)
                .collect(),
        }
    }

    pub fn get(&self, k: u32) -> Option<Binding> {
        self.entries.get(&k).copied()
    }

    pub fn insert(&mut self, k: u32, binding: Binding) {
        self.entries.insert(k, binding);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Binding)> + '_ {
        self.entries.iter().map(|(k, b)| (*k, *b))
    }
}

/// Gate sequences selected by an instruction.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub branches: BTreeMap<u32, Vec<Gate>>,
    /// Opcode/binding disagreements; the opcode was used.
    pub warnings: Vec<String>,
}

/// The gate sequence the opcode itself describes.
pub(crate) fn opcode_gates(instr: &Instruction) -> Result<Vec<Gate>, IsaError> {
    let p = &instr.params;
    let target = p
        .target
        .clone()
        .unwrap_or_else(|| instr.address.electron_label());
    let theta = |opcode| {
        p.theta.ok_or(IsaError::MissingParam {
            opcode,
            what: "theta",
        })
    };
    let spec = match instr.opcode {
        Opcode::Idle => GateSpec::I,
        Opcode::X => GateSpec::X,
        Opcode::Y => GateSpec::Y,
        Opcode::Z => GateSpec::Z,
        Opcode::H => GateSpec::H,
        Opcode::Ry => GateSpec::Ry(theta(Opcode::Ry)?),
        Opcode::Rz => GateSpec::Rz(theta(Opcode::Rz)?),
        Opcode::Cnot => match (&p.control, &p.target) {
            (Some(c), Some(_)) => GateSpec::Cnot { control: c.clone() },
            _ => {
                return Err(IsaError::MissingParam {
                    opcode: Opcode::Cnot,
                    what: "control and target",
                })
            }
        },
        Opcode::Measure => GateSpec::Measure(p.basis.ok_or(IsaError::MissingParam {
            opcode: Opcode::Measure,
            what: "basis",
        })?),
    };
    Ok(vec![Gate::on(spec, target)])
}

/// Maps each active register configuration to its gate sequence.
///
/// Deterministic instructions activate only the lowest pattern member. For
/// each active `k` the override wins, then the table binding. When exactly
/// one configuration is active and it is bound, the opcode is executed and a
/// warning is recorded if it disagrees with the binding.
pub fn resolve_branches(instr: &Instruction, table: &BindingTable) -> Result<Resolution, IsaError> {
    let active: Vec<u32> = match instr.mode {
        Mode::Deterministic => vec![instr.selected()],
        Mode::Coherent => instr.pattern.members().collect(),
    };
    let single = active.len() == 1;
    let mut branches = BTreeMap::new();
    let mut warnings = Vec::new();
    for k in active {
        if let Some(gates) = instr.branch_override.get(&k) {
            branches.insert(k, gates.clone());
            continue;
        }
        let binding = table.get(k).ok_or(IsaError::Unbound(k))?;
        let gates = if single {
            if binding.opcode() != instr.opcode {
                warnings.push(format!(
                    "opcode {} disagrees with binding {:?} for configuration {k}; opcode used",
                    instr.opcode, binding
                ));
            }
            opcode_gates(instr)?
        } else {
            binding.gates(instr)?
        };
        branches.insert(k, gates);
    }
    Ok(Resolution { branches, warnings })
}
