//! Moving electron–electron entanglement onto ancilla nuclear spins.
//!
//! Each node has one electron, a two-qubit register and one ancilla. Round 1
//! applies the register-selected `CNOT(E → N_A)` (pattern `{3}`), round 2
//! measures both electrons, and on odd parity (X basis only) round 3
//! applies `Z` to node B's ancilla.

use rand::Rng;

use crate::controller::{
    compile_round, run_round, run_round_exact, Branch, LinkSpec, NetworkState,
};
use crate::isa::{Address, Instruction, InstructionVector, NodeConfig, Opcode, Pattern, Program};
use crate::quantum::{
    bell_state, Basis, BellState, Gate, GateSpec, Label, PureState, QuantumState,
};

use super::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferBasis {
    /// Stop after the CNOTs.
    None,
    /// Measure the electrons in X and correct odd parity with Z.
    X,
    /// Measure the electrons in Z without correction.
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferOutcome {
    pub bit_a: u8,
    pub bit_b: u8,
    pub probability: f64,
    pub corrected: bool,
    /// Fidelity of `(A0.0.0, A1.0.0)` with `|Φ+⟩`.
    pub nuclear_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferResult {
    pub basis: TransferBasis,
    /// State after the CNOTs over `(E_A, N_A, E_B, N_B)`.
    pub after_cnot: PureState,
    /// Nuclear-pair fidelity with the electrons traced out, before any
    /// measurement.
    pub marginal_fidelity: f64,
    pub outcomes: Vec<TransferOutcome>,
}

pub fn transfer_nodes() -> Vec<NodeConfig> {
    (0..2).map(|m| NodeConfig::new(m, 1, 2, 1)).collect()
}

fn nuclei() -> (Label, Label) {
    (Label::ancilla(0, 0, 0), Label::ancilla(1, 0, 0))
}

/// Rounds 1 and 2. The measurement round is omitted for
/// [`TransferBasis::None`].
pub fn transfer_program(basis: TransferBasis) -> Program {
    let cnot = (0..2)
        .map(|m| {
            Instruction::deterministic(Address::new(m, 0), Opcode::Cnot, Pattern::single(3))
                .control(Label::electron(m, 0))
                .target(Label::ancilla(m, 0, 0))
        })
        .collect();
    let mut rounds = vec![InstructionVector::new(1, cnot)];
    let b = match basis {
        TransferBasis::None => return Program::new(rounds),
        TransferBasis::X => Basis::X,
        TransferBasis::Z => Basis::Z,
    };
    let measure = (0..2)
        .map(|m| {
            Instruction::deterministic(Address::new(m, 0), Opcode::Measure, Pattern::single(0))
                .basis(b)
                .with_override(
                    0,
                    vec![Gate::on(GateSpec::Measure(b), Label::electron(m, 0))],
                )
        })
        .collect();
    rounds.push(InstructionVector::new(2, measure));
    Program::new(rounds)
}

fn correction() -> InstructionVector {
    let target = Label::ancilla(1, 0, 0);
    InstructionVector::new(
        3,
        vec![
            Instruction::deterministic(Address::new(1, 0), Opcode::Z, Pattern::single(0))
                .with_override(0, vec![Gate::on(GateSpec::Z, target)]),
        ],
    )
}

fn initial() -> Result<NetworkState> {
    Ok(NetworkState::with_links(
        transfer_nodes(),
        &[LinkSpec::bell(Label::electron(0, 0), Label::electron(1, 0))],
    )?)
}

fn finish(leaf: &Branch, corrected: bool) -> Result<TransferOutcome> {
    let (na, nb) = nuclei();
    let bit = |m| leaf.record.last_bit(Address::new(m, 0)).unwrap_or(0);
    Ok(TransferOutcome {
        bit_a: bit(0),
        bit_b: bit(1),
        probability: leaf.weight,
        corrected,
        nuclear_fidelity: leaf.state.pair_fidelity(&na, &nb, BellState::PhiPlus)?,
    })
}

fn after_cnot(state: &NetworkState) -> Result<PureState> {
    let order = [
        Label::electron(0, 0),
        Label::ancilla(0, 0, 0),
        Label::electron(1, 0),
        Label::ancilla(1, 0, 0),
    ];
    match state.state() {
        crate::quantum::AnyState::Pure(p) => Ok(p.reordered(&order)?),
        crate::quantum::AnyState::Mixed(_) => unreachable!("transfer starts from a pure Bell link"),
    }
}

/// Runs the transfer. With `rng` the measurement outcomes are sampled and a
/// single outcome is returned; without it every outcome is listed with its
/// probability.
pub fn entanglement_transfer<R: Rng + ?Sized>(
    basis: TransferBasis,
    rng: Option<&mut R>,
) -> Result<TransferResult> {
    let program = transfer_program(basis);
    let net = initial()?;
    let nodes = transfer_nodes();
    for v in &program.rounds {
        compile_round(&nodes, v)?;
    }

    let cnot = run_round_exact(&net, &program.rounds[0])?.remove(0);
    let after = after_cnot(&cnot.state)?;
    let (na, nb) = nuclei();
    let marginal_fidelity = cnot
        .state
        .reduced(&[na.clone(), nb.clone()])?
        .fidelity_with(&bell_state(BellState::PhiPlus, na, nb))?;

    let mut outcomes = Vec::new();
    if basis != TransferBasis::None {
        let odd = |leaf: &Branch| {
            leaf.record.last_bit(Address::new(0, 0)) != leaf.record.last_bit(Address::new(1, 0))
        };
        let measured: Vec<Branch> = match rng {
            None => run_round_exact(&cnot.state, &program.rounds[1])?
                .into_iter()
                .map(|mut b| {
                    b.weight *= cnot.weight;
                    b
                })
                .collect(),
            Some(rng) => {
                let out = run_round(&cnot.state, &program.rounds[1], rng)?;
                let mut record = cnot.record.clone();
                record.extend(out.delta);
                let p = out
                    .trace
                    .instructions
                    .iter()
                    .map(|t| t.probability)
                    .product();
                vec![Branch {
                    weight: p,
                    state: out.state,
                    record,
                    trace: vec![out.trace],
                }]
            }
        };
        for leaf in measured {
            if basis == TransferBasis::X && odd(&leaf) {
                let mut fixed = run_round_exact(&leaf.state, &correction())?.remove(0);
                fixed.weight = leaf.weight;
                fixed.record = leaf.record.clone();
                outcomes.push(finish(&fixed, true)?);
            } else {
                outcomes.push(finish(&leaf, false)?);
            }
        }
    }
    Ok(TransferResult {
        basis,
        after_cnot: after,
        marginal_fidelity,
        outcomes,
    })
}
