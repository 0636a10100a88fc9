use std::collections::BTreeSet;

use rand::Rng;

use crate::isa::{
    resolve_branches, validate, Address, Instruction, InstructionVector, Mode, NodeConfig, Opcode,
    Pattern, Program,
};
use crate::node::{apply_instrument, kraus_operators, KrausBranch};
use crate::quantum::{sample_index, AnyState, Label, ZERO_PROBABILITY};

use super::record::{ClassicalEntry, ClassicalRecord, InstructionTrace, RoundTrace};
use super::{ControllerError, NetworkState, Result};

#[derive(Clone, Debug)]
struct Step {
    address: Address,
    coherent: bool,
    branches: Vec<KrausBranch>,
    warnings: Vec<String>,
}

/// A validated round with every instrument precomputed.
#[derive(Clone, Debug)]
pub struct CompiledRound {
    pub round: u64,
    steps: Vec<Step>,
}

#[derive(Clone, Debug)]
pub struct CompiledProgram {
    pub rounds: Vec<CompiledRound>,
}

#[derive(Clone, Debug)]
pub struct RoundOutput {
    pub state: NetworkState,
    pub delta: Vec<ClassicalEntry>,
    pub trace: RoundTrace,
}

#[derive(Clone, Debug)]
pub struct ProgramOutput {
    pub state: NetworkState,
    pub record: ClassicalRecord,
    pub trace: Vec<RoundTrace>,
}

/// One leaf of the exact outcome tree.
#[derive(Clone, Debug)]
pub struct Branch {
    /// Probability of reaching this leaf.
    pub weight: f64,
    pub state: NetworkState,
    pub record: ClassicalRecord,
    pub trace: Vec<RoundTrace>,
}

fn compile_step(nodes: &[NodeConfig], instr: &Instruction) -> Result<Step> {
    let node = nodes
        .get(instr.address.node)
        .ok_or(ControllerError::UnknownNode(instr.address.node))?;
    validate(instr, node).map_err(|errors| ControllerError::Invalid {
        address: instr.address,
        errors,
    })?;
    let warnings = resolve_branches(instr, &node.bindings)
        .map_err(crate::node::NodeError::from)?
        .warnings;
    let branches = kraus_operators(instr, node)?;
    Ok(Step {
        address: instr.address,
        coherent: instr.mode == Mode::Coherent,
        branches,
        warnings,
    })
}

/// Validates one instruction vector against the node configurations.
pub fn compile_round(nodes: &[NodeConfig], vec: &InstructionVector) -> Result<CompiledRound> {
    let mut addresses = BTreeSet::new();
    let mut operands: BTreeSet<Label> = BTreeSet::new();
    let mut steps = Vec::with_capacity(vec.entries.len());
    for instr in &vec.entries {
        if !addresses.insert(instr.address) {
            return Err(ControllerError::AddressCollision(instr.address));
        }
        let step = compile_step(nodes, instr)?;
        for l in &step.branches[0].labels {
            if !operands.insert(l.clone()) {
                return Err(ControllerError::OperandOverlap(l.clone()));
            }
        }
        steps.push(step);
    }
    Ok(CompiledRound {
        round: vec.round,
        steps,
    })
}

/// Validates a whole program. Rounds must be strictly increasing.
pub fn compile(nodes: &[NodeConfig], program: &Program) -> Result<CompiledProgram> {
    let mut prev = None;
    let mut rounds = Vec::with_capacity(program.len());
    for vec in &program.rounds {
        if let Some(p) = prev {
            if vec.round <= p {
                return Err(ControllerError::RoundOutOfOrder {
                    current: p,
                    found: vec.round,
                });
            }
        }
        prev = Some(vec.round);
        rounds.push(
            compile_round(nodes, vec).map_err(|e| ControllerError::Round {
                round: vec.round,
                source: Box::new(e),
            })?,
        );
    }
    Ok(CompiledProgram { rounds })
}

fn check_order(net: &NetworkState, round: u64) -> Result<()> {
    if round != net.round() + 1 {
        return Err(ControllerError::RoundOutOfOrder {
            current: net.round(),
            found: round,
        });
    }
    Ok(())
}

struct Realised {
    probability: f64,
    state: AnyState,
    trace: InstructionTrace,
}

fn outcomes(state: &AnyState, step: &Step) -> Result<Vec<Realised>> {
    let out = apply_instrument(state, &step.branches).map_err(ControllerError::from)?;
    Ok(out
        .into_iter()
        .filter_map(|o| {
            let s = o.state?;
            Some(Realised {
                probability: o.probability,
                state: s,
                trace: InstructionTrace {
                    address: step.address,
                    outcome_index: step.coherent.then_some(o.index),
                    bits: o.bits,
                    probability: o.probability,
                    warnings: step.warnings.clone(),
                },
            })
        })
        .collect())
}

fn entries(round: u64, traces: &[InstructionTrace]) -> Vec<ClassicalEntry> {
    traces
        .iter()
        .flat_map(|t| {
            t.bits.iter().map(move |&bit| ClassicalEntry {
                round,
                address: t.address,
                bit,
            })
        })
        .collect()
}

fn sample_round<R: Rng + ?Sized>(
    net: &NetworkState,
    round: &CompiledRound,
    rng: &mut R,
) -> Result<RoundOutput> {
    check_order(net, round.round)?;
    let mut state = net.state().clone();
    let mut traces = Vec::with_capacity(round.steps.len());
    for step in &round.steps {
        let mut all = outcomes(&state, step)?;
        let probs: Vec<f64> = all.iter().map(|r| r.probability).collect();
        let pick = all.swap_remove(sample_index(&probs, rng));
        state = pick.state;
        traces.push(pick.trace);
    }
    Ok(RoundOutput {
        state: net.advanced(state),
        delta: entries(round.round, &traces),
        trace: RoundTrace {
            round: round.round,
            instructions: traces,
        },
    })
}

fn expand_round(leaf: &Branch, round: &CompiledRound) -> Result<Vec<Branch>> {
    check_order(&leaf.state, round.round)?;
    let mut partial = vec![(leaf.weight, leaf.state.state().clone(), Vec::new())];
    for step in &round.steps {
        let mut next = Vec::new();
        for (w, state, traces) in partial {
            for r in outcomes(&state, step)? {
                let weight = w * r.probability;
                if weight <= ZERO_PROBABILITY {
                    continue;
                }
                let mut t: Vec<InstructionTrace> = traces.clone();
                t.push(r.trace);
                next.push((weight, r.state, t));
            }
        }
        partial = next;
    }
    Ok(partial
        .into_iter()
        .map(|(weight, state, traces)| {
            let mut record = leaf.record.clone();
            record.extend(entries(round.round, &traces));
            let mut trace = leaf.trace.clone();
            trace.push(RoundTrace {
                round: round.round,
                instructions: traces,
            });
            Branch {
                weight,
                state: leaf.state.advanced(state),
                record,
                trace,
            }
        })
        .collect())
}

/// Executes one instruction vector, drawing measurement outcomes from
/// `rng`. Nothing is applied unless the whole vector validates.
pub fn run_round<R: Rng + ?Sized>(
    net: &NetworkState,
    vec: &InstructionVector,
    rng: &mut R,
) -> Result<RoundOutput> {
    check_order(net, vec.round)?;
    let compiled = compile_round(net.nodes(), vec)?;
    sample_round(net, &compiled, rng)
}

/// Every outcome of one instruction vector with its probability.
pub fn run_round_exact(net: &NetworkState, vec: &InstructionVector) -> Result<Vec<Branch>> {
    check_order(net, vec.round)?;
    let compiled = compile_round(net.nodes(), vec)?;
    expand_round(&root(net), &compiled)
}

fn root(net: &NetworkState) -> Branch {
    Branch {
        weight: 1.0,
        state: net.clone(),
        record: ClassicalRecord::default(),
        trace: Vec::new(),
    }
}

fn wrap(round: u64) -> impl Fn(ControllerError) -> ControllerError {
    move |e| match e {
        ControllerError::Round { .. } => e,
        e => ControllerError::Round {
            round,
            source: Box::new(e),
        },
    }
}

pub fn run_compiled<R: Rng + ?Sized>(
    net: &NetworkState,
    program: &CompiledProgram,
    rng: &mut R,
) -> Result<ProgramOutput> {
    let mut state = net.clone();
    let mut record = ClassicalRecord::default();
    let mut trace = Vec::with_capacity(program.rounds.len());
    for round in &program.rounds {
        let out = sample_round(&state, round, rng).map_err(wrap(round.round))?;
        state = out.state;
        record.extend(out.delta);
        trace.push(out.trace);
    }
    Ok(ProgramOutput {
        state,
        record,
        trace,
    })
}

pub fn run_compiled_exact(net: &NetworkState, program: &CompiledProgram) -> Result<Vec<Branch>> {
    let mut leaves = vec![root(net)];
    for round in &program.rounds {
        let mut next = Vec::new();
        for leaf in &leaves {
            next.extend(expand_round(leaf, round).map_err(wrap(round.round))?);
        }
        leaves = next;
    }
    Ok(leaves)
}

/// Runs every round in order with sampled outcomes.
pub fn run_program<R: Rng + ?Sized>(
    net: &NetworkState,
    program: &Program,
    rng: &mut R,
) -> Result<ProgramOutput> {
    run_compiled(net, &compile(net.nodes(), program)?, rng)
}

/// Runs every round in order, keeping every outcome branch.
pub fn run_program_exact(net: &NetworkState, program: &Program) -> Result<Vec<Branch>> {
    run_compiled_exact(net, &compile(net.nodes(), program)?)
}

/// Draws one Pauli and addresses it to every listed electron, so that all
/// nodes apply the same operation (pattern `{0}`, `{1}`, `{2}` or `{3}` for
/// I, X, Y, Z).
pub fn twirl_vector<R: Rng + ?Sized>(
    round: u64,
    addresses: &[Address],
    rng: &mut R,
) -> (Opcode, InstructionVector) {
    const PAULIS: [Opcode; 4] = [Opcode::Idle, Opcode::X, Opcode::Y, Opcode::Z];
    let u = rng.gen_range(0..4usize);
    let entries = addresses
        .iter()
        .map(|a| Instruction::deterministic(*a, PAULIS[u], Pattern::single(u as u32)))
        .collect();
    (PAULIS[u], InstructionVector::new(round, entries))
}
