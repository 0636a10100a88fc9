use std::collections::BTreeMap;

use rand::Rng;

use crate::isa::{resolve_branches, validate, Instruction, Mode, NodeConfig};
use crate::quantum::{
    apply_controlled_unitary, measure_qubit_branches, project_register, sample_index, Gate,
    GateSpec, Label, PureState, QuantumError, C64,
};

use super::{ClusterState, NodeError, Result};

/// One outcome of executing an instruction on a cluster.
#[derive(Clone, Debug)]
pub struct ExecutionResult {
    /// Readout row `j` for coherent instructions; for deterministic
    /// measurements the measured bits read as a binary number.
    pub outcome_index: Option<usize>,
    pub probability: f64,
    pub post_state: ClusterState,
    pub classical_bits: Vec<u8>,
    pub warnings: Vec<String>,
}

struct Partial {
    bits: Vec<u8>,
    probability: f64,
    state: PureState,
}

fn bits_of(k: usize, width: usize) -> Vec<u8> {
    (0..width).rev().map(|i| ((k >> i) & 1) as u8).collect()
}

/// Gate sequence per pattern member.
type BranchMap = BTreeMap<u32, Vec<Gate>>;

fn resolve(
    cluster: &ClusterState,
    instr: &Instruction,
    node: &NodeConfig,
    mode: Mode,
) -> Result<(BranchMap, Vec<String>)> {
    if instr.mode != mode {
        return Err(NodeError::WrongMode { expected: mode });
    }
    if instr.address != cluster.address() {
        return Err(NodeError::WrongCluster {
            instr: instr.address,
            cluster: cluster.address(),
        });
    }
    if cluster.register_size() != node.register_size || cluster.ancillas().len() != node.ancillas {
        return Err(QuantumError::DimensionMismatch {
            len: cluster.state().amplitudes().len(),
            qubits: node.register_size + 1 + node.ancillas,
        }
        .into());
    }
    validate(instr, node)?;
    let res = resolve_branches(instr, &node.bindings)?;
    Ok((res.branches, res.warnings))
}

/// Runs branch `k`'s gate sequence with the register fixed, splitting on
/// every measurement.
fn run_sequence(
    start: PureState,
    register: &[Label],
    electron: &Label,
    k: u32,
    gates: &[Gate],
) -> Result<Vec<Partial>> {
    let mut parts = vec![Partial {
        bits: Vec::new(),
        probability: 1.0,
        state: start,
    }];
    for g in gates {
        let mut next = Vec::with_capacity(parts.len());
        for p in parts {
            match &g.spec {
                GateSpec::Measure(basis) => {
                    for o in measure_qubit_branches(&p.state, &g.target, *basis)? {
                        if let Some(state) = o.post_state {
                            let mut bits = p.bits.clone();
                            bits.push(o.bit);
                            next.push(Partial {
                                bits,
                                probability: p.probability * o.probability,
                                state,
                            });
                        }
                    }
                }
                _ => {
                    let map = BTreeMap::from([(k as usize, vec![g.clone()])]);
                    let state = apply_controlled_unitary(&p.state, register, &map, electron)?;
                    next.push(Partial { state, ..p });
                }
            }
        }
        parts = next;
    }
    Ok(parts)
}

/// Every non-negligible outcome of a deterministic instruction.
///
/// The register is reset to the selected configuration and the bound gate
/// sequence runs on the electron (and any data qubit it names).
pub fn execute_deterministic_branches(
    cluster: &ClusterState,
    instr: &Instruction,
    node: &NodeConfig,
) -> Result<Vec<ExecutionResult>> {
    let (branches, warnings) = resolve(cluster, instr, node, Mode::Deterministic)?;
    let (&k, gates) = branches
        .iter()
        .next()
        .expect("deterministic resolution has one branch");
    let register = cluster.register();
    let reg = PureState::basis(register.to_vec(), &bits_of(k as usize, register.len()))?;
    let start = reg.tensor(&cluster.data_state())?;
    let parts = run_sequence(start, register, cluster.electron(), k, gates)?;
    Ok(parts
        .into_iter()
        .map(|p| ExecutionResult {
            outcome_index: (!p.bits.is_empty()).then(|| {
                p.bits
                    .iter()
                    .fold(0usize, |acc, b| (acc << 1) | *b as usize)
            }),
            probability: p.probability,
            post_state: cluster.with_state(p.state),
            classical_bits: p.bits,
            warnings: warnings.clone(),
        })
        .collect())
}

/// Every non-negligible readout outcome of a coherent instruction.
///
/// The register is prepared with amplitudes `c_k`, the controlled unitary is
/// applied and the register is projected onto each readout row in turn. The
/// register is left in the row it was projected onto.
pub fn execute_coherent_branches(
    cluster: &ClusterState,
    instr: &Instruction,
    node: &NodeConfig,
) -> Result<Vec<ExecutionResult>> {
    let (branches, warnings) = resolve(cluster, instr, node, Mode::Coherent)?;
    let amplitudes = instr
        .preparation
        .as_ref()
        .and_then(|p| p.amplitudes(&instr.pattern))
        .expect("validated coherent instruction has amplitudes");
    let rows = instr
        .readout
        .as_ref()
        .expect("validated coherent instruction has readout")
        .rows(node.register_size);
    let register = cluster.register();
    let mut reg = vec![C64::new(0.0, 0.0); 1 << register.len()];
    for (k, c) in &amplitudes {
        reg[*k as usize] = *c;
    }
    let start = PureState::new(register.to_vec(), reg)?.tensor(&cluster.data_state())?;

    let support: Vec<u32> = amplitudes
        .iter()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(k, _)| *k)
        .collect();
    let measures = |k: &u32| {
        branches
            .get(k)
            .is_some_and(|g| g.iter().any(|g| !g.spec.is_unitary()))
    };
    let parts = match support.iter().find(|k| measures(k)) {
        // Validation guarantees this branch carries the whole register.
        Some(&a) => run_sequence(start, register, cluster.electron(), a, &branches[&a])?,
        None => {
            let map: BTreeMap<usize, Vec<Gate>> = branches
                .iter()
                .filter(|(k, _)| !measures(k))
                .map(|(k, g)| (*k as usize, g.clone()))
                .collect();
            let state = apply_controlled_unitary(&start, register, &map, cluster.electron())?;
            vec![Partial {
                bits: Vec::new(),
                probability: 1.0,
                state,
            }]
        }
    };

    let mut out = Vec::new();
    for p in parts {
        for (j, row) in rows.iter().enumerate() {
            let proj = project_register(&p.state, register, row)?;
            let Some(data) = proj.normalized() else {
                continue;
            };
            let post = PureState::new(register.to_vec(), row.clone())?.tensor(&data)?;
            out.push(ExecutionResult {
                outcome_index: Some(j),
                probability: p.probability * proj.probability,
                post_state: cluster.with_state(post),
                classical_bits: p.bits.clone(),
                warnings: warnings.clone(),
            });
        }
    }
    Ok(out)
}

fn pick<R: Rng + ?Sized>(mut all: Vec<ExecutionResult>, rng: &mut R) -> ExecutionResult {
    let probs: Vec<f64> = all.iter().map(|r| r.probability).collect();
    let i = sample_index(&probs, rng);
    all.swap_remove(i)
}

/// Deterministic execution with measurement outcomes drawn from `rng`.
pub fn execute_deterministic<R: Rng + ?Sized>(
    cluster: &ClusterState,
    instr: &Instruction,
    node: &NodeConfig,
    rng: &mut R,
) -> Result<ExecutionResult> {
    Ok(pick(
        execute_deterministic_branches(cluster, instr, node)?,
        rng,
    ))
}

/// Coherent execution with the readout outcome drawn from `rng`.
pub fn execute_coherent<R: Rng + ?Sized>(
    cluster: &ClusterState,
    instr: &Instruction,
    node: &NodeConfig,
    rng: &mut R,
) -> Result<ExecutionResult> {
    Ok(pick(execute_coherent_branches(cluster, instr, node)?, rng))
}
