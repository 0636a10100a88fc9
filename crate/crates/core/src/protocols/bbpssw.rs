//! One BBPSSW purification step expressed as ISA rounds.
//!
//! Nodes A (0) and B (1) each hold two electrons. Link `E0.0–E1.0` is the
//! pair to keep and `E0.1–E1.1` the pair to measure.
//!
//! 1. Bilateral Pauli `u` on all four electrons (pattern `{idx(u)}`).
//! 2. CNOT `E_m.0 → E_m.1` at each node (pattern `{4}`).
//! 3. Z measurement of `E_m.1` at each node (pattern `{5}`).
//! 4. Keep the first pair when both bits agree.

use rand::Rng;

use crate::controller::{
    compile, parity_sift, run_compiled, run_compiled_exact, twirl_vector, CompiledProgram,
    LinkSpec, LinkState, NetworkState,
};
use crate::isa::{Address, Instruction, InstructionVector, NodeConfig, Opcode, Pattern, Program};
use crate::quantum::{Basis, BellState, Label};
use crate::rng::trial_rng;

use super::{ProtocolError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PurificationMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurificationResult {
    pub input_fidelity: f64,
    pub output_fidelity: f64,
    pub success_probability: f64,
    /// Zero in exact mode.
    pub trials: u64,
    pub kept: u64,
    pub mode: PurificationMode,
    /// Standard errors of the Monte Carlo estimates.
    pub output_stderr: Option<f64>,
    pub success_stderr: Option<f64>,
}

const PAULIS: [Opcode; 4] = [Opcode::Idle, Opcode::X, Opcode::Y, Opcode::Z];

/// Closed-form output fidelity and success probability for Werner inputs.
pub fn recurrence(f: f64) -> (f64, f64) {
    let q = (1.0 - f) / 3.0;
    let den = f * f + 2.0 * f * q + 5.0 * q * q;
    ((f * f + q * q) / den, den)
}

/// Two nodes, two electrons each, three-qubit registers with the
/// purification binding table.
pub fn bbpssw_nodes() -> Vec<NodeConfig> {
    (0..2).map(|m| NodeConfig::new(m, 2, 3, 0)).collect()
}

pub fn bbpssw_links(state: [LinkState; 2]) -> [LinkSpec; 2] {
    [
        LinkSpec::new(Label::electron(0, 0), Label::electron(1, 0), state[0]),
        LinkSpec::new(Label::electron(0, 1), Label::electron(1, 1), state[1]),
    ]
}

fn electrons() -> Vec<Address> {
    (0..2)
        .flat_map(|m| (0..2).map(move |e| Address::new(m, e)))
        .collect()
}

/// The three instruction rounds with twirl Pauli `u`.
pub fn bbpssw_program(u: Opcode) -> Program {
    let k = PAULIS
        .iter()
        .position(|p| *p == u)
        .expect("u must be a Pauli or IDLE") as u32;
    let twirl = electrons()
        .into_iter()
        .map(|a| Instruction::deterministic(a, u, Pattern::single(k)))
        .collect();
    let cnot = (0..2)
        .map(|m| {
            Instruction::deterministic(Address::new(m, 0), Opcode::Cnot, Pattern::single(4))
                .control(Label::electron(m, 0))
                .target(Label::electron(m, 1))
        })
        .collect();
    let measure = (0..2)
        .map(|m| {
            Instruction::deterministic(Address::new(m, 1), Opcode::Measure, Pattern::single(5))
                .target(Label::electron(m, 1))
                .basis(Basis::Z)
        })
        .collect();
    Program::new(vec![
        InstructionVector::new(1, twirl),
        InstructionVector::new(2, cnot),
        InstructionVector::new(3, measure),
    ])
}

fn compiled() -> Result<Vec<CompiledProgram>> {
    let nodes = bbpssw_nodes();
    PAULIS
        .iter()
        .map(|u| Ok(compile(&nodes, &bbpssw_program(*u))?))
        .collect()
}

fn keep_pair() -> (Label, Label) {
    (Label::electron(0, 0), Label::electron(1, 0))
}

fn sift(record: &crate::controller::ClassicalRecord) -> Result<bool> {
    Ok(parity_sift(record, Address::new(0, 1), Address::new(1, 1))?)
}

/// Bell state of one link drawn from the Werner mixture.
fn sample_bell<R: Rng + ?Sized>(f: f64, rng: &mut R) -> BellState {
    let u: f64 = rng.gen();
    if u < f {
        return BellState::PhiPlus;
    }
    let rest = [BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];
    let i = (((u - f) / (1.0 - f)) * 3.0) as usize;
    rest[i.min(2)]
}

/// One purification step on two Werner pairs of fidelity `fidelity`.
///
/// Exact mode averages the four twirl programs over every measurement
/// branch of the 16-dimensional density matrix. Monte Carlo mode draws,
/// per trial, the twirl Pauli and a Bell realisation of each Werner link,
/// runs the program with sampled outcomes and sifts.
pub fn bbpssw(
    fidelity: f64,
    mode: PurificationMode,
    trials: u64,
    seed: u64,
) -> Result<PurificationResult> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(ProtocolError::FidelityOutOfRange(fidelity));
    }
    let programs = compiled()?;
    let (a, b) = keep_pair();
    match mode {
        PurificationMode::Exact => {
            let net = NetworkState::with_links(
                bbpssw_nodes(),
                &bbpssw_links([LinkState::Werner(fidelity); 2]),
            )?;
            let (mut kept, mut good) = (0.0, 0.0);
            for p in &programs {
                for leaf in run_compiled_exact(&net, p)? {
                    if sift(&leaf.record)? {
                        let w = leaf.weight / PAULIS.len() as f64;
                        kept += w;
                        good += w * leaf.state.pair_fidelity(&a, &b, BellState::PhiPlus)?;
                    }
                }
            }
            Ok(PurificationResult {
                input_fidelity: fidelity,
                output_fidelity: if kept > 0.0 { good / kept } else { 0.0 },
                success_probability: kept,
                trials: 0,
                kept: 0,
                mode,
                output_stderr: None,
                success_stderr: None,
            })
        }
        PurificationMode::MonteCarlo => {
            if trials == 0 {
                return Err(ProtocolError::ZeroTrials);
            }
            let (mut kept, mut good) = (0u64, 0.0);
            for t in 0..trials {
                let mut rng = trial_rng(seed, t);
                let (u, _) = twirl_vector(1, &electrons(), &mut rng);
                let links = [
                    sample_bell(fidelity, &mut rng),
                    sample_bell(fidelity, &mut rng),
                ];
                let net = NetworkState::with_links(
                    bbpssw_nodes(),
                    &bbpssw_links(links.map(LinkState::Bell)),
                )?;
                let program = &programs[PAULIS.iter().position(|p| *p == u).expect("pauli")];
                let out = run_compiled(&net, program, &mut rng)?;
                if sift(&out.record)? {
                    kept += 1;
                    good += out.state.pair_fidelity(&a, &b, BellState::PhiPlus)?;
                }
            }
            let p = kept as f64 / trials as f64;
            let f = if kept > 0 { good / kept as f64 } else { 0.0 };
            Ok(PurificationResult {
                input_fidelity: fidelity,
                output_fidelity: f,
                success_probability: p,
                trials,
                kept,
                mode,
                output_stderr: Some(if kept > 0 {
                    (f * (1.0 - f) / kept as f64).sqrt()
                } else {
                    0.0
                }),
                success_stderr: Some((p * (1.0 - p) / trials as f64).sqrt()),
            })
        }
    }
}
