//! Interferometric overlap witness on a one-qubit register.
//!
//! The register is prepared in `(|0⟩ + e^{iφ}|1⟩)/√2`, selects `U0` or `U1`
//! on the electron and is read out in the X basis, giving
//! `p_±(φ) = ½(1 ± Re[e^{iφ} a])` with `a = ⟨ψ|U0†U1|ψ⟩`. Two settings,
//! `φ = 0` and `φ = −π/2`, yield `Re a` and `Im a`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::isa::{Address, Instruction, NodeConfig, Opcode, Pattern, Preparation, ReadoutBasis};
use crate::node::{execute_coherent, execute_coherent_branches, ClusterState};
use crate::quantum::{Gate, GateSpec, Label, PureState, C64};

use super::{ProtocolError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseScan {
    pub phases: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMode {
    Exact,
    Sampled { shots: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessResult {
    /// Estimate of `⟨ψ|U0†U1|ψ⟩`.
    pub overlap: C64,
    /// `p_+` at `φ = 0` and at `φ = −π/2`.
    pub p_plus: [f64; 2],
    pub f_state: f64,
    /// Zero in exact mode.
    pub shots: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
    /// `Im a` vanished, so the direction of the error cannot be told.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationPoint {
    pub epsilon: f64,
    pub overlap: C64,
    pub f_state: f64,
    /// Signed estimate; non-negative when the sign is ambiguous.
    pub estimate: f64,
    pub sign: Sign,
}

fn node() -> NodeConfig {
    NodeConfig::new(0, 1, 1, 0)
}

fn electron() -> Label {
    Label::electron(0, 0)
}

fn gates(seq: &[GateSpec]) -> Vec<Gate> {
    if seq.is_empty() {
        return vec![Gate::on(GateSpec::I, electron())];
    }
    seq.iter()
        .cloned()
        .map(|g| Gate::on(g, electron()))
        .collect()
}

/// The two-branch coherent instruction at phase `phi`.
pub fn witness_instruction(u0: &[GateSpec], u1: &[GateSpec], phi: f64) -> Instruction {
    Instruction::coherent(
        Address::new(0, 0),
        Opcode::Idle,
        Pattern::new([0, 1]).expect("non-empty"),
        Preparation::RelativePhase(phi),
        ReadoutBasis::XBasis,
    )
    .with_override(0, gates(u0))
    .with_override(1, gates(u1))
}

fn cluster(psi: &PureState) -> Result<ClusterState> {
    if psi.num_qubits() != 1 {
        return Err(ProtocolError::NotSingleQubit);
    }
    let a = psi.amplitudes();
    let e = PureState::new(vec![electron()], vec![a[0], a[1]])?;
    Ok(ClusterState::with_electron(Address::new(0, 0), 1, 0, &e)?)
}

fn fringe_exact(cl: &ClusterState, u0: &[GateSpec], u1: &[GateSpec], phi: f64) -> Result<[f64; 2]> {
    let out = execute_coherent_branches(cl, &witness_instruction(u0, u1, phi), &node())?;
    let p = |j| {
        out.iter()
            .filter(|r| r.outcome_index == Some(j))
            .map(|r| r.probability)
            .sum::<f64>()
    };
    Ok([p(0), p(1)])
}

/// Exact `p_±(φ)` at every phase.
pub fn phase_scan(
    u0: &[GateSpec],
    u1: &[GateSpec],
    psi: &PureState,
    phases: &[f64],
) -> Result<PhaseScan> {
    let cl = cluster(psi)?;
    let mut p_plus = Vec::with_capacity(phases.len());
    let mut p_minus = Vec::with_capacity(phases.len());
    for &phi in phases {
        if !phi.is_finite() {
            return Err(ProtocolError::NonFinitePhase(phi));
        }
        let [p, m] = fringe_exact(&cl, u0, u1, phi)?;
        p_plus.push(p);
        p_minus.push(m);
    }
    Ok(PhaseScan {
        phases: phases.to_vec(),
        p_plus,
        p_minus,
    })
}

/// Estimates `a` from `p_+` at `φ = 0` and `φ = −π/2`.
pub fn witness<R: Rng + ?Sized>(
    u0: &[GateSpec],
    u1: &[GateSpec],
    psi: &PureState,
    mode: WitnessMode,
    rng: &mut R,
) -> Result<WitnessResult> {
    let cl = cluster(psi)?;
    let mut p = [0.0; 2];
    for (slot, phi) in p.iter_mut().zip([0.0, -FRAC_PI_2]) {
        *slot = match mode {
            WitnessMode::Exact => fringe_exact(&cl, u0, u1, phi)?[0],
            WitnessMode::Sampled { shots: 0 } => return Err(ProtocolError::ZeroShots),
            WitnessMode::Sampled { shots } => {
                let instr = witness_instruction(u0, u1, phi);
                let mut plus = 0u64;
                for _ in 0..shots {
                    if execute_coherent(&cl, &instr, &node(), rng)?.outcome_index == Some(0) {
                        plus += 1;
                    }
                }
                plus as f64 / shots as f64
            }
        };
    }
    let shots = match mode {
        WitnessMode::Exact => 0,
        WitnessMode::Sampled { shots } => shots,
    };
    Ok(assemble(p, shots))
}

fn assemble(p: [f64; 2], shots: u64) -> WitnessResult {
    let overlap = C64::new(2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0);
    WitnessResult {
        overlap,
        p_plus: p,
        f_state: overlap.norm_sqr(),
        shots,
    }
}

/// Recovers the over-rotation `ε` of an implemented `Ry(θ + ε)` against the
/// intended `Ry(θ)`.
///
/// With `a = ⟨ψ|Ry(ε)|ψ⟩ = cos(ε/2) − i sin(ε/2)⟨Y⟩`, the magnitude is
/// `2·acos(Re a)` and the sign is that of `−Im a·⟨Y⟩`. For `⟨Y⟩ = 0` this
/// reduces to `2·acos(√F_state)` and the sign is ambiguous.
pub fn calibrate(theta: f64, epsilons: &[f64], psi: &PureState) -> Result<Vec<CalibrationPoint>> {
    let cl = cluster(psi)?;
    let data = cl.data_state();
    let a = data.amplitudes();
    // ⟨ψ|Y|ψ⟩ = 2 Im(conj(α) β)
    let y = 2.0 * (a[0].conj() * a[1]).im;
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps > -PI && eps < PI) {
            return Err(ProtocolError::EpsilonOutOfRange(eps));
        }
        let (u0, u1) = ([GateSpec::Ry(theta)], [GateSpec::Ry(theta + eps)]);
        let [p0, m0] = fringe_exact(&cl, &u0, &u1, 0.0)?;
        let w = assemble([p0, fringe_exact(&cl, &u0, &u1, -FRAC_PI_2)?[0]], 0);
        // 2·acos(Re a) rewritten through p_−(0) = (1 − Re a)/2, which keeps
        // precision near ε = 0.
        let magnitude = 4.0 * m0.clamp(0.0, 1.0).sqrt().asin();
        let s = -w.overlap.im * y;
        let sign = if magnitude == 0.0 {
            Sign::Zero
        } else if w.overlap.im.abs() < 1e-12 {
            Sign::Ambiguous
        } else if s > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        };
        let estimate = if sign == Sign::Negative {
            -magnitude
        } else {
            magnitude
        };
        out.push(CalibrationPoint {
            epsilon: eps,
            overlap: w.overlap,
            f_state: w.f_state,
            estimate,
            sign,
        });
    }
    Ok(out)
}
