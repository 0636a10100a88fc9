use std::collections::BTreeMap;

use rand::Rng;

use super::gate::{cnot_matrix, projector};
use super::{
    kernel, Basis, DensityState, Gate, GateSpec, Label, Matrix, PureState, QuantumError, Result,
    C64, STRUCTURAL_TOL, ZERO_PROBABILITY,
};

/// Result of applying one (possibly non-unitary) operator.
#[derive(Clone, Debug)]
pub struct KrausOutcome<S> {
    pub probability: f64,
    /// Renormalised post state; `None` when the branch is impossible.
    pub state: Option<S>,
}

/// Common interface of pure and mixed states.
pub trait QuantumState: Clone {
    fn labels(&self) -> &[Label];

    /// Applies `op` to `targets` (first target is the operator's most
    /// significant qubit), returning the branch weight and renormalised state.
    fn apply_kraus(&self, op: &Matrix, targets: &[Label]) -> Result<KrausOutcome<Self>>;

    /// `⟨ref|ρ|ref⟩` or `|⟨ref|ψ⟩|²`.
    fn fidelity_with(&self, reference: &PureState) -> Result<f64>;

    fn to_density(&self) -> DensityState;
}

impl QuantumState for PureState {
    fn labels(&self) -> &[Label] {
        PureState::labels(self)
    }

    fn apply_kraus(&self, op: &Matrix, targets: &[Label]) -> Result<KrausOutcome<Self>> {
        let amps = self.apply_raw(op, targets)?;
        let p = kernel::norm_sqr(&amps);
        let state = (p > ZERO_PROBABILITY).then(|| {
            let n = p.sqrt();
            PureState::new_unchecked(self.labels().to_vec(), amps.iter().map(|a| a / n).collect())
        });
        Ok(KrausOutcome {
            probability: p,
            state,
        })
    }

    fn fidelity_with(&self, reference: &PureState) -> Result<f64> {
        if reference.num_qubits() != self.num_qubits() {
            return Err(QuantumError::DimensionMismatch {
                len: reference.amplitudes().len(),
                qubits: self.num_qubits(),
            });
        }
        Ok(reference.inner(self)?.norm_sqr())
    }

    fn to_density(&self) -> DensityState {
        PureState::to_density(self)
    }
}

impl QuantumState for DensityState {
    fn labels(&self) -> &[Label] {
        DensityState::labels(self)
    }

    fn apply_kraus(&self, op: &Matrix, targets: &[Label]) -> Result<KrausOutcome<Self>> {
        let raw = self.apply_raw(op, targets)?;
        let p = raw.trace();
        let state = (p > ZERO_PROBABILITY).then(|| raw.scaled(1.0 / p));
        Ok(KrausOutcome {
            probability: p,
            state,
        })
    }

    fn fidelity_with(&self, reference: &PureState) -> Result<f64> {
        self.expectation(reference)
    }

    fn to_density(&self) -> DensityState {
        self.clone()
    }
}

/// Either representation; networks switch to a density matrix as soon as a
/// mixed link is injected.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyState {
    Pure(PureState),
    Mixed(DensityState),
}

impl AnyState {
    pub fn tensor(&self, other: &AnyState) -> Result<AnyState> {
        Ok(match (self, other) {
            (AnyState::Pure(a), AnyState::Pure(b)) => AnyState::Pure(a.tensor(b)?),
            (a, b) => AnyState::Mixed(a.to_density().tensor(&b.to_density())?),
        })
    }

    /// Reduced density matrix on `keep`.
    pub fn reduced(&self, keep: &[Label]) -> Result<DensityState> {
        match self {
            AnyState::Pure(p) => {
                // Trace out on the vector directly to avoid a 2^n × 2^n matrix.
                let pos = p.positions(keep)?;
                super::pure::check_labels(keep)?;
                let n = p.num_qubits();
                let dk = 1usize << keep.len();
                let rest = 1usize << (n - keep.len());
                let a = p.amplitudes();
                let m = Matrix::from_fn(dk, dk, |i, j| {
                    (0..rest)
                        .map(|r| {
                            a[kernel::join_index(i, r, n, &pos)]
                                * a[kernel::join_index(j, r, n, &pos)].conj()
                        })
                        .sum()
                });
                Ok(DensityState::new_unchecked(keep.to_vec(), m))
            }
            AnyState::Mixed(d) => d.partial_trace(keep),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.labels().len()
    }

    pub fn reordered(&self, order: &[Label]) -> Result<AnyState> {
        Ok(match self {
            AnyState::Pure(p) => AnyState::Pure(p.reordered(order)?),
            AnyState::Mixed(d) => AnyState::Mixed(d.reordered(order)?),
        })
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, AnyState::Pure(_))
    }
}

impl QuantumState for AnyState {
    fn labels(&self) -> &[Label] {
        match self {
            AnyState::Pure(p) => p.labels(),
            AnyState::Mixed(d) => d.labels(),
        }
    }

    fn apply_kraus(&self, op: &Matrix, targets: &[Label]) -> Result<KrausOutcome<Self>> {
        Ok(match self {
            AnyState::Pure(p) => {
                let o = p.apply_kraus(op, targets)?;
                KrausOutcome {
                    probability: o.probability,
                    state: o.state.map(AnyState::Pure),
                }
            }
            AnyState::Mixed(d) => {
                let o = d.apply_kraus(op, targets)?;
                KrausOutcome {
                    probability: o.probability,
                    state: o.state.map(AnyState::Mixed),
                }
            }
        })
    }

    fn fidelity_with(&self, reference: &PureState) -> Result<f64> {
        match self {
            AnyState::Pure(p) => p.fidelity_with(reference),
            AnyState::Mixed(d) => d.fidelity_with(reference),
        }
    }

    fn to_density(&self) -> DensityState {
        match self {
            AnyState::Pure(p) => p.to_density(),
            AnyState::Mixed(d) => d.clone(),
        }
    }
}

/// Matrix and qubit list (control first for CNOT) of a unitary gate.
pub(crate) fn gate_operator(gate: &GateSpec, target: &Label) -> Result<(Matrix, Vec<Label>)> {
    match gate {
        GateSpec::Measure(_) => Err(QuantumError::MeasureNotUnitary),
        GateSpec::Cnot { control } => {
            if control == target {
                return Err(QuantumError::ControlIsTarget(target.clone()));
            }
            Ok((cnot_matrix(), vec![control.clone(), target.clone()]))
        }
        g => Ok((
            g.single_qubit_matrix().expect("single-qubit gate"),
            vec![target.clone()],
        )),
    }
}

/// Evolves `state` by a unitary gate on `target` (and the CNOT control).
pub fn apply_gate<S: QuantumState>(state: &S, gate: &GateSpec, target: &Label) -> Result<S> {
    let (op, labels) = gate_operator(gate, target)?;
    let out = state.apply_kraus(&op, &labels)?;
    Ok(out.state.expect("unitary gate preserves norm"))
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome<S> {
    pub bit: u8,
    pub probability: f64,
    /// Renormalised post-measurement state; `None` for an impossible outcome.
    pub post_state: Option<S>,
}

/// Both outcomes of a projective single-qubit measurement, bit 0 first.
/// In the X basis bit 0 corresponds to `|+⟩`.
pub fn measure_qubit_branches<S: QuantumState>(
    state: &S,
    label: &Label,
    basis: Basis,
) -> Result<Vec<MeasurementOutcome<S>>> {
    [0u8, 1]
        .into_iter()
        .map(|bit| {
            let out = state.apply_kraus(&projector(basis, bit), std::slice::from_ref(label))?;
            Ok(MeasurementOutcome {
                bit,
                probability: out.probability,
                post_state: out.state,
            })
        })
        .collect()
}

/// Samples one Born-rule outcome.
pub fn measure_qubit<S: QuantumState, R: Rng + ?Sized>(
    state: &S,
    label: &Label,
    basis: Basis,
    rng: &mut R,
) -> Result<MeasurementOutcome<S>> {
    let mut branches = measure_qubit_branches(state, label, basis)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let i = sample_index(&probs, rng);
    Ok(branches.swap_remove(i))
}

/// Draws an index with the given (approximately normalised) weights. Zero
/// weight entries are never selected.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= ZERO_PROBABILITY {
            continue;
        }
        last = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last
}

/// `(⟨φ| ⊗ I)|Ψ⟩` for a register readout row.
#[derive(Clone, Debug)]
pub struct RegisterProjection {
    pub labels: Vec<Label>,
    /// Unnormalised amplitudes over `labels`.
    pub amplitudes: Vec<C64>,
    pub probability: f64,
    /// Set when the probability is below the zero-probability threshold; the
    /// amplitudes must then not be renormalised.
    pub negligible: bool,
}

impl RegisterProjection {
    pub fn normalized(&self) -> Option<PureState> {
        if self.negligible {
            return None;
        }
        let n = self.probability.sqrt();
        Some(PureState::new_unchecked(
            self.labels.clone(),
            self.amplitudes.iter().map(|a| a / n).collect(),
        ))
    }
}

pub fn project_register(
    state: &PureState,
    register_labels: &[Label],
    readout_row: &[C64],
) -> Result<RegisterProjection> {
    super::pure::check_labels(register_labels)?;
    let pos = state.positions(register_labels)?;
    let dim = 1usize << register_labels.len();
    if readout_row.len() != dim {
        return Err(QuantumError::OperatorDimension {
            expected: dim,
            found: readout_row.len(),
        });
    }
    let rn = kernel::norm_sqr(readout_row);
    if (rn - 1.0).abs() > STRUCTURAL_TOL {
        return Err(QuantumError::ReadoutNotNormalized(rn));
    }
    let n = state.num_qubits();
    let rest_n = n - register_labels.len();
    let mut out = vec![C64::new(0.0, 0.0); 1 << rest_n];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let (k, r) = kernel::split_index(idx, n, &pos);
        out[r] += readout_row[k].conj() * a;
    }
    let labels: Vec<Label> = state
        .labels()
        .iter()
        .filter(|l| !register_labels.contains(l))
        .cloned()
        .collect();
    let p = kernel::norm_sqr(&out);
    Ok(RegisterProjection {
        labels,
        amplitudes: out,
        probability: p,
        negligible: p < ZERO_PROBABILITY,
    })
}

/// Applies `Σ_k |k⟩⟨k|_N ⊗ U_k`. Register values without an entry act as the
/// identity. Branch gates may touch any non-register label of the state.
pub fn apply_controlled_unitary(
    state: &PureState,
    register_labels: &[Label],
    branch_map: &BTreeMap<usize, Vec<Gate>>,
    electron_label: &Label,
) -> Result<PureState> {
    super::pure::check_labels(register_labels)?;
    let reg_pos = state.positions(register_labels)?;
    state.position(electron_label)?;
    let n = state.num_qubits();
    let rest_labels: Vec<Label> = state
        .labels()
        .iter()
        .filter(|l| !register_labels.contains(l))
        .cloned()
        .collect();
    let rest_n = rest_labels.len();
    let capacity = 1usize << register_labels.len();

    let mut amps = state.amplitudes().to_vec();
    for (&k, gates) in branch_map {
        if k >= capacity {
            return Err(QuantumError::BranchOutOfRange { index: k, capacity });
        }
        let mut ops = Vec::with_capacity(gates.len());
        for g in gates {
            for l in g.labels() {
                if register_labels.contains(l) {
                    return Err(QuantumError::TouchesRegister(l.clone()));
                }
                if !rest_labels.contains(l) {
                    return Err(QuantumError::OutsideCluster(l.clone()));
                }
            }
            let (op, labels) = gate_operator(&g.spec, &g.target)?;
            let pos: Vec<usize> = labels
                .iter()
                .map(|l| rest_labels.iter().position(|x| x == l).unwrap())
                .collect();
            ops.push((op, pos));
        }
        let mut sub: Vec<C64> = (0..1usize << rest_n)
            .map(|r| amps[kernel::join_index(k, r, n, &reg_pos)])
            .collect();
        for (op, pos) in &ops {
            kernel::apply_matrix(&mut sub, rest_n, pos, op);
        }
        for (r, a) in sub.into_iter().enumerate() {
            amps[kernel::join_index(k, r, n, &reg_pos)] = a;
        }
    }
    Ok(PureState::new_unchecked(state.labels().to_vec(), amps))
}

/// State fidelity with a pure reference.
pub fn fidelity<S: QuantumState>(state: &S, reference: &PureState) -> Result<f64> {
    state.fidelity_with(reference)
}
