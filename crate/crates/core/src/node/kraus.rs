use std::collections::BTreeMap;

use crate::isa::{resolve_branches, validate, Instruction, Mode, NodeConfig};
use crate::quantum::{
    gate_operator, kernel, projector, Gate, GateSpec, Label, Matrix, QuantumState, C64,
    STRUCTURAL_TOL,
};

use super::{NodeError, Result};

/// Heralded operator for readout row `index` (and measurement bits `bits`).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausBranch {
    pub index: usize,
    pub bits: Vec<u8>,
    /// Qubits the operator acts on, electron first.
    pub labels: Vec<Label>,
    pub operator: Matrix,
    /// `α_{j,k} = d*_{j,k} c_k` for every pattern member `k`.
    pub lcu_coefficients: BTreeMap<u32, C64>,
}

#[derive(Clone, Debug)]
pub struct InstrumentOutcome<S> {
    pub index: usize,
    pub bits: Vec<u8>,
    pub probability: f64,
    /// `None` when the outcome has negligible probability.
    pub state: Option<S>,
}

fn operator_labels(electron: Label, branches: &BTreeMap<u32, Vec<Gate>>) -> Vec<Label> {
    let mut labels = vec![electron];
    for g in branches.values().flatten() {
        for l in g.labels() {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }
    labels
}

/// `op` on `targets` lifted to the full `labels` space.
fn embed(op: &Matrix, targets: &[Label], labels: &[Label]) -> Matrix {
    let n = labels.len();
    let d = 1usize << n;
    let pos: Vec<usize> = targets
        .iter()
        .map(|t| {
            labels
                .iter()
                .position(|l| l == t)
                .expect("target in labels")
        })
        .collect();
    let mut m = Matrix::zeros(d, d);
    let mut v = vec![C64::new(0.0, 0.0); d];
    for c in 0..d {
        v.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        v[c] = C64::new(1.0, 0.0);
        kernel::apply_matrix(&mut v, n, &pos, op);
        m.set_column(c, &nalgebra::DVector::from_column_slice(&v));
    }
    m
}

/// Operators of a gate sequence, one per measurement record.
fn sequence_operators(gates: &[Gate], labels: &[Label]) -> Result<Vec<(Vec<u8>, Matrix)>> {
    let d = 1usize << labels.len();
    let mut out = vec![(Vec::new(), Matrix::identity(d, d))];
    for g in gates {
        out = match &g.spec {
            GateSpec::Measure(basis) => {
                let target = std::slice::from_ref(&g.target);
                let mut next = Vec::with_capacity(2 * out.len());
                for (bits, m) in out {
                    for bit in [0u8, 1] {
                        let p = embed(&projector(*basis, bit), target, labels);
                        let mut b = bits.clone();
                        b.push(bit);
                        next.push((b, p * &m));
                    }
                }
                next
            }
            spec => {
                let (op, targets) = gate_operator(spec, &g.target)?;
                let e = embed(&op, &targets, labels);
                out.into_iter().map(|(b, m)| (b, &e * m)).collect()
            }
        };
    }
    Ok(out)
}

fn completeness_deviation(branches: &[KrausBranch]) -> f64 {
    let d = branches[0].operator.nrows();
    let mut sum = Matrix::zeros(d, d);
    for b in branches {
        sum += b.operator.adjoint() * &b.operator;
    }
    (sum - Matrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// The quantum instrument an instruction induces on the data qubits.
///
/// Deterministic instructions give one operator per measurement record of
/// the selected branch. Coherent instructions give
/// `K_j = Σ_k d*_{j,k} c_k U_k` for every readout row `j`; all branch
/// operators are embedded on the union of the qubits any branch touches.
/// Fails when `Σ_j K_j†K_j` deviates from the identity.
pub fn kraus_operators(instr: &Instruction, node: &NodeConfig) -> Result<Vec<KrausBranch>> {
    validate(instr, node)?;
    let resolved = resolve_branches(instr, &node.bindings)?.branches;
    let labels = operator_labels(instr.address.electron_label(), &resolved);
    let mut out = Vec::new();
    match instr.mode {
        Mode::Deterministic => {
            let (&k, gates) = resolved.iter().next().expect("one branch");
            for (bits, operator) in sequence_operators(gates, &labels)? {
                out.push(KrausBranch {
                    index: 0,
                    bits,
                    labels: labels.clone(),
                    operator,
                    lcu_coefficients: BTreeMap::from([(k, C64::new(1.0, 0.0))]),
                });
            }
        }
        Mode::Coherent => {
            let c = instr
                .preparation
                .as_ref()
                .and_then(|p| p.amplitudes(&instr.pattern))
                .expect("validated coherent instruction has amplitudes");
            let rows = instr
                .readout
                .as_ref()
                .expect("validated")
                .rows(node.register_size);
            let mut ops = BTreeMap::new();
            for (k, gates) in &resolved {
                ops.insert(*k, sequence_operators(gates, &labels)?);
            }
            let amp = |k: u32| c.get(&k).copied().unwrap_or_default();
            // A measuring branch is only valid when it carries all the weight.
            let measuring = ops
                .iter()
                .find(|(k, o)| o.len() > 1 && amp(**k).norm_sqr() > 0.0);
            for (j, row) in rows.iter().enumerate() {
                let alpha: BTreeMap<u32, C64> = instr
                    .pattern
                    .members()
                    .map(|k| (k, row[k as usize].conj() * amp(k)))
                    .collect();
                match measuring {
                    Some((a, records)) => {
                        for (bits, m) in records {
                            out.push(KrausBranch {
                                index: j,
                                bits: bits.clone(),
                                labels: labels.clone(),
                                operator: m * alpha[a],
                                lcu_coefficients: alpha.clone(),
                            });
                        }
                    }
                    None => {
                        let d = 1usize << labels.len();
                        let mut k_j = Matrix::zeros(d, d);
                        for (k, o) in &ops {
                            if o.len() == 1 {
                                k_j += &o[0].1 * alpha[k];
                            }
                        }
                        out.push(KrausBranch {
                            index: j,
                            bits: Vec::new(),
                            labels: labels.clone(),
                            operator: k_j,
                            lcu_coefficients: alpha,
                        });
                    }
                }
            }
        }
    }
    let dev = completeness_deviation(&out);
    if dev > STRUCTURAL_TOL {
        return Err(NodeError::Incomplete(dev));
    }
    Ok(out)
}

/// `p_j = Tr[K_j ρ K_j†]` and the renormalised post state for every branch.
pub fn apply_instrument<S: QuantumState>(
    state: &S,
    branches: &[KrausBranch],
) -> Result<Vec<InstrumentOutcome<S>>> {
    branches
        .iter()
        .map(|b| {
            let o = state.apply_kraus(&b.operator, &b.labels)?;
            Ok(InstrumentOutcome {
                index: b.index,
                bits: b.bits.clone(),
                probability: o.probability,
                state: o.state,
            })
        })
        .collect()
}
