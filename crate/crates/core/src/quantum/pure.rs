use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{kernel, Label, Matrix, QuantumError, Result, C64, MAX_PURE_QUBITS, STRUCTURAL_TOL};

/// Normalised state vector over an ordered list of qubit labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    labels: Vec<Label>,
    amplitudes: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];
}

/// Two-qubit Bell state on `(a, b)`.
pub fn bell_state(kind: BellState, a: impl Into<Label>, b: impl Into<Label>) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let p = C64::new(s, 0.0);
    let amps = match kind {
        BellState::PhiPlus => vec![p, z, z, p],
        BellState::PhiMinus => vec![p, z, z, -p],
        BellState::PsiPlus => vec![z, p, p, z],
        BellState::PsiMinus => vec![z, p, -p, z],
    };
    PureState::new_unchecked(vec![a.into(), b.into()], amps)
}

pub(crate) fn check_labels(labels: &[Label]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(QuantumError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl PureState {
    pub fn new(labels: Vec<Label>, amplitudes: Vec<C64>) -> Result<Self> {
        check_labels(&labels)?;
        if labels.len() > MAX_PURE_QUBITS {
            return Err(QuantumError::TooManyQubits {
                qubits: labels.len(),
                limit: MAX_PURE_QUBITS,
            });
        }
        if amplitudes.len() != 1 << labels.len() {
            return Err(QuantumError::DimensionMismatch {
                len: amplitudes.len(),
                qubits: labels.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(QuantumError::NonFinite);
        }
        let n2 = kernel::norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QuantumError::NotNormalized(n2));
        }
        Ok(PureState { labels, amplitudes })
    }

    /// Normalises the given amplitudes before construction.
    pub fn from_unnormalized(labels: Vec<Label>, amplitudes: Vec<C64>) -> Result<Self> {
        let n = kernel::norm_sqr(&amplitudes).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(QuantumError::NotNormalized(n * n));
        }
        PureState::new(labels, amplitudes.into_iter().map(|a| a / n).collect())
    }

    pub(crate) fn new_unchecked(labels: Vec<Label>, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << labels.len());
        PureState { labels, amplitudes }
    }

    /// Computational basis state; `bits[i]` is the value of `labels[i]`.
    pub fn basis(labels: Vec<Label>, bits: &[u8]) -> Result<Self> {
        if bits.len() != labels.len() {
            return Err(QuantumError::DimensionMismatch {
                len: bits.len(),
                qubits: labels.len(),
            });
        }
        let idx = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let mut amps = vec![C64::new(0.0, 0.0); 1 << labels.len()];
        amps[idx] = C64::new(1.0, 0.0);
        PureState::new(labels, amps)
    }

    /// Single qubit `α|0⟩ + β|1⟩`.
    pub fn qubit(label: impl Into<Label>, alpha: C64, beta: C64) -> Result<Self> {
        PureState::new(vec![label.into()], vec![alpha, beta])
    }

    /// `|0…0⟩` over the given labels.
    pub fn zeros(labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        PureState::basis(labels, &vec![0; n])
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        kernel::norm_sqr(&self.amplitudes)
    }

    pub fn position(&self, label: &Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| QuantumError::UnknownLabel(label.clone()))
    }

    pub fn positions(&self, labels: &[Label]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.position(l)).collect()
    }

    /// `⟨self|other⟩`; both states must carry the same labels, in any order.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        let other = other.reordered(&self.labels)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Same state with qubits listed in `order` (a permutation of the labels).
    pub fn reordered(&self, order: &[Label]) -> Result<PureState> {
        if order.len() != self.labels.len() {
            return Err(QuantumError::DimensionMismatch {
                len: order.len(),
                qubits: self.labels.len(),
            });
        }
        check_labels(order)?;
        let perm = self.positions(order)?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        Ok(PureState::new_unchecked(
            order.to_vec(),
            kernel::permute(&self.amplitudes, self.num_qubits(), &perm),
        ))
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(QuantumError::LabelCollision(l.clone()));
            }
        }
        let n = self.labels.len() + other.labels.len();
        if n > MAX_PURE_QUBITS {
            return Err(QuantumError::TooManyQubits {
                qubits: n,
                limit: MAX_PURE_QUBITS,
            });
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(PureState::new_unchecked(labels, amps))
    }

    /// Global phase fixed so that the largest-magnitude amplitude is real and
    /// positive. Ties within 1e-9 go to the lowest index.
    pub fn phase_normalized(&self) -> PureState {
        let max = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let pivot = self
            .amplitudes
            .iter()
            .find(|a| a.norm() >= max - 1e-9)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        PureState::new_unchecked(
            self.labels.clone(),
            self.amplitudes.iter().map(|a| a * phase).collect(),
        )
    }

    /// Largest elementwise deviation from `other` after aligning label order.
    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        let other = other.reordered(&self.labels)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn to_density(&self) -> super::DensityState {
        let d = self.amplitudes.len();
        let m = Matrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        super::DensityState::new_unchecked(self.labels.clone(), m)
    }

    /// Applies `op` to `targets` without renormalising. Returns the raw
    /// amplitudes (norm² is the branch probability).
    pub(crate) fn apply_raw(&self, op: &Matrix, targets: &[Label]) -> Result<Vec<C64>> {
        let pos = self.positions(targets)?;
        check_labels(targets)?;
        let dim = 1 << targets.len();
        if op.nrows() != dim || op.ncols() != dim {
            return Err(QuantumError::OperatorDimension {
                expected: dim,
                found: op.nrows(),
            });
        }
        let mut amps = self.amplitudes.clone();
        kernel::apply_matrix(&mut amps, self.num_qubits(), &pos, op);
        Ok(amps)
    }
}
