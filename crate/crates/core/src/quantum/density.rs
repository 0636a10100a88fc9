use nalgebra::SymmetricEigen;

use super::pure::check_labels;
use super::{
    bell_state, kernel, BellState, Label, Matrix, PureState, QuantumError, Result, C64,
    EIGENVALUE_TOL, MAX_DENSITY_QUBITS, STRUCTURAL_TOL,
};

/// Density matrix over an ordered list of qubit labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    labels: Vec<Label>,
    matrix: Matrix,
}

/// `F|Φ+⟩⟨Φ+| + (1−F)/3 · (|Φ−⟩⟨Φ−| + |Ψ+⟩⟨Ψ+| + |Ψ−⟩⟨Ψ−|)` on `(a, b)`.
pub fn make_werner(
    fidelity: f64,
    a: impl Into<Label>,
    b: impl Into<Label>,
) -> Result<DensityState> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(QuantumError::FidelityOutOfRange(fidelity));
    }
    let (a, b) = (a.into(), b.into());
    let other = (1.0 - fidelity) / 3.0;
    let mut m = Matrix::zeros(4, 4);
    for kind in BellState::ALL {
        let w = if kind == BellState::PhiPlus {
            fidelity
        } else {
            other
        };
        let v = bell_state(kind, a.clone(), b.clone());
        let amps = v.amplitudes();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += amps[i] * amps[j].conj() * w;
            }
        }
    }
    Ok(DensityState::new_unchecked(vec![a, b], m))
}

impl DensityState {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(labels: Vec<Label>, matrix: Matrix) -> Result<Self> {
        check_labels(&labels)?;
        if labels.len() > MAX_DENSITY_QUBITS {
            return Err(QuantumError::TooManyQubits {
                qubits: labels.len(),
                limit: MAX_DENSITY_QUBITS,
            });
        }
        let d = 1 << labels.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QuantumError::DimensionMismatch {
                len: matrix.nrows(),
                qubits: labels.len(),
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(QuantumError::NonFinite);
        }
        let herm = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > STRUCTURAL_TOL {
            return Err(QuantumError::NotHermitian(herm));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QuantumError::BadTrace(tr));
        }
        let state = DensityState { labels, matrix };
        let min = state.min_eigenvalue();
        if min < -EIGENVALUE_TOL {
            return Err(QuantumError::NegativeEigenvalue(min));
        }
        Ok(state)
    }

    pub(crate) fn new_unchecked(labels: Vec<Label>, matrix: Matrix) -> Self {
        DensityState { labels, matrix }
    }

    pub fn maximally_mixed(labels: Vec<Label>) -> Result<Self> {
        let d = 1usize << labels.len();
        let m = Matrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        DensityState::new(labels, m)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
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

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn tensor(&self, other: &DensityState) -> Result<DensityState> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(QuantumError::LabelCollision(l.clone()));
            }
        }
        let n = self.labels.len() + other.labels.len();
        if n > MAX_DENSITY_QUBITS {
            return Err(QuantumError::TooManyQubits {
                qubits: n,
                limit: MAX_DENSITY_QUBITS,
            });
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(DensityState::new_unchecked(
            labels,
            self.matrix.kronecker(&other.matrix),
        ))
    }

    /// Traces out every qubit not in `keep`. The result lists `keep` in the
    /// order given.
    pub fn partial_trace(&self, keep: &[Label]) -> Result<DensityState> {
        check_labels(keep)?;
        let keep_pos = self.positions(keep)?;
        let n = self.num_qubits();
        let k = keep.len();
        let dk = 1usize << k;
        let mut out = Matrix::zeros(dk, dk);
        let d = 1usize << n;
        let rest_dim = 1usize << (n - k);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..rest_dim {
                    let row = kernel::join_index(i, r, n, &keep_pos);
                    let col = kernel::join_index(j, r, n, &keep_pos);
                    debug_assert!(row < d && col < d);
                    acc += self.matrix[(row, col)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityState::new_unchecked(keep.to_vec(), out))
    }

    pub fn reordered(&self, order: &[Label]) -> Result<DensityState> {
        if order.len() != self.labels.len() {
            return Err(QuantumError::DimensionMismatch {
                len: order.len(),
                qubits: self.labels.len(),
            });
        }
        self.partial_trace(order)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, reference: &PureState) -> Result<f64> {
        if reference.num_qubits() != self.num_qubits() {
            return Err(QuantumError::DimensionMismatch {
                len: reference.amplitudes().len(),
                qubits: self.num_qubits(),
            });
        }
        let r = reference.reordered(&self.labels)?;
        let a = r.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..a.len() {
            for j in 0..a.len() {
                acc += a[i].conj() * self.matrix[(i, j)] * a[j];
            }
        }
        Ok(acc.re)
    }

    pub fn max_abs_diff(&self, other: &DensityState) -> Result<f64> {
        let o = other.reordered(&self.labels)?;
        Ok((&self.matrix - &o.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn scaled(&self, s: f64) -> DensityState {
        DensityState::new_unchecked(self.labels.clone(), &self.matrix * C64::new(s, 0.0))
    }

    /// `K ρ K†` on `targets`, not renormalised.
    pub(crate) fn apply_raw(&self, op: &Matrix, targets: &[Label]) -> Result<DensityState> {
        check_labels(targets)?;
        let pos = self.positions(targets)?;
        let dim = 1 << targets.len();
        if op.nrows() != dim || op.ncols() != dim {
            return Err(QuantumError::OperatorDimension {
                expected: dim,
                found: op.nrows(),
            });
        }
        let n = self.num_qubits();
        let d = 1usize << n;
        // vec(ρ) as a 2n-qubit vector: row qubits first, column qubits after.
        let mut v: Vec<C64> = (0..d * d).map(|i| self.matrix[(i / d, i % d)]).collect();
        kernel::apply_matrix(&mut v, 2 * n, &pos, op);
        let col_pos: Vec<usize> = pos.iter().map(|p| p + n).collect();
        let conj = op.map(|z| z.conj());
        kernel::apply_matrix(&mut v, 2 * n, &col_pos, &conj);
        Ok(DensityState::new_unchecked(
            self.labels.clone(),
            Matrix::from_fn(d, d, |i, j| v[i * d + j]),
        ))
    }
}
