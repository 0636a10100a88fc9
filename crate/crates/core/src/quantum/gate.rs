use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Label, Matrix, QuantumError, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => f.write_str("Z"),
            Basis::X => f.write_str("X"),
        }
    }
}

/// A primitive operation. Angles are in radians.
///
/// `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`,
/// `Rz(θ) = diag(e^{−iθ/2}, e^{iθ/2})` and `Phase(θ) = diag(1, e^{iθ})`.
/// The CNOT target is supplied where the gate is applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateSpec {
    I,
    X,
    Y,
    Z,
    H,
    Ry(f64),
    Rz(f64),
    Phase(f64),
    Cnot { control: Label },
    Measure(Basis),
}

impl GateSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GateSpec::I => "I",
            GateSpec::X => "X",
            GateSpec::Y => "Y",
            GateSpec::Z => "Z",
            GateSpec::H => "H",
            GateSpec::Ry(_) => "RY",
            GateSpec::Rz(_) => "RZ",
            GateSpec::Phase(_) => "PHASE",
            GateSpec::Cnot { .. } => "CNOT",
            GateSpec::Measure(_) => "MEASURE",
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateSpec::Measure(_))
    }

    pub fn inverse(&self) -> Result<GateSpec, QuantumError> {
        Ok(match self {
            GateSpec::Ry(t) => GateSpec::Ry(-t),
            GateSpec::Rz(t) => GateSpec::Rz(-t),
            GateSpec::Phase(t) => GateSpec::Phase(-t),
            GateSpec::Measure(_) => return Err(QuantumError::MeasureNotUnitary),
            other => other.clone(),
        })
    }

    /// Matrix of a single-qubit gate; `None` for CNOT and MEASURE.
    pub fn single_qubit_matrix(&self) -> Option<Matrix> {
        let c = |re: f64, im: f64| C64::new(re, im);
        let m = match self {
            GateSpec::I => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
            GateSpec::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
            GateSpec::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
            GateSpec::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
            GateSpec::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]
            }
            GateSpec::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)]
            }
            GateSpec::Rz(t) => [
                C64::from_polar(1.0, -t / 2.0),
                c(0., 0.),
                c(0., 0.),
                C64::from_polar(1.0, t / 2.0),
            ],
            GateSpec::Phase(t) => [c(1., 0.), c(0., 0.), c(0., 0.), C64::from_polar(1.0, *t)],
            GateSpec::Cnot { .. } | GateSpec::Measure(_) => return None,
        };
        Some(Matrix::from_row_slice(2, 2, &m))
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::Ry(t) | GateSpec::Rz(t) | GateSpec::Phase(t) => {
                write!(f, "{}({:.16e})", self.name(), t)
            }
            GateSpec::Cnot { control } => write!(f, "CNOT({control})"),
            GateSpec::Measure(b) => write!(f, "MEASURE({b})"),
            _ => f.write_str(self.name()),
        }
    }
}

/// A gate bound to the qubit it acts on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub spec: GateSpec,
    pub target: Label,
}

impl Gate {
    pub fn on(spec: GateSpec, target: impl Into<Label>) -> Self {
        Gate {
            spec,
            target: target.into(),
        }
    }

    pub fn cnot(control: impl Into<Label>, target: impl Into<Label>) -> Self {
        Gate {
            spec: GateSpec::Cnot {
                control: control.into(),
            },
            target: target.into(),
        }
    }

    /// Every label the gate touches, control first.
    pub fn labels(&self) -> Vec<&Label> {
        match &self.spec {
            GateSpec::Cnot { control } => vec![control, &self.target],
            _ => vec![&self.target],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.spec, self.target)
    }
}

/// 4×4 CNOT in (control, target) order.
pub(crate) fn cnot_matrix() -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(1, 1)] = C64::new(1.0, 0.0);
    m[(2, 3)] = C64::new(1.0, 0.0);
    m[(3, 2)] = C64::new(1.0, 0.0);
    m
}

/// Projector onto outcome `bit` of a single-qubit measurement.
pub(crate) fn projector(basis: Basis, bit: u8) -> Matrix {
    let v: [C64; 2] = match (basis, bit) {
        (Basis::Z, 0) => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        (Basis::Z, _) => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        (Basis::X, 0) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [C64::new(s, 0.0), C64::new(s, 0.0)]
        }
        (Basis::X, _) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [C64::new(s, 0.0), C64::new(-s, 0.0)]
        }
    };
    Matrix::from_fn(2, 2, |i, j| v[i] * v[j].conj())
}
