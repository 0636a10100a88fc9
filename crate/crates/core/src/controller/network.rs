use crate::isa::NodeConfig;
use crate::quantum::{
    bell_state, make_werner, AnyState, BellState, DensityState, Label, PureState, QuantumState,
    MAX_DENSITY_QUBITS, MAX_PURE_QUBITS,
};

use super::{ControllerError, Result};

/// Initial state of a remote electron–electron link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinkState {
    Bell(BellState),
    /// Werner state with the given fidelity to `|Φ+⟩`.
    Werner(f64),
}

/// A two-qubit state injected between two data qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSpec {
    pub a: Label,
    pub b: Label,
    pub state: LinkState,
}

impl LinkSpec {
    pub fn new(a: impl Into<Label>, b: impl Into<Label>, state: LinkState) -> Self {
        LinkSpec {
            a: a.into(),
            b: b.into(),
            state,
        }
    }

    pub fn bell(a: impl Into<Label>, b: impl Into<Label>) -> Self {
        LinkSpec::new(a, b, LinkState::Bell(BellState::PhiPlus))
    }

    pub fn werner(a: impl Into<Label>, b: impl Into<Label>, fidelity: f64) -> Self {
        LinkSpec::new(a, b, LinkState::Werner(fidelity))
    }
}

/// Joint state of every data qubit in the network plus the round counter.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    nodes: Vec<NodeConfig>,
    state: AnyState,
    round: u64,
}

impl NetworkState {
    /// All data qubits in `|0⟩`.
    pub fn new(nodes: Vec<NodeConfig>) -> Result<Self> {
        NetworkState::with_links(nodes, &[])
    }

    /// Data qubits in `|0⟩` except for the injected links. The state is a
    /// density matrix as soon as one link is a Werner state.
    pub fn with_links(nodes: Vec<NodeConfig>, links: &[LinkSpec]) -> Result<Self> {
        for (position, n) in nodes.iter().enumerate() {
            if n.index != position {
                return Err(ControllerError::NodeIndex {
                    position,
                    index: n.index,
                });
            }
        }
        let order: Vec<Label> = nodes.iter().flat_map(|n| n.data_labels()).collect();
        let mixed = links
            .iter()
            .any(|l| matches!(l.state, LinkState::Werner(_)));
        let limit = if mixed {
            MAX_DENSITY_QUBITS
        } else {
            MAX_PURE_QUBITS
        };
        if order.len() > limit {
            return Err(crate::quantum::QuantumError::TooManyQubits {
                qubits: order.len(),
                limit,
            }
            .into());
        }

        let mut used: Vec<Label> = Vec::new();
        let mut factors: Vec<AnyState> = Vec::new();
        for l in links {
            for q in [&l.a, &l.b] {
                if !order.contains(q) {
                    return Err(ControllerError::BadLink(format!("{q} is not a data qubit")));
                }
                if used.contains(q) {
                    return Err(ControllerError::BadLink(format!("{q} is in two links")));
                }
                used.push(q.clone());
            }
            if l.a == l.b {
                return Err(ControllerError::BadLink(format!(
                    "{} linked to itself",
                    l.a
                )));
            }
            factors.push(match l.state {
                LinkState::Bell(kind) => AnyState::Pure(bell_state(kind, l.a.clone(), l.b.clone())),
                LinkState::Werner(f) => AnyState::Mixed(make_werner(f, l.a.clone(), l.b.clone())?),
            });
        }
        let rest: Vec<Label> = order
            .iter()
            .filter(|q| !used.contains(q))
            .cloned()
            .collect();
        let mut state = AnyState::Pure(PureState::zeros(rest)?);
        for f in &factors {
            state = state.tensor(f)?;
        }
        let state = state.reordered(&order)?;
        Ok(NetworkState {
            nodes,
            state,
            round: 0,
        })
    }

    pub(crate) fn advanced(&self, state: AnyState) -> NetworkState {
        NetworkState {
            nodes: self.nodes.clone(),
            state,
            round: self.round + 1,
        }
    }

    pub fn nodes(&self) -> &[NodeConfig] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> Result<&NodeConfig> {
        self.nodes
            .get(index)
            .ok_or(ControllerError::UnknownNode(index))
    }

    pub fn state(&self) -> &AnyState {
        &self.state
    }

    /// Last completed round (0 before the first).
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn labels(&self) -> &[Label] {
        self.state.labels()
    }

    /// Reduced density matrix on `labels`, in that order.
    pub fn reduced(&self, labels: &[Label]) -> Result<DensityState> {
        Ok(self.state.reduced(labels)?)
    }

    /// Fidelity of the pair `(a, b)` with a Bell state.
    pub fn pair_fidelity(&self, a: &Label, b: &Label, kind: BellState) -> Result<f64> {
        let rho = self.reduced(&[a.clone(), b.clone()])?;
        Ok(rho.fidelity_with(&bell_state(kind, a.clone(), b.clone()))?)
    }

    /// Largest elementwise difference to another network state.
    pub fn max_abs_diff(&self, other: &NetworkState) -> Result<f64> {
        Ok(match (&self.state, &other.state) {
            (AnyState::Pure(a), AnyState::Pure(b)) => a.max_abs_diff(b)?,
            (a, b) => a.to_density().max_abs_diff(&b.to_density())?,
        })
    }
}
