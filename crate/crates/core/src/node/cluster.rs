use crate::isa::{Address, NodeConfig};
use crate::quantum::{Label, PureState, QuantumError, C64};

/// Electron, its register and its ancillas, laid out register first.
///
/// Between instructions the register is never entangled with the data
/// qubits: executors leave it in the configuration they selected or in the
/// readout row they projected onto.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    address: Address,
    electron: Label,
    register: Vec<Label>,
    ancillas: Vec<Label>,
    state: PureState,
}

impl ClusterState {
    /// Register in `|0…0⟩`; `data` must cover exactly the electron and the
    /// ancillas, in any order.
    pub fn new(
        address: Address,
        register_size: usize,
        ancillas: usize,
        data: &PureState,
    ) -> Result<Self, QuantumError> {
        let electron = address.electron_label();
        let ancillas: Vec<Label> = (0..ancillas).map(|i| address.ancilla_label(i)).collect();
        let register = address.register_labels(register_size);
        let mut order = vec![electron.clone()];
        order.extend(ancillas.iter().cloned());
        if data.num_qubits() != order.len() {
            return Err(QuantumError::DimensionMismatch {
                len: data.amplitudes().len(),
                qubits: order.len(),
            });
        }
        let data = data.reordered(&order)?;
        let state = PureState::zeros(register.clone())?.tensor(&data)?;
        Ok(ClusterState {
            address,
            electron,
            register,
            ancillas,
            state,
        })
    }

    /// Cluster with the given electron state and every ancilla in `|0⟩`.
    pub fn with_electron(
        address: Address,
        register_size: usize,
        ancillas: usize,
        electron: &PureState,
    ) -> Result<Self, QuantumError> {
        let mut data = electron.reordered(&[address.electron_label()])?;
        for i in 0..ancillas {
            data = data.tensor(&PureState::zeros(vec![address.ancilla_label(i)])?)?;
        }
        ClusterState::new(address, register_size, ancillas, &data)
    }

    /// Cluster shaped after `node` for electron `electron`.
    pub fn for_node(
        node: &NodeConfig,
        electron: usize,
        data: &PureState,
    ) -> Result<Self, QuantumError> {
        ClusterState::new(
            Address::new(node.index, electron),
            node.register_size,
            node.ancillas,
            data,
        )
    }

    pub(crate) fn with_state(&self, state: PureState) -> Self {
        ClusterState {
            state,
            ..self.clone()
        }
    }

    pub fn address(&self) -> Address {
        self.address
    }

    pub fn electron(&self) -> &Label {
        &self.electron
    }

    pub fn register(&self) -> &[Label] {
        &self.register
    }

    pub fn ancillas(&self) -> &[Label] {
        &self.ancillas
    }

    pub fn register_size(&self) -> usize {
        self.register.len()
    }

    /// Full cluster state, register first.
    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// Electron and ancillas, electron first.
    pub fn data_labels(&self) -> Vec<Label> {
        let mut out = vec![self.electron.clone()];
        out.extend(self.ancillas.iter().cloned());
        out
    }

    /// State of the electron and ancillas with the register factored out.
    pub fn data_state(&self) -> PureState {
        let n = self.state.num_qubits();
        let r = self.register.len();
        let rest = 1usize << (n - r);
        let amps = self.state.amplitudes();
        // The register is a product factor, so any non-zero register slice is
        // proportional to the data state; take the heaviest one.
        let k = (0..1usize << r)
            .max_by(|&a, &b| {
                let wa: f64 = amps[a * rest..(a + 1) * rest]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum();
                let wb: f64 = amps[b * rest..(b + 1) * rest]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum();
                wa.total_cmp(&wb)
            })
            .unwrap_or(0);
        let slice: Vec<C64> = amps[k * rest..(k + 1) * rest].to_vec();
        PureState::from_unnormalized(self.data_labels(), slice).expect("register slice is non-zero")
    }

    /// Register amplitudes with the data factored out.
    pub fn register_state(&self) -> PureState {
        let r = self.register.len();
        let rest = 1usize << (self.state.num_qubits() - r);
        let data = self.data_state();
        let amps = self.state.amplitudes();
        let reg: Vec<C64> = (0..1usize << r)
            .map(|k| {
                data.amplitudes()
                    .iter()
                    .zip(&amps[k * rest..(k + 1) * rest])
                    .map(|(d, a)| d.conj() * a)
                    .sum()
            })
            .collect();
        PureState::from_unnormalized(self.register.clone(), reg).expect("register is non-zero")
    }
}
