use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a single qubit.
///
/// Node-owned qubits follow a fixed naming scheme so that their owner can be
/// recovered from the label alone: `E{m}.{e}` for electron `e` of node `m`,
/// `N{m}.{e}.{i}` for register qubit `i` of that electron and `A{m}.{e}.{i}`
/// for its ancillas. Free-form labels are allowed for standalone states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitRef {
    Electron {
        node: usize,
        electron: usize,
    },
    Register {
        node: usize,
        electron: usize,
        index: usize,
    },
    Ancilla {
        node: usize,
        electron: usize,
        index: usize,
    },
}

impl QubitRef {
    pub fn node(&self) -> usize {
        match *self {
            QubitRef::Electron { node, .. }
            | QubitRef::Register { node, .. }
            | QubitRef::Ancilla { node, .. } => node,
        }
    }

    pub fn electron(&self) -> usize {
        match *self {
            QubitRef::Electron { electron, .. }
            | QubitRef::Register { electron, .. }
            | QubitRef::Ancilla { electron, .. } => electron,
        }
    }
}

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn electron(node: usize, electron: usize) -> Self {
        Label(format!("E{node}.{electron}"))
    }

    pub fn register(node: usize, electron: usize, index: usize) -> Self {
        Label(format!("N{node}.{electron}.{index}"))
    }

    pub fn ancilla(node: usize, electron: usize, index: usize) -> Self {
        Label(format!("A{node}.{electron}.{index}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Parses the node naming scheme; `None` for free-form labels.
    pub fn qubit_ref(&self) -> Option<QubitRef> {
        let kind = self.0.chars().next()?;
        let rest = &self.0[1..];
        let parts: Vec<usize> = rest
            .split('.')
            .map(|p| {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                    None
                } else {
                    p.parse().ok()
                }
            })
            .collect::<Option<_>>()?;
        match (kind, parts.as_slice()) {
            ('E', &[node, electron]) => Some(QubitRef::Electron { node, electron }),
            ('N', &[node, electron, index]) => Some(QubitRef::Register {
                node,
                electron,
                index,
            }),
            ('A', &[node, electron, index]) => Some(QubitRef::Ancilla {
                node,
                electron,
                index,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

impl From<QubitRef> for Label {
    fn from(q: QubitRef) -> Self {
        match q {
            QubitRef::Electron { node, electron } => Label::electron(node, electron),
            QubitRef::Register {
                node,
                electron,
                index,
            } => Label::register(node, electron, index),
            QubitRef::Ancilla {
                node,
                electron,
                index,
            } => Label::ancilla(node, electron, index),
        }
    }
}
