//! Network description files.

use anyhow::{bail, Context, Result};
use nvisa::controller::{LinkSpec, LinkState};
use nvisa::isa::NodeConfig;
use nvisa::quantum::{BellState, Label};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(rename = "node", default)]
    pub nodes: Vec<NodeEntry>,
    #[serde(rename = "link", default)]
    pub links: Vec<LinkEntry>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub index: usize,
    pub electrons: usize,
    pub register: usize,
    #[serde(default)]
    pub ancillas: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub a: String,
    pub b: String,
    /// `phi+`, `phi-`, `psi+` or `psi-`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub werner: Option<f64>,
}

pub fn parse_bell(s: &str) -> Result<BellState> {
    Ok(match s {
        "phi+" => BellState::PhiPlus,
        "phi-" => BellState::PhiMinus,
        "psi+" => BellState::PsiPlus,
        "psi-" => BellState::PsiMinus,
        _ => bail!("unknown Bell state `{s}` (expected phi+, phi-, psi+ or psi-)"),
    })
}

pub fn bell_name(b: BellState) -> &'static str {
    match b {
        BellState::PhiPlus => "phi+",
        BellState::PhiMinus => "phi-",
        BellState::PsiPlus => "psi+",
        BellState::PsiMinus => "psi-",
    }
}

impl LinkEntry {
    pub fn spec(&self) -> Result<LinkSpec> {
        let state = match (&self.state, self.werner) {
            (Some(s), None) => LinkState::Bell(parse_bell(s)?),
            (None, Some(f)) => LinkState::Werner(f),
            (None, None) => LinkState::Bell(BellState::PhiPlus),
            (Some(_), Some(_)) => bail!(
                "link {}-{}: give either `state` or `werner`",
                self.a,
                self.b
            ),
        };
        Ok(LinkSpec::new(
            Label::new(&self.a),
            Label::new(&self.b),
            state,
        ))
    }

    /// Bell state the link fidelity is reported against.
    pub fn reference(&self) -> Result<BellState> {
        match &self.state {
            Some(s) => parse_bell(s),
            None => Ok(BellState::PhiPlus),
        }
    }
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn node_configs(&self) -> Vec<NodeConfig> {
        self.nodes
            .iter()
            .map(|n| NodeConfig::new(n.index, n.electrons, n.register, n.ancillas))
            .collect()
    }

    pub fn link_specs(&self) -> Result<Vec<LinkSpec>> {
        self.links.iter().map(LinkEntry::spec).collect()
    }
}
