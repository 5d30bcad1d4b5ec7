//! JSON form of covers. Groups are stored as Pauli words so a file stays
//! meaningful independently of term order.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cover::{GroupCover, Provenance};
use crate::error::{Error, Result};
use crate::graph::Mode;
use crate::pauli::{PauliString, PauliSum};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverFile {
    pub format_version: u32,
    pub mode: Mode,
    pub algorithm: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub groups: Vec<Vec<String>>,
    /// Defaults to one per group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<Vec<u64>>,
    /// Group index of each setting, in schedule order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<usize>>,
}

impl CoverFile {
    pub fn from_cover(cover: &GroupCover, op: &PauliSum) -> Result<Self> {
        if cover.num_vertices() != op.len() {
            return Err(Error::InvalidCover(format!(
                "cover has {} vertices, Pauli sum has {} terms",
                cover.num_vertices(),
                op.len()
            )));
        }
        Ok(CoverFile {
            format_version: FORMAT_VERSION,
            mode: cover.mode(),
            algorithm: cover.provenance.algorithm.clone(),
            params: cover.provenance.params.clone(),
            groups: cover
                .groups()
                .iter()
                .map(|g| g.iter().map(|&v| op.string(v).to_string()).collect())
                .collect(),
            multiplicity: Some(cover.multiplicities().to_vec()),
            sequence: cover.sequence().map(<[usize]>::to_vec),
        })
    }

    /// Resolves words against the terms of `op`. Every word must be a term.
    pub fn to_cover(&self, op: &PauliSum) -> Result<GroupCover> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Precondition(format!(
                "unsupported cover format_version {}",
                self.format_version
            )));
        }
        let index: HashMap<PauliString, usize> = op.strings().into_iter().enumerate().map(|(i, p)| (p, i)).collect();
        let groups = self
            .groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|w| {
                        let p: PauliString = w.parse()?;
                        if p.num_qubits() != op.num_qubits() {
                            return Err(Error::QubitMismatch {
                                left: p.num_qubits(),
                                right: op.num_qubits(),
                            });
                        }
                        index
                            .get(&p)
                            .copied()
                            .ok_or_else(|| Error::InvalidCover(format!("word {w} is not a term of the Hamiltonian")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let multiplicity = self.multiplicity.clone().unwrap_or_else(|| vec![1; groups.len()]);
        let provenance = Provenance {
            algorithm: self.algorithm.clone(),
            params: self.params.clone(),
        };
        let cover = GroupCover::with_multiplicity(self.mode, op.len(), groups, multiplicity, provenance)?;
        match &self.sequence {
            Some(seq) => cover.with_sequence(seq.clone()),
            None => Ok(cover),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn read_pauli_sum(path: &Path) -> Result<PauliSum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    crate::pauli::parse_pauli_sum(&text)
}
