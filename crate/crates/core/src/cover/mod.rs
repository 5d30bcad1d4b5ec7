//! Group covers of a commutation graph and the algorithms that build them.

mod colgen;
mod greedy;
mod setcover;
mod variance_aware;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommutationGraph, Mode};

pub use colgen::{column_generation_cover, max_weight_clique, ColumnGenerationOptions, Pricing};
pub use greedy::{ldf_cover, rlf_cover};
pub use setcover::{exact_set_cover, greedy_set_cover, ExactCover};
pub use variance_aware::{ldvf_cover, lvf_cover, placement_trace, variance_proxy, Placement};

/// Algorithm tag and parameters that produced a cover.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl Provenance {
    pub fn new(algorithm: &str) -> Self {
        Provenance {
            algorithm: algorithm.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// A list of vertex groups, each carrying a multiplicity (shot weight for
/// imported schedules, 1 otherwise). Groups are kept as sorted index lists.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCover {
    mode: Mode,
    num_vertices: usize,
    groups: Vec<Vec<usize>>,
    multiplicity: Vec<u64>,
    sequence: Option<Vec<usize>>,
    pub provenance: Provenance,
}

impl GroupCover {
    pub fn new(mode: Mode, num_vertices: usize, groups: Vec<Vec<usize>>, provenance: Provenance) -> Result<Self> {
        let multiplicity = vec![1; groups.len()];
        GroupCover::with_multiplicity(mode, num_vertices, groups, multiplicity, provenance)
    }

    pub fn with_multiplicity(
        mode: Mode,
        num_vertices: usize,
        groups: Vec<Vec<usize>>,
        multiplicity: Vec<u64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if groups.len() != multiplicity.len() {
            return Err(Error::InvalidCover(format!(
                "{} groups but {} multiplicities",
                groups.len(),
                multiplicity.len()
            )));
        }
        let mut sorted = Vec::with_capacity(groups.len());
        for mut g in groups {
            g.sort_unstable();
            g.dedup();
            if let Some(&v) = g.iter().find(|&&v| v >= num_vertices) {
                return Err(Error::InvalidCover(format!(
                    "vertex {v} out of range for {num_vertices} vertices"
                )));
            }
            sorted.push(g);
        }
        Ok(GroupCover {
            mode,
            num_vertices,
            groups: sorted,
            multiplicity,
            sequence: None,
            provenance,
        })
    }

    /// Attaches an ordered schedule: `sequence[k]` is the group measured by
    /// the k-th setting.
    pub fn with_sequence(mut self, sequence: Vec<usize>) -> Result<Self> {
        if let Some(&g) = sequence.iter().find(|&&g| g >= self.groups.len()) {
            return Err(Error::InvalidCover(format!("sequence refers to missing group {g}")));
        }
        self.sequence = Some(sequence);
        Ok(self)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicity
    }

    pub fn sequence(&self) -> Option<&[usize]> {
        self.sequence.as_deref()
    }

    /// `membership[v]` lists the groups containing `v`, ascending.
    pub fn membership(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.num_vertices];
        for (gi, g) in self.groups.iter().enumerate() {
            for &v in g {
                m[v].push(gi);
            }
        }
        m
    }

    pub fn is_partition(&self) -> bool {
        self.membership().iter().all(|m| m.len() == 1)
    }

    pub fn uncovered(&self) -> Vec<usize> {
        self.membership()
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_empty())
            .map(|(v, _)| v)
            .collect()
    }

    pub fn empty_groups(&self) -> Vec<usize> {
        (0..self.len()).filter(|&g| self.groups[g].is_empty()).collect()
    }

    /// Every group is a clique of `graph`, whose vertex list must match.
    pub fn validate_cliques(&self, graph: &CommutationGraph) -> Result<()> {
        if graph.num_vertices() != self.num_vertices {
            return Err(Error::InvalidCover(format!(
                "cover has {} vertices, graph has {}",
                self.num_vertices,
                graph.num_vertices()
            )));
        }
        for (gi, g) in self.groups.iter().enumerate() {
            for (i, &u) in g.iter().enumerate() {
                for &v in &g[..i] {
                    if !graph.adjacent(u, v) {
                        return Err(Error::InvalidCover(format!(
                            "group {gi}: {} and {} do not commute ({})",
                            graph.vertex(u),
                            graph.vertex(v),
                            graph.mode()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Clique property plus full coverage.
    pub fn validate(&self, graph: &CommutationGraph) -> Result<()> {
        self.validate_cliques(graph)?;
        let missing = self.uncovered();
        if let Some(&v) = missing.first() {
            return Err(Error::InvalidCover(format!(
                "{} vertices uncovered, first is {}",
                missing.len(),
                graph.vertex(v)
            )));
        }
        Ok(())
    }

    /// Merges identical groups, summing multiplicities. The first occurrence
    /// keeps its position; the schedule sequence is remapped.
    pub fn merge_duplicates(self) -> Self {
        let mut index: std::collections::HashMap<Vec<usize>, usize> = Default::default();
        let mut groups = Vec::new();
        let mut mult = Vec::new();
        let mut remap = Vec::with_capacity(self.groups.len());
        for (g, m) in self.groups.into_iter().zip(self.multiplicity) {
            match index.get(&g) {
                Some(&k) => {
                    mult[k] += m;
                    remap.push(k);
                }
                None => {
                    index.insert(g.clone(), groups.len());
                    remap.push(groups.len());
                    groups.push(g);
                    mult.push(m);
                }
            }
        }
        GroupCover {
            mode: self.mode,
            num_vertices: self.num_vertices,
            groups,
            multiplicity: mult,
            sequence: self.sequence.map(|s| s.into_iter().map(|g| remap[g]).collect()),
            provenance: self.provenance,
        }
    }
}
