//! Commutation graphs over the terms of a Pauli sum.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pauli::{PauliString, PauliSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Qwc,
    Fc,
}

impl Mode {
    pub fn commutes(self, p: &PauliString, q: &PauliString) -> bool {
        match self {
            Mode::Qwc => p.qwc_unchecked(q),
            Mode::Fc => p.fc_unchecked(q),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Qwc => "qwc",
            Mode::Fc => "fc",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "qwc" => Ok(Mode::Qwc),
            "fc" => Ok(Mode::Fc),
            other => Err(format!("unknown commutation mode {other:?}")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct CommutationGraph {
    mode: Mode,
    vertices: Vec<PauliString>,
    rows: Vec<FixedBitSet>,
    degree: Vec<usize>,
}

impl CommutationGraph {
    /// Graph on an explicit vertex list. Rows are built in parallel, one per
    /// vertex, so the result does not depend on scheduling.
    pub fn from_strings(vertices: Vec<PauliString>, mode: Mode) -> Self {
        let n = vertices.len();
        let rows: Vec<FixedBitSet> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                for j in 0..n {
                    if i != j && mode.commutes(&vertices[i], &vertices[j]) {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        let degree = rows.iter().map(|r| r.count_ones(..)).collect();
        CommutationGraph {
            mode,
            vertices,
            rows,
            degree,
        }
    }

    /// Graph on the non-identity terms of `op`, in term order.
    pub fn build(op: &PauliSum, mode: Mode) -> Self {
        CommutationGraph::from_strings(op.strings(), mode)
    }

    /// Same as [`build`](Self::build) with the identity prepended as vertex 0.
    /// Only meant for reproducing vertex and edge counts that include it.
    pub fn build_with_identity(op: &PauliSum, mode: Mode) -> Self {
        let mut vertices = vec![PauliString::identity(op.num_qubits())];
        vertices.extend(op.strings());
        CommutationGraph::from_strings(vertices, mode)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.degree.iter().sum::<usize>() / 2
    }

    pub fn vertices(&self) -> &[PauliString] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &PauliString {
        &self.vertices[v]
    }

    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.rows[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    /// Degree in the complement graph.
    pub fn complement_degree(&self, v: usize) -> usize {
        self.num_vertices() - 1 - self.degree[v]
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[..i].iter().all(|&v| self.adjacent(u, v)))
    }

    /// Vertices adjacent to every member of `set` (and not in it).
    pub fn common_neighbors(&self, set: &[usize]) -> FixedBitSet {
        let mut acc = FixedBitSet::with_capacity(self.num_vertices());
        acc.insert_range(..);
        for &v in set {
            acc.intersect_with(&self.rows[v]);
        }
        acc
    }

    /// Vertices in ascending degree, ties in input order.
    pub fn degree_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.num_vertices()).collect();
        order.sort_by_key(|&v| self.degree[v]);
        order
    }

    pub fn stats(&self, max_cliques: Option<&CliqueSet>) -> GraphStats {
        GraphStats {
            mode: self.mode,
            num_vertices: self.num_vertices(),
            num_edges: self.num_edges(),
            max_cliques_or_cap: max_cliques.map(|c| MaxCliqueCount {
                count: c.cliques.len(),
                truncated: c.truncated,
            }),
        }
    }

    /// Bron–Kerbosch with pivoting. Emits at most `cap` cliques; `truncated`
    /// is set when a further maximal clique exists.
    pub fn maximal_cliques(&self, cap: usize) -> CliqueSet {
        assert!(cap >= 1, "clique cap must be positive");
        let n = self.num_vertices();
        let mut out = CliqueSet {
            cliques: Vec::new(),
            truncated: false,
        };
        if n == 0 {
            return out;
        }
        let mut p = FixedBitSet::with_capacity(n);
        p.insert_range(..);
        let x = FixedBitSet::with_capacity(n);
        let mut r = Vec::new();
        self.bron_kerbosch(&mut r, p, x, cap, &mut out);
        out
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        mut p: FixedBitSet,
        mut x: FixedBitSet,
        cap: usize,
        out: &mut CliqueSet,
    ) -> bool {
        if p.is_clear() {
            if x.is_clear() {
                if out.cliques.len() == cap {
                    out.truncated = true;
                    return false;
                }
                let mut c = r.clone();
                c.sort_unstable();
                out.cliques.push(c);
            }
            return true;
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by(|&a, &b| {
                let da = p.intersection_count(&self.rows[a]);
                let db = p.intersection_count(&self.rows[b]);
                // max_by keeps the last maximum; reverse index to keep the first.
                da.cmp(&db).then(b.cmp(&a))
            })
            .expect("P is nonempty");
        let mut candidates = p.clone();
        candidates.difference_with(&self.rows[pivot]);
        for v in candidates.ones() {
            let mut np = p.clone();
            np.intersect_with(&self.rows[v]);
            let mut nx = x.clone();
            nx.intersect_with(&self.rows[v]);
            r.push(v);
            let keep_going = self.bron_kerbosch(r, np, nx, cap, out);
            r.pop();
            if !keep_going {
                return false;
            }
            p.remove(v);
            x.insert(v);
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueSet {
    pub cliques: Vec<Vec<usize>>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxCliqueCount {
    pub count: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub mode: Mode,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub max_cliques_or_cap: Option<MaxCliqueCount>,
}
