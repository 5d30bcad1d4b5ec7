//! Greedy partitions that minimize the coefficient-only variance proxy
//! `(Σ_G ‖c_G‖₂)²` instead of the group count.

use fixedbitset::FixedBitSet;

use super::{GroupCover, Provenance};
use crate::error::{Error, Result};
use crate::graph::CommutationGraph;
use crate::pauli::PauliSum;

/// `(Σ_G sqrt(Σ_{P∈G} c_P²))²` over disjoint groups.
pub fn variance_proxy(groups: &[Vec<usize>], coeffs: &[f64]) -> Result<f64> {
    let mut seen = FixedBitSet::with_capacity(coeffs.len());
    let mut total = 0.0;
    for g in groups {
        let mut s = 0.0;
        for &v in g {
            if v >= coeffs.len() {
                return Err(Error::InvalidCover(format!("vertex {v} has no coefficient")));
            }
            if seen.put(v) {
                return Err(Error::InvalidCover(format!("vertex {v} is in two groups")));
            }
            s += coeffs[v] * coeffs[v];
        }
        total += s.sqrt();
    }
    Ok(total * total)
}

/// Increase of `Σ_G ‖c_G‖₂` when a term with `c²` joins a group with `Σc² = s`.
#[inline]
fn delta(s: f64, c2: f64) -> f64 {
    c2 / ((s + c2).sqrt() + s.sqrt())
}

struct Groups {
    members: Vec<Vec<usize>>,
    sumsq: Vec<f64>,
    /// Vertices adjacent to every member.
    open: Vec<FixedBitSet>,
}

impl Groups {
    fn new() -> Self {
        Groups {
            members: Vec::new(),
            sumsq: Vec::new(),
            open: Vec::new(),
        }
    }

    /// Best placement for `v`: `(delta, group)`, `group == len` meaning a new
    /// group. Strict comparison keeps the first of equal candidates.
    fn best(&self, v: usize, c2: f64) -> (f64, usize) {
        let mut best = (c2.sqrt(), self.members.len());
        for k in 0..self.members.len() {
            if self.open[k].contains(v) {
                let d = delta(self.sumsq[k], c2);
                if d < best.0 || (d == best.0 && k < best.1) {
                    best = (d, k);
                }
            }
        }
        best
    }

    fn place(&mut self, g: &CommutationGraph, v: usize, k: usize, c2: f64) {
        if k == self.members.len() {
            self.members.push(vec![v]);
            self.sumsq.push(c2);
            self.open.push(g.neighbors(v).clone());
        } else {
            self.members[k].push(v);
            self.sumsq[k] += c2;
            self.open[k].intersect_with(g.neighbors(v));
        }
    }

    fn ell2_sum(&self) -> f64 {
        self.sumsq.iter().map(|s| s.sqrt()).sum()
    }
}

fn squared_coeffs(g: &CommutationGraph, op: &PauliSum) -> Result<Vec<f64>> {
    if g.num_vertices() != op.len() {
        return Err(Error::Precondition(format!(
            "graph has {} vertices, Pauli sum has {} terms",
            g.num_vertices(),
            op.len()
        )));
    }
    Ok(op.coefficients().iter().map(|c| c * c).collect())
}

/// Vertices in ascending-degree order, each placed where the proxy grows least.
pub fn ldvf_cover(g: &CommutationGraph, op: &PauliSum) -> Result<GroupCover> {
    let c2 = squared_coeffs(g, op)?;
    let mut groups = Groups::new();
    for v in g.degree_order() {
        let (_, k) = groups.best(v, c2[v]);
        groups.place(g, v, k, c2[v]);
    }
    GroupCover::new(g.mode(), g.num_vertices(), groups.members, Provenance::new("ldvf"))
}

/// Each round commits the single (vertex, placement) pair with the smallest
/// proxy increase over all ungrouped vertices.
pub fn lvf_cover(g: &CommutationGraph, op: &PauliSum) -> Result<GroupCover> {
    let c2 = squared_coeffs(g, op)?;
    let order = g.degree_order();
    let mut groups = Groups::new();
    // Cached best placement per position in `order`; None once placed.
    let mut cache: Vec<Option<(f64, usize)>> = order.iter().map(|&v| Some(groups.best(v, c2[v]))).collect();
    for _ in 0..order.len() {
        let mut pick: Option<(usize, f64, usize)> = None;
        for (i, entry) in cache.iter().enumerate() {
            if let Some((d, k)) = *entry {
                if pick.map_or(true, |(_, pd, _)| d < pd) {
                    pick = Some((i, d, k));
                }
            }
        }
        let (i, _, k) = pick.expect("an ungrouped vertex remains");
        let v = order[i];
        let opened = k == groups.members.len();
        groups.place(g, v, k, c2[v]);
        cache[i] = None;
        let new_len = groups.members.len();
        for (j, entry) in cache.iter_mut().enumerate() {
            let Some((d, bk)) = *entry else { continue };
            let u = order[j];
            let compatible = groups.open[k].contains(u);
            if !opened && bk == k {
                // Group k grew, so its delta for u is stale.
                *entry = Some(groups.best(u, c2[u]));
                continue;
            }
            // The "new group" index shifts when a group is opened.
            let bk = if opened && bk == k { new_len } else { bk };
            *entry = Some(if compatible {
                let dk = delta(groups.sumsq[k], c2[u]);
                if dk < d || (dk == d && k < bk) {
                    (dk, k)
                } else {
                    (d, bk)
                }
            } else {
                (d, bk)
            });
        }
    }
    GroupCover::new(g.mode(), g.num_vertices(), groups.members, Provenance::new("lvf"))
}

/// One greedy step as evaluated by the reference (unaccelerated) scan.
#[derive(Debug, Clone)]
pub struct Placement {
    pub vertex: usize,
    /// `None` opens a new group.
    pub group: Option<usize>,
    pub proxy: f64,
    /// Proxy value of every alternative evaluated in this step.
    pub alternatives: Vec<f64>,
}

/// Reference implementation of LDVF (`lvf == false`) or LVF that scans every
/// candidate and records each step. Returns the steps and the final groups.
pub fn placement_trace(g: &CommutationGraph, op: &PauliSum, lvf: bool) -> Result<(Vec<Placement>, Vec<Vec<usize>>)> {
    let c2 = squared_coeffs(g, op)?;
    let order = g.degree_order();
    let mut groups = Groups::new();
    let mut remaining = order.clone();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        let scan: Vec<usize> = if lvf { remaining.clone() } else { vec![remaining[0]] };
        let base = groups.ell2_sum();
        let mut alternatives = Vec::new();
        let mut best: Option<(f64, usize, usize)> = None;
        for &v in &scan {
            let mut options: Vec<(f64, usize)> = (0..groups.members.len())
                .filter(|&k| groups.open[k].contains(v))
                .map(|k| (delta(groups.sumsq[k], c2[v]), k))
                .collect();
            options.push((c2[v].sqrt(), groups.members.len()));
            for (d, k) in options {
                let proxy = (base + d) * (base + d);
                alternatives.push(proxy);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, v, k));
                }
            }
        }
        let (d, v, k) = best.expect("at least one option");
        let opened = k == groups.members.len();
        groups.place(g, v, k, c2[v]);
        remaining.retain(|&u| u != v);
        steps.push(Placement {
            vertex: v,
            group: (!opened).then_some(k),
            proxy: (base + d) * (base + d),
            alternatives,
        });
    }
    Ok((steps, groups.members))
}
