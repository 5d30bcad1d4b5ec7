//! Exact variances, bias and point estimates of the randomized
//! (Horvitz–Thompson) and deterministic estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Distribution};
use crate::covariance::CovarianceTable;
use crate::cover::GroupCover;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

fn check_sizes(cover: &GroupCover, op: &PauliSum, table: &CovarianceTable) -> Result<()> {
    if cover.num_vertices() != op.len() || table.len() != op.len() {
        return Err(Error::Precondition(format!(
            "size mismatch: cover {}, terms {}, table {}",
            cover.num_vertices(),
            op.len(),
            table.len()
        )));
    }
    Ok(())
}

/// `⟨O⟩ − offset = Σ_P c_P μ_P`.
fn mean_energy(op: &PauliSum, table: &CovarianceTable) -> f64 {
    op.coefficients().iter().zip(table.means()).map(|(c, m)| c * m).sum()
}

/// `Σ_{P,Q∈G} a_P a_Q f(P,Q)` with `f` a table lookup.
fn group_quadratic(
    group: &[usize],
    a: impl Fn(usize) -> f64,
    f: impl Fn(usize, usize) -> Result<f64>,
) -> Result<f64> {
    let mut s = 0.0;
    for (i, &p) in group.iter().enumerate() {
        let ap = a(p);
        if ap == 0.0 {
            continue;
        }
        s += ap * ap * f(p, p)?;
        for &q in &group[i + 1..] {
            let aq = a(q);
            if aq != 0.0 {
                s += 2.0 * ap * aq * f(p, q)?;
            }
        }
    }
    Ok(s)
}

/// Per-group values computed in parallel and summed in group order.
fn sum_groups(cover: &GroupCover, f: impl Fn(usize, &[usize]) -> Result<f64> + Sync) -> Result<f64> {
    let parts: Vec<f64> = cover
        .groups()
        .par_iter()
        .enumerate()
        .map(|(g, members)| f(g, members))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

/// One-shot variance of the randomized estimator:
/// `Σ_G π_G Σ_{P,Q∈G} c_P c_Q/(π_P π_Q) tr(ψPQ) − (Σ_P c_P μ_P)²`.
pub fn ht_variance(cover: &GroupCover, pi: &Distribution, op: &PauliSum, table: &CovarianceTable) -> Result<f64> {
    check_sizes(cover, op, table)?;
    let c = op.coefficients();
    let pp = pi.pi_p();
    let second = sum_groups(cover, |g, members| {
        let w = pi.pi_g(g);
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * group_quadratic(members, |p| c[p] / pp[p], |p, q| table.moment(p, q))?)
    })?;
    let e = mean_energy(op, table);
    Ok(second - e * e)
}

/// The disjoint-group specialization `Σ_G (1/π_G) Σ_{P,Q∈G} c_P c_Q tr(ψPQ) − E²`;
/// errors unless `cover` is a partition.
pub fn ht_variance_partition(cover: &GroupCover, pi: &Distribution, op: &PauliSum, table: &CovarianceTable) -> Result<f64> {
    check_sizes(cover, op, table)?;
    if !cover.is_partition() {
        return Err(Error::InvalidCover("cover is not a partition".into()));
    }
    let c = op.coefficients();
    let second = sum_groups(cover, |g, members| {
        Ok(group_quadratic(members, |p| c[p], |p, q| table.moment(p, q))? / pi.pi_g(g))
    })?;
    let e = mean_energy(op, table);
    Ok(second - e * e)
}

/// Law-of-total-variance split `(E[Var | G], Var(E | G))` of the one-shot
/// randomized estimator.
pub fn ht_variance_decomposed(
    cover: &GroupCover,
    pi: &Distribution,
    op: &PauliSum,
    table: &CovarianceTable,
) -> Result<(f64, f64)> {
    check_sizes(cover, op, table)?;
    let c = op.coefficients();
    let pp = pi.pi_p();
    let mut within = 0.0;
    let mut mean_sq = 0.0;
    let mut mean = 0.0;
    for (g, members) in cover.groups().iter().enumerate() {
        let w = pi.pi_g(g);
        if w == 0.0 {
            continue;
        }
        let cond_mean: f64 = members.iter().map(|&p| c[p] / pp[p] * table.mean(p)).sum();
        let cond_var = group_quadratic(members, |p| c[p] / pp[p], |p, q| table.covariance(p, q))?;
        within += w * cond_var;
        mean_sq += w * cond_mean * cond_mean;
        mean += w * cond_mean;
    }
    Ok((within, mean_sq - mean * mean))
}

/// Variance of the deterministic estimator
/// `Σ_G M_G Σ_{P,Q∈G} c_P c_Q/(M_P M_Q) Cov(P,Q)`. With `partial`, terms with
/// `M_P = 0` are dropped (they contribute bias instead).
pub fn det_variance(
    cover: &GroupCover,
    alloc: &Allocation,
    op: &PauliSum,
    table: &CovarianceTable,
    partial: bool,
) -> Result<f64> {
    check_sizes(cover, op, table)?;
    if alloc.counts().len() != cover.len() {
        return Err(Error::Precondition("allocation does not match the cover".into()));
    }
    let m = alloc.per_term(cover);
    if !partial {
        if let Some(v) = m.iter().position(|&x| x == 0) {
            return Err(Error::Precondition(format!(
                "term {} is never measured; use partial coverage",
                op.string(v)
            )));
        }
    }
    let c = op.coefficients();
    sum_groups(cover, |g, members| {
        let mg = alloc.counts()[g];
        if mg == 0 {
            return Ok(0.0);
        }
        let a = |p: usize| if m[p] == 0 { 0.0 } else { c[p] / m[p] as f64 };
        Ok(mg as f64 * group_quadratic(members, a, |p, q| table.covariance(p, q))?)
    })
}

/// `−Σ_{P : M_P = 0} c_P μ_P`.
pub fn det_bias(cover: &GroupCover, alloc: &Allocation, op: &PauliSum, table: &CovarianceTable) -> Result<f64> {
    check_sizes(cover, op, table)?;
    let m = alloc.per_term(cover);
    Ok(-op
        .coefficients()
        .iter()
        .zip(&m)
        .zip(table.means())
        .filter(|((_, &m), _)| m == 0)
        .map(|((c, _), mu)| c * mu)
        .sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropositionCheck {
    /// Deterministic variance.
    pub lhs: f64,
    /// Randomized variance under `π_G = M_G / M`, divided by `M`.
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the deterministic variance to the randomized one under the
/// counting distribution of the same allocation.
pub fn proposition1_check(
    cover: &GroupCover,
    alloc: &Allocation,
    op: &PauliSum,
    table: &CovarianceTable,
) -> Result<PropositionCheck> {
    if !alloc.is_unbiased(cover) {
        return Err(Error::Precondition("allocation leaves terms unmeasured".into()));
    }
    let total = alloc.total() as f64;
    let pi = Distribution::new(cover, alloc.counts().iter().map(|&m| m as f64 / total).collect())
        .or_else(|_| {
            Distribution::from_weights(cover, &alloc.counts().iter().map(|&m| m as f64).collect::<Vec<_>>())
        })?;
    let lhs = det_variance(cover, alloc, op, table, false)?;
    let rhs = ht_variance(cover, &pi, op, table)? / total;
    Ok(PropositionCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
    })
}

/// Measurement outcomes aggregated per group: number of draws and, for each
/// member, `ŝ = n⁺ − n⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    draws: Vec<u64>,
    s: Vec<Vec<i64>>,
}

impl MeasurementRecord {
    pub fn new(cover: &GroupCover) -> Self {
        MeasurementRecord {
            draws: vec![0; cover.len()],
            s: cover.groups().iter().map(|g| vec![0; g.len()]).collect(),
        }
    }

    /// One joint outcome of group `g`, ordered like the group's members.
    pub fn add_shot(&mut self, g: usize, outcomes: &[i8]) -> Result<()> {
        self.add_many(g, 1, outcomes)
    }

    /// `count` identical joint outcomes of group `g`.
    pub fn add_many(&mut self, g: usize, count: u64, outcomes: &[i8]) -> Result<()> {
        let slot = self
            .s
            .get_mut(g)
            .ok_or_else(|| Error::Precondition(format!("draw attributed to unknown group {g}")))?;
        if slot.len() != outcomes.len() {
            return Err(Error::Precondition(format!(
                "group {g} has {} members, got {} outcomes",
                slot.len(),
                outcomes.len()
            )));
        }
        self.draws[g] += count;
        for (acc, &o) in slot.iter_mut().zip(outcomes) {
            *acc += o as i64 * count as i64;
        }
        Ok(())
    }

    pub fn draws(&self) -> &[u64] {
        &self.draws
    }

    pub fn total_draws(&self) -> u64 {
        self.draws.iter().sum()
    }

    /// `ŝ_{P,G}` for the members of group `g`.
    pub fn s(&self, g: usize) -> &[i64] {
        &self.s[g]
    }

    /// `(n⁺, n⁻)` for member `k` of group `g`.
    pub fn counts(&self, g: usize, k: usize) -> (u64, u64) {
        let s = self.s[g][k];
        let d = self.draws[g] as i64;
        (((d + s) / 2) as u64, ((d - s) / 2) as u64)
    }

    fn check(&self, cover: &GroupCover) -> Result<()> {
        if self.draws.len() != cover.len() || self.s.iter().zip(cover.groups()).any(|(s, g)| s.len() != g.len()) {
            return Err(Error::Precondition("record does not match the cover".into()));
        }
        Ok(())
    }
}

/// `offset + (1/M) Σ_P (c_P/π_P) Σ_{G∋P} ŝ_{P,G}`.
pub fn ht_estimate(cover: &GroupCover, pi: &Distribution, record: &MeasurementRecord, op: &PauliSum) -> Result<f64> {
    record.check(cover)?;
    let total = record.total_draws();
    if total == 0 {
        return Err(Error::Precondition("record holds no draws".into()));
    }
    let c = op.coefficients();
    let pp = pi.pi_p();
    let mut acc = 0.0;
    for (g, members) in cover.groups().iter().enumerate() {
        for (&p, &s) in members.iter().zip(record.s(g)) {
            acc += c[p] / pp[p] * s as f64;
        }
    }
    Ok(op.identity_offset() + acc / total as f64)
}

/// `offset + Σ_P c_P (Σ_G ŝ_{P,G}) / M_P` over measured terms.
pub fn det_estimate(cover: &GroupCover, alloc: &Allocation, record: &MeasurementRecord, op: &PauliSum) -> Result<f64> {
    record.check(cover)?;
    if record.draws() != alloc.counts() {
        return Err(Error::Precondition("record counts differ from the allocation".into()));
    }
    let m = alloc.per_term(cover);
    let mut s_p = vec![0i64; cover.num_vertices()];
    for (g, members) in cover.groups().iter().enumerate() {
        for (&p, &s) in members.iter().zip(record.s(g)) {
            s_p[p] += s;
        }
    }
    let c = op.coefficients();
    let acc: f64 = (0..c.len())
        .filter(|&p| m[p] > 0)
        .map(|p| c[p] * s_p[p] as f64 / m[p] as f64)
        .sum();
    Ok(op.identity_offset() + acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub m: u64,
    pub m_var: f64,
    pub bias: f64,
    pub mse: f64,
}

/// Deterministic `M·Var` and bias for the first `M` settings of the cover's
/// sequence, one shot each.
pub fn m_var_curve(cover: &GroupCover, op: &PauliSum, table: &CovarianceTable, m_values: &[u64]) -> Result<Vec<CurvePoint>> {
    let seq = cover
        .sequence()
        .ok_or_else(|| Error::Precondition("cover has no schedule order".into()))?;
    m_values
        .iter()
        .map(|&m| {
            if m == 0 || m as usize > seq.len() {
                return Err(Error::Precondition(format!(
                    "M = {m} outside 1..={} settings",
                    seq.len()
                )));
            }
            let mut counts = vec![0u64; cover.len()];
            for &g in &seq[..m as usize] {
                counts[g] += 1;
            }
            let alloc = Allocation::new(counts);
            let var = det_variance(cover, &alloc, op, table, true)?;
            let bias = det_bias(cover, &alloc, op, table)?;
            Ok(CurvePoint {
                m,
                m_var: m as f64 * var,
                bias,
                mse: var + bias * bias,
            })
        })
        .collect()
}

/// Exact accuracy summary of a scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeEvaluation {
    /// `"ht"` (one-shot variance) or `"det"` (`M·Var`).
    pub estimator: String,
    /// One-shot variance, or `M·Var` for the deterministic estimator.
    pub variance: f64,
    /// Variance of the estimate itself (`variance` divided by `M` for `det`).
    pub estimate_variance: f64,
    pub bias: f64,
    pub mse: f64,
    pub shots: Option<u64>,
}

impl SchemeEvaluation {
    pub fn ht(variance: f64) -> Self {
        SchemeEvaluation {
            estimator: "ht".into(),
            variance,
            estimate_variance: variance,
            bias: 0.0,
            mse: variance,
            shots: None,
        }
    }

    pub fn det(variance: f64, bias: f64, shots: u64) -> Self {
        SchemeEvaluation {
            estimator: "det".into(),
            variance: variance * shots as f64,
            estimate_variance: variance,
            bias,
            mse: variance + bias * bias,
            shots: Some(shots),
        }
    }
}
