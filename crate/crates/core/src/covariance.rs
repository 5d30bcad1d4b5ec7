//! Means and intra-group second moments of the terms of a Pauli sum.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::cover::GroupCover;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, Phase};
use crate::state::{expectation, StateVector};

/// `μ_P = tr(ψP)` for every term and `tr(ψPQ)` for every intra-group pair.
#[derive(Debug, Clone)]
pub struct CovarianceTable {
    means: Vec<f64>,
    /// Keyed by `(i, j)` with `i < j`.
    moments: HashMap<(usize, usize), f64>,
}

impl CovarianceTable {
    pub fn build(psi: &StateVector, op: &PauliSum, cover: &GroupCover) -> Result<Self> {
        if cover.num_vertices() != op.len() {
            return Err(Error::InvalidCover(format!(
                "cover has {} vertices, Pauli sum has {} terms",
                cover.num_vertices(),
                op.len()
            )));
        }
        let mode = cover.mode();
        let mut pairs = BTreeSet::new();
        for (gi, g) in cover.groups().iter().enumerate() {
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    if !mode.commutes(op.string(i), op.string(j)) {
                        return Err(Error::InvalidCover(format!(
                            "group {gi}: {} and {} do not commute ({mode})",
                            op.string(i),
                            op.string(j)
                        )));
                    }
                    pairs.insert((i, j));
                }
            }
        }
        let products: Vec<((usize, usize), Phase, PauliString)> = pairs
            .into_iter()
            .map(|(i, j)| {
                let (phase, r) = op.string(i).product(op.string(j))?;
                Ok(((i, j), phase, r))
            })
            .collect::<Result<_>>()?;

        // Expectations of every distinct string needed, computed once each.
        let mut words: Vec<PauliString> = op.strings();
        let mut seen: HashMap<PauliString, usize> =
            words.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        for (_, _, r) in &products {
            if !r.is_identity() && !seen.contains_key(r) {
                seen.insert(r.clone(), words.len());
                words.push(r.clone());
            }
        }
        let values: Vec<f64> = words
            .par_iter()
            .map(|p| expectation(psi, p))
            .collect::<Result<_>>()?;

        let means = values[..op.len()].to_vec();
        let mut moments = HashMap::with_capacity(products.len());
        for (key, phase, r) in products {
            let sign = phase.real_sign().ok_or_else(|| {
                Error::Numerical(format!("commuting pair {key:?} has an imaginary product phase"))
            })?;
            let value = if r.is_identity() { 1.0 } else { values[seen[&r]] };
            moments.insert(key, sign * value);
        }
        Ok(CovarianceTable { means, moments })
    }

    /// Table from explicit values; `moments` keys must satisfy `i < j`.
    pub fn from_parts(means: Vec<f64>, moments: HashMap<(usize, usize), f64>) -> Self {
        CovarianceTable { means, moments }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    /// `tr(ψ P_i P_j)`.
    pub fn moment(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Ok(1.0);
        }
        let key = (i.min(j), i.max(j));
        self.moments
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("no pair moment for terms {key:?}")))
    }

    /// `Cov(X_i, X_j) = tr(ψ P_i P_j) − μ_i μ_j`.
    pub fn covariance(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.moment(i, j)? - self.means[i] * self.means[j])
    }

    pub fn num_pairs(&self) -> usize {
        self.moments.len()
    }
}
