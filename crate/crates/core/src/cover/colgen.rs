use std::collections::HashSet;
use std::time::{Duration, Instant};

use super::setcover::exact_columns;
use super::{GroupCover, Provenance};
use crate::error::Result;
use crate::graph::CommutationGraph;

const REDUCED_COST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    /// Greedy by static degree times dual weight.
    Greedy,
    /// Branch and bound on the weighted clique problem.
    Exact,
    /// Greedy, with an exact search whenever greedy finds no improving new
    /// column.
    Hybrid,
}

#[derive(Debug, Clone, Copy)]
pub struct ColumnGenerationOptions {
    pub pricing: Pricing,
    pub time_budget: Duration,
}

impl Default for ColumnGenerationOptions {
    fn default() -> Self {
        ColumnGenerationOptions {
            pricing: Pricing::Hybrid,
            time_budget: Duration::from_secs(60),
        }
    }
}

/// Solves `max Σ w_v  s.t.  Σ_{v∈C} w_v ≤ 1 for every column C, w ≥ 0`,
/// the dual of the covering LP, by tableau simplex with Bland's rule.
pub(crate) fn covering_duals(columns: &[Vec<usize>], num_vertices: usize) -> Vec<f64> {
    let m = columns.len();
    let n = num_vertices;
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let at = |r: usize, c: usize| r * width + c;
    for (r, col) in columns.iter().enumerate() {
        for &v in col {
            t[at(r, v)] = 1.0;
        }
        t[at(r, n + r)] = 1.0;
        t[at(r, width - 1)] = 1.0;
    }
    // Objective row holds -c so that a negative entry can improve.
    for v in 0..n {
        t[at(m, v)] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let eps = 1e-12;
    loop {
        let Some(enter) = (0..n + m).find(|&c| t[at(m, c)] < -eps) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = t[at(r, enter)];
            if a > eps {
                let ratio = t[at(r, width - 1)] / a;
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - eps || (ratio <= lratio + eps && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // Bounded: every w_v appears in some column with coefficient 1.
        let (pr, _) = leave.expect("covering dual is bounded");
        let pivot = t[at(pr, enter)];
        for c in 0..width {
            t[at(pr, c)] /= pivot;
        }
        for r in 0..=m {
            if r != pr {
                let f = t[at(r, enter)];
                if f != 0.0 {
                    for c in 0..width {
                        t[at(r, c)] -= f * t[at(pr, c)];
                    }
                }
            }
        }
        basis[pr] = enter;
    }
    let mut w = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            w[b] = t[at(r, width - 1)].max(0.0);
        }
    }
    w
}

/// Grows `clique` to a maximal clique, adding vertices in index order.
fn extend_to_maximal(g: &CommutationGraph, mut clique: Vec<usize>) -> Vec<usize> {
    let mut cand = g.common_neighbors(&clique);
    for &v in &clique {
        cand.remove(v);
    }
    while let Some(v) = cand.ones().next() {
        clique.push(v);
        cand.intersect_with(g.neighbors(v));
    }
    clique.sort_unstable();
    clique
}

fn greedy_weight_clique(g: &CommutationGraph, w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.num_vertices()).collect();
    let score = |v: usize| g.degree(v) as f64 * w[v];
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
    let mut clique: Vec<usize> = Vec::new();
    for v in order {
        if clique.iter().all(|&u| g.adjacent(u, v)) {
            clique.push(v);
        }
    }
    clique.sort_unstable();
    clique
}

struct WeightSearch<'a> {
    g: &'a CommutationGraph,
    w: &'a [f64],
    best: Vec<usize>,
    best_weight: f64,
    deadline: Instant,
    timed_out: bool,
}

impl WeightSearch<'_> {
    fn run(&mut self, current: &mut Vec<usize>, weight: f64, candidates: &[usize]) {
        if Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        if weight > self.best_weight {
            self.best_weight = weight;
            self.best = current.clone();
        }
        let mut remaining: f64 = candidates.iter().map(|&v| self.w[v]).sum();
        for (i, &v) in candidates.iter().enumerate() {
            if weight + remaining <= self.best_weight {
                return;
            }
            let next: Vec<usize> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&u| self.g.adjacent(u, v))
                .collect();
            current.push(v);
            self.run(current, weight + self.w[v], &next);
            current.pop();
            if self.timed_out {
                return;
            }
            remaining -= self.w[v];
        }
    }
}

/// Maximum-weight clique under weights `w`, returned maximal in `g` together
/// with its weight and whether the search completed.
pub fn max_weight_clique(g: &CommutationGraph, w: &[f64], time_limit: Duration) -> (Vec<usize>, f64, bool) {
    let start = greedy_weight_clique(g, w);
    let start_weight = start.iter().map(|&v| w[v]).sum();
    let mut candidates: Vec<usize> = (0..g.num_vertices()).filter(|&v| w[v] > 0.0).collect();
    candidates.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let mut search = WeightSearch {
        g,
        w,
        best: start,
        best_weight: start_weight,
        deadline: Instant::now() + time_limit,
        timed_out: false,
    };
    search.run(&mut Vec::new(), 0.0, &candidates);
    let clique = extend_to_maximal(g, search.best);
    let weight = clique.iter().map(|&v| w[v]).sum();
    (clique, weight, !search.timed_out)
}

/// Column generation on the clique-cover LP, then an exact cover over the
/// generated columns.
pub fn column_generation_cover(g: &CommutationGraph, opts: &ColumnGenerationOptions) -> Result<GroupCover> {
    let n = g.num_vertices();
    let deadline = Instant::now() + opts.time_budget;
    let mut columns: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut present: HashSet<Vec<usize>> = columns.iter().cloned().collect();
    let mut rounds = 0usize;
    while Instant::now() < deadline {
        let w = covering_duals(&columns, n);
        let improving = |c: &Vec<usize>, weight: f64| weight > 1.0 + REDUCED_COST_EPS && !present.contains(c);
        let exact = || {
            let left = deadline.saturating_duration_since(Instant::now());
            let (c, weight, _) = max_weight_clique(g, &w, left);
            (c, weight)
        };
        let (clique, weight) = match opts.pricing {
            Pricing::Exact => exact(),
            Pricing::Greedy | Pricing::Hybrid => {
                let c = extend_to_maximal(g, greedy_weight_clique(g, &w));
                let weight = c.iter().map(|&v| w[v]).sum::<f64>();
                if opts.pricing == Pricing::Hybrid && !improving(&c, weight) {
                    exact()
                } else {
                    (c, weight)
                }
            }
        };
        rounds += 1;
        if !improving(&clique, weight) {
            break;
        }
        present.insert(clique.clone());
        columns.push(clique);
    }
    let left = deadline.saturating_duration_since(Instant::now());
    let (picked, optimal) = exact_columns(&columns, n, left)?;
    let groups = picked.into_iter().map(|i| columns[i].clone()).collect();
    let pricing = match opts.pricing {
        Pricing::Greedy => "greedy",
        Pricing::Exact => "exact",
        Pricing::Hybrid => "hybrid",
    };
    GroupCover::new(
        g.mode(),
        n,
        groups,
        Provenance::new("cg")
            .with("pricing", pricing)
            .with("rounds", rounds)
            .with("columns", columns.len())
            .with("restricted_optimal", optimal),
    )
}
