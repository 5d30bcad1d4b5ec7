use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use super::{GroupCover, Provenance};
use crate::error::{Error, Result};
use crate::graph::{CliqueSet, Mode};

fn refuse_truncated(cliques: &CliqueSet) -> Result<()> {
    if cliques.truncated {
        return Err(Error::Precondition(
            "clique enumeration was truncated; raise the cap or use a heuristic".into(),
        ));
    }
    Ok(())
}

fn check_coverable(columns: &[Vec<usize>], num_vertices: usize) -> Result<()> {
    let mut seen = FixedBitSet::with_capacity(num_vertices);
    for c in columns {
        seen.extend(c.iter().copied());
    }
    if seen.count_ones(..) != num_vertices {
        return Err(Error::Precondition("cliques do not cover every vertex".into()));
    }
    Ok(())
}

fn greedy_pick(columns: &[Vec<usize>], num_vertices: usize, covered: &FixedBitSet) -> Vec<usize> {
    let mut covered = covered.clone();
    let mut picked = Vec::new();
    while covered.count_ones(..) < num_vertices {
        let (best, gain) = columns
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.iter().filter(|&&v| !covered.contains(v)).count()))
            .fold((usize::MAX, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if gain == 0 {
            break;
        }
        picked.push(best);
        covered.extend(columns[best].iter().copied());
    }
    picked
}

/// Repeatedly takes the clique covering the most uncovered vertices (first
/// in listing order on ties).
pub fn greedy_set_cover(cliques: &CliqueSet, num_vertices: usize, mode: Mode) -> Result<GroupCover> {
    refuse_truncated(cliques)?;
    check_coverable(&cliques.cliques, num_vertices)?;
    let picked = greedy_pick(&cliques.cliques, num_vertices, &FixedBitSet::with_capacity(num_vertices));
    let groups = picked.into_iter().map(|i| cliques.cliques[i].clone()).collect();
    GroupCover::new(mode, num_vertices, groups, Provenance::new("gsc"))
}

#[derive(Debug, Clone)]
pub struct ExactCover {
    pub cover: GroupCover,
    pub optimal: bool,
}

struct Search<'a> {
    columns: &'a [Vec<usize>],
    /// Columns containing each vertex.
    by_vertex: Vec<Vec<usize>>,
    n: usize,
    max_size: usize,
    best: Vec<usize>,
    deadline: Instant,
    timed_out: bool,
    nodes: u64,
}

impl Search<'_> {
    fn lower_bound(&self, covered: &FixedBitSet) -> usize {
        let remaining = self.n - covered.count_ones(..);
        if remaining == 0 {
            return 0;
        }
        let size_bound = remaining.div_ceil(self.max_size);
        // Uncovered vertices that share no column need distinct columns.
        let mut blocked = covered.clone();
        let mut independent = 0;
        for v in 0..self.n {
            if blocked.contains(v) {
                continue;
            }
            independent += 1;
            for &c in &self.by_vertex[v] {
                blocked.extend(self.columns[c].iter().copied());
            }
        }
        size_bound.max(independent)
    }

    fn run(&mut self, covered: &mut FixedBitSet, chosen: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes % 1024 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if covered.count_ones(..) == self.n {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        if chosen.len() + self.lower_bound(covered) >= self.best.len() {
            return;
        }
        // Branch on the uncovered vertex with the fewest covering columns.
        let v = (0..self.n)
            .filter(|&v| !covered.contains(v))
            .min_by_key(|&v| self.by_vertex[v].len())
            .expect("some vertex uncovered");
        let mut options: Vec<(usize, usize)> = self.by_vertex[v]
            .iter()
            .map(|&c| (c, self.columns[c].iter().filter(|&&u| !covered.contains(u)).count()))
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (c, _) in options {
            let before = covered.clone();
            covered.extend(self.columns[c].iter().copied());
            chosen.push(c);
            self.run(covered, chosen);
            chosen.pop();
            *covered = before;
            if self.timed_out {
                return;
            }
        }
    }
}

/// Minimum set cover by branch and bound over the given columns, started from
/// the greedy incumbent. `optimal` is false if the time limit interrupted the
/// search.
pub fn exact_set_cover(
    cliques: &CliqueSet,
    num_vertices: usize,
    mode: Mode,
    time_limit: Duration,
) -> Result<ExactCover> {
    refuse_truncated(cliques)?;
    let (picked, optimal) = exact_columns(&cliques.cliques, num_vertices, time_limit)?;
    let groups = picked.into_iter().map(|i| cliques.cliques[i].clone()).collect();
    let cover = GroupCover::new(
        mode,
        num_vertices,
        groups,
        Provenance::new("ilp").with("optimal", optimal),
    )?;
    Ok(ExactCover { cover, optimal })
}

pub(crate) fn exact_columns(
    columns: &[Vec<usize>],
    num_vertices: usize,
    time_limit: Duration,
) -> Result<(Vec<usize>, bool)> {
    check_coverable(columns, num_vertices)?;
    let mut by_vertex = vec![Vec::new(); num_vertices];
    for (i, c) in columns.iter().enumerate() {
        for &v in c {
            by_vertex[v].push(i);
        }
    }
    let incumbent = greedy_pick(columns, num_vertices, &FixedBitSet::with_capacity(num_vertices));
    let mut search = Search {
        columns,
        by_vertex,
        n: num_vertices,
        max_size: columns.iter().map(Vec::len).max().unwrap_or(1).max(1),
        best: incumbent,
        deadline: Instant::now() + time_limit,
        timed_out: false,
        nodes: 0,
    };
    let mut covered = FixedBitSet::with_capacity(num_vertices);
    let root_bound = search.lower_bound(&covered);
    if root_bound < search.best.len() {
        search.run(&mut covered, &mut Vec::new());
    }
    let mut best = search.best;
    best.sort_unstable();
    Ok((best, !search.timed_out))
}
