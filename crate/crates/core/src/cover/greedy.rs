use fixedbitset::FixedBitSet;

use super::{GroupCover, Provenance};
use crate::graph::CommutationGraph;

/// Greedy partition in ascending-degree order: each vertex joins the first
/// group it is adjacent to in full, else opens a new one.
pub fn ldf_cover(g: &CommutationGraph) -> GroupCover {
    let n = g.num_vertices();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    // Vertices adjacent to every member of the matching group.
    let mut open: Vec<FixedBitSet> = Vec::new();
    for v in g.degree_order() {
        match open.iter().position(|cand| cand.contains(v)) {
            Some(k) => {
                groups[k].push(v);
                open[k].intersect_with(g.neighbors(v));
            }
            None => {
                groups.push(vec![v]);
                open.push(g.neighbors(v).clone());
            }
        }
    }
    GroupCover::new(g.mode(), n, groups, Provenance::new("ldf")).expect("indices in range")
}

/// Recursive largest first. A group is seeded with the uncovered vertex of
/// largest complement degree among uncovered vertices, then grown by the
/// candidate with the most complement-neighbours among uncovered vertices
/// already excluded from the group; ties go to fewer complement-neighbours
/// among the remaining candidates, then to input order.
pub fn rlf_cover(g: &CommutationGraph) -> GroupCover {
    let n = g.num_vertices();
    let mut uncovered = FixedBitSet::with_capacity(n);
    uncovered.insert_range(..);
    let mut groups = Vec::new();

    // Complement-degree of v restricted to `set`.
    let cdeg = |v: usize, set: &FixedBitSet| -> usize {
        let inside = set.count_ones(..) - usize::from(set.contains(v));
        inside - g.neighbors(v).intersection_count(set)
    };

    while !uncovered.is_clear() {
        let seed = uncovered
            .ones()
            .max_by(|&a, &b| cdeg(a, &uncovered).cmp(&cdeg(b, &uncovered)).then(b.cmp(&a)))
            .expect("nonempty");
        let mut group = vec![seed];
        uncovered.remove(seed);
        let mut candidates = uncovered.clone();
        candidates.intersect_with(g.neighbors(seed));
        let mut excluded = uncovered.clone();
        excluded.difference_with(&candidates);
        while !candidates.is_clear() {
            let next = candidates
                .ones()
                .max_by(|&a, &b| {
                    cdeg(a, &excluded)
                        .cmp(&cdeg(b, &excluded))
                        .then(cdeg(b, &candidates).cmp(&cdeg(a, &candidates)))
                        .then(b.cmp(&a))
                })
                .expect("nonempty");
            group.push(next);
            uncovered.remove(next);
            candidates.remove(next);
            let mut dropped = candidates.clone();
            dropped.difference_with(g.neighbors(next));
            candidates.intersect_with(g.neighbors(next));
            excluded.union_with(&dropped);
        }
        groups.push(group);
    }
    GroupCover::new(g.mode(), n, groups, Provenance::new("rlf")).expect("indices in range")
}
