//! Maximalization, Cliffordization and import of external measurement schedules.

use crate::cover::{GroupCover, Provenance};
use crate::error::{Error, Result};
use crate::graph::{CommutationGraph, Mode};
use crate::pauli::{Letter, PauliSum};

/// Adds every vertex, in ascending-degree order, to every group it can join
/// while keeping the group a clique of `g`. Identical groups are then merged
/// with summed multiplicity. Empty groups stay empty: they stand for settings
/// that measure no term, and growing them would invent a different setting.
pub fn maximalize(cover: &GroupCover, g: &CommutationGraph) -> Result<GroupCover> {
    cover.validate_cliques(g)?;
    let mut groups: Vec<Vec<usize>> = cover.groups().to_vec();
    let mut open: Vec<_> = groups.iter().map(|m| g.common_neighbors(m)).collect();
    for v in g.degree_order() {
        for (members, cand) in groups.iter_mut().zip(open.iter_mut()) {
            if !members.is_empty() && cand.contains(v) {
                members.push(v);
                cand.intersect_with(g.neighbors(v));
            }
        }
    }
    let mut provenance = cover.provenance.clone();
    provenance.params.insert("maximalized".into(), true.into());
    let mut out = GroupCover::with_multiplicity(
        g.mode(),
        cover.num_vertices(),
        groups,
        cover.multiplicities().to_vec(),
        provenance,
    )?;
    if let Some(seq) = cover.sequence() {
        out = out.with_sequence(seq.to_vec())?;
    }
    Ok(out.merge_duplicates())
}

/// Maximalizes a qubit-wise cover inside the fully-commuting graph.
pub fn cliffordize(qwc_cover: &GroupCover, fc_graph: &CommutationGraph) -> Result<GroupCover> {
    if qwc_cover.mode() != Mode::Qwc {
        return Err(Error::Precondition("cliffordize expects a qwc cover".into()));
    }
    if fc_graph.mode() != Mode::Fc {
        return Err(Error::Precondition("cliffordize expects an fc graph".into()));
    }
    if qwc_cover.num_vertices() != fc_graph.num_vertices() {
        return Err(Error::InvalidCover(format!(
            "cover has {} vertices, graph has {}",
            qwc_cover.num_vertices(),
            fc_graph.num_vertices()
        )));
    }
    for (gi, members) in qwc_cover.groups().iter().enumerate() {
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[..i] {
                if !fc_graph.vertex(u).qwc_unchecked(fc_graph.vertex(v)) {
                    return Err(Error::InvalidCover(format!(
                        "group {gi} is not qubit-wise commuting"
                    )));
                }
            }
        }
    }
    let mut out = maximalize(qwc_cover, fc_graph)?;
    out.provenance.params.insert("cliffordized".into(), true.into());
    Ok(out)
}

/// Reads one measurement setting per line (a word over X, Y, Z) and maps each
/// to the terms of `op` it measures. Repeated settings become one group with
/// a multiplicity; the line order is kept as the cover's sequence.
pub fn import_schedule(text: &str, op: &PauliSum) -> Result<GroupCover> {
    let n = op.num_qubits();
    let strings = op.strings();
    let mut groups = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let setting: Vec<Letter> = line
            .chars()
            .map(|c| match Letter::from_char(c) {
                Some(l) if l != Letter::I => Ok(l),
                _ => Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("illegal character {c:?} in setting"),
                }),
            })
            .collect::<Result<_>>()?;
        if setting.len() != n {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("setting has length {}, expected {n}", setting.len()),
            });
        }
        let members: Vec<usize> = strings
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                p.letters()
                    .zip(&setting)
                    .all(|(l, s)| l == Letter::I || l == *s)
            })
            .map(|(i, _)| i)
            .collect();
        groups.push(members);
    }
    if groups.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "schedule has no settings".into(),
        });
    }
    let settings = groups.len();
    let sequence: Vec<usize> = (0..settings).collect();
    let cover = GroupCover::new(
        Mode::Qwc,
        op.len(),
        groups,
        Provenance::new("import").with("settings", settings),
    )?
    .with_sequence(sequence)?;
    Ok(cover.merge_duplicates())
}
