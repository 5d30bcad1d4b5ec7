//! Fixtures, independent oracles and the property suite shared by the
//! `acceptance` and `properties` test targets.
#![allow(dead_code)]

pub mod oracle;
pub mod props;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use varred::cover::{ldf_cover, rlf_cover, GroupCover, Provenance};
use varred::graph::{CommutationGraph, Mode};
use varred::pauli::{Letter, PauliString, PauliSum};
use varred::postprocess::maximalize;
use varred::state::StateVector;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn h2() -> PauliSum {
    varred::report::read_pauli_sum(&data_dir().join("h2_sto3g.txt")).unwrap()
}

pub fn h2_minimal_schedule() -> String {
    std::fs::read_to_string(data_dir().join("h2_minimal_schedule.txt")).unwrap()
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_string<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let letters: Vec<Letter> = (0..n)
        .map(|_| [Letter::I, Letter::X, Letter::Y, Letter::Z][rng.gen_range(0..4)])
        .collect();
    PauliString::from_letters(&letters)
}

/// `k` distinct non-identity terms on `n` qubits with coefficients in [-1, 1].
pub fn random_sum<R: Rng>(n: usize, k: usize, rng: &mut R) -> PauliSum {
    let k = k.min((1usize << (2 * n)) - 1);
    let mut words: Vec<PauliString> = Vec::new();
    while words.len() < k {
        let p = random_string(n, rng);
        if !p.is_identity() && !words.contains(&p) {
            words.push(p);
        }
    }
    let terms: Vec<(f64, PauliString)> = words
        .into_iter()
        .map(|p| {
            let c = loop {
                let c: f64 = rng.gen_range(-1.0..1.0);
                if c.abs() > 1e-3 {
                    break c;
                }
            };
            (c, p)
        })
        .collect();
    PauliSum::from_terms(n, terms).unwrap()
}

pub struct Instance {
    pub op: PauliSum,
    pub psi: StateVector,
    pub cover: GroupCover,
}

/// Random small instance with at most `max_groups` groups. Half of the
/// covers are maximalized so groups overlap.
pub fn random_instance<R: Rng>(max_qubits: usize, max_terms: usize, max_groups: usize, rng: &mut R) -> Instance {
    loop {
        let n = rng.gen_range(1..=max_qubits);
        let k = rng.gen_range(1..=max_terms);
        let op = random_sum(n, k, rng);
        let mode = *[Mode::Qwc, Mode::Fc].choose(rng).unwrap();
        let g = CommutationGraph::build(&op, mode);
        let mut cover = if rng.gen_bool(0.5) { ldf_cover(&g) } else { rlf_cover(&g) };
        if rng.gen_bool(0.5) {
            cover = maximalize(&cover, &g).unwrap();
        }
        if cover.len() <= max_groups {
            let psi = StateVector::random(n, rng);
            return Instance { op, psi, cover };
        }
    }
}

pub fn cover_of(mode: Mode, n: usize, groups: Vec<Vec<usize>>) -> GroupCover {
    GroupCover::new(mode, n, groups, Provenance::new("test")).unwrap()
}
