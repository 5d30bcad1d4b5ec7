//! Dense pure-state vectors and the Pauli action on them.
//!
//! Basis index convention: the leftmost letter of a word acts on the most
//! significant bit of the amplitude index, so `basis_state("01")` is index 1.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, Phase};

const NORM_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-10;
const PROJECTION_FLOOR: f64 = 1e-14;
/// Amplitudes per parallel chunk. Fixed so reductions do not depend on the
/// thread count.
pub(crate) const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes, checking the length is a power of two and the norm is 1.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::Precondition(format!(
                "state is not normalized (norm² = {norm_sqr})"
            )));
        }
        Ok(StateVector { num_qubits, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::new(amps)
    }

    /// Haar-random pure state drawn from `rng`.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        let amps = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        StateVector::from_unnormalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    fn check_qubits(&self, p: &PauliString) -> Result<()> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::QubitMismatch {
                left: self.num_qubits,
                right: p.num_qubits(),
            });
        }
        Ok(())
    }

    /// Little-endian `(re, im)` f64 pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 16 != 0 {
            return Err(Error::Precondition(format!(
                "state file length {} is not a multiple of 16",
                bytes.len()
            )));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        StateVector::new(amps)
    }

    /// Hex SHA-256 of [`to_bytes`](Self::to_bytes).
    pub fn sha256(&self) -> String {
        hex_digest(&self.to_bytes())
    }

    /// Writes `path` (binary amplitudes) and `path.json` (sidecar).
    pub fn save(&self, path: &Path) -> Result<StateSidecar> {
        let bytes = self.to_bytes();
        let sidecar = StateSidecar {
            n: self.num_qubits,
            sha256: hex_digest(&bytes),
        };
        fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        let side = sidecar_path(path);
        fs::write(&side, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&side, e))?;
        Ok(sidecar)
    }

    /// Reads a state file, verifying its sidecar when one exists.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let state = StateVector::from_bytes(&bytes)?;
        let side = sidecar_path(path);
        if side.exists() {
            let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
            let sidecar: StateSidecar = serde_json::from_str(&text)?;
            if sidecar.n != state.num_qubits {
                return Err(Error::Precondition(format!(
                    "sidecar says {} qubits, file holds {}",
                    sidecar.n, state.num_qubits
                )));
            }
            let digest = hex_digest(&bytes);
            if sidecar.sha256 != digest {
                return Err(Error::Precondition(format!(
                    "state checksum mismatch: sidecar {}, file {digest}",
                    sidecar.sha256
                )));
            }
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub n: usize,
    pub sha256: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Precomputed action of one Pauli string on basis indices:
/// `P|b⟩ = scale · (-1)^{popcount(b & z)} |b ^ x⟩`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliAction {
    pub x: usize,
    pub z: usize,
    pub scale: Complex64,
}

impl PauliAction {
    pub fn new(p: &PauliString) -> Self {
        let (x, z) = p.index_masks();
        PauliAction {
            x,
            z,
            scale: Phase::from_power(p.y_count()).to_complex(),
        }
    }

    #[inline]
    pub fn sign(&self, b: usize) -> f64 {
        if (b & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Returns `Pψ`.
pub fn apply_pauli(p: &PauliString, psi: &StateVector) -> Result<StateVector> {
    psi.check_qubits(p)?;
    let act = PauliAction::new(p);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for (b, a) in psi.amps.iter().enumerate() {
        out[b ^ act.x] = act.scale * act.sign(b) * a;
    }
    Ok(StateVector {
        num_qubits: psi.num_qubits,
        amps: out,
    })
}

/// `⟨ψ|P|ψ⟩` as a complex number.
pub(crate) fn raw_expectation(amps: &[Complex64], act: &PauliAction) -> Complex64 {
    let partial: Vec<Complex64> = amps
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let base = ci * CHUNK;
            let mut acc = Complex64::new(0.0, 0.0);
            for (off, a) in chunk.iter().enumerate() {
                let b = base + off;
                acc += amps[b ^ act.x].conj() * a * act.sign(b);
            }
            acc
        })
        .collect();
    act.scale * partial.into_iter().sum::<Complex64>()
}

/// `⟨ψ|P|ψ⟩`; errors if the imaginary part is not negligible.
pub fn expectation(psi: &StateVector, p: &PauliString) -> Result<f64> {
    psi.check_qubits(p)?;
    let v = raw_expectation(&psi.amps, &PauliAction::new(p));
    if v.im.abs() >= IMAG_TOL {
        return Err(Error::Numerical(format!(
            "expectation of {p} has imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re.clamp(-1.0, 1.0))
}

pub fn pauli_sum_expectation(psi: &StateVector, op: &PauliSum) -> Result<f64> {
    if op.num_qubits() != psi.num_qubits {
        return Err(Error::QubitMismatch {
            left: psi.num_qubits,
            right: op.num_qubits(),
        });
    }
    let mut total = op.identity_offset();
    for (p, c) in op.terms() {
        total += c * expectation(psi, p)?;
    }
    Ok(total)
}

/// Computational basis state from a string of `0`/`1` digits.
pub fn basis_state(bits: &str) -> Result<StateVector> {
    let n = bits.len();
    if n == 0 || n > 63 {
        return Err(Error::Precondition(format!("unsupported bit-string length {n}")));
    }
    let mut index = 0usize;
    for c in bits.chars() {
        index = (index << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(Error::Precondition(format!(
                        "illegal bit {other:?} in basis label"
                    )))
                }
            };
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[index] = Complex64::new(1.0, 0.0);
    StateVector::new(amps)
}

/// `(ψ ± Pψ)/2` in place, returning the squared norm of the result.
fn project(amps: &mut [Complex64], act: &PauliAction, outcome: i8) -> f64 {
    let s = outcome as f64;
    let original = amps.to_vec();
    let mut norm_sqr = 0.0;
    for (b, a) in original.iter().enumerate() {
        let t = b ^ act.x;
        amps[t] = 0.5 * (original[t] + s * act.scale * act.sign(b) * a);
    }
    for a in amps.iter() {
        norm_sqr += a.norm_sqr();
    }
    norm_sqr
}

fn check_group(psi: &StateVector, group: &[PauliString]) -> Result<()> {
    for (i, p) in group.iter().enumerate() {
        psi.check_qubits(p)?;
        for q in &group[..i] {
            if !p.fc_unchecked(q) {
                return Err(Error::InvalidCover(format!("{p} and {q} do not commute")));
            }
        }
    }
    Ok(())
}

/// Samples one joint outcome of a commuting group by sequential projection.
pub fn measure_group<R: Rng + ?Sized>(
    psi: &StateVector,
    group: &[PauliString],
    rng: &mut R,
) -> Result<Vec<i8>> {
    check_group(psi, group)?;
    let mut amps = psi.amps.clone();
    let mut outcomes = Vec::with_capacity(group.len());
    for p in group {
        let act = PauliAction::new(p);
        let mean = raw_expectation(&amps, &act).re.clamp(-1.0, 1.0);
        let p_plus = 0.5 * (1.0 + mean);
        let outcome: i8 = if rng.gen::<f64>() < p_plus { 1 } else { -1 };
        let norm_sqr = project(&mut amps, &act, outcome);
        if norm_sqr < PROJECTION_FLOOR {
            return Err(Error::Numerical(format!(
                "projection onto outcome {outcome} of {p} vanished"
            )));
        }
        let scale = 1.0 / norm_sqr.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// Exact joint outcome distribution of a commuting group, as
/// `(outcomes, probability)` pairs with zero-probability branches pruned.
pub fn joint_distribution(psi: &StateVector, group: &[PauliString]) -> Result<Vec<(Vec<i8>, f64)>> {
    check_group(psi, group)?;
    let acts: Vec<PauliAction> = group.iter().map(PauliAction::new).collect();
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(group.len());
    branch(psi.amps.clone(), 1.0, &acts, &mut prefix, &mut out);
    Ok(out)
}

fn branch(
    amps: Vec<Complex64>,
    prob: f64,
    acts: &[PauliAction],
    prefix: &mut Vec<i8>,
    out: &mut Vec<(Vec<i8>, f64)>,
) {
    let Some((act, rest)) = acts.split_first() else {
        out.push((prefix.clone(), prob));
        return;
    };
    for outcome in [1i8, -1] {
        let mut projected = amps.clone();
        let norm_sqr = project(&mut projected, act, outcome);
        if norm_sqr < 1e-13 {
            continue;
        }
        let scale = 1.0 / norm_sqr.sqrt();
        projected.iter_mut().for_each(|a| *a *= scale);
        prefix.push(outcome);
        branch(projected, prob * norm_sqr, rest, prefix, out);
        prefix.pop();
    }
}
