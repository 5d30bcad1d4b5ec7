//! Matrix-free Pauli-sum operator and a restarted Lanczos ground-state solver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::state::{PauliAction, StateVector, CHUNK};

pub const MAX_QUBITS: usize = 24;

/// `O` as a list of per-term basis actions, ready for matvecs.
pub struct PauliOperator {
    num_qubits: usize,
    offset: f64,
    terms: Vec<(PauliAction, f64)>,
    l1: f64,
}

impl PauliOperator {
    pub fn new(op: &PauliSum) -> Result<Self> {
        if op.num_qubits() > MAX_QUBITS {
            return Err(Error::Precondition(format!(
                "{} qubits exceeds the dense limit of {MAX_QUBITS}",
                op.num_qubits()
            )));
        }
        Ok(PauliOperator {
            num_qubits: op.num_qubits(),
            offset: op.identity_offset(),
            terms: op
                .terms()
                .iter()
                .map(|(p, c)| (PauliAction::new(p), *c))
                .collect(),
            l1: op.l1_norm(),
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// `out = O v`, parallel over fixed output chunks.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let base = ci * CHUNK;
            for (off, o) in chunk.iter_mut().enumerate() {
                let a = base + off;
                let mut acc = v[a] * self.offset;
                for (act, c) in &self.terms {
                    // (P v)[a] = scale · sign(a ^ x) · v[a ^ x]
                    let b = a ^ act.x;
                    acc += act.scale * (c * act.sign(b)) * v[b];
                }
                *o = acc;
            }
        });
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Relative residual target: `‖Oψ − Eψ‖ ≤ tol · Σ|c_P|`.
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_matvecs: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-8,
            krylov_dim: 64,
            max_matvecs: 10_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let parts: Vec<Complex64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum())
        .collect();
    parts.into_iter().sum()
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).re.sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(ys, xs)| ys.iter_mut().zip(xs).for_each(|(y, x)| *y += alpha * x));
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for q in basis {
            let h = dot(q, v);
            axpy(-h, q, v);
        }
    }
}

/// Smallest eigenpair of `O` in the orthogonal complement of `deflate`.
fn lanczos(
    op: &PauliOperator,
    deflate: &[Vec<Complex64>],
    opts: &LanczosOptions,
) -> Result<GroundState> {
    if opts.tol <= 0.0 {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let dim = op.dim();
    let target = opts.tol * op.l1.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    // A start vector shared with the undeflated run would project onto the
    // deflated vector exactly within a degenerate eigenspace.
    rng.set_stream(deflate.len() as u64);
    let mut start = StateVector::random(op.num_qubits, &mut rng).into_amplitudes();
    orthogonalize(&mut start, deflate);
    let s = norm(&start);
    if s < 1e-12 {
        return Err(Error::Precondition("deflation exhausts the space".into()));
    }
    start.iter_mut().for_each(|a| *a /= s);

    let mut matvecs = 0;
    let mut best: Option<(f64, Vec<Complex64>, f64)> = None;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    while matvecs < opts.max_matvecs {
        let kmax = opts.krylov_dim.min(dim - deflate.len()).max(1);
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if basis.len() >= kmax || b < 1e-10 * op.l1.max(1.0) || matvecs >= opts.max_matvecs {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let imin = (0..k)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .unwrap();
        let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
        for (i, q) in basis.iter().enumerate().take(k) {
            axpy(Complex64::new(eig.eigenvectors[(i, imin)], 0.0), q, &mut ritz);
        }
        orthogonalize(&mut ritz, deflate);
        let rn = norm(&ritz);
        ritz.iter_mut().for_each(|a| *a /= rn);

        op.apply(&ritz, &mut w);
        matvecs += 1;
        let energy = dot(&ritz, &w).re;
        axpy(Complex64::new(-energy, 0.0), &ritz, &mut w);
        orthogonalize(&mut w, deflate);
        let residual = norm(&w);
        let improved = best.as_ref().map_or(true, |b| residual < b.2);
        if improved {
            best = Some((energy, ritz.clone(), residual));
        }
        if residual <= target {
            return Ok(GroundState {
                energy,
                state: StateVector::from_unnormalized(ritz)?,
                residual,
                matvecs,
            });
        }
        start = ritz;
    }
    let residual = best.map_or(f64::INFINITY, |b| b.2);
    Err(Error::NotConverged { matvecs, residual })
}

/// Minimal eigenvalue and a unit eigenvector of `O`.
pub fn ground_state(op: &PauliSum, opts: &LanczosOptions) -> Result<GroundState> {
    let operator = PauliOperator::new(op)?;
    lanczos(&operator, &[], opts)
}

/// Smallest eigenvalue of `O` restricted to the complement of `ground`; equal
/// to the ground energy when the ground space is degenerate.
pub fn next_eigenvalue(op: &PauliSum, ground: &StateVector, opts: &LanczosOptions) -> Result<f64> {
    let operator = PauliOperator::new(op)?;
    if operator.dim() < 2 {
        return Ok(f64::INFINITY);
    }
    let deflate = vec![ground.amplitudes().to_vec()];
    Ok(lanczos(&operator, &deflate, opts)?.energy)
}

/// Dense matrix of `O` for small-n checks.
pub fn dense_matrix(op: &PauliSum) -> Result<DMatrix<Complex64>> {
    let operator = PauliOperator::new(op)?;
    let dim = operator.dim();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut e = vec![Complex64::new(0.0, 0.0); dim];
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        e[j] = Complex64::new(1.0, 0.0);
        operator.apply(&e, &mut col);
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    Ok(m)
}
