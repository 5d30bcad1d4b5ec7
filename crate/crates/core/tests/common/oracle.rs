//! Brute-force references built from dense matrices and exhaustive
//! enumeration. None of this goes through the library's bit-level kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use varred::allocation::{Allocation, Distribution};
use varred::cover::GroupCover;
use varred::pauli::{Letter, PauliString, PauliSum};
use varred::state::StateVector;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn letter_matrix(l: Letter) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match l {
        Letter::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Letter::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Letter::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Letter::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product in word order: the first letter acts on the most
/// significant bit of the basis index.
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    p.letters()
        .fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, l| acc.kronecker(&letter_matrix(l)))
}

pub fn sum_matrix(op: &PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << op.num_qubits();
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * c(op.identity_offset(), 0.0);
    for (p, coef) in op.terms() {
        m += pauli_matrix(p) * c(*coef, 0.0);
    }
    m
}

pub fn ket(psi: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(psi.amplitudes())
}

pub fn expval(psi: &StateVector, m: &DMatrix<Complex64>) -> f64 {
    let v = ket(psi);
    (v.adjoint() * m * &v)[(0, 0)].re
}

/// Every joint outcome of a commuting group with its Born probability
/// `⟨ψ| Π_k (I + o_k P_k)/2 |ψ⟩`, zero-probability outcomes included.
pub fn joint_outcomes(psi: &StateVector, group: &[PauliString]) -> Vec<(Vec<i8>, f64)> {
    let dim = psi.dim();
    let mats: Vec<_> = group.iter().map(pauli_matrix).collect();
    let id = DMatrix::<Complex64>::identity(dim, dim);
    (0..1usize << group.len())
        .map(|mask| {
            let outcome: Vec<i8> = (0..group.len()).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
            let mut proj = id.clone();
            for (m, &o) in mats.iter().zip(&outcome) {
                proj = proj * ((&id + m * c(o as f64, 0.0)) * c(0.5, 0.0));
            }
            (outcome, expval(psi, &proj))
        })
        .collect()
}

fn group_strings(cover: &GroupCover, op: &PauliSum, g: usize) -> Vec<PauliString> {
    cover.group(g).iter().map(|&p| op.string(p).clone()).collect()
}

/// One-shot randomized-estimator variance by enumerating every
/// (group, joint outcome) pair.
pub fn ht_variance(cover: &GroupCover, pi: &Distribution, op: &PauliSum, psi: &StateVector) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for g in 0..cover.len() {
        let w = pi.pi_g(g);
        if w == 0.0 {
            continue;
        }
        for (o, p) in joint_outcomes(psi, &group_strings(cover, op, g)) {
            let x: f64 = cover
                .group(g)
                .iter()
                .zip(&o)
                .map(|(&t, &s)| op.coefficient(t) / pi.pi_p()[t] * s as f64)
                .sum();
            m1 += w * p * x;
            m2 += w * p * x * x;
        }
    }
    m2 - m1 * m1
}

/// Deterministic-estimator variance: independent shots, so per-group
/// single-shot variances add with weight `M_G`.
pub fn det_variance(cover: &GroupCover, alloc: &Allocation, op: &PauliSum, psi: &StateVector) -> f64 {
    let mp = alloc.per_term(cover);
    let mut total = 0.0;
    for g in 0..cover.len() {
        let mg = alloc.counts()[g];
        if mg == 0 {
            continue;
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for (o, p) in joint_outcomes(psi, &group_strings(cover, op, g)) {
            let y: f64 = cover
                .group(g)
                .iter()
                .zip(&o)
                .filter(|(&t, _)| mp[t] > 0)
                .map(|(&t, &s)| op.coefficient(t) / mp[t] as f64 * s as f64)
                .sum();
            m1 += p * y;
            m2 += p * y * y;
        }
        total += mg as f64 * (m2 - m1 * m1);
    }
    total
}

/// Smallest eigenvalue of the dense matrix.
pub fn min_eigenvalue(op: &PauliSum) -> f64 {
    sum_matrix(op).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
