//! Group sampling distributions, the overlapping-group optimizer, deterministic
//! shot allocation and CLT shot budgets.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cover::GroupCover;
use crate::error::{Error, Result};

/// Smallest probability the optimizer leaves on a non-empty group.
pub const PI_FLOOR: f64 = 1e-12;

/// Group probabilities `π_G` and the induced term probabilities
/// `π_P = Σ_{G ∋ P} π_G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pi: Vec<f64>,
    pi_p: Vec<f64>,
}

impl Distribution {
    /// Checks `π ≥ 0`, `Σπ = 1` (to 1e-12), `π_G = 0` on empty groups is
    /// allowed, and `π_P > 0` for every term.
    pub fn new(cover: &GroupCover, pi: Vec<f64>) -> Result<Self> {
        if pi.len() != cover.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} groups",
                pi.len(),
                cover.len()
            )));
        }
        if pi.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let mut pi_p = vec![0.0; cover.num_vertices()];
        for (g, &p) in cover.groups().iter().zip(&pi) {
            for &v in g {
                pi_p[v] += p;
            }
        }
        if let Some(v) = pi_p.iter().position(|&p| p <= 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "term {v} has zero sampling probability"
            )));
        }
        Ok(Distribution { pi, pi_p })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(cover: &GroupCover, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution("weights must have a positive finite sum".into()));
        }
        let mut pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
        renormalize(&mut pi);
        Distribution::new(cover, pi)
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_g(&self, g: usize) -> f64 {
        self.pi[g]
    }

    pub fn pi_p(&self) -> &[f64] {
        &self.pi_p
    }
}

/// Pushes rounding error of a normalized vector into its largest entry.
fn renormalize(pi: &mut [f64]) {
    let total: f64 = pi.iter().sum();
    if let Some(k) = (0..pi.len()).max_by(|&a, &b| pi[a].total_cmp(&pi[b])) {
        pi[k] += 1.0 - total;
    }
}

fn group_weights(cover: &GroupCover, f: impl Fn(&[usize]) -> f64, what: &str) -> Result<Vec<f64>> {
    cover
        .groups()
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            if g.is_empty() {
                return Ok(0.0);
            }
            let w = f(g);
            if w > 0.0 {
                Ok(w)
            } else {
                Err(Error::InvalidDistribution(format!("group {gi} has zero {what} weight")))
            }
        })
        .collect()
}

/// `π_G ∝ 1` on non-empty groups.
pub fn uniform_distribution(cover: &GroupCover) -> Result<Distribution> {
    let w = group_weights(cover, |_| 1.0, "uniform")?;
    Distribution::from_weights(cover, &w)
}

/// `π_G ∝ Σ_{P∈G} |c_P|`.
pub fn l1_distribution(cover: &GroupCover, coeffs: &[f64]) -> Result<Distribution> {
    let w = group_weights(cover, |g| g.iter().map(|&v| coeffs[v].abs()).sum(), "l1")?;
    Distribution::from_weights(cover, &w)
}

/// `π_G ∝ sqrt(Σ_{P∈G} c_P²)`.
pub fn l2_distribution(cover: &GroupCover, coeffs: &[f64]) -> Result<Distribution> {
    let w = group_weights(
        cover,
        |g| g.iter().map(|&v| coeffs[v] * coeffs[v]).sum::<f64>().sqrt(),
        "l2",
    )?;
    Distribution::from_weights(cover, &w)
}

/// `π_G ∝ multiplicity` on non-empty groups (the empirical frequency of an
/// imported schedule).
pub fn counting_distribution(cover: &GroupCover) -> Result<Distribution> {
    let w: Vec<f64> = cover
        .groups()
        .iter()
        .zip(cover.multiplicities())
        .map(|(g, &m)| if g.is_empty() { 0.0 } else { m as f64 })
        .collect();
    Distribution::from_weights(cover, &w)
}

/// Per-term objective coefficients `a_P = w_P c_P²`.
fn term_weights(coeffs: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    match weights {
        None => Ok(coeffs.iter().map(|c| c * c).collect()),
        Some(w) => {
            if w.len() != coeffs.len() {
                return Err(Error::Precondition(format!(
                    "{} weights for {} terms",
                    w.len(),
                    coeffs.len()
                )));
            }
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::Precondition("term weights must be finite and non-negative".into()));
            }
            Ok(coeffs.iter().zip(w).map(|(c, w)| w * c * c).collect())
        }
    }
}

fn induced(cover: &GroupCover, pi: &[f64]) -> Vec<f64> {
    let mut pi_p = vec![0.0; cover.num_vertices()];
    for (g, &p) in cover.groups().iter().zip(pi) {
        for &v in g {
            pi_p[v] += p;
        }
    }
    pi_p
}

/// `Σ_P a_P / π_P`.
fn objective_terms(a: &[f64], pi_p: &[f64]) -> f64 {
    a.iter().zip(pi_p).filter(|(a, _)| **a > 0.0).map(|(a, p)| a / p).sum()
}

/// `λ_G = Σ_{P∈G} a_P / π_P²`, the negative gradient.
fn lambdas(cover: &GroupCover, a: &[f64], pi_p: &[f64]) -> Vec<f64> {
    cover
        .groups()
        .iter()
        .map(|g| g.iter().map(|&v| a[v] / (pi_p[v] * pi_p[v])).sum())
        .collect()
}

/// `Σ_G π_G Σ_{P∈G} w_P c_P² / π_P²`; equals `Σ_P w_P c_P² / π_P`.
pub fn objective(cover: &GroupCover, coeffs: &[f64], weights: Option<&[f64]>, pi: &Distribution) -> Result<f64> {
    if coeffs.len() != cover.num_vertices() {
        return Err(Error::Precondition("coefficients do not match the cover".into()));
    }
    let a = term_weights(coeffs, weights)?;
    Ok(objective_terms(&a, pi.pi_p()))
}

/// Group-ordered form of [`objective`], kept separate to check the identity.
pub fn objective_by_group(cover: &GroupCover, coeffs: &[f64], weights: Option<&[f64]>, pi: &Distribution) -> Result<f64> {
    let a = term_weights(coeffs, weights)?;
    let lam = lambdas(cover, &a, pi.pi_p());
    Ok(pi.pi().iter().zip(&lam).map(|(p, l)| p * l).sum())
}

/// `(max λ_G − min λ_G) / mean λ_G` over the support. Groups at or near the
/// `PI_FLOOR` floor count as outside it, since an optimum may put zero
/// probability on a redundant group whose `λ_G` is then smaller.
pub fn certificate_gap(cover: &GroupCover, coeffs: &[f64], weights: Option<&[f64]>, pi: &Distribution) -> Result<f64> {
    let a = term_weights(coeffs, weights)?;
    let lam = lambdas(cover, &a, pi.pi_p());
    Ok(relative_spread(
        lam.iter().zip(pi.pi()).filter(|(_, &p)| p > 10.0 * PI_FLOOR).map(|(l, _)| *l),
    ))
}

fn relative_spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if mean == 0.0 {
        0.0
    } else {
        (max - min) / mean
    }
}

/// Stationarity measure used for stopping: spread of `λ_G` over groups above
/// the floor, plus how far any floored group's `λ_G` exceeds the support
/// maximum (a floored group may legitimately have a smaller `λ_G`).
fn kkt_gap(lam: &[f64], pi: &[f64], active: &[bool]) -> f64 {
    let support = |k: usize| active[k] && pi[k] > 10.0 * PI_FLOOR;
    let gap = relative_spread((0..lam.len()).filter(|&k| support(k)).map(|k| lam[k]));
    let max_support = (0..lam.len())
        .filter(|&k| support(k))
        .map(|k| lam[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let violation = (0..lam.len())
        .filter(|&k| active[k] && !support(k))
        .map(|k| (lam[k] - max_support) / max_support.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    gap.max(violation)
}

/// Euclidean projection onto `{x : x_k ≥ floor on active k, x_k = 0 otherwise,
/// Σx = 1}`.
fn project(y: &[f64], active: &[bool]) -> Vec<f64> {
    let idx: Vec<usize> = (0..y.len()).filter(|&k| active[k]).collect();
    let budget = 1.0 - PI_FLOOR * idx.len() as f64;
    let mut shifted: Vec<f64> = idx.iter().map(|&k| y[k] - PI_FLOOR).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - budget) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    shifted.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
    let mut out = vec![0.0; y.len()];
    for (x, &k) in shifted.iter().zip(&idx) {
        out[k] = x + PI_FLOOR;
    }
    let total: f64 = out.iter().sum();
    let active_max = idx.iter().copied().max_by(|&a, &b| out[a].total_cmp(&out[b]));
    if let Some(k) = active_max {
        out[k] += 1.0 - total;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// Target for the stationarity gap.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            tol: 1e-8,
            max_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Optimized {
    pub distribution: Distribution,
    pub objective: f64,
    pub initial_objective: f64,
    pub certificate_gap: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after every accepted step, starting with the initial point.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Minimizes `Σ_P w_P c_P² / π_P` over the simplex by projected gradient with
/// Barzilai–Borwein steps and Armijo backtracking. Empty groups stay at zero.
pub fn optimize_distribution(
    cover: &GroupCover,
    coeffs: &[f64],
    weights: Option<&[f64]>,
    init: Option<&Distribution>,
    opts: &OptimizeOptions,
) -> Result<Optimized> {
    let a = term_weights(coeffs, weights)?;
    if a.iter().all(|&x| x == 0.0) {
        return Err(Error::Precondition("weighted objective is identically zero".into()));
    }
    let start = match init {
        Some(d) => d.clone(),
        None => l2_distribution(cover, coeffs)?,
    };
    let active: Vec<bool> = cover.groups().iter().map(|g| !g.is_empty()).collect();
    if (0..cover.len()).any(|k| active[k] && start.pi()[k] <= 0.0) {
        return Err(Error::Precondition("initial distribution must be positive on non-empty groups".into()));
    }

    let eval = |pi: &[f64]| {
        let pi_p = induced(cover, pi);
        (objective_terms(&a, &pi_p), lambdas(cover, &a, &pi_p))
    };
    let mut pi = start.pi().to_vec();
    let (mut f, mut lam) = eval(&pi);
    let initial_objective = f;
    let mut history = vec![f];
    let grad_norm = lam.iter().map(|l| l * l).sum::<f64>().sqrt();
    let mut step = 1.0 / grad_norm.max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    let mut gap = kkt_gap(&lam, &pi, &active);
    while gap > opts.tol && iterations < opts.max_iters {
        iterations += 1;
        let mut t = step;
        let mut accepted = None;
        while t > 1e-30 {
            let trial: Vec<f64> = pi.iter().zip(&lam).map(|(p, l)| p + t * l).collect();
            let cand = project(&trial, &active);
            let (fc, lc) = eval(&cand);
            // Armijo: f(x+) ≤ f(x) + σ ∇f·(x+ − x), with ∇f = −λ.
            let descent: f64 = cand.iter().zip(&pi).zip(&lam).map(|((c, p), l)| -l * (c - p)).sum();
            if fc <= f + 1e-4 * descent && fc.is_finite() {
                accepted = Some((cand, fc, lc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc, lc)) = accepted else { break };
        // Barzilai–Borwein step for the next iteration.
        let s: Vec<f64> = cand.iter().zip(&pi).map(|(c, p)| c - p).collect();
        let y: Vec<f64> = lc.iter().zip(&lam).map(|(n, o)| o - n).collect();
        let sy: f64 = s.iter().zip(&y).map(|(s, y)| s * y).sum();
        let ss: f64 = s.iter().map(|s| s * s).sum();
        if ss == 0.0 {
            break;
        }
        step = if sy > 0.0 { ss / sy } else { t * 2.0 };
        pi = cand;
        f = fc;
        lam = lc;
        history.push(f);
        gap = kkt_gap(&lam, &pi, &active);
    }
    let distribution = Distribution::new(cover, pi)?;
    Ok(Optimized {
        certificate_gap: certificate_gap(cover, coeffs, weights, &distribution)?,
        distribution,
        objective: f,
        initial_objective,
        converged: gap <= opts.tol,
        iterations,
        history,
    })
}

/// Fixed shot counts per group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    counts: Vec<u64>,
}

impl Allocation {
    pub fn new(counts: Vec<u64>) -> Self {
        Allocation { counts }
    }

    /// One shot per listed multiplicity (an imported schedule as given).
    pub fn from_multiplicities(cover: &GroupCover) -> Self {
        Allocation::new(cover.multiplicities().to_vec())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `M_P = Σ_{G ∋ P} M_G`.
    pub fn per_term(&self, cover: &GroupCover) -> Vec<u64> {
        let mut m = vec![0; cover.num_vertices()];
        for (g, &c) in cover.groups().iter().zip(&self.counts) {
            for &v in g {
                m[v] += c;
            }
        }
        m
    }

    /// `M_{P,Q}`: shots whose group contains both terms.
    pub fn pair_count(&self, cover: &GroupCover, p: usize, q: usize) -> u64 {
        cover
            .groups()
            .iter()
            .zip(&self.counts)
            .filter(|(g, _)| g.binary_search(&p).is_ok() && g.binary_search(&q).is_ok())
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn is_unbiased(&self, cover: &GroupCover) -> bool {
        self.per_term(cover).iter().all(|&m| m > 0)
    }
}

/// `M_G = ⌈π_G · target⌉`. Products within 1e-9 (relative) of an integer are
/// treated as that integer so that exact fractions are not bumped up by
/// rounding noise.
pub fn deterministic_allocation(pi: &Distribution, target: u64) -> Result<Allocation> {
    let groups = pi.pi().iter().filter(|&&p| p > 0.0).count() as u64;
    if target < groups {
        return Err(Error::Precondition(format!(
            "target {target} is below the number of groups {groups}"
        )));
    }
    let counts = pi
        .pi()
        .iter()
        .map(|&p| {
            let x = p * target as f64;
            let r = x.round();
            if (x - r).abs() <= 1e-9 * x.max(1.0) {
                r as u64
            } else {
                x.ceil() as u64
            }
        })
        .collect();
    Ok(Allocation::new(counts))
}

/// Two-sided standard normal quantile `z_{1−δ/2}`.
pub fn z_two_sided(delta: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - delta / 2.0)
}

/// `⌈σ² z²_{1−δ/2} / ε²⌉`, at least 1.
pub fn clt_shots(variance: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(variance >= 0.0) || !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!(
            "clt_shots needs variance ≥ 0, ε > 0 and δ in (0,1); got {variance}, {epsilon}, {delta}"
        )));
    }
    let z = z_two_sided(delta);
    let n = (variance * z * z / (epsilon * epsilon)).ceil();
    Ok((n as u64).max(1))
}
