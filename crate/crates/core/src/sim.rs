//! Seeded Monte Carlo experiments over grouping schemes.
//!
//! Every repetition owns a ChaCha20 stream: the generator is seeded with the
//! master seed and its stream id is set to the repetition index, so results do
//! not depend on thread count or scheduling.
//!
//! The default sampler draws group counts multinomially and, per drawn group,
//! outcome counts multinomially from the group's exact joint-outcome
//! distribution. This has the same law as measuring M independent copies of
//! the state shot by shot, which `SamplingMode::PerShot` does literally.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::allocation::{Allocation, Distribution};
use crate::cover::GroupCover;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::state::{joint_distribution, measure_group, StateVector};
use crate::variance::{det_estimate, ht_estimate, MeasurementRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    #[default]
    Aggregated,
    PerShot,
}

#[derive(Debug, Clone)]
pub enum Scheme {
    /// Groups drawn i.i.d. from `π`, estimated with inverse-probability weights.
    Randomized { cover: GroupCover, pi: Distribution },
    /// Each group measured exactly `M_G` times.
    Deterministic { cover: GroupCover, alloc: Allocation },
}

impl Scheme {
    pub fn cover(&self) -> &GroupCover {
        match self {
            Scheme::Randomized { cover, .. } | Scheme::Deterministic { cover, .. } => cover,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    /// Shots per repetition. Ignored by deterministic schemes, whose shot
    /// count is the allocation total.
    pub shots: u64,
    pub repetitions: usize,
    pub truth: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub sampling: SamplingMode,
}

impl ExperimentConfig {
    fn check(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Precondition("repetitions must be at least 1".into()));
        }
        if let Scheme::Randomized { .. } = self.scheme {
            if self.shots == 0 {
                return Err(Error::Precondition("shots must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// The generator of repetition `rep`.
pub fn repetition_rng(seed: u64, rep: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// `n` draws from the categorical distribution `p` (which need not be
/// normalized), via successive conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; p.len()];
    let mut left = n;
    let mut mass: f64 = p.iter().sum();
    for (k, &pk) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == p.len() || pk >= mass {
            out[k] = left;
            break;
        }
        let q = (pk / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= pk;
    }
    out
}

struct Prepared<'a> {
    psi: &'a StateVector,
    groups: Vec<Vec<PauliString>>,
    /// Joint outcome tables, filled only for aggregated sampling.
    joint: Vec<Option<(Vec<Vec<i8>>, Vec<f64>)>>,
}

impl<'a> Prepared<'a> {
    fn new(psi: &'a StateVector, op: &PauliSum, cover: &GroupCover, sampling: SamplingMode, used: &[bool]) -> Result<Self> {
        if cover.num_vertices() != op.len() {
            return Err(Error::InvalidCover("cover does not match the Pauli sum".into()));
        }
        let groups: Vec<Vec<PauliString>> = cover
            .groups()
            .iter()
            .map(|g| g.iter().map(|&p| op.string(p).clone()).collect())
            .collect();
        let joint = groups
            .par_iter()
            .zip(used)
            .map(|(g, &u)| {
                if sampling == SamplingMode::PerShot || !u {
                    return Ok(None);
                }
                let table = joint_distribution(psi, g)?;
                Ok(Some(table.into_iter().unzip()))
            })
            .collect::<Result<_>>()?;
        Ok(Prepared { psi, groups, joint })
    }

    fn measure<R: Rng + ?Sized>(&self, g: usize, count: u64, record: &mut MeasurementRecord, rng: &mut R) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        match &self.joint[g] {
            Some((outcomes, probs)) => {
                for (o, c) in outcomes.iter().zip(multinomial(count, probs, rng)) {
                    if c > 0 {
                        record.add_many(g, c, o)?;
                    }
                }
            }
            None => {
                for _ in 0..count {
                    let o = measure_group(self.psi, &self.groups[g], rng)?;
                    record.add_shot(g, &o)?;
                }
            }
        }
        Ok(())
    }
}

fn run_repetitions(cfg: &ExperimentConfig, f: impl Fn(&mut ChaCha20Rng) -> Result<f64> + Sync) -> Result<Vec<f64>> {
    (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| f(&mut repetition_rng(cfg.seed, rep as u64)))
        .collect()
}

/// `R` estimates of the randomized estimator, each from `M` i.i.d. group draws.
pub fn run_ht_experiment(cfg: &ExperimentConfig, op: &PauliSum, psi: &StateVector) -> Result<Vec<f64>> {
    cfg.check()?;
    let Scheme::Randomized { cover, pi } = &cfg.scheme else {
        return Err(Error::Precondition("run_ht_experiment needs a randomized scheme".into()));
    };
    let used: Vec<bool> = pi.pi().iter().map(|&p| p > 0.0).collect();
    let prep = Prepared::new(psi, op, cover, cfg.sampling, &used)?;
    run_repetitions(cfg, |rng| {
        let mut record = MeasurementRecord::new(cover);
        match cfg.sampling {
            SamplingMode::Aggregated => {
                for (g, n) in multinomial(cfg.shots, pi.pi(), rng).into_iter().enumerate() {
                    prep.measure(g, n, &mut record, rng)?;
                }
            }
            SamplingMode::PerShot => {
                let cdf: Vec<f64> = pi
                    .pi()
                    .iter()
                    .scan(0.0, |acc, p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect();
                for _ in 0..cfg.shots {
                    let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
                    let g = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                    prep.measure(g, 1, &mut record, rng)?;
                }
            }
        }
        ht_estimate(cover, pi, &record, op)
    })
}

/// `R` estimates of the deterministic estimator, each measuring group `G`
/// exactly `M_G` times.
pub fn run_det_experiment(cfg: &ExperimentConfig, op: &PauliSum, psi: &StateVector) -> Result<Vec<f64>> {
    cfg.check()?;
    let Scheme::Deterministic { cover, alloc } = &cfg.scheme else {
        return Err(Error::Precondition("run_det_experiment needs a deterministic scheme".into()));
    };
    if alloc.counts().len() != cover.len() {
        return Err(Error::Precondition("allocation does not match the cover".into()));
    }
    let used: Vec<bool> = alloc.counts().iter().map(|&m| m > 0).collect();
    let prep = Prepared::new(psi, op, cover, cfg.sampling, &used)?;
    run_repetitions(cfg, |rng| {
        let mut record = MeasurementRecord::new(cover);
        for (g, &m) in alloc.counts().iter().enumerate() {
            prep.measure(g, m, &mut record, rng)?;
        }
        det_estimate(cover, alloc, &record, op)
    })
}

/// Runs whichever experiment matches the scheme.
pub fn run_experiment(cfg: &ExperimentConfig, op: &PauliSum, psi: &StateVector) -> Result<Vec<f64>> {
    match cfg.scheme {
        Scheme::Randomized { .. } => run_ht_experiment(cfg, op, psi),
        Scheme::Deterministic { .. } => run_det_experiment(cfg, op, psi),
    }
}

/// Bootstrap standard deviation of `stat` over `resamples` resamples with
/// replacement.
pub fn bootstrap_std(values: &[f64], stat: impl Fn(&[f64]) -> f64, resamples: usize, seed: u64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Precondition("no values to resample".into()));
    }
    if resamples < 2 {
        return Err(Error::Precondition("need at least two resamples".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; values.len()];
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = values[rng.gen_range(0..values.len())];
            }
            stat(&buf)
        })
        .collect();
    Ok(sample_variance(&stats).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessRate {
    pub rate: f64,
    pub bootstrap_std: f64,
}

/// Fraction of estimates with `|estimate − truth| < ε`, with a bootstrap
/// standard deviation.
pub fn success_rate(estimates: &[f64], truth: f64, epsilon: f64, resamples: usize, seed: u64) -> Result<SuccessRate> {
    if estimates.is_empty() {
        return Err(Error::Precondition("no estimates".into()));
    }
    if resamples < 100 {
        return Err(Error::Precondition("at least 100 bootstrap resamples are required".into()));
    }
    let hits: Vec<f64> = estimates
        .iter()
        .map(|e| if (e - truth).abs() < epsilon { 1.0 } else { 0.0 })
        .collect();
    Ok(SuccessRate {
        rate: mean(&hits),
        bootstrap_std: bootstrap_std(&hits, mean, resamples, seed)?,
    })
}

/// Normal-theory success probability `2Φ(ε√M/σ) − 1`.
pub fn predicted_success(epsilon: f64, shots: u64, one_shot_variance: f64) -> f64 {
    if one_shot_variance <= 0.0 {
        return 1.0;
    }
    let z = epsilon * (shots as f64).sqrt() / one_shot_variance.sqrt();
    2.0 * Normal::new(0.0, 1.0).unwrap().cdf(z) - 1.0
}

/// `(theoretical, empirical)` quantile pairs: sorted estimates against the
/// quantiles of `N(truth, variance)` at plotting positions `(i − 0.5)/R`.
pub fn qq_data(estimates: &[f64], truth: f64, variance: f64) -> Result<Vec<(f64, f64)>> {
    if estimates.len() < 2 {
        return Err(Error::Precondition("Q-Q data needs at least two estimates".into()));
    }
    let mut sorted = estimates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let std = Normal::new(0.0, 1.0).unwrap();
    let sd = variance.max(0.0).sqrt();
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, e)| (truth + sd * std.inverse_cdf((i as f64 + 0.5) / r), e))
        .collect())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Lag-1 sample autocorrelation; zero for constant input.
pub fn lag1_autocorrelation(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let den: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    if den == 0.0 {
        return 0.0;
    }
    let num: f64 = values.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl EstimateSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("no estimates".into()));
        }
        Ok(EstimateSummary {
            count: values.len(),
            mean: mean(values),
            variance: sample_variance(values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}
