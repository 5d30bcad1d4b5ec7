//! On-disk JSON artifacts. Every file carries `format_version` and a
//! `generated_at` timestamp; nothing else in a file depends on wall time.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use varred::allocation::{Allocation, Distribution};
use varred::cover::GroupCover;
use varred::report::CoverFile;
use varred::variance::SchemeEvaluation;
use varred::{PauliString, PauliSum};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = varred::report::FORMAT_VERSION;

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// Reads a versioned artifact. Unreadable files, malformed JSON, missing
/// fields and foreign versions all count as input errors.
pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{what} {} is not JSON: {e}", path.display())))?;
    match raw.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(CliError::input(format!(
                "{what} {} has format_version {v}, expected {FORMAT_VERSION}",
                path.display()
            )))
        }
        None => return Err(CliError::input(format!("{what} {} has no format_version", path.display()))),
    }
    serde_json::from_value(raw).map_err(|e| CliError::input(format!("{what} {} does not match its schema: {e}", path.display())))
}

pub fn read_hamiltonian(path: &Path) -> CliResult<PauliSum> {
    varred::report::read_pauli_sum(path).map_err(|e| CliError::from(e).context(format!("hamiltonian {}", path.display())))
}

/// A cover file as written by `group` and `import-schedule`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverArtifact {
    #[serde(flatten)]
    pub cover: CoverFile,
    pub generated_at: String,
}

impl CoverArtifact {
    pub fn new(cover: &GroupCover, op: &PauliSum) -> CliResult<Self> {
        Ok(CoverArtifact {
            cover: CoverFile::from_cover(cover, op)?,
            generated_at: timestamp(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Term {
    pub word: String,
    pub coefficient: f64,
}

/// The Hamiltonian inlined into a report, so a report can be rerun without
/// the original file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianRecord {
    pub source: String,
    pub num_qubits: usize,
    pub identity_offset: f64,
    pub terms: Vec<Term>,
}

impl HamiltonianRecord {
    pub fn new(source: &Path, op: &PauliSum) -> Self {
        HamiltonianRecord {
            source: source.display().to_string(),
            num_qubits: op.num_qubits(),
            identity_offset: op.identity_offset(),
            terms: op
                .terms()
                .iter()
                .map(|(p, c)| Term { word: p.to_string(), coefficient: *c })
                .collect(),
        }
    }

    pub fn to_pauli_sum(&self) -> CliResult<PauliSum> {
        let mut terms = Vec::with_capacity(self.terms.len() + 1);
        terms.push((self.identity_offset, PauliString::identity(self.num_qubits)));
        for t in &self.terms {
            let p: PauliString = t.word.parse().map_err(|e: varred::Error| CliError::input(e.to_string()))?;
            terms.push((t.coefficient, p));
        }
        let op = PauliSum::from_terms(self.num_qubits, terms).map_err(|e| CliError::input(e.to_string()))?;
        if op.len() != self.terms.len() {
            return Err(CliError::input("report hamiltonian has repeated or zero terms"));
        }
        Ok(op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSource {
    /// Recomputed on demand by the seeded eigensolver.
    Ground,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub source: StateSource,
    pub path: Option<String>,
    pub sha256: String,
    /// `⟨ψ|O|ψ⟩`, the value every estimator targets.
    pub expectation: f64,
    pub eigensolver: Option<EigensolverRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigensolverRecord {
    pub tol: f64,
    pub seed: u64,
    pub residual: f64,
    pub matvecs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Ht,
    Det,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub estimator: Estimator,
    pub cover: CoverFile,
    /// How `pi` was chosen: uniform, l1, l2, counting, opt, or schedule.
    pub distribution: String,
    pub known_variance: bool,
    /// Group probabilities. For `det` schemes, the weights the allocation was
    /// rounded from; absent for an imported schedule taken as is.
    pub pi: Option<Vec<f64>>,
    pub allocation: Option<Vec<u64>>,
}

impl SchemeRecord {
    pub fn distribution(&self, cover: &GroupCover) -> CliResult<Option<Distribution>> {
        self.pi
            .as_ref()
            .map(|pi| Distribution::new(cover, pi.clone()).map_err(|e| CliError::input(format!("report pi: {e}"))))
            .transpose()
    }

    pub fn allocation(&self, cover: &GroupCover) -> CliResult<Option<Allocation>> {
        match &self.allocation {
            Some(a) if a.len() != cover.len() => Err(CliError::input(format!(
                "report allocation has {} entries for {} groups",
                a.len(),
                cover.len()
            ))),
            Some(a) => Ok(Some(Allocation::new(a.clone()))),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerRecord {
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub initial_objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationRecord {
    #[serde(flatten)]
    pub scheme: SchemeEvaluation,
    /// Stationarity gap of the sampling objective at `pi` (`ht` only).
    pub certificate_gap: Option<f64>,
    pub optimizer: Option<OptimizerRecord>,
    pub covered_terms: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Shots for `P(|Ê − E| ≤ ε) ≥ 1 − δ` under the normal approximation.
    pub clt_shots: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub generated_at: String,
    pub hamiltonian: HamiltonianRecord,
    pub state: StateRecord,
    pub scheme: SchemeRecord,
    pub evaluation: EvaluationRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Run {
    pub format_version: u32,
    pub generated_at: String,
    pub report: String,
    pub estimator: Estimator,
    pub shots: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub sampling: varred::sim::SamplingMode,
    pub bootstrap_resamples: usize,
    pub truth: f64,
    pub success_rate: f64,
    pub bootstrap_std: f64,
    pub predicted_success: f64,
    pub mean: f64,
    pub bias: f64,
    pub predicted_bias: f64,
    pub sample_variance: f64,
    pub predicted_variance: f64,
    pub lag1_autocorrelation: f64,
    pub estimates_csv: String,
    pub qq_csv: String,
}
