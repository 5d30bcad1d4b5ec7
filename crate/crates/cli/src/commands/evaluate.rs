use varred::allocation::{
    certificate_gap, clt_shots, counting_distribution, deterministic_allocation, l1_distribution, l2_distribution,
    optimize_distribution, uniform_distribution, Allocation, Distribution, OptimizeOptions,
};
use varred::covariance::CovarianceTable;
use varred::cover::GroupCover;
use varred::eigen::{ground_state, LanczosOptions};
use varred::postprocess::{cliffordize, maximalize};
use varred::report::CoverFile;
use varred::state::{pauli_sum_expectation, StateVector};
use varred::variance::{det_bias, det_variance, ht_variance, SchemeEvaluation};
use varred::{CommutationGraph, Mode, PauliSum};

use crate::artifact::{
    read_hamiltonian, read_json, timestamp, write_json, EigensolverRecord, Estimator, EvaluationRecord,
    HamiltonianRecord, OptimizerRecord, Report, SchemeRecord, StateRecord, StateSource, FORMAT_VERSION,
};
use crate::error::{CliError, CliResult, Context};
use crate::{AllocArg, DistArg, EvaluateArgs};

fn postprocess(cover: GroupCover, op: &PauliSum, args: &EvaluateArgs) -> CliResult<GroupCover> {
    cover
        .validate_cliques(&CommutationGraph::build(op, cover.mode()))
        .context("cover does not fit the hamiltonian")?;
    let mut cover = cover;
    if args.cliffordize {
        if cover.mode() != Mode::Qwc {
            return Err(CliError::precondition("--cliffordize needs a qwc cover"));
        }
        cover = cliffordize(&cover, &CommutationGraph::build(op, Mode::Fc))?;
    }
    if args.maximalize {
        cover = maximalize(&cover, &CommutationGraph::build(op, cover.mode()))?;
    }
    Ok(cover)
}

pub fn load_state(op: &PauliSum, path: Option<&std::path::Path>) -> CliResult<(StateVector, StateRecord)> {
    let (psi, source, eigensolver) = match path {
        Some(p) => {
            let psi = StateVector::load(p).context(format!("state {}", p.display()))?;
            (psi, StateSource::File, None)
        }
        None => {
            let opts = LanczosOptions::default();
            let gs = ground_state(op, &opts).context("ground state")?;
            let rec = EigensolverRecord {
                tol: opts.tol,
                seed: opts.seed,
                residual: gs.residual,
                matvecs: gs.matvecs,
            };
            (gs.state, StateSource::Ground, Some(rec))
        }
    };
    if psi.num_qubits() != op.num_qubits() {
        return Err(CliError::precondition(format!(
            "state has {} qubits, hamiltonian has {}",
            psi.num_qubits(),
            op.num_qubits()
        )));
    }
    let record = StateRecord {
        source,
        path: path.map(|p| p.display().to_string()),
        sha256: psi.sha256(),
        expectation: pauli_sum_expectation(&psi, op)?,
        eigensolver,
    };
    Ok((psi, record))
}

/// Refuses weight-based distributions on groups that measure no term:
/// silently giving such a setting probability zero would evaluate a
/// different scheme than the one in the cover file.
fn require_weighted(cover: &GroupCover, name: &str) -> CliResult<()> {
    match cover.empty_groups().first() {
        Some(g) => Err(CliError::precondition(format!(
            "group {g} has zero {name} weight (it measures no term of the hamiltonian)"
        ))),
        None => Ok(()),
    }
}

/// `c_P √w_P`, so that ℓ2 weights become `√(Σ w_P c_P²)`.
fn scaled(coeffs: &[f64], weights: &[f64]) -> Vec<f64> {
    coeffs.iter().zip(weights).map(|(c, w)| c * w.sqrt()).collect()
}

struct Randomized {
    pi: Distribution,
    name: &'static str,
    optimizer: Option<OptimizerRecord>,
}

fn randomized(cover: &GroupCover, coeffs: &[f64], weights: Option<&[f64]>, dist: DistArg) -> CliResult<Randomized> {
    if weights.is_some() && dist != DistArg::Opt {
        return Err(CliError::precondition("--known-variance applies to --dist opt and --alloc l2 only"));
    }
    let (pi, name, optimizer) = match dist {
        DistArg::Uniform => (uniform_distribution(cover)?, "uniform", None),
        DistArg::L1 => {
            require_weighted(cover, "l1")?;
            (l1_distribution(cover, coeffs)?, "l1", None)
        }
        DistArg::L2 => {
            require_weighted(cover, "l2")?;
            (l2_distribution(cover, coeffs)?, "l2", None)
        }
        DistArg::Counting => (counting_distribution(cover)?, "counting", None),
        DistArg::Opt => {
            let out = optimize_distribution(cover, coeffs, weights, None, &OptimizeOptions::default())?;
            let rec = OptimizerRecord {
                converged: out.converged,
                iterations: out.iterations,
                objective: out.objective,
                initial_objective: out.initial_objective,
            };
            (out.distribution, "opt", Some(rec))
        }
    };
    Ok(Randomized { pi, name, optimizer })
}

fn allocation(
    cover: &GroupCover,
    coeffs: &[f64],
    weights: Option<&[f64]>,
    alloc: AllocArg,
    target: Option<u64>,
) -> CliResult<(Allocation, Option<Distribution>, &'static str)> {
    if weights.is_some() && alloc != AllocArg::L2 {
        return Err(CliError::precondition("--known-variance applies to --dist opt and --alloc l2 only"));
    }
    let pi = match alloc {
        AllocArg::Schedule => {
            if target.is_some() {
                return Err(CliError::precondition("--alloc schedule takes the cover's multiplicities; drop --target"));
            }
            return Ok((Allocation::from_multiplicities(cover), None, "schedule"));
        }
        AllocArg::Uniform => uniform_distribution(cover)?,
        AllocArg::L2 => {
            require_weighted(cover, "l2")?;
            match weights {
                Some(w) => l2_distribution(cover, &scaled(coeffs, w))?,
                None => l2_distribution(cover, coeffs)?,
            }
        }
    };
    let target = target.ok_or_else(|| CliError::precondition("--alloc uniform|l2 needs --target N"))?;
    let name = if alloc == AllocArg::Uniform { "uniform" } else { "l2" };
    Ok((deterministic_allocation(&pi, target)?, Some(pi), name))
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    if !(args.epsilon > 0.0) || !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::input("--epsilon must be positive and --delta in (0, 1)"));
    }
    let op = read_hamiltonian(&args.hamiltonian)?;
    let file: CoverFile = read_json(&args.cover, "cover")?;
    let cover = file.to_cover(&op).context(format!("cover {}", args.cover.display()))?;
    let cover = postprocess(cover, &op, args)?;
    let (psi, state) = load_state(&op, args.state.as_deref())?;
    let table = CovarianceTable::build(&psi, &op, &cover)?;
    let coeffs = op.coefficients();
    let weights: Option<Vec<f64>> = args
        .known_variance
        .then(|| table.means().iter().map(|mu| (1.0 - mu * mu).max(0.0)).collect());

    let (scheme, evaluation) = match args.alloc {
        None => {
            let dist = args.dist.expect("clap requires --dist without --alloc");
            let r = randomized(&cover, &coeffs, weights.as_deref(), dist)?;
            let var = ht_variance(&cover, &r.pi, &op, &table)?;
            let gap = certificate_gap(&cover, &coeffs, weights.as_deref(), &r.pi)?;
            let scheme = SchemeRecord {
                estimator: Estimator::Ht,
                cover: CoverFile::from_cover(&cover, &op)?,
                distribution: r.name.into(),
                known_variance: args.known_variance,
                pi: Some(r.pi.pi().to_vec()),
                allocation: None,
            };
            let eval = EvaluationRecord {
                scheme: SchemeEvaluation::ht(var),
                certificate_gap: Some(gap),
                optimizer: r.optimizer,
                covered_terms: op.len() - cover.uncovered().len(),
                epsilon: args.epsilon,
                delta: args.delta,
                clt_shots: clt_shots(var, args.epsilon, args.delta)?,
            };
            (scheme, eval)
        }
        Some(a) => {
            let (alloc, pi, name) = allocation(&cover, &coeffs, weights.as_deref(), a, args.target)?;
            if alloc.total() == 0 {
                return Err(CliError::precondition("allocation has no shots"));
            }
            let var = det_variance(&cover, &alloc, &op, &table, true)?;
            let bias = det_bias(&cover, &alloc, &op, &table)?;
            let ev = SchemeEvaluation::det(var, bias, alloc.total());
            let covered = alloc.per_term(&cover).iter().filter(|&&m| m > 0).count();
            let shots = clt_shots(ev.variance, args.epsilon, args.delta)?;
            let scheme = SchemeRecord {
                estimator: Estimator::Det,
                cover: CoverFile::from_cover(&cover, &op)?,
                distribution: name.into(),
                known_variance: args.known_variance,
                pi: pi.map(|d| d.pi().to_vec()),
                allocation: Some(alloc.counts().to_vec()),
            };
            let eval = EvaluationRecord {
                scheme: ev,
                certificate_gap: None,
                optimizer: None,
                covered_terms: covered,
                epsilon: args.epsilon,
                delta: args.delta,
                clt_shots: shots,
            };
            (scheme, eval)
        }
    };
    if evaluation.covered_terms < op.len() {
        eprintln!(
            "warning: {} of {} terms are never measured; the estimate is biased",
            op.len() - evaluation.covered_terms,
            op.len()
        );
    }
    let report = Report {
        format_version: FORMAT_VERSION,
        generated_at: timestamp(),
        hamiltonian: HamiltonianRecord::new(&args.hamiltonian, &op),
        state,
        scheme,
        evaluation,
    };
    write_json(&args.out, &report)?;
    println!(
        "{}",
        serde_json::to_string(&report.evaluation).map_err(|e| CliError::input(e.to_string()))?
    );
    Ok(())
}
