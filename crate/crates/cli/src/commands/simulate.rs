use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use varred::allocation::{deterministic_allocation, Allocation};
use varred::covariance::CovarianceTable;
use varred::sim::{
    lag1_autocorrelation, mean, predicted_success, qq_data, run_experiment, sample_variance, success_rate,
    ExperimentConfig, SamplingMode, Scheme,
};
use varred::variance::{det_bias, det_variance, ht_variance};

use crate::artifact::{
    read_json, timestamp, write_json, write_text, Estimator, Report, Run, StateSource, FORMAT_VERSION,
};
use crate::commands::evaluate::load_state;
use crate::error::{CliError, CliResult};
use crate::{SamplingArg, SimulateArgs};

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let report: Report = read_json(&args.report, "report")?;
    let schema = |e: varred::Error| CliError::input(format!("report {}: {e}", args.report.display()));
    let op = report.hamiltonian.to_pauli_sum()?;
    let cover = report.scheme.cover.to_cover(&op).map_err(schema)?;

    let state_path = match report.state.source {
        StateSource::Ground => None,
        StateSource::File => Some(PathBuf::from(
            report
                .state
                .path
                .as_deref()
                .ok_or_else(|| CliError::input("report state has source \"file\" but no path"))?,
        )),
    };
    let (psi, state) = load_state(&op, state_path.as_deref())?;
    let recorded = report.state.expectation;
    let same = match report.state.source {
        StateSource::File => state.sha256 == report.state.sha256,
        StateSource::Ground => (state.expectation - recorded).abs() <= 1e-9 * recorded.abs().max(1.0),
    };
    if !same {
        return Err(CliError::precondition(format!(
            "state differs from the evaluated one (⟨O⟩ = {} now, {recorded} in the report)",
            state.expectation
        )));
    }
    let truth = state.expectation;
    let epsilon = args.epsilon.unwrap_or(report.evaluation.epsilon);
    if !(epsilon > 0.0) {
        return Err(CliError::input("--epsilon must be positive"));
    }
    let table = CovarianceTable::build(&psi, &op, &cover)?;

    let (scheme, shots, predicted_variance, predicted_bias) = match report.scheme.estimator {
        Estimator::Ht => {
            let pi = report
                .scheme
                .distribution(&cover)?
                .ok_or_else(|| CliError::input("randomized scheme without pi"))?;
            let shots = args.shots.unwrap_or(report.evaluation.clt_shots);
            if shots == 0 {
                return Err(CliError::precondition("--shots must be at least 1"));
            }
            let var = ht_variance(&cover, &pi, &op, &table)?;
            (Scheme::Randomized { cover: cover.clone(), pi }, shots, var / shots as f64, 0.0)
        }
        Estimator::Det => {
            let alloc: Allocation = match args.shots {
                None => report
                    .scheme
                    .allocation(&cover)?
                    .ok_or_else(|| CliError::input("deterministic scheme without allocation"))?,
                Some(m) => {
                    let pi = report.scheme.distribution(&cover)?.ok_or_else(|| {
                        CliError::precondition("the report's allocation is a fixed schedule and cannot be rescaled with --shots")
                    })?;
                    deterministic_allocation(&pi, m)?
                }
            };
            let var = det_variance(&cover, &alloc, &op, &table, true)?;
            let bias = det_bias(&cover, &alloc, &op, &table)?;
            let shots = alloc.total();
            (Scheme::Deterministic { cover: cover.clone(), alloc }, shots, var, bias)
        }
    };

    let sampling = match args.sampling {
        SamplingArg::Aggregated => SamplingMode::Aggregated,
        SamplingArg::PerShot => SamplingMode::PerShot,
    };
    let cfg = ExperimentConfig {
        scheme,
        shots,
        repetitions: args.reps,
        truth,
        epsilon,
        seed: args.seed,
        sampling,
    };
    let estimates = run_experiment(&cfg, &op, &psi)?;
    let rate = success_rate(&estimates, truth, epsilon, args.bootstrap, args.seed)?;

    let estimates_csv = args.estimates_csv.clone().unwrap_or_else(|| sibling(&args.out, "estimates.csv"));
    let qq_csv = args.qq_csv.clone().unwrap_or_else(|| sibling(&args.out, "qq.csv"));
    let mut text = String::from("repetition,estimate\n");
    for (i, e) in estimates.iter().enumerate() {
        let _ = writeln!(text, "{i},{e}");
    }
    write_text(&estimates_csv, &text)?;
    let mut text = String::from("theoretical,empirical\n");
    if estimates.len() >= 2 {
        for (t, e) in qq_data(&estimates, truth + predicted_bias, predicted_variance)? {
            let _ = writeln!(text, "{t},{e}");
        }
    }
    write_text(&qq_csv, &text)?;

    let m = mean(&estimates);
    let run = Run {
        format_version: FORMAT_VERSION,
        generated_at: timestamp(),
        report: args.report.display().to_string(),
        estimator: report.scheme.estimator,
        shots,
        repetitions: args.reps,
        seed: args.seed,
        epsilon,
        sampling,
        bootstrap_resamples: args.bootstrap,
        truth,
        success_rate: rate.rate,
        bootstrap_std: rate.bootstrap_std,
        predicted_success: predicted_success(epsilon, shots, predicted_variance * shots as f64),
        mean: m,
        bias: m - truth,
        predicted_bias,
        sample_variance: sample_variance(&estimates),
        predicted_variance,
        lag1_autocorrelation: lag1_autocorrelation(&estimates),
        estimates_csv: estimates_csv.display().to_string(),
        qq_csv: qq_csv.display().to_string(),
    };
    write_json(&args.out, &run)?;
    println!(
        "{{\"success_rate\":{},\"bootstrap_std\":{},\"predicted_success\":{}}}",
        run.success_rate, run.bootstrap_std, run.predicted_success
    );
    Ok(())
}
