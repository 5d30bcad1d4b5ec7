use serde::Serialize;
use varred::postprocess::{cliffordize, import_schedule};
use varred::{CommutationGraph, Mode};

use crate::artifact::{read_hamiltonian, timestamp, write_json, CoverArtifact, FORMAT_VERSION};
use crate::error::{CliError, CliResult, Context};
use crate::ImportArgs;

#[derive(Serialize)]
struct ImportStats {
    format_version: u32,
    generated_at: String,
    mode: Mode,
    settings: u64,
    num_groups: usize,
    empty_groups: usize,
    covered_terms: usize,
    uncovered_terms: usize,
}

pub fn run(args: &ImportArgs) -> CliResult<()> {
    let op = read_hamiltonian(&args.hamiltonian)?;
    let text = std::fs::read_to_string(&args.schedule)
        .map_err(|e| CliError::input(format!("cannot read schedule {}: {e}", args.schedule.display())))?;
    // Everything wrong with a schedule file is a format error.
    let mut cover = import_schedule(&text, &op)
        .map_err(|e| CliError::input(e.to_string()))
        .context(format!("schedule {}", args.schedule.display()))?;
    if args.cliffordize {
        cover = cliffordize(&cover, &CommutationGraph::build(&op, Mode::Fc))?;
    }
    let empty = cover.empty_groups();
    let uncovered = cover.uncovered();
    if !empty.is_empty() {
        eprintln!("warning: {} setting(s) measure no term of the hamiltonian", empty.len());
    }
    if !uncovered.is_empty() {
        eprintln!("warning: {} of {} terms are not measured by any setting", uncovered.len(), op.len());
    }
    let stats = ImportStats {
        format_version: FORMAT_VERSION,
        generated_at: timestamp(),
        mode: cover.mode(),
        settings: cover.multiplicities().iter().sum(),
        num_groups: cover.len(),
        empty_groups: empty.len(),
        covered_terms: op.len() - uncovered.len(),
        uncovered_terms: uncovered.len(),
    };
    write_json(&args.out, &CoverArtifact::new(&cover, &op)?)?;
    println!("{}", serde_json::to_string(&stats).map_err(|e| CliError::input(e.to_string()))?);
    Ok(())
}
