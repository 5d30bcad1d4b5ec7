use std::time::{Duration, Instant};

use serde::Serialize;
use varred::cover::{
    column_generation_cover, exact_set_cover, greedy_set_cover, ldf_cover, ldvf_cover, lvf_cover, rlf_cover,
    ColumnGenerationOptions, GroupCover,
};
use varred::graph::GraphStats;
use varred::CommutationGraph;

use crate::artifact::{read_hamiltonian, timestamp, write_json, CoverArtifact, FORMAT_VERSION};
use crate::error::{CliError, CliResult};
use crate::{Algorithm, GroupArgs};

#[derive(Serialize)]
struct GroupStats {
    format_version: u32,
    generated_at: String,
    algorithm: &'static str,
    graph: GraphStats,
    num_groups: usize,
    is_partition: bool,
    /// Only for exact searches: whether the search finished.
    optimal: Option<bool>,
    wall_time_s: f64,
}

pub fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Ldf => "ldf",
        Algorithm::Rlf => "rlf",
        Algorithm::Gsc => "gsc",
        Algorithm::Ilp => "ilp",
        Algorithm::Cg => "cg",
        Algorithm::Ldvf => "ldvf",
        Algorithm::Lvf => "lvf",
    }
}

pub fn run(args: &GroupArgs) -> CliResult<()> {
    if !(args.time_limit > 0.0 && args.time_limit.is_finite()) {
        return Err(CliError::input("--time-limit must be a positive number of seconds"));
    }
    let op = read_hamiltonian(&args.hamiltonian)?;
    let start = Instant::now();
    let graph = CommutationGraph::build(&op, args.mode.into());
    let time_limit = Duration::from_secs_f64(args.time_limit);
    let mut optimal = None;
    let mut enumerated = None;
    let cover: GroupCover = match args.algorithm {
        Algorithm::Ldf => ldf_cover(&graph),
        Algorithm::Rlf => rlf_cover(&graph),
        Algorithm::Ldvf => ldvf_cover(&graph, &op)?,
        Algorithm::Lvf => lvf_cover(&graph, &op)?,
        Algorithm::Gsc | Algorithm::Ilp => {
            let cliques = graph.maximal_cliques(args.clique_cap);
            if cliques.truncated {
                return Err(CliError::precondition(format!(
                    "maximal-clique enumeration hit the cap of {}; {} needs the full list (raise --clique-cap)",
                    args.clique_cap,
                    algorithm_name(args.algorithm)
                )));
            }
            let cover = if args.algorithm == Algorithm::Gsc {
                greedy_set_cover(&cliques, graph.num_vertices(), graph.mode())?
            } else {
                let exact = exact_set_cover(&cliques, graph.num_vertices(), graph.mode(), time_limit)?;
                optimal = Some(exact.optimal);
                exact.cover
            };
            enumerated = Some(cliques);
            cover
        }
        Algorithm::Cg => {
            let opts = ColumnGenerationOptions {
                time_budget: time_limit,
                ..ColumnGenerationOptions::default()
            };
            column_generation_cover(&graph, &opts)?
        }
    };
    let wall = start.elapsed();
    cover.validate(&graph)?;
    let stats = GroupStats {
        format_version: FORMAT_VERSION,
        generated_at: timestamp(),
        algorithm: algorithm_name(args.algorithm),
        graph: graph.stats(enumerated.as_ref()),
        num_groups: cover.len(),
        is_partition: cover.is_partition(),
        optimal,
        wall_time_s: wall.as_secs_f64(),
    };
    write_json(&args.out, &CoverArtifact::new(&cover, &op)?)?;
    println!("{}", serde_json::to_string(&stats).map_err(|e| CliError::input(e.to_string()))?);
    Ok(())
}
