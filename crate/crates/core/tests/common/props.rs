//! Seeded property checks. `fast` shrinks instance counts, not instance
//! shapes, so both modes exercise the same code paths.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use varred::allocation::{
    certificate_gap, clt_shots, counting_distribution, l2_distribution, objective, objective_by_group,
    optimize_distribution, uniform_distribution, Allocation, Distribution, OptimizeOptions,
};
use varred::covariance::CovarianceTable;
use varred::cover::{
    column_generation_cover, exact_set_cover, greedy_set_cover, ldf_cover, ldvf_cover, lvf_cover, placement_trace,
    rlf_cover, variance_proxy, ColumnGenerationOptions, GroupCover, Pricing,
};
use varred::eigen::{ground_state, LanczosOptions};
use varred::graph::{CommutationGraph, Mode};
use varred::pauli::{parse_pauli_sum, PauliString};
use varred::postprocess::{cliffordize, maximalize};
use varred::sim::{lag1_autocorrelation, mean, run_ht_experiment, ExperimentConfig, SamplingMode, Scheme};
use varred::state::{apply_pauli, measure_group, pauli_sum_expectation, StateVector};
use varred::variance::{det_variance, ht_variance, ht_variance_decomposed, ht_variance_partition};

use super::{oracle, random_instance, random_string, random_sum, rng, Instance};

pub type Check = fn(bool) -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub const ALL: &[(&str, Check)] = &[
    ("pauli: product matches matrix oracle and is associative", product_oracle),
    ("pauli: fc commutation iff symmetric product phase", fc_iff_phase),
    ("pauli: qwc implies fc", qwc_implies_fc),
    ("pauli: text round trip is bit exact", text_round_trip),
    ("state: P applied twice is the identity", involution),
    ("state: ground energy is a variational lower bound", variational_bound),
    ("state: measured frequencies follow Born probabilities", born_frequencies),
    ("state: covariance symmetric and bounded", covariance_bounds),
    ("graph: maximal cliques match subset enumeration", cliques_exhaustive),
    ("graph: qwc edges are fc edges", qwc_subset_fc),
    ("cover: every algorithm returns a valid cover", covers_valid),
    ("cover: optimal exact cover is no larger than heuristics", exact_beats_heuristics),
    ("cover: identical inputs give identical covers", covers_deterministic),
    ("cover: variance-aware steps commit the cheapest placement", placement_argmin),
    ("postprocess: maximalize grows, is maximal and idempotent", maximalize_props),
    ("postprocess: cliffordized groups contain their source", cliffordize_contains),
    ("allocation: optimizer history is monotone", optimizer_monotone),
    ("allocation: both objective forms agree", objective_identity),
    ("allocation: disjoint optimum equals the l2 closed form", disjoint_fixed_point),
    ("allocation: clt shots monotone", clt_monotone),
    ("variance: variances are non-negative", variances_nonnegative),
    ("variance: partition formula equals overlap formula", partition_formula),
    ("variance: law of total variance", total_variance),
    ("variance: randomized estimator is unbiased", ht_unbiased),
    ("variance: exact values match joint-outcome enumeration", oracle_equivalence),
    ("sim: same seed gives identical estimates", sim_deterministic),
    ("sim: repetitions are uncorrelated and centred", sim_independent),
];

pub struct Outcome {
    pub name: &'static str,
    pub result: Result<(), String>,
    pub elapsed: Duration,
}

pub fn run_all(fast: bool) -> Vec<Outcome> {
    ALL.iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let result = std::panic::catch_unwind(|| check(fast))
                .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
            Outcome {
                name,
                result,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

fn count(fast: bool, n: usize) -> usize {
    if fast {
        (n / 4).max(1)
    } else {
        n
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn product_oracle(fast: bool) -> Result<(), String> {
    let mut r = rng(1);
    for _ in 0..count(fast, 400) {
        let n = r.gen_range(1..=3);
        let (p, q, s) = (random_string(n, &mut r), random_string(n, &mut r), random_string(n, &mut r));
        let (ph, pq) = p.product(&q).unwrap();
        let lhs = oracle::pauli_matrix(&p) * oracle::pauli_matrix(&q);
        let rhs = oracle::pauli_matrix(&pq) * ph.to_complex();
        ensure!((lhs - rhs).norm() < 1e-12, "{p}·{q} disagrees with matrices");
        let (a1, left) = pq.product(&s).unwrap();
        let (b0, qs) = q.product(&s).unwrap();
        let (b1, right) = p.product(&qs).unwrap();
        ensure!(left == right && ph * a1 == b0 * b1, "({p}{q}){s} != {p}({q}{s})");
    }
    Ok(())
}

fn fc_iff_phase(fast: bool) -> Result<(), String> {
    let mut r = rng(2);
    for _ in 0..count(fast, 2000) {
        let n = r.gen_range(1..=70);
        let (p, q) = (random_string(n, &mut r), random_string(n, &mut r));
        let sym = p.product(&q).unwrap().0 == q.product(&p).unwrap().0;
        ensure!(p.fc_commutes(&q).unwrap() == sym, "{p} {q}");
    }
    Ok(())
}

fn qwc_implies_fc(fast: bool) -> Result<(), String> {
    let mut r = rng(3);
    for _ in 0..count(fast, 2000) {
        let n = r.gen_range(1..=70);
        let (p, q) = (random_string(n, &mut r), random_string(n, &mut r));
        ensure!(!p.qwc_commutes(&q).unwrap() || p.fc_commutes(&q).unwrap(), "{p} {q}");
    }
    Ok(())
}

fn text_round_trip(fast: bool) -> Result<(), String> {
    let mut r = rng(4);
    for _ in 0..count(fast, 200) {
        let n = r.gen_range(1..=8);
        let k = r.gen_range(1..=12);
        let mut op = random_sum(n, k, &mut r);
        // Awkward magnitudes.
        let terms: Vec<_> = op
            .terms()
            .iter()
            .map(|(p, c)| (c * 10f64.powi(r.gen_range(-12..12)), p.clone()))
            .collect();
        op = varred::pauli::PauliSum::from_terms(n, terms).unwrap();
        let back = parse_pauli_sum(&op.to_text()).map_err(|e| e.to_string())?;
        ensure!(back.len() == op.len(), "term count changed");
        for (p, c) in op.terms() {
            let i = back.position(p).ok_or(format!("{p} lost"))?;
            ensure!(back.coefficient(i).to_bits() == c.to_bits(), "{p}: {c} became {}", back.coefficient(i));
        }
    }
    Ok(())
}

fn involution(fast: bool) -> Result<(), String> {
    let mut r = rng(5);
    for _ in 0..count(fast, 200) {
        let n = r.gen_range(1..=6);
        let psi = StateVector::random(n, &mut r);
        let p = random_string(n, &mut r);
        let twice = apply_pauli(&p, &apply_pauli(&p, &psi).unwrap()).unwrap();
        let err: f64 = twice
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        ensure!(err < 1e-12, "{p}: error {err}");
    }
    Ok(())
}

fn variational_bound(fast: bool) -> Result<(), String> {
    let mut r = rng(6);
    for _ in 0..count(fast, 8) {
        let n = r.gen_range(1..=4);
        let op = random_sum(n, r.gen_range(1..=10), &mut r);
        let e0 = ground_state(&op, &LanczosOptions::default()).map_err(|e| e.to_string())?.energy;
        ensure!((e0 - oracle::min_eigenvalue(&op)).abs() < 1e-7, "ground energy {e0} off");
        for _ in 0..100 {
            let psi = StateVector::random(n, &mut r);
            let e = pauli_sum_expectation(&psi, &op).unwrap();
            ensure!(e0 <= e + 1e-10, "{e} below ground energy {e0}");
        }
    }
    Ok(())
}

fn born_frequencies(fast: bool) -> Result<(), String> {
    let mut r = rng(7);
    let draws = if fast { 20_000 } else { 100_000 };
    for _ in 0..count(fast, 8) {
        let inst = random_instance(3, 5, 5, &mut r);
        let g = (0..inst.cover.len()).max_by_key(|&g| inst.cover.group(g).len()).unwrap();
        let group: Vec<PauliString> = inst.cover.group(g).iter().map(|&p| inst.op.string(p).clone()).collect();
        let expected = oracle::joint_outcomes(&inst.psi, &group);
        let mut counts = vec![0u64; expected.len()];
        for _ in 0..draws {
            let o = measure_group(&inst.psi, &group, &mut r).map_err(|e| e.to_string())?;
            let k = expected.iter().position(|(e, _)| *e == o).ok_or("unknown outcome")?;
            counts[k] += 1;
        }
        for ((o, p), &c) in expected.iter().zip(&counts) {
            let f = c as f64 / draws as f64;
            let sigma = (p.max(0.0) * (1.0 - p) / draws as f64).sqrt();
            ensure!((f - p).abs() <= 3.0 * sigma + 1e-9, "outcome {o:?}: frequency {f}, probability {p}");
        }
    }
    Ok(())
}

fn covariance_bounds(fast: bool) -> Result<(), String> {
    let mut r = rng(8);
    for _ in 0..count(fast, 100) {
        let inst = random_instance(4, 10, usize::MAX, &mut r);
        let t = CovarianceTable::build(&inst.psi, &inst.op, &inst.cover).map_err(|e| e.to_string())?;
        for g in inst.cover.groups() {
            for &p in g {
                for &q in g {
                    let (a, b) = (t.covariance(p, q).unwrap(), t.covariance(q, p).unwrap());
                    ensure!(a == b, "asymmetric");
                    ensure!(a.abs() <= 1.0 - t.mean(p) * t.mean(q) + 1e-10, "|cov| = {a} too large");
                }
            }
        }
    }
    Ok(())
}

/// Every maximal clique, by building the clique indicator over all subsets.
fn subset_maximal_cliques(g: &CommutationGraph) -> BTreeSet<Vec<usize>> {
    let n = g.num_vertices();
    let adj: Vec<u32> = (0..n)
        .map(|u| (0..n).filter(|&v| g.adjacent(u, v)).fold(0u32, |m, v| m | 1 << v))
        .collect();
    let mut clique = vec![false; 1 << n];
    clique[0] = true;
    let mut out = BTreeSet::new();
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        clique[mask] = clique[rest] && (adj[low] as usize & rest) == rest;
    }
    for mask in 1usize..1 << n {
        if clique[mask] && (0..n).all(|v| mask >> v & 1 == 1 || !clique[mask | 1 << v]) {
            out.insert((0..n).filter(|&v| mask >> v & 1 == 1).collect());
        }
    }
    out
}

fn cliques_exhaustive(fast: bool) -> Result<(), String> {
    let mut r = rng(9);
    for _ in 0..count(fast, 60) {
        let n = r.gen_range(1..=6);
        let op = random_sum(n, r.gen_range(1..=20), &mut r);
        for mode in [Mode::Qwc, Mode::Fc] {
            let g = CommutationGraph::build(&op, mode);
            let found = g.maximal_cliques(1_000_000);
            ensure!(!found.truncated, "truncated");
            let set: BTreeSet<Vec<usize>> = found.cliques.iter().cloned().collect();
            ensure!(set.len() == found.cliques.len(), "duplicate clique");
            ensure!(set == subset_maximal_cliques(&g), "clique sets differ ({mode})");
        }
    }
    Ok(())
}

fn qwc_subset_fc(fast: bool) -> Result<(), String> {
    let mut r = rng(10);
    for _ in 0..count(fast, 100) {
        let op = random_sum(r.gen_range(1..=6), r.gen_range(1..=30), &mut r);
        let (q, f) = (CommutationGraph::build(&op, Mode::Qwc), CommutationGraph::build(&op, Mode::Fc));
        for u in 0..op.len() {
            let (nq, nf) = (q.neighbors(u), f.neighbors(u));
            ensure!(nq.is_subset(nf), "vertex {u}");
        }
    }
    Ok(())
}

fn all_covers(g: &CommutationGraph, op: &varred::pauli::PauliSum) -> Result<Vec<(&'static str, GroupCover)>, String> {
    let e = |x: varred::Error| x.to_string();
    let cliques = g.maximal_cliques(1_000_000);
    let n = g.num_vertices();
    let opts = |pricing| ColumnGenerationOptions {
        pricing,
        time_budget: Duration::from_secs(30),
    };
    Ok(vec![
        ("ldf", ldf_cover(g)),
        ("rlf", rlf_cover(g)),
        ("gsc", greedy_set_cover(&cliques, n, g.mode()).map_err(e)?),
        ("ilp", exact_set_cover(&cliques, n, g.mode(), Duration::from_secs(30)).map_err(e)?.cover),
        ("cg", column_generation_cover(g, &opts(Pricing::Greedy)).map_err(e)?),
        ("cg-exact", column_generation_cover(g, &opts(Pricing::Exact)).map_err(e)?),
        ("cg-hybrid", column_generation_cover(g, &opts(Pricing::Hybrid)).map_err(e)?),
        ("ldvf", ldvf_cover(g, op).map_err(e)?),
        ("lvf", lvf_cover(g, op).map_err(e)?),
    ])
}

fn covers_valid(fast: bool) -> Result<(), String> {
    let mut r = rng(11);
    for _ in 0..count(fast, 40) {
        let op = random_sum(r.gen_range(1..=4), r.gen_range(1..=14), &mut r);
        for mode in [Mode::Qwc, Mode::Fc] {
            let g = CommutationGraph::build(&op, mode);
            for (name, c) in all_covers(&g, &op)? {
                c.validate(&g).map_err(|e| format!("{name}: {e}"))?;
                if ["ldf", "rlf", "ldvf", "lvf"].contains(&name) {
                    ensure!(c.is_partition(), "{name} overlaps");
                }
            }
        }
    }
    Ok(())
}

fn exact_beats_heuristics(fast: bool) -> Result<(), String> {
    let mut r = rng(12);
    for _ in 0..count(fast, 40) {
        let op = random_sum(r.gen_range(2..=4), r.gen_range(4..=14), &mut r);
        for mode in [Mode::Qwc, Mode::Fc] {
            let g = CommutationGraph::build(&op, mode);
            let cliques = g.maximal_cliques(1_000_000);
            let exact = exact_set_cover(&cliques, op.len(), mode, Duration::from_secs(30)).map_err(|e| e.to_string())?;
            ensure!(exact.optimal, "exact search timed out");
            for (name, c) in all_covers(&g, &op)? {
                ensure!(exact.cover.len() <= c.len(), "{name} has {} < {} groups", c.len(), exact.cover.len());
            }
        }
    }
    Ok(())
}

fn covers_deterministic(fast: bool) -> Result<(), String> {
    let mut r = rng(13);
    for _ in 0..count(fast, 20) {
        let op = random_sum(r.gen_range(1..=4), r.gen_range(1..=14), &mut r);
        for mode in [Mode::Qwc, Mode::Fc] {
            let g = CommutationGraph::build(&op, mode);
            let a: Vec<_> = all_covers(&g, &op)?.into_iter().map(|(_, c)| c.groups().to_vec()).collect();
            let b: Vec<_> = all_covers(&g, &op)?.into_iter().map(|(_, c)| c.groups().to_vec()).collect();
            ensure!(a == b, "covers differ between runs");
        }
    }
    Ok(())
}

fn placement_argmin(fast: bool) -> Result<(), String> {
    let mut r = rng(14);
    for _ in 0..count(fast, 40) {
        let op = random_sum(r.gen_range(1..=4), r.gen_range(1..=14), &mut r);
        let coeffs = op.coefficients();
        for mode in [Mode::Qwc, Mode::Fc] {
            let g = CommutationGraph::build(&op, mode);
            for lvf in [false, true] {
                let (steps, final_groups) = placement_trace(&g, &op, lvf).map_err(|e| e.to_string())?;
                let mut groups: Vec<Vec<usize>> = Vec::new();
                for s in &steps {
                    let best = s.alternatives.iter().copied().fold(f64::INFINITY, f64::min);
                    ensure!(s.proxy <= best + 1e-12, "step proxy {} above alternative {best}", s.proxy);
                    match s.group {
                        Some(k) => groups[k].push(s.vertex),
                        None => groups.push(vec![s.vertex]),
                    }
                    let recomputed = variance_proxy(&groups, &coeffs).map_err(|e| e.to_string())?;
                    ensure!(close(recomputed, s.proxy, 1e-12), "proxy {} vs recomputed {recomputed}", s.proxy);
                }
                ensure!(groups == final_groups, "replayed groups differ");
            }
        }
    }
    Ok(())
}

fn maximalize_props(fast: bool) -> Result<(), String> {
    let mut r = rng(15);
    for _ in 0..count(fast, 60) {
        let op = random_sum(r.gen_range(1..=4), r.gen_range(1..=14), &mut r);
        for mode in [Mode::Qwc, Mode::Fc] {
            let g = CommutationGraph::build(&op, mode);
            let src = if r.gen_bool(0.5) { ldf_cover(&g) } else { rlf_cover(&g) };
            let m = maximalize(&src, &g).map_err(|e| e.to_string())?;
            m.validate(&g).map_err(|e| e.to_string())?;
            for s in src.groups() {
                ensure!(m.groups().iter().any(|t| s.iter().all(|v| t.contains(v))), "group {s:?} lost vertices");
            }
            for t in m.groups() {
                for v in 0..g.num_vertices() {
                    if !t.contains(&v) {
                        let mut ext = t.clone();
                        ext.push(v);
                        ensure!(!g.is_clique(&ext), "{t:?} extends by {v}");
                    }
                }
            }
            ensure!(maximalize(&m, &g).unwrap().groups() == m.groups(), "not idempotent");
        }
    }
    Ok(())
}

fn cliffordize_contains(fast: bool) -> Result<(), String> {
    let mut r = rng(16);
    for _ in 0..count(fast, 60) {
        let op = random_sum(r.gen_range(1..=4), r.gen_range(1..=14), &mut r);
        let q = CommutationGraph::build(&op, Mode::Qwc);
        let f = CommutationGraph::build(&op, Mode::Fc);
        let src = ldf_cover(&q);
        let c = cliffordize(&src, &f).map_err(|e| e.to_string())?;
        c.validate(&f).map_err(|e| e.to_string())?;
        ensure!(c.mode() == Mode::Fc, "mode not fc");
        for s in src.groups() {
            ensure!(c.groups().iter().any(|t| s.iter().all(|v| t.contains(v))), "no superset of {s:?}");
        }
    }
    Ok(())
}

fn random_overlapping(r: &mut impl Rng) -> (varred::pauli::PauliSum, GroupCover) {
    let op = random_sum(r.gen_range(2..=4), r.gen_range(3..=14), r);
    let mode = if r.gen_bool(0.5) { Mode::Qwc } else { Mode::Fc };
    let g = CommutationGraph::build(&op, mode);
    let cover = maximalize(&ldf_cover(&g), &g).unwrap();
    (op, cover)
}

fn optimizer_monotone(fast: bool) -> Result<(), String> {
    let mut r = rng(17);
    for _ in 0..count(fast, 40) {
        let (op, cover) = random_overlapping(&mut r);
        let coeffs = op.coefficients();
        let w: Vec<f64> = (0..op.len()).map(|_| r.gen_range(0.1..1.0)).collect();
        for weights in [None, Some(&w[..])] {
            let o = optimize_distribution(&cover, &coeffs, weights, None, &OptimizeOptions::default())
                .map_err(|e| e.to_string())?;
            ensure!(o.history.windows(2).all(|h| h[1] <= h[0]), "objective increased");
            ensure!(o.objective <= o.initial_objective, "worse than the start");
            ensure!(!o.converged || o.certificate_gap <= 1e-6, "gap {} after convergence", o.certificate_gap);
        }
    }
    Ok(())
}

fn random_distribution(cover: &GroupCover, r: &mut impl Rng) -> Distribution {
    let w: Vec<f64> = cover.groups().iter().map(|_| r.gen_range(0.05..1.0)).collect();
    Distribution::from_weights(cover, &w).unwrap()
}

fn objective_identity(fast: bool) -> Result<(), String> {
    let mut r = rng(18);
    for _ in 0..count(fast, 200) {
        let (op, cover) = random_overlapping(&mut r);
        let coeffs = op.coefficients();
        let w: Vec<f64> = (0..op.len()).map(|_| r.gen_range(0.0..1.0)).collect();
        let pi = random_distribution(&cover, &mut r);
        for weights in [None, Some(&w[..])] {
            let a = objective(&cover, &coeffs, weights, &pi).unwrap();
            let b = objective_by_group(&cover, &coeffs, weights, &pi).unwrap();
            ensure!(close(a, b, 1e-12), "{a} vs {b}");
        }
    }
    Ok(())
}

fn disjoint_fixed_point(fast: bool) -> Result<(), String> {
    let mut r = rng(19);
    for _ in 0..count(fast, 40) {
        let op = random_sum(r.gen_range(2..=4), r.gen_range(2..=14), &mut r);
        let g = CommutationGraph::build(&op, Mode::Qwc);
        let cover = ldf_cover(&g);
        let coeffs = op.coefficients();
        let l2 = l2_distribution(&cover, &coeffs).unwrap();
        ensure!(certificate_gap(&cover, &coeffs, None, &l2).unwrap() <= 1e-10, "l2 not stationary");
        let start = uniform_distribution(&cover).unwrap();
        let o = optimize_distribution(&cover, &coeffs, None, Some(&start), &OptimizeOptions::default())
            .map_err(|e| e.to_string())?;
        for (a, b) in o.distribution.pi().iter().zip(l2.pi()) {
            ensure!((a - b).abs() <= 1e-8, "optimum {a} vs closed form {b}");
        }
    }
    Ok(())
}

fn clt_monotone(fast: bool) -> Result<(), String> {
    let mut r = rng(20);
    for _ in 0..count(fast, 2000) {
        let v: f64 = r.gen_range(0.0..5.0);
        let e: f64 = r.gen_range(1e-3..1e-1);
        let d = r.gen_range(0.01..0.5);
        let base = clt_shots(v, e, d).unwrap();
        ensure!(clt_shots(v * 1.01 + 1e-9, e, d).unwrap() >= base, "not monotone in variance");
        ensure!(clt_shots(v, e * 0.99, d).unwrap() >= base, "not monotone in 1/eps^2");
    }
    Ok(())
}

fn table(inst: &Instance) -> CovarianceTable {
    CovarianceTable::build(&inst.psi, &inst.op, &inst.cover).unwrap()
}

fn random_allocation(cover: &GroupCover, r: &mut impl Rng) -> Allocation {
    Allocation::new(cover.groups().iter().map(|_| r.gen_range(1..=5)).collect())
}

fn variances_nonnegative(fast: bool) -> Result<(), String> {
    let mut r = rng(21);
    for _ in 0..count(fast, 100) {
        let inst = random_instance(4, 10, usize::MAX, &mut r);
        let t = table(&inst);
        let pi = random_distribution(&inst.cover, &mut r);
        let v = ht_variance(&inst.cover, &pi, &inst.op, &t).unwrap();
        ensure!(v >= -1e-10, "ht variance {v}");
        let alloc = random_allocation(&inst.cover, &mut r);
        let d = det_variance(&inst.cover, &alloc, &inst.op, &t, false).unwrap();
        ensure!(d >= -1e-10, "det variance {d}");
    }
    Ok(())
}

fn partition_formula(fast: bool) -> Result<(), String> {
    let mut r = rng(22);
    let mut checked = 0;
    while checked < count(fast, 100) {
        let inst = random_instance(4, 10, usize::MAX, &mut r);
        if !inst.cover.is_partition() {
            continue;
        }
        checked += 1;
        let t = table(&inst);
        let pi = random_distribution(&inst.cover, &mut r);
        let a = ht_variance(&inst.cover, &pi, &inst.op, &t).unwrap();
        let b = ht_variance_partition(&inst.cover, &pi, &inst.op, &t).unwrap();
        ensure!(close(a, b, 1e-12), "{a} vs {b}");
    }
    Ok(())
}

fn total_variance(fast: bool) -> Result<(), String> {
    let mut r = rng(23);
    for _ in 0..count(fast, 100) {
        let inst = random_instance(4, 10, usize::MAX, &mut r);
        let t = table(&inst);
        let pi = random_distribution(&inst.cover, &mut r);
        let v = ht_variance(&inst.cover, &pi, &inst.op, &t).unwrap();
        let (within, between) = ht_variance_decomposed(&inst.cover, &pi, &inst.op, &t).unwrap();
        ensure!(close(v, within + between, 1e-12), "{v} vs {within} + {between}");
    }
    Ok(())
}

fn ht_unbiased(fast: bool) -> Result<(), String> {
    let mut r = rng(24);
    let n_est = 10_000;
    for _ in 0..count(fast, 12) {
        let inst = random_instance(3, 6, usize::MAX, &mut r);
        let t = table(&inst);
        let pi = random_distribution(&inst.cover, &mut r);
        let var = ht_variance(&inst.cover, &pi, &inst.op, &t).unwrap();
        let truth = pauli_sum_expectation(&inst.psi, &inst.op).unwrap();
        let cfg = ExperimentConfig {
            scheme: Scheme::Randomized { cover: inst.cover.clone(), pi },
            shots: 1,
            repetitions: n_est,
            truth,
            epsilon: 0.0016,
            seed: r.gen(),
            sampling: SamplingMode::PerShot,
        };
        let est = run_ht_experiment(&cfg, &inst.op, &inst.psi).map_err(|e| e.to_string())?;
        let m = mean(&est);
        let bound = 4.0 * (var / n_est as f64).sqrt() + 1e-12;
        ensure!((m - truth).abs() <= bound, "mean {m}, truth {truth}, bound {bound}");
    }
    Ok(())
}

/// Compares exact variances to enumeration on instances of at most three
/// qubits, six terms and three groups. Returns the largest deviation.
pub fn oracle_sweep(instances: usize, seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let inst = random_instance(3, 6, 3, &mut r);
        let t = table(&inst);
        let pi = random_distribution(&inst.cover, &mut r);
        let a = ht_variance(&inst.cover, &pi, &inst.op, &t).unwrap();
        let b = oracle::ht_variance(&inst.cover, &pi, &inst.op, &inst.psi);
        let alloc = random_allocation(&inst.cover, &mut r);
        let c = det_variance(&inst.cover, &alloc, &inst.op, &t, false).unwrap();
        let d = oracle::det_variance(&inst.cover, &alloc, &inst.op, &inst.psi);
        worst = worst.max((a - b).abs()).max((c - d).abs());
    }
    Ok(worst)
}

fn oracle_equivalence(fast: bool) -> Result<(), String> {
    let worst = oracle_sweep(count(fast, 100), 25)?;
    ensure!(worst <= 1e-10, "largest deviation {worst}");
    Ok(())
}

/// Seeded Proposition-style check `det ≤ ht(counting)/M`. Returns the number
/// of instances where it holds.
pub fn proposition_sweep(instances: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    (0..instances)
        .filter(|_| {
            let inst = random_instance(3, 6, usize::MAX, &mut r);
            let t = table(&inst);
            let alloc = random_allocation(&inst.cover, &mut r);
            varred::variance::proposition1_check(&inst.cover, &alloc, &inst.op, &t)
                .map(|c| c.holds)
                .unwrap_or(false)
        })
        .count()
}

fn sim_instance(seed: u64) -> (Instance, Distribution) {
    let mut r = rng(seed);
    let inst = random_instance(3, 6, usize::MAX, &mut r);
    let pi = counting_distribution(&inst.cover).unwrap();
    (inst, pi)
}

fn sim_deterministic(_fast: bool) -> Result<(), String> {
    let (inst, pi) = sim_instance(26);
    for sampling in [SamplingMode::Aggregated, SamplingMode::PerShot] {
        let cfg = ExperimentConfig {
            scheme: Scheme::Randomized { cover: inst.cover.clone(), pi: pi.clone() },
            shots: 200,
            repetitions: 64,
            truth: 0.0,
            epsilon: 0.0016,
            seed: 99,
            sampling,
        };
        let a = run_ht_experiment(&cfg, &inst.op, &inst.psi).map_err(|e| e.to_string())?;
        let b = run_ht_experiment(&cfg, &inst.op, &inst.psi).map_err(|e| e.to_string())?;
        ensure!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "{sampling:?} not reproducible");
    }
    Ok(())
}

fn sim_independent(fast: bool) -> Result<(), String> {
    for seed in 0..count(fast, 8) as u64 {
        let (inst, pi) = sim_instance(100 + seed);
        let t = table(&inst);
        let var = ht_variance(&inst.cover, &pi, &inst.op, &t).unwrap();
        let truth = pauli_sum_expectation(&inst.psi, &inst.op).unwrap();
        let (m, reps) = (500u64, 2000usize);
        let cfg = ExperimentConfig {
            scheme: Scheme::Randomized { cover: inst.cover.clone(), pi },
            shots: m,
            repetitions: reps,
            truth,
            epsilon: 0.0016,
            seed,
            sampling: SamplingMode::Aggregated,
        };
        let est = run_ht_experiment(&cfg, &inst.op, &inst.psi).map_err(|e| e.to_string())?;
        let rho = lag1_autocorrelation(&est);
        ensure!(rho.abs() < 4.0 / (reps as f64).sqrt(), "lag-1 autocorrelation {rho}");
        let bound = 4.0 * (var / (m as f64 * reps as f64)).sqrt() + 1e-12;
        ensure!((mean(&est) - truth).abs() <= bound, "mean off by more than {bound}");
    }
    Ok(())
}
