//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use trifree::bounds::{trinomial_pmf, trinomial_term};
use trifree::cut::{max_cut, Partition};
use trifree::extremal::{
    e2_indicator, event_e1, event_e2, is_k_partite, max_clique_free, perturbation_event,
    SolverLimits,
};
use trifree::harness::{emit, run_experiment, ExperimentKind, ExperimentSpec, Format, Summary};
use trifree::lattice::{
    compare, fkg_check, graph_at, join, log_supermodularity_defect, meet, monotonicity_audit,
    Direction, PartitionOrderContext, ProductMeasure, Relation,
};
use trifree::{Edge, EdgeSet, Graph, VertexSet};

type Outcome = Result<String, String>;

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    if took < limit {
        Ok(format!("{detail}; {:.2}s", took.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}; took {:.2}s, limit {}s",
            took.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mantel() -> Outcome {
    let start = Instant::now();
    for n in 3..=10 {
        let sol = max_clique_free(&Graph::complete(n), 3, 1, SolverLimits::default())
            .map_err(|e| e.to_string())?;
        ensure(sol.optimal && sol.t_value == n * n / 4, || {
            format!("K{n}: t = {}", sol.t_value)
        })?;
    }
    within(
        start,
        Duration::from_secs(30),
        "t(K_n) = floor(n^2/4) for n = 3..10".into(),
    )
}

fn c5() -> Outcome {
    let start = Instant::now();
    let g = Graph::cycle(5);
    let sol = max_clique_free(&g, 3, 100, SolverLimits::default()).map_err(|e| e.to_string())?;
    let b = max_cut(&g, 2).map_err(|e| e.to_string())?.b_value;
    let partite = is_k_partite(&g, 2).map_err(|e| e.to_string())?.is_partite();
    ensure(sol.t_value == 5, || format!("t = {}", sol.t_value))?;
    ensure(b == 4, || format!("b = {b}"))?;
    ensure(
        sol.witnesses == vec![g.edge_set()] && !sol.witnesses_truncated,
        || "witness is not C5 alone".into(),
    )?;
    ensure(!partite, || "C5 reported bipartite".into())?;
    within(
        start,
        Duration::from_secs(1),
        "t = 5, b = 4, unique witness C5, not bipartite".into(),
    )
}

fn cut_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0xC0);
    for k in 0..300 {
        let n = rng.gen_range(1..=12);
        let p = rng.gen_range(0.1..0.9);
        let g = random_graph(&mut rng, n, p);
        let b = max_cut(&g, 2).map_err(|e| e.to_string())?.b_value;
        let want = brute_max_cut(&g);
        ensure(b == want, || format!("graph {k}: {b} vs {want}"))?;
    }
    within(start, Duration::from_secs(60), "300 graphs, n <= 12".into())
}

fn extremal_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0xE1);
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(3..=9);
        let p = rng.gen_range(0.2..0.9);
        let g = random_graph(&mut rng, n, p);
        if g.m() > 16 {
            continue;
        }
        done += 1;
        let (t, witnesses) = brute_clique_free(&g, 3);
        let sol = max_clique_free(&g, 3, 1_000_000, SolverLimits::default())
            .map_err(|e| e.to_string())?;
        let listed: BTreeSet<BTreeSet<Pair>> = sol.witnesses.iter().map(pairs_of).collect();
        ensure(sol.optimal && sol.t_value == t, || {
            format!("graph {done}: t {} vs {t}", sol.t_value)
        })?;
        ensure(listed == witnesses, || {
            format!("graph {done}: witness sets differ")
        })?;
    }
    within(
        start,
        Duration::from_secs(120),
        "100 graphs, m <= 16, t and witness sets".into(),
    )
}

fn perturbation() -> Outcome {
    let mut rng = rng(0x5E);
    let mut done = 0;
    while done < 200 {
        let n = rng.gen_range(3..=9);
        let p = rng.gen_range(0.2..0.8);
        let g = random_graph(&mut rng, n, p);
        let label = random_labels(&mut rng, n, 2);
        if cut_of(&edge_list(&g), &label) > 16 {
            continue;
        }
        done += 1;
        let s: EdgeSet = g
            .edges()
            .filter(|e| label[e.u() - 1] == label[e.v() - 1] && rng.gen_bool(0.5))
            .collect();
        let part = partition_from_labels(&label, 2);
        let (e, e2) = brute_events(&g, &label, &pairs_of(&s));
        let got = (
            perturbation_event(&g, &part, &s).map_err(|x| x.to_string())?,
            event_e2(&g, &part, &s).map_err(|x| x.to_string())?,
        );
        ensure(got == (e, e2), || {
            format!("instance {done}: {got:?} vs {:?}", (e, e2))
        })?;
    }
    Ok("200 instances with at most 16 cut edges".into())
}

/// All bipartitions of `1..=n` with vertex 1 in the first part.
fn bipartitions(n: usize) -> Vec<Partition> {
    (0..1u64 << (n - 1))
        .map(|k| {
            let a = VertexSet::from_mask(1 | k << 1);
            Partition::bipartition(n, a).unwrap()
        })
        .collect()
}

struct LatticeTally {
    triples: u64,
    violations: Vec<String>,
    worst_defect: f64,
}

fn check_triple(
    g: &Graph,
    h: &Graph,
    k: &Graph,
    ctx: &PartitionOrderContext,
    mu: &ProductMeasure,
    tally: &mut LatticeTally,
    exhaustive: Option<&[Graph]>,
) {
    tally.triples += 1;
    let mut fail = |what: &str| {
        if tally.violations.len() < 5 {
            tally.violations.push(format!("{what}: {g:?} {h:?} {k:?}"));
        }
    };
    let rel = |a: &Graph, b: &Graph| compare(a, b, ctx).unwrap();
    let le = |a: &Graph, b: &Graph| matches!(rel(a, b), Relation::LessEqual | Relation::Equal);
    if rel(g, g) != Relation::Equal {
        fail("reflexivity");
    }
    if le(g, h) && le(h, g) && g != h {
        fail("antisymmetry");
    }
    if le(g, h) && le(h, k) && !le(g, k) {
        fail("transitivity");
    }
    let flipped = match rel(h, g) {
        Relation::LessEqual => Relation::GreaterEqual,
        Relation::GreaterEqual => Relation::LessEqual,
        r => r,
    };
    if rel(g, h) != flipped {
        fail("converse");
    }
    let up = join(g, h, ctx).unwrap();
    let down = meet(g, h, ctx).unwrap();
    if !(le(g, &up) && le(h, &up) && le(&down, g) && le(&down, h)) {
        fail("bounds");
    }
    let uppers: Vec<&Graph> = match exhaustive {
        Some(all) => all.iter().collect(),
        None => vec![k],
    };
    for x in uppers {
        if le(g, x) && le(h, x) && !le(&up, x) {
            fail("least upper bound");
        }
        if le(x, g) && le(x, h) && !le(x, &down) {
            fail("greatest lower bound");
        }
    }
    let left = meet(&up, k, ctx).unwrap();
    let right = join(&meet(g, k, ctx).unwrap(), &meet(h, k, ctx).unwrap(), ctx).unwrap();
    let left2 = join(&down, k, ctx).unwrap();
    let right2 = meet(&join(g, k, ctx).unwrap(), &join(h, k, ctx).unwrap(), ctx).unwrap();
    if left != right || left2 != right2 {
        fail("distributivity");
    }
    if up.m() + down.m() != g.m() + h.m() {
        fail("edge conservation");
    }
    let defect = log_supermodularity_defect(g, h, ctx, mu).unwrap().abs();
    tally.worst_defect = tally.worst_defect.max(defect);
    if defect >= 1e-10 {
        fail("log-supermodularity");
    }
}

fn lattice_laws() -> Outcome {
    let mut tally = LatticeTally {
        triples: 0,
        violations: Vec::new(),
        worst_defect: 0.0,
    };
    let mu3 = ProductMeasure::new(3, 0.3).unwrap();
    let all3: Vec<Graph> = (0..8).map(|i| graph_at(3, i)).collect();
    for part in bipartitions(3) {
        let ctx = PartitionOrderContext::new(part).unwrap();
        for g in &all3 {
            for h in &all3 {
                for k in &all3 {
                    check_triple(g, h, k, &ctx, &mu3, &mut tally, Some(&all3));
                }
            }
        }
    }
    let mut rng = rng(0x1A);
    let mu6 = ProductMeasure::new(6, 0.37).unwrap();
    for _ in 0..10_000 {
        let label = random_labels(&mut rng, 6, 2);
        let ctx = PartitionOrderContext::new(partition_from_labels(&label, 2)).unwrap();
        let [g, h, k] = [0; 3].map(|_| random_graph(&mut rng, 6, 0.5));
        check_triple(&g, &h, &k, &ctx, &mu6, &mut tally, None);
    }
    let detail = format!(
        "{} triples, max |log defect| {:.1e}",
        tally.triples, tally.worst_defect
    );
    if tally.violations.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", tally.violations.join("; ")))
    }
}

/// Pairs inside the parts of a bipartition.
fn inside_pairs(part: &Partition) -> Vec<Edge> {
    let n = part.n();
    (1..=n)
        .flat_map(|u| (u + 1..=n).map(move |v| Edge::new(u, v)))
        .filter(|e| part.same_part(e.u(), e.v()))
        .collect()
}

const E1_GRID: [(usize, usize); 9] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 1),
    (1, 2),
    (2, 0),
    (2, 1),
    (2, 2),
];

fn monotonicity() -> Outcome {
    let (mut audits, mut violations) = (0, 0);
    for part in bipartitions(4) {
        let ctx = PartitionOrderContext::new(part.clone()).unwrap();
        for e in inside_pairs(&part) {
            let s: EdgeSet = [e].into_iter().collect();
            let found = monotonicity_audit(
                |g| e2_indicator(g, &part, &s).unwrap(),
                Direction::Decreasing,
                &ctx,
            )
            .map_err(|x| x.to_string())?;
            audits += 1;
            violations += found.len();
        }
        for (r0, s0) in E1_GRID {
            let found = monotonicity_audit(
                |g| event_e1(g, &part, r0, s0).unwrap(),
                Direction::Increasing,
                &ctx,
            )
            .map_err(|x| x.to_string())?;
            audits += 1;
            violations += found.len();
        }
    }
    let detail = format!("{audits} audits, {violations} violations");
    if violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fkg() -> Outcome {
    let (mut checks, mut worst) = (0, f64::NEG_INFINITY);
    let mut failures = Vec::new();
    for p in [0.3, 0.5] {
        let mu = ProductMeasure::new(4, p).unwrap();
        for part in bipartitions(4) {
            for e in inside_pairs(&part) {
                let s: EdgeSet = [e].into_iter().collect();
                for (r0, s0) in E1_GRID {
                    let report = fkg_check(
                        &mu,
                        |g| event_e1(g, &part, r0, s0).unwrap(),
                        |g| e2_indicator(g, &part, &s).unwrap(),
                    )
                    .map_err(|x| x.to_string())?;
                    checks += 1;
                    worst = worst.max(report.lhs - report.rhs);
                    if report.lhs > report.rhs + 1e-12 {
                        failures.push(format!(
                            "p={p} {} S={e:?} r0={r0} s0={s0}",
                            part.to_compact()
                        ));
                    }
                }
            }
        }
    }
    let detail = format!("{checks} checks, max E[fg] - E[f]E[g] = {worst:.3e}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!(
            "{detail}; {} failures, first {}",
            failures.len(),
            failures[0]
        ))
    }
}

fn frequency(summary: &Summary, name: &str) -> Result<f64, String> {
    summary
        .frequencies
        .iter()
        .find(|f| f.name == name)
        .map(|f| f.conservative)
        .ok_or_else(|| format!("no frequency {name}"))
}

fn cut_window() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::BBoundsCheck, 40, 500, 9).with_m(200);
    let result = run_experiment(&spec).map_err(|e| e.to_string())?;
    let f = frequency(&result.summary, "b_within_bounds")?;
    let detail = format!(
        "fraction {f:.3} over 500 trials, {} censored",
        result.summary.censored
    );
    if f >= 0.95 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn t_equals_b() -> Outcome {
    let start = Instant::now();
    let spec = ExperimentSpec::new(ExperimentKind::TEqualsB, 12, 200, 10).with_p(0.7);
    let result = run_experiment(&spec).map_err(|e| e.to_string())?;
    let eq = frequency(&result.summary, "t_equals_b")?;
    let bip = frequency(&result.summary, "all_partite")?;
    let detail = format!(
        "t = b {eq:.3}, all bipartite {bip:.3}, {} censored",
        result.summary.censored
    );
    ensure(eq >= 0.8 && bip >= 0.8, || detail.clone())?;
    within(start, Duration::from_secs(600), detail)
}

fn distance_trend() -> Outcome {
    let n = 14;
    let mut means = Vec::new();
    let mut infeasible = Vec::new();
    for m in [40, 70, 100] {
        if m > n * (n - 1) / 2 {
            infeasible.push(m);
            continue;
        }
        let spec = ExperimentSpec::new(ExperimentKind::MaxcutUniqueness, n, 200, 11).with_m(m);
        let result = run_experiment(&spec).map_err(|e| e.to_string())?;
        for r in &result.records {
            let d = r.max_pairwise_optimal_dist.ok_or("missing distance")?;
            ensure(d <= n / 2, || {
                format!("M = {m}: distance {d} exceeds {}", n / 2)
            })?;
        }
        means.push((m, result.summary.means["max_pairwise_optimal_dist"]));
    }
    let shown: Vec<String> = means
        .iter()
        .map(|(m, d)| format!("M = {m}: {d:.3}"))
        .collect();
    let mut detail = format!("mean distances {}", shown.join(", "));
    let monotone = means.windows(2).all(|w| w[1].1 <= w[0].1);
    if !monotone {
        detail.push_str("; not non-increasing");
    }
    for m in &infeasible {
        detail.push_str(&format!(
            "; M = {m} exceeds C({n}, 2) = {}, no such graph exists",
            n * (n - 1) / 2
        ));
    }
    if monotone && infeasible.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn trinomial() -> Outcome {
    let factorial = |n: u64| (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let pow = |q: &BigRational, e: u64| (0..e).fold(BigRational::one(), |acc, _| acc * q);
    for n in 1..=12u64 {
        let mut exact = BigRational::from_integer(BigInt::from(0));
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n - i {
                let k = n - i - j;
                let c = factorial(n) / (factorial(i) * factorial(j) * factorial(k));
                exact += BigRational::from_integer(c) * pow(&quarter, i + j) * pow(&half, k);
                total += trinomial_pmf(n, i, j, 0.25, 0.25)
                    .map_err(|e| e.to_string())?
                    .0;
            }
        }
        ensure(exact.is_one(), || {
            format!("N = {n}: exact sum differs from 1")
        })?;
        ensure((total - 1.0).abs() < 1e-12, || {
            format!("N = {n}: sum {total}")
        })?;
    }
    let v = trinomial_term(4, 0.25, 0).map_err(|e| e.to_string())?.value;
    ensure(v == 0.1875, || format!("term(4, 1/4, 0) = {v}"))?;
    Ok("sums equal 1 for N <= 12, term(4, 1/4, 0) = 0.1875".into())
}

fn reproducibility() -> Outcome {
    let specs = [
        ExperimentSpec::new(ExperimentKind::TEqualsB, 9, 20, 13).with_p(0.6),
        ExperimentSpec::new(ExperimentKind::AllMaxTfreeBipartite, 8, 20, 13).with_p(0.5),
        ExperimentSpec::new(ExperimentKind::BBoundsCheck, 30, 20, 13).with_m(90),
        ExperimentSpec::new(ExperimentKind::BalanceCheck, 12, 20, 13).with_m(40),
        ExperimentSpec::new(ExperimentKind::NonedgeCheck, 12, 20, 13).with_m(40),
        ExperimentSpec::new(ExperimentKind::MaxcutUniqueness, 12, 20, 13).with_p(0.4),
        ExperimentSpec::new(ExperimentKind::GapDistanceSurvey, 12, 20, 13).with_p(0.4),
        ExperimentSpec::new(ExperimentKind::EvolutionOvertake, 12, 20, 13).with_m(30),
        ExperimentSpec::new(ExperimentKind::UniformTfreeBipartite, 8, 20, 13).with_m(8),
    ];
    for spec in &specs {
        let run = || {
            emit(
                &run_experiment(spec).map_err(|e| e.to_string())?,
                Format::Json,
            )
            .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a == b, || {
            format!("{:?} differs between runs", spec.experiment)
        })?;
    }
    Ok(format!(
        "{} experiment kinds rerun byte-identically",
        specs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("mantel identity", mantel),
        ("five-cycle obstruction", c5),
        ("max-cut oracle", cut_oracle),
        ("extremal oracle", extremal_oracle),
        ("perturbation events", perturbation),
        ("lattice laws", lattice_laws),
        ("monotonicity", monotonicity),
        ("fkg inequality", fkg),
        ("cut window trend", cut_window),
        ("t equals b trend", t_equals_b),
        ("optimal distance trend", distance_trend),
        ("trinomial normalization", trinomial),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
