//! Seeded Monte Carlo experiments over random graphs and their serialization.
//!
//! Trial `i` of an experiment draws every random choice from the stream
//! `RngSeed { master_seed, stream_index: i }`, so a spec fully determines its
//! output. Trials whose solver hit a budget are kept and marked censored.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::bounds;
use crate::cut::{self, Partition, MAX_EXACT_BIPARTITION_N};
use crate::extremal::{self, SolverLimits};
use crate::graph::{pairs, Graph};
use crate::randgen::{self, RngSeed, SampleError, REJECTION_MAX_N};

/// Embedded in every emitted document.
pub const SCHEMA_VERSION: &str = "trifree-experiment/1";

/// Column order of [`emit`] in CSV form. `detail` holds per-step or per-gap
/// data as a JSON array.
pub const CSV_HEADER: &[&str] = &[
    "stream_index",
    "master_seed",
    "status",
    "note",
    "n",
    "m",
    "b",
    "b_lower",
    "b_upper",
    "t",
    "t_equals_b",
    "all_partite",
    "indicator",
    "max_pairwise_optimal_dist",
    "optimal_count",
    "imbalance",
    "nonedges",
    "attempts",
    "detail",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("trial {stream_index}: {msg}")]
    Trial { stream_index: u64, msg: String },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::InvalidSpec(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TEqualsB,
    AllMaxTfreeBipartite,
    BBoundsCheck,
    BalanceCheck,
    NonedgeCheck,
    MaxcutUniqueness,
    GapDistanceSurvey,
    EvolutionOvertake,
    UniformTfreeBipartite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::TEqualsB,
        Self::AllMaxTfreeBipartite,
        Self::BBoundsCheck,
        Self::BalanceCheck,
        Self::NonedgeCheck,
        Self::MaxcutUniqueness,
        Self::GapDistanceSurvey,
        Self::EvolutionOvertake,
        Self::UniformTfreeBipartite,
    ];

    /// Name of the event stored in [`TrialRecord::indicator`].
    pub fn indicator_name(self) -> &'static str {
        match self {
            Self::TEqualsB => "t_equals_b",
            Self::AllMaxTfreeBipartite => "all_partite",
            Self::BBoundsCheck => "b_within_bounds",
            Self::BalanceCheck => "balanced_within_bound",
            Self::NonedgeCheck => "nonedges_above_bound",
            Self::MaxcutUniqueness => "unique_optimum",
            Self::GapDistanceSurvey => "far_near_optimal",
            Self::EvolutionOvertake => "overtaken",
            Self::UniformTfreeBipartite => "bipartite",
        }
    }

    fn needs_m(self) -> bool {
        matches!(
            self,
            Self::BBoundsCheck
                | Self::BalanceCheck
                | Self::NonedgeCheck
                | Self::EvolutionOvertake
                | Self::UniformTfreeBipartite
        )
    }
}

/// Solver effort limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub max_nodes: u64,
    pub witness_limit: usize,
    pub max_tries: u64,
    pub max_n: usize,
    pub max_m: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        let limits = SolverLimits::default();
        Self {
            max_nodes: limits.max_nodes,
            witness_limit: 1000,
            max_tries: 1_000_000,
            max_n: limits.max_n,
            max_m: limits.max_m,
        }
    }
}

/// Experiment-specific parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Knobs {
    /// Forbidden clique size; cuts use `l - 1` parts.
    pub l: usize,
    /// Gap bound `g` of the near-optimal survey.
    pub gap_bound: usize,
    /// Distance threshold for `far_near_optimal`.
    pub s0: Option<usize>,
    /// Gap allowance of the balance check.
    pub lambda: f64,
    /// Constant of the non-edge bound and the evolution sandwich.
    pub c_prime: f64,
    /// Numbers of random edges added in the evolution experiment.
    pub schedule: Vec<usize>,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            l: 3,
            gap_bound: 1,
            s0: None,
            lambda: 0.0,
            c_prime: bounds::DEFAULT_CONSTANT,
            schedule: vec![1, 2, 4, 8, 16],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(
        default,
        rename = "M",
        alias = "m",
        skip_serializing_if = "Option::is_none"
    )]
    pub m: Option<usize>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub knobs: Knobs,
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentKind, n: usize, trials: u64, master_seed: u64) -> Self {
        Self {
            experiment,
            n,
            p: None,
            m: None,
            trials,
            master_seed,
            budgets: Budgets::default(),
            knobs: Knobs::default(),
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self.m = None;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self.p = None;
        self
    }

    fn limits(&self) -> SolverLimits {
        SolverLimits {
            max_n: self.budgets.max_n,
            max_m: self.budgets.max_m,
            max_nodes: self.budgets.max_nodes,
        }
    }

    /// `M` if given, otherwise the expected edge count `p C(n,2)`.
    pub fn nominal_m(&self) -> f64 {
        match (self.m, self.p) {
            (Some(m), _) => m as f64,
            (None, Some(p)) => p * pairs(self.n) as f64,
            (None, None) => 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let kind = self.experiment;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        match (self.p, self.m) {
            (Some(_), Some(_)) | (None, None) => return Err(invalid("set exactly one of p and M")),
            (Some(p), None) if !(0.0..=1.0).contains(&p) => {
                return Err(invalid(format!("p = {p} outside [0, 1]")))
            }
            (None, Some(m)) if m > pairs(self.n) => {
                return Err(invalid(format!(
                    "M = {m} exceeds C({}, 2) = {}",
                    self.n,
                    pairs(self.n)
                )))
            }
            _ => {}
        }
        if kind.needs_m() && self.m.is_none() {
            return Err(invalid(format!("{kind:?} needs M")));
        }
        let b = &self.budgets;
        if b.max_nodes == 0
            || b.witness_limit == 0
            || b.max_tries == 0
            || b.max_n == 0
            || b.max_m == 0
        {
            return Err(invalid("budgets must be positive"));
        }
        let k = &self.knobs;
        let exact_cut_n = |parts: usize| {
            let ok = if parts == 2 {
                self.n <= MAX_EXACT_BIPARTITION_N
            } else {
                self.n as f64 * (parts as f64).log2() <= cut::MAX_EXACT_LOG2_ASSIGNMENTS
            };
            if ok {
                Ok(())
            } else {
                Err(invalid(format!(
                    "exact {parts}-cut of n = {} is beyond the solver limit",
                    self.n
                )))
            }
        };
        match kind {
            ExperimentKind::TEqualsB | ExperimentKind::AllMaxTfreeBipartite => {
                if k.l < 3 {
                    return Err(invalid("l must be at least 3"));
                }
                exact_cut_n(k.l - 1)?;
                let fits = self.n <= b.max_n || self.m.unwrap_or(pairs(self.n)) <= b.max_m;
                if !fits {
                    return Err(invalid(format!(
                        "n = {} exceeds max_n = {} and the edge count may exceed max_m = {}",
                        self.n, b.max_n, b.max_m
                    )));
                }
            }
            ExperimentKind::BBoundsCheck => {}
            ExperimentKind::BalanceCheck | ExperimentKind::NonedgeCheck => {
                exact_cut_n(2)?;
                if self.n < 2 || self.m == Some(0) {
                    return Err(invalid("needs n >= 2 and M >= 1"));
                }
                if !(k.lambda >= 0.0) || !(k.c_prime > 0.0) {
                    return Err(invalid("lambda must be non-negative and c_prime positive"));
                }
            }
            ExperimentKind::MaxcutUniqueness | ExperimentKind::GapDistanceSurvey => exact_cut_n(2)?,
            ExperimentKind::EvolutionOvertake => {
                exact_cut_n(2)?;
                let m = self.m.unwrap_or(0);
                if m == 0 || k.schedule.is_empty() {
                    return Err(invalid("evolution needs M >= 1 and a non-empty schedule"));
                }
                let most = k.schedule.iter().max().copied().unwrap_or(0);
                if m + most > pairs(self.n) {
                    return Err(invalid(format!("M + {most} exceeds C({}, 2)", self.n)));
                }
                if !(k.c_prime > 0.0) {
                    return Err(invalid("c_prime must be positive"));
                }
            }
            ExperimentKind::UniformTfreeBipartite => {
                if self.n > REJECTION_MAX_N {
                    return Err(invalid(format!(
                        "rejection sampling is limited to n <= {REJECTION_MAX_N}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Complete,
    Censored,
}

/// Near-optimal partitions at one gap value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapDistance {
    pub gap: usize,
    pub count: usize,
    pub max_dist: usize,
}

/// The graph after `t` random edges were added.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionStep {
    pub t: usize,
    pub b_after: usize,
    /// `b(G + t edges) - b(G)`.
    pub delta_b: usize,
    /// Growth of the canonical optimal bipartition of the starting graph.
    pub increase: usize,
    /// Some other bipartition is now strictly larger than that one.
    pub overtake: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: RngSeed,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_lower: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_upper: Option<usize>,
    /// Exact `t` when complete, the best lower bound when censored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_equals_b: Option<bool>,
    /// Every maximum `𝒦_ℓ`-free subgraph is `(ℓ−1)`-partite; unset when the
    /// witness list was cut short and no counterexample was seen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_partite: Option<bool>,
    /// The experiment's headline event, see [`ExperimentKind::indicator_name`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indicator: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pairwise_optimal_dist: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imbalance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonedges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gap_distance: Vec<GapDistance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evolution: Vec<EvolutionStep>,
}

impl TrialRecord {
    fn new(seed: RngSeed, g: &Graph) -> Self {
        Self {
            seed,
            status: TrialStatus::Complete,
            note: None,
            n: g.n(),
            m: g.m(),
            b: None,
            b_lower: None,
            b_upper: None,
            t: None,
            t_equals_b: None,
            all_partite: None,
            indicator: None,
            max_pairwise_optimal_dist: None,
            optimal_count: None,
            imbalance: None,
            nonedges: None,
            attempts: None,
            gap_distance: Vec::new(),
            evolution: Vec::new(),
        }
    }

    fn censor(&mut self, note: impl Into<String>) {
        self.status = TrialStatus::Censored;
        self.note = Some(note.into());
    }
}

/// A proportion with its 95% Wilson interval. Censored trials are excluded
/// from `estimate` and counted as failures in `conservative`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub name: String,
    pub successes: u64,
    pub determined: u64,
    pub censored: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wilson_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wilson_high: Option<f64>,
    pub conservative: f64,
}

/// Averages over complete trials for one schedule entry, next to the bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub t: usize,
    pub trials: u64,
    pub mean_delta_b: f64,
    pub mean_increase: f64,
    pub overtake_rate: f64,
    pub min_delta_per_edge: f64,
    pub max_delta_per_edge: f64,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub completed: u64,
    pub censored: u64,
    /// Some trial hit a budget.
    pub partial: bool,
    pub frequencies: Vec<Frequency>,
    pub means: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evolution: Vec<StepSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: String,
    pub spec: ExperimentSpec,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let z = Normal::standard().inverse_cdf(0.975);
    let (nf, p) = (n as f64, k as f64 / n as f64);
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

fn frequency(name: &str, values: impl Iterator<Item = Option<bool>>) -> Frequency {
    let (mut successes, mut determined, mut censored) = (0, 0, 0);
    for v in values {
        match v {
            Some(x) => {
                determined += 1;
                successes += x as u64;
            }
            None => censored += 1,
        }
    }
    let total = determined + censored;
    let interval = wilson_interval(successes, determined);
    Frequency {
        name: name.to_string(),
        successes,
        determined,
        censored,
        estimate: (determined > 0).then(|| successes as f64 / determined as f64),
        wilson_low: interval.map(|i| i.0),
        wilson_high: interval.map(|i| i.1),
        conservative: if total == 0 {
            0.0
        } else {
            successes as f64 / total as f64
        },
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0u64);
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Aggregates records; depends on nothing but the spec and the records.
pub fn summarize(spec: &ExperimentSpec, records: &[TrialRecord]) -> Summary {
    let censored = records
        .iter()
        .filter(|r| r.status == TrialStatus::Censored)
        .count() as u64;
    let kind = spec.experiment;
    let mut frequencies = Vec::new();
    if matches!(
        kind,
        ExperimentKind::TEqualsB | ExperimentKind::AllMaxTfreeBipartite
    ) {
        frequencies.push(frequency(
            "t_equals_b",
            records.iter().map(|r| r.t_equals_b),
        ));
        frequencies.push(frequency(
            "all_partite",
            records.iter().map(|r| r.all_partite),
        ));
    } else if kind != ExperimentKind::GapDistanceSurvey || spec.knobs.s0.is_some() {
        frequencies.push(frequency(
            kind.indicator_name(),
            records.iter().map(|r| r.indicator),
        ));
    }
    let complete: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| r.status == TrialStatus::Complete)
        .collect();
    let mut means = BTreeMap::new();
    let columns: [(&str, fn(&TrialRecord) -> Option<f64>); 9] = [
        ("m", |r| Some(r.m as f64)),
        ("b", |r| r.b.map(|x| x as f64)),
        ("t", |r| r.t.map(|x| x as f64)),
        ("max_pairwise_optimal_dist", |r| {
            r.max_pairwise_optimal_dist.map(|x| x as f64)
        }),
        ("optimal_count", |r| r.optimal_count.map(|x| x as f64)),
        ("imbalance", |r| r.imbalance),
        ("nonedges", |r| r.nonedges.map(|x| x as f64)),
        ("attempts", |r| r.attempts.map(|x| x as f64)),
        ("b_lower", |r| r.b_lower.map(|x| x as f64)),
    ];
    for (name, get) in columns {
        if let Some(v) = mean(complete.iter().filter_map(|r| get(r))) {
            means.insert(name.to_string(), v);
        }
    }
    let mut evolution = Vec::new();
    if kind == ExperimentKind::EvolutionOvertake {
        for (k, &t) in spec.knobs.schedule.iter().enumerate() {
            let steps: Vec<&EvolutionStep> =
                complete.iter().filter_map(|r| r.evolution.get(k)).collect();
            let sandwich = bounds::evolution_sandwich(
                spec.n as f64,
                spec.nominal_m(),
                t as f64,
                spec.knobs.c_prime,
            )
            .expect("validated spec");
            let per_edge = |s: &&EvolutionStep| {
                if t == 0 {
                    0.0
                } else {
                    s.delta_b as f64 / t as f64
                }
            };
            evolution.push(StepSummary {
                t,
                trials: steps.len() as u64,
                mean_delta_b: mean(steps.iter().map(|s| s.delta_b as f64)).unwrap_or(0.0),
                mean_increase: mean(steps.iter().map(|s| s.increase as f64)).unwrap_or(0.0),
                overtake_rate: mean(steps.iter().map(|s| s.overtake as u8 as f64)).unwrap_or(0.0),
                min_delta_per_edge: steps
                    .iter()
                    .map(per_edge)
                    .fold(f64::INFINITY, f64::min)
                    .min(1.0),
                max_delta_per_edge: steps.iter().map(per_edge).fold(0.0, f64::max),
                sandwich_lower: sandwich.extra["lower"],
                sandwich_upper: sandwich.extra["upper"],
            });
        }
    }
    Summary {
        trials: records.len() as u64,
        completed: records.len() as u64 - censored,
        censored,
        partial: censored > 0,
        frequencies,
        means,
        evolution,
    }
}

fn trial_error(seed: RngSeed, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Trial {
        stream_index: seed.stream_index,
        msg: e.to_string(),
    }
}

fn sample(spec: &ExperimentSpec, seed: RngSeed) -> Result<Graph, SampleError> {
    match (spec.p, spec.m) {
        (Some(p), _) => randgen::sample_gnp(spec.n, p, seed),
        (None, Some(m)) => randgen::sample_gnm(spec.n, m, seed),
        (None, None) => unreachable!("validated spec"),
    }
}

/// Runs one trial on stream `stream_index`.
pub fn run_trial(spec: &ExperimentSpec, stream_index: u64) -> Result<TrialRecord, HarnessError> {
    let seed = RngSeed::new(spec.master_seed, stream_index);
    let err = |e: &dyn std::fmt::Display| trial_error(seed, e);
    if spec.experiment == ExperimentKind::UniformTfreeBipartite {
        let m = spec.m.expect("validated spec");
        return match randgen::sample_uniform_triangle_free(spec.n, m, seed, spec.budgets.max_tries)
        {
            Ok(draw) => {
                let mut rec = TrialRecord::new(seed, &draw.graph);
                let verdict = extremal::is_k_partite(&draw.graph, 2).map_err(|e| err(&e))?;
                rec.indicator = Some(verdict.is_partite());
                rec.attempts = Some(draw.attempts);
                Ok(rec)
            }
            Err(SampleError::Exhausted { tries }) => {
                let mut rec = TrialRecord::new(seed, &Graph::empty(spec.n));
                rec.m = m;
                rec.attempts = Some(tries);
                rec.censor(format!("no triangle-free draw in {tries} attempts"));
                Ok(rec)
            }
            Err(e) => Err(err(&e)),
        };
    }
    let g = sample(spec, seed).map_err(|e| err(&e))?;
    let mut rec = TrialRecord::new(seed, &g);
    let n = g.n();
    match spec.experiment {
        ExperimentKind::TEqualsB | ExperimentKind::AllMaxTfreeBipartite => {
            let l = spec.knobs.l;
            let b = cut::max_cut(&g, l - 1).map_err(|e| err(&e))?.b_value;
            let sol = extremal::max_clique_free(&g, l, spec.budgets.witness_limit, spec.limits())
                .map_err(|e| err(&e))?;
            rec.b = Some(b);
            rec.t = Some(sol.t_value);
            if sol.optimal {
                rec.t_equals_b = Some(sol.t_value == b);
            } else {
                rec.censor(format!("node budget reached after {} nodes", sol.nodes));
            }
            rec.all_partite = if !sol.all_k_partite {
                Some(false)
            } else if sol.verdict_is_partial() {
                None
            } else {
                Some(true)
            };
            if sol.optimal && rec.all_partite.is_none() {
                rec.note = Some(format!("witness list truncated at {}", sol.witnesses.len()));
            }
            rec.indicator = if spec.experiment == ExperimentKind::TEqualsB {
                rec.t_equals_b
            } else {
                rec.all_partite
            };
        }
        ExperimentKind::BBoundsCheck => {
            let m = g.m() as f64;
            let (lo, hi) = (m / 2.0, m / 2.0 + (4.0 * n as f64 * m).sqrt());
            let (lower, upper) = if n <= MAX_EXACT_BIPARTITION_N {
                let b = cut::max_cut(&g, 2).map_err(|e| err(&e))?.b_value;
                rec.b = Some(b);
                (b, b)
            } else {
                let br = cut::cut_bracket(&g);
                (br.lower, br.upper)
            };
            rec.b_lower = Some(lower);
            rec.b_upper = Some(upper);
            let (lf, uf) = (lower as f64, upper as f64);
            rec.indicator = if lf >= lo && uf <= hi {
                Some(true)
            } else if uf < lo || lf > hi {
                Some(false)
            } else {
                None
            };
            if rec.indicator.is_none() {
                rec.censor(format!(
                    "bracket [{lower}, {upper}] straddles [{lo}, {hi:.3}]"
                ));
            }
        }
        ExperimentKind::BalanceCheck => {
            let lambda = spec.knobs.lambda;
            let survey =
                cut::enumerate_near_optimal(&g, lambda.floor() as usize, 2).map_err(|e| err(&e))?;
            let p = g.m() as f64 / pairs(n) as f64;
            let bound = bounds::balance_bound(n as f64, p, lambda)
                .map_err(|e| err(&e))?
                .value;
            let half = n as f64 / 2.0;
            let worst = survey
                .near_optimal
                .iter()
                .flat_map(|e| {
                    e.partition
                        .parts()
                        .iter()
                        .map(|x| (x.len() as f64 - half).abs())
                })
                .fold(0.0, f64::max);
            rec.b = Some(survey.b_value);
            rec.imbalance = Some(worst);
            rec.indicator = Some(worst <= bound);
        }
        ExperimentKind::NonedgeCheck => {
            let nonedges = cut::min_nonedges_optimal(&g).map_err(|e| err(&e))?;
            let bound = bounds::nonedge_bound(n as f64, g.m() as f64, spec.knobs.c_prime)
                .map_err(|e| err(&e))?;
            rec.nonedges = Some(nonedges);
            rec.indicator = Some(nonedges as f64 >= bound.value);
        }
        ExperimentKind::MaxcutUniqueness => {
            let survey = cut::enumerate_near_optimal(&g, 0, 2).map_err(|e| err(&e))?;
            let far = survey.max_pairwise_optimal_dist.expect("enumerated");
            rec.b = Some(survey.b_value);
            rec.max_pairwise_optimal_dist = Some(far);
            rec.optimal_count = Some(survey.optimal().count());
            rec.indicator = Some(far == 0);
        }
        ExperimentKind::GapDistanceSurvey => {
            let gb = spec.knobs.gap_bound;
            let survey = cut::enumerate_near_optimal(&g, gb, 2).map_err(|e| err(&e))?;
            rec.b = Some(survey.b_value);
            rec.max_pairwise_optimal_dist = survey.max_pairwise_optimal_dist;
            rec.optimal_count = Some(survey.optimal().count());
            rec.gap_distance = (0..=gb)
                .map(|gap| {
                    let at: Vec<usize> = survey
                        .near_optimal
                        .iter()
                        .filter(|e| e.gap == gap)
                        .map(|e| e.dist)
                        .collect();
                    GapDistance {
                        gap,
                        count: at.len(),
                        max_dist: at.iter().copied().max().unwrap_or(0),
                    }
                })
                .collect();
            if let Some(s0) = spec.knobs.s0 {
                rec.indicator = Some(
                    survey
                        .near_optimal
                        .iter()
                        .any(|e| e.gap == gb && e.dist >= s0),
                );
            }
        }
        ExperimentKind::EvolutionOvertake => {
            let survey = cut::max_cut(&g, 2).map_err(|e| err(&e))?;
            let star: &Partition = &survey.canonical;
            let b0 = survey.b_value;
            rec.b = Some(b0);
            for (k, &t) in spec.knobs.schedule.iter().enumerate() {
                let h = randgen::evolve(&g, t, seed.derive(k as u64)).map_err(|e| err(&e))?;
                let b1 = cut::max_cut(&h, 2).map_err(|e| err(&e))?.b_value;
                let star_after = cut::cut_size(&h, star).map_err(|e| err(&e))?;
                rec.evolution.push(EvolutionStep {
                    t,
                    b_after: b1,
                    delta_b: b1 - b0,
                    increase: star_after - b0,
                    overtake: b1 > star_after,
                });
            }
            rec.indicator = Some(rec.evolution.iter().any(|s| s.overtake));
        }
        ExperimentKind::UniformTfreeBipartite => unreachable!("handled above"),
    }
    Ok(rec)
}

/// Runs every trial in parallel; records come back in stream order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, HarnessError> {
    spec.validate()?;
    let records = (0..spec.trials)
        .into_par_iter()
        .map(|i| run_trial(spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(spec, &records);
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION.to_string(),
        spec: spec.clone(),
        records,
        summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (json or csv)")),
        }
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes results as pretty JSON or as CSV with [`CSV_HEADER`].
pub fn emit(result: &ExperimentResult, format: Format) -> Result<Vec<u8>, HarnessError> {
    let ser = |e: &dyn std::fmt::Display| HarnessError::Serialize(e.to_string());
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(result).map_err(|e| ser(&e))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).map_err(|e| ser(&e))?;
            for r in &result.records {
                let detail = if !r.evolution.is_empty() {
                    serde_json::to_string(&r.evolution).map_err(|e| ser(&e))?
                } else if !r.gap_distance.is_empty() {
                    serde_json::to_string(&r.gap_distance).map_err(|e| ser(&e))?
                } else {
                    String::new()
                };
                let status = match r.status {
                    TrialStatus::Complete => "complete",
                    TrialStatus::Censored => "censored",
                };
                w.write_record([
                    r.seed.stream_index.to_string(),
                    r.seed.master_seed.to_string(),
                    status.to_string(),
                    r.note.clone().unwrap_or_default(),
                    r.n.to_string(),
                    r.m.to_string(),
                    cell(r.b),
                    cell(r.b_lower),
                    cell(r.b_upper),
                    cell(r.t),
                    cell(r.t_equals_b),
                    cell(r.all_partite),
                    cell(r.indicator),
                    cell(r.max_pairwise_optimal_dist),
                    cell(r.optimal_count),
                    cell(r.imbalance),
                    cell(r.nonedges),
                    cell(r.attempts),
                    detail,
                ])
                .map_err(|e| ser(&e))?;
            }
            w.into_inner().map_err(|e| ser(&e))
        }
    }
}

/// Parses a JSON document produced by [`emit`].
pub fn parse_result(bytes: &[u8]) -> Result<ExperimentResult, HarnessError> {
    serde_json::from_slice(bytes).map_err(|e| HarnessError::Serialize(e.to_string()))
}
