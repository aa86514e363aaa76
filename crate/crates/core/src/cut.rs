//! Partitions, cut sizes, partition distance and exact maximum `ℓ`-cuts.
//!
//! Canonical order. A bipartition is identified by the part containing vertex
//! 1, read as the integer `Σ 2^(v-1)` over its members; bipartitions are ordered
//! by that integer, ascending. For `ℓ > 2` a partition is identified by its
//! vertex-to-part assignment with part labels renumbered by first occurrence
//! (a restricted growth string) and ordered lexicographically. The canonical
//! optimal partition is the first optimal one in this order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Vertex, VertexSet};

/// Exact bipartition solvers accept at most this many vertices.
pub const MAX_EXACT_BIPARTITION_N: usize = 28;
/// Exact `ℓ`-cut solvers (`ℓ > 2`) require `n · log2(ℓ)` at most this.
pub const MAX_EXACT_LOG2_ASSIGNMENTS: f64 = 28.0;
/// Below this size bipartitions are enumerated exhaustively instead of by
/// branch and bound.
pub const PLAIN_ENUMERATION_N: usize = 20;
/// Largest `ℓ` for which distances are minimised over all `ℓ!` relabelings.
pub const MAX_DISTANCE_PARTS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition covers {partition} vertices but the graph has {graph}")]
    SizeMismatch { graph: usize, partition: usize },
    #[error("partitions have {0} and {1} parts")]
    PartCountMismatch(usize, usize),
    #[error("operation needs a bipartition, got {0} parts")]
    NotBipartition(usize),
    #[error("exact {l}-cut of an {n}-vertex graph exceeds the enumeration limit")]
    TooLarge { n: usize, l: usize },
    #[error("distance over {0} parts exceeds the relabeling limit of {MAX_DISTANCE_PARTS}")]
    TooManyParts(usize),
    #[error("invalid quad: {0}")]
    InvalidQuad(String),
}

/// An ordered tuple of `ℓ >= 2` disjoint vertex sets covering `1..=n`.
/// Empty parts are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    n: usize,
    parts: Vec<VertexSet>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n: usize,
    parts: Vec<VertexSet>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = CutError;
    fn try_from(r: PartitionRepr) -> Result<Self, CutError> {
        Partition::new(r.n, r.parts)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            n: p.n,
            parts: p.parts,
        }
    }
}

impl Partition {
    pub fn new(n: usize, parts: Vec<VertexSet>) -> Result<Self, CutError> {
        if parts.len() < 2 {
            return Err(CutError::InvalidPartition(format!(
                "need at least 2 parts, got {}",
                parts.len()
            )));
        }
        let mut seen = VertexSet::new();
        for part in &parts {
            if !part.within(n) {
                return Err(CutError::InvalidPartition(format!(
                    "part {part:?} leaves 1..={n}"
                )));
            }
            if !seen.is_disjoint(part) {
                return Err(CutError::InvalidPartition(format!(
                    "part {part:?} overlaps another part"
                )));
            }
            seen = seen.union(part);
        }
        if seen.len() != n {
            return Err(CutError::InvalidPartition(format!(
                "parts cover {} of {n} vertices",
                seen.len()
            )));
        }
        Ok(Self { n, parts })
    }

    /// `(A, [n] \ A)`.
    pub fn bipartition(n: usize, a: VertexSet) -> Result<Self, CutError> {
        let b = VertexSet::full(n).difference(&a);
        Self::new(n, vec![a, b])
    }

    /// Builds a partition from a 0-based part label per vertex.
    pub fn from_assignment(assignment: &[usize], l: usize) -> Result<Self, CutError> {
        let mut parts = vec![VertexSet::new(); l];
        for (i, &p) in assignment.iter().enumerate() {
            if p >= l {
                return Err(CutError::InvalidPartition(format!(
                    "label {p} for vertex {} >= {l}",
                    i + 1
                )));
            }
            parts[p].insert(i + 1);
        }
        Self::new(assignment.len(), parts)
    }

    pub(crate) fn from_mask(n: usize, a: u64) -> Self {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self {
            n,
            parts: vec![VertexSet::from_mask(a), VertexSet::from_mask(full & !a)],
        }
    }

    /// Parses `"1,2|3,4"`; a part may be empty (`"1,2,3|"`). `n` is the largest
    /// vertex mentioned unless given.
    pub fn parse(text: &str, n: Option<usize>) -> Result<Self, CutError> {
        let mut parts = Vec::new();
        for chunk in text.split('|') {
            let mut part = VertexSet::new();
            for tok in chunk.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let v: Vertex = tok
                    .parse()
                    .map_err(|_| CutError::InvalidPartition(format!("bad vertex `{tok}`")))?;
                if v == 0 {
                    return Err(CutError::InvalidPartition("vertices are 1-indexed".into()));
                }
                part.insert(v);
            }
            parts.push(part);
        }
        let n = n.unwrap_or_else(|| {
            parts
                .iter()
                .filter_map(VertexSet::max_vertex)
                .max()
                .unwrap_or(0)
        });
        Self::new(n, parts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parts `ℓ`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &VertexSet {
        &self.parts[i]
    }

    /// 0-based part label of each vertex.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (i, part) in self.parts.iter().enumerate() {
            for v in part.iter() {
                out[v - 1] = i;
            }
        }
        out
    }

    pub fn part_of(&self, v: Vertex) -> usize {
        self.parts
            .iter()
            .position(|p| p.contains(v))
            .expect("vertex covered")
    }

    pub fn same_part(&self, u: Vertex, v: Vertex) -> bool {
        self.part_of(u) == self.part_of(v)
    }

    /// The same partition with its first two parts exchanged.
    pub fn swapped(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.swap(0, 1);
        Self { n: self.n, parts }
    }

    /// The part containing vertex 1 as a 0-based mask (bipartitions, `n <= 64`).
    pub(crate) fn canonical_mask(&self) -> Option<u64> {
        let first = self.part_of(1);
        self.parts[first].to_mask()
    }

    /// `"1,2|3"` rendering used by the CLI.
    pub fn to_compact(&self) -> String {
        self.parts
            .iter()
            .map(|p| {
                p.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }
}

fn check_sizes(g: &Graph, p: &Partition) -> Result<(), CutError> {
    if g.n() != p.n {
        return Err(CutError::SizeMismatch {
            graph: g.n(),
            partition: p.n,
        });
    }
    Ok(())
}

/// `|E(G; Π)|`: edges whose endpoints lie in different parts.
pub fn cut_size(g: &Graph, p: &Partition) -> Result<usize, CutError> {
    check_sizes(g, p)?;
    let inside: usize = p
        .parts
        .iter()
        .map(|part| g.edge_count(part, None).expect("in range"))
        .sum();
    Ok(g.m() - inside)
}

/// `dist(Π, Π′)`: the fewest vertices that must switch parts to turn one
/// partition into the other, minimised over relabelings of the parts.
pub fn partition_distance(a: &Partition, b: &Partition) -> Result<usize, CutError> {
    if a.n != b.n {
        return Err(CutError::SizeMismatch {
            graph: a.n,
            partition: b.n,
        });
    }
    let l = a.len();
    if l != b.len() {
        return Err(CutError::PartCountMismatch(l, b.len()));
    }
    if l > MAX_DISTANCE_PARTS {
        return Err(CutError::TooManyParts(l));
    }
    let overlap: Vec<Vec<usize>> = a
        .parts
        .iter()
        .map(|x| b.parts.iter().map(|y| x.intersection_len(y)).collect())
        .collect();
    if l == 2 {
        let keep = overlap[0][0] + overlap[1][1];
        let swap = overlap[0][1] + overlap[1][0];
        return Ok(keep.min(swap));
    }
    let mut used = vec![false; l];
    Ok(a.n - best_matching(&overlap, 0, &mut used))
}

fn best_matching(overlap: &[Vec<usize>], row: usize, used: &mut [bool]) -> usize {
    if row == overlap.len() {
        return 0;
    }
    let mut best = 0;
    for col in 0..used.len() {
        if !used[col] {
            used[col] = true;
            best = best.max(overlap[row][col] + best_matching(overlap, row + 1, used));
            used[col] = false;
        }
    }
    best
}

/// `Bal_n`: both parts within `n/100` of `n/2`. Partitions with an empty part
/// are never balanced.
pub fn is_balanced(p: &Partition, n: usize) -> Result<bool, CutError> {
    if p.len() != 2 {
        return Err(CutError::NotBipartition(p.len()));
    }
    if p.parts.iter().any(VertexSet::is_empty) {
        return Ok(false);
    }
    // ||X| - n/2| <= n/100  <=>  |100·(2|X| - n)| <= 2n
    Ok(p.parts
        .iter()
        .all(|x| (100 * (2 * x.len() as i64 - n as i64)).abs() <= 2 * n as i64))
}

/// One enumerated partition with its gap and distance to the canonical optimum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearOptimal {
    pub partition: Partition,
    pub gap: usize,
    pub dist: usize,
}

/// Maximum cut, canonical optimum, and optionally every partition within a
/// gap bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSurvey {
    pub l: usize,
    pub b_value: usize,
    pub canonical: Partition,
    pub near_optimal: Vec<NearOptimal>,
    pub gap_bound: usize,
    /// Largest distance between two optimal partitions; present after
    /// near-optimal enumeration.
    pub max_pairwise_optimal_dist: Option<usize>,
}

impl CutSurvey {
    /// The optimal partitions (gap 0) among the enumerated ones.
    pub fn optimal(&self) -> impl Iterator<Item = &Partition> {
        self.near_optimal
            .iter()
            .filter(|e| e.gap == 0)
            .map(|e| &e.partition)
    }
}

fn check_feasible(n: usize, l: usize) -> Result<(), CutError> {
    if l < 2 {
        return Err(CutError::InvalidPartition(format!(
            "need at least 2 parts, got {l}"
        )));
    }
    let ok = if l == 2 {
        n <= MAX_EXACT_BIPARTITION_N
    } else {
        n as f64 * (l as f64).log2() <= MAX_EXACT_LOG2_ASSIGNMENTS
    };
    if ok {
        Ok(())
    } else {
        Err(CutError::TooLarge { n, l })
    }
}

/// Every bipartition (as its vertex-1 mask) whose cut is at least `threshold`,
/// in ascending mask order.
pub(crate) fn bipartitions_with_cut_at_least(
    g: &Graph,
    threshold: usize,
) -> Result<Vec<(u64, usize)>, CutError> {
    check_feasible(g.n(), 2)?;
    let masks = g.masks().expect("feasible graphs are small");
    Ok(Bipartitions::new(&masks).at_least(threshold))
}

/// Exact maximum `ℓ`-cut `b(G)` with the canonical optimal partition.
pub fn max_cut(g: &Graph, l: usize) -> Result<CutSurvey, CutError> {
    check_feasible(g.n(), l)?;
    let masks = g.masks().expect("feasible graphs are small");
    let (b_value, canonical) = if l == 2 {
        let solver = Bipartitions::new(&masks);
        let (b, a) = if g.n() <= PLAIN_ENUMERATION_N {
            solver.best_plain()
        } else {
            solver.best_branch_and_bound()
        };
        (b, Partition::from_mask(g.n(), a))
    } else {
        let solver = Multicut::new(&masks, l);
        let (b, labels) = solver.best();
        (
            b,
            Partition::from_assignment(&labels, l).expect("valid labels"),
        )
    };
    debug_assert!(2 * b_value >= g.m());
    Ok(CutSurvey {
        l,
        b_value,
        canonical,
        near_optimal: Vec::new(),
        gap_bound: 0,
        max_pairwise_optimal_dist: None,
    })
}

/// `gap(G; Π) = b(G) − |E(G; Π)|`, with `b` taken over partitions with the
/// same number of parts as `Π`.
pub fn gap(g: &Graph, p: &Partition) -> Result<usize, CutError> {
    check_sizes(g, p)?;
    let b = max_cut(g, p.len())?.b_value;
    Ok(b - cut_size(g, p)?)
}

/// Every partition with gap at most `gap_bound`, in canonical order, each with
/// its distance to the canonical optimum.
pub fn enumerate_near_optimal(
    g: &Graph,
    gap_bound: usize,
    l: usize,
) -> Result<CutSurvey, CutError> {
    let mut survey = max_cut(g, l)?;
    let n = g.n();
    let masks = g.masks().expect("feasible graphs are small");
    let threshold = survey.b_value.saturating_sub(gap_bound);
    if l == 2 {
        let solver = Bipartitions::new(&masks);
        let star = survey.canonical.canonical_mask().expect("n <= 64");
        let found = solver.at_least(threshold);
        let mut optimal = Vec::new();
        for &(a, cut) in &found {
            let diff = (a ^ star).count_ones() as usize;
            survey.near_optimal.push(NearOptimal {
                partition: Partition::from_mask(n, a),
                gap: survey.b_value - cut,
                dist: diff.min(n - diff),
            });
            if cut == survey.b_value {
                optimal.push(a);
            }
        }
        survey.max_pairwise_optimal_dist = Some(max_pairwise_mask_distance(&optimal, n));
    } else {
        let solver = Multicut::new(&masks, l);
        let found = solver.at_least(threshold);
        let mut optimal = Vec::new();
        for (labels, cut) in found {
            let partition = Partition::from_assignment(&labels, l).expect("valid labels");
            let dist = partition_distance(&partition, &survey.canonical)?;
            if cut == survey.b_value {
                optimal.push(partition.clone());
            }
            survey.near_optimal.push(NearOptimal {
                partition,
                gap: survey.b_value - cut,
                dist,
            });
        }
        let mut best = 0;
        for (i, x) in optimal.iter().enumerate() {
            for y in &optimal[i + 1..] {
                best = best.max(partition_distance(x, y)?);
            }
        }
        survey.max_pairwise_optimal_dist = Some(best);
    }
    survey.gap_bound = gap_bound;
    Ok(survey)
}

fn max_pairwise_mask_distance(masks: &[u64], n: usize) -> usize {
    let mut best = 0;
    for (i, &x) in masks.iter().enumerate() {
        for &y in &masks[i + 1..] {
            let d = (x ^ y).count_ones() as usize;
            best = best.max(d.min(n - d));
            if best == n / 2 {
                return best;
            }
        }
    }
    best
}

/// `b̄B(G)`: the fewest non-edges across an optimal bipartition,
/// `min |A||B| − e(G; Π)`. Bipartitions with an empty part are skipped; on a
/// single vertex the result is 0.
pub fn min_nonedges_optimal(g: &Graph) -> Result<usize, CutError> {
    let survey = enumerate_near_optimal(g, 0, 2)?;
    let best = survey
        .optimal()
        .filter(|p| p.parts.iter().all(|x| !x.is_empty()))
        .map(|p| p.parts[0].len() * p.parts[1].len() - survey.b_value)
        .min();
    Ok(best.unwrap_or(0))
}

/// Lower and upper bounds on `b(G)` that need no exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutBracket {
    /// Size of a locally optimal bipartition (always at least `m/2`).
    pub lower: usize,
    /// `m` minus a greedy edge-disjoint triangle packing.
    pub upper: usize,
    pub witness: Partition,
}

/// Brackets `b(G)` for graphs beyond exact-solver scale.
pub fn cut_bracket(g: &Graph) -> CutBracket {
    let n = g.n();
    let mut side = vec![false; n + 1];
    let mut in_a = VertexSet::new();
    let mut in_b = VertexSet::new();
    for v in 1..=n {
        let to_a = g.degree_into(v, &in_a);
        let to_b = g.degree_into(v, &in_b);
        if to_a <= to_b && v != 1 {
            side[v] = true;
            in_b.insert(v);
        } else {
            in_a.insert(v);
        }
    }
    // single-vertex moves until no move gains
    loop {
        let mut moved = false;
        for v in 2..=n {
            let (own, other) = if side[v] {
                (&in_b, &in_a)
            } else {
                (&in_a, &in_b)
            };
            if g.degree_into(v, own) > g.degree_into(v, other) {
                if side[v] {
                    in_b.remove(v);
                    in_a.insert(v);
                } else {
                    in_a.remove(v);
                    in_b.insert(v);
                }
                side[v] = !side[v];
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let witness = Partition::new(n, vec![in_a, in_b]).expect("covering split");
    let lower = cut_size(g, &witness).expect("same size");
    let mut used = crate::graph::EdgeSet::new();
    let mut packed = 0;
    for tri in g.enumerate_cliques(3, usize::MAX).cliques {
        let vs: Vec<_> = tri.iter().collect();
        let es = [(vs[0], vs[1]), (vs[0], vs[2]), (vs[1], vs[2])].map(crate::graph::Edge::from);
        if es.iter().all(|e| !used.contains(e)) {
            es.into_iter().for_each(|e| {
                used.insert(e);
            });
            packed += 1;
        }
    }
    CutBracket {
        lower,
        upper: g.m() - packed,
        witness,
    }
}

/// Four disjoint vertex sets `(V₁, W₁, V₂, W₂)` covering `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedQuad {
    pub n: usize,
    pub sets: [VertexSet; 4],
}

impl OrderedQuad {
    pub fn new(n: usize, sets: [VertexSet; 4]) -> Result<Self, CutError> {
        let mut seen = VertexSet::new();
        for s in &sets {
            if !s.within(n) || !seen.is_disjoint(s) {
                return Err(CutError::InvalidQuad(format!(
                    "set {s:?} overlaps or leaves 1..={n}"
                )));
            }
            seen = seen.union(s);
        }
        if seen.len() != n {
            return Err(CutError::InvalidQuad(format!(
                "sets cover {} of {n} vertices",
                seen.len()
            )));
        }
        Ok(Self { n, sets })
    }

    /// `|Γ| = |V₁||W₁| + |V₂||W₂|`.
    pub fn size(&self) -> usize {
        self.sets[0].len() * self.sets[1].len() + self.sets[2].len() * self.sets[3].len()
    }
}

/// `ē(G; Γ) = |Γ| − e(G; V₁, W₁) − e(G; V₂, W₂)`.
pub fn non_edges_across(g: &Graph, quad: &OrderedQuad) -> Result<usize, CutError> {
    if quad.n != g.n() {
        return Err(CutError::SizeMismatch {
            graph: g.n(),
            partition: quad.n,
        });
    }
    let [v1, w1, v2, w2] = &quad.sets;
    let e1 = g.edge_count(v1, Some(w1)).expect("in range");
    let e2 = g.edge_count(v2, Some(w2)).expect("in range");
    Ok(quad.size() - e1 - e2)
}

/// The two quads derived from a bipartition `Π = (A, B)` and the optimum
/// `Π* = (A*, B*)` after relabeling so that `|A*| >= |B*|` and
/// `s = |A ∩ B*| + |A* ∩ B|` is at most `|A ∩ A*| + |B ∩ B*|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedQuads {
    pub gamma_x: OrderedQuad,
    pub gamma_y: OrderedQuad,
    pub s: usize,
}

pub fn derived_quads(p: &Partition, star: &Partition) -> Result<DerivedQuads, CutError> {
    if p.len() != 2 {
        return Err(CutError::NotBipartition(p.len()));
    }
    if star.len() != 2 {
        return Err(CutError::NotBipartition(star.len()));
    }
    if p.n != star.n {
        return Err(CutError::SizeMismatch {
            graph: star.n,
            partition: p.n,
        });
    }
    let (mut a_star, mut b_star) = (&star.parts[0], &star.parts[1]);
    if a_star.len() < b_star.len() {
        std::mem::swap(&mut a_star, &mut b_star);
    }
    let (mut a, mut b) = (&p.parts[0], &p.parts[1]);
    let moved =
        |a: &VertexSet, b: &VertexSet| a.intersection_len(b_star) + a_star.intersection_len(b);
    if moved(a, b) > a.intersection_len(a_star) + b.intersection_len(b_star) {
        std::mem::swap(&mut a, &mut b);
    }
    let s = moved(a, b);
    let n = p.n;
    let gamma_x = OrderedQuad::new(
        n,
        [
            a_star.intersection(b),
            a_star.intersection(a),
            b_star.intersection(a),
            b_star.intersection(b),
        ],
    )?;
    let gamma_y = OrderedQuad::new(
        n,
        [
            a_star.intersection(b),
            b_star.intersection(b),
            b_star.intersection(a),
            a_star.intersection(a),
        ],
    )?;
    Ok(DerivedQuads {
        gamma_x,
        gamma_y,
        s,
    })
}

/// Bitmask bipartition search; vertex 1 (bit 0) is always in the first part.
struct Bipartitions<'a> {
    adj: &'a [u64],
    n: usize,
    full: u64,
}

impl<'a> Bipartitions<'a> {
    fn new(adj: &'a [u64]) -> Self {
        let n = adj.len();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self { adj, n, full }
    }

    fn cut(&self, a: u64) -> usize {
        let b = self.full & !a;
        let mut rest = a;
        let mut total = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += (self.adj[v] & b).count_ones() as usize;
        }
        total
    }

    /// First maximum in ascending mask order by exhaustive enumeration.
    fn best_plain(&self) -> (usize, u64) {
        let mut best = (0, 1);
        for k in 0..1u64 << (self.n - 1) {
            let a = 1 | (k << 1);
            let c = self.cut(a);
            if c > best.0 {
                best = (c, a);
            }
        }
        best
    }

    fn best_branch_and_bound(&self) -> (usize, u64) {
        let mut best = self.cut(1);
        self.improve(self.n - 1, 1, 0, 0, &mut best);
        let first = self.at_least_first(best).expect("optimum is reachable");
        (best, first)
    }

    // Upper bound on any completion: edges already cut, plus for each
    // undecided vertex its better side among decided neighbours, plus every
    // edge among undecided vertices.
    fn bound(&self, next: usize, a: u64, b: u64, current: usize) -> usize {
        let free = if next == 0 { 0 } else { (1u64 << next) - 1 } & !1;
        let mut rest = free;
        let mut extra = 0;
        let mut inner = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            extra += (self.adj[v] & a)
                .count_ones()
                .max((self.adj[v] & b).count_ones()) as usize;
            inner += (self.adj[v] & free).count_ones() as usize;
        }
        current + extra + inner / 2
    }

    // Vertices are decided from the highest index down to index 1; vertex 0 is
    // fixed in `a`.
    fn improve(&self, next: usize, a: u64, b: u64, current: usize, best: &mut usize) {
        if next == 0 {
            *best = (*best).max(current);
            return;
        }
        if self.bound(next + 1, a, b, current) <= *best {
            return;
        }
        let v = next;
        let bit = 1u64 << v;
        let to_a = (self.adj[v] & a).count_ones() as usize;
        let to_b = (self.adj[v] & b).count_ones() as usize;
        // try the locally better side first
        if to_b >= to_a {
            self.improve(next - 1, a | bit, b, current + to_b, best);
            self.improve(next - 1, a, b | bit, current + to_a, best);
        } else {
            self.improve(next - 1, a, b | bit, current + to_a, best);
            self.improve(next - 1, a | bit, b, current + to_b, best);
        }
    }

    fn at_least_first(&self, threshold: usize) -> Option<u64> {
        let mut out = Vec::new();
        self.collect(self.n - 1, 1, 0, 0, threshold, &mut out, true);
        out.first().map(|&(a, _)| a)
    }

    /// All bipartitions with cut at least `threshold`, ascending by mask.
    fn at_least(&self, threshold: usize) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        if self.n <= PLAIN_ENUMERATION_N {
            for k in 0..1u64 << (self.n - 1) {
                let a = 1 | (k << 1);
                let c = self.cut(a);
                if c >= threshold {
                    out.push((a, c));
                }
            }
        } else {
            self.collect(self.n - 1, 1, 0, 0, threshold, &mut out, false);
        }
        out
    }

    // Deciding the highest vertex first with "not in A" tried before "in A"
    // visits masks in ascending numeric order.
    #[allow(clippy::too_many_arguments)]
    fn collect(
        &self,
        next: usize,
        a: u64,
        b: u64,
        current: usize,
        threshold: usize,
        out: &mut Vec<(u64, usize)>,
        first_only: bool,
    ) -> bool {
        if next == 0 {
            if current >= threshold {
                out.push((a, current));
                return first_only;
            }
            return false;
        }
        if self.bound(next + 1, a, b, current) < threshold {
            return false;
        }
        let bit = 1u64 << next;
        let to_a = (self.adj[next] & a).count_ones() as usize;
        let to_b = (self.adj[next] & b).count_ones() as usize;
        self.collect(
            next - 1,
            a,
            b | bit,
            current + to_a,
            threshold,
            out,
            first_only,
        ) || self.collect(
            next - 1,
            a | bit,
            b,
            current + to_b,
            threshold,
            out,
            first_only,
        )
    }
}

/// Restricted-growth-string search over `ℓ`-partitions.
struct Multicut<'a> {
    adj: &'a [u64],
    l: usize,
}

enum Goal {
    /// Keep the first strictly best assignment.
    Best(Option<(usize, Vec<usize>)>),
    /// Keep every assignment at or above the threshold.
    AtLeast(usize, Vec<(Vec<usize>, usize)>),
}

impl Goal {
    fn prune(&self, bound: usize) -> bool {
        match self {
            Goal::Best(Some((best, _))) => bound <= *best,
            Goal::Best(None) => false,
            Goal::AtLeast(th, _) => bound < *th,
        }
    }

    fn visit(&mut self, cut: usize, labels: &[usize]) {
        match self {
            Goal::Best(best) => {
                if best.as_ref().is_none_or(|(b, _)| cut > *b) {
                    *best = Some((cut, labels.to_vec()));
                }
            }
            Goal::AtLeast(th, out) => {
                if cut >= *th {
                    out.push((labels.to_vec(), cut));
                }
            }
        }
    }
}

impl<'a> Multicut<'a> {
    fn new(adj: &'a [u64], l: usize) -> Self {
        Self { adj, l }
    }

    fn run(&self, goal: &mut Goal) {
        let n = self.adj.len();
        let mut labels = vec![0; n];
        let mut parts = vec![0u64; self.l];
        self.search(0, 0, 0, &mut labels, &mut parts, goal);
    }

    fn best(&self) -> (usize, Vec<usize>) {
        let mut goal = Goal::Best(None);
        self.run(&mut goal);
        match goal {
            Goal::Best(Some(found)) => found,
            _ => unreachable!("at least one assignment exists"),
        }
    }

    fn at_least(&self, threshold: usize) -> Vec<(Vec<usize>, usize)> {
        let mut goal = Goal::AtLeast(threshold, Vec::new());
        self.run(&mut goal);
        match goal {
            Goal::AtLeast(_, out) => out,
            _ => unreachable!(),
        }
    }

    // `used` counts labels introduced so far; trying labels in increasing
    // order visits the strings lexicographically.
    fn search(
        &self,
        v: usize,
        used: usize,
        current: usize,
        labels: &mut [usize],
        parts: &mut [u64],
        goal: &mut Goal,
    ) {
        let n = self.adj.len();
        if v == n {
            goal.visit(current, labels);
            return;
        }
        let decided: u64 = parts.iter().fold(0, |acc, p| acc | p);
        let undecided = !decided & if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut bound = current;
        let mut rest = undecided;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            bound += (self.adj[u] & decided).count_ones() as usize;
            bound +=
                (self.adj[u] & undecided & !((2u64 << u).wrapping_sub(1))).count_ones() as usize;
        }
        if goal.prune(bound) {
            return;
        }
        let touching = (self.adj[v] & decided).count_ones() as usize;
        for label in 0..(used + 1).min(self.l) {
            let inside = (self.adj[v] & parts[label]).count_ones() as usize;
            labels[v] = label;
            parts[label] |= 1 << v;
            self.search(
                v + 1,
                used.max(label + 1),
                current + touching - inside,
                labels,
                parts,
                goal,
            );
            parts[label] &= !(1 << v);
        }
    }
}
