//! Maximum `𝒦_ℓ`-free subgraphs, perturbation events of a cut, and the
//! degree/chord/exceptional-set diagnostics built on top of them.
//!
//! `t(G)` is computed as `m − τ(G)` where `τ(G)` is the smallest set of edges
//! hitting every `ℓ`-clique. The search branches on an unhit clique with the
//! fewest deletable edges; the `i`-th child deletes the `i`-th edge and marks
//! the earlier ones permanent, so every hitting set is reached exactly once.
//! Greedy edge-disjoint packings of cliques give the lower bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cut::{self, CutError, Partition};
use crate::graph::{Edge, EdgeSet, Graph, Vertex, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtremalError {
    #[error("forbidden clique size must be at least 2, got {0}")]
    CliqueSize(usize),
    #[error("instance with n = {n}, m = {m} exceeds the exact solver limits")]
    TooLarge { n: usize, m: usize },
    #[error("colouring with k = {k} parts is limited to n <= {max}")]
    ColoringTooLarge { k: usize, max: usize },
    #[error("subgraph and host graph differ: {0}")]
    NotSubgraph(String),
    #[error("pair {0} is not inside a part of the partition")]
    NotInside(Edge),
    #[error("pair {0} is not an edge of the graph")]
    NotAnEdge(Edge),
    #[error("vertex sets overlap or leave the vertex range")]
    BadSets,
    #[error(
        "{0} candidate cliques exceed the exact packing limit of {MAX_EXACT_PACKING_CANDIDATES}"
    )]
    TooManyCandidates(usize),
    #[error("exhaustive partition scan is limited to n <= {MAX_E1_N}, got {0}")]
    E1TooLarge(usize),
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// Upper end of the exact packing search.
pub const MAX_EXACT_PACKING_CANDIDATES: usize = 5000;
/// `event_e1` scans every bipartition; this caps `n`.
pub const MAX_E1_N: usize = 18;
/// Exact `k`-colouring for `k >= 3` is limited to this many vertices.
pub const MAX_COLORING_N: usize = 20;

/// Admission and effort limits for [`max_clique_free`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverLimits {
    /// Instances are admitted when `n <= max_n` or `m <= max_m`.
    pub max_n: usize,
    pub max_m: usize,
    /// Search nodes before giving up with a non-optimal answer.
    pub max_nodes: u64,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            max_n: 16,
            max_m: 60,
            max_nodes: 20_000_000,
        }
    }
}

/// Edge masks are `u128`.
const MAX_EDGES: usize = 128;

/// Outcome of [`max_clique_free`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalSolution {
    pub l: usize,
    /// `t(G)` when `optimal`, otherwise the best lower bound found.
    pub t_value: usize,
    pub optimal: bool,
    pub witnesses: Vec<EdgeSet>,
    /// More maximum subgraphs exist than were listed (or the listing was cut
    /// short by the node budget).
    pub witnesses_truncated: bool,
    /// Whether every listed witness is `(ℓ−1)`-partite.
    pub all_k_partite: bool,
    /// A listed witness that is not `(ℓ−1)`-partite.
    pub non_partite_witness: Option<EdgeSet>,
    pub nodes: u64,
}

impl ExtremalSolution {
    /// The partite verdict covers only the listed witnesses.
    pub fn verdict_is_partial(&self) -> bool {
        self.witnesses_truncated || !self.optimal
    }
}

/// Maximum number of edges in a `𝒦_ℓ`-free subgraph, `Turán(q, ℓ−1)` edges
/// of `K_q`.
pub fn turan_edges(q: usize, parts: usize) -> usize {
    if parts == 0 {
        return 0;
    }
    let (base, extra) = (q / parts, q % parts);
    let sq = extra * (base + 1) * (base + 1) + (parts - extra) * base * base;
    (q * q - sq) / 2
}

struct EdgeIndex {
    n: usize,
    table: Vec<usize>,
    edges: Vec<Edge>,
}

impl EdgeIndex {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let edges: Vec<Edge> = g.edges().collect();
        let mut table = vec![usize::MAX; n * n];
        for (i, e) in edges.iter().enumerate() {
            table[(e.u() - 1) * n + e.v() - 1] = i;
            table[(e.v() - 1) * n + e.u() - 1] = i;
        }
        Self { n, table, edges }
    }

    fn get(&self, u: Vertex, v: Vertex) -> usize {
        self.table[(u - 1) * self.n + v - 1]
    }

    fn clique_mask(&self, clique: &VertexSet) -> u128 {
        let vs: Vec<_> = clique.iter().collect();
        let mut mask = 0u128;
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                mask |= 1 << self.get(u, v);
            }
        }
        mask
    }

    fn edge_set(&self, mask: u128) -> EdgeSet {
        bits(mask).map(|i| self.edges[i]).collect()
    }
}

fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let b = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(b)
    })
}

struct HittingSearch<'a> {
    cliques: &'a [u128],
    nodes: u64,
    max_nodes: u64,
    aborted: bool,
}

enum Scan {
    /// Every clique is already hit.
    Done,
    /// Some clique has no deletable edge left.
    Dead,
    Branch {
        free: u128,
        lower: usize,
    },
}

impl HittingSearch<'_> {
    fn scan(&self, present: u128, kept: u128) -> Scan {
        let mut used = 0u128;
        let mut lower = 0;
        let mut pick: Option<u128> = None;
        for &c in self.cliques {
            if c & present != c {
                continue;
            }
            let free = c & !kept;
            if free == 0 {
                return Scan::Dead;
            }
            if pick.is_none_or(|p| free.count_ones() < p.count_ones()) {
                pick = Some(free);
            }
            if free & used == 0 {
                used |= free;
                lower += 1;
            }
        }
        match pick {
            None => Scan::Done,
            Some(free) => Scan::Branch { free, lower },
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.aborted = true;
        }
        self.aborted
    }

    /// Smallest hitting set below `best.0`; `best.1` is the surviving edge mask.
    fn minimise(&mut self, present: u128, kept: u128, deleted: usize, best: &mut (usize, u128)) {
        if self.tick() {
            return;
        }
        match self.scan(present, kept) {
            Scan::Dead => {}
            Scan::Done => {
                if deleted < best.0 {
                    *best = (deleted, present);
                }
            }
            Scan::Branch { free, lower } => {
                if deleted + lower.max(1) >= best.0 {
                    return;
                }
                let mut keep = kept;
                for e in bits(free) {
                    self.minimise(present & !(1 << e), keep, deleted + 1, best);
                    keep |= 1 << e;
                }
            }
        }
    }

    /// Every hitting set of size exactly `target`, up to `limit` of them.
    /// Returns true when stopped by the limit.
    fn enumerate(
        &mut self,
        present: u128,
        kept: u128,
        deleted: usize,
        target: usize,
        limit: usize,
        out: &mut Vec<u128>,
    ) -> bool {
        if self.tick() {
            return true;
        }
        match self.scan(present, kept) {
            Scan::Dead => false,
            Scan::Done => {
                if deleted != target {
                    return false;
                }
                if out.len() == limit {
                    return true;
                }
                out.push(present);
                false
            }
            Scan::Branch { free, lower } => {
                if deleted + lower.max(1) > target {
                    return false;
                }
                let mut keep = kept;
                for e in bits(free) {
                    if self.enumerate(present & !(1 << e), keep, deleted + 1, target, limit, out) {
                        return true;
                    }
                    keep |= 1 << e;
                }
                false
            }
        }
    }
}

/// A good `(ℓ−1)`-partition used as the starting incumbent: exact when the cut
/// solver admits the instance, otherwise greedy.
fn starting_partition(g: &Graph, parts: usize) -> Partition {
    if let Ok(s) = cut::max_cut(g, parts) {
        return s.canonical;
    }
    if parts == 2 {
        return cut::cut_bracket(g).witness;
    }
    let mut labels = vec![0usize; g.n()];
    for v in 1..=g.n() {
        let mut clash = vec![0usize; parts];
        for u in g.neighbors(v).iter().filter(|&u| u < v) {
            clash[labels[u - 1]] += 1;
        }
        labels[v - 1] = (0..parts).min_by_key(|&i| clash[i]).expect("parts >= 1");
    }
    Partition::from_assignment(&labels, parts).expect("labels in range")
}

/// Exact maximum `𝒦_ℓ`-free subgraph with up to `witness_limit` witnesses.
pub fn max_clique_free(
    g: &Graph,
    l: usize,
    witness_limit: usize,
    limits: SolverLimits,
) -> Result<ExtremalSolution, ExtremalError> {
    if l < 2 {
        return Err(ExtremalError::CliqueSize(l));
    }
    let (n, m) = (g.n(), g.m());
    if !(n <= limits.max_n || m <= limits.max_m) || m > MAX_EDGES {
        return Err(ExtremalError::TooLarge { n, m });
    }
    let index = EdgeIndex::new(g);
    let all: u128 = if m == 128 {
        u128::MAX
    } else {
        (1u128 << m) - 1
    };
    if l == 2 {
        let witness = EdgeSet::new();
        return Ok(ExtremalSolution {
            l,
            t_value: 0,
            optimal: true,
            witnesses: vec![witness],
            witnesses_truncated: false,
            all_k_partite: true,
            non_partite_witness: None,
            nodes: 0,
        });
    }
    let cliques: Vec<u128> = g
        .enumerate_cliques(l, usize::MAX)
        .cliques
        .iter()
        .map(|c| index.clique_mask(c))
        .collect();

    let start = starting_partition(g, l - 1);
    let cross: u128 = index
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| !start.same_part(e.u(), e.v()))
        .fold(0, |acc, (i, _)| acc | 1 << i);
    let mut best = (m - cross.count_ones() as usize, cross);

    let mut search = HittingSearch {
        cliques: &cliques,
        nodes: 0,
        max_nodes: limits.max_nodes,
        aborted: false,
    };
    search.minimise(all, 0, 0, &mut best);
    let optimal = !search.aborted;
    let t_value = m - best.0;

    let (masks, truncated) = if optimal && witness_limit > 0 {
        let mut found = Vec::new();
        let stopped = search.enumerate(all, 0, 0, best.0, witness_limit, &mut found);
        (found, stopped)
    } else {
        (vec![best.1], true)
    };
    let mut witnesses: Vec<EdgeSet> = masks.iter().map(|&mask| index.edge_set(mask)).collect();
    witnesses.sort();
    witnesses.dedup();

    let mut non_partite_witness = None;
    for w in &witnesses {
        let t = Graph::spanning(n, w).expect("subgraph edges");
        if !is_k_partite(&t, l - 1)?.is_partite() {
            non_partite_witness = Some(w.clone());
            break;
        }
    }
    Ok(ExtremalSolution {
        l,
        t_value,
        optimal,
        all_k_partite: non_partite_witness.is_none(),
        non_partite_witness,
        witnesses,
        witnesses_truncated: truncated || search.aborted,
        nodes: search.nodes,
    })
}

/// `t(G)` for triangles with default limits.
pub fn max_triangle_free(
    g: &Graph,
    witness_limit: usize,
) -> Result<ExtremalSolution, ExtremalError> {
    max_clique_free(g, 3, witness_limit, SolverLimits::default())
}

/// Result of a `k`-colourability test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartiteVerdict {
    /// The colour classes, `k` of them (some possibly empty).
    Partite(Vec<VertexSet>),
    /// For `k = 2` a shortest odd cycle; for `k = 1` one edge; empty otherwise.
    NotPartite(Vec<Vertex>),
}

impl PartiteVerdict {
    pub fn is_partite(&self) -> bool {
        matches!(self, PartiteVerdict::Partite(_))
    }
}

/// Exact `k`-colourability with a colouring or an obstruction.
pub fn is_k_partite(t: &Graph, k: usize) -> Result<PartiteVerdict, ExtremalError> {
    let n = t.n();
    if k == 0 {
        return Ok(PartiteVerdict::NotPartite(Vec::new()));
    }
    if k == 1 {
        return Ok(match t.edges().next() {
            None => PartiteVerdict::Partite(vec![VertexSet::full(n)]),
            Some(e) => PartiteVerdict::NotPartite(vec![e.u(), e.v()]),
        });
    }
    if k == 2 {
        return Ok(two_colour(t));
    }
    if k >= n {
        let mut parts: Vec<VertexSet> = (1..=n).map(|v| VertexSet::from([v])).collect();
        parts.resize(k, VertexSet::new());
        return Ok(PartiteVerdict::Partite(parts));
    }
    if n > MAX_COLORING_N {
        return Err(ExtremalError::ColoringTooLarge {
            k,
            max: MAX_COLORING_N,
        });
    }
    let mut order: Vec<Vertex> = (1..=n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(t.degree(v)));
    let mut colour = vec![usize::MAX; n + 1];
    if colour_from(t, &order, 0, k, 0, &mut colour) {
        let mut parts = vec![VertexSet::new(); k];
        for v in 1..=n {
            parts[colour[v]].insert(v);
        }
        Ok(PartiteVerdict::Partite(parts))
    } else {
        Ok(PartiteVerdict::NotPartite(Vec::new()))
    }
}

fn colour_from(
    t: &Graph,
    order: &[Vertex],
    i: usize,
    k: usize,
    used: usize,
    colour: &mut [usize],
) -> bool {
    let Some(&v) = order.get(i) else { return true };
    for c in 0..(used + 1).min(k) {
        if t.neighbors(v).iter().all(|u| colour[u] != c) {
            colour[v] = c;
            if colour_from(t, order, i + 1, k, used.max(c + 1), colour) {
                return true;
            }
            colour[v] = usize::MAX;
        }
    }
    false
}

fn two_colour(t: &Graph) -> PartiteVerdict {
    let n = t.n();
    let mut side = vec![usize::MAX; n + 1];
    let mut bipartite = true;
    for s in 1..=n {
        if side[s] != usize::MAX {
            continue;
        }
        side[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for w in t.neighbors(u).iter() {
                if side[w] == usize::MAX {
                    side[w] = 1 - side[u];
                    queue.push_back(w);
                } else if side[w] == side[u] {
                    bipartite = false;
                }
            }
        }
    }
    if bipartite {
        let a: VertexSet = (1..=n).filter(|&v| side[v] == 0).collect();
        let b = VertexSet::full(n).difference(&a);
        return PartiteVerdict::Partite(vec![a, b]);
    }
    PartiteVerdict::NotPartite(shortest_odd_cycle(t))
}

// For each root, an edge between two vertices at equal BFS depth closes an odd
// walk of length 2d+1; the globally shortest one is a simple cycle.
fn shortest_odd_cycle(t: &Graph) -> Vec<Vertex> {
    let n = t.n();
    let mut best: Option<(usize, Vec<Vertex>)> = None;
    for s in 1..=n {
        let mut dist = vec![usize::MAX; n + 1];
        let mut parent = vec![0; n + 1];
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for w in t.neighbors(u).iter() {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if dist[w] == dist[u] && u < w {
                    let len = 2 * dist[u] + 1;
                    if best.as_ref().is_none_or(|(b, _)| len < *b) {
                        let climb = |mut x: Vertex| {
                            let mut path = vec![x];
                            while x != s {
                                x = parent[x];
                                path.push(x);
                            }
                            path
                        };
                        let mut cycle = climb(u);
                        cycle.reverse();
                        let mut other = climb(w);
                        other.pop();
                        cycle.extend(other);
                        best = Some((len, cycle));
                    }
                }
            }
        }
    }
    best.map(|(_, c)| c).unwrap_or_default()
}

fn check_inside(p: &Partition, s: &EdgeSet) -> Result<(), ExtremalError> {
    for e in s.iter() {
        if e.u() == e.v() || e.v() > p.n() || !p.same_part(e.u(), e.v()) {
            return Err(ExtremalError::NotInside(e));
        }
    }
    Ok(())
}

fn check_bipartition(g: &Graph, p: &Partition) -> Result<(), ExtremalError> {
    if p.len() != 2 {
        return Err(CutError::NotBipartition(p.len()).into());
    }
    if p.n() != g.n() {
        return Err(CutError::SizeMismatch {
            graph: g.n(),
            partition: p.n(),
        }
        .into());
    }
    Ok(())
}

/// The smallest `X ⊆ E(G; Π)` making `(E(G; Π) \ X) ∪ S` triangle-free, or
/// `None` when `S` contains a triangle of its own. `S` must lie inside `Π`
/// but need not be part of `G`.
pub fn min_cross_deletions(
    g: &Graph,
    p: &Partition,
    s: &EdgeSet,
) -> Result<Option<usize>, ExtremalError> {
    check_bipartition(g, p)?;
    check_inside(p, s)?;
    // a triangle inside one part would need three edges of S
    for e in s.iter() {
        for f in s.iter().filter(|f| *f > e) {
            let shared = [e.u(), e.v()]
                .into_iter()
                .find(|x| *x == f.u() || *x == f.v());
            if let Some(x) = shared {
                let a = if e.u() == x { e.v() } else { e.u() };
                let b = if f.u() == x { f.v() } else { f.u() };
                if a != b && s.contains(&Edge::new(a, b)) {
                    return Ok(None);
                }
            }
        }
    }
    // every other triangle is x, y in one part with {x,y} ∈ S and z across:
    // one of xz, yz must go
    let mut conflicts: Vec<(Edge, Edge)> = Vec::new();
    for e in s.iter() {
        let (x, y) = e.endpoints();
        let other = p.part(1 - p.part_of(x));
        for z in other.iter() {
            if g.has_edge(x, z) && g.has_edge(y, z) {
                conflicts.push((Edge::new(x, z), Edge::new(y, z)));
            }
        }
    }
    Ok(Some(min_vertex_cover(&conflicts)))
}

fn min_vertex_cover(pairs: &[(Edge, Edge)]) -> usize {
    fn go(pairs: &[(Edge, Edge)], chosen: &mut Vec<Edge>, best: &mut usize) {
        if chosen.len() >= *best {
            return;
        }
        let open = pairs
            .iter()
            .find(|(a, b)| !chosen.contains(a) && !chosen.contains(b));
        match open {
            None => *best = chosen.len(),
            Some(&(a, b)) => {
                for pick in [a, b] {
                    chosen.push(pick);
                    go(pairs, chosen, best);
                    chosen.pop();
                }
            }
        }
    }
    let mut best = pairs.len();
    go(pairs, &mut Vec::new(), &mut best);
    best
}

fn check_s_in_graph(g: &Graph, s: &EdgeSet) -> Result<(), ExtremalError> {
    match s.iter().find(|e| !g.contains_edge(*e)) {
        Some(e) => Err(ExtremalError::NotAnEdge(e)),
        None => Ok(()),
    }
}

/// Membership of `G` in `ℰ(Π, S)`: some `X ⊆ E(G; Π)` leaves
/// `(E(G; Π) \ X) ∪ S` triangle-free with `|S| − |X| >= gap(G; Π)`.
/// Here `S` is any set of pairs inside `Π`.
pub fn e_indicator(g: &Graph, p: &Partition, s: &EdgeSet) -> Result<bool, ExtremalError> {
    let Some(x) = min_cross_deletions(g, p, s)? else {
        return Ok(false);
    };
    let gap = cut::gap(g, p)?;
    Ok(s.len() >= x + gap)
}

/// Membership of `G` in `ℰ₂(Π, S)`: the same repair with `|X| <= |S|`.
pub fn e2_indicator(g: &Graph, p: &Partition, s: &EdgeSet) -> Result<bool, ExtremalError> {
    Ok(min_cross_deletions(g, p, s)?.is_some_and(|x| x <= s.len()))
}

/// [`e_indicator`] for a perturbation `S ⊆ E(G)` of edges inside `Π`.
pub fn perturbation_event(g: &Graph, p: &Partition, s: &EdgeSet) -> Result<bool, ExtremalError> {
    check_bipartition(g, p)?;
    check_inside(p, s)?;
    check_s_in_graph(g, s)?;
    e_indicator(g, p, s)
}

/// [`e2_indicator`] for a perturbation `S ⊆ E(G)` of edges inside `Π`.
pub fn event_e2(g: &Graph, p: &Partition, s: &EdgeSet) -> Result<bool, ExtremalError> {
    check_bipartition(g, p)?;
    check_inside(p, s)?;
    check_s_in_graph(g, s)?;
    e2_indicator(g, p, s)
}

/// Membership of `G` in `ℰ₁(Π)`: `gap(G; Π) <= r0`, and every `Π′` whose cut
/// is at most `r0` smaller than that of `Π` lies within distance `s0` of `Π`.
pub fn event_e1(g: &Graph, p: &Partition, r0: usize, s0: usize) -> Result<bool, ExtremalError> {
    check_bipartition(g, p)?;
    if g.n() > MAX_E1_N {
        return Err(ExtremalError::E1TooLarge(g.n()));
    }
    let survey = cut::max_cut(g, 2)?;
    let own = cut::cut_size(g, p)?;
    if survey.b_value - own > r0 {
        return Ok(false);
    }
    let n = g.n();
    let mine = p.canonical_mask().expect("n <= 18");
    let others = cut::bipartitions_with_cut_at_least(g, own.saturating_sub(r0))?;
    Ok(others.iter().all(|&(mask, _)| {
        let d = (mask ^ mine).count_ones() as usize;
        d.min(n - d) <= s0
    }))
}

/// Horizontal and missing degrees of every vertex (index `v - 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    /// `d_H(v)`: neighbours of `v` in `T` within its own part.
    pub horizontal: Vec<usize>,
    /// `d_M(v)`: edges of `G` from `v` to other parts that are not in `T`.
    pub missing: Vec<usize>,
}

impl DegreeProfile {
    pub fn horizontal_edges(&self) -> usize {
        self.horizontal.iter().sum::<usize>() / 2
    }

    pub fn missing_edges(&self) -> usize {
        self.missing.iter().sum::<usize>() / 2
    }
}

fn check_subgraph(g: &Graph, t: &Graph, p: &Partition) -> Result<(), ExtremalError> {
    if p.n() != g.n() {
        return Err(CutError::SizeMismatch {
            graph: g.n(),
            partition: p.n(),
        }
        .into());
    }
    if !t.is_subgraph_of(g) {
        return Err(ExtremalError::NotSubgraph(format!(
            "T (n = {}, m = {}) is not a subgraph of G (n = {})",
            t.n(),
            t.m(),
            g.n()
        )));
    }
    Ok(())
}

pub fn degree_profile(g: &Graph, t: &Graph, p: &Partition) -> Result<DegreeProfile, ExtremalError> {
    check_subgraph(g, t, p)?;
    let n = g.n();
    let mut horizontal = vec![0; n];
    let mut missing = vec![0; n];
    for v in 1..=n {
        let own = p.part(p.part_of(v));
        let away = VertexSet::full(n).difference(own);
        horizontal[v - 1] = t.degree_into(v, own);
        missing[v - 1] = g.degree_into(v, &away) - t.degree_into(v, &away);
    }
    Ok(DegreeProfile {
        horizontal,
        missing,
    })
}

/// Chords for a bipartition: ordered triples `(x, y, z)` with `x, y` in
/// `restrict_a`, `{x, y}` a horizontal edge of `T`, `z` in `restrict_b`,
/// `{y, z} ∈ G` and `{x, z} ∈ G \ T`.
pub fn count_chords(
    g: &Graph,
    t: &Graph,
    p: &Partition,
    restrict_a: &VertexSet,
    restrict_b: &VertexSet,
) -> Result<usize, ExtremalError> {
    count_clique_chords(g, t, p, &[restrict_a.clone(), restrict_b.clone()])
}

/// Chords for `ℓ − 1 = restricts.len()` parts: sets `{x, y, v₂, …, v_{ℓ−1}}`
/// with `{x, y}` a horizontal edge of `T` inside `restricts[0]`, `v_i` in
/// `restricts[i − 1]`, and every pair an edge of `G`. Each such set counts
/// once per missing edge (in `G`, not in `T`) among its non-horizontal pairs,
/// which for two parts equals the ordered-triple count.
pub fn count_clique_chords(
    g: &Graph,
    t: &Graph,
    p: &Partition,
    restricts: &[VertexSet],
) -> Result<usize, ExtremalError> {
    check_subgraph(g, t, p)?;
    if restricts.len() < 2 {
        return Err(ExtremalError::BadSets);
    }
    let mut homes = Vec::new();
    for r in restricts {
        let home = match r.iter().next() {
            Some(v) => p.part_of(v),
            None => return Ok(0),
        };
        if !r.is_subset(p.part(home)) || homes.contains(&home) {
            return Err(ExtremalError::BadSets);
        }
        homes.push(home);
    }
    let first = &restricts[0];
    let mut total = 0;
    for x in first.iter() {
        for y in t.neighbors(x).intersection(first).iter().filter(|&y| y > x) {
            let mut chosen = vec![x, y];
            total += extend_chord(g, t, &restricts[1..], &mut chosen);
        }
    }
    Ok(total)
}

fn extend_chord(g: &Graph, t: &Graph, rest: &[VertexSet], chosen: &mut Vec<Vertex>) -> usize {
    let Some((here, later)) = rest.split_first() else {
        // pairs other than the horizontal {x, y}
        let mut missing = 0;
        for i in 0..chosen.len() {
            for j in i + 1..chosen.len() {
                if (i, j) != (0, 1) && !t.has_edge(chosen[i], chosen[j]) {
                    missing += 1;
                }
            }
        }
        return missing;
    };
    let mut total = 0;
    for v in here.iter() {
        if chosen.iter().all(|&u| g.has_edge(u, v)) {
            chosen.push(v);
            total += extend_chord(g, t, later, chosen);
            chosen.pop();
        }
    }
    total
}

/// Exceptional vertices of one side of the bipartition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideExceptions {
    /// Vertices of the side with atypical degree or co-degree.
    pub x1: VertexSet,
    /// Remaining vertices with horizontal degree at least `εpn`.
    pub x2: VertexSet,
    /// Remaining vertices with `d_M >= d_H + 5εpn`.
    pub x3: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSets {
    pub epsilon: f64,
    pub p: f64,
    /// Indexed by part: `[A, B]`.
    pub sides: [SideExceptions; 2],
    /// Vertices whose degree into `A` (resp. `B`) deviates from `p|U|` by at
    /// least `p|U|/4`.
    pub degree_outliers: [VertexSet; 2],
    /// Greedy vertex cover of the pairs whose common neighbourhood in `A`
    /// (resp. `B`) falls outside `[3/4, 5/4]·p²|U|`.
    pub codegree_cover: [VertexSet; 2],
}

impl ExceptionalSets {
    pub fn x(&self, i: usize) -> VertexSet {
        let side = |s: &SideExceptions| match i {
            1 => s.x1.clone(),
            2 => s.x2.clone(),
            3 => s.x3.clone(),
            _ => panic!("exceptional sets are numbered 1..=3"),
        };
        side(&self.sides[0]).union(&side(&self.sides[1]))
    }
}

fn degree_outliers(g: &Graph, u: &VertexSet, p: f64) -> VertexSet {
    let expected = p * u.len() as f64;
    (1..=g.n())
        .filter(|&v| (g.degree_into(v, u) as f64 - expected).abs() >= expected / 4.0)
        .collect()
}

fn codegree_cover(g: &Graph, u: &VertexSet, p: f64) -> VertexSet {
    let n = g.n();
    let expected = p * p * u.len() as f64;
    let (lo, hi) = (0.75 * expected, 1.25 * expected);
    let mut bad: Vec<(Vertex, Vertex)> = Vec::new();
    for a in 1..=n {
        let na = g.neighbors(a).intersection(u);
        for b in a + 1..=n {
            let common = na.intersection_len(&g.neighbors(b)) as f64;
            if common < lo || common > hi {
                bad.push((a, b));
            }
        }
    }
    let mut cover = VertexSet::new();
    while !bad.is_empty() {
        let mut count = vec![0usize; n + 1];
        for &(a, b) in &bad {
            count[a] += 1;
            count[b] += 1;
        }
        // ties go to the smaller label
        let pick = (1..=n)
            .max_by_key(|&v| (count[v], std::cmp::Reverse(v)))
            .expect("n >= 1");
        cover.insert(pick);
        bad.retain(|&(a, b)| a != pick && b != pick);
    }
    cover
}

/// The exceptional sets `X₁ ⊆ X₂ ⊆ X₃` chain (as set differences) for a
/// bipartition `Π = (A, B)` and a subgraph `T ⊆ G`.
pub fn exceptional_sets(
    g: &Graph,
    p: &Partition,
    t: &Graph,
    epsilon: f64,
    prob: f64,
) -> Result<ExceptionalSets, ExtremalError> {
    check_bipartition(g, p)?;
    check_subgraph(g, t, p)?;
    let profile = degree_profile(g, t, p)?;
    let n = g.n() as f64;
    let outliers = [
        degree_outliers(g, p.part(0), prob),
        degree_outliers(g, p.part(1), prob),
    ];
    let covers = [
        codegree_cover(g, p.part(0), prob),
        codegree_cover(g, p.part(1), prob),
    ];
    let irregular = outliers[0]
        .union(&outliers[1])
        .union(&covers[0])
        .union(&covers[1]);
    let large = epsilon * prob * n;
    let side = |i: usize| {
        let part = p.part(i);
        let x1 = irregular.intersection(part);
        let x2: VertexSet = part
            .iter()
            .filter(|&v| profile.horizontal[v - 1] as f64 >= large)
            .collect::<VertexSet>()
            .difference(&x1);
        let x3: VertexSet = part
            .iter()
            .filter(|&v| {
                profile.missing[v - 1] as f64 >= profile.horizontal[v - 1] as f64 + 5.0 * large
            })
            .collect::<VertexSet>()
            .difference(&x1.union(&x2));
        SideExceptions { x1, x2, x3 }
    };
    Ok(ExceptionalSets {
        epsilon,
        p: prob,
        sides: [side(0), side(1)],
        degree_outliers: outliers,
        codegree_cover: covers,
    })
}

/// Result of [`clique_packing`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    pub count: usize,
    pub cliques: Vec<VertexSet>,
    /// False for the greedy lower bound.
    pub exact: bool,
    pub candidates: usize,
}

/// Edge-disjoint cliques with one vertex in each of the given disjoint sets.
pub fn clique_packing(
    g: &Graph,
    sets: &[VertexSet],
    exact: bool,
) -> Result<Packing, ExtremalError> {
    let mut seen = VertexSet::new();
    for s in sets {
        if !s.within(g.n()) || !seen.is_disjoint(s) {
            return Err(ExtremalError::BadSets);
        }
        seen = seen.union(s);
    }
    let mut candidates: Vec<Vec<Vertex>> = Vec::new();
    transversals(g, sets, &mut Vec::new(), &mut candidates);
    let index = EdgeIndex::new(g);
    let words = g.m().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = candidates
        .iter()
        .map(|c| {
            let mut mask = vec![0u64; words];
            for (i, &u) in c.iter().enumerate() {
                for &v in &c[i + 1..] {
                    let e = index.get(u, v);
                    mask[e / 64] |= 1 << (e % 64);
                }
            }
            mask
        })
        .collect();
    let overlaps = |a: &[u64], b: &[u64]| a.iter().zip(b).any(|(x, y)| x & y != 0);
    let chosen: Vec<usize> = if exact {
        if candidates.len() > MAX_EXACT_PACKING_CANDIDATES {
            return Err(ExtremalError::TooManyCandidates(candidates.len()));
        }
        let conflicts: Vec<Vec<bool>> = masks
            .iter()
            .map(|a| masks.iter().map(|b| overlaps(a, b)).collect())
            .collect();
        let mut best = Vec::new();
        let all: Vec<usize> = (0..candidates.len()).collect();
        exact_packing(&conflicts, &all, &mut Vec::new(), &mut best);
        best
    } else {
        let mut used = vec![0u64; words];
        let mut taken = Vec::new();
        for (i, mask) in masks.iter().enumerate() {
            if !overlaps(mask, &used) {
                used.iter_mut().zip(mask).for_each(|(u, m)| *u |= m);
                taken.push(i);
            }
        }
        taken
    };
    Ok(Packing {
        count: chosen.len(),
        cliques: chosen
            .iter()
            .map(|&i| candidates[i].iter().copied().collect())
            .collect(),
        exact,
        candidates: candidates.len(),
    })
}

fn transversals(
    g: &Graph,
    sets: &[VertexSet],
    stack: &mut Vec<Vertex>,
    out: &mut Vec<Vec<Vertex>>,
) {
    let Some((here, rest)) = sets.split_first() else {
        out.push(stack.clone());
        return;
    };
    for v in here.iter() {
        if stack.iter().all(|&u| g.has_edge(u, v)) {
            stack.push(v);
            transversals(g, rest, stack, out);
            stack.pop();
        }
    }
}

fn exact_packing(
    conflicts: &[Vec<bool>],
    open: &[usize],
    chosen: &mut Vec<usize>,
    best: &mut Vec<usize>,
) {
    if chosen.len() > best.len() {
        *best = chosen.clone();
    }
    if chosen.len() + open.len() <= best.len() {
        return;
    }
    let Some((&first, rest)) = open.split_first() else {
        return;
    };
    let compatible: Vec<usize> = rest
        .iter()
        .copied()
        .filter(|&j| !conflicts[first][j])
        .collect();
    chosen.push(first);
    exact_packing(conflicts, &compatible, chosen, best);
    chosen.pop();
    exact_packing(conflicts, rest, chosen, best);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn es(pairs: &[(Vertex, Vertex)]) -> EdgeSet {
        pairs.iter().copied().collect()
    }

    fn bip(n: usize, a: &[Vertex]) -> Partition {
        Partition::bipartition(n, a.iter().copied().collect()).unwrap()
    }

    #[test]
    fn turan_numbers() {
        assert_eq!(turan_edges(5, 2), 6);
        assert_eq!(turan_edges(4, 3), 5);
        assert_eq!(turan_edges(10, 2), 25);
        assert_eq!(turan_edges(7, 3), 16);
    }

    #[test]
    fn mantel_and_small_cases() {
        let k5 = max_triangle_free(&Graph::complete(5), 100).unwrap();
        assert_eq!(k5.t_value, 6);
        assert!(k5.optimal && k5.all_k_partite);
        // the maximum subgraphs of K5 are the 10 labelled copies of K_{2,3}
        assert_eq!(k5.witnesses.len(), 10);
        assert!(!k5.witnesses_truncated);

        let c5 = max_triangle_free(&Graph::cycle(5), 10).unwrap();
        assert_eq!(c5.t_value, 5);
        assert_eq!(c5.witnesses, vec![Graph::cycle(5).edge_set()]);
        assert!(!c5.all_k_partite);
        assert_eq!(c5.non_partite_witness, Some(Graph::cycle(5).edge_set()));

        let k4 = max_clique_free(&Graph::complete(4), 4, 10, SolverLimits::default()).unwrap();
        assert_eq!(k4.t_value, 5);
        assert_eq!(k4.witnesses.len(), 6);
    }

    #[test]
    fn witness_limit_flags_truncation() {
        let k5 = max_triangle_free(&Graph::complete(5), 3).unwrap();
        assert_eq!(k5.witnesses.len(), 3);
        assert!(k5.witnesses_truncated && k5.verdict_is_partial());
    }

    #[test]
    fn solver_limits() {
        let g = Graph::complete(17);
        assert!(matches!(
            max_triangle_free(&g, 1),
            Err(ExtremalError::TooLarge { .. })
        ));
        assert!(matches!(
            max_clique_free(&Graph::cycle(5), 1, 1, SolverLimits::default()),
            Err(ExtremalError::CliqueSize(1))
        ));
        let tiny = SolverLimits {
            max_nodes: 3,
            ..SolverLimits::default()
        };
        let s = max_clique_free(&Graph::complete(8), 3, 1, tiny).unwrap();
        assert!(!s.optimal);
        // the incumbent from the cut is still a valid lower bound
        assert!(s.t_value >= 16);
    }

    #[test]
    fn partite_examples() {
        match is_k_partite(&Graph::cycle(5), 2).unwrap() {
            PartiteVerdict::NotPartite(cycle) => {
                assert_eq!(cycle.len(), 5);
                let g = Graph::cycle(5);
                for i in 0..5 {
                    assert!(g.has_edge(cycle[i], cycle[(i + 1) % 5]));
                }
            }
            other => panic!("{other:?}"),
        }
        assert!(is_k_partite(&Graph::cycle(5), 3).unwrap().is_partite());
        assert!(is_k_partite(&Graph::empty(4), 1).unwrap().is_partite());
        assert!(!is_k_partite(&Graph::complete(4), 3).unwrap().is_partite());
        assert!(is_k_partite(&Graph::cycle(6), 2).unwrap().is_partite());
    }

    #[test]
    fn shortest_odd_cycle_is_shortest() {
        // C7 with a chord making a triangle 1-2-3
        let g = Graph::new(
            7,
            [
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (1, 7),
                (1, 3),
            ],
        )
        .unwrap();
        match is_k_partite(&g, 2).unwrap() {
            PartiteVerdict::NotPartite(c) => assert_eq!(c.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perturbation_examples() {
        let k3 = Graph::complete(3);
        let p = bip(3, &[1, 2]);
        assert!(perturbation_event(&k3, &p, &es(&[(1, 2)])).unwrap());
        assert!(event_e2(&k3, &p, &es(&[(1, 2)])).unwrap());
        // padding with isolated vertices changes nothing
        let padded = Graph::new(5, [(1, 2), (1, 3), (2, 3)]).unwrap();
        let pp = bip(5, &[1, 2, 4]);
        assert!(event_e2(&padded, &pp, &es(&[(1, 2)])).unwrap());
        // empty S: event holds iff Π is optimal
        let c5 = Graph::cycle(5);
        assert!(perturbation_event(&c5, &bip(5, &[1, 3]), &EdgeSet::new()).unwrap());
        assert!(!perturbation_event(&c5, &bip(5, &[1, 2, 3]), &EdgeSet::new()).unwrap());
        assert!(matches!(
            perturbation_event(&k3, &p, &es(&[(1, 3)])),
            Err(ExtremalError::NotInside(_))
        ));
        let path = Graph::path(3);
        assert!(matches!(
            event_e2(&path, &bip(3, &[1, 3]), &es(&[(1, 3)])),
            Err(ExtremalError::NotAnEdge(_))
        ));
    }

    #[test]
    fn s_with_its_own_triangle_never_repairs() {
        let g = Graph::complete(4);
        let p = bip(4, &[1, 2, 3]);
        let s = es(&[(1, 2), (1, 3), (2, 3)]);
        assert_eq!(min_cross_deletions(&g, &p, &s).unwrap(), None);
        assert!(!e2_indicator(&g, &p, &s).unwrap());
    }

    #[test]
    fn e1_examples() {
        let c5 = Graph::cycle(5);
        let star = cut::max_cut(&c5, 2).unwrap().canonical;
        assert!(event_e1(&c5, &star, 0, 2).unwrap());
        assert!(!event_e1(&c5, &star, 0, 1).unwrap());
        let p4 = Graph::path(4);
        assert!(!event_e1(&p4, &bip(4, &[1, 2, 3, 4]), 0, 4).unwrap());
    }

    #[test]
    fn degree_profile_examples() {
        let k3 = Graph::complete(3);
        let t = Graph::new(3, [(1, 2), (1, 3)]).unwrap();
        let d = degree_profile(&k3, &t, &bip(3, &[1, 2])).unwrap();
        assert_eq!(d.horizontal, vec![1, 1, 0]);
        assert_eq!(d.missing, vec![0, 1, 1]);
        let c5 = Graph::cycle(5);
        let d = degree_profile(&c5, &c5, &bip(5, &[1, 2])).unwrap();
        assert_eq!(d.horizontal.iter().sum::<usize>(), 6);
        let cross = Graph::new(3, [(1, 3), (2, 3)]).unwrap();
        let d = degree_profile(&k3, &cross, &bip(3, &[1, 2])).unwrap();
        assert!(d.horizontal.iter().chain(&d.missing).all(|&x| x == 0));
        assert!(matches!(
            degree_profile(&c5, &Graph::complete(5), &bip(5, &[1])),
            Err(ExtremalError::NotSubgraph(_))
        ));
    }

    #[test]
    fn chord_examples() {
        let k3 = Graph::complete(3);
        let t = Graph::new(3, [(1, 2), (1, 3)]).unwrap();
        let p = bip(3, &[1, 2]);
        assert_eq!(
            count_chords(&k3, &t, &p, &[1, 2].into(), &[3].into()).unwrap(),
            1
        );
        let cross = Graph::new(3, [(1, 3), (2, 3)]).unwrap();
        assert_eq!(
            count_chords(&k3, &cross, &p, &[1, 2].into(), &[3].into()).unwrap(),
            0
        );
        assert!(count_chords(&k3, &t, &p, &[1, 3].into(), &[3].into()).is_err());
    }

    #[test]
    fn exceptional_sets_on_complete_graph() {
        let n = 16;
        let g = Graph::complete(n);
        let p = bip(n, &(1..=8).collect::<Vec<_>>());
        let t = Graph::spanning(
            n,
            &g.edges().filter(|e| !p.same_part(e.u(), e.v())).collect(),
        )
        .unwrap();
        let x = exceptional_sets(&g, &p, &t, 0.01, 1.0).unwrap();
        for i in 1..=3 {
            assert!(x.x(i).is_empty(), "X{i} = {:?}", x.x(i));
        }
        // threshold εpn above every degree
        let c5 = Graph::cycle(5);
        let x = exceptional_sets(&c5, &bip(5, &[1, 2]), &c5, 2.0, 0.5).unwrap();
        assert!(x.x(2).is_empty());
        for s in &x.sides {
            assert!(s.x3.is_disjoint(&s.x1.union(&s.x2)));
            assert!(s.x2.is_disjoint(&s.x1));
        }
    }

    #[test]
    fn packing_examples() {
        let k4 = Graph::complete(4);
        let sets = [[1, 2].into(), [3].into(), [4].into()];
        assert_eq!(clique_packing(&k4, &sets, true).unwrap().count, 1);
        assert_eq!(clique_packing(&k4, &sets, false).unwrap().count, 1);
        let sparse = Graph::new(4, [(1, 3), (1, 4)]).unwrap();
        assert_eq!(clique_packing(&sparse, &sets, true).unwrap().count, 0);
        let k6 = Graph::complete(6);
        let sets = [[1, 2].into(), [3, 4].into(), [5, 6].into()];
        let exact = clique_packing(&k6, &sets, true).unwrap();
        assert_eq!(exact.candidates, 8);
        assert_eq!(exact.count, 4);
        assert!(clique_packing(&k6, &[[1, 2].into(), [2, 3].into()], true).is_err());
    }
}
