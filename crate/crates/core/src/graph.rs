//! Immutable simple graphs on the vertex set `1..=n`.
//!
//! Adjacency is stored as one bitset row per vertex. All public interfaces are
//! 1-indexed; bit `i - 1` of a row represents vertex `i`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A vertex label in `1..=n`.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("edge ({u}, {v}) has an endpoint outside 1..={n}")]
    VertexOutOfRange { u: Vertex, v: Vertex, n: usize },
    #[error("vertex {v} is outside 1..={n}")]
    BadVertex { v: Vertex, n: usize },
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: Vertex, v: Vertex },
    #[error("vertex tuple must be non-empty and free of repeats")]
    BadTuple,
    #[error("edge-list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

const fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// A set of vertices with bitmask semantics.
///
/// Trailing zero words are always trimmed so that equality and hashing do not
/// depend on how the set was built.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        let mut s = Self {
            words: vec![u64::MAX; words_for(n)],
        };
        if n % 64 != 0 {
            if let Some(last) = s.words.last_mut() {
                *last = (1u64 << (n % 64)) - 1;
            }
        }
        s.trim();
        s
    }

    /// Builds a set from a 0-based bitmask (bit `i` is vertex `i + 1`).
    pub fn from_mask(mask: u64) -> Self {
        let mut s = Self { words: vec![mask] };
        s.trim();
        s
    }

    pub(crate) fn from_words(words: Vec<u64>) -> Self {
        let mut s = Self { words };
        s.trim();
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, v: Vertex) {
        assert!(v >= 1, "vertices are 1-indexed");
        let (w, b) = ((v - 1) / 64, (v - 1) % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, v: Vertex) {
        if v == 0 {
            return;
        }
        let (w, b) = ((v - 1) / 64, (v - 1) % 64);
        if w < self.words.len() {
            self.words[w] &= !(1 << b);
            self.trim();
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        if v == 0 {
            return false;
        }
        let (w, b) = ((v - 1) / 64, (v - 1) % 64);
        self.words.get(w).is_some_and(|x| x >> b & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Largest member, if any.
    pub fn max_vertex(&self) -> Option<Vertex> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 64 - last.leading_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b + 1)
            })
        })
    }

    /// The set as a 0-based `u64` mask, if every member is at most 64.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        let len = self.words.len().max(other.words.len());
        let words = (0..len)
            .map(|i| {
                f(
                    self.words.get(i).copied().unwrap_or(0),
                    other.words.get(i).copied().unwrap_or(0),
                )
            })
            .collect();
        Self::from_words(words)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection_len(other) == 0
    }

    /// True when every member lies in `1..=n`.
    pub fn within(&self, n: usize) -> bool {
        self.max_vertex().is_none_or(|m| m <= n)
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        let mut s = Self::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl<const N: usize> From<[Vertex; N]> for VertexSet {
    fn from(vs: [Vertex; N]) -> Self {
        vs.into_iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vs = Vec::<Vertex>::deserialize(d)?;
        if vs.contains(&0) {
            return Err(serde::de::Error::custom("vertices are 1-indexed"));
        }
        Ok(vs.into_iter().collect())
    }
}

/// An unordered vertex pair, stored with `u < v`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(into = "(Vertex, Vertex)", from = "(Vertex, Vertex)")]
pub struct Edge {
    u: Vertex,
    v: Vertex,
}

impl Edge {
    /// Normalizes the endpoint order. Loops are representable here and rejected
    /// by the consumers that care.
    pub fn new(a: Vertex, b: Vertex) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
        }
    }

    pub fn u(self) -> Vertex {
        self.u
    }

    pub fn v(self) -> Vertex {
        self.v
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }
}

impl From<(Vertex, Vertex)> for Edge {
    fn from((a, b): (Vertex, Vertex)) -> Self {
        Edge::new(a, b)
    }
}

impl From<Edge> for (Vertex, Vertex) {
    fn from(e: Edge) -> Self {
        (e.u, e.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

/// A set of unordered pairs, iterated in lexicographic order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeSet(BTreeSet<Edge>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        self.0.insert(e)
    }

    pub fn remove(&mut self, e: &Edge) -> bool {
        self.0.remove(e)
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.0.contains(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl FromIterator<(Vertex, Vertex)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (Vertex, Vertex)>>(iter: I) -> Self {
        Self(iter.into_iter().map(Edge::from).collect())
    }
}

/// Result of [`Graph::enumerate_cliques`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueList {
    pub cliques: Vec<VertexSet>,
    /// Set when enumeration stopped at the limit; an empty untruncated list
    /// certifies that no clique of the requested size exists.
    pub truncated: bool,
}

/// Immutable simple graph on `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    stride: usize,
    adj: Vec<u64>,
    m: usize,
}

impl Graph {
    /// Builds a graph, rejecting loops, duplicates and out-of-range endpoints.
    /// Pairs may be given in either order.
    pub fn new<I, E>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<(Vertex, Vertex)>,
    {
        let mut g = Self::empty_checked(n)?;
        for e in edges {
            let (a, b) = e.into();
            if a == 0 || b == 0 || a > n || b > n {
                return Err(GraphError::VertexOutOfRange { u: a, v: b, n });
            }
            if a == b {
                return Err(GraphError::Loop(a));
            }
            if g.has_edge(a, b) {
                let e = Edge::new(a, b);
                return Err(GraphError::DuplicateEdge { u: e.u, v: e.v });
            }
            g.set(a, b);
        }
        Ok(g)
    }

    fn empty_checked(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let stride = words_for(n);
        Ok(Self {
            n,
            stride,
            adj: vec![0; n * stride],
            m: 0,
        })
    }

    /// Edgeless graph. Panics if `n == 0`.
    pub fn empty(n: usize) -> Self {
        Self::empty_checked(n).expect("n >= 1")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 1..=n {
            for v in u + 1..=n {
                g.set(u, v);
            }
        }
        g
    }

    /// The cycle `1-2-...-n-1`; requires `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        let mut g = Self::empty(n);
        for u in 1..n {
            g.set(u, u + 1);
        }
        g.set(1, n);
        g
    }

    /// The path `1-2-...-n`.
    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 1..n {
            g.set(u, u + 1);
        }
        g
    }

    fn set(&mut self, a: Vertex, b: Vertex) {
        let (i, j) = (a - 1, b - 1);
        self.adj[i * self.stride + j / 64] |= 1 << (j % 64);
        self.adj[j * self.stride + i / 64] |= 1 << (i % 64);
        self.m += 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    fn row(&self, v: Vertex) -> &[u64] {
        &self.adj[(v - 1) * self.stride..v * self.stride]
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        if a == 0 || b == 0 || a > self.n || b > self.n {
            return false;
        }
        let j = b - 1;
        self.row(a)[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.has_edge(e.u, e.v)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Γ(G; v).
    pub fn neighbors(&self, v: Vertex) -> VertexSet {
        VertexSet::from_words(self.row(v).to_vec())
    }

    /// |Γ(G; v) ∩ set|.
    pub fn degree_into(&self, v: Vertex, set: &VertexSet) -> usize {
        self.row(v)
            .iter()
            .zip(set.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// 0-based adjacency masks; `None` when `n > 64`.
    pub fn masks(&self) -> Option<Vec<u64>> {
        (self.n <= 64).then(|| (1..=self.n).map(|v| self.row(v)[0]).collect())
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (1..=self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| Edge { u, v })
                .collect::<Vec<_>>()
        })
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges().collect()
    }

    /// Pairs not joined by an edge, lexicographic.
    pub fn non_edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2 - self.m);
        for u in 1..=self.n {
            for v in u + 1..=self.n {
                if !self.has_edge(u, v) {
                    out.push(Edge { u, v });
                }
            }
        }
        out
    }

    fn check_set(&self, s: &VertexSet) -> Result<(), GraphError> {
        match s.max_vertex() {
            Some(v) if v > self.n => Err(GraphError::BadVertex { v, n: self.n }),
            _ => Ok(()),
        }
    }

    /// `e(G; X)` when `y` is `None`, else `e(G; X, Y)`: the number of edges with
    /// one endpoint in `X` and the other in `Y`, where edges inside `X ∩ Y`
    /// are counted once.
    pub fn edge_count(&self, x: &VertexSet, y: Option<&VertexSet>) -> Result<usize, GraphError> {
        self.check_set(x)?;
        match y {
            None => Ok(x.iter().map(|v| self.degree_into(v, x)).sum::<usize>() / 2),
            Some(y) => {
                self.check_set(y)?;
                let ordered: usize = x.iter().map(|v| self.degree_into(v, y)).sum();
                let both = x.intersection(y);
                let inner = both
                    .iter()
                    .map(|v| self.degree_into(v, &both))
                    .sum::<usize>()
                    / 2;
                Ok(ordered - inner)
            }
        }
    }

    /// All `l`-cliques as vertex sets in lexicographic order, truncated at `limit`.
    pub fn enumerate_cliques(&self, l: usize, limit: usize) -> CliqueList {
        assert!(l >= 2 && limit >= 1);
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(l);
        let truncated = self.extend_cliques(&mut stack, &self.vertices(), l, limit, &mut out);
        CliqueList {
            cliques: out,
            truncated,
        }
    }

    // Returns true when the limit cut enumeration short.
    fn extend_cliques(
        &self,
        stack: &mut Vec<Vertex>,
        candidates: &VertexSet,
        l: usize,
        limit: usize,
        out: &mut Vec<VertexSet>,
    ) -> bool {
        if stack.len() == l {
            if out.len() == limit {
                return true;
            }
            out.push(stack.iter().copied().collect());
            return false;
        }
        let need = l - stack.len();
        let mut remaining = candidates.clone();
        for v in candidates.iter() {
            remaining.remove(v);
            if remaining.len() + 1 < need {
                break;
            }
            let next = remaining.intersection(&self.neighbors(v));
            if next.len() + 1 < need {
                continue;
            }
            stack.push(v);
            let stop = self.extend_cliques(stack, &next, l, limit, out);
            stack.pop();
            if stop {
                return true;
            }
        }
        false
    }

    /// True when the graph has no `l`-clique.
    pub fn is_clique_free(&self, l: usize) -> bool {
        self.enumerate_cliques(l, 1).cliques.is_empty()
    }

    /// `|⋂_{v ∈ tuple} Γ(G; v) ∩ target|`.
    pub fn common_neighborhood(
        &self,
        tuple: &[Vertex],
        target: &VertexSet,
    ) -> Result<usize, GraphError> {
        let distinct: BTreeSet<_> = tuple.iter().collect();
        if tuple.is_empty() || distinct.len() != tuple.len() {
            return Err(GraphError::BadTuple);
        }
        if let Some(&&v) = distinct.iter().find(|&&&v| v == 0 || v > self.n) {
            return Err(GraphError::BadVertex { v, n: self.n });
        }
        self.check_set(target)?;
        let mut common = target.clone();
        for &v in tuple {
            common = common.intersection(&self.neighbors(v));
        }
        Ok(common.len())
    }

    /// A new graph with the given pairs added. Fails on duplicates or pairs
    /// already present.
    pub fn with_edges_added(
        &self,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        for e in edges {
            if e.u == 0 || e.v > self.n {
                return Err(GraphError::VertexOutOfRange {
                    u: e.u,
                    v: e.v,
                    n: self.n,
                });
            }
            if e.u == e.v {
                return Err(GraphError::Loop(e.u));
            }
            if g.contains_edge(e) {
                return Err(GraphError::DuplicateEdge { u: e.u, v: e.v });
            }
            g.set(e.u, e.v);
        }
        Ok(g)
    }

    /// The spanning subgraph with exactly the given edges (which must be edges
    /// of a graph on the same vertex set).
    pub fn spanning(n: usize, edges: &EdgeSet) -> Result<Graph, GraphError> {
        Graph::new(n, edges.iter())
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.adj.iter().zip(&other.adj).all(|(a, b)| a & !b == 0)
    }

    /// Canonical edge-list text: a header `n m` followed by one `u v` line per
    /// edge in lexicographic order.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for e in self.edges() {
            out.push_str(&format!("{} {}\n", e.u, e.v));
        }
        out
    }

    /// Parses the edge-list format. Blank lines are ignored; pairs must satisfy
    /// `u < v` and the declared edge count must match.
    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line, msg: &str| GraphError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let nums = parse_pair(header).ok_or_else(|| err(hl, "expected `n m`"))?;
        let (n, m) = nums;
        let mut edges = Vec::with_capacity(m);
        for (ln, line) in lines {
            let (u, v) = parse_pair(line).ok_or_else(|| err(ln, "expected `u v`"))?;
            if u >= v {
                return Err(err(ln, "pairs must satisfy u < v"));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(err(
                hl,
                &format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        Graph::new(n, edges)
    }
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    let a = it.next()?.ok()?;
    let b = it.next()?.ok()?;
    it.next().is_none().then_some((a, b))
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n)?;
        for (i, e) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "])")
    }
}

/// Binomial coefficient `C(n, 2)`.
pub const fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}
