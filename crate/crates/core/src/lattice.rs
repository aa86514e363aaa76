//! The partial order `≤_Π` on graphs over a fixed bipartition, its join and
//! meet, the `G(n, p)` product measure and an exhaustive FKG checker.
//!
//! `G ≤_Π H` when every cross edge of `G` is a cross edge of `H` and every
//! inside edge of `H` is an inside edge of `G`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cut::Partition;
use crate::graph::{pairs, Edge, EdgeSet, Graph};

/// Exhaustive enumeration over all graphs is limited to this many vertices.
pub const MAX_EXHAUSTIVE_N: usize = 5;
/// Absolute slack allowed in `E[fg] <= E[f] E[g]`.
pub const FKG_TOLERANCE: f64 = 1e-12;
const CHUNK: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("graphs have {0} and {1} vertices")]
    SizeMismatch(usize, usize),
    #[error("the order needs a bipartition, got {0} parts")]
    NotBipartition(usize),
    #[error("probability {0} must lie strictly between 0 and 1")]
    Probability(f64),
    #[error("exhaustive enumeration is limited to n <= {MAX_EXHAUSTIVE_N}, got {0}")]
    TooLarge(usize),
    #[error("graph needs at least one vertex")]
    NoVertices,
}

/// Outcome of comparing two graphs under `≤_Π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    LessEqual,
    GreaterEqual,
    Incomparable,
}

/// A bipartition fixing the order `≤_Π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionOrderContext {
    partition: Partition,
}

impl PartitionOrderContext {
    pub fn new(partition: Partition) -> Result<Self, LatticeError> {
        if partition.len() != 2 {
            return Err(LatticeError::NotBipartition(partition.len()));
        }
        Ok(Self { partition })
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn is_cross(&self, e: Edge) -> bool {
        !self.partition.same_part(e.u(), e.v())
    }

    fn check(&self, g: &Graph) -> Result<(), LatticeError> {
        if g.n() != self.n() {
            return Err(LatticeError::SizeMismatch(g.n(), self.n()));
        }
        Ok(())
    }

    /// `E(G; Π)`.
    pub fn cross_edges(&self, g: &Graph) -> EdgeSet {
        g.edges().filter(|&e| self.is_cross(e)).collect()
    }

    /// `E(G) \ E(G; Π)`.
    pub fn inside_edges(&self, g: &Graph) -> EdgeSet {
        g.edges().filter(|&e| !self.is_cross(e)).collect()
    }
}

pub fn compare(
    g: &Graph,
    h: &Graph,
    ctx: &PartitionOrderContext,
) -> Result<Relation, LatticeError> {
    ctx.check(g)?;
    ctx.check(h)?;
    let (gc, hc) = (ctx.cross_edges(g), ctx.cross_edges(h));
    let (gi, hi) = (ctx.inside_edges(g), ctx.inside_edges(h));
    let le = gc.is_subset(&hc) && hi.is_subset(&gi);
    let ge = hc.is_subset(&gc) && gi.is_subset(&hi);
    Ok(match (le, ge) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::LessEqual,
        (false, true) => Relation::GreaterEqual,
        (false, false) => Relation::Incomparable,
    })
}

/// Least upper bound: common inside edges plus all cross edges of either.
pub fn join(g: &Graph, h: &Graph, ctx: &PartitionOrderContext) -> Result<Graph, LatticeError> {
    combine(
        g,
        h,
        ctx,
        |inside, a, b| if inside { a && b } else { a || b },
    )
}

/// Greatest lower bound: all inside edges of either plus common cross edges.
pub fn meet(g: &Graph, h: &Graph, ctx: &PartitionOrderContext) -> Result<Graph, LatticeError> {
    combine(
        g,
        h,
        ctx,
        |inside, a, b| if inside { a || b } else { a && b },
    )
}

fn combine(
    g: &Graph,
    h: &Graph,
    ctx: &PartitionOrderContext,
    keep: impl Fn(bool, bool, bool) -> bool,
) -> Result<Graph, LatticeError> {
    ctx.check(g)?;
    ctx.check(h)?;
    let n = g.n();
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            let inside = !ctx.is_cross(Edge::new(u, v));
            if keep(inside, g.has_edge(u, v), h.has_edge(u, v)) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges).expect("pairs are valid"))
}

/// `μ(G) = p^e(G) (1 - p)^(C(n,2) - e(G))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    p: f64,
    n: usize,
}

impl ProductMeasure {
    pub fn new(n: usize, p: f64) -> Result<Self, LatticeError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(LatticeError::Probability(p));
        }
        if n == 0 {
            return Err(LatticeError::NoVertices);
        }
        Ok(Self { p, n })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn log_of_count(&self, e: usize) -> f64 {
        e as f64 * self.p.ln() + (pairs(self.n) - e) as f64 * (-self.p).ln_1p()
    }
}

/// Natural log of `μ(G)`.
pub fn measure_log_mu(g: &Graph, mu: &ProductMeasure) -> Result<f64, LatticeError> {
    if g.n() != mu.n {
        return Err(LatticeError::SizeMismatch(g.n(), mu.n));
    }
    Ok(mu.log_of_count(g.m()))
}

pub fn measure_mu(g: &Graph, mu: &ProductMeasure) -> Result<f64, LatticeError> {
    measure_log_mu(g, mu).map(f64::exp)
}

/// `ln μ(G) + ln μ(H) - ln μ(G ∨ H) - ln μ(G ∧ H)`; zero for a product measure.
pub fn log_supermodularity_defect(
    g: &Graph,
    h: &Graph,
    ctx: &PartitionOrderContext,
    mu: &ProductMeasure,
) -> Result<f64, LatticeError> {
    let up = join(g, h, ctx)?;
    let down = meet(g, h, ctx)?;
    Ok(measure_log_mu(g, mu)? + measure_log_mu(h, mu)?
        - measure_log_mu(&up, mu)?
        - measure_log_mu(&down, mu)?)
}

/// The graph whose edge set is given by the bits of `index`, bit `k` standing
/// for the `k`-th pair in lexicographic order.
pub fn graph_at(n: usize, index: u64) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 1..=n {
        for v in u + 1..=n {
            if index >> k & 1 == 1 {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Graph::new(n, edges).expect("pairs are valid")
}

fn graph_count(n: usize) -> Result<u64, LatticeError> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(LatticeError::TooLarge(n));
    }
    if n == 0 {
        return Err(LatticeError::NoVertices);
    }
    Ok(1u64 << pairs(n))
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default, Debug)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: Compensated) {
        self.add(other.sum);
        self.add(other.carry);
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    /// `E[f g]`.
    pub lhs: f64,
    /// `E[f] E[g]`.
    pub rhs: f64,
    pub e_f: f64,
    pub e_g: f64,
    pub holds: bool,
}

/// Exact `E[f g]` against `E[f] E[g]` under `μ`, summing over all
/// `2^C(n,2)` graphs. The sum is split into fixed chunks reduced in index
/// order, so the result does not depend on the thread count.
pub fn fkg_check<F, G>(mu: &ProductMeasure, f: F, g: G) -> Result<FkgReport, LatticeError>
where
    F: Fn(&Graph) -> bool + Sync,
    G: Fn(&Graph) -> bool + Sync,
{
    let total = graph_count(mu.n)?;
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<[Compensated; 3]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [Compensated::default(); 3];
            for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let graph = graph_at(mu.n, index);
                let (fv, gv) = (f(&graph), g(&graph));
                if !fv && !gv {
                    continue;
                }
                let w = mu.log_of_count(graph.m()).exp();
                if fv {
                    acc[0].add(w);
                }
                if gv {
                    acc[1].add(w);
                }
                if fv && gv {
                    acc[2].add(w);
                }
            }
            acc
        })
        .collect();
    let mut acc = [Compensated::default(); 3];
    for chunk in partial {
        for (a, c) in acc.iter_mut().zip(chunk) {
            a.merge(c);
        }
    }
    let (e_f, e_g, lhs) = (acc[0].value(), acc[1].value(), acc[2].value());
    let rhs = e_f * e_g;
    Ok(FkgReport {
        lhs,
        rhs,
        e_f,
        e_g,
        holds: lhs <= rhs + FKG_TOLERANCE,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A comparable pair `lower ≤_Π upper` differing in one edge on which the
/// event moves the wrong way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub lower: Graph,
    pub upper: Graph,
}

/// Checks the event on every pair of graphs that differ in exactly one edge.
/// Such pairs are always comparable, and by transitivity they decide
/// monotonicity over the whole order.
pub fn monotonicity_audit<F>(
    event: F,
    direction: Direction,
    ctx: &PartitionOrderContext,
) -> Result<Vec<Violation>, LatticeError>
where
    F: Fn(&Graph) -> bool + Sync,
{
    let n = ctx.n();
    let total = graph_count(n)?;
    let all_pairs: Vec<Edge> = Graph::complete(n).edges().collect();
    let found: Vec<Vec<Violation>> = (0..total)
        .into_par_iter()
        .map(|index| {
            let g = graph_at(n, index);
            let fg = event(&g);
            let mut out = Vec::new();
            for (k, &e) in all_pairs.iter().enumerate() {
                if index >> k & 1 == 1 {
                    continue;
                }
                let h = graph_at(n, index | 1 << k);
                let fh = event(&h);
                // a new cross edge moves up, a new inside edge moves down
                let (lower, upper, fl, fu) = if ctx.is_cross(e) {
                    (&g, &h, fg, fh)
                } else {
                    (&h, &g, fh, fg)
                };
                let bad = match direction {
                    Direction::Increasing => fl && !fu,
                    Direction::Decreasing => fu && !fl,
                };
                if bad {
                    out.push(Violation {
                        lower: lower.clone(),
                        upper: upper.clone(),
                    });
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}
