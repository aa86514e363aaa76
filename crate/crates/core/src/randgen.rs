//! Seeded samplers for `G(n, p)`, `G(n, M)`, random edge addition and
//! rejection sampling of uniform triangle-free graphs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{pairs, Edge, Graph, Vertex};

/// Largest `n` accepted by the triangle-free rejection sampler.
pub const REJECTION_MAX_N: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("graph needs at least one vertex")]
    NoVertices,
    #[error("{requested} edges requested but only {available} pairs are available")]
    TooManyEdges { requested: usize, available: usize },
    #[error("rejection sampling is capped at n = {REJECTION_MAX_N}, got n = {0}")]
    TooLarge(usize),
    #[error("no triangle-free draw in {tries} attempts; shrink m")]
    Exhausted { tries: u64 },
}

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_index: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl RngSeed {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// A generator whose state depends only on `(master_seed, stream_index)`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut h = splitmix64(self.master_seed ^ splitmix64(self.stream_index));
        for chunk in key.chunks_mut(8) {
            h = splitmix64(h);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }

    /// An independent sub-stream of this seed, e.g. for a second sampling step
    /// inside the same trial.
    pub fn derive(&self, salt: u64) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed ^ splitmix64(salt.wrapping_add(0x5eed))),
            stream_index: self.stream_index,
        }
    }
}

/// Maps `0..C(n,2)` onto pairs in lexicographic order.
fn pair_at(n: usize, mut k: usize) -> Edge {
    for u in 1..n {
        let row = n - u;
        if k < row {
            return Edge::new(u, u + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range")
}

/// Floyd's algorithm: a uniform `count`-subset of `0..total`.
fn floyd_sample<R: Rng>(rng: &mut R, total: usize, count: usize) -> BTreeSet<usize> {
    let mut chosen = BTreeSet::new();
    for j in total - count..total {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen
}

pub fn sample_gnp_with<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph, SampleError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SampleError::Probability(p));
    }
    if n == 0 {
        return Err(SampleError::NoVertices);
    }
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges).expect("sampled pairs are valid"))
}

/// `G(n, p)`: every pair independently with probability `p`.
pub fn sample_gnp(n: usize, p: f64, seed: RngSeed) -> Result<Graph, SampleError> {
    sample_gnp_with(n, p, &mut seed.rng())
}

pub fn sample_gnm_with<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Graph, SampleError> {
    if n == 0 {
        return Err(SampleError::NoVertices);
    }
    let total = pairs(n);
    if m > total {
        return Err(SampleError::TooManyEdges {
            requested: m,
            available: total,
        });
    }
    let picked = floyd_sample(rng, total, m);
    Ok(Graph::new(n, picked.into_iter().map(|k| pair_at(n, k))).expect("distinct pairs"))
}

/// `G(n, M)`: uniform over graphs with exactly `m` edges.
pub fn sample_gnm(n: usize, m: usize, seed: RngSeed) -> Result<Graph, SampleError> {
    sample_gnm_with(n, m, &mut seed.rng())
}

/// The non-edges added by [`evolve`], in lexicographic order.
pub fn pick_new_edges<R: Rng>(g: &Graph, t: usize, rng: &mut R) -> Result<Vec<Edge>, SampleError> {
    let candidates = g.non_edges();
    if t > candidates.len() {
        return Err(SampleError::TooManyEdges {
            requested: t,
            available: candidates.len(),
        });
    }
    Ok(floyd_sample(rng, candidates.len(), t)
        .into_iter()
        .map(|k| candidates[k])
        .collect())
}

/// Adds `t` distinct non-edges chosen uniformly without replacement.
pub fn evolve(g: &Graph, t: usize, seed: RngSeed) -> Result<Graph, SampleError> {
    let added = pick_new_edges(g, t, &mut seed.rng())?;
    Ok(g.with_edges_added(added).expect("non-edges are new"))
}

/// A triangle-free draw together with the number of `G(n, m)` draws it took.
#[derive(Clone, Debug)]
pub struct TriangleFreeSample {
    pub graph: Graph,
    pub attempts: u64,
}

impl TriangleFreeSample {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// Rejection sampler: draws `G(n, m)` until one is triangle-free, which is
/// exactly uniform over triangle-free `m`-edge graphs on `1..=n`.
pub fn sample_uniform_triangle_free(
    n: usize,
    m: usize,
    seed: RngSeed,
    max_tries: u64,
) -> Result<TriangleFreeSample, SampleError> {
    if n > REJECTION_MAX_N {
        return Err(SampleError::TooLarge(n));
    }
    let mut rng = seed.rng();
    for attempt in 1..=max_tries {
        let g = sample_gnm_with(n, m, &mut rng)?;
        if g.is_clique_free(3) {
            return Ok(TriangleFreeSample {
                graph: g,
                attempts: attempt,
            });
        }
    }
    Err(SampleError::Exhausted { tries: max_tries })
}
