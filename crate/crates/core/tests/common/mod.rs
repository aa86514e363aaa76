//! Brute-force reference implementations shared by the integration tests.
//! They only read a graph's edge list and never call the library solvers.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trifree::cut::Partition;
use trifree::{Edge, EdgeSet, Graph, VertexSet};

pub type Pair = (usize, usize);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn edge_list(g: &Graph) -> Vec<Pair> {
    g.edges().map(|e| e.endpoints()).collect()
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; g.n() + 1]; g.n() + 1];
    for (u, v) in edge_list(g) {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    adj
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random part label in `0..l` per vertex.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, l: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..l)).collect()
}

pub fn cut_of(edges: &[Pair], label: &[usize]) -> usize {
    edges
        .iter()
        .filter(|&&(u, v)| label[u - 1] != label[v - 1])
        .count()
}

/// Every bipartition with vertex 1 in part 0, as `(mask of part 0, cut)`,
/// ascending in the mask.
pub fn all_bipartition_cuts(g: &Graph) -> Vec<(u64, usize)> {
    let n = g.n();
    let edges = edge_list(g);
    (0..1u64 << (n - 1))
        .map(|k| {
            let mask = 1 | (k << 1);
            let label: Vec<usize> = (0..n).map(|i| (mask >> i & 1 == 0) as usize).collect();
            (mask, cut_of(&edges, &label))
        })
        .collect()
}

pub fn brute_max_cut(g: &Graph) -> usize {
    all_bipartition_cuts(g)
        .into_iter()
        .map(|(_, c)| c)
        .max()
        .unwrap()
}

/// Maximum `l`-cut over all `l^n` labelings.
pub fn brute_max_lcut(g: &Graph, l: usize) -> usize {
    let n = g.n();
    let edges = edge_list(g);
    let mut label = vec![0; n];
    let mut best = 0;
    loop {
        best = best.max(cut_of(&edges, &label));
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            label[i] += 1;
            if label[i] < l {
                break;
            }
            label[i] = 0;
            i += 1;
        }
    }
}

pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Each `l`-clique of `g` as a bitmask over the positions in `edges`.
fn clique_masks(g: &Graph, edges: &[Pair], l: usize) -> Vec<u64> {
    let adj = adjacency(g);
    let vertices: Vec<usize> = (1..=g.n()).collect();
    let index = |u: usize, v: usize| {
        edges
            .iter()
            .position(|&e| e == (u.min(v), u.max(v)))
            .unwrap()
    };
    combinations(&vertices, l)
        .into_iter()
        .filter(|c| {
            c.iter()
                .enumerate()
                .all(|(i, &u)| c[i + 1..].iter().all(|&v| adj[u][v]))
        })
        .map(|c| {
            let mut mask = 0u64;
            for (i, &u) in c.iter().enumerate() {
                for &v in &c[i + 1..] {
                    mask |= 1 << index(u, v);
                }
            }
            mask
        })
        .collect()
}

/// `t` for `K_l` and every maximum `K_l`-free edge subset, by scanning all
/// `2^m` subsets.
pub fn brute_clique_free(g: &Graph, l: usize) -> (usize, BTreeSet<BTreeSet<Pair>>) {
    let edges = edge_list(g);
    assert!(edges.len() <= 24, "brute force is for small graphs");
    let cliques = clique_masks(g, &edges, l);
    let mut best = 0;
    let mut witnesses = BTreeSet::new();
    for subset in 0..1u64 << edges.len() {
        if cliques.iter().any(|&c| subset & c == c) {
            continue;
        }
        let size = subset.count_ones() as usize;
        if size > best {
            best = size;
            witnesses.clear();
        }
        if size == best {
            witnesses.insert(
                (0..edges.len())
                    .filter(|&i| subset >> i & 1 == 1)
                    .map(|i| edges[i])
                    .collect(),
            );
        }
    }
    (best, witnesses)
}

pub fn pairs_of(s: &EdgeSet) -> BTreeSet<Pair> {
    s.iter().map(Edge::endpoints).collect()
}

pub fn triangle_free(n: usize, edges: &BTreeSet<Pair>) -> bool {
    let has = |u: usize, v: usize| edges.contains(&(u.min(v), u.max(v)));
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                if has(a, b) && has(a, c) && has(b, c) {
                    return false;
                }
            }
        }
    }
    true
}

/// Decides the perturbation events by trying every `X` inside the cut:
/// `(∃X: |S| - |X| >= gap, ∃X: |X| <= |S|)`, each with the union triangle-free.
pub fn brute_events(g: &Graph, label: &[usize], s: &BTreeSet<Pair>) -> (bool, bool) {
    let edges = edge_list(g);
    let cross: Vec<Pair> = edges
        .iter()
        .copied()
        .filter(|&(u, v)| label[u - 1] != label[v - 1])
        .collect();
    assert!(cross.len() <= 20);
    let gap = brute_max_cut(g) - cross.len();
    let (mut e, mut e2) = (false, false);
    for x in 0..1u64 << cross.len() {
        let removed = x.count_ones() as usize;
        let mut h: BTreeSet<Pair> = s.clone();
        for (i, &c) in cross.iter().enumerate() {
            if x >> i & 1 == 0 {
                h.insert(c);
            }
        }
        if triangle_free(g.n(), &h) {
            e |= s.len() >= removed + gap;
            e2 |= removed <= s.len();
        }
    }
    (e, e2)
}

/// `dist` between two bipartitions given by part-0 masks.
pub fn mask_distance(a: u64, b: u64, n: usize) -> usize {
    let d = (a ^ b).count_ones() as usize;
    d.min(n - d)
}

/// `gap(Π) <= r0` and every `Π′` with `cut(Π) - cut(Π′) <= r0` lies within
/// distance `s0`.
pub fn brute_e1(g: &Graph, label: &[usize], r0: usize, s0: usize) -> bool {
    let n = g.n();
    let edges = edge_list(g);
    let own = cut_of(&edges, label) as i64;
    let all = all_bipartition_cuts(g);
    let b = all.iter().map(|x| x.1).max().unwrap() as i64;
    if b - own > r0 as i64 {
        return false;
    }
    let mine: u64 = (0..n)
        .filter(|&i| label[i] == label[0])
        .map(|i| 1u64 << i)
        .sum();
    all.iter()
        .all(|&(mask, cut)| own - cut as i64 > r0 as i64 || mask_distance(mask, mine, n) <= s0)
}

pub fn partition_from_labels(label: &[usize], l: usize) -> Partition {
    Partition::from_assignment(label, l).unwrap()
}

pub fn set(vs: &[usize]) -> VertexSet {
    vs.iter().copied().collect()
}

/// Smallest `k` for which a proper `k`-colouring exists.
pub fn brute_chromatic(n: usize, edges: &[Pair]) -> usize {
    for k in 1..=n.max(1) {
        let mut colour = vec![0; n];
        loop {
            if edges.iter().all(|&(u, v)| colour[u - 1] != colour[v - 1]) {
                return k;
            }
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                colour[i] += 1;
                if colour[i] < k {
                    break;
                }
                colour[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    n
}
