//! Helpers shared by the integration tests: random trees and brute-force
//! reference computations that do not reuse library internals.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tree_l1::coloring::MonotoneColoring;
use tree_l1::tree::RootedTree;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree on `n` vertices with shuffled ids. `zero_prob` is the chance
/// that an edge has length 0; other lengths are small integers or
/// log-uniform reals.
pub fn random_tree(r: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> RootedTree {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(r);
    let integer = r.gen_bool(0.5);
    let edges: Vec<(usize, usize, f64)> = (1..n)
        .map(|v| {
            // Bias towards recent vertices for deeper trees.
            let p = if r.gen_bool(0.5) {
                r.gen_range(v.saturating_sub(3)..v)
            } else {
                r.gen_range(0..v)
            };
            let len = if r.gen_bool(zero_prob) {
                0.0
            } else if integer {
                r.gen_range(1..=10) as f64
            } else {
                (r.gen::<f64>() * 8.0 - 3.0).exp2()
            };
            (ids[p], ids[v], len)
        })
        .collect();
    RootedTree::build(ids[0], &edges).unwrap()
}

/// Weighted adjacency lists rebuilt from parent pointers.
pub fn adjacency(t: &RootedTree) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); t.len()];
    for v in 0..t.len() {
        if v != t.root() {
            let p = t.parent(v);
            adj[p].push((v, t.edge_length(v)));
            adj[v].push((p, t.edge_length(v)));
        }
    }
    adj
}

/// Single-source distances by graph search.
pub fn bfs_distances(t: &RootedTree, src: usize) -> Vec<f64> {
    let adj = adjacency(t);
    let mut dist = vec![f64::NAN; t.len()];
    dist[src] = 0.0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &(w, l) in &adj[u] {
            if dist[w].is_nan() {
                dist[w] = dist[u] + l;
                q.push_back(w);
            }
        }
    }
    dist
}

/// All ancestors of `v`, including `v`.
pub fn ancestors(t: &RootedTree, mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while v != t.root() {
        v = t.parent(v);
        out.push(v);
    }
    out
}

/// LCA as the first ancestor of `u` that is also an ancestor of `v`.
pub fn lca_by_sets(t: &RootedTree, u: usize, v: usize) -> usize {
    let av: BTreeSet<usize> = ancestors(t, v).into_iter().collect();
    *ancestors(t, u).iter().find(|a| av.contains(a)).unwrap()
}

/// Edges (by lower vertex) on the path between `u` and `v`.
pub fn path_edges(t: &RootedTree, u: usize, v: usize) -> Vec<usize> {
    let w = lca_by_sets(t, u, v);
    let mut out = Vec::new();
    for mut x in [u, v] {
        while x != w {
            out.push(x);
            x = t.parent(x);
        }
    }
    out
}

/// Distinct colors on the root path of every vertex, by walking edges.
pub fn path_color_counts(t: &RootedTree, chi: &MonotoneColoring) -> Vec<usize> {
    (0..t.len())
        .map(|v| {
            let colors: BTreeSet<usize> = ancestors(t, v)
                .into_iter()
                .filter(|&x| x != t.root())
                .map(|x| chi.color_of(x))
                .collect();
            colors.len()
        })
        .collect()
}

/// Top vertex of the class containing the edge above `v`, by walking up.
pub fn class_top(t: &RootedTree, chi: &MonotoneColoring, v: usize) -> usize {
    let c = chi.color_of(v);
    let mut x = v;
    while x != t.root() && chi.color_of(x) == c {
        x = t.parent(x);
    }
    x
}

/// Total length of each color class.
pub fn class_lengths(t: &RootedTree, chi: &MonotoneColoring) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for v in 0..t.len() {
        if v != t.root() {
            *out.entry(chi.color_of(v)).or_insert(0.0) += t.edge_length(v);
        }
    }
    out
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}
