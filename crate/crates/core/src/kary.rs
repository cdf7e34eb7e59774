//! Warm-up embedding of unweighted complete k-ary trees.
//!
//! Every edge gets a label of `m` rows, each row a single basis index in
//! `[t]` carrying weight `1/m`. A vertex at depth `j` is mapped to the
//! concatenation of the labels on its root path followed by zero rows, so
//! ancestor pairs are embedded isometrically. Pairs that contract too much
//! are repaired by resampling the labels on the path between them.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scales::ceil_guarded;
use crate::sparse::SparseVec;
use crate::tree::RootedTree;

/// Largest tree the generators will build.
pub const VERTEX_CAP: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KaryError {
    #[error("tree would exceed {VERTEX_CAP} vertices")]
    SizeOverflow,
    #[error("arity must be at least 2 and height at least 1")]
    InvalidShape,
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("edge above vertex {0} has no label")]
    MissingLabel(usize),
    #[error("{remaining} violated pairs remain after {rounds} rounds")]
    RoundBudgetExceeded { rounds: u64, remaining: usize },
}

/// `(k^{h+1} − 1)/(k − 1)` vertices, numbered in BFS order; children of `v`
/// are `v·k + 1 ..= v·k + k`.
pub fn build_kary_tree(k: usize, h: usize) -> Result<RootedTree, KaryError> {
    if k < 2 || h < 1 {
        return Err(KaryError::InvalidShape);
    }
    let mut n: usize = 1;
    let mut level: usize = 1;
    for _ in 0..h {
        level = level.checked_mul(k).ok_or(KaryError::SizeOverflow)?;
        n = n.checked_add(level).ok_or(KaryError::SizeOverflow)?;
        if n > VERTEX_CAP {
            return Err(KaryError::SizeOverflow);
        }
    }
    let edges: Vec<_> = (1..n).map(|v| ((v - 1) / k, v, 1.0)).collect();
    Ok(RootedTree::build(0, &edges).expect("k-ary edges form a tree"))
}

/// Smallest `q` with `2^q ≥ k`.
fn ceil_log2(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

/// Random edge labels for a complete k-ary tree.
#[derive(Debug, Clone)]
pub struct KaryLabels {
    pub k: usize,
    pub h: usize,
    pub eps: f64,
    pub t: usize,
    pub m: usize,
    /// Per vertex, the `m` basis indices of the label on its parent edge.
    /// Empty for the root.
    pub labels: Vec<Vec<u16>>,
    pub seed: u64,
    pub resamples: u64,
    rng: ChaCha8Rng,
}

impl KaryLabels {
    /// `t = ⌈1/ε⌉`, `m = t·⌈log2 k⌉`, all labels drawn i.i.d. uniform.
    pub fn sample(tree: &RootedTree, k: usize, h: usize, eps: f64, seed: u64) -> Result<Self, KaryError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(KaryError::InvalidEpsilon(eps));
        }
        if k < 2 || h < 1 {
            return Err(KaryError::InvalidShape);
        }
        let t = ceil_guarded(1.0 / eps) as usize;
        let m = t * ceil_log2(k);
        let mut out = Self {
            k,
            h,
            eps,
            t,
            m,
            labels: vec![Vec::new(); tree.len()],
            seed,
            resamples: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for v in tree.edges() {
            out.draw(v);
        }
        Ok(out)
    }

    fn draw(&mut self, v: usize) {
        let t = self.t as u16;
        self.labels[v] = (0..self.m).map(|_| self.rng.gen_range(0..t)).collect();
    }

    /// Number of rows of `g`, one `m`-row block per depth level.
    pub fn rows(&self) -> usize {
        self.m * self.h
    }

    pub fn dimension(&self) -> usize {
        self.rows() * self.t
    }
}

/// `g(v)`: per vertex the column of each nonzero row, rows `0..depth·m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KaryCoords {
    pub m: usize,
    pub t: usize,
    pub rows: Vec<Vec<u16>>,
}

impl KaryCoords {
    /// `‖g(u) − g(v)‖₁`; a shared row with different columns counts twice.
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (&self.rows[u], &self.rows[v]);
        let shared = a.len().min(b.len());
        let differing = a[..shared].iter().zip(&b[..shared]).filter(|(x, y)| x != y).count();
        let only = a.len() + b.len() - 2 * shared;
        (only + 2 * differing) as f64 / self.m as f64
    }

    /// Flattened sparse vectors, index `row·t + col`, value `1/m`.
    pub fn to_sparse(&self) -> Vec<SparseVec> {
        let w = 1.0 / self.m as f64;
        self.rows
            .iter()
            .map(|r| SparseVec {
                idx: r
                    .iter()
                    .enumerate()
                    .map(|(row, &col)| (row * self.t + col as usize) as u32)
                    .collect(),
                val: vec![w; r.len()],
            })
            .collect()
    }
}

pub fn g_embed(tree: &RootedTree, labels: &KaryLabels) -> Result<KaryCoords, KaryError> {
    let mut rows: Vec<Vec<u16>> = vec![Vec::new(); tree.len()];
    for &v in tree.bfs_order() {
        if v == tree.root() {
            continue;
        }
        let label = labels.labels.get(v).filter(|l| l.len() == labels.m);
        let label = label.ok_or(KaryError::MissingLabel(v))?;
        let mut r = rows[tree.parent(v)].clone();
        r.extend_from_slice(label);
        rows[v] = r;
    }
    Ok(KaryCoords {
        m: labels.m,
        t: labels.t,
        rows,
    })
}

fn is_violated(coords: &KaryCoords, tree: &RootedTree, u: usize, v: usize, eps: f64, c: f64) -> bool {
    let factor = 1.0 - c * eps;
    // A nonpositive threshold can never be undercut.
    if factor <= 1e-12 {
        return false;
    }
    coords.distance(u, v) <= factor * tree.dist(u, v)
}

/// All unordered pairs `u < v` with `‖g(u)−g(v)‖₁ ≤ (1 − Cε) d(u,v)`, sorted by
/// `(d, u, v)`.
pub fn violated_pairs(coords: &KaryCoords, tree: &RootedTree, eps: f64, c: f64) -> Vec<(usize, usize)> {
    let mut out: Vec<(f64, usize, usize)> = Vec::new();
    for u in 0..tree.len() {
        for v in u + 1..tree.len() {
            if is_violated(coords, tree, u, v, eps, c) {
                out.push((tree.dist(u, v), u, v));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    out.into_iter().map(|(_, u, v)| (u, v)).collect()
}

/// Constant in the contraction threshold `1 − Cε`.
pub const VIOLATION_CONSTANT: f64 = 14.0;

#[derive(Debug, Clone)]
pub struct KaryEmbedding {
    pub tree: RootedTree,
    pub labels: KaryLabels,
    pub coords: KaryCoords,
    pub rounds: u64,
}

/// Hop distances are integers, so violated pairs are keyed exactly.
type PairKey = (usize, usize, usize);

/// Samples labels and resamples the path of the smallest violated pair until
/// none remain or `max_rounds` resamplings were spent.
pub fn embed_kary(
    k: usize,
    h: usize,
    eps: f64,
    seed: u64,
    max_rounds: u64,
) -> Result<KaryEmbedding, KaryError> {
    embed_kary_with_constant(k, h, eps, seed, max_rounds, VIOLATION_CONSTANT)
}

/// [`embed_kary`] with threshold `1 − cε` in place of `1 − 14ε`.
pub fn embed_kary_with_constant(
    k: usize,
    h: usize,
    eps: f64,
    seed: u64,
    max_rounds: u64,
    c: f64,
) -> Result<KaryEmbedding, KaryError> {
    let tree = build_kary_tree(k, h)?;
    let mut labels = KaryLabels::sample(&tree, k, h, eps, seed)?;
    let mut coords = g_embed(&tree, &labels)?;
    let n = tree.len();
    let key = |u: usize, v: usize| (tree.hop_depth(u) + tree.hop_depth(v) - 2 * tree.hop_depth(tree.lca_unchecked(u, v)), u, v);

    let mut violated: BTreeSet<PairKey> = violated_pairs(&coords, &tree, eps, c)
        .into_iter()
        .map(|(u, v)| key(u, v))
        .collect();
    let mut rounds = 0u64;
    while let Some(&(_, u, v)) = violated.iter().next() {
        if rounds == max_rounds {
            return Err(KaryError::RoundBudgetExceeded {
                rounds,
                remaining: violated.len(),
            });
        }
        rounds += 1;
        let w = tree.lca_unchecked(u, v);
        let mut path = Vec::new();
        for mut x in [u, v] {
            while x != w {
                path.push(x);
                x = tree.parent(x);
            }
        }
        path.sort_unstable();
        for &x in &path {
            labels.draw(x);
        }
        labels.resamples += 1;
        coords = g_embed(&tree, &labels)?;

        // Only vertices below a resampled edge moved.
        let mut moved = vec![false; n];
        for &x in tree.bfs_order() {
            if x != tree.root() && (moved[tree.parent(x)] || path.binary_search(&x).is_ok()) {
                moved[x] = true;
            }
        }
        for a in (0..n).filter(|&a| moved[a]) {
            for b in 0..n {
                if a == b || (moved[b] && b < a) {
                    continue;
                }
                let (x, y) = (a.min(b), a.max(b));
                let kxy = key(x, y);
                if is_violated(&coords, &tree, x, y, eps, c) {
                    violated.insert(kxy);
                } else {
                    violated.remove(&kxy);
                }
            }
        }
    }
    Ok(KaryEmbedding {
        tree,
        labels,
        coords,
        rounds,
    })
}
