//! Single-tree embedding and the folded pipeline.
//!
//! For a vertex `v` of class `c`, `Δ_i(v)` lays down `τ_i(v)` unit steps of
//! size `2^i/t²` in column 0, starting right after the rows already consumed
//! at scale `i` by the top vertices of the classes above `c`. The map `f_i`
//! stacks these blocks down the class hierarchy, shuffling the columns of each
//! row by an independent permutation per (scale, class, row) so that sibling
//! subtrees rarely collide. Within one row at most one entry is nonzero.
//!
//! Stored values are in units of `2^i/t²`, so a full step is exactly `1.0` and
//! the scale family handed to the combiner is already normalized to `[0,1]`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::coloring::{monotone_coloring, MonotoneColoring};
use crate::combiner::{combine, interleave_count, CombineError, FamilyEntry, ScaleFamily};
use crate::folding::{default_fold_count, fold_tree_with_k, FoldError};
use crate::scales::{ceil_guarded, floor_guarded, pow2, ScaleError, ScaleTable};
use crate::sparse::SparseVec;
use crate::tree::RootedTree;
use crate::verify::{distortion, DistortionReport, VerifyError};

#[derive(Debug, Clone, Error)]
pub enum EmbedError {
    #[error("epsilon must lie in (0, 1/2], got {0}")]
    InvalidEpsilon(f64),
    #[error("delta must lie in (0, 1/2], got {0}")]
    InvalidDelta(f64),
    #[error("at least one attempt is required")]
    InvalidRetries,
    #[error("vertex {vertex} needs {rows} rows at scale {scale}, only {m} available")]
    RowOverflow {
        vertex: usize,
        scale: i32,
        rows: usize,
        m: usize,
    },
    #[error("target distortion not met after {} attempts (best {})", .0.attempts, .0.report.distortion)]
    RetryBudgetExhausted(Box<EmbeddingResult>),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Combine(#[from] CombineError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Column count `t`, row count `m` and interleave count for one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedParams {
    pub eps: f64,
    pub delta: f64,
    pub t: usize,
    pub m: usize,
    pub interleave: usize,
}

/// `⌈1/ε + log2⌈log2(1/δ)⌉⌉`.
pub fn column_count(eps: f64, delta: f64) -> usize {
    let inner = ceil_guarded((1.0 / delta).log2());
    ceil_guarded(1.0 / eps + inner.log2()) as usize
}

/// `⌈t²(M + log2|E|)⌉`, or 0 for an edgeless tree.
pub fn row_count(t: usize, multiplicity: usize, num_edges: usize) -> usize {
    if num_edges == 0 {
        return 0;
    }
    let tt = (t * t) as f64;
    ceil_guarded(tt * (multiplicity as f64 + (num_edges as f64).log2())) as usize
}

impl EmbedParams {
    pub fn new(
        eps: f64,
        delta: f64,
        multiplicity: usize,
        num_edges: usize,
    ) -> Result<Self, EmbedError> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(EmbedError::InvalidEpsilon(eps));
        }
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(EmbedError::InvalidDelta(delta));
        }
        let t = column_count(eps, delta);
        Ok(Self {
            eps,
            delta,
            t,
            m: row_count(t, multiplicity, num_edges),
            interleave: interleave_count(eps),
        })
    }

    pub fn dimension(&self) -> usize {
        self.m * self.t * self.interleave
    }
}

/// One nonzero entry of `f_scale(v)`; its value is `units · 2^scale / t²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapEntry {
    pub scale: i32,
    pub row: u32,
    pub col: u32,
    pub units: f64,
}

impl MapEntry {
    fn key(&self) -> (i32, u32, u32) {
        (self.scale, self.row, self.col)
    }
}

/// `Δ_i(v)` for every scale, sorted by `(scale, row)`; all entries in column 0.
pub fn delta_all(
    tree: &RootedTree,
    chi: &MonotoneColoring,
    table: &ScaleTable,
    params: &EmbedParams,
    v: usize,
) -> Result<Vec<MapEntry>, EmbedError> {
    let mut out = Vec::new();
    if v == tree.root() {
        return Ok(out);
    }
    let c = chi.color_of(v);
    let d = tree.depth(v) - tree.depth(chi.top_vertex(c));
    let tt = (params.t * params.t) as f64;
    let mut covered = 0.0;
    for (i, tau) in table.nonzero(v) {
        let steps = tt as usize * tau as usize;
        let alpha = params.t * params.t * table.budget_used(chi, c, i) as usize;
        let left = (d - covered) * tt / pow2(i);
        let full = floor_guarded(left).clamp(0.0, steps as f64) as usize;
        let mut rows = full;
        for r in 0..full {
            out.push(MapEntry {
                scale: i,
                row: (alpha + r) as u32,
                col: 0,
                units: 1.0,
            });
        }
        if full < steps {
            let rem = (left - full as f64).clamp(0.0, 1.0);
            if rem > 0.0 {
                out.push(MapEntry {
                    scale: i,
                    row: (alpha + full) as u32,
                    col: 0,
                    units: rem,
                });
                rows += 1;
            }
        }
        if alpha + rows > params.m {
            return Err(EmbedError::RowOverflow {
                vertex: v,
                scale: i,
                rows: alpha + rows,
                m: params.m,
            });
        }
        covered += pow2(i) * tau as f64;
    }
    Ok(out)
}

/// `Δ_i(v)` at a single scale.
pub fn delta(
    tree: &RootedTree,
    chi: &MonotoneColoring,
    table: &ScaleTable,
    params: &EmbedParams,
    v: usize,
    i: i32,
) -> Result<Vec<MapEntry>, EmbedError> {
    let mut all = delta_all(tree, chi, table, params, v)?;
    all.retain(|e| e.scale == i);
    Ok(all)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed from a parent seed and a list of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix(seed), |h, &x| splitmix(h ^ x))
}

/// Column permutations `σ_{i,c,row}` of `[t]`, each a pure function of the
/// master seed and its `(scale, color, row)` label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationStore {
    seed: u64,
    t: usize,
}

impl PermutationStore {
    pub fn new(seed: u64, t: usize) -> Self {
        Self { seed, t }
    }

    pub fn permutation(&self, scale: i32, color: usize, row: u32) -> Vec<u32> {
        let sub = derive_seed(self.seed, &[scale as i64 as u64, color as u64, row as u64]);
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        let mut p: Vec<u32> = (0..self.t as u32).collect();
        p.shuffle(&mut rng);
        p
    }

    /// Applies `σ_{scale,color,row}` to every row of a dense `rows × t` matrix
    /// given row-major: entry `(r, j)` moves to `(r, σ_r(j))`.
    pub fn permute_matrix(&self, scale: i32, color: usize, a: &[f64]) -> Vec<f64> {
        let t = self.t;
        let mut out = vec![0.0; a.len()];
        for (r, row) in a.chunks(t).enumerate() {
            let p = self.permutation(scale, color, r as u32);
            for (j, &x) in row.iter().enumerate() {
                out[r * t + p[j] as usize] = x;
            }
        }
        out
    }
}

/// The maps `f_i(v)` for every vertex and scale of one tree.
#[derive(Debug, Clone)]
pub struct ScaleMaps {
    t: usize,
    m: usize,
    /// Per vertex, sorted by `(scale, row, col)`.
    entries: Vec<Vec<MapEntry>>,
    perms: PermutationStore,
    root: usize,
}

pub fn build_scale_maps(
    tree: &RootedTree,
    chi: &MonotoneColoring,
    table: &ScaleTable,
    params: &EmbedParams,
    seed: u64,
) -> Result<ScaleMaps, EmbedError> {
    let perms = PermutationStore::new(seed, params.t);
    let mut cache: HashMap<(i32, usize, u32), Vec<u32>> = HashMap::new();
    let mut entries: Vec<Vec<MapEntry>> = vec![Vec::new(); tree.len()];
    for &v in tree.bfs_order() {
        if v == tree.root() {
            continue;
        }
        let c = chi.color_of(v);
        let mut f = entries[chi.top_vertex(c)].clone();
        for mut e in delta_all(tree, chi, table, params, v)? {
            // Φ_c = Φ_{ρ(c)} ∘ Π_c: apply the permutation of c first, then
            // those of the classes above it.
            let mut col = e.col;
            let mut x = c;
            while x != chi.sentinel() {
                let p = cache
                    .entry((e.scale, x, e.row))
                    .or_insert_with(|| perms.permutation(e.scale, x, e.row));
                col = p[col as usize];
                x = chi.parent_color(x);
            }
            e.col = col;
            f.push(e);
        }
        f.sort_by_key(MapEntry::key);
        entries[v] = f;
    }
    Ok(ScaleMaps {
        t: params.t,
        m: params.m,
        entries,
        perms,
        root: tree.root(),
    })
}

impl ScaleMaps {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn permutations(&self) -> &PermutationStore {
        &self.perms
    }

    pub fn entries(&self, v: usize) -> &[MapEntry] {
        &self.entries[v]
    }

    pub fn value(&self, e: &MapEntry) -> f64 {
        e.units * pow2(e.scale) / (self.t * self.t) as f64
    }

    /// `Σ_i ‖f_i(x) − f_i(y)‖₁`.
    pub fn scale_l1_sum(&self, x: usize, y: usize) -> f64 {
        let (a, b) = (&self.entries[x], &self.entries[y]);
        let (mut ia, mut ib) = (0, 0);
        let mut sum = 0.0;
        while ia < a.len() || ib < b.len() {
            let ka = a.get(ia).map(MapEntry::key);
            let kb = b.get(ib).map(MapEntry::key);
            match (ka, kb) {
                (Some(p), Some(q)) if p == q => {
                    sum += (self.value(&a[ia]) - self.value(&b[ib])).abs();
                    ia += 1;
                    ib += 1;
                }
                (Some(p), q) if q.map_or(true, |q| p < q) => {
                    sum += self.value(&a[ia]);
                    ia += 1;
                }
                _ => {
                    sum += self.value(&b[ib]);
                    ib += 1;
                }
            }
        }
        sum
    }

    /// The normalized family `t² f_i / 2^i` with position `row · t + col`.
    pub fn to_family(&self, eps: f64) -> Result<ScaleFamily, CombineError> {
        let t = self.t as u32;
        let points = self
            .entries
            .iter()
            .map(|es| {
                es.iter()
                    .map(|e| FamilyEntry {
                        scale: e.scale,
                        pos: e.row * t + e.col,
                        value: e.units,
                    })
                    .collect()
            })
            .collect();
        ScaleFamily::new(self.m * self.t, eps, self.root, points)
    }
}

/// Output of the single-tree embedding.
#[derive(Debug, Clone)]
pub struct SingleTreeEmbedding {
    pub params: EmbedParams,
    pub coords: Vec<SparseVec>,
}

impl SingleTreeEmbedding {
    pub fn dimension(&self) -> usize {
        self.params.dimension()
    }
}

/// Builds the scale table and maps for one colored tree.
pub fn single_tree_maps(
    tree: &RootedTree,
    chi: &MonotoneColoring,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<(EmbedParams, ScaleTable, ScaleMaps), EmbedError> {
    let params = EmbedParams::new(eps, delta, chi.multiplicity(), tree.num_edges())?;
    let table = ScaleTable::build(tree, chi)?;
    let maps = build_scale_maps(tree, chi, &table, &params, seed)?;
    Ok((params, table, maps))
}

pub fn embed_single_tree(
    tree: &RootedTree,
    chi: &MonotoneColoring,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SingleTreeEmbedding, EmbedError> {
    if tree.min_positive_length().is_none() {
        let params = EmbedParams::new(eps, delta, chi.multiplicity(), 0)?;
        return Ok(SingleTreeEmbedding {
            params,
            coords: vec![SparseVec::default(); tree.len()],
        });
    }
    let (params, _, maps) = single_tree_maps(tree, chi, eps, delta, seed)?;
    let family = maps.to_family(eps)?;
    let mut coords = combine(&family)?;
    let inv = 1.0 / (params.t * params.t) as f64;
    for c in &mut coords {
        c.scale(inv);
    }
    Ok(SingleTreeEmbedding { params, coords })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedOptions {
    /// Fold count; defaults to `⌈7/ε⌉`.
    pub k: Option<usize>,
    /// Per-tree `δ`; defaults to `2^{-(k+1)}`.
    pub delta: Option<f64>,
    /// Distortion an attempt must reach; defaults to [`default_target`].
    pub target: Option<f64>,
    /// Number of attempts, at least 1.
    pub retries: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            k: None,
            delta: None,
            target: None,
            retries: 5,
        }
    }
}

/// `1/(1 − 10ε)` when finite, else unbounded.
pub fn default_target(eps: f64) -> f64 {
    if 10.0 * eps < 1.0 {
        1.0 / (1.0 - 10.0 * eps)
    } else {
        f64::INFINITY
    }
}

/// Shape of one folded tree, enough to recompute its row count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldedTreeInfo {
    pub vertices: usize,
    pub edges: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    pub coords: Vec<SparseVec>,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub k: usize,
    pub t: Vec<usize>,
    pub m: Vec<usize>,
    pub folded: Vec<FoldedTreeInfo>,
    /// Seed of the returned attempt.
    pub seed: u64,
    pub attempts: usize,
    pub target: f64,
    pub report: DistortionReport,
}

/// Folds, embeds each folded tree, and concatenates with weight `1/k`.
/// Attempt `a` uses seed `seed + a`; the best attempt is returned.
pub fn embed(
    tree: &RootedTree,
    eps: f64,
    seed: u64,
    opts: &EmbedOptions,
) -> Result<EmbeddingResult, EmbedError> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(EmbedError::InvalidEpsilon(eps));
    }
    if opts.retries == 0 {
        return Err(EmbedError::InvalidRetries);
    }
    let k = opts.k.unwrap_or_else(|| default_fold_count(eps));
    let delta = opts.delta.unwrap_or_else(|| pow2(-(k as i32 + 1)));
    let target = opts.target.unwrap_or_else(|| default_target(eps));

    let (ct, to_contracted) = tree.contract_zero_edges();
    let chi = monotone_coloring(&ct);
    let family = fold_tree_with_k(&ct, &chi, k, eps)?;
    let folded: Vec<FoldedTreeInfo> = family
        .trees
        .iter()
        .zip(&family.colorings)
        .map(|(t, c)| FoldedTreeInfo {
            vertices: t.len(),
            edges: t.num_edges(),
            multiplicity: c.multiplicity(),
        })
        .collect();

    let mut best: Option<EmbeddingResult> = None;
    for attempt in 0..opts.retries {
        let attempt_seed = seed.wrapping_add(attempt as u64);
        let singles: Vec<SingleTreeEmbedding> = (0..k)
            .into_par_iter()
            .map(|i| {
                embed_single_tree(
                    &family.trees[i],
                    &family.colorings[i],
                    eps,
                    delta,
                    derive_seed(attempt_seed, &[i as u64]),
                )
            })
            .collect::<Result<_, _>>()?;

        let scale = 1.0 / k as f64;
        let mut contracted = vec![SparseVec::default(); ct.len()];
        for (v, out) in contracted.iter_mut().enumerate() {
            let mut offset = 0u32;
            for (i, s) in singles.iter().enumerate() {
                let mut part = s.coords[family.vertex_maps[i][v]].clone();
                part.scale(scale);
                out.append_shifted(&part, offset);
                offset += s.dimension() as u32;
            }
        }
        let coords: Vec<SparseVec> = to_contracted
            .iter()
            .map(|&w| contracted[w].clone())
            .collect();
        let report = distortion(&coords, tree)?;
        let result = EmbeddingResult {
            coords,
            dim: singles.iter().map(SingleTreeEmbedding::dimension).sum(),
            eps,
            delta,
            k,
            t: singles.iter().map(|s| s.params.t).collect(),
            m: singles.iter().map(|s| s.params.m).collect(),
            folded: folded.clone(),
            seed: attempt_seed,
            attempts: attempt + 1,
            target,
            report,
        };
        if result.report.distortion <= target {
            return Ok(result);
        }
        let better = best
            .as_ref()
            .map_or(true, |b| result.report.distortion < b.report.distortion);
        if better {
            best = Some(result);
        } else if let Some(b) = best.as_mut() {
            b.attempts = attempt + 1;
        }
    }
    let mut best = best.expect("at least one attempt ran");
    best.attempts = opts.retries;
    Err(EmbedError::RetryBudgetExhausted(Box::new(best)))
}

/// Closed-form total dimension for folded trees with the given shapes.
pub fn pipeline_dimension(eps: f64, delta: f64, folded: &[FoldedTreeInfo]) -> usize {
    let t = column_count(eps, delta);
    let kc = interleave_count(eps);
    folded
        .iter()
        .map(|f| row_count(t, f.multiplicity, f.edges) * t * kc)
        .sum()
}
