//! Scale selectors.
//!
//! For every color `c` the branching factor `κ(c)` compares the edge count of
//! the subtree under `c` with the one under its parent color, and the
//! potential `φ(c)` accumulates `κ` down the color hierarchy. For each vertex
//! `v` in class `c`, `τ_i(v)` counts how many steps of size `2^i` are spent
//! covering `d(v, v_c)`, greedily from the smallest admissible scale and
//! capped so that the budget `φ(c)` is shared with the top vertices of the
//! classes above.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::coloring::MonotoneColoring;
use crate::tree::{RootedTree, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error("tree has no edge of positive length")]
    DegenerateTree,
    #[error("unknown color {0}")]
    UnknownColor(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// `2^i` as a float.
pub fn pow2(i: i32) -> f64 {
    2f64.powi(i)
}

const GUARD: f64 = 1e-12;

/// `⌈x⌉` that ignores float noise just above an integer.
pub fn ceil_guarded(x: f64) -> f64 {
    (x - GUARD * x.abs().max(1.0)).ceil()
}

/// `⌊x⌋` that ignores float noise just below an integer.
pub fn floor_guarded(x: f64) -> f64 {
    (x + GUARD * x.abs().max(1.0)).floor()
}

/// `⌊log2(a / b)⌋` for positive integers `a ≥ b`, computed exactly.
fn floor_log2_ratio(a: usize, b: usize) -> u32 {
    debug_assert!(b >= 1 && a >= b);
    let mut q = 0;
    while (b as u128) << (q + 1) <= a as u128 {
        q += 1;
    }
    q
}

/// `⌊log2(m(T) / (M(χ) + log2 |E|))⌋`, the smallest scale that can be nonzero.
pub fn min_scale(min_len: f64, multiplicity: usize, num_edges: usize) -> i32 {
    let denom = multiplicity as f64 + (num_edges as f64).log2();
    (min_len / denom).log2().floor() as i32
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTable {
    kappa: Vec<u32>,
    phi: Vec<u32>,
    i_min: i32,
    /// Per vertex: `τ_{i_min + j}` at index `j`, trailing zeros trimmed.
    tau: Vec<Vec<u32>>,
}

impl ScaleTable {
    pub fn build(t: &RootedTree, chi: &MonotoneColoring) -> Result<Self, ScaleError> {
        let min_len = t.min_positive_length().ok_or(ScaleError::DegenerateTree)?;
        let sentinel = chi.sentinel();
        let nc = chi.num_colors();

        let mut kappa = vec![0u32; nc];
        let mut phi = vec![0u32; nc + 1];
        // Parents are created before children, but ids need not be ordered,
        // so resolve φ along each chain with memoization.
        let mut done = vec![false; nc + 1];
        done[sentinel] = true;
        for c in 0..nc {
            let parent_edges = chi.subtree_edge_count(chi.parent_color(c));
            kappa[c] = floor_log2_ratio(parent_edges, chi.subtree_edge_count(c)) + 1;
        }
        for c in 0..nc {
            let mut chain = Vec::new();
            let mut x = c;
            while !done[x] {
                chain.push(x);
                x = chi.parent_color(x);
            }
            for &y in chain.iter().rev() {
                phi[y] = kappa[y] + phi[chi.parent_color(y)];
                done[y] = true;
            }
        }

        let i_min = min_scale(min_len, chi.multiplicity(), t.num_edges());
        let mut tau: Vec<Vec<u32>> = vec![Vec::new(); t.len()];
        for &v in t.bfs_order() {
            if v == t.root() {
                continue;
            }
            let c = chi.color_of(v);
            let top = chi.top_vertex(c);
            let d = t.depth(v) - t.depth(top);
            if d <= 0.0 {
                continue;
            }
            let mut row = Vec::new();
            let mut covered = 0.0f64;
            let mut i = i_min;
            loop {
                let part_a = ceil_guarded((d - covered.min(d)) / pow2(i));
                let part_b = phi[c] as f64 - budget_used(chi, &tau, i_min, c, i) as f64;
                let val = part_a.min(part_b).max(0.0);
                row.push(val as u32);
                covered += pow2(i) * val;
                if part_a <= part_b {
                    break;
                }
                i += 1;
            }
            while row.last() == Some(&0) {
                row.pop();
            }
            tau[v] = row;
        }
        Ok(Self {
            kappa,
            phi,
            i_min,
            tau,
        })
    }

    pub fn i_min(&self) -> i32 {
        self.i_min
    }

    pub fn kappa(&self, c: usize) -> Result<u32, ScaleError> {
        self.kappa.get(c).copied().ok_or(ScaleError::UnknownColor(c))
    }

    /// `φ(c)`, with `φ(c0) = 0` for the sentinel.
    pub fn phi(&self, c: usize) -> Result<u32, ScaleError> {
        self.phi.get(c).copied().ok_or(ScaleError::UnknownColor(c))
    }

    pub fn tau(&self, v: usize, i: i32) -> Result<u32, ScaleError> {
        let row = self.tau.get(v).ok_or(TreeError::UnknownVertex(v))?;
        Ok(lookup(row, self.i_min, i))
    }

    /// Largest scale with `τ_i(v) ≠ 0`.
    pub fn i_max(&self, v: usize) -> Option<i32> {
        let row = &self.tau[v];
        (!row.is_empty()).then(|| self.i_min + row.len() as i32 - 1)
    }

    /// Nonzero `(i, τ_i(v))` pairs in increasing scale order.
    pub fn nonzero(&self, v: usize) -> impl Iterator<Item = (i32, u32)> + '_ {
        let base = self.i_min;
        self.tau[v]
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(move |(j, &x)| (base + j as i32, x))
    }

    /// `Σ_i 2^i τ_i(v)`.
    pub fn weighted_sum(&self, v: usize) -> f64 {
        self.nonzero(v).map(|(i, x)| pow2(i) * x as f64).sum()
    }

    /// `Σ_{c' ∈ χ(E(P_v))} τ_i(v_{c'})` for a vertex whose edge has color `c`.
    pub fn budget_used(&self, chi: &MonotoneColoring, c: usize, i: i32) -> u32 {
        budget_used(chi, &self.tau, self.i_min, c, i)
    }

    /// `<vertex> <i> <tau>` lines for every nonzero entry.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for v in 0..self.tau.len() {
            for (i, x) in self.nonzero(v) {
                writeln!(s, "{v} {i} {x}").unwrap();
            }
        }
        s
    }
}

fn lookup(row: &[u32], i_min: i32, i: i32) -> u32 {
    if i < i_min {
        return 0;
    }
    row.get((i - i_min) as usize).copied().unwrap_or(0)
}

fn budget_used(chi: &MonotoneColoring, tau: &[Vec<u32>], i_min: i32, c: usize, i: i32) -> u32 {
    let mut sum = 0;
    let mut x = c;
    while x != chi.sentinel() {
        sum += lookup(&tau[chi.top_vertex(x)], i_min, i);
        x = chi.parent_color(x);
    }
    sum
}

/// Checks `#{c' ∈ χ(E(T(c))) : φ(c') − φ(c) = k} ≤ 2^k` for every color and
/// offset. Returns the first `(color, offset, count)` that exceeds it.
pub fn check_count_bound(
    table: &ScaleTable,
    chi: &MonotoneColoring,
) -> Result<(), (usize, u32, usize)> {
    let mut counts: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    for c in 0..chi.num_colors() {
        let mut a = c;
        while a != chi.sentinel() {
            *counts.entry((a, table.phi[c] - table.phi[a])).or_default() += 1;
            a = chi.parent_color(a);
        }
    }
    for ((c, k), count) in counts {
        if k >= usize::BITS || count > 1usize << k {
            return Err((c, k, count));
        }
    }
    Ok(())
}
