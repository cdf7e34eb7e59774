//! Folding the half-line and whole trees into stars.
//!
//! The `i`-th of `k` maps sends `[0, ∞)` into a star whose branch `j` has
//! length `2^{i-1+k(j+1)}`. On `[2^{i+kj}, 2^{i+k(j+1)})` the point climbs the
//! branch until the midpoint `2^{i+k(j+1)-1}` and then walks back to the root,
//! so every map is a mild stretch away from the fold points. Folding a tree
//! applies this to every color class, measured from the top vertex of the
//! class, and glues the images together along the class hierarchy.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coloring::{ColoringError, MonotoneColoring};
use crate::scales::{ceil_guarded, pow2};
use crate::tree::{RootedTree, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoldError {
    #[error("points lie on stars {0} and {1}")]
    StarMismatch(usize, usize),
    #[error("no index satisfies the slack condition for pair ({0}, {1})")]
    NoWitness(usize, usize),
    #[error("fold count must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// A point of the `star`-th star: `offset` from the root along `branch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RStarPoint {
    pub star: usize,
    pub branch: i64,
    pub offset: f64,
}

impl RStarPoint {
    pub fn is_root(&self) -> bool {
        self.offset == 0.0
    }
}

/// `2^{i-1+k(j+1)}`.
pub fn branch_length(i: usize, j: i64, k: usize) -> f64 {
    pow2(i as i32 - 1 + k as i32 * (j as i32 + 1))
}

/// Length of the branch carrying `p`, or 0 at the root.
pub fn branch_length_of(p: &RStarPoint, k: usize) -> f64 {
    if p.is_root() {
        0.0
    } else {
        branch_length(p.star, p.branch, k)
    }
}

/// Image of `x ≥ 0` under the `i`-th fold. The root is reported on branch 0.
pub fn fold_halfline(x: f64, i: usize, k: usize) -> RStarPoint {
    debug_assert!(x >= 0.0 && k >= 2 && (1..=k).contains(&i));
    let root = RStarPoint {
        star: i,
        branch: 0,
        offset: 0.0,
    };
    if x <= 0.0 {
        return root;
    }
    let (ii, kk) = (i as i32, k as i32);
    let mut j = ((x.log2() - i as f64) / k as f64).floor() as i32;
    // The float estimate can be off by one near a power of two; the interval
    // endpoints are exact, so settle it by comparison.
    while pow2(ii + kk * j) > x {
        j -= 1;
    }
    while pow2(ii + kk * (j + 1)) <= x {
        j += 1;
    }
    let lo = pow2(ii + kk * j);
    let fold = pow2(ii + kk * (j + 1) - 1);
    let offset = if x < fold {
        (x - lo) / (1.0 - pow2(1 - kk))
    } else {
        pow2(ii + kk * (j + 1)) - x
    };
    if offset <= 0.0 {
        return root;
    }
    RStarPoint {
        star: i,
        branch: j as i64,
        offset,
    }
}

/// Induced length metric on one star.
pub fn rstar_distance(p: &RStarPoint, q: &RStarPoint) -> Result<f64, FoldError> {
    if p.star != q.star {
        return Err(FoldError::StarMismatch(p.star, q.star));
    }
    if p.is_root() || q.is_root() || p.branch == q.branch {
        Ok((p.offset - q.offset).abs())
    } else {
        Ok(p.offset + q.offset)
    }
}

/// `⌈7/ε⌉`.
pub fn default_fold_count(eps: f64) -> usize {
    ceil_guarded(7.0 / eps) as usize
}

/// The `k` folded trees of a colored tree, with their colorings and vertex maps.
#[derive(Debug, Clone)]
pub struct FoldedFamily {
    pub k: usize,
    pub eps: f64,
    pub trees: Vec<RootedTree>,
    pub colorings: Vec<MonotoneColoring>,
    /// `vertex_maps[i][v]` is the image of `v` in `trees[i]`.
    pub vertex_maps: Vec<Vec<usize>>,
}

impl FoldedFamily {
    /// `d_{T_i}(f_i(x), f_i(y))` for the 0-based index `i`.
    pub fn distance(&self, i: usize, x: usize, y: usize) -> f64 {
        let map = &self.vertex_maps[i];
        self.trees[i].dist(map[x], map[y])
    }

    pub fn average_distance(&self, x: usize, y: usize) -> f64 {
        (0..self.k).map(|i| self.distance(i, x, y)).sum::<f64>() / self.k as f64
    }
}

/// Folds with `k = ⌈7/ε⌉`.
pub fn fold_tree(
    t: &RootedTree,
    chi: &MonotoneColoring,
    eps: f64,
) -> Result<FoldedFamily, FoldError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FoldError::InvalidEpsilon(eps));
    }
    fold_tree_with_k(t, chi, default_fold_count(eps), eps)
}

pub fn fold_tree_with_k(
    t: &RootedTree,
    chi: &MonotoneColoring,
    k: usize,
    eps: f64,
) -> Result<FoldedFamily, FoldError> {
    if k < 2 {
        return Err(FoldError::InvalidK(k));
    }
    // Classes are attached after the class holding their top vertex, which
    // is the reverse of peeling off classes from the leaves.
    let mut order: Vec<usize> = (0..chi.num_colors()).collect();
    order.sort_by_key(|&c| (chi.path_color_count(chi.gamma(c)[1]), c));

    let mut family = FoldedFamily {
        k,
        eps,
        trees: Vec::with_capacity(k),
        colorings: Vec::with_capacity(k),
        vertex_maps: Vec::with_capacity(k),
    };
    for i in 1..=k {
        let (tree, coloring, map) = fold_one(t, chi, &order, i, k)?;
        family.trees.push(tree);
        family.colorings.push(coloring);
        family.vertex_maps.push(map);
    }
    Ok(family)
}

fn fold_one(
    t: &RootedTree,
    chi: &MonotoneColoring,
    order: &[usize],
    i: usize,
    k: usize,
) -> Result<(RootedTree, MonotoneColoring, Vec<usize>), FoldError> {
    const UNSET: usize = usize::MAX;
    let mut map = vec![UNSET; t.len()];
    map[t.root()] = 0;
    let mut next = 1usize;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    // colors[v] for new vertex v; index 0 is the root and is ignored.
    let mut colors: Vec<usize> = vec![0];
    let mut next_color = 0usize;

    for &c in order {
        let gamma = chi.gamma(c);
        let top = gamma[0];
        let base = map[top];
        debug_assert_ne!(base, UNSET);
        let mut branches: BTreeMap<i64, Vec<(f64, usize)>> = BTreeMap::new();
        for &v in &gamma[1..] {
            let p = fold_halfline(t.depth(v) - t.depth(top), i, k);
            if p.is_root() {
                map[v] = base;
            } else {
                branches.entry(p.branch).or_default().push((p.offset, v));
            }
        }
        for (j, mut pts) in branches {
            let tol = 1e-12 * branch_length(i, j, k);
            pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let color = next_color;
            next_color += 1;
            let mut prev_vertex = base;
            let mut prev_offset = 0.0f64;
            for (offset, v) in pts {
                if prev_vertex != base && offset - prev_offset <= tol {
                    map[v] = prev_vertex;
                    continue;
                }
                if prev_vertex == base && offset <= tol {
                    map[v] = base;
                    continue;
                }
                let w = next;
                next += 1;
                edges.push((prev_vertex, w, offset - prev_offset));
                colors.push(color);
                map[v] = w;
                prev_vertex = w;
                prev_offset = offset;
            }
        }
    }
    let tree = RootedTree::build(0, &edges)?;
    let coloring = MonotoneColoring::from_colors(&tree, &colors)?;
    Ok((tree, coloring, map))
}

/// Finds the smallest 0-based `j` with
/// `ε d ≥ (2^{-(k+1)}/k) Σ_{i≠j} ρ_{χ_i}(f_i(x), f_i(y); 2^{-(k+1)})`.
pub fn check_rho_condition(
    family: &FoldedFamily,
    t: &RootedTree,
    x: usize,
    y: usize,
) -> Result<usize, FoldError> {
    t.check(x)?;
    t.check(y)?;
    let k = family.k;
    let delta = pow2(-(k as i32 + 1));
    let mut rho = Vec::with_capacity(k);
    for i in 0..k {
        let map = &family.vertex_maps[i];
        rho.push(family.colorings[i].rho(&family.trees[i], map[x], map[y], delta)?);
    }
    let total: f64 = rho.iter().sum();
    let lhs = family.eps * t.dist(x, y);
    let slack = 1e-9 * lhs.max(f64::MIN_POSITIVE);
    (0..k)
        .find(|&j| delta / k as f64 * (total - rho[j]) <= lhs + slack)
        .ok_or(FoldError::NoWitness(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::monotone_coloring;

    #[test]
    fn branch_lengths() {
        assert_eq!(branch_length(1, 0, 2), 4.0);
        assert_eq!(branch_length(3, -1, 3), 4.0);
        assert_eq!(branch_length(2, 1, 4), 512.0);
    }

    #[test]
    fn fold_of_zero_is_root() {
        assert!(fold_halfline(0.0, 1, 3).is_root());
    }

    #[test]
    fn continuous_at_the_fold() {
        for k in 2..6 {
            for i in 1..=k {
                for j in -2..3i64 {
                    let fold = pow2(i as i32 + k as i32 * (j as i32 + 1) - 1);
                    let p = fold_halfline(fold, i, k);
                    assert_eq!(p.branch, j);
                    let len = branch_length(i, j, k);
                    assert!((p.offset - len).abs() <= 1e-12 * len);
                    let lo = pow2(i as i32 + k as i32 * j as i32);
                    let up = (fold - lo) / (1.0 - pow2(1 - k as i32));
                    assert!((up - len).abs() <= 1e-12 * len);
                }
            }
        }
    }

    #[test]
    fn interval_start_maps_to_root() {
        assert!(fold_halfline(pow2(5), 1, 2).is_root());
        assert!(fold_halfline(pow2(-3), 2, 5).is_root());
    }

    #[test]
    fn star_distances() {
        let p = |branch, offset| RStarPoint {
            star: 1,
            branch,
            offset,
        };
        assert_eq!(rstar_distance(&p(0, 3.0), &p(0, 3.0)).unwrap(), 0.0);
        assert_eq!(rstar_distance(&p(0, 3.0), &p(0, 7.0)).unwrap(), 4.0);
        assert_eq!(rstar_distance(&p(0, 3.0), &p(2, 7.0)).unwrap(), 10.0);
        let q = RStarPoint {
            star: 2,
            branch: 0,
            offset: 1.0,
        };
        assert!(matches!(rstar_distance(&p(0, 1.0), &q), Err(FoldError::StarMismatch(1, 2))));
    }

    #[test]
    fn single_edge_family() {
        let t = RootedTree::build(0, &[(0, 1, 3.0)]).unwrap();
        let chi = monotone_coloring(&t);
        let fam = fold_tree(&t, &chi, 0.5).unwrap();
        assert_eq!(fam.k, 14);
        for i in 0..fam.k {
            let p = fold_halfline(3.0, i + 1, fam.k);
            assert_eq!(fam.trees[i].len(), 2);
            assert!((fam.distance(i, 0, 1) - p.offset).abs() <= 1e-12 * p.offset);
        }
    }

    #[test]
    fn same_point_has_witness() {
        let t = RootedTree::build(0, &[(0, 1, 3.0), (1, 2, 1.0)]).unwrap();
        let chi = monotone_coloring(&t);
        let fam = fold_tree_with_k(&t, &chi, 4, 0.5).unwrap();
        assert_eq!(check_rho_condition(&fam, &t, 2, 2).unwrap(), 0);
    }
}
