//! Monotone (caterpillar) edge colorings.
//!
//! A coloring assigns every edge `(v, parent(v))` a color such that each
//! color class is a contiguous, depth-monotone piece of a root-leaf path.
//! Colors are dense ids `0..C`; the virtual edge above the root carries the
//! sentinel color `C`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::tree::{RootedTree, TreeError};

/// A color class that is not a downward path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub color: usize,
    /// The vertex the class should have continued from.
    pub upper: usize,
    /// The class vertex that does not hang below `upper`.
    pub lower: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColoringError {
    #[error("color {} is not a monotone path: vertex {} does not hang below {}", .0.color, .0.lower, .0.upper)]
    NotMonotone(Violation),
    #[error("expected one color per vertex ({expected}), got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneColoring {
    color_of: Vec<usize>,
    num_colors: usize,
    gamma: Vec<Vec<usize>>,
    parent_color: Vec<usize>,
    class_length: Vec<f64>,
    subtree_edges: Vec<usize>,
    total_edges: usize,
    path_colors: Vec<usize>,
}

/// Checks that each color class of `color_of` (indexed by lower endpoint,
/// root entry ignored) is a downward path.
pub fn validate_colors(t: &RootedTree, color_of: &[usize]) -> Result<(), Violation> {
    let mut classes: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in t.edges() {
        classes.entry(color_of[v]).or_default().push(v);
    }
    for (color, mut members) in classes {
        members.sort_by_key(|&v| (t.hop_depth(v), v));
        for pair in members.windows(2) {
            if t.parent(pair[1]) != pair[0] {
                return Err(Violation {
                    color,
                    upper: pair[0],
                    lower: pair[1],
                });
            }
        }
    }
    Ok(())
}

/// The leaf-heavy path coloring.
///
/// Every edge leaving the root opens a new color. Below that, each vertex
/// continues its own color into the child whose subtree holds the most
/// leaves (smallest id on ties) and opens fresh colors for the remaining
/// children. A light child holds at most half of its parent's leaves, which
/// bounds the colors on any root path by `1 + log2(#leaves)`.
pub fn monotone_coloring(t: &RootedTree) -> MonotoneColoring {
    let n = t.len();
    let mut leaves = vec![0usize; n];
    for &v in t.bfs_order().iter().rev() {
        if t.is_leaf(v) {
            leaves[v] = 1;
        }
        if v != t.root() {
            leaves[t.parent(v)] += leaves[v];
        }
    }
    let mut color = vec![usize::MAX; n];
    let mut next = 0;
    for &v in t.bfs_order() {
        let heavy = t
            .children(v)
            .iter()
            .copied()
            .max_by(|&a, &b| leaves[a].cmp(&leaves[b]).then(b.cmp(&a)));
        for &c in t.children(v) {
            if v != t.root() && Some(c) == heavy {
                color[c] = color[v];
            } else {
                color[c] = next;
                next += 1;
            }
        }
    }
    MonotoneColoring::from_valid(t, color, next)
}

impl MonotoneColoring {
    /// Wraps an explicit coloring after validating it. Color values are
    /// relabeled densely in increasing order.
    pub fn from_colors(t: &RootedTree, color_of: &[usize]) -> Result<Self, ColoringError> {
        if color_of.len() != t.len() {
            return Err(ColoringError::WrongLength {
                expected: t.len(),
                got: color_of.len(),
            });
        }
        validate_colors(t, color_of).map_err(ColoringError::NotMonotone)?;
        let mut used: Vec<usize> = t.edges().map(|v| color_of[v]).collect();
        used.sort_unstable();
        used.dedup();
        let mut dense = vec![usize::MAX; t.len()];
        for v in t.edges() {
            dense[v] = used.binary_search(&color_of[v]).unwrap();
        }
        Ok(Self::from_valid(t, dense, used.len()))
    }

    fn from_valid(t: &RootedTree, mut color_of: Vec<usize>, num_colors: usize) -> Self {
        let sentinel = num_colors;
        color_of[t.root()] = sentinel;
        let mut gamma: Vec<Vec<usize>> = vec![Vec::new(); num_colors];
        let mut class_length = vec![0.0; num_colors];
        for &v in t.bfs_order() {
            if v == t.root() {
                continue;
            }
            let c = color_of[v];
            if gamma[c].is_empty() {
                gamma[c].push(t.parent(v));
            }
            gamma[c].push(v);
            class_length[c] += t.edge_length(v);
        }
        let sizes = t.subtree_sizes();
        let parent_color = gamma.iter().map(|g| color_of[g[0]]).collect();
        let subtree_edges = gamma.iter().map(|g| sizes[g[1]]).collect();
        let mut path_colors = vec![0usize; t.len()];
        for &v in t.bfs_order() {
            if v != t.root() {
                let p = t.parent(v);
                path_colors[v] = path_colors[p] + usize::from(color_of[v] != color_of[p]);
            }
        }
        Self {
            color_of,
            num_colors,
            gamma,
            parent_color,
            class_length,
            subtree_edges,
            total_edges: t.num_edges(),
            path_colors,
        }
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// The color `c0` of the virtual edge above the root.
    pub fn sentinel(&self) -> usize {
        self.num_colors
    }

    /// Color of the edge `(v, parent(v))`; the sentinel for the root.
    pub fn color_of(&self, v: usize) -> usize {
        self.color_of[v]
    }

    pub fn colors(&self) -> &[usize] {
        &self.color_of
    }

    /// Vertices of the colored path, top vertex first.
    pub fn gamma(&self, c: usize) -> &[usize] {
        &self.gamma[c]
    }

    /// The vertex of the class closest to the root (`v_c`).
    pub fn top_vertex(&self, c: usize) -> usize {
        self.gamma[c][0]
    }

    /// Color of the edge above the class's top vertex (`ρ(c)`).
    pub fn parent_color(&self, c: usize) -> usize {
        self.parent_color[c]
    }

    pub fn class_length(&self, c: usize) -> f64 {
        self.class_length[c]
    }

    /// `|E(T(c))|`; the whole edge count for the sentinel.
    pub fn subtree_edge_count(&self, c: usize) -> usize {
        if c == self.sentinel() {
            self.total_edges
        } else {
            self.subtree_edges[c]
        }
    }

    /// Colors on the root path of `v`, deepest first.
    pub fn path_colors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.path_colors[v]);
        let mut c = self.color_of[v];
        while c != self.sentinel() {
            out.push(c);
            c = self.parent_color[c];
        }
        out
    }

    /// `|χ(P_v)|`.
    pub fn path_color_count(&self, v: usize) -> usize {
        self.path_colors[v]
    }

    /// `M(χ)`: the most colors on any root-to-vertex path.
    pub fn multiplicity(&self) -> usize {
        self.path_colors.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self, t: &RootedTree) -> Result<(), Violation> {
        validate_colors(t, &self.color_of)
    }

    /// Length of each class of `χ(P_x)` lying on `P_x`, deepest class first.
    fn path_class_lengths(&self, t: &RootedTree, x: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut low = x;
        let mut c = self.color_of[x];
        while c != self.sentinel() {
            let top = self.top_vertex(c);
            out.push((c, t.depth(low) - t.depth(top)));
            low = top;
            c = self.parent_color[c];
        }
        out
    }

    /// `C_χ(x, y; δ)`: colors seen by exactly one of `P_x`, `P_y` whose share
    /// of `P_xy` is at most `δ` times their class length. Sorted ascending.
    pub fn significant_colors(
        &self,
        t: &RootedTree,
        x: usize,
        y: usize,
        delta: f64,
    ) -> Result<Vec<usize>, TreeError> {
        t.check(x)?;
        t.check(y)?;
        let px = self.path_class_lengths(t, x);
        let py = self.path_class_lengths(t, y);
        let mut out = Vec::new();
        for (mine, other) in [(&px, &py), (&py, &px)] {
            for &(c, on_path) in mine.iter() {
                if other.iter().any(|&(o, _)| o == c) {
                    continue;
                }
                // Inclusive up to float noise in the depth differences.
                if on_path <= delta * self.class_length[c] * (1.0 + 1e-12) {
                    out.push(c);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// `ρ_χ(x, y; δ)`: total class length of the significant colors.
    pub fn rho(&self, t: &RootedTree, x: usize, y: usize, delta: f64) -> Result<f64, TreeError> {
        Ok(self
            .significant_colors(t, x, y, delta)?
            .into_iter()
            .map(|c| self.class_length[c])
            .sum())
    }

    /// One `<vertex> <color>` line per non-root vertex.
    pub fn dump(&self, t: &RootedTree) -> String {
        let mut s = String::new();
        for v in t.edges() {
            writeln!(s, "{} {}", v, self.color_of[v]).unwrap();
        }
        s
    }
}
