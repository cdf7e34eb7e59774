//! Edge-weighted rooted trees.
//!
//! Vertices are dense ids `0..n`. Every non-root vertex `v` owns the edge
//! `(v, parent(v))`, so edges are addressed by their lower endpoint throughout
//! the crate.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("vertex {0} appears as a child more than once")]
    DuplicateChild(usize),
    #[error("vertex {0} is not connected to the root")]
    DisconnectedVertex(usize),
    #[error("edge above vertex {child} has negative length {length}")]
    NegativeLength { child: usize, length: f64 },
    #[error("edge above vertex {child} has non-finite length")]
    NonFiniteLength { child: usize },
    #[error("parent pointers contain a cycle through vertex {0}")]
    CycleDetected(usize),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An immutable rooted tree with nonnegative edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    root: usize,
    parent: Vec<usize>,
    len: Vec<f64>,
    children: Vec<Vec<usize>>,
    depth: Vec<f64>,
    hops: Vec<usize>,
    bfs: Vec<usize>,
    up: Vec<Vec<usize>>,
}

impl RootedTree {
    /// Builds a tree from `(parent, child, length)` triples.
    ///
    /// The vertex count is `edges.len() + 1`. Children are kept in the order
    /// their edges are listed.
    pub fn build(root: usize, edges: &[(usize, usize, f64)]) -> Result<Self, TreeError> {
        let n = edges.len() + 1;
        if root >= n {
            return Err(TreeError::UnknownVertex(root));
        }
        let mut parent = vec![usize::MAX; n];
        let mut len = vec![0.0; n];
        let mut children = vec![Vec::new(); n];
        for &(p, c, l) in edges {
            if p >= n {
                return Err(TreeError::UnknownVertex(p));
            }
            if c >= n {
                return Err(TreeError::UnknownVertex(c));
            }
            if parent[c] != usize::MAX {
                return Err(TreeError::DuplicateChild(c));
            }
            if l.is_nan() || l < 0.0 {
                return Err(TreeError::NegativeLength { child: c, length: l });
            }
            if !l.is_finite() {
                return Err(TreeError::NonFiniteLength { child: c });
            }
            parent[c] = p;
            len[c] = l;
            children[p].push(c);
        }
        if parent[root] != usize::MAX {
            // n-1 distinct children including the root leaves exactly one
            // non-root vertex without a parent.
            let orphan = (0..n).find(|&v| v != root && parent[v] == usize::MAX);
            return Err(match orphan {
                Some(v) => TreeError::DisconnectedVertex(v),
                None => TreeError::CycleDetected(root),
            });
        }
        parent[root] = root;
        Self::finish(root, parent, len, children)
    }

    fn finish(
        root: usize,
        parent: Vec<usize>,
        len: Vec<f64>,
        children: Vec<Vec<usize>>,
    ) -> Result<Self, TreeError> {
        let n = parent.len();
        let mut depth = vec![0.0; n];
        let mut hops = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut bfs = Vec::with_capacity(n);
        bfs.push(root);
        seen[root] = true;
        let mut head = 0;
        while head < bfs.len() {
            let v = bfs[head];
            head += 1;
            for &c in &children[v] {
                if seen[c] {
                    return Err(TreeError::CycleDetected(c));
                }
                seen[c] = true;
                depth[c] = depth[v] + len[c];
                hops[c] = hops[v] + 1;
                bfs.push(c);
            }
        }
        if let Some(v) = (0..n).find(|&v| !seen[v]) {
            return Err(TreeError::CycleDetected(v));
        }
        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut up = Vec::with_capacity(levels);
        up.push(parent.clone());
        for j in 1..levels {
            let prev: &Vec<usize> = &up[j - 1];
            let next = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        Ok(Self {
            root,
            parent,
            len,
            children,
            depth,
            hops,
            bfs,
            up,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    /// Length of the edge `(v, parent(v))`; zero for the root.
    pub fn edge_length(&self, v: usize) -> f64 {
        self.len[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Weighted distance from the root.
    pub fn depth(&self, v: usize) -> f64 {
        self.depth[v]
    }

    /// Number of edges between `v` and the root.
    pub fn hop_depth(&self, v: usize) -> usize {
        self.hops[v]
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs
    }

    /// Non-root vertices, i.e. the edges of the tree.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| v != self.root)
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn check(&self, v: usize) -> Result<(), TreeError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(TreeError::UnknownVertex(v))
        }
    }

    pub fn lca(&self, u: usize, v: usize) -> Result<usize, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.lca_unchecked(u, v))
    }

    pub(crate) fn lca_unchecked(&self, mut u: usize, mut v: usize) -> usize {
        if self.hops[u] < self.hops[v] {
            std::mem::swap(&mut u, &mut v);
        }
        let mut diff = self.hops[u] - self.hops[v];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                u = self.up[j][u];
            }
            diff >>= 1;
            j += 1;
        }
        if u == v {
            return u;
        }
        for j in (0..self.up.len()).rev() {
            if self.up[j][u] != self.up[j][v] {
                u = self.up[j][u];
                v = self.up[j][v];
            }
        }
        self.parent[u]
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<f64, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.dist(u, v))
    }

    /// Unchecked distance; panics on out-of-range ids.
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        let w = self.lca_unchecked(u, v);
        ((self.depth[u] - self.depth[w]) + (self.depth[v] - self.depth[w])).max(0.0)
    }

    /// Edges of the root path `P_v`, root side first, as their lower endpoints.
    pub fn root_path_edges(&self, v: usize) -> Result<Vec<usize>, TreeError> {
        self.check(v)?;
        let mut out = Vec::with_capacity(self.hops[v]);
        let mut x = v;
        while x != self.root {
            out.push(x);
            x = self.parent[x];
        }
        out.reverse();
        Ok(out)
    }

    /// Is `a` an ancestor of `v` (or `v` itself)?
    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        self.hops[a] <= self.hops[v] && self.lca_unchecked(a, v) == a
    }

    /// Smallest strictly positive edge length, if any.
    pub fn min_positive_length(&self) -> Option<f64> {
        self.edges()
            .map(|v| self.len[v])
            .filter(|&l| l > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn total_length(&self) -> f64 {
        self.edges().map(|v| self.len[v]).sum()
    }

    /// Number of vertices in the subtree rooted at each vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.len()];
        for &v in self.bfs.iter().rev() {
            if v != self.root {
                size[self.parent[v]] += size[v];
            }
        }
        size
    }

    /// Merges the endpoints of every zero-length edge.
    ///
    /// Returns the contracted tree and the map from old to new ids. Each
    /// zero-length component is represented by its topmost vertex; new ids
    /// follow the old ids of the representatives, so a tree without zero
    /// edges maps to itself under the identity.
    pub fn contract_zero_edges(&self) -> (RootedTree, Vec<usize>) {
        let n = self.len();
        let mut rep = vec![0usize; n];
        for &v in &self.bfs {
            rep[v] = if v == self.root || self.len[v] > 0.0 {
                v
            } else {
                rep[self.parent[v]]
            };
        }
        let mut new_id = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            if rep[v] == v {
                new_id[v] = next;
                next += 1;
            }
        }
        let mut edges = Vec::with_capacity(next.saturating_sub(1));
        for &v in &self.bfs {
            if v != self.root && rep[v] == v {
                edges.push((new_id[rep[self.parent[v]]], new_id[v], self.len[v]));
            }
        }
        let tree = RootedTree::build(new_id[self.root], &edges)
            .expect("contraction of a valid tree is a valid tree");
        let map = (0..n).map(|v| new_id[rep[v]]).collect();
        (tree, map)
    }

    /// Serializes in the text format read by [`parse_tree`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "root {}", self.root).unwrap();
        for &v in &self.bfs {
            for &c in &self.children[v] {
                writeln!(s, "{} {} {}", v, c, self.len[c]).unwrap();
            }
        }
        s
    }
}

/// Parses the line-oriented tree format: `root <id>` followed by one
/// `<parent> <child> <length>` line per edge. `#` starts a comment.
pub fn parse_tree(text: &str) -> Result<RootedTree, TreeError> {
    let mut root = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| TreeError::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if root.is_none() {
            match fields.as_slice() {
                ["root", id] => {
                    let id = id
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad root id {id:?}: {e}")))?;
                    root = Some(id);
                }
                _ => return Err(parse_err("expected `root <id>`".into())),
            }
            continue;
        }
        match fields.as_slice() {
            [p, c, l] => {
                let p = p
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad parent id {p:?}: {e}")))?;
                let c = c
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad child id {c:?}: {e}")))?;
                let l = l
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("bad length {l:?}: {e}")))?;
                edges.push((p, c, l));
            }
            _ => return Err(parse_err("expected `<parent> <child> <length>`".into())),
        }
    }
    let root = root.ok_or(TreeError::Parse {
        line: 0,
        msg: "missing `root <id>` line".into(),
    })?;
    RootedTree::build(root, &edges)
}
