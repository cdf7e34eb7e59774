//! Deterministic tree generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kary::{build_kary_tree, KaryError, VERTEX_CAP};
use crate::tree::RootedTree;

/// Unit-length path on `n ≥ 1` vertices rooted at one end.
pub fn path(n: usize) -> Result<RootedTree, KaryError> {
    if n == 0 {
        return Err(KaryError::InvalidShape);
    }
    if n > VERTEX_CAP {
        return Err(KaryError::SizeOverflow);
    }
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
    Ok(RootedTree::build(0, &edges).expect("path edges form a tree"))
}

pub fn kary(k: usize, h: usize) -> Result<RootedTree, KaryError> {
    build_kary_tree(k, h)
}

/// Uniform attachment: vertex `v` picks its parent uniformly among earlier
/// vertices whose degree is below `max_degree`. Lengths are log-uniform in
/// `[1, 100]`.
pub fn random(n: usize, max_degree: usize, seed: u64) -> Result<RootedTree, KaryError> {
    if n == 0 || (max_degree < 2 && n > 2) || max_degree == 0 {
        return Err(KaryError::InvalidShape);
    }
    if n > VERTEX_CAP {
        return Err(KaryError::SizeOverflow);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut open: Vec<usize> = vec![0];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let slot = rng.gen_range(0..open.len());
        let p = open[slot];
        let len = (rng.gen::<f64>() * 100f64.ln()).exp();
        edges.push((p, v, len));
        degree[p] += 1;
        degree[v] = 1;
        if degree[p] >= max_degree {
            open.swap_remove(slot);
        }
        if degree[v] < max_degree {
            open.push(v);
        }
    }
    Ok(RootedTree::build(0, &edges).expect("attachment edges form a tree"))
}

/// Complete binary tree of height `h` with a star of `2^h` unit leaves hung
/// on every one of its `2^{h+1} − 1` nodes.
pub fn caterpillar_star(h: usize) -> Result<RootedTree, KaryError> {
    let leaves = 1usize.checked_shl(h as u32).ok_or(KaryError::SizeOverflow)?;
    let core = leaves
        .checked_mul(2)
        .map(|x| x - 1)
        .ok_or(KaryError::SizeOverflow)?;
    let n = core
        .checked_mul(leaves + 1)
        .ok_or(KaryError::SizeOverflow)?;
    if n > VERTEX_CAP {
        return Err(KaryError::SizeOverflow);
    }
    let mut edges: Vec<_> = (1..core).map(|v| ((v - 1) / 2, v, 1.0)).collect();
    let mut next = core;
    for v in 0..core {
        for _ in 0..leaves {
            edges.push((v, next, 1.0));
            next += 1;
        }
    }
    Ok(RootedTree::build(0, &edges).expect("caterpillar edges form a tree"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(path(5).unwrap().len(), 5);
        assert_eq!(kary(2, 6).unwrap().len(), 127);
        assert_eq!(caterpillar_star(3).unwrap().len(), 15 + 15 * 8);
        assert_eq!(random(40, 3, 1).unwrap().len(), 40);
    }

    #[test]
    fn random_respects_degree_and_lengths() {
        let t = random(300, 3, 7).unwrap();
        for v in 0..t.len() {
            let deg = t.children(v).len() + usize::from(v != t.root());
            assert!(deg <= 3);
            if v != t.root() {
                assert!((1.0..=100.0).contains(&t.edge_length(v)));
            }
        }
        assert_eq!(t.to_text(), random(300, 3, 7).unwrap().to_text());
    }
}
