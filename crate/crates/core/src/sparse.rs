//! Sparse coordinate vectors.

use serde::{Deserialize, Serialize};

/// A sparse real vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl SparseVec {
    /// Builds from unsorted `(index, value)` pairs, summing duplicates.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut out = SparseVec::default();
        for (i, v) in pairs {
            match out.idx.last() {
                Some(&last) if last == i => *out.val.last_mut().unwrap() += v,
                _ => {
                    out.idx.push(i);
                    out.val.push(v);
                }
            }
        }
        out.drop_zeros();
        out
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let mut out = SparseVec::default();
        for (i, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                out.idx.push(i as u32);
                out.val.push(v);
            }
        }
        out
    }

    fn drop_zeros(&mut self) {
        let mut w = 0;
        for r in 0..self.idx.len() {
            if self.val[r] != 0.0 {
                self.idx[w] = self.idx[r];
                self.val[w] = self.val[r];
                w += 1;
            }
        }
        self.idx.truncate(w);
        self.val.truncate(w);
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.val.iter().map(|v| v.abs()).sum()
    }

    pub fn l1_dist(&self, other: &SparseVec) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut sum = 0.0;
        while a < self.idx.len() && b < other.idx.len() {
            match self.idx[a].cmp(&other.idx[b]) {
                std::cmp::Ordering::Less => {
                    sum += self.val[a].abs();
                    a += 1;
                }
                std::cmp::Ordering::Greater => {
                    sum += other.val[b].abs();
                    b += 1;
                }
                std::cmp::Ordering::Equal => {
                    sum += (self.val[a] - other.val[b]).abs();
                    a += 1;
                    b += 1;
                }
            }
        }
        sum += self.val[a..].iter().map(|v| v.abs()).sum::<f64>();
        sum += other.val[b..].iter().map(|v| v.abs()).sum::<f64>();
        sum
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.val {
            *v *= s;
        }
        self.drop_zeros();
    }

    /// Appends `other` shifted by `offset`; `offset` must exceed every index.
    pub fn append_shifted(&mut self, other: &SparseVec, offset: u32) {
        debug_assert!(self.idx.last().map_or(true, |&l| l < offset));
        self.idx.extend(other.idx.iter().map(|&i| i + offset));
        self.val.extend_from_slice(&other.val);
    }

    pub fn max_index(&self) -> Option<u32> {
        self.idx.last().copied()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            out[i as usize] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_merged_and_sorted() {
        let v = SparseVec::from_pairs(vec![(5, 1.0), (2, 2.0), (5, 0.5), (3, 0.0)]);
        assert_eq!(v.idx, vec![2, 5]);
        assert_eq!(v.val, vec![2.0, 1.5]);
    }

    #[test]
    fn distance_matches_dense() {
        let a = SparseVec::from_dense(&[1.0, 0.0, -2.0, 0.0]);
        let b = SparseVec::from_dense(&[0.0, 3.0, -1.0, 0.0]);
        assert_eq!(a.l1_dist(&b), 1.0 + 3.0 + 1.0);
        assert_eq!(a.l1_dist(&a), 0.0);
        assert_eq!(b.to_dense(4), vec![0.0, 3.0, -1.0, 0.0]);
    }
}
