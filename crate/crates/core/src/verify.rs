//! Exact distortion measurement over all vertex pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::MonotoneColoring;
use crate::sparse::SparseVec;
use crate::tree::RootedTree;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("coordinates cover {got} vertices, tree has {expected}")]
    MissingVertex { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub expansion: f64,
    pub contraction: f64,
    pub distortion: f64,
    pub worst_expansion_pair: Option<(usize, usize)>,
    pub worst_contraction_pair: Option<(usize, usize)>,
    /// Pairs with positive tree distance.
    pub pair_count: usize,
    pub zero_distance_pairs: usize,
    /// Zero-distance pairs whose coordinates differ; any makes expansion infinite.
    pub zero_distance_violations: usize,
}

/// One coordinate per edge: `len(e)` on `P_x`, else 0.
pub fn isometric_baseline(t: &RootedTree) -> Vec<SparseVec> {
    // Edge index of vertex v is its position among non-root vertices.
    let mut index = vec![u32::MAX; t.len()];
    for (e, v) in t.edges().enumerate() {
        index[v] = e as u32;
    }
    let mut coords = vec![SparseVec::default(); t.len()];
    for &v in t.bfs_order() {
        if v == t.root() {
            continue;
        }
        let mut pairs: Vec<(u32, f64)> = coords[t.parent(v)]
            .idx
            .iter()
            .copied()
            .zip(coords[t.parent(v)].val.iter().copied())
            .collect();
        pairs.push((index[v], t.edge_length(v)));
        coords[v] = SparseVec::from_pairs(pairs);
    }
    coords
}

#[derive(Clone, Copy)]
struct Worst {
    ratio: f64,
    pair: Option<(usize, usize)>,
}

impl Worst {
    const NONE: Worst = Worst {
        ratio: f64::NEG_INFINITY,
        pair: None,
    };

    fn offer(&mut self, ratio: f64, pair: (usize, usize)) {
        *self = self.max(Worst {
            ratio,
            pair: Some(pair),
        });
    }

    /// Larger ratio wins; ties go to the smaller pair, so the reduction is
    /// independent of how work was split.
    fn max(self, other: Worst) -> Worst {
        match self.ratio.total_cmp(&other.ratio) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal => match (self.pair, other.pair) {
                (Some(a), Some(b)) if b < a => other,
                (None, Some(_)) => other,
                _ => self,
            },
        }
    }
}

#[derive(Clone, Copy)]
struct Acc {
    expansion: Worst,
    contraction: Worst,
    pairs: usize,
    zero: usize,
    zero_bad: usize,
}

impl Acc {
    const EMPTY: Acc = Acc {
        expansion: Worst::NONE,
        contraction: Worst::NONE,
        pairs: 0,
        zero: 0,
        zero_bad: 0,
    };

    fn merge(self, o: Acc) -> Acc {
        Acc {
            expansion: self.expansion.max(o.expansion),
            contraction: self.contraction.max(o.contraction),
            pairs: self.pairs + o.pairs,
            zero: self.zero + o.zero,
            zero_bad: self.zero_bad + o.zero_bad,
        }
    }
}

pub fn distortion(coords: &[SparseVec], t: &RootedTree) -> Result<DistortionReport, VerifyError> {
    if coords.len() != t.len() {
        return Err(VerifyError::MissingVertex {
            expected: t.len(),
            got: coords.len(),
        });
    }
    let n = t.len();
    let acc = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut acc = Acc::EMPTY;
            for v in u + 1..n {
                let d = t.dist(u, v);
                let f = coords[u].l1_dist(&coords[v]);
                if d == 0.0 {
                    acc.zero += 1;
                    if f != 0.0 {
                        acc.zero_bad += 1;
                        acc.expansion.offer(f64::INFINITY, (u, v));
                    }
                    continue;
                }
                acc.pairs += 1;
                acc.expansion.offer(f / d, (u, v));
                let c = if f == 0.0 { f64::INFINITY } else { d / f };
                acc.contraction.offer(c, (u, v));
            }
            acc
        })
        .reduce(|| Acc::EMPTY, Acc::merge);

    let (expansion, contraction) = if acc.pairs == 0 && acc.zero_bad == 0 {
        (1.0, 1.0)
    } else {
        (
            acc.expansion.ratio.max(0.0),
            if acc.pairs == 0 { 1.0 } else { acc.contraction.ratio },
        )
    };
    Ok(DistortionReport {
        expansion,
        contraction,
        distortion: expansion * contraction,
        worst_expansion_pair: acc.expansion.pair,
        worst_contraction_pair: acc.contraction.pair,
        pair_count: acc.pairs,
        zero_distance_pairs: acc.zero,
        zero_distance_violations: acc.zero_bad,
    })
}

/// Outcome of checking `(1−ε)d − δρ_χ(x,y;δ) ≤ ‖F(x)−F(y)‖₁ ≤ d` on all pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AllButReport {
    pub ok: bool,
    pub upper_violations: usize,
    pub lower_violations: usize,
    /// Largest `‖F(x)−F(y)‖₁ / d`.
    pub worst_upper_ratio: f64,
    pub worst_lower_pair: Option<(usize, usize)>,
    /// Smallest `ε'` for which the lower bound holds on every pair.
    pub measured_eps: f64,
}

pub fn check_allbut(
    coords: &[SparseVec],
    t: &RootedTree,
    chi: &MonotoneColoring,
    eps_eff: f64,
    delta: f64,
) -> Result<AllButReport, VerifyError> {
    if coords.len() != t.len() {
        return Err(VerifyError::MissingVertex {
            expected: t.len(),
            got: coords.len(),
        });
    }
    let mut report = AllButReport {
        ok: true,
        upper_violations: 0,
        lower_violations: 0,
        worst_upper_ratio: 0.0,
        worst_lower_pair: None,
        measured_eps: 0.0,
    };
    let mut worst_gap = f64::NEG_INFINITY;
    for u in 0..t.len() {
        for v in u + 1..t.len() {
            let d = t.dist(u, v);
            let f = coords[u].l1_dist(&coords[v]);
            if f > d * (1.0 + 1e-9) {
                report.upper_violations += 1;
            }
            if d == 0.0 {
                continue;
            }
            report.worst_upper_ratio = report.worst_upper_ratio.max(f / d);
            let rho = chi.rho(t, u, v, delta).expect("vertices checked above");
            let slack = d - delta * rho - f;
            // (1−ε)d − δρ ≤ f  ⟺  ε ≥ (d − δρ − f)/d
            let needed = slack / d;
            if needed > report.measured_eps {
                report.measured_eps = needed;
            }
            let gap = slack - eps_eff * d;
            if gap > 1e-9 * d {
                report.lower_violations += 1;
            }
            if gap > worst_gap {
                worst_gap = gap;
                report.worst_lower_pair = Some((u, v));
            }
        }
    }
    report.ok = report.upper_violations == 0 && report.lower_violations == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_on_path() {
        let t = RootedTree::build(0, &[(0, 1, 1.5), (1, 2, 2.5)]).unwrap();
        let c = isometric_baseline(&t);
        assert_eq!(c[1].to_dense(2), vec![1.5, 0.0]);
        assert_eq!(c[2].to_dense(2), vec![1.5, 2.5]);
        let r = distortion(&c, &t).unwrap();
        assert_eq!(r.distortion, 1.0);
        assert_eq!(r.pair_count, 3);
    }

    #[test]
    fn scaling_preserves_distortion() {
        let t = RootedTree::build(0, &[(0, 1, 1.0), (0, 2, 2.0), (2, 3, 1.0)]).unwrap();
        let mut c = isometric_baseline(&t);
        c[3].val[1] *= 0.5;
        let r1 = distortion(&c, &t).unwrap();
        for v in &mut c {
            v.scale(3.0);
        }
        let r3 = distortion(&c, &t).unwrap();
        assert!((r1.distortion - r3.distortion).abs() <= 1e-9 * r1.distortion);
        assert_eq!(r1.worst_contraction_pair, r3.worst_contraction_pair);
    }

    #[test]
    fn zero_distance_pairs() {
        let t = RootedTree::build(0, &[(0, 1, 0.0), (0, 2, 1.0)]).unwrap();
        let c = isometric_baseline(&t);
        let r = distortion(&c, &t).unwrap();
        assert_eq!(r.zero_distance_pairs, 1);
        assert_eq!(r.zero_distance_violations, 0);
        assert_eq!(r.distortion, 1.0);

        let mut bad = c.clone();
        bad[1] = SparseVec::from_dense(&[0.5]);
        let r = distortion(&bad, &t).unwrap();
        assert_eq!(r.zero_distance_violations, 1);
        assert!(r.expansion.is_infinite());
    }

    #[test]
    fn collapsed_pair_has_infinite_contraction() {
        let t = RootedTree::build(0, &[(0, 1, 1.0)]).unwrap();
        let c = vec![SparseVec::default(), SparseVec::default()];
        assert!(distortion(&c, &t).unwrap().contraction.is_infinite());
        assert!(distortion(&c[..1], &t).is_err());
    }

    #[test]
    fn vacuous_lower_bound() {
        let t = RootedTree::build(0, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let chi = crate::coloring::monotone_coloring(&t);
        let c = vec![SparseVec::default(); 3];
        let r = check_allbut(&c, &t, &chi, 1.0, 0.25).unwrap();
        assert!(r.ok);
        assert_eq!(r.measured_eps, 1.0);
    }
}
