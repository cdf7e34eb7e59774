//! Collapsing a scale-indexed family of `[0,1]`-valued maps.
//!
//! Scales are grouped by residue modulo `κ = 2 + ⌈log2(1/ε)⌉`; within one
//! residue class the weights `2^i` are spaced by at least `2^κ ≥ 4/ε`, so the
//! weighted sum of differences loses at most an `ε` fraction, up to the
//! fractional-part term `ζ`. Output layout is position-major: coordinate
//! `pos * κ + r` holds residue class `r` of position `pos`.

use thiserror::Error;

use crate::scales::{ceil_guarded, pow2};
use crate::sparse::SparseVec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombineError {
    #[error("value {value} at point {point}, scale {scale}, position {pos} is outside [0, 1]")]
    NonFiniteSum {
        point: usize,
        scale: i32,
        pos: u32,
        value: f64,
    },
    #[error("position {pos} out of range for {num_positions} positions")]
    PositionOutOfRange { pos: u32, num_positions: usize },
    #[error("duplicate entry at point {point}, scale {scale}, position {pos}")]
    DuplicateEntry { point: usize, scale: i32, pos: u32 },
    #[error("base point {0} out of range")]
    BadBase(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
}

/// One nonzero value `f_scale(point)[pos]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyEntry {
    pub scale: i32,
    pub pos: u32,
    pub value: f64,
}

/// Sparse family `{f_i : X → [0,1]^P}` over finitely many points.
#[derive(Debug, Clone)]
pub struct ScaleFamily {
    num_positions: usize,
    eps: f64,
    base: usize,
    /// Per point, sorted by `(pos, scale)`.
    points: Vec<Vec<FamilyEntry>>,
}

/// `2 + ⌈log2(1/ε)⌉`.
pub fn interleave_count(eps: f64) -> usize {
    2 + ceil_guarded((1.0 / eps).log2()).max(0.0) as usize
}

impl ScaleFamily {
    pub fn new(
        num_positions: usize,
        eps: f64,
        base: usize,
        mut points: Vec<Vec<FamilyEntry>>,
    ) -> Result<Self, CombineError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CombineError::InvalidEpsilon(eps));
        }
        if base >= points.len() {
            return Err(CombineError::BadBase(base));
        }
        for (point, entries) in points.iter_mut().enumerate() {
            for e in entries.iter() {
                if !(e.value.is_finite() && (0.0..=1.0).contains(&e.value)) {
                    return Err(CombineError::NonFiniteSum {
                        point,
                        scale: e.scale,
                        pos: e.pos,
                        value: e.value,
                    });
                }
                if e.pos as usize >= num_positions {
                    return Err(CombineError::PositionOutOfRange {
                        pos: e.pos,
                        num_positions,
                    });
                }
            }
            entries.retain(|e| e.value != 0.0);
            entries.sort_by_key(|e| (e.pos, e.scale));
            if let Some(w) = entries
                .windows(2)
                .find(|w| (w[0].pos, w[0].scale) == (w[1].pos, w[1].scale))
            {
                return Err(CombineError::DuplicateEntry {
                    point,
                    scale: w[0].scale,
                    pos: w[0].pos,
                });
            }
        }
        Ok(Self {
            num_positions,
            eps,
            base,
            points,
        })
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_positions(&self) -> usize {
        self.num_positions
    }

    pub fn interleave(&self) -> usize {
        interleave_count(self.eps)
    }

    pub fn dimension(&self) -> usize {
        self.num_positions * self.interleave()
    }

    pub fn entries(&self, x: usize) -> &[FamilyEntry] {
        &self.points[x]
    }

    /// `Σ_i 2^i ‖f_i(x) − f_i(y)‖₁`.
    pub fn weighted_l1(&self, x: usize, y: usize) -> f64 {
        let mut sum = 0.0;
        for_each_difference(&self.points[x], &self.points[y], |_, diffs| {
            sum += diffs.iter().map(|&(i, d)| pow2(i) * d.abs()).sum::<f64>();
        });
        sum
    }
}

/// Calls `f(pos, diffs)` for each position where `a` and `b` differ, with the
/// nonzero `(scale, a − b)` pairs sorted by scale.
fn for_each_difference(
    a: &[FamilyEntry],
    b: &[FamilyEntry],
    mut f: impl FnMut(u32, &[(i32, f64)]),
) {
    let (mut ia, mut ib) = (0, 0);
    let mut buf: Vec<(i32, f64)> = Vec::new();
    while ia < a.len() || ib < b.len() {
        let pos = match (a.get(ia), b.get(ib)) {
            (Some(x), Some(y)) => x.pos.min(y.pos),
            (Some(x), None) => x.pos,
            (None, Some(y)) => y.pos,
            (None, None) => unreachable!(),
        };
        buf.clear();
        loop {
            let ka = a.get(ia).filter(|e| e.pos == pos).map(|e| e.scale);
            let kb = b.get(ib).filter(|e| e.pos == pos).map(|e| e.scale);
            match (ka, kb) {
                (None, None) => break,
                (Some(sa), Some(sb)) if sa == sb => {
                    buf.push((sa, a[ia].value - b[ib].value));
                    ia += 1;
                    ib += 1;
                }
                (Some(sa), sb) if sb.map_or(true, |sb| sa < sb) => {
                    buf.push((sa, a[ia].value));
                    ia += 1;
                }
                _ => {
                    buf.push((kb.unwrap(), -b[ib].value));
                    ib += 1;
                }
            }
        }
        buf.retain(|&(_, d)| d != 0.0);
        if !buf.is_empty() {
            f(pos, &buf);
        }
    }
}

/// `F(x)[pos·κ + r] = Σ_{i ≡ r} 2^i (f_i(x)[pos] − f_i(x₀)[pos])` for every point.
pub fn combine(fam: &ScaleFamily) -> Result<Vec<SparseVec>, CombineError> {
    let kc = fam.interleave() as i32;
    let base = &fam.points[fam.base];
    let mut out = Vec::with_capacity(fam.points.len());
    for (point, entries) in fam.points.iter().enumerate() {
        let mut pairs: Vec<(u32, f64)> = Vec::new();
        for_each_difference(entries, base, |pos, diffs| {
            for &(i, d) in diffs {
                let r = i.rem_euclid(kc) as u32;
                pairs.push((pos * kc as u32 + r, pow2(i) * d));
            }
        });
        let v = SparseVec::from_pairs(pairs);
        if let Some(bad) = v.val.iter().position(|x| !x.is_finite()) {
            let idx = v.idx[bad];
            return Err(CombineError::NonFiniteSum {
                point,
                scale: (idx % kc as u32) as i32,
                pos: idx / kc as u32,
                value: v.val[bad],
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// `ζ(x, y)`: per position, `Σ 2^i frac(|f_i(x) − f_i(y)|)` over the scales
/// above the lowest scale at which that position differs.
pub fn zeta(fam: &ScaleFamily, x: usize, y: usize) -> f64 {
    let mut sum = 0.0;
    for_each_difference(&fam.points[x], &fam.points[y], |_, diffs| {
        for &(i, d) in &diffs[1..] {
            let a = d.abs();
            sum += pow2(i) * (a - a.floor());
        }
    });
    sum
}
