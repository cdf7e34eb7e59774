//! Structured output documents shared by `embed`, `kary`, `verify` and the
//! baseline.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embedder::EmbeddingResult;
use crate::sparse::SparseVec;
use crate::verify::DistortionReport;

/// Infinite ratios are written as `null` since JSON has no infinity.
mod inf_as_null {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordRow {
    Sparse { idx: Vec<u32>, val: Vec<f64> },
    Dense(Vec<f64>),
}

impl CoordRow {
    pub fn to_sparse(&self) -> SparseVec {
        match self {
            CoordRow::Sparse { idx, val } => SparseVec::from_pairs(idx.iter().copied().zip(val.iter().copied()).collect()),
            CoordRow::Dense(v) => SparseVec::from_dense(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    pub t: Vec<usize>,
    pub m: Vec<usize>,
    pub dim: usize,
    pub seed: Option<u64>,
    pub attempts: u64,
    #[serde(with = "inf_as_null")]
    pub expansion: f64,
    #[serde(with = "inf_as_null")]
    pub contraction: f64,
    #[serde(with = "inf_as_null")]
    pub distortion: f64,
    #[serde(default)]
    pub worst_expansion_pair: Option<(usize, usize)>,
    #[serde(default)]
    pub worst_contraction_pair: Option<(usize, usize)>,
    #[serde(default)]
    pub pair_count: usize,
    #[serde(default)]
    pub target_met: Option<bool>,
    pub coords: Vec<CoordRow>,
}

pub fn coord_rows(coords: &[SparseVec], dim: usize, dense: bool) -> Vec<CoordRow> {
    coords
        .iter()
        .map(|c| {
            if dense {
                CoordRow::Dense(c.to_dense(dim))
            } else {
                CoordRow::Sparse {
                    idx: c.idx.clone(),
                    val: c.val.clone(),
                }
            }
        })
        .collect()
}

impl OutputDocument {
    /// Document with only the report fields set.
    pub fn from_report(report: &DistortionReport, coords: Vec<CoordRow>, dim: usize) -> Self {
        Self {
            eps: None,
            delta: None,
            k: None,
            h: None,
            t: Vec::new(),
            m: Vec::new(),
            dim,
            seed: None,
            attempts: 0,
            expansion: report.expansion,
            contraction: report.contraction,
            distortion: report.distortion,
            worst_expansion_pair: report.worst_expansion_pair,
            worst_contraction_pair: report.worst_contraction_pair,
            pair_count: report.pair_count,
            target_met: None,
            coords,
        }
    }

    pub fn from_embedding(r: &EmbeddingResult, dense: bool) -> Self {
        let mut doc = Self::from_report(&r.report, coord_rows(&r.coords, r.dim, dense), r.dim);
        doc.eps = Some(r.eps);
        doc.delta = Some(r.delta);
        doc.k = Some(r.k);
        doc.t = r.t.clone();
        doc.m = r.m.clone();
        doc.seed = Some(r.seed);
        doc.attempts = r.attempts as u64;
        doc.target_met = Some(r.report.distortion <= r.target);
        doc
    }

    pub fn sparse_coords(&self) -> Vec<SparseVec> {
        self.coords.iter().map(CoordRow::to_sparse).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// Header of the benchmark CSV.
pub const BENCH_HEADER: &str = "family,n,eps,dim,expansion,contraction,distortion,attempts,millis,status";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub eps: f64,
    pub dim: usize,
    pub expansion: f64,
    pub contraction: f64,
    pub distortion: f64,
    pub attempts: usize,
    pub millis: u128,
    pub status: String,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.eps,
            self.dim,
            self.expansion,
            self.contraction,
            self.distortion,
            self.attempts,
            self.millis,
            self.status
        )
    }
}
