//! One benchmark measurement per (instance, eps, seed).

use std::time::Instant;

use crate::embedder::{embed, EmbedError, EmbedOptions};
use crate::output::BenchRow;
use crate::tree::RootedTree;
use crate::verify::{distortion, isometric_baseline};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Pipeline,
    Baseline,
}

pub fn run_instance(
    family: &str,
    tree: &RootedTree,
    eps: f64,
    seed: u64,
    mode: BenchMode,
    opts: &EmbedOptions,
) -> BenchRow {
    let start = Instant::now();
    let mut row = BenchRow {
        family: family.to_string(),
        n: tree.len(),
        eps,
        dim: 0,
        expansion: f64::NAN,
        contraction: f64::NAN,
        distortion: f64::NAN,
        attempts: 0,
        millis: 0,
        status: String::new(),
    };
    match mode {
        BenchMode::Baseline => {
            let coords = isometric_baseline(tree);
            let r = distortion(&coords, tree).expect("baseline covers every vertex");
            row.dim = tree.num_edges();
            row.expansion = r.expansion;
            row.contraction = r.contraction;
            row.distortion = r.distortion;
            row.attempts = 1;
            row.status = "ok".into();
        }
        BenchMode::Pipeline => {
            let (res, status) = match embed(tree, eps, seed, opts) {
                Ok(r) => (Some(r), "ok".to_string()),
                Err(EmbedError::RetryBudgetExhausted(r)) => (Some(*r), "target-missed".to_string()),
                Err(e) => (None, format!("error: {e}").replace(',', ";")),
            };
            if let Some(r) = res {
                row.dim = r.dim;
                row.expansion = r.report.expansion;
                row.contraction = r.report.contraction;
                row.distortion = r.report.distortion;
                row.attempts = r.attempts;
            }
            row.status = status;
        }
    }
    row.millis = start.elapsed().as_millis();
    row
}
