//! Low-distortion embeddings of tree metrics into ℓ₁.
//!
//! The pipeline colors the tree into root-ward paths, folds each color class
//! into `k` star-shaped trees, embeds every folded tree by multi-scale
//! randomized coordinates and concatenates the results. [`verify`] measures
//! the distortion of any coordinate assignment exactly.

pub mod bench;
pub mod coloring;
pub mod combiner;
pub mod embedder;
pub mod folding;
pub mod gen;
pub mod kary;
pub mod output;
pub mod scales;
pub mod sparse;
pub mod tree;
pub mod verify;
