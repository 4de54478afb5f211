//! Price-aware top-K recommendation.
//!
//! Users, items, categories and quantized price levels are joined into one
//! undirected graph. A single graph-convolution layer encodes every node, and
//! two independent branches (global and category) score user/item pairs with
//! factorization-machine style pairwise inner products. Models are trained
//! with BPR and evaluated with Recall@K / NDCG@K, including cold-start
//! candidate pools and user groups split by price-consistency entropy.

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod training;

pub use error::{PupError, Result};
pub use matrix::Matrix;
