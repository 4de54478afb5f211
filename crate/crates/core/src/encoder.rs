//! One-layer graph-convolutional encoder: `F_out = tanh(Â · W)`.
//!
//! With one-hot node features the input projection is the embedding table
//! itself, so each output row is the tanh of the average of the embeddings
//! in the node's closed neighborhood.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{PupError, Result};
use crate::graph::NormalizedAdjacency;
use crate::matrix::Matrix;
use crate::rng;

/// Free per-node embeddings, one row per graph node.
pub type EmbeddingMatrix = Matrix;

/// Post-aggregation representations; every entry lies in (−1, 1).
pub type EncodedRepresentations = Matrix;

/// Zero-mean normal entries with standard deviation `0.1 / √dim`.
pub fn init_embeddings(node_count: usize, dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if node_count == 0 || dim == 0 {
        return Err(PupError::InvalidArgument(format!(
            "embedding shape must be positive, got {node_count}x{dim}"
        )));
    }
    let normal = Normal::new(0.0, 0.1 / (dim as f64).sqrt()).expect("positive std");
    let mut rng = rng::seeded(seed);
    let data = (0..node_count * dim)
        .map(|_| normal.sample(&mut rng))
        .collect();
    Ok(Matrix::from_vec(node_count, dim, data))
}

/// Message from neighbor `j` to node `i`: `e'_j / |N_i|`.
pub fn propagate_message(ej: &[f64], neighbor_count: usize) -> Vec<f64> {
    assert!(neighbor_count >= 1, "closed neighborhoods are never empty");
    let scale = neighbor_count as f64;
    ej.iter().map(|x| x / scale).collect()
}

/// Pre-activation `Â · W`.
pub fn aggregate(adjacency: &NormalizedAdjacency, embeddings: &EmbeddingMatrix) -> Result<Matrix> {
    adjacency.multiply(embeddings)
}

pub fn encode(
    adjacency: &NormalizedAdjacency,
    embeddings: &EmbeddingMatrix,
) -> Result<EncodedRepresentations> {
    let mut out = aggregate(adjacency, embeddings)?;
    out.as_mut_slice().iter_mut().for_each(|x| *x = x.tanh());
    Ok(out)
}

/// Per-row multipliers for feature-level dropout: 0 for a dropped row,
/// `1 / (1 − p)` for a kept one. Rows are visited in index order from a
/// single seeded stream.
pub fn dropout_mask(rows: usize, p: f64, rng_seed: u64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&p) {
        return Err(PupError::InvalidArgument(format!(
            "dropout probability must be in [0, 1), got {p}"
        )));
    }
    if p == 0.0 {
        return Ok(vec![1.0; rows]);
    }
    let keep_scale = 1.0 / (1.0 - p);
    let mut rng = rng::seeded(rng_seed);
    Ok((0..rows)
        .map(|_| {
            if rng.random::<f64>() < p {
                0.0
            } else {
                keep_scale
            }
        })
        .collect())
}

pub fn apply_row_mask(features: &mut Matrix, mask: &[f64]) {
    debug_assert_eq!(mask.len(), features.rows());
    for (r, &m) in mask.iter().enumerate() {
        if m != 1.0 {
            features.row_mut(r).iter_mut().for_each(|x| *x *= m);
        }
    }
}

/// Drops whole node rows with probability `p` during training and rescales
/// the survivors; inference returns the input unchanged.
pub fn apply_feature_dropout(
    features: &EncodedRepresentations,
    p: f64,
    rng_seed: u64,
    training: bool,
) -> Result<EncodedRepresentations> {
    let mask = dropout_mask(features.rows(), p, rng_seed)?;
    let mut out = features.clone();
    if training {
        apply_row_mask(&mut out, &mask);
    }
    Ok(out)
}
