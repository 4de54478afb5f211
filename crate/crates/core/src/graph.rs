//! The unified heterogeneous graph and its rectified adjacency.
//!
//! Node indices are laid out in contiguous blocks: users `[0, M)`, items
//! `[M, M+N)`, categories, then price levels. Category and price nodes are
//! always allocated, even when an ablation disconnects them, so the index
//! space is identical across model variants.

use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::error::{PupError, Result};
use crate::matrix::{axpy, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    User,
    Item,
    Category,
    Price,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLayout {
    pub users: usize,
    pub items: usize,
    pub categories: usize,
    pub price_levels: usize,
}

impl NodeLayout {
    pub fn of(dataset: &Dataset) -> Self {
        NodeLayout {
            users: dataset.user_count(),
            items: dataset.item_count(),
            categories: dataset.category_count(),
            price_levels: dataset.price_level_count,
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.users + self.items + self.categories + self.price_levels
    }

    #[inline]
    pub fn user(&self, u: usize) -> usize {
        debug_assert!(u < self.users);
        u
    }

    #[inline]
    pub fn item(&self, i: usize) -> usize {
        debug_assert!(i < self.items);
        self.users + i
    }

    #[inline]
    pub fn category(&self, c: usize) -> usize {
        debug_assert!(c < self.categories);
        self.users + self.items + c
    }

    #[inline]
    pub fn price(&self, p: usize) -> usize {
        debug_assert!(p < self.price_levels);
        self.users + self.items + self.categories + p
    }

    pub fn role(&self, node: usize) -> NodeRole {
        if node < self.users {
            NodeRole::User
        } else if node < self.users + self.items {
            NodeRole::Item
        } else if node < self.users + self.items + self.categories {
            NodeRole::Category
        } else {
            assert!(node < self.node_count(), "node {node} out of range");
            NodeRole::Price
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeteroGraph {
    pub layout: NodeLayout,
    /// Undirected edges as `(a, b)` with `a < b`, sorted, no duplicates.
    pub edges: Vec<(usize, usize)>,
    pub include_category_nodes: bool,
    pub include_price_nodes: bool,
}

/// Builds the graph from the training split only.
pub fn build_graph(
    dataset: &Dataset,
    include_category_nodes: bool,
    include_price_nodes: bool,
) -> HeteroGraph {
    let layout = NodeLayout::of(dataset);
    let mut edges: Vec<(usize, usize)> = dataset
        .train
        .iter()
        .map(|&(u, i)| (layout.user(u), layout.item(i)))
        .collect();
    for i in 0..layout.items {
        if include_category_nodes {
            edges.push((layout.item(i), layout.category(dataset.item_category[i])));
        }
        if include_price_nodes {
            edges.push((layout.item(i), layout.price(dataset.item_price_level[i])));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    HeteroGraph {
        layout,
        edges,
        include_category_nodes,
        include_price_nodes,
    }
}

impl HeteroGraph {
    pub fn node_count(&self) -> usize {
        self.layout.node_count()
    }

    /// Sorted neighbor lists, self excluded.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// `src\tdst` lines, one per undirected edge, in ascending order.
    pub fn edge_dump(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 12);
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }
}

/// Row-compressed `f(A + I)`: every row is the uniform distribution over
/// the node's closed neighborhood.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    row_weight: Vec<f64>,
}

pub fn build_normalized_adjacency(graph: &HeteroGraph) -> NormalizedAdjacency {
    let n = graph.node_count();
    let neighbors = graph.neighbors();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(2 * graph.edges.len() + n);
    let mut row_weight = Vec::with_capacity(n);
    row_ptr.push(0);
    for (v, list) in neighbors.iter().enumerate() {
        let at = list.partition_point(|&j| j < v);
        col_idx.extend_from_slice(&list[..at]);
        col_idx.push(v);
        col_idx.extend_from_slice(&list[at..]);
        row_weight.push(1.0 / (list.len() + 1) as f64);
        row_ptr.push(col_idx.len());
    }
    NormalizedAdjacency {
        row_ptr,
        col_idx,
        row_weight,
    }
}

impl NormalizedAdjacency {
    pub fn node_count(&self) -> usize {
        self.row_weight.len()
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices of row `v` (the closed neighborhood `N_v`), ascending.
    #[inline]
    pub fn row(&self, v: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    /// The shared value `1 / |N_v|` of every stored entry in row `v`.
    #[inline]
    pub fn row_weight(&self, v: usize) -> f64 {
        self.row_weight[v]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if self.row(r).binary_search(&c).is_ok() {
            self.row_weight[r]
        } else {
            0.0
        }
    }

    pub fn row_sum(&self, v: usize) -> f64 {
        self.row(v).iter().map(|_| self.row_weight[v]).sum()
    }

    /// `Â · X`
    pub fn multiply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.node_count() {
            return Err(PupError::ShapeMismatch {
                expected: format!("{} rows", self.node_count()),
                actual: format!("{} rows", x.rows()),
            });
        }
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for v in 0..self.node_count() {
            let w = self.row_weight[v];
            let dst = out.row_mut(v);
            for &j in self.row(v) {
                axpy(w, x.row(j), dst);
            }
        }
        Ok(out)
    }

    /// Sorted union of the rows' closed neighborhoods: the rows that
    /// `multiply_transpose_sparse` can make nonzero.
    pub fn reach(&self, rows: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = rows
            .iter()
            .flat_map(|&r| self.row(r).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `Âᵀ · X`, visiting only rows of `X` listed in `rows` (all others are
    /// taken to be zero).
    pub fn multiply_transpose_sparse(&self, x: &Matrix, rows: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.node_count(), x.cols());
        for &r in rows {
            let w = self.row_weight[r];
            let src = x.row(r);
            for &j in self.row(r) {
                axpy(w, src, out.row_mut(j));
            }
        }
        out
    }
}
