//! Two-branch pairwise-interaction decoder.
//!
//! The global branch sums the pairwise inner products of (user, item, price)
//! representations; the category branch does the same for (user, category,
//! price) and never sees the item. Each branch reads its own encoder output.

use crate::dataset::Dataset;
use crate::error::{PupError, Result};
use crate::graph::NodeLayout;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchScore {
    pub global: f64,
    pub category: f64,
    pub combined: f64,
}

/// `Σ_{f<g} v_f · v_g`, computed as `½(‖Σ v‖² − Σ ‖v‖²)` in linear time.
pub fn score_branch(vectors: &[&[f64]]) -> Result<f64> {
    let Some(first) = vectors.first() else {
        return Err(PupError::InvalidArgument(
            "score_branch needs at least two vectors".into(),
        ));
    };
    if vectors.len() < 2 {
        return Err(PupError::InvalidArgument(
            "score_branch needs at least two vectors".into(),
        ));
    }
    let dim = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(PupError::ShapeMismatch {
            expected: format!("dim {dim}"),
            actual: format!("dim {}", bad.len()),
        });
    }
    Ok(pairwise_sum(vectors))
}

/// Unchecked fast pairwise sum; callers guarantee equal lengths.
#[inline]
pub(crate) fn pairwise_sum(vectors: &[&[f64]]) -> f64 {
    let dim = vectors[0].len();
    let mut acc = 0.0;
    for k in 0..dim {
        let mut sum = 0.0;
        let mut sq = 0.0;
        for v in vectors {
            let x = v[k];
            sum += x;
            sq += x * x;
        }
        acc += sum * sum - sq;
    }
    0.5 * acc
}

/// Up to three node indices feeding one branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchNodes {
    nodes: [usize; 3],
    len: usize,
}

impl BranchNodes {
    fn new(a: usize, b: usize, c: Option<usize>) -> Self {
        match c {
            Some(c) => BranchNodes {
                nodes: [a, b, c],
                len: 3,
            },
            None => BranchNodes {
                nodes: [a, b, 0],
                len: 2,
            },
        }
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.nodes[..self.len]
    }
}

/// Which nodes each branch reads for a (user, item) pair.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub layout: NodeLayout,
    item_category: Vec<usize>,
    item_price: Vec<usize>,
    /// Price nodes take part in both branches.
    pub use_price: bool,
    /// The category branch exists at all.
    pub use_category_branch: bool,
    pub alpha: f64,
}

impl Decoder {
    pub fn new(dataset: &Dataset, use_price: bool, use_category_branch: bool, alpha: f64) -> Self {
        Decoder {
            layout: NodeLayout::of(dataset),
            item_category: dataset.item_category.clone(),
            item_price: dataset.item_price_level.clone(),
            use_price,
            use_category_branch,
            alpha,
        }
    }

    #[inline]
    fn price_node(&self, item: usize) -> Option<usize> {
        self.use_price
            .then(|| self.layout.price(self.item_price[item]))
    }

    #[inline]
    pub fn global_nodes(&self, user: usize, item: usize) -> BranchNodes {
        BranchNodes::new(
            self.layout.user(user),
            self.layout.item(item),
            self.price_node(item),
        )
    }

    #[inline]
    pub fn category_nodes(&self, user: usize, item: usize) -> BranchNodes {
        BranchNodes::new(
            self.layout.user(user),
            self.layout.category(self.item_category[item]),
            self.price_node(item),
        )
    }

    fn check(&self, user: usize, item: usize) -> Result<()> {
        if user >= self.layout.users || item >= self.layout.items {
            return Err(PupError::InvalidArgument(format!(
                "unknown user {user} or item {item}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn branch_value(rep: &Matrix, nodes: BranchNodes) -> f64 {
        let mut rows: [&[f64]; 3] = [&[]; 3];
        for (slot, &n) in rows.iter_mut().zip(nodes.as_slice()) {
            *slot = rep.row(n);
        }
        pairwise_sum(&rows[..nodes.len])
    }

    /// `s = s_global + α · s_category`. `category` may be `None` only when the
    /// category branch is disabled.
    pub fn score(
        &self,
        user: usize,
        item: usize,
        global: &Matrix,
        category: Option<&Matrix>,
    ) -> Result<BranchScore> {
        self.check(user, item)?;
        let s_global = Self::branch_value(global, self.global_nodes(user, item));
        let s_category = match (self.use_category_branch, category) {
            (true, Some(rep)) => Self::branch_value(rep, self.category_nodes(user, item)),
            (true, None) => {
                return Err(PupError::InvalidArgument(
                    "category branch representations missing".into(),
                ))
            }
            (false, _) => 0.0,
        };
        Ok(BranchScore {
            global: s_global,
            category: s_category,
            combined: s_global + self.alpha * s_category,
        })
    }
}

/// Full two-branch score for item `i` using its category and price level.
pub fn score_pup(
    user: usize,
    item: usize,
    global_enc: &Matrix,
    category_enc: &Matrix,
    dataset: &Dataset,
    alpha: f64,
) -> Result<BranchScore> {
    let decoder = Decoder::new(dataset, true, true, alpha);
    let n = decoder.layout.node_count();
    if global_enc.rows() != n || category_enc.rows() != n {
        return Err(PupError::ShapeMismatch {
            expected: format!("{n} rows"),
            actual: format!("{} / {} rows", global_enc.rows(), category_enc.rows()),
        });
    }
    decoder.score(user, item, global_enc, Some(category_enc))
}
