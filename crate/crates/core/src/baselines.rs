//! Reference rankers: item popularity, BPR matrix factorization, and a
//! second-order factorization machine over (user, item, category, price)
//! one-hot fields. The factorization models share the BPR trainer with the
//! graph model.

use rand::Rng;

use crate::dataset::Dataset;
use crate::decoder::pairwise_sum;
use crate::encoder::init_embeddings;
use crate::error::{PupError, Result};
use crate::graph::NodeLayout;
use crate::matrix::{axpy, Matrix};
use crate::rng::{self, Stream};
use crate::training::{
    sigmoid, softplus_neg, train_model, BprModel, EpochStats, Gradients, TrainConfig, Triplet,
};

/// Non-personalized popularity: training interaction count per item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemPop {
    counts: Vec<f64>,
}

pub fn itempop_fit(dataset: &Dataset) -> ItemPop {
    let mut counts = vec![0.0; dataset.item_count()];
    for &(_, i) in &dataset.train {
        counts[i] += 1.0;
    }
    ItemPop { counts }
}

impl ItemPop {
    pub fn from_counts(counts: Vec<f64>) -> Self {
        ItemPop { counts }
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    #[inline]
    pub fn score(&self, _user: usize, item: usize) -> f64 {
        self.counts[item]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFields {
    /// `e_u · e_i`
    UserItem,
    /// pairwise sum over `(u, i, c_i, p_i)`
    UserItemCategoryPrice,
}

/// Factorization model over one embedding table indexed like the graph
/// nodes (users, items, categories, price levels).
#[derive(Debug, Clone)]
pub struct PairwiseModel {
    fields: FeatureFields,
    layout: NodeLayout,
    item_category: Vec<usize>,
    item_price: Vec<usize>,
    params: Vec<Matrix>,
}

impl PairwiseModel {
    pub fn new(dataset: &Dataset, fields: FeatureFields, dim: usize, seed: u64) -> Result<Self> {
        dataset.validate()?;
        let layout = NodeLayout::of(dataset);
        let mut init_rng = rng::stream(seed, Stream::Init);
        let table = init_embeddings(layout.node_count(), dim, init_rng.random())?;
        Ok(PairwiseModel {
            fields,
            layout,
            item_category: dataset.item_category.clone(),
            item_price: dataset.item_price_level.clone(),
            params: vec![table],
        })
    }

    pub fn with_table(mut self, table: Matrix) -> Result<Self> {
        if table.rows() != self.layout.node_count() {
            return Err(PupError::ShapeMismatch {
                expected: format!("{} rows", self.layout.node_count()),
                actual: format!("{} rows", table.rows()),
            });
        }
        self.params = vec![table];
        Ok(self)
    }

    pub fn fields(&self) -> FeatureFields {
        self.fields
    }

    pub fn table(&self) -> &Matrix {
        &self.params[0]
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    fn active(&self, user: usize, item: usize) -> ([usize; 4], usize) {
        let l = &self.layout;
        match self.fields {
            FeatureFields::UserItem => ([l.user(user), l.item(item), 0, 0], 2),
            FeatureFields::UserItemCategoryPrice => (
                [
                    l.user(user),
                    l.item(item),
                    l.category(self.item_category[item]),
                    l.price(self.item_price[item]),
                ],
                4,
            ),
        }
    }

    #[inline]
    pub fn score(&self, user: usize, item: usize) -> f64 {
        let (nodes, len) = self.active(user, item);
        let table = &self.params[0];
        let mut rows: [&[f64]; 4] = [&[]; 4];
        for k in 0..len {
            rows[k] = table.row(nodes[k]);
        }
        pairwise_sum(&rows[..len])
    }
}

impl BprModel for PairwiseModel {
    fn parameters(&self) -> &[Matrix] {
        &self.params
    }

    fn parameters_mut(&mut self) -> &mut [Matrix] {
        &mut self.params
    }

    fn compute_gradients(
        &self,
        batch: &[Triplet],
        lambda: f64,
        _dropout_seed: Option<u64>,
    ) -> Result<Gradients> {
        let table = &self.params[0];
        let dim = table.cols();
        let inv_batch = 1.0 / batch.len().max(1) as f64;
        let mut grad = Matrix::zeros(table.rows(), dim);
        let mut loss = 0.0;
        let mut total = vec![0.0; dim];
        for t in batch {
            let margin = self.score(t.user, t.positive) - self.score(t.user, t.negative);
            loss += softplus_neg(margin);
            let coef = -sigmoid(-margin) * inv_batch;
            for (item, sign) in [(t.positive, 1.0), (t.negative, -1.0)] {
                let (nodes, len) = self.active(t.user, item);
                total.iter_mut().for_each(|x| *x = 0.0);
                for &v in &nodes[..len] {
                    axpy(1.0, table.row(v), &mut total);
                }
                for &v in &nodes[..len] {
                    let row = table.row(v);
                    let g = grad.row_mut(v);
                    for k in 0..dim {
                        g[k] += sign * coef * (total[k] - row[k]);
                    }
                }
            }
        }
        loss *= inv_batch;

        if lambda > 0.0 {
            let reg_scale = lambda * inv_batch;
            for t in batch {
                let (pos, len) = self.active(t.user, t.positive);
                let (neg, _) = self.active(t.user, t.negative);
                let mut rows: Vec<usize> = pos[..len].iter().chain(&neg[..len]).copied().collect();
                rows.sort_unstable();
                rows.dedup();
                for v in rows {
                    let row = table.row(v);
                    loss += reg_scale * row.iter().map(|x| x * x).sum::<f64>();
                    axpy(2.0 * reg_scale, row, grad.row_mut(v));
                }
            }
        }
        Ok(Gradients {
            loss,
            grads: vec![grad],
        })
    }
}

/// BPR-MF with a `total_dim` table over users and items.
pub fn bprmf_fit(
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<(PairwiseModel, Vec<EpochStats>)> {
    let mut model = PairwiseModel::new(
        dataset,
        FeatureFields::UserItem,
        config.total_dim,
        config.seed,
    )?;
    let history = train_model(&mut model, dataset, config)?;
    Ok((model, history))
}

/// FM with price level and category treated as item features.
pub fn fm_fit(dataset: &Dataset, config: &TrainConfig) -> Result<(PairwiseModel, Vec<EpochStats>)> {
    let mut model = PairwiseModel::new(
        dataset,
        FeatureFields::UserItemCategoryPrice,
        config.total_dim,
        config.seed,
    )?;
    let history = train_model(&mut model, dataset, config)?;
    Ok((model, history))
}
