use super::{sigmoid, softplus_neg, BprModel, Gradients, TrainConfig, Triplet};
use crate::dataset::Dataset;
use crate::decoder::{BranchNodes, BranchScore, Decoder};
use crate::encoder::{aggregate, dropout_mask, init_embeddings, EncodedRepresentations};
use crate::error::{PupError, Result};
use crate::graph::{build_graph, build_normalized_adjacency, NormalizedAdjacency};
use crate::matrix::{axpy, Matrix};
use crate::rng::{self, Stream};
use rand::Rng;

/// Graph encoder plus two-branch decoder. The category branch, and the
/// category/price nodes, can be switched off for ablations; without a
/// category branch the global branch takes the whole embedding budget.
#[derive(Debug, Clone)]
pub struct PupModel {
    adjacency: NormalizedAdjacency,
    decoder: Decoder,
    item_category: Vec<usize>,
    item_price: Vec<usize>,
    include_category_nodes: bool,
    dropout_p: f64,
    layers: usize,
    /// `[global]` or `[global, category]`
    params: Vec<Matrix>,
}

struct BranchForward {
    /// outputs of the rounds before the last
    hidden: Vec<Matrix>,
    /// tanh output of the last round, before dropout
    activations: Matrix,
    /// dropout multipliers, `None` when nothing is dropped
    mask: Option<Vec<f64>>,
    /// activations after dropout, the decoder input
    features: Matrix,
}

impl PupModel {
    pub fn new(
        dataset: &Dataset,
        config: &TrainConfig,
        include_category_nodes: bool,
        include_price_nodes: bool,
    ) -> Result<Self> {
        config.validate()?;
        let n = crate::graph::NodeLayout::of(dataset).node_count();
        let mut init_rng = rng::stream(config.seed, Stream::Init);
        let params = if include_category_nodes {
            vec![
                init_embeddings(n, config.dim_split.0, init_rng.random())?,
                init_embeddings(n, config.dim_split.1, init_rng.random())?,
            ]
        } else {
            vec![init_embeddings(n, config.total_dim, init_rng.random())?]
        };
        Self::from_parameters(
            dataset,
            config.alpha,
            config.dropout_p,
            include_category_nodes,
            include_price_nodes,
            params,
        )?
        .with_layers(config.layers)
    }

    /// Wraps existing parameter tensors (e.g. from a checkpoint):
    /// `[global]`, or `[global, category]` when category nodes are included.
    pub fn from_parameters(
        dataset: &Dataset,
        alpha: f64,
        dropout_p: f64,
        include_category_nodes: bool,
        include_price_nodes: bool,
        params: Vec<Matrix>,
    ) -> Result<Self> {
        dataset.validate()?;
        let graph = build_graph(dataset, include_category_nodes, include_price_nodes);
        let adjacency = build_normalized_adjacency(&graph);
        let n = graph.node_count();
        let expected = if include_category_nodes { 2 } else { 1 };
        if params.len() != expected || params.iter().any(|p| p.rows() != n || p.cols() == 0) {
            return Err(PupError::ShapeMismatch {
                expected: format!("{expected} tensors of {n} rows"),
                actual: format!("{:?}", params.iter().map(Matrix::shape).collect::<Vec<_>>()),
            });
        }
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(PupError::InvalidArgument(format!(
                "dropout_p must be in [0, 1), got {dropout_p}"
            )));
        }
        Ok(PupModel {
            adjacency,
            decoder: Decoder::new(dataset, include_price_nodes, include_category_nodes, alpha),
            item_category: dataset.item_category.clone(),
            item_price: dataset.item_price_level.clone(),
            include_category_nodes,
            dropout_p,
            layers: 1,
            params,
        })
    }

    /// Sets the number of convolution rounds (1 unless changed).
    pub fn with_layers(mut self, layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(PupError::InvalidArgument("layers must be positive".into()));
        }
        self.layers = layers;
        Ok(self)
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Replaces the parameter tensors, keeping shapes.
    pub fn with_parameters(mut self, params: Vec<Matrix>) -> Result<Self> {
        if params.len() != self.params.len()
            || params
                .iter()
                .zip(&self.params)
                .any(|(a, b)| a.shape() != b.shape())
        {
            return Err(PupError::ShapeMismatch {
                expected: format!(
                    "{:?}",
                    self.params.iter().map(Matrix::shape).collect::<Vec<_>>()
                ),
                actual: format!("{:?}", params.iter().map(Matrix::shape).collect::<Vec<_>>()),
            });
        }
        self.params = params;
        Ok(self)
    }

    pub fn adjacency(&self) -> &NormalizedAdjacency {
        &self.adjacency
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    fn branch_weight(&self, b: usize) -> f64 {
        if b == 0 {
            1.0
        } else {
            self.decoder.alpha
        }
    }

    fn branch_nodes(&self, b: usize, user: usize, item: usize) -> BranchNodes {
        if b == 0 {
            self.decoder.global_nodes(user, item)
        } else {
            self.decoder.category_nodes(user, item)
        }
    }

    /// Distinct embedding rows regularized for one triplet: the user, both
    /// items and, when present, their category and price nodes.
    fn regularized_rows(&self, t: &Triplet) -> Vec<usize> {
        let layout = &self.decoder.layout;
        let mut rows = vec![
            layout.user(t.user),
            layout.item(t.positive),
            layout.item(t.negative),
        ];
        for item in [t.positive, t.negative] {
            if self.include_category_nodes {
                rows.push(layout.category(self.item_category[item]));
            }
            if self.decoder.use_price {
                rows.push(layout.price(self.item_price[item]));
            }
        }
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    fn forward(&self, b: usize, dropout_seed: Option<u64>) -> Result<BranchForward> {
        let mut hidden = Vec::with_capacity(self.layers - 1);
        let mut activations = aggregate(&self.adjacency, &self.params[b])?;
        activations
            .as_mut_slice()
            .iter_mut()
            .for_each(|x| *x = x.tanh());
        for _ in 1..self.layers {
            let mut next = aggregate(&self.adjacency, &activations)?;
            next.as_mut_slice().iter_mut().for_each(|x| *x = x.tanh());
            hidden.push(std::mem::replace(&mut activations, next));
        }
        let mask = match dropout_seed {
            Some(seed) if self.dropout_p > 0.0 => {
                // independent mask per branch
                let mut r = rng::stream(seed, Stream::Dropout);
                let branch_seed = (0..=b).map(|_| r.random::<u64>()).last().unwrap();
                Some(dropout_mask(
                    activations.rows(),
                    self.dropout_p,
                    branch_seed,
                )?)
            }
            _ => None,
        };
        let mut features = activations.clone();
        if let Some(m) = &mask {
            crate::encoder::apply_row_mask(&mut features, m);
        }
        Ok(BranchForward {
            hidden,
            activations,
            mask,
            features,
        })
    }

    /// Inference-time representations (no dropout) for scoring.
    pub fn scorer(&self) -> Result<PupScorer> {
        let reps = (0..self.params.len())
            .map(|b| self.forward(b, None).map(|f| f.features))
            .collect::<Result<Vec<_>>>()?;
        Ok(PupScorer {
            decoder: self.decoder.clone(),
            reps,
        })
    }
}

impl BprModel for PupModel {
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
        dropout_seed: Option<u64>,
    ) -> Result<Gradients> {
        let branches = self.params.len();
        let forward = (0..branches)
            .map(|b| self.forward(b, dropout_seed))
            .collect::<Result<Vec<_>>>()?;
        let n = self.adjacency.node_count();
        let inv_batch = 1.0 / batch.len().max(1) as f64;

        // ∂L/∂(decoder input) per branch, plus the rows it touches
        let mut feature_grads: Vec<Matrix> = self
            .params
            .iter()
            .map(|p| Matrix::zeros(n, p.cols()))
            .collect();
        let mut touched = vec![false; n];
        let mut touched_rows = Vec::new();
        let mut loss = 0.0;

        for t in batch {
            let mut s_pos = 0.0;
            let mut s_neg = 0.0;
            for (b, fw) in forward.iter().enumerate() {
                let w = self.branch_weight(b);
                s_pos += w * Decoder::branch_value(
                    &fw.features,
                    self.branch_nodes(b, t.user, t.positive),
                );
                s_neg += w * Decoder::branch_value(
                    &fw.features,
                    self.branch_nodes(b, t.user, t.negative),
                );
            }
            let margin = s_pos - s_neg;
            loss += softplus_neg(margin);
            // d(−ln σ(m))/dm = σ(m) − 1 = −σ(−m)
            let coef = -sigmoid(-margin) * inv_batch;

            for (b, fw) in forward.iter().enumerate() {
                let w = self.branch_weight(b) * coef;
                for (item, sign) in [(t.positive, 1.0), (t.negative, -1.0)] {
                    let nodes = self.branch_nodes(b, t.user, item);
                    let dim = fw.features.cols();
                    let mut total = vec![0.0; dim];
                    for &v in nodes.as_slice() {
                        axpy(1.0, fw.features.row(v), &mut total);
                    }
                    for &v in nodes.as_slice() {
                        // ∂/∂f_v Σ_{f<g} f·g = Σ f − f_v
                        let row = feature_grads[b].row_mut(v);
                        for k in 0..dim {
                            row[k] += sign * w * (total[k] - fw.features.get(v, k));
                        }
                        if !touched[v] {
                            touched[v] = true;
                            touched_rows.push(v);
                        }
                    }
                }
            }
        }
        loss *= inv_batch;
        touched_rows.sort_unstable();

        let mut grads = Vec::with_capacity(branches);
        for (b, fw) in forward.iter().enumerate() {
            let mut g = std::mem::replace(&mut feature_grads[b], Matrix::zeros(0, 0));
            let mut rows = touched_rows.clone();
            for r in &rows {
                let scale = fw.mask.as_ref().map_or(1.0, |m| m[*r]);
                if scale != 1.0 {
                    g.row_mut(*r).iter_mut().for_each(|x| *x *= scale);
                }
            }
            // back through the rounds, last first
            for out in std::iter::once(&fw.activations).chain(fw.hidden.iter().rev()) {
                for &r in &rows {
                    let act = out.row(r);
                    for (x, a) in g.row_mut(r).iter_mut().zip(act) {
                        *x *= 1.0 - a * a;
                    }
                }
                g = self.adjacency.multiply_transpose_sparse(&g, &rows);
                rows = self.adjacency.reach(&rows);
            }
            grads.push(g);
        }

        if lambda > 0.0 {
            let reg_scale = lambda * inv_batch;
            for t in batch {
                for v in self.regularized_rows(t) {
                    for (b, p) in self.params.iter().enumerate() {
                        let row = p.row(v);
                        loss += reg_scale * row.iter().map(|x| x * x).sum::<f64>();
                        axpy(2.0 * reg_scale, row, grads[b].row_mut(v));
                    }
                }
            }
        }

        Ok(Gradients { loss, grads })
    }
}

/// Frozen encoder outputs of a trained model.
#[derive(Debug, Clone)]
pub struct PupScorer {
    decoder: Decoder,
    reps: Vec<EncodedRepresentations>,
}

impl PupScorer {
    pub fn branch_score(&self, user: usize, item: usize) -> Result<BranchScore> {
        self.decoder
            .score(user, item, &self.reps[0], self.reps.get(1))
    }

    #[inline]
    pub fn score(&self, user: usize, item: usize) -> f64 {
        let mut s = Decoder::branch_value(&self.reps[0], self.decoder.global_nodes(user, item));
        if let Some(cat) = self.reps.get(1) {
            s += self.decoder.alpha
                * Decoder::branch_value(cat, self.decoder.category_nodes(user, item));
        }
        s
    }
}
