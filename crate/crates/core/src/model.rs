//! Model variants behind one fit / score / checkpoint surface.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{bprmf_fit, fm_fit, itempop_fit, FeatureFields, ItemPop, PairwiseModel};
use crate::dataset::Dataset;
use crate::error::{PupError, Result};
use crate::evaluation::Scorer;
use crate::matrix::Matrix;
use crate::training::checkpoint::Checkpoint;
use crate::training::{train_model, EpochStats, PupModel, PupScorer, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Pup,
    PupMinusCategory,
    PupMinusPrice,
    PupMinusBoth,
    ItemPop,
    BprMf,
    Fm,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Pup,
        Variant::PupMinusCategory,
        Variant::PupMinusPrice,
        Variant::PupMinusBoth,
        Variant::ItemPop,
        Variant::BprMf,
        Variant::Fm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Pup => "pup",
            Variant::PupMinusCategory => "pup-minus-category",
            Variant::PupMinusPrice => "pup-minus-price",
            Variant::PupMinusBoth => "pup-minus-both",
            Variant::ItemPop => "itempop",
            Variant::BprMf => "bprmf",
            Variant::Fm => "fm",
        }
    }

    /// `(include_category_nodes, include_price_nodes)` for graph variants.
    pub fn graph_flags(self) -> Option<(bool, bool)> {
        match self {
            Variant::Pup => Some((true, true)),
            Variant::PupMinusCategory => Some((false, true)),
            Variant::PupMinusPrice => Some((true, false)),
            Variant::PupMinusBoth => Some((false, false)),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = PupError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| PupError::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Pup(PupModel),
    ItemPop(ItemPop),
    Pairwise(PairwiseModel),
}

/// Inference view of any trained model.
pub enum ModelScorer<'a> {
    Pup(PupScorer),
    ItemPop(&'a ItemPop),
    Pairwise(&'a PairwiseModel),
}

impl Scorer for ModelScorer<'_> {
    #[inline]
    fn score(&self, user: usize, item: usize) -> f64 {
        match self {
            ModelScorer::Pup(s) => s.score(user, item),
            ModelScorer::ItemPop(m) => m.score(user, item),
            ModelScorer::Pairwise(m) => m.score(user, item),
        }
    }
}

/// Builds (and, for learnable variants, trains) the selected model.
pub fn fit(
    dataset: &Dataset,
    variant: Variant,
    config: &TrainConfig,
) -> Result<(TrainedModel, Vec<EpochStats>)> {
    config.validate()?;
    match variant {
        Variant::ItemPop => Ok((TrainedModel::ItemPop(itempop_fit(dataset)), Vec::new())),
        Variant::BprMf => bprmf_fit(dataset, config).map(|(m, h)| (TrainedModel::Pairwise(m), h)),
        Variant::Fm => fm_fit(dataset, config).map(|(m, h)| (TrainedModel::Pairwise(m), h)),
        graph => {
            let (cat, price) = graph.graph_flags().expect("graph variant");
            let mut model = PupModel::new(dataset, config, cat, price)?;
            let history = train_model(&mut model, dataset, config)?;
            Ok((TrainedModel::Pup(model), history))
        }
    }
}

impl TrainedModel {
    pub fn scorer(&self) -> Result<ModelScorer<'_>> {
        Ok(match self {
            TrainedModel::Pup(m) => ModelScorer::Pup(m.scorer()?),
            TrainedModel::ItemPop(m) => ModelScorer::ItemPop(m),
            TrainedModel::Pairwise(m) => ModelScorer::Pairwise(m),
        })
    }

    /// Named tensors for checkpointing.
    pub fn tensors(&self) -> Vec<(String, Matrix)> {
        use crate::training::BprModel;
        match self {
            TrainedModel::Pup(m) => {
                let names = ["global", "category"];
                m.parameters()
                    .iter()
                    .zip(names)
                    .map(|(p, n)| (n.to_string(), p.clone()))
                    .collect()
            }
            TrainedModel::ItemPop(m) => {
                let counts = m.counts().to_vec();
                vec![("counts".into(), Matrix::from_vec(counts.len(), 1, counts))]
            }
            TrainedModel::Pairwise(m) => vec![("table".into(), m.table().clone())],
        }
    }

    /// Rebuilds a model from checkpoint tensors; the dataset supplies the
    /// graph and item attributes.
    pub fn from_checkpoint(
        dataset: &Dataset,
        checkpoint: &Checkpoint,
        config: &TrainConfig,
    ) -> Result<Self> {
        let tensor = |name: &str| {
            checkpoint
                .tensor(name)
                .cloned()
                .ok_or_else(|| PupError::Checkpoint(format!("missing tensor {name:?}")))
        };
        match checkpoint.variant {
            Variant::ItemPop => {
                let counts = tensor("counts")?;
                if counts.rows() != dataset.item_count() {
                    return Err(PupError::Checkpoint(
                        "item count does not match dataset".into(),
                    ));
                }
                Ok(TrainedModel::ItemPop(ItemPop::from_counts(
                    counts.as_slice().to_vec(),
                )))
            }
            Variant::BprMf | Variant::Fm => {
                let fields = if checkpoint.variant == Variant::Fm {
                    FeatureFields::UserItemCategoryPrice
                } else {
                    FeatureFields::UserItem
                };
                let table = tensor("table")?;
                let model = PairwiseModel::new(dataset, fields, table.cols(), checkpoint.seed)?
                    .with_table(table)?;
                Ok(TrainedModel::Pairwise(model))
            }
            graph => {
                let (cat, price) = graph.graph_flags().expect("graph variant");
                let mut params = vec![tensor("global")?];
                if cat {
                    params.push(tensor("category")?);
                }
                let model = PupModel::from_parameters(
                    dataset,
                    config.alpha,
                    config.dropout_p,
                    cat,
                    price,
                    params,
                )?
                .with_layers(config.layers)?;
                Ok(TrainedModel::Pup(model))
            }
        }
    }
}
