//! Interaction and catalog ingestion, chronological splitting, price
//! quantization and willing-to-pay analysis.

mod cwtp;
mod io;
mod quantize;

use serde::{Deserialize, Serialize};

pub use cwtp::{compute_cwtp, cwtp_entropy, cwtp_profiles, CwtpProfile};
pub use io::{load_catalog, load_dataset, load_interactions, write_catalog, write_interactions};
pub use quantize::{quantize_catalog, quantize_rank, quantize_uniform, Quantizer};

use crate::error::{PupError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInteraction {
    pub user_id: String,
    pub item_id: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub item_id: String,
    pub category_id: String,
    pub price: f64,
}

/// Train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChronologicalSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Sort by timestamp (stable, so ties keep input order) and cut into the
/// leading `⌊train·n⌋`, the next `⌊validation·n⌋` and the remainder.
pub fn chronological_split(
    interactions: &[RawInteraction],
    ratios: SplitRatios,
) -> Result<ChronologicalSplit<RawInteraction>> {
    let SplitRatios {
        train,
        validation,
        test,
    } = ratios;
    if [train, validation, test]
        .iter()
        .any(|r| !(0.0..=1.0).contains(r))
        || ((train + validation + test) - 1.0).abs() > 1e-9
    {
        return Err(PupError::InvalidArgument(format!(
            "split ratios must be in [0,1] and sum to 1, got ({train}, {validation}, {test})"
        )));
    }
    let n = interactions.len();
    // The epsilon keeps e.g. 0.6 * 5 from flooring to 2.
    let n_train = ((train * n as f64) + 1e-9).floor() as usize;
    let n_val = ((validation * n as f64) + 1e-9).floor() as usize;
    let n_train = n_train.min(n);
    let n_val = n_val.min(n - n_train);

    let mut sorted = interactions.to_vec();
    sorted.sort_by_key(|r| r.timestamp);
    let test_part = sorted.split_off(n_train + n_val);
    let val_part = sorted.split_off(n_train);
    Ok(ChronologicalSplit {
        train: sorted,
        validation: val_part,
        test: test_part,
    })
}

/// Indexed, split and quantized dataset.
///
/// Items are indexed in catalog order and categories by first appearance in
/// the catalog; users are indexed by first appearance in the interaction
/// input. Every catalog item gets an index even if nobody bought it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    pub category_ids: Vec<String>,
    pub price_level_count: usize,
    pub item_price_level: Vec<usize>,
    pub item_category: Vec<usize>,
    pub train: Vec<(usize, usize)>,
    pub validation: Vec<(usize, usize)>,
    pub test: Vec<(usize, usize)>,
}

impl Dataset {
    pub fn build(
        interactions: &[RawInteraction],
        catalog: &[CatalogEntry],
        levels: usize,
        quantizer: Quantizer,
        ratios: SplitRatios,
    ) -> Result<Dataset> {
        use std::collections::HashMap;

        if levels < 2 {
            return Err(PupError::InvalidArgument(format!(
                "price level count must be >= 2, got {levels}"
            )));
        }

        let mut item_lookup: HashMap<&str, usize> = HashMap::with_capacity(catalog.len());
        let mut category_lookup: HashMap<&str, usize> = HashMap::new();
        let mut category_ids = Vec::new();
        let mut item_category = Vec::with_capacity(catalog.len());
        let mut prices = Vec::with_capacity(catalog.len());
        for entry in catalog {
            if entry.item_id.is_empty() || entry.category_id.is_empty() {
                return Err(PupError::InvalidArgument(
                    "empty item or category id in catalog".into(),
                ));
            }
            if !entry.price.is_finite() || entry.price < 0.0 {
                return Err(PupError::InvalidArgument(format!(
                    "item {:?} has invalid price {}",
                    entry.item_id, entry.price
                )));
            }
            if item_lookup
                .insert(&entry.item_id, item_lookup.len())
                .is_some()
            {
                return Err(PupError::DuplicateCatalogItem(entry.item_id.clone()));
            }
            let next = category_lookup.len();
            let cat = *category_lookup
                .entry(&entry.category_id)
                .or_insert_with(|| {
                    category_ids.push(entry.category_id.clone());
                    next
                });
            item_category.push(cat);
            prices.push(entry.price);
        }
        let item_price_level = quantize_catalog(
            &prices,
            &item_category,
            category_ids.len(),
            levels,
            quantizer,
        )?;

        let mut user_lookup: HashMap<&str, usize> = HashMap::new();
        let mut user_ids = Vec::new();
        for r in interactions {
            if r.user_id.is_empty() || r.item_id.is_empty() {
                return Err(PupError::InvalidArgument(
                    "empty user or item id in interactions".into(),
                ));
            }
            if !item_lookup.contains_key(r.item_id.as_str()) {
                return Err(PupError::UnknownItem(r.item_id.clone()));
            }
            if !user_lookup.contains_key(r.user_id.as_str()) {
                user_lookup.insert(&r.user_id, user_ids.len());
                user_ids.push(r.user_id.clone());
            }
        }

        let split = chronological_split(interactions, ratios)?;
        let index = |rows: &[RawInteraction]| -> Vec<(usize, usize)> {
            rows.iter()
                .map(|r| {
                    (
                        user_lookup[r.user_id.as_str()],
                        item_lookup[r.item_id.as_str()],
                    )
                })
                .collect()
        };

        Ok(Dataset {
            train: index(&split.train),
            validation: index(&split.validation),
            test: index(&split.test),
            user_ids,
            item_ids: catalog.iter().map(|c| c.item_id.clone()).collect(),
            category_ids,
            price_level_count: levels,
            item_price_level,
            item_category,
        })
    }

    #[inline]
    pub fn user_count(&self) -> usize {
        self.user_ids.len()
    }

    #[inline]
    pub fn item_count(&self) -> usize {
        self.item_ids.len()
    }

    #[inline]
    pub fn category_count(&self) -> usize {
        self.category_ids.len()
    }

    /// Deduplicated, sorted item lists per user for one split.
    pub fn items_by_user(&self, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.user_count()];
        for &(u, i) in pairs {
            out[u].push(i);
        }
        for items in &mut out {
            items.sort_unstable();
            items.dedup();
        }
        out
    }

    pub fn train_items_by_user(&self) -> Vec<Vec<usize>> {
        self.items_by_user(&self.train)
    }

    /// Deduplicated training pairs in ascending (user, item) order.
    pub fn unique_train_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = self.train.clone();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub fn items_of_category(&self, category: usize) -> impl Iterator<Item = usize> + '_ {
        self.item_category
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == category)
            .map(|(i, _)| i)
    }

    /// Structural checks: every split pair indexes a known user and item, and
    /// per-item attributes are in range.
    pub fn validate(&self) -> Result<()> {
        let n = self.item_count();
        if self.item_category.len() != n || self.item_price_level.len() != n {
            return Err(PupError::InvalidArgument(
                "item attribute arrays do not match item count".into(),
            ));
        }
        if self.price_level_count < 2 {
            return Err(PupError::InvalidArgument(
                "price level count must be >= 2".into(),
            ));
        }
        if self
            .item_price_level
            .iter()
            .any(|&l| l >= self.price_level_count)
            || self
                .item_category
                .iter()
                .any(|&c| c >= self.category_count())
        {
            return Err(PupError::InvalidArgument(
                "item attribute out of range".into(),
            ));
        }
        for &(u, i) in self.train.iter().chain(&self.validation).chain(&self.test) {
            if u >= self.user_count() || i >= n {
                return Err(PupError::InvalidArgument(format!(
                    "pair ({u}, {i}) out of range"
                )));
            }
        }
        Ok(())
    }
}
