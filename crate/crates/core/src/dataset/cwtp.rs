//! Category-wise willing-to-pay (CWTP): the highest price level a user has
//! paid within each category, and the entropy of those levels.

use std::collections::BTreeMap;

use super::Dataset;
use crate::error::{PupError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CwtpProfile {
    pub user: usize,
    /// category index -> max price level purchased (training split only)
    pub cwtp: BTreeMap<usize, usize>,
    /// natural-log entropy of the level distribution across categories
    pub entropy: f64,
}

fn cwtp_from_items(
    dataset: &Dataset,
    items: impl IntoIterator<Item = usize>,
) -> BTreeMap<usize, usize> {
    let mut map = BTreeMap::new();
    for i in items {
        let level = dataset.item_price_level[i];
        map.entry(dataset.item_category[i])
            .and_modify(|l: &mut usize| *l = (*l).max(level))
            .or_insert(level);
    }
    map
}

pub fn compute_cwtp(dataset: &Dataset, user: usize) -> Result<BTreeMap<usize, usize>> {
    let map = cwtp_from_items(
        dataset,
        dataset
            .train
            .iter()
            .filter(|(u, _)| *u == user)
            .map(|&(_, i)| i),
    );
    if map.is_empty() {
        return Err(PupError::NoInteractions(user));
    }
    Ok(map)
}

/// Shannon entropy (nats) of the empirical distribution of CWTP values.
pub fn cwtp_entropy(cwtp: &BTreeMap<usize, usize>) -> f64 {
    if cwtp.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &level in cwtp.values() {
        *counts.entry(level).or_default() += 1;
    }
    let n = cwtp.len() as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    // -0.0 when a single level holds all the mass
    h.max(0.0)
}

/// Profiles for every user with at least one training interaction,
/// indexed by user (None for users without training history).
pub fn cwtp_profiles(dataset: &Dataset) -> Vec<Option<CwtpProfile>> {
    dataset
        .train_items_by_user()
        .into_iter()
        .enumerate()
        .map(|(user, items)| {
            if items.is_empty() {
                return None;
            }
            let cwtp = cwtp_from_items(dataset, items);
            let entropy = cwtp_entropy(&cwtp);
            Some(CwtpProfile {
                user,
                cwtp,
                entropy,
            })
        })
        .collect()
}
