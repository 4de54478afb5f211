//! Planted price-band interaction generator.
//!
//! Every user has a few preferred categories and, for every category, an
//! acceptable band of price levels. The bands sit around a per-user global
//! price center with a per-category offset, so users are partly consistent
//! and partly category-dependent in what they pay. Most purchases are drawn
//! from preferred categories inside the band; the rest are uniform noise.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::dataset::{CatalogEntry, Dataset, Quantizer, RawInteraction, SplitRatios};
use crate::error::{PupError, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub users: usize,
    pub items: usize,
    pub categories: usize,
    pub levels: usize,
    pub seed: u64,
    /// Width of each acceptable band, in price levels.
    pub band_width: usize,
    /// Largest per-category shift of the band center away from the user's
    /// global center.
    pub max_category_offset: usize,
    pub preferred_categories: usize,
    /// Inclusive range of purchases per user.
    pub interactions_per_user: (usize, usize),
    /// Probability that a purchase ignores preferences entirely.
    pub noise: f64,
}

impl SyntheticConfig {
    pub fn new(users: usize, items: usize, categories: usize, levels: usize, seed: u64) -> Self {
        SyntheticConfig {
            users,
            items,
            categories,
            levels,
            seed,
            band_width: 3,
            max_category_offset: 2,
            preferred_categories: 2,
            interactions_per_user: (20, 40),
            noise: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub config: SyntheticConfig,
    pub interactions: Vec<RawInteraction>,
    pub catalog: Vec<CatalogEntry>,
    /// Built with uniform quantization and the default 60/20/20 split.
    pub dataset: Dataset,
    /// Planted level per item (item `k` is dataset item `k`).
    pub item_level: Vec<usize>,
    /// Planted category per item, as generator category numbers.
    pub item_category: Vec<usize>,
    /// Inclusive `(low, high)` band per user per generator category.
    pub user_bands: Vec<Vec<(usize, usize)>>,
    pub user_preferred: Vec<Vec<usize>>,
}

impl SyntheticData {
    /// Item is in one of the user's preferred categories and inside that
    /// category's band. Users and items are dataset indices.
    pub fn in_band(&self, user: usize, item: usize) -> bool {
        let c = self.item_category[item];
        let (lo, hi) = self.user_bands[user][c];
        self.user_preferred[user].contains(&c) && (lo..=hi).contains(&self.item_level[item])
    }

    pub fn in_band_fraction(&self) -> f64 {
        let all = self
            .dataset
            .train
            .iter()
            .chain(&self.dataset.validation)
            .chain(&self.dataset.test);
        let (mut hit, mut n) = (0usize, 0usize);
        for &(u, i) in all {
            n += 1;
            hit += usize::from(self.in_band(u, i));
        }
        if n == 0 {
            0.0
        } else {
            hit as f64 / n as f64
        }
    }
}

pub fn generate_synthetic_dataset(
    users: usize,
    items: usize,
    categories: usize,
    levels: usize,
    seed: u64,
) -> Result<SyntheticData> {
    generate_synthetic(&SyntheticConfig::new(
        users, items, categories, levels, seed,
    ))
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    if cfg.users == 0 || cfg.items == 0 || cfg.categories == 0 || cfg.levels < 2 {
        return Err(PupError::InvalidArgument(
            "synthetic data needs users, items, categories >= 1 and levels >= 2".into(),
        ));
    }
    if cfg.band_width == 0 || cfg.band_width > cfg.levels {
        return Err(PupError::InvalidArgument(
            "band width must be in [1, levels]".into(),
        ));
    }
    let (min_n, max_n) = cfg.interactions_per_user;
    if min_n == 0 || min_n > max_n || !(0.0..=1.0).contains(&cfg.noise) {
        return Err(PupError::InvalidArgument(
            "bad interaction range or noise".into(),
        ));
    }
    let mut rng = rng::stream(cfg.seed, Stream::Synthetic);
    let levels = cfg.levels;

    // Balanced (category, level) slots, shuffled over items.
    let mut slots: Vec<(usize, usize)> = (0..cfg.items)
        .map(|k| (k % cfg.categories, (k / cfg.categories) % levels))
        .collect();
    slots.shuffle(&mut rng);
    let item_category: Vec<usize> = slots.iter().map(|s| s.0).collect();
    let item_level: Vec<usize> = slots.iter().map(|s| s.1).collect();

    // Evenly spaced prices per level quantize back to the planted level when
    // both end levels are present in the category.
    let catalog: Vec<CatalogEntry> = (0..cfg.items)
        .map(|k| {
            let base = 10.0 * (item_category[k] + 1) as f64;
            CatalogEntry {
                item_id: format!("i{k}"),
                category_id: format!("c{}", item_category[k]),
                price: base * (item_level[k] as f64 + 0.5),
            }
        })
        .collect();

    let mut by_cat_level = vec![vec![Vec::new(); levels]; cfg.categories];
    for k in 0..cfg.items {
        by_cat_level[item_category[k]][item_level[k]].push(k);
    }
    let all_categories: Vec<usize> = (0..cfg.categories).collect();
    let prefer = cfg.preferred_categories.clamp(1, cfg.categories);
    let offset_span = cfg.max_category_offset as i64;

    let mut interactions = Vec::new();
    let mut user_bands = Vec::with_capacity(cfg.users);
    let mut user_preferred = Vec::with_capacity(cfg.users);
    for u in 0..cfg.users {
        let center = rng.random_range(0..levels) as i64;
        let bands: Vec<(usize, usize)> = (0..cfg.categories)
            .map(|_| {
                let shifted = center + rng.random_range(-offset_span..=offset_span);
                let lo = (shifted - (cfg.band_width as i64 - 1) / 2)
                    .clamp(0, (levels - cfg.band_width) as i64) as usize;
                (lo, lo + cfg.band_width - 1)
            })
            .collect();
        let preferred: Vec<usize> = all_categories
            .choose_multiple(&mut rng, prefer)
            .copied()
            .collect();

        let mut eligible = Vec::new();
        for &c in &preferred {
            for items in &by_cat_level[c][bands[c].0..=bands[c].1] {
                eligible.extend_from_slice(items);
            }
        }

        let count = rng.random_range(min_n..=max_n);
        let mut bought = HashSet::new();
        for _ in 0..count {
            let mut pick = None;
            for _attempt in 0..32 {
                let candidate = if eligible.is_empty() || rng.random::<f64>() < cfg.noise {
                    rng.random_range(0..cfg.items)
                } else {
                    *eligible.choose(&mut rng).expect("non-empty")
                };
                if !bought.contains(&candidate) {
                    pick = Some(candidate);
                    break;
                }
                pick = Some(candidate);
            }
            let item = pick.expect("at least one attempt");
            bought.insert(item);
            interactions.push(RawInteraction {
                user_id: format!("u{u}"),
                item_id: format!("i{item}"),
                timestamp: rng.random_range(0..1_000_000_000u64),
            });
        }
        user_bands.push(bands);
        user_preferred.push(preferred);
    }

    let dataset = Dataset::build(
        &interactions,
        &catalog,
        levels,
        Quantizer::Uniform,
        SplitRatios::default(),
    )?;
    Ok(SyntheticData {
        config: cfg.clone(),
        interactions,
        catalog,
        dataset,
        item_level,
        item_category,
        user_bands,
        user_preferred,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::cwtp_profiles;

    #[test]
    fn deterministic() {
        let a = generate_synthetic_dataset(20, 50, 3, 5, 7).unwrap();
        let b = generate_synthetic_dataset(20, 50, 3, 5, 7).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.interactions, b.interactions);
        let c = generate_synthetic_dataset(20, 50, 3, 5, 8).unwrap();
        assert_ne!(a.interactions, c.interactions);
    }

    #[test]
    fn narrow_bands_have_valid_entropy() {
        let cfg = SyntheticConfig {
            band_width: 1,
            ..SyntheticConfig::new(30, 60, 3, 4, 1)
        };
        let data = generate_synthetic(&cfg).unwrap();
        for p in cwtp_profiles(&data.dataset).into_iter().flatten() {
            assert!(p.entropy >= 0.0);
            assert!(p.entropy <= (p.cwtp.len() as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn planted_levels_survive_quantization() {
        let data = generate_synthetic_dataset(10, 500, 5, 10, 3).unwrap();
        assert_eq!(data.dataset.item_price_level, data.item_level);
        assert_eq!(data.dataset.user_count(), 10);
    }

    #[test]
    fn most_purchases_fall_in_band() {
        let data = generate_synthetic_dataset(200, 500, 5, 10, 42).unwrap();
        let f = data.in_band_fraction();
        assert!(f >= 0.8, "in-band fraction {f}");
    }
}
