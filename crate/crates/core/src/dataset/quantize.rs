//! Price quantization into `L` categorical levels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PupError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantizer {
    /// Min/max normalisation within the category.
    Uniform,
    /// Percentile of the price rank within the category.
    Rank,
}

impl std::str::FromStr for Quantizer {
    type Err = PupError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Quantizer::Uniform),
            "rank" => Ok(Quantizer::Rank),
            other => Err(PupError::InvalidArgument(format!(
                "unknown quantizer {other:?} (expected uniform|rank)"
            ))),
        }
    }
}

impl std::fmt::Display for Quantizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quantizer::Uniform => "uniform",
            Quantizer::Rank => "rank",
        })
    }
}

/// `⌊(price − min) / (max − min) × L⌋`, clamped to `L − 1` at the maximum.
/// A degenerate range (`min == max`) maps everything to level 0.
pub fn quantize_uniform(price: f64, cat_min: f64, cat_max: f64, levels: usize) -> Result<usize> {
    if levels < 2 {
        return Err(PupError::InvalidArgument(format!(
            "price level count must be >= 2, got {levels}"
        )));
    }
    if !(price >= cat_min && price <= cat_max) {
        return Err(PupError::PriceOutOfRange {
            price,
            min: cat_min,
            max: cat_max,
        });
    }
    if cat_max == cat_min {
        return Ok(0);
    }
    let scaled = (price - cat_min) / (cat_max - cat_min) * levels as f64;
    Ok((scaled.floor() as usize).min(levels - 1))
}

/// Rank-based quantization of one category's items.
///
/// Items are ordered by ascending price (ties by item index); the item at
/// 0-based rank `r` of `n` receives level `⌊L · r / n⌋`.
pub fn quantize_rank(
    category_prices: &[(usize, f64)],
    levels: usize,
) -> Result<BTreeMap<usize, usize>> {
    if levels < 2 {
        return Err(PupError::InvalidArgument(format!(
            "price level count must be >= 2, got {levels}"
        )));
    }
    let mut order: Vec<(usize, f64)> = category_prices.to_vec();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let n = order.len();
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(rank, (item, _))| (item, ((levels * rank) / n).min(levels - 1)))
        .collect())
}

/// Quantize every item of a catalog, grouping by category.
/// `prices[i]` and `categories[i]` describe item `i`.
pub fn quantize_catalog(
    prices: &[f64],
    categories: &[usize],
    category_count: usize,
    levels: usize,
    quantizer: Quantizer,
) -> Result<Vec<usize>> {
    let mut by_category: Vec<Vec<(usize, f64)>> = vec![Vec::new(); category_count];
    for (item, (&price, &cat)) in prices.iter().zip(categories).enumerate() {
        by_category[cat].push((item, price));
    }
    let mut out = vec![0usize; prices.len()];
    for members in by_category.iter().filter(|m| !m.is_empty()) {
        match quantizer {
            Quantizer::Uniform => {
                let min = members.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
                let max = members
                    .iter()
                    .map(|m| m.1)
                    .fold(f64::NEG_INFINITY, f64::max);
                for &(item, price) in members {
                    out[item] = quantize_uniform(price, min, max, levels)?;
                }
            }
            Quantizer::Rank => {
                for (item, level) in quantize_rank(members, levels)? {
                    out[item] = level;
                }
            }
        }
    }
    Ok(out)
}
