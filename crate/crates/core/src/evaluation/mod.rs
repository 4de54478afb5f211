//! Top-K evaluation: ranking, Recall/NDCG, cold-start protocols and
//! willing-to-pay entropy groups.

mod metrics;
mod pools;
pub mod synthetic;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

pub use metrics::{ndcg_at_k, recall_at_k};
pub use pools::{build_cir_pool, build_ucir_pool, unexplored_test_categories};
pub use synthetic::{
    generate_synthetic, generate_synthetic_dataset, SyntheticConfig, SyntheticData,
};

use crate::dataset::{cwtp_profiles, Dataset};
use crate::error::{PupError, Result};

pub const DEFAULT_KS: [usize; 2] = [50, 100];

/// User → item preference score. Higher ranks first.
pub trait Scorer: Sync {
    fn score(&self, user: usize, item: usize) -> f64;
}

impl<F> Scorer for F
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    fn score(&self, user: usize, item: usize) -> f64 {
        self(user, item)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Standard,
    Cir,
    Ucir,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Standard => "standard",
            Protocol::Cir => "cir",
            Protocol::Ucir => "ucir",
        })
    }
}

impl FromStr for Protocol {
    type Err = PupError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Protocol::Standard),
            "cir" => Ok(Protocol::Cir),
            "ucir" => Ok(Protocol::Ucir),
            other => Err(PupError::InvalidArgument(format!(
                "unknown protocol {other:?} (expected standard|cir|ucir)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub user: usize,
    pub protocol: Protocol,
    /// Best first.
    pub items: Vec<usize>,
}

/// Scores `candidates` minus `excluded` (sorted) and keeps the best `k`,
/// breaking ties by ascending item index.
pub fn recommend_topk<S: Scorer + ?Sized>(
    scorer: &S,
    user: usize,
    candidates: &[usize],
    excluded: &[usize],
    k: usize,
    protocol: Protocol,
) -> Result<RankedList> {
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .copied()
        .filter(|i| excluded.binary_search(i).is_err())
        .map(|i| (scorer.score(user, i), i))
        .collect();
    if scored.is_empty() {
        return Err(PupError::InvalidArgument(format!(
            "user {user} has no eligible candidates"
        )));
    }
    let order = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < scored.len() && k > 0 {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(order);
    scored.truncate(k);
    Ok(RankedList {
        user,
        protocol,
        items: scored.into_iter().map(|(_, i)| i).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserMetrics {
    pub user: usize,
    /// aligned with the report's `ks`
    pub recall: Vec<f64>,
    pub ndcg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub protocol: Protocol,
    pub ks: Vec<usize>,
    pub recall: Vec<f64>,
    pub ndcg: Vec<f64>,
    pub users_evaluated: usize,
    pub per_user: Vec<UserMetrics>,
}

#[derive(Serialize)]
struct MetricsLine<'a> {
    protocol: &'a Protocol,
    #[serde(rename = "K")]
    k: usize,
    recall: f64,
    ndcg: f64,
    users_evaluated: usize,
}

impl MetricsReport {
    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.ks.iter().position(|&x| x == k).map(|p| self.recall[p])
    }

    pub fn ndcg_at(&self, k: usize) -> Option<f64> {
        self.ks.iter().position(|&x| x == k).map(|p| self.ndcg[p])
    }

    /// One JSON object per K.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (p, &k) in self.ks.iter().enumerate() {
            let line = MetricsLine {
                protocol: &self.protocol,
                k,
                recall: self.recall[p],
                ndcg: self.ndcg[p],
                users_evaluated: self.users_evaluated,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain struct serializes"));
            out.push('\n');
        }
        out
    }

    /// `user_id,K,recall,ndcg,entropy_group` rows (no header).
    pub fn per_user_csv_rows(&self, dataset: &Dataset, group: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        for um in &self.per_user {
            for (p, &k) in self.ks.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    dataset.user_ids[um.user],
                    k,
                    um.recall[p],
                    um.ndcg[p],
                    group(um.user)
                ));
            }
        }
        out
    }
}

/// Candidate pool and relevant set for one user under `protocol`, or `None`
/// when the user is not evaluated.
fn user_task(
    dataset: &Dataset,
    protocol: Protocol,
    train: &[usize],
    seen: &[usize],
    test: &[usize],
) -> Option<(Vec<usize>, HashSet<usize>)> {
    if test.is_empty() {
        return None;
    }
    let pool = match protocol {
        Protocol::Standard => (0..dataset.item_count()).collect(),
        Protocol::Cir => build_cir_pool(dataset, train, test)?,
        Protocol::Ucir => build_ucir_pool(dataset, train, test)?,
    };
    let relevant: HashSet<usize> = test
        .iter()
        .copied()
        .filter(|i| seen.binary_search(i).is_err() && pool.binary_search(i).is_ok())
        .collect();
    (!relevant.is_empty()).then_some((pool, relevant))
}

/// Evaluates every user with at least one test positive that is reachable
/// in the protocol's pool. Train and validation positives are never ranked.
pub fn evaluate<S: Scorer + ?Sized>(
    scorer: &S,
    dataset: &Dataset,
    ks: &[usize],
    protocol: Protocol,
) -> Result<MetricsReport> {
    evaluate_users(scorer, dataset, ks, protocol, |_| true)
}

/// Like [`evaluate`], restricted to users accepted by `include`.
pub fn evaluate_users<S: Scorer + ?Sized>(
    scorer: &S,
    dataset: &Dataset,
    ks: &[usize],
    protocol: Protocol,
    include: impl Fn(usize) -> bool + Sync,
) -> Result<MetricsReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(PupError::InvalidArgument(
            "K values must be positive".into(),
        ));
    }
    let max_k = *ks.iter().max().unwrap();
    let train = dataset.items_by_user(&dataset.train);
    let validation = dataset.items_by_user(&dataset.validation);
    let test = dataset.items_by_user(&dataset.test);
    let seen: Vec<Vec<usize>> = train
        .iter()
        .zip(&validation)
        .map(|(a, b)| {
            let mut s: Vec<usize> = a.iter().chain(b).copied().collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();

    let per_user: Vec<Option<UserMetrics>> = (0..dataset.user_count())
        .into_par_iter()
        .map(|u| {
            if !include(u) {
                return None;
            }
            let (pool, relevant) = user_task(dataset, protocol, &train[u], &seen[u], &test[u])?;
            let ranked = match recommend_topk(scorer, u, &pool, &seen[u], max_k, protocol) {
                Ok(r) => r,
                Err(_) => {
                    warn!("user {u}: empty candidate pool, skipped");
                    return None;
                }
            };
            let recall = ks
                .iter()
                .map(|&k| recall_at_k(&ranked.items[..k.min(ranked.items.len())], &relevant))
                .collect();
            let ndcg = ks
                .iter()
                .map(|&k| ndcg_at_k(&ranked.items, &relevant, k))
                .collect();
            Some(UserMetrics {
                user: u,
                recall,
                ndcg,
            })
        })
        .collect();
    let per_user: Vec<UserMetrics> = per_user.into_iter().flatten().collect();

    // fixed-order reduction
    let n = per_user.len();
    let mut recall = vec![0.0; ks.len()];
    let mut ndcg = vec![0.0; ks.len()];
    for um in &per_user {
        for p in 0..ks.len() {
            recall[p] += um.recall[p];
            ndcg[p] += um.ndcg[p];
        }
    }
    if n > 0 {
        recall
            .iter_mut()
            .chain(ndcg.iter_mut())
            .for_each(|x| *x /= n as f64);
    }
    Ok(MetricsReport {
        protocol,
        ks: ks.to_vec(),
        recall,
        ndcg,
        users_evaluated: n,
        per_user,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyGroup {
    Consistent,
    Inconsistent,
}

impl fmt::Display for EntropyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntropyGroup::Consistent => "consistent",
            EntropyGroup::Inconsistent => "inconsistent",
        })
    }
}

/// Group of every user by CWTP entropy (`≤ threshold` is consistent);
/// `None` for users without training history.
pub fn entropy_groups(dataset: &Dataset, threshold: f64) -> Vec<Option<EntropyGroup>> {
    cwtp_profiles(dataset)
        .into_iter()
        .map(|p| {
            p.map(|p| {
                if p.entropy <= threshold {
                    EntropyGroup::Consistent
                } else {
                    EntropyGroup::Inconsistent
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyGroupReport {
    pub threshold: f64,
    pub consistent: MetricsReport,
    pub inconsistent: MetricsReport,
    /// users assigned to each group (before the test-positive filter)
    pub consistent_users: usize,
    pub inconsistent_users: usize,
}

pub fn evaluate_by_entropy_group<S: Scorer + ?Sized>(
    scorer: &S,
    dataset: &Dataset,
    ks: &[usize],
    threshold: f64,
) -> Result<EntropyGroupReport> {
    let groups = entropy_groups(dataset, threshold);
    let count = |g| groups.iter().filter(|x| **x == Some(g)).count();
    let run = |g| {
        evaluate_users(scorer, dataset, ks, Protocol::Standard, |u| {
            groups[u] == Some(g)
        })
    };
    Ok(EntropyGroupReport {
        threshold,
        consistent: run(EntropyGroup::Consistent)?,
        inconsistent: run(EntropyGroup::Inconsistent)?,
        consistent_users: count(EntropyGroup::Consistent),
        inconsistent_users: count(EntropyGroup::Inconsistent),
    })
}

pub fn write_text(path: impl AsRef<Path>, body: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(body.as_bytes()))
        .map_err(|e| PupError::io(path, e))
}
