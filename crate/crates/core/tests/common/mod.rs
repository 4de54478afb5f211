#![allow(dead_code)]

pub mod fixtures;

use std::collections::BTreeSet;

use pup::dataset::Dataset;
use pup::training::{BprModel, Triplet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small dataset with random sizes drawn from the inclusive upper bounds.
/// Every category and price level exists; the test split holds one extra
/// random pair per user.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    max_users: usize,
    max_items: usize,
    max_cats: usize,
    max_levels: usize,
) -> Dataset {
    let users = rng.random_range(1..=max_users);
    let items = rng.random_range(1..=max_items);
    let cats = rng.random_range(1..=max_cats.min(items));
    let levels = rng.random_range(2..=max_levels.max(2));
    let mut item_category: Vec<usize> = (0..items)
        .map(|i| {
            if i < cats {
                i
            } else {
                rng.random_range(0..cats)
            }
        })
        .collect();
    item_category.rotate_left(rng.random_range(0..items));
    let item_price_level = (0..items).map(|_| rng.random_range(0..levels)).collect();
    let density: f64 = rng.random_range(0.1..0.6);
    let mut train = Vec::new();
    for u in 0..users {
        for i in 0..items {
            if rng.random::<f64>() < density {
                train.push((u, i));
            }
        }
    }
    let test = (0..users)
        .map(|u| (u, rng.random_range(0..items)))
        .collect();
    Dataset {
        user_ids: (0..users).map(|u| format!("u{u}")).collect(),
        item_ids: (0..items).map(|i| format!("i{i}")).collect(),
        category_ids: (0..cats).map(|c| format!("c{c}")).collect(),
        price_level_count: levels,
        item_price_level,
        item_category,
        train,
        validation: vec![],
        test,
    }
}

/// Node ids under the users/items/categories/prices block layout.
pub struct Ids {
    pub users: usize,
    pub items: usize,
    pub cats: usize,
}

impl Ids {
    pub fn of(ds: &Dataset) -> Self {
        Ids {
            users: ds.user_ids.len(),
            items: ds.item_ids.len(),
            cats: ds.category_ids.len(),
        }
    }
    pub fn item(&self, i: usize) -> usize {
        self.users + i
    }
    pub fn cat(&self, c: usize) -> usize {
        self.users + self.items + c
    }
    pub fn price(&self, p: usize) -> usize {
        self.users + self.items + self.cats + p
    }
}

/// Neighbor sets built straight from the dataset, self excluded.
pub fn oracle_neighbors(ds: &Dataset, with_cat: bool, with_price: bool) -> Vec<BTreeSet<usize>> {
    let ids = Ids::of(ds);
    let n = ids.users + ids.items + ids.cats + ds.price_level_count;
    let mut nb = vec![BTreeSet::new(); n];
    let mut link = |a: usize, b: usize| {
        nb[a].insert(b);
        nb[b].insert(a);
    };
    for &(u, i) in &ds.train {
        link(u, ids.item(i));
    }
    for i in 0..ids.items {
        if with_cat {
            link(ids.item(i), ids.cat(ds.item_category[i]));
        }
        if with_price {
            link(ids.item(i), ids.price(ds.item_price_level[i]));
        }
    }
    nb
}

/// Per-node evaluation: `f_i = tanh(Σ_{j ∈ N_i ∪ {i}} e_j / |N_i ∪ {i}|)`.
pub fn per_node_encode(neighbors: &[BTreeSet<usize>], emb: &[Vec<f64>]) -> Vec<Vec<f64>> {
    neighbors
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let size = (nb.len() + 1) as f64;
            let mut acc = emb[i].iter().map(|x| x / size).collect::<Vec<_>>();
            for &j in nb {
                for (a, x) in acc.iter_mut().zip(&emb[j]) {
                    *a += x / size;
                }
            }
            acc.into_iter().map(f64::tanh).collect()
        })
        .collect()
}

pub fn naive_pairwise(vectors: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            s += vectors[a]
                .iter()
                .zip(&vectors[b])
                .map(|(x, y)| x * y)
                .sum::<f64>();
        }
    }
    s
}

pub fn random_triplets(rng: &mut ChaCha8Rng, ds: &Dataset, count: usize) -> Vec<Triplet> {
    (0..count)
        .map(|_| Triplet {
            user: rng.random_range(0..ds.user_ids.len()),
            positive: rng.random_range(0..ds.item_ids.len()),
            negative: rng.random_range(0..ds.item_ids.len()),
        })
        .collect()
}

/// Largest per-coordinate relative error between analytic gradients and
/// the fourth-order central difference
/// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`; the denominator is
/// floored at `floor`.
pub fn max_gradient_error<M: BprModel>(
    model: &mut M,
    batch: &[Triplet],
    lambda: f64,
    h: f64,
    floor: f64,
) -> f64 {
    let analytic = model.compute_gradients(batch, lambda, None).unwrap().grads;
    let mut worst: f64 = 0.0;
    for t in 0..analytic.len() {
        for k in 0..analytic[t].as_slice().len() {
            let orig = model.parameters()[t].as_slice()[k];
            let mut loss_at = |offset: f64| {
                model.parameters_mut()[t].as_mut_slice()[k] = orig + offset;
                model.compute_gradients(batch, lambda, None).unwrap().loss
            };
            let numeric = (-loss_at(2.0 * h) + 8.0 * loss_at(h) - 8.0 * loss_at(-h)
                + loss_at(-2.0 * h))
                / (12.0 * h);
            model.parameters_mut()[t].as_mut_slice()[k] = orig;
            let a = analytic[t].as_slice()[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            worst = worst.max(err);
        }
    }
    worst
}
