//! Seeded random instance generators for test suites and experiments.

use rand::seq::index::sample;
use rand::Rng;

use super::{Instance, Item, Product};
use crate::error::{Error, Result};
use crate::rng::{self, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomInstanceParams {
    pub l: usize,
    pub num_items: usize,
    pub num_batches: usize,
    pub max_batch_size: usize,
    /// Pad every touched item to load exactly 1 with singleton products.
    pub tight: bool,
    pub seed: u64,
}

struct Draft {
    items: Vec<usize>,
    weight: f64,
    batch: usize,
}

/// Random valid instance with unit inventories.
///
/// Batch sizes are uniform in `1..=max_batch_size`, bundle sizes uniform in
/// `1..=L`. Weights are normalized per batch to a random mass in `[0.3, 1]`
/// and then globally rescaled so no item load exceeds 1. With `tight`, every
/// touched item with slack gets a singleton padding product in its own batch,
/// inserted at a seeded position, so the result has more than `num_batches`
/// batches.
pub fn random_instance(params: RandomInstanceParams) -> Result<Instance> {
    let RandomInstanceParams {
        l,
        num_items,
        num_batches,
        max_batch_size,
        tight,
        seed,
    } = params;
    if l == 0 {
        return Err(Error::invalid("L", "must be at least 1"));
    }
    if num_items < l {
        return Err(Error::invalid("num_items", "must be at least L"));
    }
    if max_batch_size == 0 || num_batches == 0 {
        return Err(Error::invalid(
            "max_batch_size",
            "batches must be nonempty: need max_batch_size >= 1 and num_batches >= 1",
        ));
    }
    let mut rng = rng::stream(seed, Tag::Generate, &[1]);
    let mut drafts = Vec::new();
    for t in 0..num_batches {
        let size = rng.random_range(1..=max_batch_size);
        for _ in 0..size {
            let k = rng.random_range(1..=l);
            let mut items = sample(&mut rng, num_items, k).into_vec();
            items.sort_unstable();
            drafts.push(Draft {
                items,
                weight: rng.random_range(0.05..1.0),
                batch: t,
            });
        }
    }
    let mut x = normalize(&drafts, num_batches, &mut rng);
    let loads = loads_of(&drafts, &x, num_items);
    let max_load = loads.iter().cloned().fold(0.0, f64::max);
    if max_load > 1.0 {
        x.iter_mut().for_each(|v| *v /= max_load);
    }
    let rewards: Vec<f64> = drafts.iter().map(|_| rng.random_range(0.5..2.0)).collect();
    assemble(
        l,
        num_items,
        drafts,
        x,
        rewards,
        num_batches,
        tight,
        &mut rng,
        |i| format!("i{i}"),
    )
}

/// Random instance on `L` item groups of `group_size` items each where every
/// product takes at most one item per group. Returns the partition as item id
/// groups alongside the instance.
pub fn random_partite_instance(
    l: usize,
    group_size: usize,
    num_batches: usize,
    max_batch_size: usize,
    tight: bool,
    seed: u64,
) -> Result<(Instance, Vec<Vec<String>>)> {
    if l == 0 || group_size == 0 || num_batches == 0 || max_batch_size == 0 {
        return Err(Error::invalid(
            "params",
            "L, group_size, num_batches and max_batch_size must be positive",
        ));
    }
    let num_items = l * group_size;
    let mut rng = rng::stream(seed, Tag::Generate, &[2]);
    let mut drafts = Vec::new();
    for t in 0..num_batches {
        let size = rng.random_range(1..=max_batch_size);
        for _ in 0..size {
            let full = rng.random_bool(0.8);
            let mut items = Vec::with_capacity(l);
            for g in 0..l {
                if full || rng.random_bool(0.5) {
                    items.push(g * group_size + rng.random_range(0..group_size));
                }
            }
            if items.is_empty() {
                let g = rng.random_range(0..l);
                items.push(g * group_size + rng.random_range(0..group_size));
            }
            drafts.push(Draft {
                items,
                weight: rng.random_range(0.05..1.0),
                batch: t,
            });
        }
    }
    let mut x = normalize(&drafts, num_batches, &mut rng);
    let loads = loads_of(&drafts, &x, num_items);
    let max_load = loads.iter().cloned().fold(0.0, f64::max);
    if max_load > 1.0 {
        x.iter_mut().for_each(|v| *v /= max_load);
    }
    let rewards: Vec<f64> = drafts.iter().map(|_| rng.random_range(0.5..2.0)).collect();
    let name = |i: usize| format!("g{}_{}", i / group_size, i % group_size);
    let inst = assemble(
        l,
        num_items,
        drafts,
        x,
        rewards,
        num_batches,
        tight,
        &mut rng,
        name,
    )?;
    let partition = (0..l)
        .map(|g| (0..group_size).map(|k| name(g * group_size + k)).collect())
        .collect();
    Ok((inst, partition))
}

fn normalize(drafts: &[Draft], num_batches: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut sums = vec![0.0; num_batches];
    for d in drafts {
        sums[d.batch] += d.weight;
    }
    let targets: Vec<f64> = (0..num_batches)
        .map(|_| rng.random_range(0.3..=1.0))
        .collect();
    drafts
        .iter()
        .map(|d| d.weight / sums[d.batch] * targets[d.batch])
        .collect()
}

fn loads_of(drafts: &[Draft], x: &[f64], num_items: usize) -> Vec<f64> {
    let mut loads = vec![0.0; num_items];
    for (d, &v) in drafts.iter().zip(x) {
        for &i in &d.items {
            loads[i] += v;
        }
    }
    loads
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    l: usize,
    num_items: usize,
    drafts: Vec<Draft>,
    x: Vec<f64>,
    rewards: Vec<f64>,
    num_batches: usize,
    tight: bool,
    rng: &mut impl Rng,
    item_name: impl Fn(usize) -> String,
) -> Result<Instance> {
    let items: Vec<Item> = (0..num_items)
        .map(|i| Item {
            id: item_name(i),
            inventory: 1,
        })
        .collect();
    // (items, reward, prob, original batch or None for padding)
    let mut entries: Vec<(Vec<usize>, f64, f64, Option<usize>)> = drafts
        .into_iter()
        .zip(x.iter().zip(&rewards))
        .map(|(d, (&v, &r))| (d.items, r, v, Some(d.batch)))
        .collect();
    if tight {
        let mut loads = vec![0.0; num_items];
        let mut touched = vec![false; num_items];
        for (its, _, v, _) in &entries {
            for &i in its {
                loads[i] += v;
                touched[i] = true;
            }
        }
        for i in 0..num_items {
            let slack = 1.0 - loads[i];
            if touched[i] && slack > 1e-12 {
                entries.push((vec![i], rng.random_range(0.5..2.0), slack, None));
            }
        }
    }
    // Batch order: original batches in order, padding batches spliced in at
    // seeded positions.
    let mut order: Vec<Option<usize>> = (0..num_batches).map(Some).collect();
    let mut pad_slots = Vec::new();
    for (k, e) in entries.iter().enumerate() {
        if e.3.is_none() {
            let pos = rng.random_range(0..=order.len());
            order.insert(pos, None);
            pad_slots.push(k);
        }
    }
    let mut batch_of_original = vec![0; num_batches];
    let mut pad_batches = Vec::new();
    for (pos, slot) in order.iter().enumerate() {
        match slot {
            Some(t) => batch_of_original[*t] = pos,
            None => pad_batches.push(pos),
        }
    }
    let mut batches = vec![Vec::new(); order.len()];
    let mut products = Vec::with_capacity(entries.len());
    let mut pad_iter = pad_batches.into_iter();
    for (k, (its, r, v, orig)) in entries.into_iter().enumerate() {
        let (id, batch) = match orig {
            Some(t) => (format!("p{k}"), batch_of_original[t]),
            None => (
                format!("pad{k}"),
                pad_iter.next().expect("one slot per padding product"),
            ),
        };
        batches[batch].push(k);
        products.push(Product {
            id,
            items: its,
            reward: r,
            active_prob: v,
            batch,
        });
    }
    Instance::from_parts(l, items, products, batches)
}
