//! `(♣)`: ordered pairs of item-disjoint products from different batches
//! that each touch a distinct item of a target set, weighted by `x_j x_j'`.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{Instance, Item, Product};
use crate::rng::{self, Tag};

/// Brute-force double sum over ordered pairs `(j, j')`.
///
/// Products whose bundle contains the whole target set play the role of the
/// reference product and are left out of the sum; any other product touching
/// two or more target items is a precondition error.
pub fn clubsuit(instance: &Instance, target_items: &[String]) -> Result<f64> {
    let mut is_target = vec![false; instance.items().len()];
    for id in target_items {
        let i = instance
            .item_by_id(id)
            .ok_or_else(|| Error::pre(format!("unknown target item `{id}`")))?;
        is_target[i] = true;
    }
    let products = instance.products();
    let mut touches = Vec::with_capacity(products.len());
    for p in products {
        let k = p.items.iter().filter(|&&i| is_target[i]).count();
        if k > 1 && k < target_items.len() {
            return Err(Error::pre(format!(
                "product `{}` contains {k} target items",
                p.id
            )));
        }
        touches.push(k == 1);
    }
    let mut total = 0.0;
    for (j, pj) in products.iter().enumerate() {
        if !touches[j] {
            continue;
        }
        for (k, pk) in products.iter().enumerate() {
            if touches[k] && pj.batch != pk.batch && !instance.shares_item(j, k) {
                total += pj.active_prob * pk.active_prob;
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClubsuitClass {
    /// Singleton batches.
    Standard,
    /// Items split into L groups, products take at most one item per group.
    Partite,
}

#[derive(Clone, Debug)]
pub struct ClubsuitFixture {
    pub instance: Instance,
    pub target: Vec<String>,
    /// Item groups for the partite class.
    pub partition: Option<Vec<Vec<String>>>,
}

/// Random valid instance whose `L` target items carry load exactly 1 and
/// whose products touch at most one target item each.
///
/// Every target item gets 1 to 4 products with random masses summing to 1.
/// Products also draw non-target items from a small shared pool, only from
/// items with enough spare capacity, so pool items stay within load 1.
/// Standard fixtures place each product in its own batch in random order;
/// partite fixtures pack products into random batches of mass at most 1.
pub fn random_clubsuit_instance(
    l: usize,
    class: ClubsuitClass,
    seed: u64,
) -> Result<ClubsuitFixture> {
    if l < 2 {
        return Err(Error::invalid("L", "needs L >= 2"));
    }
    let mut rng = rng::stream(seed, Tag::Generate, &[3, class as u64]);
    let pool = 2 * l;
    let mut items: Vec<Item> = Vec::new();
    let mut target = Vec::new();
    let mut partition: Vec<Vec<String>> = vec![Vec::new(); l];
    // pool[g][k] item index; for Standard a single shared pool in slot 0
    let mut pool_idx: Vec<Vec<usize>> = Vec::new();
    for g in 0..l {
        let id = format!("t{g}");
        partition[g].push(id.clone());
        target.push(id.clone());
        items.push(Item { id, inventory: 1 });
    }
    match class {
        ClubsuitClass::Standard => {
            let mut v = Vec::new();
            for k in 0..pool {
                v.push(items.len());
                items.push(Item {
                    id: format!("s{k}"),
                    inventory: 1,
                });
            }
            pool_idx.push(v);
        }
        ClubsuitClass::Partite => {
            for (g, group) in partition.iter_mut().enumerate() {
                let mut v = Vec::new();
                for k in 0..pool {
                    let id = format!("g{g}_{k}");
                    group.push(id.clone());
                    v.push(items.len());
                    items.push(Item { id, inventory: 1 });
                }
                pool_idx.push(v);
            }
        }
    }
    let mut load = vec![0.0; items.len()];
    let mut bundles: Vec<(Vec<usize>, f64)> = Vec::new();
    for g in 0..l {
        let count = rng.random_range(1..=4);
        let w: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = w.iter().sum();
        let mut masses: Vec<f64> = w.iter().map(|v| v / sum).collect();
        // make the target load exactly 1 in floating point
        let head: f64 = masses[..count - 1].iter().sum();
        masses[count - 1] = 1.0 - head;
        for x in masses {
            let mut bundle = vec![g];
            match class {
                ClubsuitClass::Standard => {
                    let want = rng.random_range(0..l);
                    let mut cand: Vec<usize> = pool_idx[0]
                        .iter()
                        .copied()
                        .filter(|&i| load[i] + x <= 1.0)
                        .collect();
                    cand.shuffle(&mut rng);
                    bundle.extend(cand.into_iter().take(want));
                }
                ClubsuitClass::Partite => {
                    for (h, group) in pool_idx.iter().enumerate() {
                        if h != g && rng.random_bool(0.5) {
                            let cand: Vec<usize> = group
                                .iter()
                                .copied()
                                .filter(|&i| load[i] + x <= 1.0)
                                .collect();
                            if !cand.is_empty() {
                                bundle.push(cand[rng.random_range(0..cand.len())]);
                            }
                        }
                    }
                }
            }
            for &i in &bundle {
                load[i] += x;
            }
            bundles.push((bundle, x));
        }
    }
    bundles.shuffle(&mut rng);
    let mut batch_of = Vec::with_capacity(bundles.len());
    let mut masses: Vec<f64> = Vec::new();
    for (_, x) in &bundles {
        let t = match class {
            ClubsuitClass::Standard => None,
            ClubsuitClass::Partite => {
                let open: Vec<usize> = (0..masses.len())
                    .filter(|&t| masses[t] + x <= 1.0)
                    .collect();
                if open.is_empty() || rng.random_bool(0.3) {
                    None
                } else {
                    Some(open[rng.random_range(0..open.len())])
                }
            }
        };
        let t = t.unwrap_or_else(|| {
            masses.push(0.0);
            masses.len() - 1
        });
        masses[t] += x;
        batch_of.push(t);
    }
    let mut batches = vec![Vec::new(); masses.len()];
    let products = bundles
        .into_iter()
        .enumerate()
        .map(|(j, (items, x))| {
            batches[batch_of[j]].push(j);
            Product {
                id: format!("p{j}"),
                items,
                reward: 1.0,
                active_prob: x,
                batch: batch_of[j],
            }
        })
        .collect();
    let instance = Instance::from_parts(l, items, products, batches)?;
    Ok(ClubsuitFixture {
        instance,
        target,
        partition: (class == ClubsuitClass::Partite).then_some(partition),
    })
}
