//! Builders for accept-reject NRM and single-minded OCA systems.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng as _;

use super::{Action, SubstitutableSystem, SystemProduct, PHI_TOL};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rng::{self, Tag};

/// Largest per-period support for assortment enumeration.
pub const NRM_SUPPORT_LIMIT: usize = 12;
/// Largest value support per OCA agent.
pub const OCA_SUPPORT_LIMIT: usize = 16;

/// Accept-reject NRM with arrival rates `lambda[t][j]`; every subset of a
/// period's support is an assortment action, the empty one being null.
pub fn nrm_accept_reject(
    items: Vec<(String, u32)>,
    products: Vec<SystemProduct>,
    lambda: &[Vec<f64>],
) -> Result<SubstitutableSystem> {
    let mut actions = Vec::with_capacity(lambda.len());
    for (t, row) in lambda.iter().enumerate() {
        if row.len() != products.len() {
            return Err(Error::Dimension(format!(
                "period {t} has {} rates for {} products",
                row.len(),
                products.len()
            )));
        }
        if row.iter().sum::<f64>() > 1.0 + PHI_TOL {
            return Err(Error::invalid(
                "lambda",
                format!("period {t} rates sum above 1"),
            ));
        }
        let support: Vec<usize> = (0..row.len()).filter(|&j| row[j] > 0.0).collect();
        if support.len() > NRM_SUPPORT_LIMIT {
            return Err(Error::StateSpaceTooLarge {
                states: 1u128 << support.len(),
                limit: 1u128 << NRM_SUPPORT_LIMIT,
            });
        }
        let list = (0u32..1 << support.len())
            .map(|mask| {
                let chosen: Vec<usize> = (0..support.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| support[b])
                    .collect();
                let names: Vec<&str> = chosen.iter().map(|&j| products[j].id.as_str()).collect();
                Action {
                    id: format!("{{{}}}", names.join(",")),
                    phi: chosen.iter().map(|&j| (j, row[j])).collect(),
                }
            })
            .collect();
        actions.push(list);
    }
    SubstitutableSystem::new(items, products, actions)
}

/// NRM view of an instance: one period per batch, `λ_tj = x_j` for the
/// batch's products.
pub fn nrm_from_instance(instance: &Instance) -> Result<SubstitutableSystem> {
    let items = instance
        .items()
        .iter()
        .map(|i| (i.id.clone(), i.inventory))
        .collect();
    let products = instance
        .products()
        .iter()
        .map(|p| SystemProduct {
            id: p.id.clone(),
            items: p.items.clone(),
            reward: p.reward,
        })
        .collect();
    let n = instance.products().len();
    let lambda: Vec<Vec<f64>> = instance
        .batches()
        .iter()
        .map(|b| {
            let mut row = vec![0.0; n];
            b.iter()
                .for_each(|&j| row[j] = instance.products()[j].active_prob);
            row
        })
        .collect();
    nrm_accept_reject(items, products, &lambda)
}

/// Multinomial-logit assortments: offering `S` sells `j ∈ S` with
/// probability `w_tj / (1 + Σ_{k∈S} w_tk)`. Every subset of a period's
/// support is an action.
pub fn mnl_system(
    items: Vec<(String, u32)>,
    products: Vec<SystemProduct>,
    weights: &[Vec<f64>],
) -> Result<SubstitutableSystem> {
    let mut actions = Vec::with_capacity(weights.len());
    for (t, row) in weights.iter().enumerate() {
        if row.len() != products.len() || row.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid(
                "weights",
                format!("period {t} needs one finite weight >= 0 per product"),
            ));
        }
        let support: Vec<usize> = (0..row.len()).filter(|&j| row[j] > 0.0).collect();
        if support.len() > NRM_SUPPORT_LIMIT {
            return Err(Error::StateSpaceTooLarge {
                states: 1u128 << support.len(),
                limit: 1u128 << NRM_SUPPORT_LIMIT,
            });
        }
        let list = (0u32..1 << support.len())
            .map(|mask| {
                let chosen: Vec<usize> = (0..support.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| support[b])
                    .collect();
                let denom = 1.0 + chosen.iter().map(|&j| row[j]).sum::<f64>();
                let names: Vec<&str> = chosen.iter().map(|&j| products[j].id.as_str()).collect();
                Action {
                    id: format!("{{{}}}", names.join(",")),
                    phi: chosen.iter().map(|&j| (j, row[j] / denom)).collect(),
                }
            })
            .collect();
        actions.push(list);
    }
    SubstitutableSystem::new(items, products, actions)
}

/// Random MNL system: inventories in 1..=3, bundles of 1..=`l` items,
/// rewards in [0.5, 2) and up to 4 offered products per period.
pub fn random_mnl_system(
    num_items: usize,
    num_products: usize,
    periods: usize,
    l: usize,
    seed: u64,
) -> Result<SubstitutableSystem> {
    if num_items == 0 || num_products == 0 || l == 0 {
        return Err(Error::invalid(
            "size",
            "items, products and L must be positive",
        ));
    }
    let mut rng = rng::stream(seed, Tag::Generate, &[3]);
    let items = (0..num_items)
        .map(|i| (format!("m{i}"), rng.random_range(1..=3u32)))
        .collect();
    let products = (0..num_products)
        .map(|j| {
            let size = rng.random_range(1..=l.min(num_items));
            SystemProduct {
                id: format!("p{j}"),
                items: sample(&mut rng, num_items, size).into_vec(),
                reward: rng.random_range(0.5..2.0),
            }
        })
        .collect();
    let weights: Vec<Vec<f64>> = (0..periods)
        .map(|_| {
            let mut row = vec![0.0; num_products];
            let k = rng.random_range(1..=num_products.min(4));
            for j in sample(&mut rng, num_products, k) {
                row[j] = rng.random_range(0.1..2.0);
            }
            row
        })
        .collect();
    mnl_system(items, products, &weights)
}

/// A single-minded agent: bundle and finite value distribution `(value, prob)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OcaAgent {
    pub bundle: Vec<String>,
    pub values: Vec<(f64, f64)>,
}

/// One product per (agent, support point) on the agent's bundle; actions are
/// "accept iff value ≥ v" thresholds plus reject.
pub fn oca_single_minded(
    inventories: Vec<(String, u32)>,
    agents: &[OcaAgent],
) -> Result<SubstitutableSystem> {
    let idx: HashMap<&str, usize> = inventories
        .iter()
        .enumerate()
        .map(|(k, (id, _))| (id.as_str(), k))
        .collect();
    let mut products = Vec::new();
    let mut actions = Vec::with_capacity(agents.len());
    for (t, agent) in agents.iter().enumerate() {
        if agent.bundle.is_empty() {
            return Err(Error::invalid(
                "bundle",
                format!("agent {t} has an empty bundle"),
            ));
        }
        if agent.values.len() > OCA_SUPPORT_LIMIT {
            return Err(Error::invalid(
                "values",
                format!("agent {t} has {} support points", agent.values.len()),
            ));
        }
        if agent.values.iter().map(|v| v.1).sum::<f64>() > 1.0 + PHI_TOL {
            return Err(Error::invalid(
                "values",
                format!("agent {t} probabilities sum above 1"),
            ));
        }
        let bundle = agent
            .bundle
            .iter()
            .map(|b| {
                idx.get(b.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid("bundle", format!("unknown item `{b}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let first = products.len();
        for (k, &(v, _)) in agent.values.iter().enumerate() {
            products.push(SystemProduct {
                id: format!("a{t}v{k}"),
                items: bundle.clone(),
                reward: v,
            });
        }
        let mut thresholds: Vec<f64> = agent.values.iter().map(|v| v.0).collect();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let mut list = vec![Action::null("reject")];
        for v in thresholds {
            list.push(Action {
                id: format!(">={v}"),
                phi: agent
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(_, val)| val.0 >= v && val.1 > 0.0)
                    .map(|(k, val)| (first + k, val.1))
                    .collect(),
            });
        }
        actions.push(list);
    }
    SubstitutableSystem::new(inventories, products, actions)
}
