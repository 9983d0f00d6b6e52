//! Splitting items into units and products into per-period copies.

use super::SubstitutableSystem;
use crate::error::{Error, Result};
use crate::lp::{LpSolution, LpStatus, FEAS_TOL};
use crate::model::{Instance, Item, Product};

/// Remaining capacity at or below this counts as a full unit.
const UNIT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CopyInfo {
    pub copy_id: String,
    /// Index of the original product.
    pub product: usize,
    pub period: usize,
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    /// Unit-inventory instance; batch `t` holds the copies of period `t`.
    pub instance: Instance,
    /// Indexed like `instance.products()`.
    pub mapping: Vec<CopyInfo>,
    /// Copies beyond the first, per period.
    pub dummies: Vec<usize>,
    /// `x_t(S)` per period and action, clamped to `[0, ∞)`.
    pub action_weights: Vec<Vec<f64>>,
    /// Unit-item index to original item index.
    pub unit_item: Vec<usize>,
    pub lp_value: f64,
}

impl ReductionOutput {
    /// Copies of product `j` in period `t`.
    pub fn copies_of(&self, t: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.instance.batches()[t]
            .iter()
            .copied()
            .filter(move |&c| self.mapping[c].product == j)
    }
}

/// Units are filled in order; a product whose demand exceeds the smallest
/// remaining unit capacity among its items is split at that breakpoint.
pub fn preprocess(system: &SubstitutableSystem, lp: &LpSolution) -> Result<ReductionOutput> {
    let offsets = system.var_offsets();
    if lp.status != LpStatus::Optimal {
        return Err(Error::pre(format!("relaxation LP is {}", lp.status.name())));
    }
    if lp.values.len() != offsets[system.periods()] {
        return Err(Error::Dimension(format!(
            "{} LP values for {} action variables",
            lp.values.len(),
            offsets[system.periods()]
        )));
    }
    let mut items = Vec::new();
    let mut unit_item = Vec::new();
    let mut first_unit = Vec::with_capacity(system.items.len());
    for (i, (id, k)) in system.items.iter().enumerate() {
        first_unit.push(items.len());
        for u in 1..=*k {
            items.push(Item {
                id: format!("{id}#{u}"),
                inventory: 1,
            });
            unit_item.push(i);
        }
    }
    let mut cap = vec![1.0f64; items.len()];
    let mut cur: Vec<u32> = vec![0; system.items.len()];
    let mut products = Vec::new();
    let mut mapping = Vec::new();
    let mut batches = Vec::with_capacity(system.periods());
    let mut dummies = Vec::with_capacity(system.periods());
    let mut weights = Vec::with_capacity(system.periods());
    for (t, list) in system.actions.iter().enumerate() {
        let w: Vec<f64> = lp.values[offsets[t]..offsets[t + 1]]
            .iter()
            .map(|v| v.max(0.0))
            .collect();
        let mut x = vec![0.0; system.products.len()];
        for (a, &wa) in list.iter().zip(&w) {
            for &(j, p) in &a.phi {
                x[j] += p * wa;
            }
        }
        let mut batch = Vec::new();
        let mut extra = 0;
        for (j, prod) in system.products.iter().enumerate() {
            let mut remaining = x[j];
            let mut copies = 0usize;
            while remaining > UNIT_EPS {
                let mut units = Vec::with_capacity(prod.items.len());
                for &i in &prod.items {
                    if cur[i] >= system.items[i].1 {
                        if remaining <= FEAS_TOL {
                            break;
                        }
                        return Err(Error::pre(format!(
                            "LP overloads item `{}` by {remaining:e}",
                            system.items[i].0
                        )));
                    }
                    units.push(first_unit[i] + cur[i] as usize);
                }
                if units.len() < prod.items.len() {
                    break;
                }
                let room = units.iter().map(|&u| cap[u]).fold(f64::INFINITY, f64::min);
                let amount = if remaining - room <= UNIT_EPS {
                    remaining
                } else {
                    room
                };
                for (&u, &i) in units.iter().zip(&prod.items) {
                    cap[u] -= amount;
                    if cap[u] <= UNIT_EPS {
                        cap[u] = cap[u].max(0.0);
                        cur[i] += 1;
                    }
                }
                remaining -= amount;
                copies += 1;
                let id = format!("{}@{t}#{copies}", prod.id);
                batch.push(products.len());
                mapping.push(CopyInfo {
                    copy_id: id.clone(),
                    product: j,
                    period: t,
                });
                products.push(Product {
                    id,
                    items: units,
                    reward: prod.reward,
                    active_prob: amount,
                    batch: t,
                });
            }
            extra += copies.saturating_sub(1);
        }
        batches.push(batch);
        dummies.push(extra);
        weights.push(w);
    }
    let instance = Instance::from_parts(system.l(), items, products, batches)?;
    Ok(ReductionOutput {
        instance,
        mapping,
        dummies,
        action_weights: weights,
        unit_item,
        lp_value: lp.objective,
    })
}
