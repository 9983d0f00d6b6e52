//! Instance data model: items, L-bounded products, ordered batches.

mod generate;
mod io;
mod partite;
mod validate;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use generate::{random_instance, random_partite_instance, RandomInstanceParams};
pub(crate) use io::json_error;
pub use io::{load_instance, save_instance};
pub use partite::is_l_partite;
pub use validate::{validate, Constraint, ValidationReport, Violation};

/// Default additive tolerance for feasibility checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub id: String,
    pub inventory: u32,
}

/// A product requiring a bundle of items. `items` holds sorted indices into
/// [`Instance::items`].
#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub id: String,
    pub items: Vec<usize>,
    pub reward: f64,
    pub active_prob: f64,
    pub batch: usize,
}

/// Immutable instance. Batch order is arrival order; product order inside a
/// batch is document order.
#[derive(Clone, Debug)]
pub struct Instance {
    l: usize,
    items: Vec<Item>,
    products: Vec<Product>,
    batches: Vec<Vec<usize>>,
    item_index: HashMap<String, usize>,
    product_index: HashMap<String, usize>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.l == other.l
            && self.items == other.items
            && self.products == other.products
            && self.batches == other.batches
    }
}

impl Instance {
    /// Builds an instance from parts, checking structure (ids, references,
    /// batch partition, ranges). Numeric feasibility is left to [`validate`].
    pub fn from_parts(
        l: usize,
        items: Vec<Item>,
        products: Vec<Product>,
        batches: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if l == 0 {
            return Err(Error::schema("L", "must be a positive integer"));
        }
        let mut item_index = HashMap::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            if item.inventory == 0 {
                return Err(Error::schema(
                    "items.inventory",
                    format!("item `{}` has inventory 0", item.id),
                ));
            }
            if item_index.insert(item.id.clone(), k).is_some() {
                return Err(Error::schema(
                    "items.id",
                    format!("duplicate item id `{}`", item.id),
                ));
            }
        }
        let mut product_index = HashMap::with_capacity(products.len());
        let mut products = products;
        for (k, p) in products.iter_mut().enumerate() {
            if product_index.insert(p.id.clone(), k).is_some() {
                return Err(Error::schema(
                    "products.id",
                    format!("duplicate product id `{}`", p.id),
                ));
            }
            if p.items.is_empty() {
                return Err(Error::schema(
                    "products.items",
                    format!("product `{}` has an empty bundle", p.id),
                ));
            }
            p.items.sort_unstable();
            if p.items.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::schema(
                    "products.items",
                    format!("product `{}` lists an item twice", p.id),
                ));
            }
            if let Some(&bad) = p.items.iter().find(|&&i| i >= items.len()) {
                return Err(Error::schema(
                    "products.items",
                    format!("product `{}` references unknown item #{bad}", p.id),
                ));
            }
            if !(0.0..=1.0).contains(&p.active_prob) {
                return Err(Error::schema(
                    "products.active_prob",
                    format!("active_prob out of range for `{}`: {}", p.id, p.active_prob),
                ));
            }
            if !(p.reward >= 0.0 && p.reward.is_finite()) {
                return Err(Error::schema(
                    "products.reward",
                    format!("reward must be finite and nonnegative for `{}`", p.id),
                ));
            }
            if p.batch >= batches.len() {
                return Err(Error::schema(
                    "products.batch",
                    format!(
                        "product `{}` names batch {} of {}",
                        p.id,
                        p.batch,
                        batches.len()
                    ),
                ));
            }
        }
        let mut seen = vec![false; products.len()];
        for (t, batch) in batches.iter().enumerate() {
            for &j in batch {
                let Some(p) = products.get(j) else {
                    return Err(Error::schema(
                        "batches",
                        format!("batch {t} references unknown product #{j}"),
                    ));
                };
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::schema(
                        "batches",
                        format!("product `{}` appears in more than one batch slot", p.id),
                    ));
                }
                if p.batch != t {
                    return Err(Error::schema(
                        "batches",
                        format!(
                            "product `{}` listed in batch {t} but declares batch {}",
                            p.id, p.batch
                        ),
                    ));
                }
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::schema(
                "batches",
                format!("product `{}` is not listed in any batch", products[j].id),
            ));
        }
        Ok(Self {
            l,
            items,
            products,
            batches,
            item_index,
            product_index,
        })
    }

    pub fn empty(l: usize) -> Self {
        Self::from_parts(l, Vec::new(), Vec::new(), Vec::new()).expect("empty instance")
    }

    /// Maximum bundle size `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn item_by_id(&self, id: &str) -> Option<usize> {
        self.item_index.get(id).copied()
    }

    pub fn product_by_id(&self, id: &str) -> Option<usize> {
        self.product_index.get(id).copied()
    }

    pub fn active_probs(&self) -> Vec<f64> {
        self.products.iter().map(|p| p.active_prob).collect()
    }

    /// `Σ_{j: i∈A_j} x_j` for every item.
    pub fn item_loads(&self) -> Vec<f64> {
        let mut loads = vec![0.0; self.items.len()];
        for p in &self.products {
            for &i in &p.items {
                loads[i] += p.active_prob;
            }
        }
        loads
    }

    pub fn batch_mass(&self, t: usize) -> f64 {
        self.batches[t]
            .iter()
            .map(|&j| self.products[j].active_prob)
            .sum()
    }

    /// Number of products using each item.
    pub fn item_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.items.len()];
        for p in &self.products {
            for &i in &p.items {
                deg[i] += 1;
            }
        }
        deg
    }

    pub fn has_unit_inventories(&self) -> bool {
        self.items.iter().all(|i| i.inventory == 1)
    }

    /// Every batch holds at most one product.
    pub fn is_standard(&self) -> bool {
        self.batches.iter().all(|b| b.len() <= 1)
    }

    pub fn shares_item(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (&self.products[a].items, &self.products[b].items);
        let (mut u, mut v) = (0, 0);
        while u < pa.len() && v < pb.len() {
            match pa[u].cmp(&pb[v]) {
                std::cmp::Ordering::Less => u += 1,
                std::cmp::Ordering::Greater => v += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Copy of this instance with replaced active probabilities.
    pub fn with_active_probs(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.products.len() {
            return Err(Error::Dimension(format!(
                "{} probabilities for {} products",
                x.len(),
                self.products.len()
            )));
        }
        let products = self
            .products
            .iter()
            .zip(x)
            .map(|(p, &v)| Product {
                active_prob: v,
                ..p.clone()
            })
            .collect();
        Self::from_parts(self.l, self.items.clone(), products, self.batches.clone())
    }

    pub fn fluid_value_at_active_probs(&self) -> f64 {
        self.products.iter().map(|p| p.reward * p.active_prob).sum()
    }
}

/// Incremental construction with ids instead of indices.
#[derive(Debug, Default)]
pub struct InstanceBuilder {
    items: Vec<Item>,
    products: Vec<Product>,
    batches: Vec<Vec<usize>>,
    item_index: HashMap<String, usize>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn item(&mut self, id: impl Into<String>, inventory: u32) -> usize {
        let id = id.into();
        let k = self.items.len();
        self.item_index.insert(id.clone(), k);
        self.items.push(Item { id, inventory });
        k
    }

    pub fn batch(&mut self) -> usize {
        self.batches.push(Vec::new());
        self.batches.len() - 1
    }

    pub fn product_idx(
        &mut self,
        id: impl Into<String>,
        items: Vec<usize>,
        reward: f64,
        active_prob: f64,
        batch: usize,
    ) -> usize {
        let j = self.products.len();
        self.products.push(Product {
            id: id.into(),
            items,
            reward,
            active_prob,
            batch,
        });
        if let Some(b) = self.batches.get_mut(batch) {
            b.push(j);
        }
        j
    }

    /// Adds a product by item ids; unknown ids become unit-inventory items.
    pub fn product(
        &mut self,
        id: impl Into<String>,
        items: &[&str],
        reward: f64,
        active_prob: f64,
        batch: usize,
    ) -> usize {
        let idx = items
            .iter()
            .map(|&name| match self.item_index.get(name) {
                Some(&k) => k,
                None => self.item(name, 1),
            })
            .collect();
        self.product_idx(id, idx, reward, active_prob, batch)
    }

    pub fn build(self, l: usize) -> Result<Instance> {
        Instance::from_parts(l, self.items, self.products, self.batches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_rejects_out_of_range_probability() {
        let mut b = InstanceBuilder::new();
        let t = b.batch();
        b.product("a", &["1"], 1.0, 1.2, t);
        let err = b.build(1).unwrap_err();
        assert!(
            err.to_string().contains("active_prob out of range"),
            "{err}"
        );
    }

    #[test]
    fn builder_rejects_duplicate_items_in_bundle() {
        let mut b = InstanceBuilder::new();
        let t = b.batch();
        let i = b.item("1", 1);
        b.product_idx("a", vec![i, i], 1.0, 0.5, t);
        assert!(b.build(2).is_err());
    }

    #[test]
    fn shares_item_detects_overlap() {
        let mut b = InstanceBuilder::new();
        let t = b.batch();
        b.product("a", &["1", "2"], 1.0, 0.1, t);
        b.product("b", &["2", "3"], 1.0, 0.1, t);
        b.product("c", &["4"], 1.0, 0.1, t);
        let inst = b.build(2).unwrap();
        assert!(inst.shares_item(0, 1));
        assert!(!inst.shares_item(0, 2));
    }
}
