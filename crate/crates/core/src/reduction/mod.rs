//! Substitutable-action systems and their reduction to a random-element
//! OCRS: relaxation LP, unit splitting, scale-down mixtures and the online
//! wrapper, plus NRM and OCA adapters.

mod adapters;
mod online;
mod preprocess;
mod scale;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Sense};

pub use adapters::{
    mnl_system, nrm_accept_reject, nrm_from_instance, oca_single_minded, random_mnl_system,
    OcaAgent, NRM_SUPPORT_LIMIT, OCA_SUPPORT_LIMIT,
};
pub use online::{online_algorithm, run_online_path, OnlineContext, OnlineReport, PathOutcome};
pub use preprocess::{preprocess, CopyInfo, ReductionOutput};
pub use scale::{
    scale_down, MixtureEntry, RecourseMixture, RecourseOracle, RemapOracle, TableOracle, TARGET_EPS,
};

/// Tolerance for probability ranges and row sums.
pub const PHI_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SystemProduct {
    pub id: String,
    /// Sorted indices into [`SubstitutableSystem::items`].
    pub items: Vec<usize>,
    pub reward: f64,
}

/// An action with its sparse sale-probability row, sorted by product.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub id: String,
    pub phi: Vec<(usize, f64)>,
}

impl Action {
    pub fn null(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            phi: Vec::new(),
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        match self.phi.binary_search_by_key(&j, |&(k, _)| k) {
            Ok(pos) => self.phi[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.phi.iter().map(|&(_, p)| p).sum()
    }

    pub fn is_null(&self) -> bool {
        self.phi.iter().all(|&(_, p)| p == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutableSystem {
    /// `(id, k_i)` in document order.
    pub items: Vec<(String, u32)>,
    pub products: Vec<SystemProduct>,
    /// Explicit action list per period.
    pub actions: Vec<Vec<Action>>,
}

impl SubstitutableSystem {
    /// Checks ranges, row sums and the presence of a null action per period.
    pub fn new(
        items: Vec<(String, u32)>,
        products: Vec<SystemProduct>,
        actions: Vec<Vec<Action>>,
    ) -> Result<Self> {
        let mut seen = HashMap::new();
        for (k, (id, inv)) in items.iter().enumerate() {
            if *inv == 0 {
                return Err(Error::schema(
                    "inventories",
                    format!("item `{id}` has inventory 0"),
                ));
            }
            if seen.insert(id.as_str(), k).is_some() {
                return Err(Error::schema(
                    "inventories",
                    format!("duplicate item `{id}`"),
                ));
            }
        }
        let mut pids = HashMap::new();
        let mut products = products;
        for p in products.iter_mut() {
            if pids.insert(p.id.clone(), ()).is_some() {
                return Err(Error::schema(
                    "products.id",
                    format!("duplicate product `{}`", p.id),
                ));
            }
            p.items.sort_unstable();
            p.items.dedup();
            if p.items.is_empty() {
                return Err(Error::schema(
                    "products.items",
                    format!("product `{}` has an empty bundle", p.id),
                ));
            }
            if p.items.iter().any(|&i| i >= items.len()) {
                return Err(Error::schema(
                    "products.items",
                    format!("product `{}` uses an unknown item", p.id),
                ));
            }
            if !(p.reward.is_finite() && p.reward >= 0.0) {
                return Err(Error::schema(
                    "products.reward",
                    format!("bad reward for `{}`", p.id),
                ));
            }
        }
        let mut actions = actions;
        for (t, list) in actions.iter_mut().enumerate() {
            let mut ids = HashMap::new();
            for a in list.iter_mut() {
                if ids.insert(a.id.clone(), ()).is_some() {
                    return Err(Error::schema(
                        "actions.id",
                        format!("duplicate action `{}` in period {t}", a.id),
                    ));
                }
                a.phi.sort_by_key(|&(j, _)| j);
                if a.phi.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(Error::schema(
                        "actions.phi",
                        format!("action `{}` repeats a product", a.id),
                    ));
                }
                for &(j, p) in &a.phi {
                    if j >= products.len() {
                        return Err(Error::schema(
                            "actions.phi",
                            format!("action `{}` names an unknown product", a.id),
                        ));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::schema(
                            "actions.phi",
                            format!("probability {p} out of range in `{}`", a.id),
                        ));
                    }
                }
                if a.total() > 1.0 + PHI_TOL {
                    return Err(Error::schema(
                        "actions.phi",
                        format!("row of `{}` in period {t} sums above 1", a.id),
                    ));
                }
            }
            if !list.iter().any(Action::is_null) {
                return Err(Error::schema(
                    "actions",
                    format!("period {t} has no null action"),
                ));
            }
        }
        Ok(Self {
            items,
            products,
            actions,
        })
    }

    pub fn periods(&self) -> usize {
        self.actions.len()
    }

    /// Largest bundle size.
    pub fn l(&self) -> usize {
        self.products
            .iter()
            .map(|p| p.items.len())
            .max()
            .unwrap_or(1)
    }

    pub fn product_by_id(&self, id: &str) -> Option<usize> {
        self.products.iter().position(|p| p.id == id)
    }

    /// Offset of period `t`'s first variable in the relaxation LP.
    pub fn var_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.periods() + 1);
        let mut acc = 0;
        out.push(0);
        for list in &self.actions {
            acc += list.len();
            out.push(acc);
        }
        out
    }
}

/// Relaxation LP over variables `x_t(S)`, one per period and action, in
/// period-major order.
pub fn build_relaxation_lp(system: &SubstitutableSystem) -> LinearProgram {
    let offsets = system.var_offsets();
    let n = offsets[system.periods()];
    let mut lp = LinearProgram::new(n);
    let mut item_rows = vec![vec![0.0; n]; system.items.len()];
    for (t, list) in system.actions.iter().enumerate() {
        for (s, a) in list.iter().enumerate() {
            let v = offsets[t] + s;
            for &(j, p) in &a.phi {
                let prod = &system.products[j];
                lp.objective[v] += prod.reward * p;
                for &i in &prod.items {
                    item_rows[i][v] += p;
                }
            }
        }
    }
    for (row, (_, k)) in item_rows.into_iter().zip(&system.items) {
        lp.add_constraint(row, Sense::Le, f64::from(*k));
    }
    for t in 0..system.periods() {
        let mut row = vec![0.0; n];
        row[offsets[t]..offsets[t + 1]]
            .iter_mut()
            .for_each(|c| *c = 1.0);
        lp.add_constraint(row, Sense::Eq, 1.0);
    }
    lp
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    periods: usize,
    products: Vec<ProductDoc>,
    inventories: serde_json::Map<String, serde_json::Value>,
    actions: Vec<Vec<ActionDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductDoc {
    id: String,
    items: Vec<String>,
    reward: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    id: String,
    phi: BTreeMap<String, f64>,
}

/// Parses a system document:
///
/// ```json
/// {"periods": 1,
///  "products": [{"id": "a", "items": ["x"], "reward": 1.0}],
///  "inventories": {"x": 1},
///  "actions": [[{"id": "null", "phi": {}}, {"id": "offer", "phi": {"a": 0.5}}]]}
/// ```
pub fn load_system(text: &str) -> Result<SubstitutableSystem> {
    let doc: SystemDoc = serde_json::from_str(text).map_err(crate::model::json_error)?;
    if doc.actions.len() != doc.periods {
        return Err(Error::schema(
            "actions",
            format!(
                "{} action lists for {} periods",
                doc.actions.len(),
                doc.periods
            ),
        ));
    }
    let mut items = Vec::with_capacity(doc.inventories.len());
    for (id, v) in &doc.inventories {
        let k = v
            .as_u64()
            .filter(|&k| k >= 1 && k <= u64::from(u32::MAX))
            .ok_or_else(|| {
                Error::schema(
                    "inventories",
                    format!("inventory of `{id}` must be a positive integer"),
                )
            })?;
        items.push((id.clone(), k as u32));
    }
    let item_idx: HashMap<&str, usize> = items
        .iter()
        .enumerate()
        .map(|(k, (id, _))| (id.as_str(), k))
        .collect();
    let mut products = Vec::with_capacity(doc.products.len());
    for p in &doc.products {
        let idx = p
            .items
            .iter()
            .map(|name| {
                item_idx.get(name.as_str()).copied().ok_or_else(|| {
                    Error::schema(
                        "products.items",
                        format!("unknown item `{name}` in `{}`", p.id),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        products.push(SystemProduct {
            id: p.id.clone(),
            items: idx,
            reward: p.reward,
        });
    }
    let prod_idx: HashMap<&str, usize> = products
        .iter()
        .enumerate()
        .map(|(k, p)| (p.id.as_str(), k))
        .collect();
    let mut actions = Vec::with_capacity(doc.periods);
    for list in &doc.actions {
        let mut out = Vec::with_capacity(list.len());
        for a in list {
            let phi = a
                .phi
                .iter()
                .map(|(name, &p)| {
                    prod_idx.get(name.as_str()).map(|&j| (j, p)).ok_or_else(|| {
                        Error::schema(
                            "actions.phi",
                            format!("unknown product `{name}` in `{}`", a.id),
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(Action {
                id: a.id.clone(),
                phi,
            });
        }
        actions.push(out);
    }
    SubstitutableSystem::new(items, products, actions)
}

pub fn save_system(system: &SubstitutableSystem) -> String {
    let doc = SystemDoc {
        periods: system.periods(),
        products: system
            .products
            .iter()
            .map(|p| ProductDoc {
                id: p.id.clone(),
                items: p.items.iter().map(|&i| system.items[i].0.clone()).collect(),
                reward: p.reward,
            })
            .collect(),
        inventories: system
            .items
            .iter()
            .map(|(id, k)| (id.clone(), serde_json::Value::from(*k)))
            .collect(),
        actions: system
            .actions
            .iter()
            .map(|list| {
                list.iter()
                    .map(|a| ActionDoc {
                        id: a.id.clone(),
                        phi: a
                            .phi
                            .iter()
                            .map(|&(j, p)| (system.products[j].id.clone(), p))
                            .collect(),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("system serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{"periods": 1,
        "products": [{"id": "a", "items": ["x"], "reward": 2.0}],
        "inventories": {"x": 1},
        "actions": [[{"id": "null", "phi": {}}, {"id": "offer", "phi": {"a": 0.5}}]]}"#;

    #[test]
    fn round_trip() {
        let sys = load_system(DOC).unwrap();
        assert_eq!(load_system(&save_system(&sys)).unwrap(), sys);
        let sol = build_relaxation_lp(&sys).solve().unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_missing_null_and_bad_rows() {
        let no_null = DOC.replace(r#"{"id": "null", "phi": {}}, "#, "");
        assert!(matches!(load_system(&no_null), Err(Error::Schema { .. })));
        let heavy = DOC.replace("0.5", "1.5");
        assert!(load_system(&heavy).is_err());
        let unknown = DOC.replace(r#""a": 0.5"#, r#""b": 0.5"#);
        assert!(load_system(&unknown).is_err());
    }

    #[test]
    fn zero_action_gives_zero_lp() {
        let sys = SubstitutableSystem::new(
            vec![("x".into(), 1)],
            vec![SystemProduct {
                id: "a".into(),
                items: vec![0],
                reward: 3.0,
            }],
            vec![vec![Action::null("null")]],
        )
        .unwrap();
        assert_eq!(build_relaxation_lp(&sys).solve().unwrap().objective, 0.0);
    }
}
