//! JSON instance documents.
//!
//! ```json
//! {"L": 2,
//!  "items": [{"id": "1", "inventory": 1}],
//!  "products": [{"id": "a", "items": ["1"], "reward": 1.0, "active_prob": 0.5, "batch": 0}],
//!  "batches": [["a"]]}
//! ```

use serde::{Deserialize, Serialize};

use super::{Instance, Item, Product};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(rename = "L")]
    l: usize,
    items: Vec<ItemDoc>,
    products: Vec<ProductDoc>,
    batches: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemDoc {
    id: String,
    inventory: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductDoc {
    id: String,
    items: Vec<String>,
    reward: f64,
    active_prob: f64,
    batch: usize,
}

pub(crate) fn json_error(err: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match err.classify() {
        Category::Data => {
            let message = err.to_string();
            let field = message.split('`').nth(1).unwrap_or("document").to_string();
            Error::Schema { field, message }
        }
        _ => Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        },
    }
}

pub fn load_instance(text: &str) -> Result<Instance> {
    let doc: Document = serde_json::from_str(text).map_err(json_error)?;
    let items: Vec<Item> = doc
        .items
        .into_iter()
        .map(|i| Item {
            id: i.id,
            inventory: i.inventory,
        })
        .collect();
    let item_pos = |name: &str, product: &str| {
        items.iter().position(|i| i.id == name).ok_or_else(|| {
            Error::schema(
                "products.items",
                format!("product `{product}` references unknown item `{name}`"),
            )
        })
    };
    let mut products = Vec::with_capacity(doc.products.len());
    for p in &doc.products {
        let idx = p
            .items
            .iter()
            .map(|name| item_pos(name, &p.id))
            .collect::<Result<Vec<_>>>()?;
        products.push(Product {
            id: p.id.clone(),
            items: idx,
            reward: p.reward,
            active_prob: p.active_prob,
            batch: p.batch,
        });
    }
    let mut batches = Vec::with_capacity(doc.batches.len());
    for (t, names) in doc.batches.iter().enumerate() {
        let b = names
            .iter()
            .map(|name| {
                doc.products
                    .iter()
                    .position(|p| &p.id == name)
                    .ok_or_else(|| {
                        Error::schema(
                            "batches",
                            format!("batch {t} names unknown product `{name}`"),
                        )
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        batches.push(b);
    }
    Instance::from_parts(doc.l, items, products, batches)
}

pub fn save_instance(instance: &Instance) -> String {
    let items = instance.items();
    let doc = Document {
        l: instance.l(),
        items: items
            .iter()
            .map(|i| ItemDoc {
                id: i.id.clone(),
                inventory: i.inventory,
            })
            .collect(),
        products: instance
            .products()
            .iter()
            .map(|p| ProductDoc {
                id: p.id.clone(),
                items: p.items.iter().map(|&i| items[i].id.clone()).collect(),
                reward: p.reward,
                active_prob: p.active_prob,
                batch: p.batch,
            })
            .collect(),
        batches: instance
            .batches()
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&j| instance.products()[j].id.clone())
                    .collect()
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("instance serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
  "L": 2,
  "items": [{"id": "1", "inventory": 1}, {"id": "2", "inventory": 1}],
  "products": [{"id": "a", "items": ["1", "2"], "reward": 1.5, "active_prob": 0.25, "batch": 0}],
  "batches": [["a"]]
}"#;

    #[test]
    fn loads_minimal_document() {
        let inst = load_instance(DOC).unwrap();
        assert_eq!(inst.l(), 2);
        assert_eq!(inst.products()[0].items, vec![0, 1]);
        assert_eq!(load_instance(&save_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn save_is_canonical() {
        let inst = load_instance(DOC).unwrap();
        let text = save_instance(&inst);
        assert_eq!(save_instance(&load_instance(&text).unwrap()), text);
    }

    #[test]
    fn missing_batches_names_field() {
        let doc = r#"{"L": 1, "items": [], "products": []}"#;
        match load_instance(doc).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "batches"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn out_of_range_probability_is_schema_error() {
        let doc = DOC.replace("0.25", "1.2");
        let err = load_instance(&doc).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
        assert!(
            err.to_string().contains("active_prob out of range"),
            "{err}"
        );
    }

    #[test]
    fn syntax_error_reports_line() {
        let doc = "{\n  \"L\": 2,\n  \"items\": [,]\n}";
        match load_instance(doc).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_item_reference_is_rejected() {
        let doc = DOC.replace(r#"["1", "2"]"#, r#"["1", "9"]"#);
        assert!(load_instance(&doc).unwrap_err().to_string().contains("`9`"));
    }
}
