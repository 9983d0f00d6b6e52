use serde::Serialize;

use super::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `Σ_{j∈N_t} x_j ≤ 1`
    BatchMass,
    /// `Σ_{j: i∈A_j} x_j ≤ k_i`
    ItemLoad,
    /// `|A_j| ≤ L`
    BundleSize,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::BatchMass => "batch_mass",
            Constraint::ItemLoad => "item_load",
            Constraint::BundleSize => "bundle_size",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub id: String,
    /// Amount by which the constraint is exceeded.
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks batch masses, item loads and bundle sizes to within additive `tol`.
pub fn validate(instance: &Instance, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    for (t, _) in instance.batches().iter().enumerate() {
        let excess = instance.batch_mass(t) - 1.0;
        if excess > tol {
            violations.push(Violation {
                constraint: Constraint::BatchMass,
                id: format!("batch{t}"),
                magnitude: excess,
            });
        }
    }
    for (item, load) in instance.items().iter().zip(instance.item_loads()) {
        let excess = load - f64::from(item.inventory);
        if excess > tol {
            violations.push(Violation {
                constraint: Constraint::ItemLoad,
                id: item.id.clone(),
                magnitude: excess,
            });
        }
    }
    for p in instance.products() {
        if p.items.len() > instance.l() {
            violations.push(Violation {
                constraint: Constraint::BundleSize,
                id: p.id.clone(),
                magnitude: (p.items.len() - instance.l()) as f64,
            });
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}
