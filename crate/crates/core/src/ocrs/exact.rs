//! Exact feasibility probabilities by dynamic programming over the set of
//! used items. Only items shared by two or more products are tracked: an
//! item used by a single product is always free when that product arrives.

use super::{AcceptanceProfile, Mode, OcrsPolicy, ProfileEntry, CAP_TOL};
use crate::error::{Error, Result};
use crate::model::Instance;

/// Maximum number of tracked (shared) items.
pub const EXACT_ITEM_LIMIT: usize = 22;

pub struct Tracker {
    pub masks: Vec<u64>,
}

impl Tracker {
    pub fn new(instance: &Instance, limit: usize) -> Result<Self> {
        if !instance.has_unit_inventories() {
            return Err(Error::pre("exact computation needs unit inventories"));
        }
        let deg = instance.item_degrees();
        let mut bit = vec![None; deg.len()];
        let mut next = 0u32;
        for (i, &d) in deg.iter().enumerate() {
            if d >= 2 {
                bit[i] = Some(next);
                next += 1;
            }
        }
        if next as usize > limit {
            return Err(Error::StateSpaceTooLarge {
                states: 1u128 << next,
                limit: 1u128 << limit,
            });
        }
        let masks = instance
            .products()
            .iter()
            .map(|p| {
                p.items
                    .iter()
                    .filter_map(|&i| bit[i])
                    .fold(0u64, |m, b| m | (1 << b))
            })
            .collect();
        Ok(Self { masks })
    }
}

/// Forward pass over batches. `decide(j, ℙ(F_j))` returns the acceptance
/// probability used for `j`. Returns `(ℙ(F_j), a_j)` per product.
fn forward(
    instance: &Instance,
    mut decide: impl FnMut(usize, f64) -> f64,
) -> Result<Vec<(f64, f64)>> {
    let tracker = Tracker::new(instance, EXACT_ITEM_LIMIT)?;
    let mut out = vec![(0.0, 0.0); instance.products().len()];
    let mut dist: Vec<(u64, f64)> = vec![(0, 1.0)];
    for batch in instance.batches() {
        for &j in batch {
            let m = tracker.masks[j];
            let f: f64 = dist
                .iter()
                .filter(|(s, _)| s & m == 0)
                .map(|(_, p)| p)
                .sum();
            let f = f.min(1.0);
            out[j] = (f, decide(j, f));
        }
        let mut next = Vec::with_capacity(dist.len() * (batch.len() + 1));
        for &(s, p) in &dist {
            let mut stay = 1.0;
            for &j in batch {
                let m = tracker.masks[j];
                let w = instance.products()[j].active_prob * out[j].1;
                if s & m == 0 && w > 0.0 {
                    stay -= w;
                    next.push((s | m, p * w));
                }
            }
            next.push((s, p * stay));
        }
        next.sort_by_key(|e| e.0);
        dist.clear();
        for (s, p) in next {
            match dist.last_mut() {
                Some(last) if last.0 == s => last.1 += p,
                _ => dist.push((s, p)),
            }
        }
        dist.retain(|e| e.1 != 0.0);
    }
    Ok(out)
}

fn profile(instance: &Instance, alpha: f64, fa: &[(f64, f64)]) -> AcceptanceProfile {
    let entries = instance
        .products()
        .iter()
        .zip(fa)
        .map(|(p, &(f, a))| ProfileEntry {
            id: p.id.clone(),
            x: p.active_prob,
            feas_prob: f,
            feas_ci: None,
            accept_prob: p.active_prob * f * a,
            ratio: Some(f * a),
            ratio_ci: None,
            capped: alpha - f > CAP_TOL,
        })
        .collect();
    AcceptanceProfile {
        alpha: Some(alpha),
        entries,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", "must lie in [0, 1]"));
    }
    Ok(())
}

/// Exact policy with `a_j = min{1, α/ℙ(F_j)}` and its profile.
pub fn exact_policy(instance: &Instance, alpha: f64) -> Result<(OcrsPolicy, AcceptanceProfile)> {
    check_alpha(alpha)?;
    let fa = forward(instance, |_, f| if f <= alpha { 1.0 } else { alpha / f })?;
    let policy = OcrsPolicy {
        alpha,
        feas_probs: fa.iter().map(|e| e.0).collect(),
        mode: Mode::Exact,
    };
    Ok((policy, profile(instance, alpha, &fa)))
}

pub fn exact_feasibility_probs(instance: &Instance, alpha: f64) -> Result<AcceptanceProfile> {
    Ok(exact_policy(instance, alpha)?.1)
}

/// Exact profile of a fixed policy (e.g. one with estimated feasibility
/// probabilities): true `ℙ(F_j)` under the policy's own acceptance rule.
pub fn evaluate_policy_exact(
    instance: &Instance,
    policy: &OcrsPolicy,
) -> Result<AcceptanceProfile> {
    if policy.feas_probs.len() != instance.products().len() {
        return Err(Error::Dimension(
            "policy does not cover every product".into(),
        ));
    }
    let fa = forward(instance, |j, _| policy.accept_prob(j))?;
    Ok(profile(instance, policy.alpha, &fa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{illustrative_instance, tightness_instance};
    use crate::model::{random_instance, InstanceBuilder, RandomInstanceParams};

    #[test]
    fn illustrative_third_batch_feasibility() {
        let inst = illustrative_instance(0.1).unwrap();
        let prof = exact_feasibility_probs(&inst, 1.0 / 3.0).unwrap();
        for e in &prof.entries[4..] {
            assert!(
                (e.feas_prob - (1.0 - 2.0 / 3.0 * 0.9)).abs() < 1e-12,
                "{}",
                e.feas_prob
            );
        }
    }

    #[test]
    fn single_batch_is_trivial() {
        let mut b = InstanceBuilder::new();
        let t = b.batch();
        b.product("a", &["i", "k"], 1.0, 0.3, t);
        b.product("b", &["i"], 1.0, 0.6, t);
        let prof = exact_feasibility_probs(&b.build(2).unwrap(), 0.4).unwrap();
        for e in &prof.entries {
            assert_eq!(e.feas_prob, 1.0);
            assert!((e.ratio.unwrap() - 0.4).abs() < 1e-15);
            assert!((e.accept_prob - 0.4 * e.x).abs() < 1e-15);
        }
    }

    #[test]
    fn tightness_selectability() {
        let inst = tightness_instance(2, 0.1).unwrap();
        let prof = exact_feasibility_probs(&inst, 1.0 / 3.0).unwrap();
        for e in &prof.entries {
            assert!((e.ratio.unwrap() - 1.0 / 3.0).abs() < 1e-12);
            assert!(!e.capped);
        }
    }

    #[test]
    fn union_bound_floor() {
        for seed in 0..40 {
            let inst = random_instance(RandomInstanceParams {
                l: 3,
                num_items: 8,
                num_batches: 5,
                max_batch_size: 3,
                tight: seed % 2 == 0,
                seed,
            })
            .unwrap();
            let alpha = 0.25;
            let prof = exact_feasibility_probs(&inst, alpha).unwrap();
            for e in &prof.entries {
                assert!(e.feas_prob >= 1.0 - 3.0 * alpha - 1e-12);
            }
        }
    }

    #[test]
    fn large_alpha_caps() {
        let inst = tightness_instance(2, 0.1).unwrap();
        let prof = exact_feasibility_probs(&inst, 0.9).unwrap();
        assert!(prof.any_capped());
    }

    #[test]
    fn fixed_policy_evaluation_matches_exact() {
        let inst = tightness_instance(3, 0.05).unwrap();
        let (pol, prof) = exact_policy(&inst, 0.25).unwrap();
        let again = evaluate_policy_exact(&inst, &pol).unwrap();
        for (a, b) in prof.entries.iter().zip(&again.entries) {
            assert!((a.ratio.unwrap() - b.ratio.unwrap()).abs() < 1e-14);
        }
    }
}
