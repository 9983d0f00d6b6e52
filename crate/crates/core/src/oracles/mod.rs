//! Reference computations: optimal online DP, offline optimum, exhaustive
//! path enumeration and Monte Carlo selectability estimates.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::ocrs::{AcceptanceProfile, OcrsPolicy, ProfileEntry, Realization, CAP_TOL};
use crate::rng::{self, Tag, CHUNK};
use crate::sim::{self, Scheme};
use crate::stats::Z95;

/// Tracked-item limit for the online DP.
pub const DP_ITEM_LIMIT: usize = 22;
/// Active-product limit for the offline optimum.
pub const OFFLINE_LIMIT: usize = 24;
/// Path limit for exhaustive enumeration.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Optimal online value and, per batch, the accept decision for each of the
/// batch's products at each reachable availability state (bitmask of used
/// shared items).
#[derive(Clone, Debug, PartialEq)]
pub struct DpValue {
    pub value: f64,
    pub policy: Vec<BTreeMap<u64, Vec<bool>>>,
}

pub fn optimal_online_dp(instance: &Instance) -> Result<DpValue> {
    let tracker = crate::ocrs::Tracker::new(instance, DP_ITEM_LIMIT)?;
    let t_max = instance.num_batches();
    // forward reachability
    let mut layers: Vec<Vec<u64>> = vec![vec![0]];
    for t in 0..t_max {
        let mut next: Vec<u64> = Vec::new();
        for &s in &layers[t] {
            next.push(s);
            for &j in &instance.batches()[t] {
                let m = tracker.masks[j];
                if s & m == 0 && instance.products()[j].active_prob > 0.0 {
                    next.push(s | m);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        layers.push(next);
    }
    let mut values: BTreeMap<u64, f64> = layers[t_max].iter().map(|&s| (s, 0.0)).collect();
    let mut policy = vec![BTreeMap::new(); t_max];
    for t in (0..t_max).rev() {
        let mut cur = BTreeMap::new();
        for &s in &layers[t] {
            let skip = values[&s];
            let mut v = 0.0;
            let mut stay = 1.0;
            let mut decisions = Vec::with_capacity(instance.batches()[t].len());
            for &j in &instance.batches()[t] {
                let p = &instance.products()[j];
                let m = tracker.masks[j];
                let take = if s & m == 0 {
                    values.get(&(s | m)).map(|w| p.reward + w)
                } else {
                    None
                };
                let accept = matches!(take, Some(w) if w > skip);
                decisions.push(accept);
                v += p.active_prob * if accept { take.unwrap() } else { skip };
                stay -= p.active_prob;
            }
            v += stay.max(0.0) * skip;
            cur.insert(s, v);
            policy[t].insert(s, decisions);
        }
        values = cur;
    }
    Ok(DpValue {
        value: values[&0],
        policy,
    })
}

/// Maximum total reward of a feasible subset of the active products.
pub fn offline_optimum(instance: &Instance, realization: &Realization) -> Result<f64> {
    realization.check(instance)?;
    let mut act: Vec<usize> = realization.active.iter().flatten().copied().collect();
    if act.len() > OFFLINE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            states: 1u128 << act.len(),
            limit: 1u128 << OFFLINE_LIMIT,
        });
    }
    act.sort_by(|&a, &b| {
        instance.products()[b]
            .reward
            .total_cmp(&instance.products()[a].reward)
    });
    let rewards: Vec<f64> = act.iter().map(|&j| instance.products()[j].reward).collect();
    let mut suffix = vec![0.0; act.len() + 1];
    for k in (0..act.len()).rev() {
        suffix[k] = suffix[k + 1] + rewards[k];
    }
    let mut cap: Vec<u32> = instance.items().iter().map(|i| i.inventory).collect();
    let mut best = 0.0;
    branch(
        instance, &act, &rewards, &suffix, 0, 0.0, &mut cap, &mut best,
    );
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn branch(
    inst: &Instance,
    act: &[usize],
    rewards: &[f64],
    suffix: &[f64],
    k: usize,
    cur: f64,
    cap: &mut [u32],
    best: &mut f64,
) {
    if cur > *best {
        *best = cur;
    }
    if k == act.len() || cur + suffix[k] <= *best {
        return;
    }
    let items = &inst.products()[act[k]].items;
    if items.iter().all(|&i| cap[i] > 0) {
        items.iter().for_each(|&i| cap[i] -= 1);
        branch(
            inst,
            act,
            rewards,
            suffix,
            k + 1,
            cur + rewards[k],
            cap,
            best,
        );
        items.iter().for_each(|&i| cap[i] += 1);
    }
    branch(inst, act, rewards, suffix, k + 1, cur, cap, best);
}

/// Mean offline optimum over sampled realizations with a 95% half-width.
pub fn mean_offline_optimum(instance: &Instance, paths: u64, seed: u64) -> Result<(f64, f64)> {
    if paths < 2 {
        return Err(Error::invalid("paths", "needs at least 2 paths"));
    }
    let parts: Vec<Result<(f64, f64)>> = (0..paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, Tag::Offline, &[c]);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..CHUNK.min(paths - c * CHUNK) {
                let v = offline_optimum(instance, &Realization::sample(instance, &mut rng))?;
                s += v;
                s2 += v * v;
            }
            Ok((s, s2))
        })
        .collect();
    let (mut s, mut s2) = (0.0, 0.0);
    for p in parts {
        let (a, b) = p?;
        s += a;
        s2 += b;
    }
    let n = paths as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, Z95 * (var / n).sqrt()))
}

/// Exact profile of `policy` by enumerating every combination of active
/// products and acceptance coins, tracking item usage directly.
pub fn exhaustive_acceptance_probs(
    instance: &Instance,
    policy: &OcrsPolicy,
) -> Result<AcceptanceProfile> {
    if policy.feas_probs.len() != instance.products().len() {
        return Err(Error::Dimension(
            "policy does not cover every product".into(),
        ));
    }
    let size: f64 = instance
        .batches()
        .iter()
        .map(|b| 1.0 + 2.0 * b.len() as f64)
        .product();
    if size > ENUMERATION_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            states: size as u128,
            limit: ENUMERATION_LIMIT as u128,
        });
    }
    let n = instance.products().len();
    let accept: Vec<f64> = (0..n).map(|j| policy.accept_prob(j)).collect();
    let mut feas = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut used = vec![0u32; instance.items().len()];
    enumerate(instance, &accept, 0, 1.0, &mut used, &mut feas, &mut acc);
    let entries = instance
        .products()
        .iter()
        .enumerate()
        .map(|(j, p)| ProfileEntry {
            id: p.id.clone(),
            x: p.active_prob,
            feas_prob: feas[j],
            feas_ci: None,
            accept_prob: acc[j],
            ratio: Some(feas[j] * accept[j]),
            ratio_ci: None,
            capped: policy.alpha - feas[j] > CAP_TOL,
        })
        .collect();
    Ok(AcceptanceProfile {
        alpha: Some(policy.alpha),
        entries,
    })
}

fn enumerate(
    inst: &Instance,
    accept: &[f64],
    t: usize,
    prob: f64,
    used: &mut [u32],
    feas: &mut [f64],
    acc: &mut [f64],
) {
    if t == inst.num_batches() || prob == 0.0 {
        return;
    }
    let batch = &inst.batches()[t];
    let fits = |j: usize, used: &[u32]| {
        inst.products()[j]
            .items
            .iter()
            .all(|&i| used[i] < inst.items()[i].inventory)
    };
    let mut none = 1.0;
    for &j in batch {
        let x = inst.products()[j].active_prob;
        none -= x;
        let ok = fits(j, used);
        if ok {
            feas[j] += prob;
            acc[j] += prob * x * accept[j];
        }
        if x == 0.0 {
            continue;
        }
        if ok && accept[j] > 0.0 {
            inst.products()[j].items.iter().for_each(|&i| used[i] += 1);
            enumerate(inst, accept, t + 1, prob * x * accept[j], used, feas, acc);
            inst.products()[j].items.iter().for_each(|&i| used[i] -= 1);
        }
        let reject = if ok { 1.0 - accept[j] } else { 1.0 };
        enumerate(inst, accept, t + 1, prob * x * reject, used, feas, acc);
    }
    enumerate(inst, accept, t + 1, prob * none.max(0.0), used, feas, acc);
}

/// Per-product `ℙ̂(Z_j | X_j = 1)` with two-sided intervals at normal
/// quantile `z`. Products with `x_j = 0` get no ratio.
pub fn estimate_selectability_z(
    instance: &Instance,
    scheme: &dyn Scheme,
    paths: u64,
    seed: u64,
    z: f64,
) -> Result<AcceptanceProfile> {
    if paths == 0 {
        return Err(Error::invalid("paths", "must be positive"));
    }
    if !std::ptr::eq(instance, scheme.instance()) && instance != scheme.instance() {
        return Err(Error::pre("scheme was built for a different instance"));
    }
    let tally = sim::simulate(scheme, paths, seed, Tag::Estimate);
    Ok(AcceptanceProfile::from_tally(instance, &tally, z))
}

/// [`estimate_selectability_z`] with 95% Wilson intervals.
pub fn estimate_selectability(
    instance: &Instance,
    scheme: &dyn Scheme,
    paths: u64,
    seed: u64,
) -> Result<AcceptanceProfile> {
    estimate_selectability_z(instance, scheme, paths, seed, Z95)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{illustrative_instance, random_order_instance, tightness_instance};
    use crate::lp::fluid_value;
    use crate::model::InstanceBuilder;
    use crate::ocrs::{exact_feasibility_probs, exact_policy, Mode, OcrsScheme};

    #[test]
    fn dp_trivial_cases() {
        assert_eq!(optimal_online_dp(&Instance::empty(2)).unwrap().value, 0.0);
        let mut b = InstanceBuilder::new();
        let t = b.batch();
        b.product("a", &["i"], 1.0, 0.5, t);
        assert!((optimal_online_dp(&b.build(1).unwrap()).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dp_on_tightness_instances() {
        for (l, target) in [(2u64, 1.0 / 3.0), (3, 0.25)] {
            let inst = tightness_instance(l, 0.01).unwrap();
            let ratio = optimal_online_dp(&inst).unwrap().value / fluid_value(&inst).unwrap();
            assert!(
                ratio >= target - 1e-4 && ratio <= target + 0.02,
                "L={l}: {ratio}"
            );
        }
    }

    #[test]
    fn offline_cases() {
        let inst = random_order_instance(2).unwrap();
        assert_eq!(
            offline_optimum(&inst, &Realization::none(&inst)).unwrap(),
            0.0
        );
        let mut b = InstanceBuilder::new();
        let t0 = b.batch();
        let t1 = b.batch();
        b.product("a", &["i"], 1.0, 0.5, t0);
        b.product("b", &["k"], 2.0, 0.5, t1);
        let inst = b.build(1).unwrap();
        let real = Realization {
            active: vec![Some(0), Some(1)],
        };
        assert_eq!(offline_optimum(&inst, &real).unwrap(), 3.0);
    }

    #[test]
    fn enumeration_matches_dp() {
        let inst = illustrative_instance(0.1).unwrap();
        let (pol, prof) = exact_policy(&inst, 1.0 / 3.0).unwrap();
        let en = exhaustive_acceptance_probs(&inst, &pol).unwrap();
        for (a, b) in prof.entries.iter().zip(&en.entries) {
            assert!((a.feas_prob - b.feas_prob).abs() < 1e-12);
            assert!((a.accept_prob - b.accept_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_edge_cases() {
        let mut b = InstanceBuilder::new();
        let t = b.batch();
        b.product("a", &["i"], 1.0, 0.3, t);
        b.product("b", &["k"], 1.0, 0.6, t);
        let inst = b.build(1).unwrap();
        let pol = OcrsPolicy {
            alpha: 0.5,
            feas_probs: vec![1.0, 1.0],
            mode: Mode::Exact,
        };
        let en = exhaustive_acceptance_probs(&inst, &pol).unwrap();
        assert!((en.entries[1].accept_prob - 0.3).abs() < 1e-15);
        let zero = OcrsPolicy { alpha: 0.0, ..pol };
        let en = exhaustive_acceptance_probs(&inst, &zero).unwrap();
        assert!(en.entries.iter().all(|e| e.accept_prob == 0.0));
    }

    #[test]
    fn estimates_contain_alpha() {
        let inst = tightness_instance(2, 0.1).unwrap();
        let (pol, _) = exact_policy(&inst, 1.0 / 3.0).unwrap();
        let scheme = OcrsScheme {
            instance: &inst,
            policy: &pol,
        };
        let prof = estimate_selectability(&inst, &scheme, 50_000, 7).unwrap();
        let again = estimate_selectability(&inst, &scheme, 50_000, 7).unwrap();
        assert_eq!(prof, again);
        for e in &prof.entries {
            let (lo, hi) = e.ratio_ci.unwrap();
            assert!(lo <= 1.0 / 3.0 + 2e-3 && 1.0 / 3.0 - 2e-3 <= hi);
        }
        let zero = inst
            .with_active_probs(&[0.0, 0.45, 0.45, 0.45, 0.05, 0.05])
            .unwrap();
        let prof0 = exact_feasibility_probs(&zero, 1.0 / 3.0).unwrap();
        let pol0 = OcrsPolicy {
            alpha: 1.0 / 3.0,
            feas_probs: prof0.entries.iter().map(|e| e.feas_prob).collect(),
            mode: Mode::Exact,
        };
        let scheme = OcrsScheme {
            instance: &zero,
            policy: &pol0,
        };
        let est = estimate_selectability(&zero, &scheme, 1000, 1).unwrap();
        assert!(est.entries[0].ratio.is_none());
    }
}
