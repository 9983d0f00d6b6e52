//! Online wrapper: OCRS bits decide which products may sell, and a
//! scaled-down mixture of the LP actions sells each allowed copy with its
//! reduced probability.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;

use super::{scale_down, RecourseMixture, RecourseOracle, ReductionOutput, SubstitutableSystem};
use crate::error::{Error, Result};
use crate::ocrs::OcrsPolicy;
use crate::rng::{self, Rng, Tag, CHUNK};
use crate::stats::Z95;

pub struct OnlineContext<'a> {
    pub system: &'a SubstitutableSystem,
    pub reduction: &'a ReductionOutput,
    pub policy: &'a OcrsPolicy,
    pub oracle: &'a dyn RecourseOracle,
}

impl OnlineContext<'_> {
    fn check(&self) -> Result<()> {
        let red = self.reduction;
        if red.instance.num_batches() != self.system.periods()
            || red.action_weights.len() != self.system.periods()
        {
            return Err(Error::pre("reduction does not match the system's periods"));
        }
        if self.policy.feas_probs.len() != red.instance.products().len() {
            return Err(Error::pre(
                "OCRS policy was not built on the reduced instance",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathOutcome {
    pub reward: f64,
    /// Sold copies (indices into the reduced instance).
    pub sold: Vec<usize>,
}

type Memo = HashMap<(usize, usize, Vec<bool>), RecourseMixture>;

fn pick(rng: &mut Rng, weights: impl Iterator<Item = f64>) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.enumerate() {
        acc += w;
        if u < acc {
            return Some(k);
        }
    }
    None
}

/// One sample path. `memo` caches scale-down mixtures by
/// (period, action, forbidden set).
pub fn run_online_path(
    ctx: &OnlineContext,
    rng: &mut Rng,
    memo: &mut HashMap<(usize, usize, Vec<bool>), RecourseMixture>,
) -> Result<PathOutcome> {
    let sys = ctx.system;
    let red = ctx.reduction;
    let inst = &red.instance;
    let mut used = vec![false; inst.items().len()];
    let mut inventory: Vec<u32> = sys.items.iter().map(|&(_, k)| k).collect();
    let mut out = PathOutcome {
        reward: 0.0,
        sold: Vec::new(),
    };
    for t in 0..sys.periods() {
        let batch = &inst.batches()[t];
        let bits: Vec<bool> = batch
            .iter()
            .map(|&c| {
                let coin: f64 = rng.random();
                inst.products()[c].items.iter().all(|&u| !used[u])
                    && coin < ctx.policy.accept_prob(c)
            })
            .collect();
        // one representative copy per original product, drawn w.p. x_c / x_j
        let mut rep: Vec<Option<usize>> = vec![None; sys.products.len()];
        let mut forbidden = vec![true; sys.products.len()];
        let mut k = 0;
        while k < batch.len() {
            let j = red.mapping[batch[k]].product;
            let end = k + batch[k..]
                .iter()
                .take_while(|&&c| red.mapping[c].product == j)
                .count();
            let xs = batch[k..end]
                .iter()
                .map(|&c| inst.products()[c].active_prob);
            let total: f64 = xs.clone().sum();
            let chosen = pick(rng, xs.map(|x| x / total)).unwrap_or(end - k - 1) + k;
            rep[j] = Some(batch[chosen]);
            forbidden[j] = !bits[chosen];
            k = end;
        }
        let weights = &red.action_weights[t];
        let Some(s) = pick(rng, weights.iter().copied()) else {
            continue;
        };
        let key = (t, s, forbidden);
        if !memo.contains_key(&key) {
            let mix = scale_down(sys, t, &sys.actions[t][s], &key.2, ctx.oracle)?;
            memo.insert(key.clone(), mix);
        }
        let mix = &memo[&key];
        let Some(e) = pick(rng, mix.entries.iter().map(|e| e.weight)) else {
            continue;
        };
        let action = &mix.entries[e].action;
        let Some(p) = pick(rng, action.phi.iter().map(|&(_, p)| p)) else {
            continue;
        };
        let j = action.phi[p].0;
        let copy = rep[j].ok_or_else(|| {
            Error::pre(format!(
                "sold product `{}` has no copy in period {t}",
                sys.products[j].id
            ))
        })?;
        for &u in &inst.products()[copy].items {
            let orig = red.unit_item[u];
            if used[u] || inventory[orig] == 0 {
                return Err(Error::InventoryUnderflow(sys.items[orig].0.clone()));
            }
            used[u] = true;
            inventory[orig] -= 1;
        }
        out.reward += sys.products[j].reward;
        out.sold.push(copy);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineReport {
    pub paths: u64,
    pub mean_reward: f64,
    pub reward_half_width: f64,
    /// Sales per reduced-instance copy.
    pub copy_sales: Vec<u64>,
    pub lp_value: f64,
}

/// Simulates `paths` independent runs on chunked streams.
pub fn online_algorithm(ctx: &OnlineContext, paths: u64, seed: u64) -> Result<OnlineReport> {
    ctx.check()?;
    if paths < 2 {
        return Err(Error::invalid("paths", "needs at least 2 paths"));
    }
    let n = ctx.reduction.instance.products().len();
    let parts: Vec<Result<(f64, f64, Vec<u64>)>> = (0..paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, Tag::Online, &[c]);
            let mut memo: Memo = HashMap::new();
            let (mut s, mut s2, mut sales) = (0.0, 0.0, vec![0u64; n]);
            for _ in 0..CHUNK.min(paths - c * CHUNK) {
                let o = run_online_path(ctx, &mut rng, &mut memo)?;
                s += o.reward;
                s2 += o.reward * o.reward;
                o.sold.iter().for_each(|&k| sales[k] += 1);
            }
            Ok((s, s2, sales))
        })
        .collect();
    let (mut s, mut s2, mut sales) = (0.0, 0.0, vec![0u64; n]);
    for part in parts {
        let (a, b, c) = part?;
        s += a;
        s2 += b;
        sales.iter_mut().zip(c).for_each(|(x, y)| *x += y);
    }
    let m = paths as f64;
    let mean = s / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(OnlineReport {
        paths,
        mean_reward: mean,
        reward_half_width: Z95 * (var / m).sqrt(),
        copy_sales: sales,
        lp_value: ctx.reduction.lp_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tightness_instance;
    use crate::ocrs::exact_policy;
    use crate::reduction::{
        build_relaxation_lp, nrm_from_instance, preprocess, RemapOracle, TableOracle,
    };

    fn run(
        sys: &SubstitutableSystem,
        alpha: f64,
        paths: u64,
        oracle: &dyn RecourseOracle,
    ) -> (OnlineReport, ReductionOutput) {
        let lp = build_relaxation_lp(sys).solve().unwrap();
        let red = preprocess(sys, &lp).unwrap();
        let (policy, _) = exact_policy(&red.instance, alpha).unwrap();
        let ctx = OnlineContext {
            system: sys,
            reduction: &red,
            policy: &policy,
            oracle,
        };
        (online_algorithm(&ctx, paths, 11).unwrap(), red)
    }

    #[test]
    fn single_product() {
        let mut b = crate::model::InstanceBuilder::new();
        let t = b.batch();
        b.product("p", &["i"], 2.0, 0.5, t);
        let sys = nrm_from_instance(&b.build(1).unwrap()).unwrap();
        let (rep, _) = run(&sys, 0.5, 200_000, &TableOracle);
        assert!(
            (rep.mean_reward - 0.5).abs() < rep.reward_half_width + 1e-3,
            "{rep:?}"
        );
    }

    #[test]
    fn nrm_tightness_reaches_alpha_lp() {
        let inst = tightness_instance(2, 0.1).unwrap();
        let sys = nrm_from_instance(&inst).unwrap();
        let (rep, red) = run(&sys, 1.0 / 3.0, 100_000, &RemapOracle);
        assert!(
            rep.mean_reward >= rep.lp_value / 3.0 - rep.reward_half_width,
            "{rep:?}"
        );
        let again = run(&sys, 1.0 / 3.0, 100_000, &RemapOracle).0;
        assert_eq!(rep, again);
        for (c, &n) in rep.copy_sales.iter().enumerate() {
            let target = red.instance.products()[c].active_prob / 3.0;
            let (lo, hi) = crate::stats::Proportion::new(n, rep.paths)
                .wilson(4.0)
                .unwrap();
            assert!(lo <= target && target <= hi, "copy {c}: {n} vs {target}");
        }
    }
}
