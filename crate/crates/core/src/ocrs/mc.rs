//! Monte Carlo variant: feasibility probabilities are estimated batch by
//! batch from fresh simulations of the already-frozen prefix policy.

use rand::Rng as _;
use rayon::prelude::*;

use super::{sample_batch, AcceptanceProfile, Mode, OcrsPolicy, ProfileEntry};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rng::{self, Tag, CHUNK};
use crate::stats::Proportion;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub eps: f64,
    /// Trials per batch (K).
    pub trials: u64,
    pub seed: u64,
}

impl MonteCarloConfig {
    /// Uses the trial count from [`mc_trials`].
    pub fn for_instance(instance: &Instance, eps: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            eps,
            trials: mc_trials(
                instance.l(),
                instance.num_batches(),
                instance.items().len(),
                eps,
            )?,
            seed,
        })
    }
}

/// `K = ⌈3(1+L)/ε² · ln(2TM/ε)⌉` (natural logarithm), at least 1.
pub fn mc_trials(l: usize, t: usize, m: usize, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps", "must lie in (0, 1)"));
    }
    let arg = 2.0 * t as f64 * m as f64 / eps;
    let k = 3.0 * (1.0 + l as f64) / (eps * eps) * arg.ln().max(0.0);
    Ok((k.ceil() as u64).max(1))
}

/// Runs the estimation with the default trial count and `α = (1−ε)/(1+L)`.
pub fn simulate_ocrs_mc(
    instance: &Instance,
    eps: f64,
    seed: u64,
) -> Result<(OcrsPolicy, AcceptanceProfile)> {
    let cfg = MonteCarloConfig::for_instance(instance, eps, seed)?;
    simulate_ocrs_mc_with(instance, &cfg)
}

/// Returns the frozen policy and a plug-in profile: `feas_prob` is the
/// estimate `ℙ̂(F_j)` with its Wilson interval and `ratio` is
/// `ℙ̂(F_j)·a_j`, the selectability the policy would have if the estimates
/// were exact.
pub fn simulate_ocrs_mc_with(
    instance: &Instance,
    cfg: &MonteCarloConfig,
) -> Result<(OcrsPolicy, AcceptanceProfile)> {
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Error::invalid("eps", "must lie in (0, 1)"));
    }
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", "must be positive"));
    }
    if !instance.has_unit_inventories() {
        return Err(Error::pre("Monte Carlo OCRS needs unit inventories"));
    }
    let alpha = (1.0 - cfg.eps) / (1.0 + instance.l() as f64);
    let n = instance.products().len();
    let mut policy = OcrsPolicy {
        alpha,
        feas_probs: vec![1.0; n],
        mode: Mode::MonteCarlo,
    };
    let mut counts = vec![0u64; n];
    for t in 0..instance.num_batches() {
        let batch = &instance.batches()[t];
        let chunk_counts: Vec<Vec<u64>> = (0..cfg.trials.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut rng = rng::stream(cfg.seed, Tag::Ocrs, &[t as u64, c]);
                let mut local = vec![0u64; batch.len()];
                let mut avail = vec![true; instance.items().len()];
                for _ in 0..CHUNK.min(cfg.trials - c * CHUNK) {
                    avail.iter_mut().for_each(|a| *a = true);
                    for s in 0..t {
                        if let Some(j) = sample_batch(instance, s, &mut rng) {
                            let items = &instance.products()[j].items;
                            if items.iter().all(|&i| avail[i])
                                && rng.random::<f64>() < policy.accept_prob(j)
                            {
                                items.iter().for_each(|&i| avail[i] = false);
                            }
                        }
                    }
                    for (k, &j) in batch.iter().enumerate() {
                        local[k] += instance.products()[j].items.iter().all(|&i| avail[i]) as u64;
                    }
                }
                local
            })
            .collect();
        for (k, &j) in batch.iter().enumerate() {
            counts[j] = chunk_counts.iter().map(|c| c[k]).sum();
            policy.feas_probs[j] = counts[j] as f64 / cfg.trials as f64;
        }
    }
    let entries = instance
        .products()
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let prop = Proportion::new(counts[j], cfg.trials);
            let a = policy.accept_prob(j);
            let f = policy.feas_probs[j];
            let ci = prop.wilson95();
            ProfileEntry {
                id: p.id.clone(),
                x: p.active_prob,
                feas_prob: f,
                feas_ci: ci,
                accept_prob: p.active_prob * f * a,
                ratio: Some(f * a),
                ratio_ci: ci.map(|(lo, hi)| (lo * a, hi * a)),
                capped: alpha > f,
            }
        })
        .collect();
    Ok((
        policy,
        AcceptanceProfile {
            alpha: Some(alpha),
            entries,
        },
    ))
}
