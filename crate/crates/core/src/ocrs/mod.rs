//! Exact-selection random-element OCRS.
//!
//! An active product that is still feasible at its turn is accepted with
//! probability `min{1, α/ℙ(F_j)}`, which makes `ℙ(Z_j | X_j = 1) = α` whenever
//! the feasibility probabilities are exact and at least α.

mod exact;
mod mc;

pub use exact::{
    evaluate_policy_exact, exact_feasibility_probs, exact_policy, Tracker, EXACT_ITEM_LIMIT,
};
pub use mc::{mc_trials, simulate_ocrs_mc, simulate_ocrs_mc_with, MonteCarloConfig};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rng::{Rng, Tag};
use crate::sim::{PathRecord, Scheme};
use crate::stats::Proportion;

/// Gap above which `α > ℙ(F_j)` counts as the cap engaging.
pub const CAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OcrsPolicy {
    pub alpha: f64,
    pub feas_probs: Vec<f64>,
    pub mode: Mode,
}

impl OcrsPolicy {
    /// Probability of accepting product `j` when it is active and feasible.
    pub fn accept_prob(&self, j: usize) -> f64 {
        let f = self.feas_probs[j];
        match self.mode {
            Mode::Exact => {
                if f <= self.alpha {
                    1.0
                } else {
                    self.alpha / f
                }
            }
            // Estimates below α are treated as noise and cap at 1.
            Mode::MonteCarlo => (self.alpha / f.max(self.alpha)).min(1.0),
        }
    }
}

/// The active product of each batch, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub active: Vec<Option<usize>>,
}

impl Realization {
    pub fn none(instance: &Instance) -> Self {
        Self {
            active: vec![None; instance.num_batches()],
        }
    }

    /// Draws at most one active product per batch with probabilities `x_j`.
    pub fn sample(instance: &Instance, rng: &mut Rng) -> Self {
        Self {
            active: (0..instance.num_batches())
                .map(|t| sample_batch(instance, t, rng))
                .collect(),
        }
    }

    pub fn check(&self, instance: &Instance) -> Result<()> {
        if self.active.len() != instance.num_batches() {
            return Err(Error::pre(format!(
                "realization has {} batches, instance has {}",
                self.active.len(),
                instance.num_batches()
            )));
        }
        for (t, a) in self.active.iter().enumerate() {
            if let Some(j) = *a {
                if instance.products().get(j).map(|p| p.batch) != Some(t) {
                    return Err(Error::pre(format!(
                        "active product #{j} is not in batch {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn sample_batch(instance: &Instance, t: usize, rng: &mut Rng) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &j in &instance.batches()[t] {
        acc += instance.products()[j].active_prob;
        if u < acc {
            return Some(j);
        }
    }
    None
}

/// Per-product selectability figures.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileEntry {
    pub id: String,
    pub x: f64,
    /// `ℙ(F_j)`: all items of `j` available at its batch.
    pub feas_prob: f64,
    pub feas_ci: Option<(f64, f64)>,
    /// Unconditional `ℙ(Z_j)`.
    pub accept_prob: f64,
    /// `ℙ(Z_j | X_j = 1)`; `None` for products with `x_j = 0` in estimated profiles.
    pub ratio: Option<f64>,
    pub ratio_ci: Option<(f64, f64)>,
    /// The `min{1, ·}` in the acceptance rule engaged.
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcceptanceProfile {
    pub alpha: Option<f64>,
    pub entries: Vec<ProfileEntry>,
}

impl AcceptanceProfile {
    pub fn min_ratio(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.ratio)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn any_capped(&self) -> bool {
        self.entries.iter().any(|e| e.capped)
    }

    /// Builds an estimated profile from path tallies with Wilson intervals.
    pub fn from_tally(instance: &Instance, tally: &crate::sim::Tally, z: f64) -> Self {
        let entries = instance
            .products()
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let feas = Proportion::new(tally.feasible[j], tally.paths);
                let would = Proportion::new(tally.would_accept[j], tally.paths);
                let has_mass = p.active_prob > 0.0;
                ProfileEntry {
                    id: p.id.clone(),
                    x: p.active_prob,
                    feas_prob: feas.estimate().unwrap_or(f64::NAN),
                    feas_ci: feas.wilson(z),
                    accept_prob: tally.accepted[j] as f64 / tally.paths.max(1) as f64,
                    ratio: if has_mass { would.estimate() } else { None },
                    ratio_ci: if has_mass { would.wilson(z) } else { None },
                    capped: false,
                }
            })
            .collect();
        Self {
            alpha: None,
            entries,
        }
    }
}

/// Runs the OCRS on one realization; returns accepted product indices in
/// batch order.
pub fn run_ocrs(
    instance: &Instance,
    policy: &OcrsPolicy,
    realization: &Realization,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    realization.check(instance)?;
    if policy.feas_probs.len() != instance.products().len() {
        return Err(Error::Dimension(
            "policy does not cover every product".into(),
        ));
    }
    let mut avail = vec![true; instance.items().len()];
    let mut accepted = Vec::new();
    for &a in &realization.active {
        if let Some(j) = a {
            let items = &instance.products()[j].items;
            if items.iter().all(|&i| avail[i]) && rng.random::<f64>() < policy.accept_prob(j) {
                items.iter().for_each(|&i| avail[i] = false);
                accepted.push(j);
            }
        }
    }
    Ok(accepted)
}

/// Path-level runner used for Monte Carlo estimation.
pub struct OcrsScheme<'a> {
    pub instance: &'a Instance,
    pub policy: &'a OcrsPolicy,
}

impl Scheme for OcrsScheme<'_> {
    fn instance(&self) -> &Instance {
        self.instance
    }

    fn run_path(&self, rng: &mut Rng, rec: &mut PathRecord) {
        let inst = self.instance;
        let mut avail = vec![true; inst.items().len()];
        for t in 0..inst.num_batches() {
            let active = sample_batch(inst, t, rng);
            let mut take = None;
            for &j in &inst.batches()[t] {
                let p = &inst.products()[j];
                let feasible = p.items.iter().all(|&i| avail[i]);
                let coin = rng.random::<f64>() < self.policy.accept_prob(j);
                rec.feasible[j] = feasible;
                rec.would_accept[j] = feasible && coin;
                if active == Some(j) {
                    rec.active[j] = true;
                    if feasible && coin {
                        take = Some(j);
                    }
                }
            }
            if let Some(j) = take {
                let p = &inst.products()[j];
                p.items.iter().for_each(|&i| avail[i] = false);
                rec.accepted.push(j);
                rec.reward += p.reward;
            }
        }
    }
}

/// Monte Carlo estimate of `ℙ(Z_j ∩ Z_j')` over full sample paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEstimate {
    pub estimate: f64,
    pub half_width: f64,
}

pub fn pair_acceptance_probe(
    instance: &Instance,
    policy: &OcrsPolicy,
    j: usize,
    j2: usize,
    trials: u64,
    seed: u64,
) -> Result<PairEstimate> {
    let n = instance.products().len();
    if j >= n || j2 >= n {
        return Err(Error::pre("product index out of range"));
    }
    if instance.products()[j].batch == instance.products()[j2].batch {
        return Err(Error::pre("pair must come from distinct batches"));
    }
    if instance.shares_item(j, j2) {
        return Err(Error::pre("pair must be item-disjoint"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be positive"));
    }
    let scheme = OcrsScheme { instance, policy };
    let both = crate::sim::count_paths(&scheme, trials, seed, Tag::Probe, |rec| {
        rec.accepted.contains(&j) && rec.accepted.contains(&j2)
    });
    let prop = Proportion::new(both, trials);
    let est = prop.estimate().unwrap_or(0.0);
    let (lo, hi) = prop.wilson95().unwrap_or((0.0, 1.0));
    Ok(PairEstimate {
        estimate: est,
        half_width: (est - lo).max(hi - est),
    })
}

/// `α = 1/(1+L)`.
pub fn baseline_alpha(l: usize) -> f64 {
    1.0 / (1.0 + l as f64)
}
