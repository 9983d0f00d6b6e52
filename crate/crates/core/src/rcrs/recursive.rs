//! Recursive standard RCRS: `K` phases, each with feasibility estimates
//! `F̂_j(q) = ℙ(A_j available at y_q | Y_j > y_q)` obtained by simulating the
//! scheme itself over the earlier phases.

use rand::Rng as _;
use rayon::prelude::*;

use super::{ArrivalOrder, SelectionFunction};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::ocrs::{AcceptanceProfile, Realization};
use crate::rng::{self, Rng, Tag, CHUNK};
use crate::sim::{self, PathRecord, Scheme, Tally};
use crate::stats::Z95;

pub struct RecursiveRcrs<'a> {
    instance: &'a Instance,
    sf: &'a SelectionFunction,
    k: usize,
    /// `f_hat[q][j]`.
    f_hat: Vec<Vec<f64>>,
}

impl<'a> RecursiveRcrs<'a> {
    /// Validates the input and estimates every `F̂_j(q)` with `sub_trials`
    /// simulations per (phase, product).
    pub fn new(
        instance: &'a Instance,
        sf: &'a SelectionFunction,
        k: usize,
        sub_trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if !instance.is_standard() {
            return Err(Error::pre("recursive RCRS needs singleton batches"));
        }
        if !instance.has_unit_inventories() {
            return Err(Error::pre("recursive RCRS needs unit inventories"));
        }
        if sf.l < instance.l() {
            return Err(Error::pre("selection function solved for a smaller L"));
        }
        let need = 2.0 * instance.l() as f64 / sf.c_one();
        if (k as f64) < need {
            return Err(Error::invalid(
                "K",
                format!("must be at least 2L/c(1) = {need:.3}"),
            ));
        }
        if sub_trials == 0 {
            return Err(Error::invalid("sub_trials", "must be positive"));
        }
        let n = instance.products().len();
        let mut scheme = Self {
            instance,
            sf,
            k,
            f_hat: vec![vec![1.0; n]],
        };
        for q in 1..k {
            let row: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|j| scheme.estimate(q, j, sub_trials, seed))
                .collect();
            scheme.f_hat.push(row);
        }
        Ok(scheme)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn f_hat(&self) -> &[Vec<f64>] {
        &self.f_hat
    }

    fn phase(&self, y: f64) -> usize {
        ((y * self.k as f64) as usize).min(self.k - 1)
    }

    fn coin_prob(&self, j: usize, y: f64) -> f64 {
        let f = self.f_hat[self.phase(y)][j];
        if f <= 0.0 {
            1.0
        } else {
            (self.sf.c_at(y) / f).min(1.0)
        }
    }

    /// Fraction of runs over phases `< q`, with `j` held back, in which all
    /// items of `j` are still free at `y_q`.
    fn estimate(&self, q: usize, j: usize, trials: u64, seed: u64) -> f64 {
        let inst = self.instance;
        let yq = q as f64 / self.k as f64;
        let n = inst.products().len();
        let hits: u64 = (0..trials.div_ceil(CHUNK))
            .map(|c| {
                let mut rng = rng::stream(seed, Tag::RcrsSub, &[q as u64, j as u64, c]);
                let mut avail = vec![true; inst.items().len()];
                let mut arrivals: Vec<(f64, usize, bool, f64)> = Vec::with_capacity(n);
                let mut hits = 0;
                for _ in 0..CHUNK.min(trials - c * CHUNK) {
                    avail.iter_mut().for_each(|a| *a = true);
                    arrivals.clear();
                    for (k, p) in inst.products().iter().enumerate() {
                        let y: f64 = rng.random();
                        let active = rng.random::<f64>() < p.active_prob;
                        let u: f64 = rng.random();
                        if k != j && y < yq && active {
                            arrivals.push((y, k, active, u));
                        }
                    }
                    arrivals.sort_by(|a, b| a.0.total_cmp(&b.0));
                    for &(y, k, _, u) in &arrivals {
                        let items = &inst.products()[k].items;
                        if u < self.coin_prob(k, y) && items.iter().all(|&i| avail[i]) {
                            items.iter().for_each(|&i| avail[i] = false);
                        }
                    }
                    hits += inst.products()[j].items.iter().all(|&i| avail[i]) as u64;
                }
                hits
            })
            .sum();
        hits as f64 / trials as f64
    }

    /// One pass on a given realization and arrival order.
    pub fn run_realized(
        &self,
        realization: &Realization,
        arrival: &ArrivalOrder,
        rng: &mut Rng,
    ) -> Result<Vec<usize>> {
        let inst = self.instance;
        realization.check(inst)?;
        if arrival.times.len() != inst.num_batches() {
            return Err(Error::pre("arrival order does not match the batch count"));
        }
        let mut avail = vec![true; inst.items().len()];
        let mut accepted = Vec::new();
        for t in arrival.order() {
            if let Some(j) = realization.active[t] {
                let items = &inst.products()[j].items;
                let y = arrival.times[t];
                if rng.random::<f64>() < self.coin_prob(j, y) && items.iter().all(|&i| avail[i]) {
                    items.iter().for_each(|&i| avail[i] = false);
                    accepted.push(j);
                }
            }
        }
        Ok(accepted)
    }
}

impl Scheme for RecursiveRcrs<'_> {
    fn instance(&self) -> &Instance {
        self.instance
    }

    fn run_path(&self, rng: &mut Rng, rec: &mut PathRecord) {
        let inst = self.instance;
        let n = inst.products().len();
        let mut arrivals: Vec<(f64, usize, bool, f64)> = (0..n)
            .map(|j| {
                let y: f64 = rng.random();
                let active = rng.random::<f64>() < inst.products()[j].active_prob;
                (y, j, active, rng.random())
            })
            .collect();
        arrivals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut avail = vec![true; inst.items().len()];
        for (y, j, active, u) in arrivals {
            let p = &inst.products()[j];
            let feasible = p.items.iter().all(|&i| avail[i]);
            let coin = u < self.coin_prob(j, y);
            rec.feasible[j] = feasible;
            rec.would_accept[j] = feasible && coin;
            rec.active[j] = active;
            if active && feasible && coin {
                p.items.iter().for_each(|&i| avail[i] = false);
                rec.accepted.push(j);
                rec.reward += p.reward;
            }
        }
    }
}

pub struct RecursiveRun {
    pub f_hat: Vec<Vec<f64>>,
    pub tally: Tally,
    pub profile: AcceptanceProfile,
}

/// Builds the scheme and estimates `ℙ(Z_j | X_j = 1)` over `paths` paths.
pub fn run_recursive_standard_rcrs(
    instance: &Instance,
    sf: &SelectionFunction,
    k: usize,
    sub_trials: u64,
    paths: u64,
    seed: u64,
) -> Result<RecursiveRun> {
    let scheme = RecursiveRcrs::new(instance, sf, k, sub_trials, seed)?;
    let tally = sim::simulate(&scheme, paths, seed, Tag::Rcrs);
    let profile = AcceptanceProfile::from_tally(instance, &tally, Z95);
    Ok(RecursiveRun {
        f_hat: scheme.f_hat,
        tally,
        profile,
    })
}
