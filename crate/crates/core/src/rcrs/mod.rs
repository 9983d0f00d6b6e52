//! Random-order schemes: greedy, attenuate-greedy (random-element) and the
//! recursive standard scheme driven by a selection function.

mod recursive;
mod selection;

pub use recursive::{run_recursive_standard_rcrs, RecursiveRcrs, RecursiveRun};
pub use selection::{solve_selection_function, SelectionFunction, RESIDUAL_TOL};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{Instance, InstanceBuilder};
use crate::ocrs::{sample_batch, Realization};
use crate::rng::Rng;
use crate::sim::{PathRecord, Scheme};

/// Independent uniform arrival times, one per batch.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalOrder {
    pub times: Vec<f64>,
}

impl ArrivalOrder {
    /// Draws arrival times, redrawing the whole vector on a tie.
    pub fn sample(num_batches: usize, rng: &mut Rng) -> Self {
        loop {
            let times: Vec<f64> = (0..num_batches).map(|_| rng.random()).collect();
            let order = Self { times };
            let o = order.order();
            if o.windows(2).all(|w| order.times[w[0]] < order.times[w[1]]) {
                return order;
            }
        }
    }

    /// Batch indices by increasing arrival time.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.times.len()).collect();
        idx.sort_by(|&a, &b| self.times[a].total_cmp(&self.times[b]));
        idx
    }
}

/// `b(x) = (L−x)(1−e^{−L}) / (L(1−e^{−(L−x)}))`.
pub fn attenuation_b(l: usize, x: f64) -> Result<f64> {
    if l < 2 {
        return Err(Error::invalid("L", "attenuation needs L >= 2"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x", "must lie in [0, 1]"));
    }
    Ok(b_unchecked(l as f64, x))
}

fn b_unchecked(l: f64, x: f64) -> f64 {
    (l - x) * (-(-l).exp_m1()) / (l * (-(-(l - x)).exp_m1()))
}

/// `x_{t,j}`: mass of the products in `j`'s batch that share an item with `j`
/// (including `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct AttenuationContext {
    pub l: usize,
    pub x_batch: Vec<f64>,
}

impl AttenuationContext {
    pub fn new(instance: &Instance) -> Self {
        let mut x_batch = vec![0.0; instance.products().len()];
        for batch in instance.batches() {
            for &j in batch {
                x_batch[j] = batch
                    .iter()
                    .filter(|&&k| k == j || instance.shares_item(j, k))
                    .map(|&k| instance.products()[k].active_prob)
                    .sum::<f64>()
                    .min(1.0);
            }
        }
        Self {
            l: instance.l(),
            x_batch,
        }
    }

    pub fn retain_prob(&self, j: usize) -> f64 {
        b_unchecked(self.l as f64, self.x_batch[j])
    }
}

fn require_unit(instance: &Instance) -> Result<()> {
    if !instance.has_unit_inventories() {
        return Err(Error::pre("random-order schemes need unit inventories"));
    }
    Ok(())
}

/// Attenuate-greedy scheme: an active product survives with probability
/// `b(x_{t,j})` and is accepted if it survives and is feasible.
pub struct AttenuateGreedy<'a> {
    instance: &'a Instance,
    ctx: AttenuationContext,
}

impl<'a> AttenuateGreedy<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self> {
        require_unit(instance)?;
        if instance.l() < 2 {
            return Err(Error::invalid("L", "attenuation needs L >= 2"));
        }
        Ok(Self {
            instance,
            ctx: AttenuationContext::new(instance),
        })
    }

    pub fn context(&self) -> &AttenuationContext {
        &self.ctx
    }
}

impl Scheme for AttenuateGreedy<'_> {
    fn instance(&self) -> &Instance {
        self.instance
    }

    fn run_path(&self, rng: &mut Rng, rec: &mut PathRecord) {
        let inst = self.instance;
        let arrival = ArrivalOrder::sample(inst.num_batches(), rng);
        let mut avail = vec![true; inst.items().len()];
        for t in arrival.order() {
            let active = sample_batch(inst, t, rng);
            let mut take = None;
            for &j in &inst.batches()[t] {
                let feasible = inst.products()[j].items.iter().all(|&i| avail[i]);
                let coin = rng.random::<f64>() < self.ctx.retain_prob(j);
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
                accept(inst, j, &mut avail, rec);
            }
        }
    }
}

fn accept(inst: &Instance, j: usize, avail: &mut [bool], rec: &mut PathRecord) {
    let p = &inst.products()[j];
    p.items.iter().for_each(|&i| avail[i] = false);
    rec.accepted.push(j);
    rec.reward += p.reward;
}

/// One pass of attenuate-greedy on a given realization and arrival order.
pub fn run_attenuate_greedy(
    instance: &Instance,
    realization: &Realization,
    arrival: &ArrivalOrder,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    require_unit(instance)?;
    realization.check(instance)?;
    check_arrival(instance, arrival)?;
    let ctx = AttenuationContext::new(instance);
    let mut avail = vec![true; instance.items().len()];
    let mut accepted = Vec::new();
    for t in arrival.order() {
        if let Some(j) = realization.active[t] {
            let items = &instance.products()[j].items;
            if rng.random::<f64>() < ctx.retain_prob(j) && items.iter().all(|&i| avail[i]) {
                items.iter().for_each(|&i| avail[i] = false);
                accepted.push(j);
            }
        }
    }
    Ok(accepted)
}

fn check_arrival(instance: &Instance, arrival: &ArrivalOrder) -> Result<()> {
    if arrival.times.len() != instance.num_batches() {
        return Err(Error::pre("arrival order does not match the batch count"));
    }
    Ok(())
}

/// Accepts every active feasible product in arrival order.
pub struct Greedy<'a> {
    instance: &'a Instance,
}

impl<'a> Greedy<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self> {
        require_unit(instance)?;
        Ok(Self { instance })
    }
}

impl Scheme for Greedy<'_> {
    fn instance(&self) -> &Instance {
        self.instance
    }

    fn run_path(&self, rng: &mut Rng, rec: &mut PathRecord) {
        let inst = self.instance;
        let arrival = ArrivalOrder::sample(inst.num_batches(), rng);
        let mut avail = vec![true; inst.items().len()];
        for t in arrival.order() {
            let active = sample_batch(inst, t, rng);
            for &j in &inst.batches()[t] {
                let feasible = inst.products()[j].items.iter().all(|&i| avail[i]);
                rec.feasible[j] = feasible;
                rec.would_accept[j] = feasible;
            }
            if let Some(j) = active {
                rec.active[j] = true;
                if rec.feasible[j] {
                    accept(inst, j, &mut avail, rec);
                }
            }
        }
    }
}

pub fn run_greedy_rcrs(
    instance: &Instance,
    realization: &Realization,
    arrival: &ArrivalOrder,
) -> Result<Vec<usize>> {
    require_unit(instance)?;
    realization.check(instance)?;
    check_arrival(instance, arrival)?;
    let mut avail = vec![true; instance.items().len()];
    let mut accepted = Vec::new();
    for t in arrival.order() {
        if let Some(j) = realization.active[t] {
            let items = &instance.products()[j].items;
            if items.iter().all(|&i| avail[i]) {
                items.iter().for_each(|&i| avail[i] = false);
                accepted.push(j);
            }
        }
    }
    Ok(accepted)
}

/// Selectability guarantee of attenuate-greedy.
///
/// For `L = 2` this is the closed form
/// `(3 − 6e^{1/2} + e + 8e^{3/2} + 21e² + 14e^{5/2} + 7e³) / (16e(1 + e^{1/2} + e)²)`.
/// For `L ≥ 3` the worst case puts full mass on the product's own batch and
/// the bound is `b(1)·∫₀¹ (1 − y·b(1/L))^{L−1} dy = b(1)(1 − (1 − b(1/L))^L)/(L·b(1/L))`.
pub fn rcrs_random_element_guarantee(l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::invalid("L", "needs L >= 2"));
    }
    if l == 2 {
        let e = std::f64::consts::E;
        let h = e.sqrt();
        let num =
            3.0 - 6.0 * h + e + 8.0 * e * h + 21.0 * e * e + 14.0 * e * e * h + 7.0 * e * e * e;
        let den = 16.0 * e * (1.0 + h + e).powi(2);
        return Ok(num / den);
    }
    let lf = l as f64;
    let b1 = b_unchecked(lf, 1.0);
    let bl = b_unchecked(lf, 1.0 / lf);
    Ok(b1 * (1.0 - (1.0 - bl).powi(l as i32)) / (lf * bl))
}

/// The batch-structured lower bound before minimizing over the own-batch
/// mass `z0`: `b(z0)·∫₀¹ (1 − y(1−z0)b((1−z0)/L))(1 − y·b(1/L))^{L−1} dy`,
/// integrated numerically.
pub fn attenuate_greedy_bound(l: usize, z0: f64) -> Result<f64> {
    let lf = l as f64;
    let b0 = attenuation_b(l, z0)?;
    let bz = b_unchecked(lf, (1.0 - z0) / lf);
    let bl = b_unchecked(lf, 1.0 / lf);
    let f = |y: f64| (1.0 - y * (1.0 - z0) * bz) * (1.0 - y * bl).powi(l as i32 - 1);
    Ok(b0 * simpson(f, 0.0, 1.0, 2000))
}

pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Batch `N_0` holds one product on items `1..L` with mass `x0`; batch `N_t`
/// (`t = 1..L`) holds `per_batch` products, each on item `t` plus a private
/// item, with total mass `1 − x0`. Every product of `N_t` meets the first
/// product, so its `x_{t,j}` is the full batch mass.
pub fn first_try_instance(l: usize, x0: f64, per_batch: usize) -> Result<Instance> {
    if l < 2 || per_batch == 0 || !(0.0..1.0).contains(&x0) {
        return Err(Error::invalid(
            "params",
            "need L >= 2, per_batch >= 1, 0 <= x0 < 1",
        ));
    }
    let mut b = InstanceBuilder::new();
    let shared: Vec<String> = (1..=l).map(|i| format!("s{i}")).collect();
    let names: Vec<&str> = shared.iter().map(String::as_str).collect();
    let t0 = b.batch();
    b.product("j0", &names, 1.0, x0, t0);
    let x = (1.0 - x0) / per_batch as f64;
    for (t, s) in names.iter().enumerate() {
        let bt = b.batch();
        for k in 0..per_batch {
            b.product(format!("p{}_{k}", t + 1), &[s], 1.0, x, bt);
        }
    }
    b.build(l)
}
