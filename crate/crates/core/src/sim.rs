//! Chunked, seeded sample-path simulation shared by all schemes.
//!
//! Paths are grouped into chunks of [`CHUNK`] and each chunk owns a derived
//! stream, so tallies do not depend on the number of worker threads.

use rayon::prelude::*;

use crate::model::Instance;
use crate::rng::{self, Rng, Tag, CHUNK};

/// What happened on one sample path.
///
/// `would_accept[j]` is the counterfactual outcome for product `j` had it been
/// the active product of its batch (feasible at its turn and the scheme's coin
/// says yes). Since the state at a batch's turn does not depend on that
/// batch's draw, this samples `Z_j | X_j = 1` for every product on every path.
#[derive(Clone, Debug, Default)]
pub struct PathRecord {
    pub active: Vec<bool>,
    pub feasible: Vec<bool>,
    pub would_accept: Vec<bool>,
    pub accepted: Vec<usize>,
    pub reward: f64,
}

impl PathRecord {
    pub fn new(num_products: usize) -> Self {
        Self {
            active: vec![false; num_products],
            feasible: vec![false; num_products],
            would_accept: vec![false; num_products],
            accepted: Vec::new(),
            reward: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.active.iter_mut().for_each(|v| *v = false);
        self.feasible.iter_mut().for_each(|v| *v = false);
        self.would_accept.iter_mut().for_each(|v| *v = false);
        self.accepted.clear();
        self.reward = 0.0;
    }
}

/// A randomized selection scheme that can run one sample path at a time.
pub trait Scheme: Sync {
    fn instance(&self) -> &Instance;
    fn run_path(&self, rng: &mut Rng, rec: &mut PathRecord);
}

/// Integer counts over many paths plus reward moments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    pub paths: u64,
    pub active: Vec<u64>,
    pub feasible: Vec<u64>,
    pub would_accept: Vec<u64>,
    pub accepted: Vec<u64>,
    pub reward_sum: f64,
    pub reward_sq_sum: f64,
}

impl Tally {
    pub fn new(num_products: usize) -> Self {
        Self {
            paths: 0,
            active: vec![0; num_products],
            feasible: vec![0; num_products],
            would_accept: vec![0; num_products],
            accepted: vec![0; num_products],
            reward_sum: 0.0,
            reward_sq_sum: 0.0,
        }
    }

    fn record(&mut self, rec: &PathRecord) {
        self.paths += 1;
        for j in 0..self.active.len() {
            self.active[j] += rec.active[j] as u64;
            self.feasible[j] += rec.feasible[j] as u64;
            self.would_accept[j] += rec.would_accept[j] as u64;
        }
        for &j in &rec.accepted {
            self.accepted[j] += 1;
        }
        self.reward_sum += rec.reward;
        self.reward_sq_sum += rec.reward * rec.reward;
    }

    fn merge(&mut self, other: &Tally) {
        self.paths += other.paths;
        for (a, b) in [
            (&mut self.active, &other.active),
            (&mut self.feasible, &other.feasible),
            (&mut self.would_accept, &other.would_accept),
            (&mut self.accepted, &other.accepted),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.reward_sum += other.reward_sum;
        self.reward_sq_sum += other.reward_sq_sum;
    }

    pub fn mean_reward(&self) -> f64 {
        self.reward_sum / self.paths.max(1) as f64
    }

    /// Half-width of a normal 95% interval on the mean reward.
    pub fn reward_half_width(&self) -> f64 {
        let n = self.paths as f64;
        if n < 2.0 {
            return f64::INFINITY;
        }
        let mean = self.reward_sum / n;
        let var = ((self.reward_sq_sum - n * mean * mean) / (n - 1.0)).max(0.0);
        crate::stats::Z95 * (var / n).sqrt()
    }
}

/// Runs `paths` sample paths of `scheme`; chunk `c` uses stream `(seed, tag, c)`.
pub fn simulate(scheme: &dyn Scheme, paths: u64, seed: u64, tag: Tag) -> Tally {
    let n = scheme.instance().products().len();
    let chunks = paths.div_ceil(CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, tag, &[c]);
            let mut tally = Tally::new(n);
            let mut rec = PathRecord::new(n);
            let count = CHUNK.min(paths - c * CHUNK);
            for _ in 0..count {
                rec.reset();
                scheme.run_path(&mut rng, &mut rec);
                tally.record(&rec);
            }
            tally
        })
        .collect();
    let mut total = Tally::new(n);
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Number of paths whose record satisfies `pred`, chunked like [`simulate`].
pub fn count_paths(
    scheme: &dyn Scheme,
    paths: u64,
    seed: u64,
    tag: Tag,
    pred: impl Fn(&PathRecord) -> bool + Sync,
) -> u64 {
    let n = scheme.instance().products().len();
    (0..paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, tag, &[c]);
            let mut rec = PathRecord::new(n);
            let mut hits = 0;
            for _ in 0..CHUNK.min(paths - c * CHUNK) {
                rec.reset();
                scheme.run_path(&mut rng, &mut rec);
                hits += pred(&rec) as u64;
            }
            hits
        })
        .sum()
}
