//! Scale-down of an action to a randomized recourse action that sells
//! nothing forbidden and every other product with its original probability.

use super::{Action, SubstitutableSystem};
use crate::error::{Error, Result};

/// Residual at or below this counts as "target met".
pub const TARGET_EPS: f64 = 1e-12;

/// Supplies, for an action and a forbidden set, an action of the same period
/// that sells nothing forbidden and weakly more of everything else.
pub trait RecourseOracle: Sync {
    fn recourse(
        &self,
        system: &SubstitutableSystem,
        t: usize,
        action: &Action,
        forbidden: &[bool],
    ) -> Result<Action>;
}

/// Zeroes the forbidden entries. Valid for independent demand and for
/// remapping mechanisms.
#[derive(Clone, Copy, Debug, Default)]
pub struct RemapOracle;

impl RecourseOracle for RemapOracle {
    fn recourse(
        &self,
        _: &SubstitutableSystem,
        _: usize,
        action: &Action,
        forbidden: &[bool],
    ) -> Result<Action> {
        let phi: Vec<(usize, f64)> = action
            .phi
            .iter()
            .copied()
            .filter(|&(j, _)| !forbidden[j])
            .collect();
        let removed: Vec<usize> = action
            .phi
            .iter()
            .filter(|&&(j, p)| forbidden[j] && p > 0.0)
            .map(|&(j, _)| j)
            .collect();
        let id = if removed.is_empty() {
            action.id.clone()
        } else {
            let ids: Vec<String> = removed.iter().map(|j| j.to_string()).collect();
            format!("{}-{{{}}}", action.id, ids.join(","))
        };
        Ok(Action { id, phi })
    }
}

/// Searches the period's explicit table for a conforming action, taking the
/// one with the smallest total sale probability (first in table order on ties).
#[derive(Clone, Copy, Debug, Default)]
pub struct TableOracle;

impl RecourseOracle for TableOracle {
    fn recourse(
        &self,
        system: &SubstitutableSystem,
        t: usize,
        action: &Action,
        forbidden: &[bool],
    ) -> Result<Action> {
        let mut best: Option<&Action> = None;
        for cand in &system.actions[t] {
            if conformity(action, cand, forbidden).is_none()
                && best.is_none_or(|b| cand.total() < b.total())
            {
                best = Some(cand);
            }
        }
        best.cloned().ok_or_else(|| {
            Error::pre(format!(
                "period {t} has no recourse action for `{}`",
                action.id
            ))
        })
    }
}

/// First product violating the recourse conditions, with a message.
fn conformity(base: &Action, cand: &Action, forbidden: &[bool]) -> Option<(usize, String)> {
    for &(j, p) in &cand.phi {
        if forbidden[j] && p > 0.0 {
            return Some((j, format!("sells forbidden product with probability {p}")));
        }
    }
    for &(j, p) in &base.phi {
        if !forbidden[j] && cand.phi(j) < p - TARGET_EPS {
            return Some((j, format!("probability drops from {p} to {}", cand.phi(j))));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureEntry {
    pub action: Action,
    pub weight: f64,
}

/// Randomized action; the remaining weight `1 − Σγ_k` plays the null action.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RecourseMixture {
    pub entries: Vec<MixtureEntry>,
}

impl RecourseMixture {
    pub fn null_weight(&self) -> f64 {
        1.0 - self.entries.iter().map(|e| e.weight).sum::<f64>()
    }

    /// `E[φ(j, S')]`
    pub fn expected_phi(&self, j: usize) -> f64 {
        self.entries
            .iter()
            .map(|e| e.weight * e.action.phi(j))
            .sum()
    }
}

/// Breakpoint iteration: each round asks the oracle for a recourse of the
/// previous action, gives it the largest weight no remaining product
/// overshoots, and forbids the product that hit its target (lowest index on
/// ties) along with any whose residual is within [`TARGET_EPS`].
pub fn scale_down(
    system: &SubstitutableSystem,
    t: usize,
    action: &Action,
    forbidden: &[bool],
    oracle: &dyn RecourseOracle,
) -> Result<RecourseMixture> {
    let n = system.products.len();
    if forbidden.len() != n {
        return Err(Error::Dimension(format!(
            "{} forbidden flags for {n} products",
            forbidden.len()
        )));
    }
    let mut f = forbidden.to_vec();
    let mut residual: Vec<f64> = (0..n)
        .map(|j| if f[j] { 0.0 } else { action.phi(j) })
        .collect();
    let mut prev = action.clone();
    let mut mix = RecourseMixture::default();
    let mut used = 0.0f64;
    loop {
        // products with nothing left to sell need no further recourse
        for j in 0..n {
            if !f[j] && residual[j] <= TARGET_EPS {
                f[j] = true;
            }
        }
        if f.iter().all(|&b| b) {
            break;
        }
        let next = oracle.recourse(system, t, &prev, &f)?;
        if let Some((j, message)) = conformity(&prev, &next, &f) {
            return Err(Error::NonConformingRecourse {
                action: next.id,
                product: system.products[j].id.clone(),
                message,
            });
        }
        let mut gamma = f64::INFINITY;
        let mut arg = None;
        for j in 0..n {
            if f[j] {
                continue;
            }
            let p = next.phi(j);
            if p <= 0.0 {
                return Err(Error::NonConformingRecourse {
                    action: next.id,
                    product: system.products[j].id.clone(),
                    message: format!("residual {} cannot be met", residual[j]),
                });
            }
            let ratio = residual[j] / p;
            if ratio < gamma {
                gamma = ratio;
                arg = Some(j);
            }
        }
        let Some(arg) = arg else { break };
        let gamma = gamma.clamp(0.0, (1.0 - used).max(0.0));
        for j in 0..n {
            if !f[j] {
                residual[j] -= gamma * next.phi(j);
            }
        }
        residual[arg] = 0.0;
        f[arg] = true;
        used += gamma;
        if gamma > 0.0 {
            mix.entries.push(MixtureEntry {
                action: next.clone(),
                weight: gamma,
            });
        }
        prev = next;
    }
    Ok(mix)
}
