//! Guarantee curves, improved selectability constants and the disjoint-pair
//! mass `(♣)`.

mod clubsuit;

pub use clubsuit::{clubsuit, random_clubsuit_instance, ClubsuitClass, ClubsuitFixture};

use crate::error::{Error, Result};
use crate::rcrs::{rcrs_random_element_guarantee, solve_selection_function};

/// An improved selectability constant stored as its excess over
/// `1/(1+L)`. For large `L` the excess is far below f64 resolution at the
/// scale of `α`, so the excess is the quantity that is solved for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImprovedAlpha {
    pub l: usize,
    pub excess: f64,
}

impl ImprovedAlpha {
    pub fn base(&self) -> f64 {
        1.0 / (1.0 + self.l as f64)
    }

    pub fn value(&self) -> f64 {
        self.base() + self.excess
    }
}

/// Upper end of the valid bracket: `α ≤ 1 − αL + α/(2L)`, i.e.
/// `α ≤ 1/(1 + L − 1/(2L))`.
pub fn side_condition_limit(l: usize) -> f64 {
    let lf = l as f64;
    1.0 / (1.0 + lf - 1.0 / (2.0 * lf))
}

/// `r(α) = (1−α(1+L)+α/(2L)) / (1−αL+α/(2L))` written in the offset `δ`.
fn ratio_offset(l: usize, delta: f64) -> Result<f64> {
    let lf = l as f64;
    let a0 = 1.0 / (1.0 + lf);
    let alpha = a0 + delta;
    let num = -delta * (1.0 + lf) + alpha / (2.0 * lf);
    let den = a0 - delta * lf + alpha / (2.0 * lf);
    if den <= 0.0 {
        return Err(Error::pre(format!("pole: 1 − αL + α/(2L) = {den} ≤ 0")));
    }
    Ok(num / den)
}

/// `1 − α(1+L) + α²·w·r^{2L}` at `α = 1/(1+L) + δ`.
fn condition_offset(l: usize, delta: f64, w: f64) -> Result<f64> {
    let lf = l as f64;
    let alpha = 1.0 / (1.0 + lf) + delta;
    let r = ratio_offset(l, delta)?;
    Ok(-delta * (1.0 + lf) + alpha * alpha * w * r.powi(2 * l as i32))
}

fn check_l(l: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::invalid("L", "needs L >= 2"));
    }
    Ok(())
}

/// `κ(α) = 1 − α(1+L) + α²((L−1)/L)·r(α)^{2L}`.
pub fn kappa(l: usize, alpha: f64) -> Result<f64> {
    check_l(l)?;
    condition_offset(
        l,
        alpha - 1.0 / (1.0 + l as f64),
        (l as f64 - 1.0) / l as f64,
    )
}

/// `1 − α(1+L) + (α²/L)·r(α)^{2L}`, the L-partite condition.
pub fn partite_condition(l: usize, alpha: f64) -> Result<f64> {
    check_l(l)?;
    condition_offset(l, alpha - 1.0 / (1.0 + l as f64), 1.0 / l as f64)
}

/// Bisection on the excess over `[0, side_condition_limit − 1/(1+L)]`,
/// where the condition goes from positive to negative.
fn solve_offset(l: usize, w: f64, what: &str) -> Result<ImprovedAlpha> {
    check_l(l)?;
    let (mut lo, mut hi) = (0.0f64, side_condition_limit(l) - 1.0 / (1.0 + l as f64));
    let f_lo = condition_offset(l, lo, w)?;
    let f_hi = condition_offset(l, hi, w)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoSignChange(format!(
            "{what} for L={l}: {f_lo:e} at the base point, {f_hi:e} at the side-condition limit"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if condition_offset(l, mid, w)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ImprovedAlpha { l, excess: lo })
}

/// Root of `κ` above `1/(1+L)`: the improved constant for standard inputs.
pub fn solve_standard_alpha(l: usize) -> Result<ImprovedAlpha> {
    solve_offset(l, (l as f64 - 1.0) / l as f64, "kappa")
}

/// Largest `α` satisfying the L-partite condition.
pub fn solve_partite_alpha(l: usize) -> Result<ImprovedAlpha> {
    solve_offset(l, 1.0 / l as f64, "partite condition")
}

/// `C(α, L) = α²·r(α)^{2L}`; requires `α ≤ 1 − αL + α/(2L)`.
pub fn pair_lower_bound(l: usize, alpha: f64) -> Result<f64> {
    check_l(l)?;
    let lf = l as f64;
    if alpha > 1.0 - alpha * lf + alpha / (2.0 * lf) {
        return Err(Error::pre(format!(
            "side condition α ≤ 1 − αL + α/(2L) fails at α = {alpha}"
        )));
    }
    let r = ratio_offset(l, alpha - 1.0 / (1.0 + lf))?;
    Ok(alpha * alpha * r.powi(2 * l as i32))
}

/// Closed-form curves and root-found constants for one `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct GuaranteeTable {
    pub l: usize,
    pub baseline: f64,
    pub offline_ub: f64,
    pub integrality_gap: f64,
    pub poisson: f64,
    pub standard_alpha: Option<ImprovedAlpha>,
    pub partite_alpha: Option<ImprovedAlpha>,
    pub rcrs_random_element_alpha: Option<f64>,
    pub rcrs_standard_integral: Option<f64>,
}

/// Grid used for the selection-function column.
pub const TABLE_GRID: usize = 4000;

/// Closed forms for any `L ≥ 1`; root-found columns for `L ≥ 2`.
pub fn curve_values(l: usize) -> Result<GuaranteeTable> {
    if l == 0 {
        return Err(Error::invalid("L", "needs L >= 1"));
    }
    let lf = l as f64;
    let extra = if l >= 2 {
        (
            Some(solve_standard_alpha(l)?),
            Some(solve_partite_alpha(l)?),
            Some(rcrs_random_element_guarantee(l)?),
            Some(solve_selection_function(l, TABLE_GRID)?.integral),
        )
    } else {
        (None, None, None, None)
    };
    Ok(GuaranteeTable {
        l,
        baseline: 1.0 / (1.0 + lf),
        offline_ub: (1.0 - (1.0 + lf).powf(-(1.0 + lf))) / lf,
        integrality_gap: 1.0 / (lf - 1.0 + 1.0 / lf),
        poisson: -(-lf).exp_m1() / lf,
        standard_alpha: extra.0,
        partite_alpha: extra.1,
        rcrs_random_element_alpha: extra.2,
        rcrs_standard_integral: extra.3,
    })
}
