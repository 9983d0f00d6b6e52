//! The selection function `c` solving
//! `c(y) = 1 − L∫₀^y c + ((L−1)/L)(∫₀^y c(z)(1−z)^L dz)²`.
//!
//! Differentiating once gives the system `c' = −Lc + 2((L−1)/L)·S·c·(1−y)^L`,
//! `S' = c(1−y)^L`, `C' = c` with `c(0) = 1`, solved by classical RK4.

use crate::error::{Error, Result};

pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionFunction {
    pub l: usize,
    pub grid: Vec<f64>,
    pub c_values: Vec<f64>,
    /// `S(y) = ∫₀^y c(z)(1−z)^L dz`.
    pub s_values: Vec<f64>,
    /// `C(y) = ∫₀^y c(z) dz`.
    pub cum_values: Vec<f64>,
    pub integral: f64,
    /// Largest integral-equation residual, with the integrals recomputed by
    /// cumulative Simpson quadrature of the tabulated `c`.
    pub residual: f64,
}

impl SelectionFunction {
    /// Linear interpolation on the grid; `y` is clamped to `[0, 1]`.
    pub fn c_at(&self, y: f64) -> f64 {
        let g = self.grid.len() - 1;
        let pos = y.clamp(0.0, 1.0) * g as f64;
        let k = (pos.floor() as usize).min(g - 1);
        let w = pos - k as f64;
        self.c_values[k] * (1.0 - w) + self.c_values[k + 1] * w
    }

    pub fn c_one(&self) -> f64 {
        *self.c_values.last().unwrap()
    }
}

pub fn solve_selection_function(l: usize, grid_points: usize) -> Result<SelectionFunction> {
    if l < 2 {
        return Err(Error::invalid("L", "needs L >= 2"));
    }
    if grid_points < 1000 {
        return Err(Error::invalid(
            "grid_points",
            "needs at least 1000 intervals",
        ));
    }
    let lf = l as f64;
    let k2 = 2.0 * (lf - 1.0) / lf;
    let rhs = |y: f64, s: [f64; 3]| -> [f64; 3] {
        let w = (1.0 - y).powi(l as i32);
        [-lf * s[0] + k2 * s[1] * s[0] * w, s[0] * w, s[0]]
    };
    let g = grid_points;
    let h = 1.0 / g as f64;
    let mut grid = Vec::with_capacity(g + 1);
    let mut c = Vec::with_capacity(g + 1);
    let mut sv = Vec::with_capacity(g + 1);
    let mut cv = Vec::with_capacity(g + 1);
    let mut state = [1.0, 0.0, 0.0];
    for k in 0..=g {
        let y = k as f64 * h;
        grid.push(y);
        c.push(state[0]);
        sv.push(state[1]);
        cv.push(state[2]);
        if k == g {
            break;
        }
        let add =
            |a: [f64; 3], b: [f64; 3], f: f64| [a[0] + f * b[0], a[1] + f * b[1], a[2] + f * b[2]];
        let k1 = rhs(y, state);
        let k2v = rhs(y + h / 2.0, add(state, k1, h / 2.0));
        let k3 = rhs(y + h / 2.0, add(state, k2v, h / 2.0));
        let k4 = rhs(y + h, add(state, k3, h));
        for i in 0..3 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2v[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    // Independent check: recompute both integrals from the tabulated c.
    let weight: Vec<f64> = grid.iter().map(|&y| (1.0 - y).powi(l as i32)).collect();
    let cum_c = cumulative(&c, h);
    let prod: Vec<f64> = c.iter().zip(&weight).map(|(a, b)| a * b).collect();
    let cum_s = cumulative(&prod, h);
    let residual = (0..=g)
        .map(|k| (c[k] - (1.0 - lf * cum_c[k] + (lf - 1.0) / lf * cum_s[k] * cum_s[k])).abs())
        .fold(0.0, f64::max);
    if residual > RESIDUAL_TOL {
        return Err(Error::Residual {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    let integral = cv[g];
    Ok(SelectionFunction {
        l,
        grid,
        c_values: c,
        s_values: sv,
        cum_values: cv,
        integral,
        residual,
    })
}

/// Cumulative integral on a uniform grid: Simpson on even prefixes,
/// Simpson plus a cubic-corrected last panel on odd ones.
fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for k in 1..n {
        if k % 2 == 0 {
            out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        } else if k >= 3 {
            // Simpson's 3/8 over the last three panels
            out[k] =
                out[k - 3] + 3.0 * h / 8.0 * (f[k - 3] + 3.0 * f[k - 2] + 3.0 * f[k - 1] + f[k]);
        } else {
            out[k] = h / 2.0 * (f[0] + f[1]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_value_and_shape() {
        for l in 2..=10 {
            let sf = solve_selection_function(l, 4000).unwrap();
            assert_eq!(sf.c_values[0], 1.0);
            assert!(sf.c_values.windows(2).all(|w| w[1] < w[0]));
            assert!(sf.c_one() > 0.0);
            assert!(sf.residual <= RESIDUAL_TOL);
            let lf = l as f64;
            assert!(sf.integral > (1.0 - (-lf).exp()) / lf);
        }
    }

    #[test]
    fn known_integrals() {
        assert!(solve_selection_function(2, 4000).unwrap().integral >= 0.441);
        assert!(solve_selection_function(3, 4000).unwrap().integral >= 0.321);
        let lf = 5.0f64;
        let bound = (1.0 - 1.0 / (1.0 + lf).powf(1.0 + lf)) / lf;
        assert!(solve_selection_function(5, 4000).unwrap().integral > bound);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(solve_selection_function(2, 10).is_err());
    }

    #[test]
    fn interpolation_hits_grid() {
        let sf = solve_selection_function(2, 1000).unwrap();
        assert_eq!(sf.c_at(0.0), 1.0);
        assert!((sf.c_at(1.0) - sf.c_one()).abs() < 1e-15);
        assert!((sf.c_at(0.5) - sf.c_values[500]).abs() < 1e-12);
    }
}
