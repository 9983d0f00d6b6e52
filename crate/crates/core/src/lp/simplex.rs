//! Dense two-phase tableau simplex with Bland's rule.

use super::{LinearProgram, LpSolution, LpStatus, Sense};
use crate::error::{Error, Result};

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs `c_j − z_j`; the last entry is minus the objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                    row[c] = 0.0;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn set_objective(&mut self, c: &[f64]) {
        self.obj = vec![0.0; self.ncols + 1];
        self.obj[..c.len()].copy_from_slice(c);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (v, a) in self.obj.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
    }

    /// Runs Bland pivots over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize, tol: f64) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] > tol) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > tol {
                    let ratio = row[self.ncols] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
    }
}

pub(super) fn solve(lp: &LinearProgram, tol: f64) -> Result<LpSolution> {
    let n = lp.num_vars;
    if lp.objective.len() != n || lp.bounds.len() != n {
        return Err(Error::Dimension(format!(
            "{n} variables but {} objective coefficients and {} bounds",
            lp.objective.len(),
            lp.bounds.len()
        )));
    }
    for (k, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::Dimension(format!(
                "constraint {k} has {} coefficients for {n} variables",
                c.coeffs.len()
            )));
        }
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if !lo.is_finite() || lo > hi {
            return Err(Error::invalid(
                "bounds",
                format!("variable {j} needs a finite lower bound not above its upper bound"),
            ));
        }
    }
    if lp.bounds.iter().any(|&(lo, hi)| hi - lo < -tol) {
        return Ok(LpSolution::infeasible(n));
    }

    // Rows over shifted variables x' = x − lo, with nonnegative rhs.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lp.bounds).map(|(a, b)| a * b.0).sum();
        rows.push((c.coeffs.clone(), c.sense, c.rhs - shift));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Sense::Le, hi - lo));
        }
    }
    for (a, sense, b) in rows.iter_mut() {
        if *b < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *b = -*b;
            *sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        obj: Vec::new(),
        basis: Vec::with_capacity(m),
        ncols,
    };
    let (mut s, mut a) = (n, art_start);
    for (coeffs, sense, b) in &rows {
        let mut row = vec![0.0; ncols + 1];
        row[..n].copy_from_slice(coeffs);
        row[ncols] = *b;
        match sense {
            Sense::Le => {
                row[s] = 1.0;
                tab.basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                tab.basis.push(a);
                a += 1;
            }
            Sense::Eq => {
                row[a] = 1.0;
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.rows.push(row);
    }

    if n_art > 0 {
        let mut c1 = vec![0.0; ncols];
        c1[art_start..].iter_mut().for_each(|v| *v = -1.0);
        tab.set_objective(&c1);
        tab.optimize(ncols, tol);
        if -tab.obj[ncols] < -1e-7 * (1.0 + m as f64) {
            return Ok(LpSolution::infeasible(n));
        }
        // Drive remaining artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| tab.rows[r][j].abs() > tol) {
                    Some(c) => tab.pivot(r, c),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut c2 = lp.objective.clone();
    c2.resize(ncols, 0.0);
    tab.set_objective(&c2);
    if !tab.optimize(art_start, tol) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: vec![0.0; n],
            objective: f64::INFINITY,
        });
    }
    let mut values: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            values[bv] += tab.rows[i][ncols];
        }
    }
    let objective = values.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
    })
}
