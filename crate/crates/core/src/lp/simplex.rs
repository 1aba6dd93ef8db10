//! Dense two-phase primal simplex on a full tableau.
//!
//! Pricing is Dantzig's largest reduced cost; after a run of degenerate
//! pivots it switches to Bland's rule until the objective moves again,
//! which rules out cycling. Upper bounds become explicit rows.
//!
//! On return the solution carries a certificate recomputed from the
//! original rows: primal violation, dual feasibility and the duality gap.

use log::debug;

use super::{LinearProgram, LpResult, LpStatus, Relation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Feasibility and optimality tolerance.
    pub tolerance: f64,
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot_tolerance: f64,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub degenerate_streak: usize,
    /// Zero means `50 * (rows + columns)`.
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            tolerance: 1e-8,
            pivot_tolerance: 1e-10,
            degenerate_streak: 30,
            max_iterations: 0,
        }
    }
}

struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

struct Tableau {
    data: Vec<f64>,
    width: usize,
    rows: usize,
    /// Reduced costs `c_j - c_B B^-1 A_j` for the current phase.
    d: Vec<f64>,
    basis: Vec<usize>,
    is_artificial: Vec<bool>,
    scratch: Vec<(usize, f64)>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.data[r * w + q];
        let inv = 1.0 / piv;
        self.scratch.clear();
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for (j, x) in row.iter_mut().enumerate() {
                if *x != 0.0 {
                    *x *= inv;
                    if x.abs() < 1e-15 {
                        *x = 0.0;
                    } else {
                        self.scratch.push((j, *x));
                    }
                }
            }
            row[q] = 1.0;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &(j, v) in &self.scratch {
                row[j] -= f * v;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in &self.scratch {
                self.d[j] -= f * v;
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d.clear();
        self.d.extend_from_slice(cost);
        self.d.push(0.0);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.data[i * w..(i + 1) * w];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
    }

    /// Runs primal simplex iterations for the current costs.
    fn optimize(
        &mut self,
        opts: &SimplexOptions,
        limit: usize,
        iterations: &mut usize,
    ) -> Result<()> {
        let ncols = self.width - 1;
        let mut bland = false;
        let mut streak = 0usize;
        loop {
            let entering = if bland {
                (0..ncols).find(|&j| !self.is_artificial[j] && self.d[j] > opts.tolerance)
            } else {
                let mut best = None;
                let mut best_d = opts.tolerance;
                for j in 0..ncols {
                    if !self.is_artificial[j] && self.d[j] > best_d {
                        best_d = self.d[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(q) = entering else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, q);
                if a <= opts.pivot_tolerance {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                a > self.at(r, q)
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Unbounded);
            };

            if ratio <= 1e-12 {
                streak += 1;
                if streak >= opts.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }

            self.pivot(r, q);
            *iterations += 1;
            if *iterations > limit {
                return Err(Error::NumericalFailure(format!(
                    "simplex did not converge within {limit} iterations"
                )));
            }
        }
    }
}

/// Solves `lp` to optimality.
pub fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpResult> {
    lp.check_finite()?;
    let nv = lp.num_vars();

    let mut rows: Vec<Row> = lp
        .constraints
        .iter()
        .map(|c| Row {
            coeffs: c.coeffs.clone(),
            relation: c.relation,
            rhs: c.rhs,
        })
        .collect();
    let n_user_rows = rows.len();
    for (j, u) in lp.upper.iter().enumerate() {
        if let Some(u) = *u {
            rows.push(Row {
                coeffs: vec![(j, 1.0)],
                relation: Relation::Le,
                rhs: u,
            });
        }
    }

    // normalize to rhs >= 0
    let mut sign = vec![1.0; rows.len()];
    for (i, row) in rows.iter_mut().enumerate() {
        if row.rhs < 0.0 {
            sign[i] = -1.0;
            row.rhs = -row.rhs;
            for c in row.coeffs.iter_mut() {
                c.1 = -c.1;
            }
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let mut ncols = nv;
    let mut slack_col = vec![usize::MAX; rows.len()];
    let mut art_col = vec![usize::MAX; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        match row.relation {
            Relation::Le => {
                slack_col[i] = ncols;
                ncols += 1;
            }
            Relation::Ge => {
                slack_col[i] = ncols;
                art_col[i] = ncols + 1;
                ncols += 2;
            }
            Relation::Eq => {
                art_col[i] = ncols;
                ncols += 1;
            }
        }
    }

    let m = rows.len();
    let width = ncols + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut is_artificial = vec![false; ncols];
    for (i, row) in rows.iter().enumerate() {
        let base = i * width;
        for &(j, a) in &row.coeffs {
            data[base + j] += a;
        }
        data[base + width - 1] = row.rhs;
        match row.relation {
            Relation::Le => {
                data[base + slack_col[i]] = 1.0;
                basis[i] = slack_col[i];
            }
            Relation::Ge => {
                data[base + slack_col[i]] = -1.0;
                data[base + art_col[i]] = 1.0;
                basis[i] = art_col[i];
                is_artificial[art_col[i]] = true;
            }
            Relation::Eq => {
                data[base + art_col[i]] = 1.0;
                basis[i] = art_col[i];
                is_artificial[art_col[i]] = true;
            }
        }
    }

    let mut tab = Tableau {
        data,
        width,
        rows: m,
        d: Vec::with_capacity(width),
        basis,
        is_artificial: vec![false; ncols],
        scratch: Vec::with_capacity(width),
    };
    let limit = if opts.max_iterations == 0 {
        50 * (m + ncols)
    } else {
        opts.max_iterations
    };
    let mut iterations = 0;

    // phase 1: maximize -sum(artificials)
    if is_artificial.iter().any(|&a| a) {
        let cost: Vec<f64> = is_artificial
            .iter()
            .map(|&a| if a { -1.0 } else { 0.0 })
            .collect();
        tab.set_costs(&cost);
        tab.optimize(opts, limit, &mut iterations)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| is_artificial[tab.basis[i]])
            .map(|i| tab.rhs(i))
            .sum();
        if infeasibility > opts.tolerance * (1.0 + m as f64).sqrt() {
            return Err(Error::Infeasible);
        }
        // drive remaining zero-level artificials out of the basis
        for i in 0..m {
            if !is_artificial[tab.basis[i]] {
                continue;
            }
            let q = (0..ncols)
                .filter(|&j| !is_artificial[j])
                .max_by(|&a, &b| tab.at(i, a).abs().total_cmp(&tab.at(i, b).abs()));
            if let Some(q) = q {
                if tab.at(i, q).abs() > 1e-9 {
                    tab.pivot(i, q);
                }
            }
        }
        debug!("phase 1 done after {iterations} pivots");
    }
    tab.is_artificial = is_artificial;

    // phase 2
    let mut cost = vec![0.0; ncols];
    cost[..nv].copy_from_slice(&lp.objective);
    tab.set_costs(&cost);
    tab.optimize(opts, limit, &mut iterations)?;
    debug!("simplex finished after {iterations} pivots ({m} rows, {ncols} columns)");

    let mut x = vec![0.0; nv];
    for i in 0..m {
        let b = tab.basis[i];
        if b < nv {
            x[b] = tab.rhs(i).max(0.0);
        }
    }
    let max_reduced_cost = (0..ncols)
        .filter(|&j| !tab.is_artificial[j])
        .map(|j| tab.d[j])
        .fold(0.0, f64::max);

    // duals of the (sign-normalized) rows, mapped back to the original sense
    let mut y = vec![0.0; m];
    for i in 0..m {
        let col = if art_col[i] != usize::MAX {
            art_col[i]
        } else {
            slack_col[i]
        };
        y[i] = -tab.d[col] * sign[i];
    }

    let objective = lp.objective_value(&x);
    let primal_violation = lp.max_violation(&x);

    // certificate from the original rows (bound rows included)
    let mut reduced = lp.objective.clone();
    let mut dual_obj = 0.0;
    let mut dual_violation: f64 = 0.0;
    let mut bound_row = n_user_rows;
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            reduced[j] -= a * y[i];
        }
        dual_obj += c.rhs * y[i];
        dual_violation = dual_violation.max(sign_violation(c.relation, y[i]));
    }
    for (j, u) in lp.upper.iter().enumerate() {
        if let Some(u) = *u {
            reduced[j] -= y[bound_row];
            dual_obj += u * y[bound_row];
            dual_violation = dual_violation.max(sign_violation(Relation::Le, y[bound_row]));
            bound_row += 1;
        }
    }
    for r in &reduced {
        dual_violation = dual_violation.max(*r);
    }
    let duality_gap = (dual_obj - objective).abs();

    let scale = 1.0 + objective.abs();
    if primal_violation > 1e-6 || duality_gap > 1e-6 * scale || dual_violation > 1e-6 * scale {
        return Err(Error::NumericalFailure(format!(
            "optimality certificate failed: primal {primal_violation:.3e}, \
             dual {dual_violation:.3e}, gap {duality_gap:.3e}"
        )));
    }

    y.truncate(n_user_rows);
    Ok(LpResult {
        status: LpStatus::Optimal,
        x,
        objective,
        duals: y,
        max_reduced_cost,
        duality_gap,
        dual_violation,
        primal_violation,
        iterations,
    })
}

/// Dual sign requirement for a maximization row.
fn sign_violation(relation: Relation, y: f64) -> f64 {
    match relation {
        Relation::Le => -y,
        Relation::Ge => y,
        Relation::Eq => 0.0,
    }
}
