//! The relaxed joint program.
//!
//! Variables `X[t][s] >= 0` plus `u_lo, u_hi` (participant NCG band) and
//! `v_lo, v_hi` (talk NEC band):
//!
//! ```text
//! maximize  w_eff / (W n) * sum_{t,s} G[t][s] X[t][s]
//!           + l1 (u_lo - u_hi) + l2 (v_lo - v_hi)
//! s.t.      sum_s X[t][s] = 1                        for every talk
//!           sum_t X[t][s] <= 1                       for every slot
//!           u_lo <= sum_{t,s} V_p(t) A_p(s) / ICG_p X[t][s] <= u_hi
//!           v_lo <= sum_s G[t][s] / IEC_t X[t][s] <= v_hi
//! ```
//!
//! where `G[t][s] = sum_p w_p V_p(t) A_p(s)` and `W = sum_p w_p`. At an
//! optimum with `l1 > 0` the band variables sit exactly on the min and max
//! of the fractional satisfactions. Participants with `ICG_p = 0` and talks
//! with `IEC_t = 0` get no band rows.

use super::simplex::{self, SimplexOptions};
use super::{LinearProgram, LpResult, Relation};
use crate::error::{Error, Result};
use crate::metrics::Normalizers;
use crate::model::{Matrix, SchedulingInstance};
use crate::solvers::ObjectiveSpec;

/// Where each quantity lives in the variable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLayout {
    pub n: usize,
    pub l: usize,
    pub u_lo: usize,
    pub u_hi: usize,
    pub v_lo: usize,
    pub v_hi: usize,
    /// Participants that received band rows.
    pub banded_participants: Vec<usize>,
    /// Talks that received band rows.
    pub banded_talks: Vec<usize>,
}

impl JointLayout {
    #[inline]
    pub fn x(&self, t: usize, s: usize) -> usize {
        t * self.l + s
    }
}

#[derive(Debug, Clone)]
pub struct JointLp {
    pub lp: LinearProgram,
    pub layout: JointLayout,
}

/// Fractional schedule returned by the relaxation.
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// `n x l`, entries clamped to be non-negative.
    pub x: Matrix,
    pub u_lo: f64,
    pub u_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub objective: f64,
    pub certificate: LpResult,
}

/// Builds the relaxation with normalizers computed from `instance`.
pub fn build_joint_lp(instance: &SchedulingInstance, objective: &ObjectiveSpec) -> Result<JointLp> {
    build_joint_lp_with(instance, objective, &Normalizers::of(instance))
}

/// Builds the relaxation with caller-supplied `ICG`/`IEC`.
pub fn build_joint_lp_with(
    instance: &SchedulingInstance,
    objective: &ObjectiveSpec,
    normalizers: &Normalizers,
) -> Result<JointLp> {
    objective.validate()?;
    let (m, n, l) = (instance.m(), instance.n(), instance.l());
    if normalizers.icg.len() != m || normalizers.iec.len() != n {
        return Err(Error::DimensionMismatch {
            what: "normalizers".into(),
            expected: m + n,
            found: normalizers.icg.len() + normalizers.iec.len(),
        });
    }
    for (what, vals) in [
        ("participant", &normalizers.icg),
        ("talk", &normalizers.iec),
    ] {
        if let Some(index) = vals.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::DegenerateNormalization { what, index });
        }
    }

    let crowd = instance.crowd_matrix();
    let eff_scale = objective.w_eff / (instance.total_weight() * n as f64);
    let mut lp = LinearProgram::new();
    for t in 0..n {
        for s in 0..l {
            lp.add_var(format!("x_{t}_{s}"), eff_scale * crowd.get(t, s), None);
        }
    }

    let banded_participants: Vec<usize> = (0..m).filter(|&p| normalizers.icg[p] > 0.0).collect();
    let banded_talks: Vec<usize> = (0..n).filter(|&t| normalizers.iec[t] > 0.0).collect();
    // an empty band is pinned to zero so the objective stays bounded
    let band_bound = |empty: bool| if empty { Some(0.0) } else { None };
    let u_lo = lp.add_var(
        "u_lo",
        objective.lambda1,
        band_bound(banded_participants.is_empty()),
    );
    let u_hi = lp.add_var(
        "u_hi",
        -objective.lambda1,
        band_bound(banded_participants.is_empty()),
    );
    let v_lo = lp.add_var(
        "v_lo",
        objective.lambda2,
        band_bound(banded_talks.is_empty()),
    );
    let v_hi = lp.add_var(
        "v_hi",
        -objective.lambda2,
        band_bound(banded_talks.is_empty()),
    );
    let layout = JointLayout {
        n,
        l,
        u_lo,
        u_hi,
        v_lo,
        v_hi,
        banded_participants,
        banded_talks,
    };

    for t in 0..n {
        lp.add_constraint(
            (0..l).map(|s| (layout.x(t, s), 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
    }
    for s in 0..l {
        lp.add_constraint(
            (0..n).map(|t| (layout.x(t, s), 1.0)).collect(),
            Relation::Le,
            1.0,
        );
    }

    for &p in &layout.banded_participants {
        let icg = normalizers.icg[p];
        let mut gain = Vec::new();
        for t in 0..n {
            let v = instance.v(p, t);
            if v == 0.0 {
                continue;
            }
            for s in 0..l {
                let a = instance.a(p, s);
                if a != 0.0 {
                    gain.push((layout.x(t, s), v * a / icg));
                }
            }
        }
        push_band(&mut lp, gain, u_lo, u_hi);
    }
    for &t in &layout.banded_talks {
        let iec = normalizers.iec[t];
        let crowd_row: Vec<(usize, f64)> = (0..l)
            .filter(|&s| crowd.get(t, s) != 0.0)
            .map(|s| (layout.x(t, s), crowd.get(t, s) / iec))
            .collect();
        push_band(&mut lp, crowd_row, v_lo, v_hi);
    }

    Ok(JointLp { lp, layout })
}

/// `lo <= expr <= hi` as two `<=` rows.
fn push_band(lp: &mut LinearProgram, expr: Vec<(usize, f64)>, lo: usize, hi: usize) {
    let mut upper = expr.clone();
    upper.push((hi, -1.0));
    lp.add_constraint(upper, Relation::Le, 0.0);
    let mut lower: Vec<(usize, f64)> = expr.into_iter().map(|(j, a)| (j, -a)).collect();
    lower.push((lo, 1.0));
    lp.add_constraint(lower, Relation::Le, 0.0);
}

impl JointLp {
    /// Solves the relaxation; `tolerance` is the simplex feasibility and
    /// optimality tolerance.
    pub fn solve(&self, tolerance: f64) -> Result<LpSolution> {
        let opts = SimplexOptions {
            tolerance,
            ..SimplexOptions::default()
        };
        let result = match simplex::solve(&self.lp, &opts) {
            Ok(r) => r,
            Err(Error::Unbounded) => {
                return Err(Error::NumericalFailure(
                    "joint relaxation reported unbounded".into(),
                ))
            }
            Err(e) => return Err(e),
        };
        let lay = &self.layout;
        let x = Matrix::from_fn(lay.n, lay.l, |t, s| {
            let v = result.x[lay.x(t, s)];
            if v < 1e-12 {
                0.0
            } else {
                v
            }
        });
        Ok(LpSolution {
            x,
            u_lo: result.x[lay.u_lo],
            u_hi: result.x[lay.u_hi],
            v_lo: result.x[lay.v_lo],
            v_hi: result.x[lay.v_hi],
            objective: result.objective,
            certificate: result,
        })
    }
}
