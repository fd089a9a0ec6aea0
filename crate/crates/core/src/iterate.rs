//! Monotone fixed-point iteration between the super- and sub-solutions.
//!
//! Starting from the super-solution, each step applies `F` and must descend
//! while staying above the sub-solution; the sandwich is asserted at every
//! step. Convergence is declared when the sup gap between iterates drops
//! below the fixed tolerance. The ascending variant from the sub-solution is
//! available for cross-validation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{
    is_in_gamma, max_difference, pointwise_order, sup_distance, weighted_distance, GammaTolerance,
    Profile, ProfileOrder, WeightedNorm,
};
use crate::greenkernel::GreenKernel;
use crate::waveop::{apply_f, residual, HOperator};

/// Ordering slack allowed per step before the run aborts; distinguishes a
/// genuine monotonicity failure from floating-point noise.
pub const ORDERING_TOL: f64 = 1e-8;

/// Stopping rules and the weighted-norm exponent used in traces.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationConfig {
    /// Sup-norm gap between successive iterates that counts as converged.
    pub tol_fixed: f64,
    /// Interior residual the converged profile is expected to meet.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Weight exponent for the weighted-gap column of the trace.
    pub mu: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Iterate down from the super-solution (the constructive default).
    Descending,
    /// Iterate up from the sub-solution, for cross-validation.
    Ascending,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            tol_fixed: 1e-8,
            tol_residual: 1e-3,
            max_iter: 500,
            mu: 0.05,
            direction: Direction::Descending,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_fixed > 0.0) || !(self.tol_residual > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParams(format!(
                "need positive tolerances and max_iter >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub sup_gap: f64,
    pub weighted_gap: f64,
    /// min(iterate - lower); negative values mean the iterate dipped below.
    pub min_margin_lower: f64,
    /// max(iterate - upper); positive values mean the iterate rose above.
    pub max_margin_upper: f64,
    pub residual: f64,
}

/// Classification of the right-hand limit of a converged profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LimitClass {
    ConnectsZeroToK,
    /// The plateau sits strictly between the equilibria; with the reaction
    /// nonzero there this is a truncation artifact, not a steady state.
    Intermediate(f64),
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub converged: bool,
    pub classification: Option<LimitClass>,
}

/// Drive the monotone iteration. `upper` must lie in Gamma and dominate
/// `lower`; whether the pair was verified as super/sub-solutions is the
/// caller's responsibility (the CLI records an explicit waiver flag when
/// verification is skipped).
pub fn monotone_iterate(
    kernel: &GreenKernel,
    h: &HOperator,
    upper: &Profile,
    lower: &Profile,
    cfg: &IterationConfig,
) -> Result<(Profile, IterationTrace)> {
    cfg.validate()?;
    let gamma = is_in_gamma(upper, h.reaction.k, GammaTolerance::default());
    if !gamma.in_gamma {
        return Err(Error::InvalidParams(format!(
            "upper envelope is not in Gamma: {gamma:?}"
        )));
    }
    match pointwise_order(lower, upper, ORDERING_TOL)? {
        ProfileOrder::Leq | ProfileOrder::Equal => {}
        other => {
            return Err(Error::OrderingViolated(format!(
                "lower envelope is not below upper: {other:?}"
            )))
        }
    }

    let w = WeightedNorm::new(cfg.mu)?;
    let params = *kernel.params();
    let mut current = match cfg.direction {
        Direction::Descending => upper.clone(),
        Direction::Ascending => lower.clone(),
    };
    let mut trace = IterationTrace { rows: Vec::new(), converged: false, classification: None };

    for n in 1..=cfg.max_iter {
        let next = apply_f(kernel, h, &current)?;
        // Sandwich checks, direction-aware.
        let step_gap = match cfg.direction {
            // Descending: next <= current.
            Direction::Descending => max_difference(&next, &current)?,
            // Ascending: next >= current.
            Direction::Ascending => max_difference(&current, &next)?,
        };
        if step_gap > ORDERING_TOL {
            return Err(Error::OrderingViolated(format!(
                "iterate {n} moved against the monotone direction by {step_gap:.3e}"
            )));
        }
        let below = max_difference(&lower, &next)?;
        if below > ORDERING_TOL {
            return Err(Error::OrderingViolated(format!(
                "iterate {n} dipped {below:.3e} below the lower envelope"
            )));
        }
        let above = max_difference(&next, &upper)?;
        if above > ORDERING_TOL {
            return Err(Error::OrderingViolated(format!(
                "iterate {n} rose {above:.3e} above the upper envelope"
            )));
        }

        let sup_gap = sup_distance(&next, &current)?;
        let row = TraceRow {
            iteration: n,
            sup_gap,
            weighted_gap: weighted_distance(&next, &current, &w)?,
            min_margin_lower: -max_difference(&lower, &next)?,
            max_margin_upper: above,
            residual: residual(&params, &h.reaction, &next)?.interior_sup,
        };
        trace.rows.push(row);
        current = next;
        if sup_gap < cfg.tol_fixed {
            trace.converged = true;
            trace.classification = Some(classify_limit(&current, &h.reaction, 1e-4));
            return Ok((current, trace));
        }
    }
    Err(Error::MaxIterExceeded(Box::new(trace)))
}

/// Sup-norm fixed-point defect `|F(p) - p|`.
pub fn check_fixed_point(kernel: &GreenKernel, h: &HOperator, p: &Profile) -> Result<f64> {
    let fp = apply_f(kernel, h, p)?;
    sup_distance(&fp, p)
}

/// Read the right-end plateau and decide what the profile connects.
///
/// A plateau away from K where the reaction is nonzero cannot be a steady
/// state; it is flagged as an intermediate (truncation) artifact.
pub fn classify_limit(p: &Profile, re: &crate::waveop::Reaction, tol: f64) -> LimitClass {
    let k_val = *p.values.last().expect("profiles are nonempty");
    if (k_val - re.k).abs() <= tol {
        LimitClass::ConnectsZeroToK
    } else if re.apply(k_val, k_val).abs() > tol {
        LimitClass::Intermediate(k_val)
    } else {
        LimitClass::Degenerate
    }
}

/// Difference-quotient probes of the smoothing claims: bounded first and
/// second quotients across scales h, 2h, 4h; the one-sided second-derivative
/// gap at the former kink location (xi = 0); and derivative decay at the
/// domain ends.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    /// max |first difference quotient| at scales h, 2h, 4h.
    pub max_d1: [f64; 3],
    /// max |second difference quotient| at scales h, 2h, 4h.
    pub max_d2: [f64; 3],
    /// |one-sided second quotient gap| at xi = 0, scales h, 2h, 4h. Shrinks
    /// roughly linearly in the scale for a C2 function and stalls at the jump
    /// size for a genuine kink.
    pub kink_gap: [f64; 3],
    /// Largest |phi'| over the outermost points.
    pub end_d1: f64,
    /// Largest |phi''| over the outermost points.
    pub end_d2: f64,
    /// Both end derivatives below 1e-4.
    pub derivative_decay_ok: bool,
}

pub fn smoothness_probe(p: &Profile) -> Result<SmoothnessReport> {
    let n = p.values.len();
    if n < 17 {
        return Err(Error::GridTooSmall(format!("smoothness probe needs 17 points, got {n}")));
    }
    let h = p.grid.spacing();
    let v = &p.values;
    let center = n / 2;
    let mut max_d1 = [0.0f64; 3];
    let mut max_d2 = [0.0f64; 3];
    let mut kink_gap = [0.0f64; 3];
    for (si, stride) in [1usize, 2, 4].into_iter().enumerate() {
        let s = stride as f64 * h;
        for j in stride..n - stride {
            let d1 = (v[j + stride] - v[j - stride]) / (2.0 * s);
            let d2 = (v[j + stride] - 2.0 * v[j] + v[j - stride]) / (s * s);
            max_d1[si] = max_d1[si].max(d1.abs());
            max_d2[si] = max_d2[si].max(d2.abs());
        }
        let plus = (v[center + 2 * stride] - 2.0 * v[center + stride] + v[center]) / (s * s);
        let minus = (v[center] - 2.0 * v[center - stride] + v[center - 2 * stride]) / (s * s);
        kink_gap[si] = (plus - minus).abs();
    }
    let end_d1 = [
        (v[1] - v[0]) / h,
        (v[2] - v[1]) / h,
        (v[n - 1] - v[n - 2]) / h,
        (v[n - 2] - v[n - 3]) / h,
    ]
    .iter()
    .fold(0.0f64, |m, x| m.max(x.abs()));
    let end_d2 = [
        (v[2] - 2.0 * v[1] + v[0]) / (h * h),
        (v[n - 1] - 2.0 * v[n - 2] + v[n - 3]) / (h * h),
    ]
    .iter()
    .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(SmoothnessReport {
        max_d1,
        max_d2,
        kink_gap,
        end_d1,
        end_d2,
        derivative_decay_ok: end_d1 < 1e-4 && end_d2 < 1e-4,
    })
}
