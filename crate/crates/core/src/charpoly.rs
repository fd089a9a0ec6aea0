//! Characteristic functions of the linearized profile operator.
//!
//! Two families are handled:
//!
//! * the kernel cubic `delta(lambda) = c lambda^3 + D lambda^2 - c lambda - beta`
//!   whose three distinct real roots `lambda1 < lambda2 < 0 < lambda3` shape the
//!   piecewise-exponential Green's function, and
//! * the application characteristic `delta_r(lambda) = c lambda^3 + D lambda^2
//!   - c lambda + e^(-lambda r)` of the delayed logistic model, which at `r = 0`
//!   reduces to the cubic `delta_0` and whose two positive roots `eta1 < eta2`
//!   drive the super/sub-solution construction.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Residual bound for polished roots, relative to max(1, |coefficients|).
const ROOT_RESIDUAL_TOL: f64 = 1e-12;
/// Relative tolerance below which two roots count as coincident.
const DISTINCT_REL_TOL: f64 = 1e-9;
/// Bisection width for the delayed positive roots.
const BISECT_TOL: f64 = 1e-12;
/// Scan step for bracketing positive roots of `delta_r`.
const SCAN_STEP: f64 = 1e-3;

/// Coefficients of the kernel cubic. `alpha` is fixed to 1; it multiplies the
/// third-derivative term of the operator and is kept only so the residual
/// evaluation states the full equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyParams {
    /// Wave speed, positive.
    pub c: f64,
    /// Diffusion coefficient, positive.
    pub d: f64,
    /// Shift parameter of the beta-shifted operator, positive.
    pub beta: f64,
    /// Coefficient of the mixed third-order term, fixed to 1.
    pub alpha: f64,
}

impl PolyParams {
    pub fn new(c: f64, d: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0) || !(d > 0.0) || !(beta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need c > 0, D > 0, beta > 0, got c = {c}, D = {d}, beta = {beta}"
            )));
        }
        Ok(Self { c, d, beta, alpha: 1.0 })
    }
}

/// The three real roots of the kernel cubic, ordered `lambda1 < lambda2 < 0 < lambda3`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootTriple {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl RootTriple {
    /// The unique positive root.
    pub fn lambda_plus(&self) -> f64 {
        self.lambda3
    }
}

/// Coefficients of the delayed application characteristic. `r = c tau` is the
/// delay measured in profile-space units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayedCharParams {
    pub c: f64,
    pub d: f64,
    pub r: f64,
}

impl DelayedCharParams {
    pub fn new(c: f64, d: f64, r: f64) -> Result<Self> {
        if !(c > 0.0) || !(d > 0.0) || !(r >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "need c > 0, D > 0, r >= 0, got c = {c}, D = {d}, r = {r}"
            )));
        }
        Ok(Self { c, d, r })
    }
}

/// The two positive roots of `delta_r`, ordered `0 < eta1 < eta2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PositiveRootPair {
    pub eta1: f64,
    pub eta2: f64,
}

/// Evaluate `delta(lambda) = c lambda^3 + D lambda^2 - c lambda - beta`.
pub fn eval_delta(params: &PolyParams, lambda: Complex64) -> Complex64 {
    ((lambda * params.c + params.d) * lambda - params.c) * lambda - params.beta
}

/// Real-axis evaluation of the kernel cubic (Horner form).
pub fn eval_delta_real(params: &PolyParams, lambda: f64) -> f64 {
    ((lambda * params.c + params.d) * lambda - params.c) * lambda - params.beta
}

/// Evaluate `delta_r(lambda) = c lambda^3 + D lambda^2 - c lambda + e^(-lambda r)`.
pub fn eval_delta_r(params: &DelayedCharParams, lambda: f64) -> f64 {
    ((lambda * params.c + params.d) * lambda - params.c) * lambda + (-lambda * params.r).exp()
}

/// Evaluate the non-delayed cubic `delta_0(lambda) = c lambda^3 + D lambda^2 - c lambda + 1`.
pub fn eval_delta0(params: &DelayedCharParams, lambda: f64) -> f64 {
    ((lambda * params.c + params.d) * lambda - params.c) * lambda + 1.0
}

/// Solve the kernel cubic for its three distinct real roots.
///
/// Closed-form (trigonometric) solution of the monic depressed cubic, then a
/// Newton polish on the original coefficients. Distinctness is decided by the
/// discriminant relative to its own scale, plus a pairwise gap check after
/// polishing.
pub fn solve_kernel_roots(params: &PolyParams) -> Result<RootTriple> {
    let (c, d, beta) = (params.c, params.d, params.beta);
    // Monic form lambda^3 + p2 lambda^2 + p1 lambda + p0.
    let p2 = d / c;
    let p1 = -1.0;
    let p0 = -beta / c;
    let shift = p2 / 3.0;
    let pp = p1 - p2 * p2 / 3.0;
    let qq = 2.0 * p2.powi(3) / 27.0 - p2 * p1 / 3.0 + p0;

    let disc = -4.0 * pp.powi(3) - 27.0 * qq * qq;
    let scale = (4.0 * pp.abs().powi(3)).max(27.0 * qq * qq).max(f64::MIN_POSITIVE);
    if disc / scale <= DISTINCT_REL_TOL {
        return Err(Error::DistinctRealRootsRequired(format!(
            "cubic discriminant {disc:.3e} (relative {:.3e}) indicates a repeated root or complex pair \
             at (c, D, beta) = ({c}, {d}, {beta})",
            disc / scale
        )));
    }

    // disc > 0 forces pp < 0; three real roots via the cosine parametrization.
    let m = 2.0 * (-pp / 3.0).sqrt();
    let arg = (3.0 * qq / (pp * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [0.0f64; 3];
    for (k, root) in roots.iter_mut().enumerate() {
        let t = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        *root = newton_polish(params, t - shift);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let triple = RootTriple { lambda1: roots[0], lambda2: roots[1], lambda3: roots[2] };

    // Pairwise separation after polishing.
    for (a, b) in [(roots[0], roots[1]), (roots[1], roots[2]), (roots[0], roots[2])] {
        let gap = (b - a).abs() / 1f64.max(a.abs()).max(b.abs());
        if gap < DISTINCT_REL_TOL {
            return Err(Error::DistinctRealRootsRequired(format!(
                "roots {a} and {b} coincide within relative gap {gap:.3e}"
            )));
        }
    }
    if !(triple.lambda2 < 0.0 && triple.lambda3 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "unexpected sign pattern of roots {roots:?}; expected lambda1 < lambda2 < 0 < lambda3"
        )));
    }

    let coeff_scale = 1f64.max(c).max(d).max(beta);
    for &r in &roots {
        let res = eval_delta_real(params, r).abs();
        if res > ROOT_RESIDUAL_TOL * coeff_scale {
            return Err(Error::InvalidParams(format!(
                "root polish left residual {res:.3e} at lambda = {r}"
            )));
        }
    }
    // Vieta on the monic form, as a structural self-check.
    let sum = roots[0] + roots[1] + roots[2];
    let prod = roots[0] * roots[1] * roots[2];
    let pair = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2];
    if (sum + d / c).abs() > 1e-10 || (prod - beta / c).abs() > 1e-10 || (pair + 1.0).abs() > 1e-10
    {
        return Err(Error::InvalidParams(format!(
            "Vieta identities violated: sum {sum}, pair {pair}, product {prod}"
        )));
    }
    Ok(triple)
}

fn newton_polish(params: &PolyParams, mut x: f64) -> f64 {
    for _ in 0..40 {
        let f = eval_delta_real(params, x);
        let fp = (3.0 * params.c * x + 2.0 * params.d) * x - params.c;
        if fp == 0.0 {
            break;
        }
        let step = f / fp;
        x -= step;
        if step.abs() < 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Spectral gap `mu0 = min(lambda3, -lambda2, -lambda1)`. Admissible weight
/// exponents satisfy `0 < mu < mu0`.
pub fn spectral_gap_mu0(roots: &RootTriple) -> f64 {
    roots.lambda3.min(-roots.lambda2).min(-roots.lambda1)
}

/// Find the two positive roots of `delta_r` by sign-change bracketing on
/// `(0, Lambda]` with `Lambda = 1 + D/c + 1/c`, then bisection.
///
/// `delta_r(0) = 1 > 0` and `delta_r > 0` beyond the scan bound, so positive
/// roots come in pairs; finding fewer than two means the speed is below the
/// minimal speed for this diffusion coefficient.
pub fn solve_delayed_positive_roots(params: &DelayedCharParams) -> Result<PositiveRootPair> {
    let bound = 1.0 + params.d / params.c + 1.0 / params.c;
    let steps = (bound / SCAN_STEP).ceil() as usize;
    let mut roots = Vec::new();
    let mut prev_x = 0.0;
    let mut prev_f = eval_delta_r(params, 0.0);
    for i in 1..=steps {
        let x = (i as f64) * SCAN_STEP;
        let f = eval_delta_r(params, x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * f < 0.0 {
            roots.push(bisect(params, prev_x, x, prev_f));
        }
        prev_x = x;
        prev_f = f;
        if roots.len() == 2 {
            break;
        }
    }
    if roots.len() < 2 {
        return Err(Error::NoPositivePair(format!(
            "no sign change pair of delta_r on (0, {bound:.3}] at (c, D, r) = ({}, {}, {})",
            params.c, params.d, params.r
        )));
    }
    Ok(PositiveRootPair { eta1: roots[0], eta2: roots[1] })
}

fn bisect(params: &DelayedCharParams, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let mut sign_a = fa.signum();
    while b - a > BISECT_TOL {
        let mid = 0.5 * (a + b);
        let fm = eval_delta_r(params, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sign_a {
            a = mid;
            sign_a = fm.signum();
        } else {
            b = mid;
        }
    }
    // Newton polish to bring the residual down to roundoff.
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let f = eval_delta_r(params, x);
        let fp = (3.0 * params.c * x + 2.0 * params.d) * x - params.c
            - params.r * (-x * params.r).exp();
        if fp == 0.0 {
            break;
        }
        x -= f / fp;
    }
    x
}

/// Validate an offset `eps` before the subsolution construction: requires
/// `eta1 + eps < eta2` and reports whether `delta_r(eta1 + eps) < 0`.
pub fn check_epsilon_window(
    params: &DelayedCharParams,
    eta1: f64,
    eta2: f64,
    eps: f64,
) -> Result<bool> {
    if !(eps > 0.0) || eta1 + eps >= eta2 {
        return Err(Error::InvalidEpsilon(format!(
            "need 0 < eps and eta1 + eps < eta2; got eta1 = {eta1}, eps = {eps}, eta2 = {eta2}"
        )));
    }
    Ok(eval_delta_r(params, eta1 + eps) < 0.0)
}
