//! Closed-form Green's function of the beta-shifted linear operator.
//!
//! With three distinct real characteristic roots `lambda1 < lambda2 < 0 <
//! lambda3` the kernel is piecewise exponential,
//!
//! ```text
//! G(xi) = A3 e^(lambda3 xi)                      for xi < 0,
//! G(xi) = -(A1 e^(lambda1 xi) + A2 e^(lambda2 xi))  for xi >= 0,
//! ```
//!
//! with `Ai = -1 / (c prod_{j != i} (lambda_i - lambda_j))`. The kernel is kept
//! in this symbolic form, never sampled into an array, so convolution tails and
//! integrals use exact exponential antiderivatives. G and G' are continuous at
//! zero and G'' jumps by `1/c` there; G is strictly negative everywhere.

use serde::Serialize;

use crate::charpoly::{PolyParams, RootTriple};
use crate::error::{Error, Result};

/// Relative tolerance for the matching-condition residuals at construction.
const MATCH_REL_TOL: f64 = 1e-12;

/// Selects a one-sided limit at the kernel kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Immutable piecewise-exponential kernel; safe to share across threads.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    params: PolyParams,
    roots: RootTriple,
    a1: f64,
    a2: f64,
    a3: f64,
    /// Exponential decay rate min(-lambda2, lambda3); weights must satisfy mu < gamma.
    gamma: f64,
}

/// Residuals of the matching conditions and the total-integral identity.
#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub m1_residual: f64,
    pub m2_residual: f64,
    pub m3_jump: f64,
    pub m3_residual: f64,
    pub total_integral: f64,
    pub total_integral_residual: f64,
    pub decay_rate: f64,
}

/// Assemble the kernel from a solved root triple.
pub fn build_kernel(params: &PolyParams, roots: &RootTriple) -> Result<GreenKernel> {
    let (l1, l2, l3) = (roots.lambda1, roots.lambda2, roots.lambda3);
    for (a, b) in [(l1, l2), (l2, l3), (l1, l3)] {
        let gap = (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
        if gap < 1e-9 {
            return Err(Error::DistinctRealRootsRequired(format!(
                "kernel coefficients divide by root gaps; roots {a} and {b} are within {gap:.3e}"
            )));
        }
    }
    let c = params.c;
    let a1 = -1.0 / (c * (l1 - l2) * (l1 - l3));
    let a2 = -1.0 / (c * (l2 - l1) * (l2 - l3));
    let a3 = -1.0 / (c * (l3 - l1) * (l3 - l2));
    let kernel = GreenKernel { params: *params, roots: *roots, a1, a2, a3, gamma: (-l2).min(l3) };

    // Structural invariants; these hold algebraically, so a violation means a
    // bad root triple rather than roundoff.
    if !(a1 < 0.0 && a2 > 0.0 && a3 < 0.0) {
        return Err(Error::InvalidParams(format!(
            "kernel coefficient signs wrong: A1 = {a1}, A2 = {a2}, A3 = {a3}"
        )));
    }
    let r = kernel.report();
    let scale = 1f64.max(a1.abs()).max(a2.abs()).max(a3.abs());
    if r.m1_residual > MATCH_REL_TOL * scale
        || r.m2_residual > MATCH_REL_TOL * scale.max(1.0 / c)
        || r.m3_residual > MATCH_REL_TOL * scale.max(1.0 / c)
    {
        return Err(Error::InvalidParams(format!(
            "matching conditions violated: M1 {:.3e}, M2 {:.3e}, M3 {:.3e}",
            r.m1_residual, r.m2_residual, r.m3_residual
        )));
    }
    Ok(kernel)
}

impl GreenKernel {
    pub fn params(&self) -> &PolyParams {
        &self.params
    }

    pub fn roots(&self) -> &RootTriple {
        &self.roots
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a1, self.a2, self.a3)
    }

    /// Decay rate gamma = min(-lambda2, lambda3); |G(xi)| <= C e^(-gamma |xi|).
    pub fn decay_rate(&self) -> f64 {
        self.gamma
    }

    /// Kernel value. At xi = 0 the two branches agree by the continuity
    /// condition; the common value is returned.
    pub fn eval(&self, xi: f64) -> f64 {
        if xi < 0.0 {
            self.a3 * (self.roots.lambda3 * xi).exp()
        } else {
            -(self.a1 * (self.roots.lambda1 * xi).exp()
                + self.a2 * (self.roots.lambda2 * xi).exp())
        }
    }

    /// First derivative; continuous everywhere, so no side is needed.
    pub fn eval_deriv1(&self, xi: f64) -> f64 {
        if xi < 0.0 {
            self.a3 * self.roots.lambda3 * (self.roots.lambda3 * xi).exp()
        } else {
            -(self.a1 * self.roots.lambda1 * (self.roots.lambda1 * xi).exp()
                + self.a2 * self.roots.lambda2 * (self.roots.lambda2 * xi).exp())
        }
    }

    /// One-sided (G, G', G'') at xi. Away from zero both sides agree; at zero
    /// the side picks the branch, exposing the second-derivative jump.
    pub fn eval_derivs(&self, xi: f64, side: Side) -> (f64, f64, f64) {
        let use_left = xi < 0.0 || (xi == 0.0 && side == Side::Left);
        if use_left {
            let l3 = self.roots.lambda3;
            let e = (l3 * xi).exp();
            (self.a3 * e, self.a3 * l3 * e, self.a3 * l3 * l3 * e)
        } else {
            let (l1, l2) = (self.roots.lambda1, self.roots.lambda2);
            let e1 = (l1 * xi).exp();
            let e2 = (l2 * xi).exp();
            (
                -(self.a1 * e1 + self.a2 * e2),
                -(self.a1 * l1 * e1 + self.a2 * l2 * e2),
                -(self.a1 * l1 * l1 * e1 + self.a2 * l2 * l2 * e2),
            )
        }
    }

    /// Closed-form total integral `A3/lambda3 + A1/lambda1 + A2/lambda2`,
    /// which equals `-1/beta`.
    pub fn total_integral(&self) -> f64 {
        self.a3 / self.roots.lambda3
            + self.a1 / self.roots.lambda1
            + self.a2 / self.roots.lambda2
    }

    /// Exact integral of G over `(-inf, x]`.
    pub fn integral_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.a3 / self.roots.lambda3 * (self.roots.lambda3 * x).exp()
        } else {
            self.total_integral() - self.integral_right(x)
        }
    }

    /// Exact integral of G over `[x, inf)`.
    pub fn integral_right(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.a1 / self.roots.lambda1 * (self.roots.lambda1 * x).exp()
                + self.a2 / self.roots.lambda2 * (self.roots.lambda2 * x).exp()
        } else {
            self.total_integral() - self.integral_left(x)
        }
    }

    /// Exact tail integral of `G(t - s)` over `s` on one side of `cut`:
    /// `Side::Left` integrates `s` over `(-inf, cut]`, `Side::Right` over
    /// `[cut, inf)`.
    pub fn tail_mass(&self, t: f64, cut: f64, side: Side) -> f64 {
        let u0 = t - cut;
        match side {
            Side::Left => self.integral_right(u0),
            Side::Right => self.integral_left(u0),
        }
    }

    /// Largest sampled kernel value on `[-half_range, half_range]`; strictly
    /// negative kernels report a negative maximum.
    pub fn max_sampled_value(&self, samples: usize, half_range: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for i in 0..samples {
            let xi = -half_range + 2.0 * half_range * (i as f64) / (samples as f64 - 1.0);
            max = max.max(self.eval(xi));
        }
        max
    }

    /// Matching-condition residuals and integral identities.
    pub fn report(&self) -> KernelReport {
        let (l1, l2, l3) = (self.roots.lambda1, self.roots.lambda2, self.roots.lambda3);
        let (a1, a2, a3) = (self.a1, self.a2, self.a3);
        let m1 = (a3 + (a1 + a2)).abs();
        let m2 = (a3 * l3 + (a1 * l1 + a2 * l2)).abs();
        // Jump of G'' across zero: right minus left.
        let m3_jump = -(a1 * l1 * l1 + a2 * l2 * l2) - a3 * l3 * l3;
        let total = self.total_integral();
        KernelReport {
            lambda1: l1,
            lambda2: l2,
            lambda3: l3,
            a1,
            a2,
            a3,
            m1_residual: m1,
            m2_residual: m2,
            m3_jump,
            m3_residual: (m3_jump - 1.0 / self.params.c).abs(),
            total_integral: total,
            total_integral_residual: (total + 1.0 / self.params.beta).abs(),
            decay_rate: self.gamma,
        }
    }

    /// Quadrature check that the kernel solves `L G = delta`: convolves G with
    /// `L psi` for a Gaussian bump `psi(s) = exp(-s^2 / width^2)` and returns
    /// the largest deviation of the convolution from `psi` over sampled t.
    ///
    /// The oracle deliberately uses a plain trapezoid sum, independent of the
    /// production convolution path.
    pub fn green_identity_check(&self, width: f64, h: f64) -> f64 {
        let p = &self.params;
        let w2 = width * width;
        let psi = |s: f64| (-s * s / w2).exp();
        let l_psi = |s: f64| {
            let e = psi(s);
            let d1 = -2.0 * s / w2 * e;
            let d2 = (4.0 * s * s / (w2 * w2) - 2.0 / w2) * e;
            let d3 = (-8.0 * s * s * s / (w2 * w2 * w2) + 12.0 * s / (w2 * w2)) * e;
            p.alpha * p.c * d3 + p.d * d2 - p.c * d1 - p.beta * e
        };
        // The bump is dead beyond 8 widths; truncating there loses ~e^-64.
        let span = 8.0 * width;
        let m = (span / h).round() as i64;
        let mut worst: f64 = 0.0;
        // Sample t on grid nodes so the kernel kink falls on a node.
        let t_step = (m / 10).max(1);
        let mut ti = -m;
        while ti <= m {
            let t = ti as f64 * h;
            let mut acc = 0.0;
            for j in -m..=m {
                let s = j as f64 * h;
                let weight = if j == -m || j == m { 0.5 } else { 1.0 };
                acc += weight * self.eval(t - s) * l_psi(s);
            }
            worst = worst.max((acc * h - psi(t)).abs());
            ti += t_step;
        }
        worst
    }
}
