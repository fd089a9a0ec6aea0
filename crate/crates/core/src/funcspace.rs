//! Grid profiles with declared asymptotic states, weighted norms, the
//! pointwise partial order, and finite differences.
//!
//! The real line is truncated to a uniform symmetric grid on [-L, L]; beyond
//! the grid a profile extends by its constant asymptotic states. Weighted
//! norms therefore carry an explicit tail bound `max(|left|, |right|) e^(-mu L)`
//! in addition to the grid maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform symmetric grid of `2 round(L/h) + 1` points covering [-L, L].
///
/// The stored half width is `round(L/h) * h`, so node coordinates are exact
/// multiples of the spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_steps: usize,
    h: f64,
}

impl Grid {
    pub fn new(half_width: f64, h: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need L > 0 and h > 0, got L = {half_width}, h = {h}"
            )));
        }
        let m = (half_width / h).round() as usize;
        if m == 0 {
            return Err(Error::GridTooSmall(format!(
                "half width {half_width} shorter than one spacing {h}"
            )));
        }
        Ok(Self { half_steps: m, h })
    }

    pub fn len(&self) -> usize {
        2 * self.half_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_steps as f64 * self.h
    }

    /// Coordinate of node `i`, with the center node at zero.
    pub fn xi(&self, i: usize) -> f64 {
        (i as f64 - self.half_steps as f64) * self.h
    }

    pub fn xis(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.xi(i))
    }
}

/// A grid function together with its declared limits at -inf and +inf.
#[derive(Debug, Clone)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub left_state: f64,
    pub right_state: f64,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>, left_state: f64, right_state: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, left_state, right_state })
    }

    /// Build a profile by sampling a function at the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64, left_state: f64, right_state: f64) -> Self {
        let values = grid.xis().map(f).collect();
        Self { grid, values, left_state, right_state }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()], left_state: value, right_state: value }
    }
}

/// Exponentially weighted supremum norm `sup e^(-mu |xi|) |phi(xi)|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub mu: f64,
}

impl WeightedNorm {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParams(format!("need mu > 0, got {mu}")));
        }
        Ok(Self { mu })
    }
}

/// Weighted sup norm over the grid plus the constant-extension tail bound.
pub fn weighted_norm(p: &Profile, w: &WeightedNorm) -> f64 {
    let mut max = 0.0f64;
    for (i, v) in p.values.iter().enumerate() {
        let xi = p.grid.xi(i);
        max = max.max((-w.mu * xi.abs()).exp() * v.abs());
    }
    let tail = p.left_state.abs().max(p.right_state.abs())
        * (-w.mu * p.grid.half_width()).exp();
    max.max(tail)
}

/// Unweighted sup norm over the grid values.
pub fn sup_norm(p: &Profile) -> f64 {
    p.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest pointwise difference `max_i (p_i - q_i)`; requires equal grids.
pub fn max_difference(p: &Profile, q: &Profile) -> Result<f64> {
    require_same_grid(p, q)?;
    Ok(p.values
        .iter()
        .zip(&q.values)
        .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b)))
}

/// Sup norm of the difference of two profiles on a shared grid.
pub fn sup_distance(p: &Profile, q: &Profile) -> Result<f64> {
    require_same_grid(p, q)?;
    Ok(p.values
        .iter()
        .zip(&q.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Weighted sup norm of the difference of two profiles on a shared grid.
pub fn weighted_distance(p: &Profile, q: &Profile, w: &WeightedNorm) -> Result<f64> {
    require_same_grid(p, q)?;
    let mut max = 0.0f64;
    for (i, (a, b)) in p.values.iter().zip(&q.values).enumerate() {
        let xi = p.grid.xi(i);
        max = max.max((-w.mu * xi.abs()).exp() * (a - b).abs());
    }
    Ok(max)
}

fn require_same_grid(p: &Profile, q: &Profile) -> Result<()> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch(format!(
            "grids differ: {:?} vs {:?}",
            p.grid, q.grid
        )));
    }
    Ok(())
}

/// Classification of the pointwise relation between two profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileOrder {
    Equal,
    Leq,
    Geq,
    Incomparable,
}

pub fn pointwise_order(p: &Profile, q: &Profile, tol: f64) -> Result<ProfileOrder> {
    require_same_grid(p, q)?;
    let mut leq = true;
    let mut geq = true;
    for (a, b) in p.values.iter().zip(&q.values) {
        if a - b > tol {
            leq = false;
        }
        if b - a > tol {
            geq = false;
        }
        if !leq && !geq {
            return Ok(ProfileOrder::Incomparable);
        }
    }
    Ok(match (leq, geq) {
        (true, true) => ProfileOrder::Equal,
        (true, false) => ProfileOrder::Leq,
        (false, true) => ProfileOrder::Geq,
        (false, false) => ProfileOrder::Incomparable,
    })
}

/// Tolerances for membership in the set of monotone connecting profiles.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaTolerance {
    /// Largest tolerated single-step decrease.
    pub monotonicity: f64,
    /// Largest tolerated gap between the end values and the states 0 and K.
    pub endpoint: f64,
}

impl Default for GammaTolerance {
    fn default() -> Self {
        // Endpoint convergence is exponential but truncated at L, hence the
        // looser endpoint tolerance.
        Self { monotonicity: 1e-6, endpoint: 1e-4 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub in_gamma: bool,
    /// Worst single-step decrease, positive when the profile dips.
    pub worst_monotonicity_violation: f64,
    pub left_gap: f64,
    pub right_gap: f64,
}

/// Check that a profile is nondecreasing and connects 0 (left) to `k` (right).
pub fn is_in_gamma(p: &Profile, k: f64, tol: GammaTolerance) -> GammaReport {
    let mut worst = 0.0f64;
    for w in p.values.windows(2) {
        worst = worst.max(w[0] - w[1]);
    }
    let left_gap = p.values.first().map_or(f64::INFINITY, |v| v.abs());
    let right_gap = p.values.last().map_or(f64::INFINITY, |v| (v - k).abs());
    GammaReport {
        in_gamma: worst <= tol.monotonicity
            && left_gap <= tol.endpoint
            && right_gap <= tol.endpoint,
        worst_monotonicity_violation: worst,
        left_gap,
        right_gap,
    }
}

/// Evaluate a profile anywhere: linear interpolation inside the grid and the
/// declared constant states outside. Delayed reads `phi(xi - r)` use this.
pub fn sample_at(p: &Profile, xi: f64) -> f64 {
    let l = p.grid.half_width();
    if xi < -l {
        return p.left_state;
    }
    if xi > l {
        return p.right_state;
    }
    let pos = (xi + l) / p.grid.spacing();
    // Snap reads that land on a node up to roundoff, so node coordinates
    // reproduce stored values exactly.
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 {
        return p.values[nearest as usize];
    }
    let i = pos.floor() as usize;
    if i + 1 >= p.values.len() {
        return *p.values.last().unwrap();
    }
    let frac = pos - i as f64;
    p.values[i] * (1.0 - frac) + p.values[i + 1] * frac
}

/// Derivative order for [`finite_diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
    Third,
}

/// Centered finite differences: fourth-order stencils in the interior,
/// second-order one-sided stencils at the three points nearest each boundary.
/// The derivative of the constant extensions is zero, so the output states
/// are zero.
pub fn finite_diff(p: &Profile, order: DiffOrder) -> Result<Profile> {
    let n = p.values.len();
    if n < 7 {
        return Err(Error::GridTooSmall(format!(
            "finite differences need at least 7 points, grid has {n}"
        )));
    }
    let h = p.grid.spacing();
    let v = &p.values;
    let mut out = vec![0.0; n];
    match order {
        DiffOrder::First => {
            for i in 3..n - 3 {
                out[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
            }
            for i in 0..3 {
                out[i] = (-3.0 * v[i] + 4.0 * v[i + 1] - v[i + 2]) / (2.0 * h);
                let j = n - 1 - i;
                out[j] = (3.0 * v[j] - 4.0 * v[j - 1] + v[j - 2]) / (2.0 * h);
            }
        }
        DiffOrder::Second => {
            let h2 = h * h;
            for i in 3..n - 3 {
                out[i] = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1]
                    - v[i - 2])
                    / (12.0 * h2);
            }
            for i in 0..3 {
                out[i] = (2.0 * v[i] - 5.0 * v[i + 1] + 4.0 * v[i + 2] - v[i + 3]) / h2;
                let j = n - 1 - i;
                out[j] = (2.0 * v[j] - 5.0 * v[j - 1] + 4.0 * v[j - 2] - v[j - 3]) / h2;
            }
        }
        DiffOrder::Third => {
            let h3 = h * h * h;
            for i in 3..n - 3 {
                out[i] = (v[i - 3] - 8.0 * v[i - 2] + 13.0 * v[i - 1] - 13.0 * v[i + 1]
                    + 8.0 * v[i + 2]
                    - v[i + 3])
                    / (8.0 * h3);
            }
            for i in 0..3 {
                out[i] = (-2.5 * v[i] + 9.0 * v[i + 1] - 12.0 * v[i + 2] + 7.0 * v[i + 3]
                    - 1.5 * v[i + 4])
                    / h3;
                let j = n - 1 - i;
                out[j] = (2.5 * v[j] - 9.0 * v[j - 1] + 12.0 * v[j - 2] - 7.0 * v[j - 3]
                    + 1.5 * v[j - 4])
                    / h3;
            }
        }
    }
    Profile::new(p.grid, out, 0.0, 0.0)
}

/// Serialize a profile as `xi,value` CSV (RFC-style, header row included).
pub fn profile_to_csv(p: &Profile) -> String {
    let mut s = String::with_capacity(p.values.len() * 24 + 16);
    s.push_str("xi,value\n");
    for (i, v) in p.values.iter().enumerate() {
        s.push_str(&format!("{},{}\n", p.grid.xi(i), v));
    }
    s
}

/// Grid metadata, states and norms stored next to a profile CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub half_width: f64,
    pub spacing: f64,
    pub points: usize,
    pub left_state: f64,
    pub right_state: f64,
    pub sup_norm: f64,
    pub weighted_mu: Option<f64>,
    pub weighted_norm: Option<f64>,
}

pub fn profile_meta(p: &Profile, mu: Option<f64>) -> ProfileMeta {
    let (weighted_mu, weighted) = match mu {
        Some(mu) => {
            let w = WeightedNorm { mu };
            (Some(mu), Some(weighted_norm(p, &w)))
        }
        None => (None, None),
    };
    ProfileMeta {
        half_width: p.grid.half_width(),
        spacing: p.grid.spacing(),
        points: p.grid.len(),
        left_state: p.left_state,
        right_state: p.right_state,
        sup_norm: sup_norm(p),
        weighted_mu,
        weighted_norm: weighted,
    }
}

/// Parse a profile from `xi,value` CSV plus the declared states.
pub fn profile_from_csv(csv: &str, left_state: f64, right_state: f64) -> Result<Profile> {
    let mut xis = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in csv.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("xi")) {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            Error::InvalidParams(format!("profile CSV line {} lacks a comma", lineno + 1))
        })?;
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| {
                Error::InvalidParams(format!("profile CSV line {}: {e}", lineno + 1))
            })
        };
        xis.push(parse(a)?);
        values.push(parse(b)?);
    }
    if xis.len() < 3 {
        return Err(Error::GridTooSmall(format!("profile CSV has only {} rows", xis.len())));
    }
    let h = xis[1] - xis[0];
    if !(h > 0.0) {
        return Err(Error::InvalidParams("profile CSV xi column is not increasing".into()));
    }
    for w in xis.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InvalidParams("profile CSV grid is not uniform".into()));
        }
    }
    let half = -xis[0];
    if (half - *xis.last().unwrap()).abs() > 1e-9 {
        return Err(Error::InvalidParams("profile CSV grid is not symmetric about 0".into()));
    }
    let grid = Grid::new(half, h)?;
    Profile::new(grid, values, left_state, right_state)
}
