//! Explicit quasi super- and sub-solutions for the delayed logistic profile
//! equation, their pointwise verification, and the maximal-delay scan.
//!
//! The super-solution is `1/2 e^(eta1 xi)` left of zero and `1 - 1/2 e^(-eta1 xi)`
//! right of zero, C1 at the joint. The sub-solution is
//! `1/2 (1 - q e^(eps xi)) e^(eta1 xi)` left of `xi1` and the constant plateau
//! `d1` beyond it; `xi1` is placed at the left-branch maximizer so the joint
//! is C1 with zero slope and `d1` is as large as the branch allows.
//!
//! Verification evaluates the differential inequality with the exact piecewise
//! derivatives of the closed forms, not finite differences; the inequalities
//! are marginal near the case boundaries and stencil error would produce
//! false failures there.

use serde::Serialize;

use crate::charpoly::{
    check_epsilon_window, eval_delta0, eval_delta_r, solve_delayed_positive_roots,
    DelayedCharParams,
};
use crate::error::{Error, Result};
use crate::funcspace::{Grid, Profile};
use crate::waveop::Reaction;

/// Analytic pass tolerance for the differential inequalities.
pub const VERIFY_TOL: f64 = 1e-10;

/// Parameters of the super-solution: the smaller positive root of `delta_r`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuperSolutionParams {
    pub eta1: f64,
}

impl SuperSolutionParams {
    pub fn new(eta1: f64) -> Result<Self> {
        if !(eta1 > 0.0) {
            return Err(Error::InvalidParams(format!("need eta1 > 0, got {eta1}")));
        }
        Ok(Self { eta1 })
    }

    /// Closed-form value.
    pub fn value(&self, xi: f64) -> f64 {
        if xi < 0.0 {
            0.5 * (self.eta1 * xi).exp()
        } else {
            1.0 - 0.5 * (-self.eta1 * xi).exp()
        }
    }

    /// One-sided derivatives (phi, phi', phi'', phi''') at `xi`; the side only
    /// matters at the joint xi = 0 where phi'' jumps sign.
    pub fn derivs(&self, xi: f64, left: bool) -> (f64, f64, f64, f64) {
        let e = self.eta1;
        if xi < 0.0 || (xi == 0.0 && left) {
            let v = 0.5 * (e * xi).exp();
            (v, e * v, e * e * v, e * e * e * v)
        } else {
            let w = 0.5 * (-e * xi).exp();
            (1.0 - w, e * w, -e * e * w, e * e * e * w)
        }
    }
}

/// Parameters of the sub-solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubSolutionParams {
    pub eta1: f64,
    pub eps: f64,
    pub q: f64,
    pub xi1: f64,
    /// Plateau value `1/2 (1 - q e^(eps xi1)) e^(eta1 xi1)`, in (0, 1).
    pub d1: f64,
}

impl SubSolutionParams {
    pub fn new(eta1: f64, eps: f64, q: f64, xi1: f64) -> Result<Self> {
        if !(eta1 > 0.0) || !(eps > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need eta1 > 0 and eps > 0, got eta1 = {eta1}, eps = {eps}"
            )));
        }
        if !(q >= 1.0) {
            return Err(Error::InvalidParams(format!("need q >= 1, got {q}")));
        }
        if !(xi1 < 0.0) {
            return Err(Error::InvalidParams(format!("need xi1 < 0, got {xi1}")));
        }
        let d1 = 0.5 * (1.0 - q * (eps * xi1).exp()) * (eta1 * xi1).exp();
        if !(d1 > 0.0 && d1 < 1.0) {
            return Err(Error::InvalidPlateau(format!(
                "d1 = {d1} not in (0, 1) for eta1 = {eta1}, eps = {eps}, q = {q}, xi1 = {xi1}"
            )));
        }
        Ok(Self { eta1, eps, q, xi1, d1 })
    }

    pub fn value(&self, xi: f64) -> f64 {
        if xi < self.xi1 {
            0.5 * (1.0 - self.q * (self.eps * xi).exp()) * (self.eta1 * xi).exp()
        } else {
            self.d1
        }
    }

    /// One-sided derivatives; the side only matters at the joint `xi1`.
    pub fn derivs(&self, xi: f64, left: bool) -> (f64, f64, f64, f64) {
        if xi < self.xi1 || (xi == self.xi1 && left) {
            let (e, s) = (self.eta1, self.eta1 + self.eps);
            let ee = 0.5 * (e * xi).exp();
            let es = 0.5 * self.q * (s * xi).exp();
            (
                ee - es,
                e * ee - s * es,
                e * e * ee - s * s * es,
                e * e * e * ee - s * s * s * es,
            )
        } else {
            (self.d1, 0.0, 0.0, 0.0)
        }
    }
}

/// Sample the super-solution on a grid; the result lies in Gamma.
pub fn build_supersolution(sp: &SuperSolutionParams, grid: &Grid) -> Profile {
    Profile::from_fn(*grid, |xi| sp.value(xi), 0.0, 1.0)
}

/// Sample the sub-solution on a grid. Its right state is the plateau `d1`,
/// not 1, so it is deliberately outside Gamma.
pub fn build_subsolution(sp: &SubSolutionParams, grid: &Grid) -> Result<Profile> {
    if !(sp.d1 > 0.0 && sp.d1 < 1.0) {
        return Err(Error::InvalidPlateau(format!("d1 = {} not in (0, 1)", sp.d1)));
    }
    Ok(Profile::from_fn(*grid, |xi| sp.value(xi), 0.0, sp.d1))
}

/// Default sub-solution parameters from the positive root pair.
///
/// `eps` is the midpoint of the admissible window capped at `eta1`: for
/// `eps > eta1` the quadratic term `phi^2 ~ e^(2 eta1 xi)` decays slower than
/// the stabilizing `q |delta_r(eta1 + eps)| e^((eta1 + eps) xi)` term as
/// `xi -> -inf`, and no choice of q rescues the inequality. `q` takes the
/// bound `max(1, -1/(2 delta_0(eta1 + eps)))` plus a 0.1 margin that absorbs
/// the delay perturbation, and `xi1` sits at the left-branch maximizer, which
/// makes the joint C1 and maximizes the plateau.
pub fn default_sub_params(
    pair: &crate::charpoly::PositiveRootPair,
    params: &DelayedCharParams,
) -> Result<SubSolutionParams> {
    let eta1 = pair.eta1;
    let eps = (0.5 * (pair.eta2 - eta1)).min(eta1);
    if !check_epsilon_window(params, eta1, pair.eta2, eps)? {
        return Err(Error::InvalidEpsilon(format!(
            "delta_r({}) >= 0 at the default eps = {eps}",
            eta1 + eps
        )));
    }
    let d0 = eval_delta0(params, eta1 + eps);
    let dr = eval_delta_r(params, eta1 + eps);
    let q_bound = if d0 < 0.0 {
        (-1.0 / (2.0 * d0)).max(1.0)
    } else {
        // The cubic bound degenerates for shifted roots at larger delays;
        // fall back on the delayed characteristic, which the window check
        // guarantees is negative here.
        (-1.0 / (2.0 * dr)).max(1.0)
    };
    let q = q_bound + 0.1;
    let xi1 = (eta1 / (q * (eta1 + eps))).ln() / eps;
    SubSolutionParams::new(eta1, eps, q, xi1)
}

/// Outcome of one differential-inequality verification, split by proof case.
#[derive(Debug, Clone, Serialize)]
pub struct BoundVerification {
    /// Worst value in the pass direction: max LHS for the super-solution,
    /// min LHS for the sub-solution.
    pub worst: f64,
    /// Extremal LHS per proof case; None when no sample fell in the case.
    pub case1: Option<f64>,
    pub case2: Option<f64>,
    pub case3: Option<f64>,
    pub pass: bool,
}

fn fold_case(slot: &mut Option<f64>, value: f64, take_max: bool) {
    *slot = Some(match *slot {
        None => value,
        Some(cur) => {
            if take_max {
                cur.max(value)
            } else {
                cur.min(value)
            }
        }
    });
}

/// Verify `c phi''' + D phi'' - c phi' + f(phi(xi), phi(xi - r)) <= 0` for the
/// super-solution, with analytic derivatives, at every grid point plus both
/// sides of the joint. Cases: xi < 0, 0 <= xi < r, xi >= r.
pub fn verify_supersolution(
    sp: &SuperSolutionParams,
    ch: &DelayedCharParams,
    re: &Reaction,
    grid: &Grid,
) -> BoundVerification {
    let r = re.delay_r;
    let mut worst = f64::NEG_INFINITY;
    let (mut c1, mut c2, mut c3) = (None, None, None);
    let mut eval = |xi: f64, left: bool| {
        let (v, d1, d2, d3) = sp.derivs(xi, left);
        let lhs = ch.c * d3 + ch.d * d2 - ch.c * d1 + re.apply(v, sp.value(xi - r));
        worst = worst.max(lhs);
        let slot = if xi < 0.0 || (xi == 0.0 && left) {
            &mut c1
        } else if xi < r {
            &mut c2
        } else {
            &mut c3
        };
        fold_case(slot, lhs, true);
    };
    for xi in grid.xis() {
        eval(xi, xi <= 0.0);
    }
    // Both one-sided limits at the joint.
    eval(0.0, true);
    eval(0.0, false);
    BoundVerification { worst, case1: c1, case2: c2, case3: c3, pass: worst <= VERIFY_TOL }
}

/// Verify the reversed inequality (>= 0) for the sub-solution. Cases:
/// xi < xi1, xi1 <= xi < xi1 + r, xi >= xi1 + r.
pub fn verify_subsolution(
    sp: &SubSolutionParams,
    ch: &DelayedCharParams,
    re: &Reaction,
    grid: &Grid,
) -> BoundVerification {
    let r = re.delay_r;
    let mut worst = f64::INFINITY;
    let (mut c1, mut c2, mut c3) = (None, None, None);
    let mut eval = |xi: f64, left: bool| {
        let (v, d1, d2, d3) = sp.derivs(xi, left);
        let lhs = ch.c * d3 + ch.d * d2 - ch.c * d1 + re.apply(v, sp.value(xi - r));
        worst = worst.min(lhs);
        let slot = if xi < sp.xi1 || (xi == sp.xi1 && left) {
            &mut c1
        } else if xi < sp.xi1 + r {
            &mut c2
        } else {
            &mut c3
        };
        fold_case(slot, lhs, false);
    };
    for xi in grid.xis() {
        eval(xi, xi <= sp.xi1);
    }
    eval(sp.xi1, true);
    eval(sp.xi1, false);
    BoundVerification { worst, case1: c1, case2: c2, case3: c3, pass: worst >= -VERIFY_TOL }
}

/// One row of the delay scan.
#[derive(Debug, Clone, Serialize)]
pub struct DelaySample {
    pub r: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub super_worst: f64,
    pub sub_worst: f64,
    pub pass: bool,
}

/// Result of scanning the delay upward from zero.
#[derive(Debug, Clone, Serialize)]
pub struct DelayScan {
    /// Largest delay on the grid for which construction and both
    /// verifications pass.
    pub r_star: f64,
    /// True when some delay below `r_star` failed, i.e. the passing set is
    /// not an interval starting at zero.
    pub non_monotone: bool,
    pub samples: Vec<DelaySample>,
}

/// Scan delays `r = 0, step, 2 step, ... <= cap`, rebuilding roots and both
/// bounds at each delay, and report the largest passing delay. The paper-side
/// thresholds are existential only, so the scan is the operational substitute.
pub fn find_max_delay(c: f64, d: f64, grid: &Grid, cap: f64, step: f64) -> Result<DelayScan> {
    if !(cap > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidParams(format!("need cap, step > 0, got {cap}, {step}")));
    }
    let steps = (cap / step).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let r = i as f64 * step;
        match delay_sample(c, d, r, grid) {
            Ok(s) => samples.push(s),
            Err(e) => {
                if i == 0 {
                    return Err(Error::BaseCaseFails(e.to_string()));
                }
                samples.push(DelaySample {
                    r,
                    eta1: f64::NAN,
                    eta2: f64::NAN,
                    super_worst: f64::NAN,
                    sub_worst: f64::NAN,
                    pass: false,
                });
            }
        }
    }
    if !samples[0].pass {
        return Err(Error::BaseCaseFails(format!(
            "verification fails already at r = 0: super worst {:.3e}, sub worst {:.3e}",
            samples[0].super_worst, samples[0].sub_worst
        )));
    }
    let r_star = samples.iter().filter(|s| s.pass).map(|s| s.r).fold(0.0f64, f64::max);
    let non_monotone = samples.iter().any(|s| !s.pass && s.r < r_star);
    Ok(DelayScan { r_star, non_monotone, samples })
}

fn delay_sample(c: f64, d: f64, r: f64, grid: &Grid) -> Result<DelaySample> {
    let ch = DelayedCharParams::new(c, d, r)?;
    let pair = solve_delayed_positive_roots(&ch)?;
    let re = Reaction::delayed_logistic(r)?;
    let sup = SuperSolutionParams::new(pair.eta1)?;
    let sub = default_sub_params(&pair, &ch)?;
    let sv = verify_supersolution(&sup, &ch, &re, grid);
    let bv = verify_subsolution(&sub, &ch, &re, grid);
    Ok(DelaySample {
        r,
        eta1: pair.eta1,
        eta2: pair.eta2,
        super_worst: sv.worst,
        sub_worst: bv.worst,
        pass: sv.pass && bv.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::solve_delayed_positive_roots;
    use crate::funcspace::{is_in_gamma, pointwise_order, GammaTolerance, ProfileOrder};

    fn reference() -> (DelayedCharParams, crate::charpoly::PositiveRootPair) {
        let ch = DelayedCharParams::new(10.0, 1.0, 0.0).unwrap();
        let pair = solve_delayed_positive_roots(&ch).unwrap();
        (ch, pair)
    }

    #[test]
    fn supersolution_shape() {
        let (_, pair) = reference();
        let sp = SuperSolutionParams::new(pair.eta1).unwrap();
        assert_eq!(sp.value(0.0), 0.5);
        let grid = Grid::new(100.0, 0.01).unwrap();
        let p = build_supersolution(&sp, &grid);
        assert!(is_in_gamma(&p, 1.0, GammaTolerance::default()).in_gamma);
        // C1 joint: both one-sided slopes are eta1 / 2.
        let (_, dl, _, _) = sp.derivs(0.0, true);
        let (_, dr, _, _) = sp.derivs(0.0, false);
        assert!((dl - pair.eta1 / 2.0).abs() < 1e-15);
        assert!((dr - pair.eta1 / 2.0).abs() < 1e-15);
        // Asymptotics.
        assert!(sp.value(-200.0) < 1e-8);
        assert!((sp.value(200.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn default_sub_params_validate() {
        let (ch, pair) = reference();
        let sp = default_sub_params(&pair, &ch).unwrap();
        assert!(sp.eps > 0.0 && sp.eta1 + sp.eps < pair.eta2);
        assert!(sp.eps <= sp.eta1);
        assert!(sp.q >= 1.0);
        assert!(sp.xi1 < 0.0);
        assert!(sp.d1 > 0.0 && sp.d1 < 1.0);
        // The joint is the left-branch maximizer, so the slope vanishes there.
        let (_, d1l, _, _) = sp.derivs(sp.xi1, true);
        assert!(d1l.abs() < 1e-12);
        let (_, d1r, _, _) = sp.derivs(sp.xi1, false);
        assert_eq!(d1r, 0.0);
    }

    #[test]
    fn subsolution_sits_below_supersolution() {
        let (ch, pair) = reference();
        let sup = SuperSolutionParams::new(pair.eta1).unwrap();
        let sub = default_sub_params(&pair, &ch).unwrap();
        let grid = Grid::new(100.0, 0.01).unwrap();
        let upper = build_supersolution(&sup, &grid);
        let lower = build_subsolution(&sub, &grid).unwrap();
        assert!(lower.values.iter().all(|&v| v >= 0.0));
        assert!(matches!(
            pointwise_order(&lower, &upper, 1e-12).unwrap(),
            ProfileOrder::Leq
        ));
        // The sub-solution is not in Gamma: its right limit is d1 < 1.
        let report = is_in_gamma(&lower, 1.0, GammaTolerance::default());
        assert!(!report.in_gamma);
        assert!((report.right_gap - (1.0 - sub.d1)).abs() < 1e-12);
    }

    #[test]
    fn epsilon_above_window_is_rejected() {
        let (ch, pair) = reference();
        let too_big = pair.eta2 - pair.eta1;
        assert!(matches!(
            check_epsilon_window(&ch, pair.eta1, pair.eta2, too_big),
            Err(Error::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn verifications_pass_at_zero_delay() {
        let (ch, pair) = reference();
        let re = Reaction::delayed_logistic(0.0).unwrap();
        let grid = Grid::new(100.0, 0.01).unwrap();
        let sup = SuperSolutionParams::new(pair.eta1).unwrap();
        let sv = verify_supersolution(&sup, &ch, &re, &grid);
        assert!(sv.pass, "super worst {:.3e}", sv.worst);
        // Case 1 is exactly -phi(xi) phi(xi - r) < 0.
        assert!(sv.case1.unwrap() < 0.0);
        assert!(sv.case2.is_none(), "r = 0 leaves no middle case");
        // At r = 0 the right-branch LHS is 1/2 e^(-eta1 xi)(-2 D eta1^2) plus
        // the negative quadratic tail, so case 3 stays strictly negative.
        assert!(sv.case3.unwrap() < 0.0);

        let sub = default_sub_params(&pair, &ch).unwrap();
        let bv = verify_subsolution(&sub, &ch, &re, &grid);
        assert!(bv.pass, "sub worst {:.3e}", bv.worst);
        // Plateau case reduces to phi(xi - r)(1 - phi(xi)) >= 0.
        assert!(bv.case3.unwrap() >= 0.0);
    }

    #[test]
    fn super_case1_matches_product_formula() {
        // For xi < 0 the linear part cancels through delta_r(eta1) = 0 and the
        // LHS equals -phi(xi) phi(xi - r) exactly.
        let c = 10.0;
        let d = 1.0;
        for r in [0.0, 0.1] {
            let ch = DelayedCharParams::new(c, d, r).unwrap();
            let pair = solve_delayed_positive_roots(&ch).unwrap();
            let re = Reaction::delayed_logistic(r).unwrap();
            let sp = SuperSolutionParams::new(pair.eta1).unwrap();
            for &xi in &[-5.0, -1.0, -0.25] {
                let (v, d1, d2, d3) = sp.derivs(xi, true);
                let lhs = c * d3 + d * d2 - c * d1 + re.apply(v, sp.value(xi - r));
                let expect = -sp.value(xi) * sp.value(xi - r);
                assert!((lhs - expect).abs() < 1e-12, "xi = {xi}, r = {r}");
            }
        }
    }

    #[test]
    fn sub_case1_lower_bound_formula() {
        // For xi < xi1 the paper's chain bounds the LHS from below by
        // 1/2 e^((eta1+eps) xi) (-q delta_r(eta1+eps) - 1/2).
        let (ch, pair) = reference();
        let re = Reaction::delayed_logistic(0.0).unwrap();
        let sp = default_sub_params(&pair, &ch).unwrap();
        let floor_coef = -sp.q * eval_delta_r(&ch, sp.eta1 + sp.eps) - 0.5;
        assert!(floor_coef >= 0.0);
        for &xi in &[-30.0, -10.0, sp.xi1 - 0.01] {
            let (v, d1, d2, d3) = sp.derivs(xi, true);
            let lhs = ch.c * d3 + ch.d * d2 - ch.c * d1 + re.apply(v, sp.value(xi));
            let floor = 0.5 * ((sp.eta1 + sp.eps) * xi).exp() * floor_coef;
            assert!(lhs >= floor - 1e-15, "xi = {xi}: lhs {lhs:.3e} < floor {floor:.3e}");
        }
    }

    #[test]
    fn delay_scan_reference() {
        let grid = Grid::new(100.0, 0.05).unwrap();
        let scan = find_max_delay(10.0, 1.0, &grid, 0.4, 1e-3).unwrap();
        assert!(scan.r_star > 0.0, "expected a positive certified delay");
        assert!(!scan.non_monotone);
        // The scan should terminate by genuine failure before the cap.
        assert!(scan.r_star < 0.4);
        assert!(scan.samples.iter().any(|s| !s.pass));
    }

    #[test]
    fn delay_scan_base_case_failure() {
        let grid = Grid::new(50.0, 0.1).unwrap();
        match find_max_delay(1.0, 3.0, &grid, 0.1, 1e-3) {
            Err(Error::BaseCaseFails(msg)) => assert!(msg.contains("no positive root pair")),
            other => panic!("expected BaseCaseFails, got {other:?}"),
        }
    }
}
