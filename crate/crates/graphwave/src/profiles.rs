//! Closed-form stationary families on the junction and their shift maps.
//!
//! Two families are supported. The kink family places
//! `4 arctan(exp((x - a_1)/c_1))` on the incoming edge and
//! `4 arctan(exp(-(x - a_j)/c_j))` on the outgoing edges; the physical
//! stationary state carries the incoming component with a flipped sign so
//! that the weighted derivative traces match at the vertex. The
//! kink/anti-kink family (unit speeds) couples an anti-kink approaching
//! 2*pi on the incoming edge with two kinks decaying to zero.
//!
//! The shifts a_j are not free: they solve a scalar monotone equation per
//! family ("shift map") so that the delta-prime vertex conditions hold, and
//! both maps are solved here by a bracketed Newton iteration.

use crate::graph::{GraphFunction, YJunction};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("no kink profile exists for lambda = {lambda}: the shift map requires lambda < -(c1+c2+c3) = {bound}")]
    NoKinkSolution { lambda: f64, bound: f64 },
    #[error("kink/anti-kink profiles are defined for unit speeds only, got ({0}, {1}, {2})")]
    NonUnitSpeeds(f64, f64, f64),
    #[error("operation requires the {expected:?} family, got {got:?}")]
    WrongFamily {
        expected: ProfileFamily,
        got: ProfileFamily,
    },
    #[error("speeds must be positive, got ({0}, {1}, {2})")]
    NonPositiveSpeeds(f64, f64, f64),
    #[error("root bracketing failed for the shift map at lambda = {0}")]
    Bracketing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileFamily {
    Kink,
    KinkAntiKink,
}

/// Shape classification by the sign of the outgoing shift: an interior
/// maximum near the vertex (bump), a monotone tail, or the critical
/// continuous profile between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileClass {
    Bump,
    Tail,
    Critical,
}

/// A solved member of one of the stationary families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub family: ProfileFamily,
    pub lambda: f64,
    pub shifts: (f64, f64, f64),
    pub speeds: (f64, f64, f64),
}

const SHIFT_CLASS_TOL: f64 = 1e-12;

/// Solve `arctan(y) * (c1+c2+c3) = -lambda * y / (1 + y^2)` for y > 0 and
/// return the kink profile with a2 = c2 ln y, a3 = (c3/c2) a2 and
/// a1 = -(c1/c2) a2. Requires lambda < -(c1+c2+c3).
pub fn solve_kink_shifts(
    lambda: f64,
    speeds: (f64, f64, f64),
) -> Result<StationaryProfile, ProfileError> {
    let (c1, c2, c3) = speeds;
    if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) {
        return Err(ProfileError::NonPositiveSpeeds(c1, c2, c3));
    }
    let csum = c1 + c2 + c3;
    if !(lambda < -csum) {
        return Err(ProfileError::NoKinkSolution {
            lambda,
            bound: -csum,
        });
    }
    // g(y) = arctan(y) (1 + y^2)/y is strictly increasing from 1 to
    // infinity, so f below has exactly one positive root.
    let f = |y: f64| y.atan() * csum + lambda * y / (1.0 + y * y);
    let fp = |y: f64| {
        csum / (1.0 + y * y) + lambda * (1.0 - y * y) / ((1.0 + y * y) * (1.0 + y * y))
    };
    let target = -lambda / csum;
    let (mut lo, mut hi) = if target >= PI / 2.0 {
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(ProfileError::Bracketing(lambda));
            }
        }
        (1.0 / hi.max(2.0), hi)
    } else {
        let mut lo = 1.0;
        while f(lo) > 0.0 {
            lo *= 0.5;
            if lo < 1e-12 {
                return Err(ProfileError::Bracketing(lambda));
            }
        }
        (lo, 1.0)
    };
    let y = newton_bracketed(f, fp, &mut lo, &mut hi, 1e-13 * lambda.abs().max(1.0))
        .ok_or(ProfileError::Bracketing(lambda))?;
    let a2 = c2 * y.ln();
    Ok(StationaryProfile {
        family: ProfileFamily::Kink,
        lambda,
        shifts: (-(c1 / c2) * a2, a2, (c3 / c2) * a2),
        speeds,
    })
}

/// The kink/anti-kink shift map F(y) = -(1+y^2)/y (2 arctan y - arctan 1/y)
/// with y = exp(-a1).
pub fn antikink_shift_map(y: f64) -> f64 {
    -(1.0 + y * y) / y * (2.0 * y.atan() - y.recip().atan())
}

fn antikink_shift_map_derivative(y: f64) -> f64 {
    // F(y) = -(y + 1/y) G(y), G' = 3/(1+y^2); the product rule collapses to
    // F'(y) = -(1 - 1/y^2) G(y) - 3/y, negative for all y > 0.
    let g = 2.0 * y.atan() - y.recip().atan();
    -(1.0 - 1.0 / (y * y)) * g - 3.0 / y
}

/// Solve F(y) = lambda for the unique y > 0 (F is a decreasing bijection
/// onto the real line) and return the profile with a1 = -ln y,
/// a2 = a3 = -a1. Unit speeds are hard-coded for this family.
pub fn solve_antikink_shift(lambda: f64) -> Result<StationaryProfile, ProfileError> {
    let f = |y: f64| antikink_shift_map(y) - lambda;
    let fp = antikink_shift_map_derivative;
    // F(1) = -pi/2; expand the bracket in the needed direction.
    let (mut lo, mut hi);
    if lambda >= -PI / 2.0 {
        // Root at y <= 1 where F >= -pi/2.
        lo = 1.0;
        while f(lo) < 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(ProfileError::Bracketing(lambda));
            }
        }
        hi = (2.0 * lo).min(1.0);
        while f(hi) > 0.0 {
            hi = (2.0 * hi).min(1.0);
            if hi >= 1.0 && f(1.0) > 0.0 {
                hi = 1.0;
                break;
            }
        }
        if hi <= lo {
            hi = 1.0;
        }
    } else {
        hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(ProfileError::Bracketing(lambda));
            }
        }
        lo = (hi / 2.0).max(1.0);
        if f(lo) < 0.0 {
            lo = 1.0;
        }
    }
    // Bracketed Newton on a decreasing function: swap so f(lo) >= 0 >= f(hi).
    let y = newton_bracketed_decreasing(f, fp, lo, hi, 1e-13 * lambda.abs().max(1.0))
        .ok_or(ProfileError::Bracketing(lambda))?;
    let a1 = -y.ln();
    Ok(StationaryProfile {
        family: ProfileFamily::KinkAntiKink,
        lambda,
        shifts: (a1, -a1, -a1),
        speeds: (1.0, 1.0, 1.0),
    })
}

/// Newton iteration safeguarded by a bracket for an increasing f.
fn newton_bracketed(
    f: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
    lo: &mut f64,
    hi: &mut f64,
    tol: f64,
) -> Option<f64> {
    let mut y = 0.5 * (*lo + *hi);
    for _ in 0..200 {
        let fy = f(y);
        if fy.abs() <= tol {
            return Some(y);
        }
        if fy > 0.0 {
            *hi = y;
        } else {
            *lo = y;
        }
        let d = fp(y);
        let mut next = if d != 0.0 { y - fy / d } else { f64::NAN };
        if !(next > *lo && next < *hi) {
            next = 0.5 * (*lo + *hi);
        }
        if next == y {
            return Some(y);
        }
        y = next;
    }
    let fy = f(y);
    // Bisection has converged to rounding even if f is not tiny.
    if fy.abs() <= tol * 100.0 {
        Some(y)
    } else {
        None
    }
}

fn newton_bracketed_decreasing(
    f: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Option<f64> {
    // Negate to reuse the increasing-function safeguard.
    let g = |y: f64| -f(y);
    let gp = |y: f64| -fp(y);
    newton_bracketed(g, gp, &mut lo, &mut hi, tol)
}

impl StationaryProfile {
    pub fn shift(&self, edge: usize) -> f64 {
        match edge {
            0 => self.shifts.0,
            1 => self.shifts.1,
            2 => self.shifts.2,
            _ => panic!("edge index out of range"),
        }
    }

    pub fn speed(&self, edge: usize) -> f64 {
        match edge {
            0 => self.speeds.0,
            1 => self.speeds.1,
            2 => self.speeds.2,
            _ => panic!("edge index out of range"),
        }
    }

    fn speed_sum(&self) -> f64 {
        self.speeds.0 + self.speeds.1 + self.speeds.2
    }

    /// Critical coupling of the family: -(pi/2) sum c_j for kinks, -pi/2
    /// for the kink/anti-kink family.
    pub fn critical_lambda(&self) -> f64 {
        match self.family {
            ProfileFamily::Kink => -PI / 2.0 * self.speed_sum(),
            ProfileFamily::KinkAntiKink => -PI / 2.0,
        }
    }

    pub fn is_critical(&self) -> bool {
        self.shifts.1.abs() <= SHIFT_CLASS_TOL
    }

    /// Bump/tail/critical classification (sign of the outgoing shift, which
    /// is equivalent to comparing lambda with the critical coupling).
    pub fn classify(&self) -> ProfileClass {
        let a2 = self.shifts.1;
        if a2.abs() <= SHIFT_CLASS_TOL {
            ProfileClass::Critical
        } else if a2 > 0.0 {
            ProfileClass::Bump
        } else {
            ProfileClass::Tail
        }
    }

    /// Family component phi_j(x) (the positive branch used throughout the
    /// shift-map analysis; the dynamical state on edge 1 of the kink family
    /// is -phi_1).
    pub fn phi(&self, edge: usize, x: f64) -> f64 {
        let a = self.shift(edge);
        let c = self.speed(edge);
        match (self.family, edge) {
            (ProfileFamily::Kink, 0) => 4.0 * ((x - a) / c).exp().atan(),
            (ProfileFamily::Kink, _) => 4.0 * (-(x - a) / c).exp().atan(),
            (ProfileFamily::KinkAntiKink, _) => 4.0 * (-(x - a)).exp().atan(),
        }
    }

    pub fn phi_deriv(&self, edge: usize, x: f64) -> f64 {
        let a = self.shift(edge);
        let c = self.speed(edge);
        let t = (x - a) / c;
        match (self.family, edge) {
            (ProfileFamily::Kink, 0) => 2.0 / (c * t.cosh()),
            (ProfileFamily::Kink, _) => -2.0 / (c * t.cosh()),
            (ProfileFamily::KinkAntiKink, _) => -2.0 / (x - a).cosh(),
        }
    }

    pub fn phi_second_deriv(&self, edge: usize, x: f64) -> f64 {
        let a = self.shift(edge);
        let c = self.speed(edge);
        let t = (x - a) / c;
        let st = 1.0 / t.cosh();
        match (self.family, edge) {
            (ProfileFamily::Kink, 0) => -2.0 / (c * c) * st * t.tanh(),
            (ProfileFamily::Kink, _) => 2.0 / (c * c) * st * t.tanh(),
            (ProfileFamily::KinkAntiKink, _) => {
                let u = x - a;
                2.0 / u.cosh() * u.tanh()
            }
        }
    }

    /// Sign carried by the dynamical state on each edge relative to the
    /// family components: the kink state is (-phi_1, phi_2, phi_3).
    fn state_sign(&self, edge: usize) -> f64 {
        match (self.family, edge) {
            (ProfileFamily::Kink, 0) => -1.0,
            _ => 1.0,
        }
    }

    /// The stationary state of the wave equation (satisfies the delta-prime
    /// conditions at the vertex).
    pub fn stationary_state(&self, junction: &YJunction) -> GraphFunction {
        GraphFunction::from_fn(junction, |e, x| self.state_sign(e) * self.phi(e, x))
    }

    pub fn stationary_state_derivative(&self, junction: &YJunction) -> GraphFunction {
        GraphFunction::from_fn(junction, |e, x| self.state_sign(e) * self.phi_deriv(e, x))
    }

    /// Boundary values the state approaches at the truncated far ends.
    pub fn asymptotic_values(&self) -> (f64, f64, f64) {
        match self.family {
            ProfileFamily::Kink => (0.0, 0.0, 0.0),
            ProfileFamily::KinkAntiKink => (2.0 * PI, 0.0, 0.0),
        }
    }

    /// Potential samples cos(phi_j) of the linearization around the state
    /// (insensitive to the edge-1 sign flip).
    pub fn potential(&self, junction: &YJunction) -> GraphFunction {
        GraphFunction::from_fn(junction, |e, x| self.phi(e, x).cos())
    }

    /// Residual of the shift-map equation the profile was solved from.
    pub fn shift_map_residual(&self) -> f64 {
        match self.family {
            ProfileFamily::Kink => {
                let y = (self.shifts.1 / self.speeds.1).exp();
                y.atan() * self.speed_sum() + self.lambda * y / (1.0 + y * y)
            }
            ProfileFamily::KinkAntiKink => {
                let y = (-self.shifts.0).exp();
                antikink_shift_map(y) - self.lambda
            }
        }
    }
}

/// Samples of the family components phi_j on the junction grid.
pub fn eval_profile(p: &StationaryProfile, junction: &YJunction) -> GraphFunction {
    GraphFunction::from_fn(junction, |e, x| p.phi(e, x))
}

pub fn eval_derivative(p: &StationaryProfile, junction: &YJunction) -> GraphFunction {
    GraphFunction::from_fn(junction, |e, x| p.phi_deriv(e, x))
}

pub fn eval_second_derivative(p: &StationaryProfile, junction: &YJunction) -> GraphFunction {
    GraphFunction::from_fn(junction, |e, x| p.phi_second_deriv(e, x))
}

pub fn classify_profile(p: &StationaryProfile) -> ProfileClass {
    p.classify()
}

/// Max-norm residual of the stationary equation
/// `-c_j^2 u'' + sin u = 0` for the sampled state, with a centered second
/// difference on interior nodes.
pub fn stationary_residual(p: &StationaryProfile, junction: &YJunction) -> f64 {
    let u = p.stationary_state(junction);
    let h = junction.grid_spacing();
    let n = junction.points_per_edge();
    let mut worst = 0.0f64;
    for e in 0..3 {
        let c2 = junction.speed(e) * junction.speed(e);
        let ue = &u.edges[e];
        for i in 1..n - 1 {
            let d2 = (ue[i - 1] - 2.0 * ue[i] + ue[i + 1]) / (h * h);
            worst = worst.max((-c2 * d2 + ue[i].sin()).abs());
        }
    }
    worst
}

/// d a_1 / d lambda for the kink/anti-kink family by implicit
/// differentiation of F(exp(-a1)) = lambda; strictly positive since F is
/// strictly decreasing. Equals exactly 1/3 at the critical coupling.
pub fn shift_map_derivative(p: &StationaryProfile) -> Result<f64, ProfileError> {
    if p.family != ProfileFamily::KinkAntiKink {
        return Err(ProfileError::WrongFamily {
            expected: ProfileFamily::KinkAntiKink,
            got: p.family,
        });
    }
    let y = (-p.shifts.0).exp();
    Ok(-1.0 / (y * antikink_shift_map_derivative(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{vertex_residual, VertexCondition};

    fn junction_for(p: &StationaryProfile, l: f64, n: usize) -> YJunction {
        YJunction::new(p.speeds, p.lambda, l, n).unwrap()
    }

    /// Plain bisection oracle for the kink shift map, independent of the
    /// production Newton path.
    fn kink_y_by_bisection(lambda: f64, csum: f64) -> f64 {
        let f = |y: f64| y.atan() * csum + lambda * y / (1.0 + y * y);
        let (mut lo, mut hi) = (1e-8, 1e8);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn kink_critical_lambda_gives_zero_shifts() {
        let p = solve_kink_shifts(-1.5 * PI, (1.0, 1.0, 1.0)).unwrap();
        assert!(p.shifts.0.abs() <= 1e-13);
        assert!(p.shifts.1.abs() <= 1e-13);
        assert!(p.shifts.2.abs() <= 1e-13);
        assert_eq!(p.classify(), ProfileClass::Critical);
    }

    #[test]
    fn kink_bump_regime_matches_bisection_oracle() {
        // lambda = -5 < -3 pi/2: bump, a2 > 0. Expected value frozen from
        // the in-test bisection oracle.
        let p = solve_kink_shifts(-5.0, (1.0, 1.0, 1.0)).unwrap();
        assert!(p.shifts.1 > 0.0);
        assert_eq!(p.classify(), ProfileClass::Bump);
        let y = kink_y_by_bisection(-5.0, 3.0);
        assert!((p.shifts.1 - y.ln()).abs() < 1e-10);
        // Frozen oracle output.
        assert!((p.shifts.1 - 0.089_357_164_712_012_08).abs() < 1e-9);
        assert!((p.shifts.0 + p.shifts.1).abs() < 1e-13);
        assert!((p.shifts.2 - p.shifts.1).abs() < 1e-13);
    }

    #[test]
    fn kink_tail_regime_has_negative_outgoing_shift() {
        let p = solve_kink_shifts(-4.0, (1.0, 1.0, 1.0)).unwrap();
        assert!(p.shifts.1 < 0.0);
        assert!(p.shifts.0 > 0.0);
        assert_eq!(p.classify(), ProfileClass::Tail);
        let y = kink_y_by_bisection(-4.0, 3.0);
        assert!((p.shifts.1 - y.ln()).abs() < 1e-10);
    }

    #[test]
    fn kink_rejects_lambda_above_threshold() {
        assert!(matches!(
            solve_kink_shifts(-3.0, (1.0, 1.0, 1.0)),
            Err(ProfileError::NoKinkSolution { .. })
        ));
        assert!(solve_kink_shifts(-2.9, (1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn kink_shift_ratios_follow_speeds() {
        let p = solve_kink_shifts(-9.0, (0.5, 1.0, 1.5)).unwrap();
        assert!((p.shifts.2 - 1.5 * p.shifts.1).abs() < 1e-12);
        assert!((p.shifts.0 + 0.5 * p.shifts.1).abs() < 1e-12);
        assert!(p.shift_map_residual().abs() <= 1e-12);
    }

    #[test]
    fn antikink_critical_point() {
        let p = solve_antikink_shift(-PI / 2.0).unwrap();
        assert!(p.shifts.0.abs() < 1e-13);
        assert_eq!(p.classify(), ProfileClass::Critical);
    }

    #[test]
    fn antikink_lambda_zero_closed_form() {
        // arctan(1/y) = pi/2 - arctan(y) reduces F(y) = 0 to
        // 3 arctan(y) = pi/2, i.e. y = tan(pi/6), a1 = (ln 3)/2.
        let p = solve_antikink_shift(0.0).unwrap();
        let expected = 0.5 * 3.0f64.ln();
        assert!((p.shifts.0 - expected).abs() < 1e-12, "{}", p.shifts.0);
        assert_eq!(p.classify(), ProfileClass::Tail);
    }

    #[test]
    fn antikink_negative_lambda_is_bump() {
        let p = solve_antikink_shift(-10.0).unwrap();
        assert!(p.shifts.0 < 0.0);
        assert_eq!(p.classify(), ProfileClass::Bump);
        assert!(p.shift_map_residual().abs() <= 1e-12);
    }

    #[test]
    fn antikink_shift_map_is_monotone_in_lambda() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..40 {
            let lambda = -20.0 + k as f64;
            let p = solve_antikink_shift(lambda).unwrap();
            assert!(p.shifts.0 > prev, "a1 must increase with lambda");
            prev = p.shifts.0;
        }
    }

    #[test]
    fn kink_outgoing_shift_decreases_in_lambda() {
        // Ascending lambda grid inside (-infty, -3): a2 must strictly fall.
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let lambda = -18.0 + 0.5 * k as f64;
            let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
            assert!(p.shifts.1 < prev, "a2 must decrease with lambda");
            prev = p.shifts.1;
        }
    }

    #[test]
    fn family_values_at_shift_and_far_end() {
        let p = solve_kink_shifts(-4.0, (1.0, 1.0, 1.0)).unwrap();
        // 4 arctan(1) = pi at x = a_j on the outgoing edges.
        assert!((p.phi(1, p.shifts.1) - PI).abs() < 1e-14);
        assert!((p.phi(2, p.shifts.2) - PI).abs() < 1e-14);
        assert!((p.phi(0, p.shifts.0) - PI).abs() < 1e-14);
        // Far-end decay bound on edge 1.
        let l = 40.0;
        let bound = 4.0 * ((-l - p.shifts.0) / 1.0).exp();
        assert!(p.phi(0, -l) <= bound * (1.0 + 1e-12));
        assert!(p.phi(0, -l) > 0.0);
    }

    #[test]
    fn antikink_derivative_at_vertex() {
        let p = solve_antikink_shift(-PI / 2.0).unwrap();
        assert!((p.phi_deriv(0, 0.0) + 2.0).abs() < 1e-14);
        // Anti-kink tends to 2 pi on the incoming edge.
        assert!((p.phi(0, -40.0) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn kink_state_satisfies_vertex_conditions_to_h_squared() {
        for lambda in [-4.0, -5.5] {
            let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
            let j = junction_for(&p, 40.0, 4001);
            let u = p.stationary_state(&j);
            let (r1, r2, r3) = vertex_residual(&u, VertexCondition::DeltaPrime(lambda), &j);
            for r in [r1, r2, r3] {
                assert!(r.abs() < 5e-4, "lambda {lambda}: residual {r}");
            }
        }
    }

    #[test]
    fn antikink_state_satisfies_vertex_conditions_to_h_squared() {
        let p = solve_antikink_shift(-PI / 2.0).unwrap();
        let j = junction_for(&p, 40.0, 4001);
        let u = p.stationary_state(&j);
        let (r1, r2, r3) = vertex_residual(&u, VertexCondition::DeltaPrime(p.lambda), &j);
        for r in [r1, r2, r3] {
            assert!(r.abs() < 5e-4, "residual {r}");
        }
    }

    #[test]
    fn vertex_residual_decays_at_second_order() {
        let p = solve_kink_shifts(-4.0, (1.0, 1.0, 1.0)).unwrap();
        let mut rs = Vec::new();
        let mut hs = Vec::new();
        for n in [501usize, 1001, 2001, 4001] {
            let j = junction_for(&p, 40.0, n);
            let u = p.stationary_state(&j);
            let (r1, r2, r3) = vertex_residual(&u, VertexCondition::DeltaPrime(-4.0), &j);
            rs.push(r1.abs().max(r2.abs()).max(r3.abs()));
            hs.push(j.grid_spacing());
        }
        // Least-squares slope of log r against log h.
        let slope = log_log_slope(&hs, &rs);
        assert!(
            (1.8..=2.2).contains(&slope),
            "measured order {slope}, residuals {rs:?}"
        );
    }

    #[test]
    fn stationary_residual_is_second_order() {
        let pk = solve_kink_shifts(-1.5 * PI, (1.0, 1.0, 1.0)).unwrap();
        let pa = solve_antikink_shift(-PI / 2.0).unwrap();
        for p in [pk, pa] {
            let j1 = junction_for(&p, 40.0, 4001);
            let r1 = stationary_residual(&p, &j1);
            assert!(r1 <= 1e-3, "residual {r1} at h = 0.01");
            let j2 = junction_for(&p, 40.0, 8001);
            let r2 = stationary_residual(&p, &j2);
            let ratio = r1 / r2;
            assert!(
                (3.6..=4.4).contains(&ratio),
                "refinement ratio {ratio} ({r1} -> {r2})"
            );
        }
    }

    #[test]
    fn kink_components_stay_inside_zero_two_pi() {
        for lambda in [-3.5, -1.5 * PI, -6.0] {
            let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
            let j = junction_for(&p, 40.0, 2001);
            let phi = eval_profile(&p, &j);
            for e in 0..3 {
                for &v in &phi.edges[e] {
                    assert!(v > 0.0 && v < 2.0 * PI);
                }
            }
        }
    }

    #[test]
    fn kink_tail_regime_monotonicity() {
        let p = solve_kink_shifts(-4.0, (1.0, 1.0, 1.0)).unwrap();
        let j = junction_for(&p, 40.0, 2001);
        let grid = j.build_grid();
        for &x in &grid.edges[1] {
            assert!(p.phi_deriv(1, x) < 0.0);
            assert!(p.phi_second_deriv(1, x) > 0.0);
        }
    }

    #[test]
    fn kink_continuity_at_vertex_is_exact() {
        let p = solve_kink_shifts(-7.3, (1.0, 2.0, 0.5)).unwrap();
        assert!((p.phi(1, 0.0) - p.phi(2, 0.0)).abs() < 1e-13);
    }

    #[test]
    fn antikink_shift_derivative_critical_value_and_sign() {
        let p = solve_antikink_shift(-PI / 2.0).unwrap();
        let d = shift_map_derivative(&p).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-12, "{d}");
        for lambda in [-30.0, -2.0, 0.0, 1.0, 12.0] {
            let p = solve_antikink_shift(lambda).unwrap();
            assert!(shift_map_derivative(&p).unwrap() > 0.0);
        }
    }

    #[test]
    fn antikink_shift_derivative_matches_central_difference() {
        for lambda in [-2.0, 1.0] {
            let p = solve_antikink_shift(lambda).unwrap();
            let d = shift_map_derivative(&p).unwrap();
            let delta = 1e-5;
            let plus = solve_antikink_shift(lambda + delta).unwrap().shifts.0;
            let minus = solve_antikink_shift(lambda - delta).unwrap().shifts.0;
            let fd = (plus - minus) / (2.0 * delta);
            assert!(((d - fd) / d).abs() < 1e-6, "lambda {lambda}: {d} vs {fd}");
        }
    }

    #[test]
    fn shift_map_derivative_rejects_kink() {
        let p = solve_kink_shifts(-4.0, (1.0, 1.0, 1.0)).unwrap();
        assert!(matches!(
            shift_map_derivative(&p),
            Err(ProfileError::WrongFamily { .. })
        ));
    }

    #[test]
    fn profile_json_round_trip() {
        let p = solve_antikink_shift(1.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: StationaryProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    fn log_log_slope(hs: &[f64], rs: &[f64]) -> f64 {
        let n = hs.len() as f64;
        let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }
}
