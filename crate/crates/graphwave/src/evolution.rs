//! Time integration of the sine-Gordon system on the junction.
//!
//! Interior nodes advance with the Stormer-Verlet (leapfrog) scheme; after
//! every drift and after the closing kick the three vertex values are
//! solved from the trace system {two weighted-derivative equalities, jump
//! law} built on second-order one-sided stencils, so the delta-prime
//! conditions hold to solver precision after every accepted step. Far-end
//! nodes are never touched: they stay at the values they were seeded with
//! (the profile's asymptotics), which acts as a clamp on the truncation
//! boundary.

use crate::graph::{
    graph_inner_product, trapezoid, GraphError, GraphFunction, VertexCondition, YJunction,
};
use crate::linalg::{BorderedSystem, DenseLu, LinalgError, Link};
use crate::profiles::StationaryProfile;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("CFL violation: dt = {dt} exceeds 0.5 h / max c = {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("singular vertex trace system: {0}")]
    SingularVertexSystem(String),
    #[error("energy vertex term is undefined for DeltaPrime with lambda = 0")]
    ZeroLambda,
    #[error("growing-mode seed requires a negative eigenvalue, got mu = {0}")]
    NonNegativeMode(f64),
    #[error("empty fit window: {0}")]
    EmptyFitWindow(String),
    #[error("equilibrium refinement did not converge: {0}")]
    EquilibriumDiverged(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Phase field, its time derivative and the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub u: GraphFunction,
    pub v: GraphFunction,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub gradient: f64,
    pub potential: f64,
    pub vertex: f64,
    pub total: f64,
}

/// 3x3 solver for the vertex values given the interior field, using the
/// one-sided stencils d1 = (3 U1 - 4 u[n-2] + u[n-3]) / 2h (incoming) and
/// dj = (-3 Uj + 4 u[1] - u[2]) / 2h (outgoing).
struct VertexTraceSolver {
    lu: DenseLu,
    /// 2h, the stencil denominator.
    h2: f64,
    speeds: (f64, f64, f64),
    lambda: Option<f64>,
}

impl VertexTraceSolver {
    fn new(junction: &YJunction, cond: VertexCondition) -> Result<Self, EvolutionError> {
        let h = junction.grid_spacing();
        let kappa = 3.0 / (2.0 * h);
        let (c1, c2, c3) = junction.speeds();
        let lambda = match cond {
            VertexCondition::DeltaPrime(l) => Some(l),
            VertexCondition::DeltaPrimeKirchhoffLimit => None,
        };
        let row3 = match lambda {
            Some(l) => [-c1 * (1.0 + l * kappa), c2, c3],
            None => [-c1, c2, c3],
        };
        let mat = vec![
            kappa * c1,
            kappa * c2,
            0.0,
            0.0,
            -kappa * c2,
            kappa * c3,
            row3[0],
            row3[1],
            row3[2],
        ];
        let lu = DenseLu::factor(mat, 3).map_err(|e| {
            EvolutionError::SingularVertexSystem(format!(
                "lambda = {:?}: {e}",
                lambda
            ))
        })?;
        Ok(VertexTraceSolver {
            lu,
            h2: 2.0 * h,
            speeds: (c1, c2, c3),
            lambda,
        })
    }

    /// Solve for the three vertex values of `field` from its interior.
    fn apply(&self, field: &mut GraphFunction) {
        let n = field.len();
        let (c1, c2, c3) = self.speeds;
        let r1 = (-4.0 * field.edges[0][n - 2] + field.edges[0][n - 3]) / self.h2;
        let r2 = (4.0 * field.edges[1][1] - field.edges[1][2]) / self.h2;
        let r3 = (4.0 * field.edges[2][1] - field.edges[2][2]) / self.h2;
        let mut rhs = [
            c2 * r2 - c1 * r1,
            c3 * r3 - c2 * r2,
            match self.lambda {
                Some(l) => l * c1 * r1,
                None => 0.0,
            },
        ];
        self.lu.solve(&mut rhs);
        field.edges[0][n - 1] = rhs[0];
        field.edges[1][0] = rhs[1];
        field.edges[2][0] = rhs[2];
    }
}

/// Replace the six vertex samples of (u, v) by the trace-consistent values
/// implied by their interior nodes.
pub fn enforce_vertex(
    state: &EvolutionState,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<EvolutionState, EvolutionError> {
    let solver = VertexTraceSolver::new(junction, cond)?;
    let mut out = state.clone();
    solver.apply(&mut out.u);
    solver.apply(&mut out.v);
    Ok(out)
}

fn acceleration_into(
    u: &GraphFunction,
    junction: &YJunction,
    out: &mut GraphFunction,
) {
    let h = junction.grid_spacing();
    let n = u.len();
    for e in 0..3 {
        let c2 = junction.speed(e) * junction.speed(e);
        let ue = &u.edges[e];
        let oe = &mut out.edges[e];
        let inv_h2 = c2 / (h * h);
        for i in 1..n - 1 {
            oe[i] = (ue[i - 1] - 2.0 * ue[i] + ue[i + 1]) * inv_h2 - ue[i].sin();
        }
    }
}

/// One Stormer-Verlet step with vertex enforcement.
pub fn step(
    state: &EvolutionState,
    dt: f64,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<EvolutionState, EvolutionError> {
    let limit = 0.5 * junction.grid_spacing() / junction.max_speed();
    if dt > limit * (1.0 + 1e-12) {
        return Err(EvolutionError::CflViolation { dt, limit });
    }
    let solver = VertexTraceSolver::new(junction, cond)?;
    let n = state.u.len();
    let mut accel = GraphFunction::zeros(n);
    acceleration_into(&state.u, junction, &mut accel);
    let mut u = state.u.clone();
    let mut v = state.v.clone();
    for e in 0..3 {
        for i in 1..n - 1 {
            v.edges[e][i] += 0.5 * dt * accel.edges[e][i];
            u.edges[e][i] += dt * v.edges[e][i];
        }
    }
    solver.apply(&mut u);
    acceleration_into(&u, junction, &mut accel);
    for e in 0..3 {
        for i in 1..n - 1 {
            v.edges[e][i] += 0.5 * dt * accel.edges[e][i];
        }
    }
    solver.apply(&mut v);
    Ok(EvolutionState {
        u,
        v,
        t: state.t + dt,
    })
}

/// Trapezoidal energy of the state:
/// `sum_j int 1/2 v^2 + 1/2 c^2 (u')^2 + (1 - cos u)` plus the vertex term
/// `(1/2 lambda) jump(u)^2` for the delta-prime kind.
pub fn energy(
    state: &EvolutionState,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<EnergyBreakdown, EvolutionError> {
    let n = state.u.len();
    let kinetic = 0.5 * graph_inner_product(&state.v, &state.v, junction)?;
    // Gradient energy of the piecewise-linear reconstruction: element
    // differences, the quantity the discrete flow actually conserves.
    let h = junction.grid_spacing();
    let mut gradient = 0.0;
    for e in 0..3 {
        let c2 = junction.speed(e) * junction.speed(e);
        let ue = &state.u.edges[e];
        let mut acc = 0.0;
        for i in 0..n - 1 {
            let d = ue[i + 1] - ue[i];
            acc += d * d;
        }
        gradient += 0.5 * c2 * acc / h;
    }
    let mut cosdev = GraphFunction::zeros(n);
    for e in 0..3 {
        for (o, &x) in cosdev.edges[e].iter_mut().zip(&state.u.edges[e]) {
            *o = 1.0 - x.cos();
        }
    }
    let potential = trapezoid(&cosdev, junction);
    let vertex = match cond {
        VertexCondition::DeltaPrime(l) => {
            if l == 0.0 {
                return Err(EvolutionError::ZeroLambda);
            }
            let jump = state.u.vertex_jump(junction);
            jump * jump / (2.0 * l)
        }
        VertexCondition::DeltaPrimeKirchhoffLimit => 0.0,
    };
    Ok(EnergyBreakdown {
        kinetic,
        gradient,
        potential,
        vertex,
        total: kinetic + gradient + potential + vertex,
    })
}

/// Outgoing energy flux `c^2 u' v` sampled near the truncation boundary
/// (at the node closest to `frac * L` from the vertex on every edge);
/// returns the sum of absolute fluxes, a cheap monitor for reflected
/// energy reaching the clamp.
pub fn boundary_flux(state: &EvolutionState, junction: &YJunction, frac: f64) -> f64 {
    let n = state.u.len();
    let h = junction.grid_spacing();
    let m = (((n - 1) as f64) * frac).round() as usize;
    let m = m.clamp(2, n - 3);
    let mut acc = 0.0;
    for e in 0..3 {
        let idx = if e == 0 { n - 1 - m } else { m };
        let c2 = junction.speed(e) * junction.speed(e);
        let du = (state.u.edges[e][idx + 1] - state.u.edges[e][idx - 1]) / (2.0 * h);
        acc += (c2 * du * state.v.edges[e][idx]).abs();
    }
    acc
}

/// Initial state on the growing branch of the linearization: for an
/// eigenpair `L psi = mu psi` with `mu < 0` the mode grows like
/// `e^{sigma t}` with `sigma = sqrt(-mu)`, so the seed is
/// `u = base + eps * psi`, `v = eps * sigma * psi` (psi normalized to unit
/// sup norm). `eps = 0` reproduces the base state exactly.
pub fn seed_perturbation(
    base: &GraphFunction,
    mode: &GraphFunction,
    mu: f64,
    eps: f64,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<EvolutionState, EvolutionError> {
    if mu >= 0.0 {
        return Err(EvolutionError::NonNegativeMode(mu));
    }
    if eps == 0.0 {
        return Ok(EvolutionState {
            u: base.clone(),
            v: GraphFunction::zeros(base.len()),
            t: 0.0,
        });
    }
    let sigma = (-mu).sqrt();
    let scale = eps / mode.sup_norm().max(1e-300);
    let mut u = base.clone();
    u.axpy(scale, mode);
    let mut v = GraphFunction::zeros(base.len());
    v.axpy(scale * sigma, mode);
    let state = EvolutionState { u, v, t: 0.0 };
    enforce_vertex(&state, junction, cond)
}

/// Convenience overload seeding from a profile's exact state.
pub fn seed_perturbation_from_profile(
    p: &StationaryProfile,
    mode: &GraphFunction,
    mu: f64,
    eps: f64,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<EvolutionState, EvolutionError> {
    seed_perturbation(&p.stationary_state(junction), mode, mu, eps, junction, cond)
}

/// Newton-refined stationary state of the *discrete* scheme: interior
/// nodes satisfy `c^2 D2 u = sin u` and the vertex traces solve the
/// delta-prime system exactly, so the time stepper holds it to roundoff.
/// Far-end nodes keep the profile's asymptotic values.
pub fn discrete_equilibrium(
    p: &StationaryProfile,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<EvolutionState, EvolutionError> {
    let mut u = p.stationary_state(junction);
    let n = u.len();
    let h = junction.grid_spacing();
    let kappa = 3.0 / (2.0 * h);
    let (c1, c2, c3) = junction.speeds();
    let lambda = match cond {
        VertexCondition::DeltaPrime(l) => Some(l),
        VertexCondition::DeltaPrimeKirchhoffLimit => None,
    };
    let ni = n - 2; // interior nodes per edge
    let pack = |u: &GraphFunction| -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * ni + 3);
        for e in 0..3 {
            x.extend_from_slice(&u.edges[e][1..n - 1]);
        }
        x.push(u.edges[0][n - 1]);
        x.push(u.edges[1][0]);
        x.push(u.edges[2][0]);
        x
    };
    let unpack = |x: &[f64], u: &mut GraphFunction| {
        for e in 0..3 {
            u.edges[e][1..n - 1].copy_from_slice(&x[e * ni..(e + 1) * ni]);
        }
        u.edges[0][n - 1] = x[3 * ni];
        u.edges[1][0] = x[3 * ni + 1];
        u.edges[2][0] = x[3 * ni + 2];
    };
    let residual = |u: &GraphFunction| -> Vec<f64> {
        let mut g = Vec::with_capacity(3 * ni + 3);
        for e in 0..3 {
            let cc = junction.speed(e) * junction.speed(e);
            for i in 1..n - 1 {
                let d2 = (u.edges[e][i - 1] - 2.0 * u.edges[e][i] + u.edges[e][i + 1]) / (h * h);
                g.push(cc * d2 - u.edges[e][i].sin());
            }
        }
        let d1 = (3.0 * u.edges[0][n - 1] - 4.0 * u.edges[0][n - 2] + u.edges[0][n - 3])
            / (2.0 * h);
        let d2 = (-3.0 * u.edges[1][0] + 4.0 * u.edges[1][1] - u.edges[1][2]) / (2.0 * h);
        let d3 = (-3.0 * u.edges[2][0] + 4.0 * u.edges[2][1] - u.edges[2][2]) / (2.0 * h);
        g.push(c1 * d1 - c2 * d2);
        g.push(c2 * d2 - c3 * d3);
        let jump = u.vertex_jump(junction);
        g.push(match lambda {
            Some(l) => jump - l * c1 * d1,
            None => jump,
        });
        g
    };
    for iteration in 0..60 {
        let g = residual(&u);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= 1e-10 {
            return Ok(EvolutionState {
                u,
                v: GraphFunction::zeros(n),
                t: 0.0,
            });
        }
        // Jacobian as a bordered system over the same unknown packing.
        let mut chains = Vec::with_capacity(3);
        for e in 0..3 {
            let cc = junction.speed(e) * junction.speed(e);
            let k = cc / (h * h);
            let sub = vec![k; ni - 1];
            let sup = vec![k; ni - 1];
            let mut diag = Vec::with_capacity(ni);
            for i in 1..n - 1 {
                diag.push(-2.0 * k - u.edges[e][i].cos());
            }
            chains.push((sub, diag, sup));
        }
        // Interior equations touching a vertex unknown.
        let mut col_links = Vec::new();
        for e in 0..3 {
            let cc = junction.speed(e) * junction.speed(e);
            let k = cc / (h * h);
            let (pos, border) = if e == 0 { (ni - 1, 0) } else { (0, e) };
            col_links.push(Link {
                chain: e,
                pos,
                border,
                value: k,
            });
        }
        // Vertex equations touching interior unknowns (stencil reach 2).
        let two_h = 2.0 * h;
        let mut row_links = vec![
            // Row 0: c1 d1 - c2 d2.
            Link { chain: 0, pos: ni - 1, border: 0, value: -4.0 * c1 / two_h },
            Link { chain: 0, pos: ni - 2, border: 0, value: c1 / two_h },
            Link { chain: 1, pos: 0, border: 0, value: -4.0 * c2 / two_h },
            Link { chain: 1, pos: 1, border: 0, value: c2 / two_h },
            // Row 1: c2 d2 - c3 d3.
            Link { chain: 1, pos: 0, border: 1, value: 4.0 * c2 / two_h },
            Link { chain: 1, pos: 1, border: 1, value: -c2 / two_h },
            Link { chain: 2, pos: 0, border: 1, value: -4.0 * c3 / two_h },
            Link { chain: 2, pos: 1, border: 1, value: c3 / two_h },
        ];
        if let Some(l) = lambda {
            row_links.push(Link { chain: 0, pos: ni - 1, border: 2, value: 4.0 * l * c1 / two_h });
            row_links.push(Link { chain: 0, pos: ni - 2, border: 2, value: -l * c1 / two_h });
        }
        let border = match lambda {
            Some(l) => vec![
                kappa * c1, kappa * c2, 0.0,
                0.0, -kappa * c2, kappa * c3,
                -c1 * (1.0 + l * kappa), c2, c3,
            ],
            None => vec![
                kappa * c1, kappa * c2, 0.0,
                0.0, -kappa * c2, kappa * c3,
                -c1, c2, c3,
            ],
        };
        let sys = BorderedSystem {
            chains,
            col_links,
            row_links,
            border,
            k: 3,
        };
        let mut delta = g.clone();
        sys.solve(&mut delta).map_err(|e| {
            EvolutionError::SingularVertexSystem(format!("equilibrium Jacobian: {e}"))
        })?;
        let mut x = pack(&u);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi -= di;
        }
        unpack(&x, &mut u);
        if iteration == 59 {
            return Err(EvolutionError::EquilibriumDiverged(format!(
                "residual {gmax:.3e} after 60 Newton steps"
            )));
        }
    }
    unreachable!()
}

/// Result of a growth-rate fit on the log of the deviation norm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrowthFit {
    pub sigma: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub samples_used: usize,
}

/// Least-squares slope of `ln ||u(t) - base||` over the window where the
/// deviation lies in `[3 * dev(0), 0.03 * ||base||]`.
pub fn fit_growth_series(
    series: &[(f64, f64)],
    base_norm: f64,
) -> Result<GrowthFit, EvolutionError> {
    if series.is_empty() {
        return Err(EvolutionError::EmptyFitWindow("no samples".into()));
    }
    let dev0 = series[0].1;
    if dev0 <= 0.0 {
        return Err(EvolutionError::EmptyFitWindow(
            "initial deviation is zero; nothing grows".into(),
        ));
    }
    let lower = 3.0 * dev0;
    let upper = 0.03 * base_norm;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, d)| *d >= lower && *d <= upper)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(EvolutionError::EmptyFitWindow(format!(
            "only {} samples with deviation in [{lower:.3e}, {upper:.3e}]",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(EvolutionError::EmptyFitWindow(
            "degenerate time samples".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (t, y) in &pts {
        let f = slope * t + intercept;
        ss_res += (y - f) * (y - f);
        ss_tot += (y - mean) * (y - mean);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(GrowthFit {
        sigma: slope,
        window: (pts[0].0, pts[pts.len() - 1].0),
        r_squared,
        samples_used: pts.len(),
    })
}

/// Fit from stored states relative to a profile's stationary state.
pub fn growing_mode_fit(
    trajectory: &[EvolutionState],
    p: &StationaryProfile,
    junction: &YJunction,
) -> Result<GrowthFit, EvolutionError> {
    let base = p.stationary_state(junction);
    let base_norm = graph_inner_product(&base, &base, junction)?.sqrt();
    let series: Vec<(f64, f64)> = trajectory
        .iter()
        .map(|s| {
            let mut dev = s.u.clone();
            dev.axpy(-1.0, &base);
            (s.t, graph_inner_product(&dev, &dev, junction).unwrap().max(0.0).sqrt())
        })
        .collect();
    fit_growth_series(&series, base_norm)
}
