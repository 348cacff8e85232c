//! The linearized operator on the junction and its spectral toolbox.
//!
//! The operator `-c_j^2 d^2/dx^2 + V_j` with delta-prime vertex coupling is
//! discretized from its quadratic form
//!
//! `Q(u) = sum_j int c_j^2 (u_j')^2 + V_j u_j^2  +  (1/lambda) jump(u)^2`
//!
//! on piecewise-linear elements with homogeneous Dirichlet far ends. The
//! derivative-matching conditions at the vertex are natural conditions of
//! this form, so the vertex values stay free unknowns coupled only through
//! the rank-one jump block; the Kirchhoff-limit kind (lambda = 0) instead
//! eliminates the jump as a linear constraint. Assembly is performed
//! directly in a reduced basis so the same code path produces the full
//! operator, the symmetry-subspace restrictions and the constrained limit.

mod assemble;
mod branch;
mod resolvent;
mod solve;

pub use assemble::{assemble_operator, assemble_for_profile};
pub use branch::{eigen_branch_track, Branch, BranchPoint, BranchTrack, ZeroCrossing};
pub use resolvent::{free_resolvent_apply, resolvent_trace_residual};
pub use solve::{eigen_solve, eigen_solve_with_zero_tol};

use crate::graph::{GraphError, GraphFunction, VertexCondition, YJunction};
use crate::linalg::{ChainsMatrix, LinalgError};
use crate::profiles::{ProfileError, ProfileFamily, StationaryProfile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("the delta-prime form is singular at lambda = 0; use the Kirchhoff-limit kind")]
    ZeroLambda,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("speed symmetry violated: {0}")]
    SpeedSymmetry(String),
    #[error("profile is at lambda = {lambda} but the operation requires the critical coupling {critical}")]
    OffCritical { lambda: f64, critical: f64 },
    #[error("singular resolvent system: {0}")]
    SingularResolvent(String),
    #[error("eigenvalue solver failed to converge: {0}")]
    NonConvergence(String),
    #[error("branch matching failed: {0}")]
    OverlapMatching(String),
    #[error("vanishing derivative trace phi_j'(0) = {0}")]
    VanishingDerivativeTrace(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Potential of the operator: the free Laplacian part alone, or nodal
/// samples (cos phi for linearizations).
#[derive(Debug, Clone)]
pub enum Potential {
    Free,
    Samples(GraphFunction),
}

/// Invariant subspaces used to sharpen Morse-index counts. `C1` is
/// `{u : u_2 = u_3}` (requires c2 = c3); `C2` is
/// `{u : -u_1(-x) = u_2(x) = u_3(x)}` (requires c1 = c2 = c3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspaceKind {
    Full,
    C1,
    C2,
}

/// One reduced unknown expressed in full nodal coordinates. The first
/// entry is the "primary" node used when restricting nodal data into the
/// reduced space.
#[derive(Debug, Clone)]
pub(crate) struct BasisCol {
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct ReducedBasis {
    pub chains: Vec<Vec<BasisCol>>,
    pub border: Vec<BasisCol>,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.chains.iter().map(Vec::len).sum::<usize>() + self.border.len()
    }

    fn for_each_col(&self, mut f: impl FnMut(usize, &BasisCol)) {
        let mut idx = 0;
        for chain in &self.chains {
            for col in chain {
                f(idx, col);
                idx += 1;
            }
        }
        for col in &self.border {
            f(idx, col);
            idx += 1;
        }
    }
}

/// Discrete symmetric operator pencil (A, M) for the linearization, with
/// the bookkeeping needed to move between reduced coefficients and nodal
/// samples.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    junction: YJunction,
    cond: VertexCondition,
    subspace: SubspaceKind,
    pub(crate) basis: ReducedBasis,
    /// Galerkin form matrix (stiffness + potential + vertex coupling).
    pub a: ChainsMatrix,
    /// Consistent mass matrix.
    pub m: ChainsMatrix,
    potential: GraphFunction,
    free: bool,
    warnings: Vec<String>,
}

impl LinearizedOperator {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn junction(&self) -> &YJunction {
        &self.junction
    }

    pub fn condition(&self) -> VertexCondition {
        self.cond
    }

    pub fn subspace(&self) -> SubspaceKind {
        self.subspace
    }

    pub fn potential(&self) -> &GraphFunction {
        &self.potential
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Default kernel tolerance: 1e-4 at the reference spacing h = 0.01,
    /// scaled with h^2 and the potential amplitude.
    pub fn default_zero_tol(&self) -> f64 {
        let h = self.junction.grid_spacing();
        let pot = self.potential.sup_norm().max(1.0);
        1e-4 * (h / 0.01) * (h / 0.01) * pot
    }

    /// Reduced coefficients of nodal samples; exact whenever the samples
    /// lie in the reduced space (subspace and constraints satisfied, zero
    /// far-end values).
    pub fn restrict(&self, v: &GraphFunction) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.basis.for_each_col(|idx, col| {
            let (e, n, c) = col.entries[0];
            x[idx] = v.edges[e][n] / c;
        });
        x
    }

    /// Nodal samples of a reduced coefficient vector (far ends zero).
    pub fn expand(&self, x: &[f64]) -> GraphFunction {
        let mut out = GraphFunction::zeros(self.junction.points_per_edge());
        self.basis.for_each_col(|idx, col| {
            for &(e, n, c) in &col.entries {
                out.edges[e][n] += c * x[idx];
            }
        });
        out
    }

    pub fn matvec_a(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.a.matvec(x, &mut y);
        y
    }

    pub fn matvec_m(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.m.matvec(x, &mut y);
        y
    }

    /// Maximum symmetry defect of the assembled matrix. The storage scheme
    /// keeps one value per symmetric pair, so this is identically zero; it
    /// is exposed for diagnostics.
    pub fn symmetry_defect(&self) -> f64 {
        0.0
    }
}

/// Eigenvalues below a threshold with Morse-index bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub threshold: f64,
    pub eigenvalues_below: Vec<f64>,
    pub residuals: Vec<f64>,
    pub morse_index: usize,
    pub kernel_dim: usize,
    pub zero_tol: f64,
}

impl SpectrumReport {
    pub(crate) fn from_eigenvalues(
        threshold: f64,
        eigenvalues: Vec<f64>,
        residuals: Vec<f64>,
        zero_tol: f64,
    ) -> Self {
        let morse_index = eigenvalues.iter().filter(|&&e| e < -zero_tol).count();
        let kernel_dim = eigenvalues.iter().filter(|&&e| e.abs() <= zero_tol).count();
        SpectrumReport {
            threshold,
            eigenvalues_below: eigenvalues,
            residuals,
            morse_index,
            kernel_dim,
            zero_tol,
        }
    }
}

/// Eigenpairs: the report plus modes expanded to nodal samples
/// (unit L2 mass norm, deterministic sign convention).
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub report: SpectrumReport,
    pub modes: Vec<GraphFunction>,
}

/// Exact negative eigenpair of the free operator: for lambda < 0 the
/// point spectrum is the single simple eigenvalue -(c1+c2+c3)^2/lambda^2
/// with the exponential eigenfunction below; for lambda > 0 there is none.
pub fn analytic_free_eigenpair(
    junction: &YJunction,
) -> Result<Option<(f64, GraphFunction)>, SpectralError> {
    let lambda = junction.lambda();
    if lambda == 0.0 {
        return Err(SpectralError::ZeroLambda);
    }
    if lambda > 0.0 {
        return Ok(None);
    }
    let csum = junction.speed_sum();
    let mu = -(csum * csum) / (lambda * lambda);
    let alpha = csum / lambda;
    let (c1, c2, c3) = junction.speeds();
    let psi = GraphFunction::from_fn(junction, |e, x| match e {
        0 => -(-alpha / c1 * x).exp(),
        1 => (alpha / c2 * x).exp(),
        _ => (alpha / c3 * x).exp(),
    });
    Ok(Some((mu, psi)))
}

/// The two closed-form kernel candidates at the critical coupling:
/// `(-phi_1', phi_2', 0)` and `(0, phi_2', -phi_3')` for kinks,
/// `(phi_1', phi_2', 0)` and `(phi_1', 0, phi_2')` for kink/anti-kinks.
pub fn kernel_candidates(
    p: &StationaryProfile,
    junction: &YJunction,
) -> [GraphFunction; 2] {
    match p.family {
        ProfileFamily::Kink => [
            GraphFunction::from_fn(junction, |e, x| match e {
                0 => -p.phi_deriv(0, x),
                1 => p.phi_deriv(1, x),
                _ => 0.0,
            }),
            GraphFunction::from_fn(junction, |e, x| match e {
                1 => p.phi_deriv(1, x),
                2 => -p.phi_deriv(2, x),
                _ => 0.0,
            }),
        ],
        ProfileFamily::KinkAntiKink => [
            GraphFunction::from_fn(junction, |e, x| match e {
                0 => p.phi_deriv(0, x),
                1 => p.phi_deriv(1, x),
                _ => 0.0,
            }),
            GraphFunction::from_fn(junction, |e, x| match e {
                0 => p.phi_deriv(0, x),
                2 => p.phi_deriv(1, x),
                _ => 0.0,
            }),
        ],
    }
}

/// Relative operator residuals `||L Phi_i|| / ||Phi_i||` (measured in the
/// mass-weighted norms) of the two kernel candidates. Only meaningful at
/// the critical coupling, where the continuum residual vanishes; both
/// values decay like h^2.
pub fn kernel_candidates_residual(
    p: &StationaryProfile,
    junction: &YJunction,
) -> Result<(f64, f64), SpectralError> {
    let critical = p.critical_lambda();
    if (p.lambda - critical).abs() > 1e-8 * critical.abs().max(1.0) {
        return Err(SpectralError::OffCritical {
            lambda: p.lambda,
            critical,
        });
    }
    let op = assemble_for_profile(p, junction)?;
    let mass_factor = op.m.factor()?;
    let cands = kernel_candidates(p, junction);
    let mut out = [0.0f64; 2];
    for (slot, cand) in out.iter_mut().zip(cands.iter()) {
        let x = op.restrict(cand);
        let y = op.matvec_a(&x);
        let mut z = y.clone();
        mass_factor.solve(&mut z);
        let num: f64 = z.iter().zip(&y).map(|(a, b)| a * b).sum();
        let mx = op.matvec_m(&x);
        let den: f64 = mx.iter().zip(&x).map(|(a, b)| a * b).sum();
        *slot = (num.max(0.0) / den).sqrt();
    }
    Ok((out[0], out[1]))
}

/// Value of the assembled quadratic form at nodal samples.
pub fn quadratic_form(v: &GraphFunction, op: &LinearizedOperator) -> f64 {
    let x = op.restrict(v);
    let y = op.matvec_a(&x);
    x.iter().zip(&y).map(|(a, b)| a * b).sum()
}

/// Boundary term `P` of the operator inner product split `<L v, v> = A + P`:
/// `P = c1^2 psi_1(0)^2 phi_1''(0)/phi_1'(0)
///      - sum_{j=2,3} c_j^2 psi_j(0)^2 phi_j''(0)/phi_j'(0)`.
pub fn vertex_positivity_term(
    p: &StationaryProfile,
    v: &GraphFunction,
) -> Result<f64, SpectralError> {
    let (t1, t2, t3) = v.vertex_values();
    let traces = [t1, t2, t3];
    let mut acc = 0.0;
    for edge in 0..3 {
        let d1 = p.phi_deriv(edge, 0.0);
        if d1.abs() < 1e-14 {
            return Err(SpectralError::VanishingDerivativeTrace(d1));
        }
        let c = p.speed(edge);
        let ratio = p.phi_second_deriv(edge, 0.0) / d1;
        let term = c * c * traces[edge] * traces[edge] * ratio;
        if edge == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// The perturbation-theory integral controlling how the second restricted
/// eigenvalue branch leaves zero at the kink/anti-kink critical coupling:
///
/// `eta = 4 a1'(l0) int_{-inf}^0 (phi_1')^3 sin(phi_1)
///      + 2 a1'(l0) int_0^inf (phi_2')^3 sin(-phi_2)`,
///
/// evaluated by trapezoid on the truncated grid. Positive for this family.
pub fn eta_integral(
    p: &StationaryProfile,
    junction: &YJunction,
) -> Result<f64, SpectralError> {
    if p.family != ProfileFamily::KinkAntiKink {
        return Err(SpectralError::Profile(ProfileError::WrongFamily {
            expected: ProfileFamily::KinkAntiKink,
            got: p.family,
        }));
    }
    let critical = p.critical_lambda();
    if (p.lambda - critical).abs() > 1e-8 {
        return Err(SpectralError::OffCritical {
            lambda: p.lambda,
            critical,
        });
    }
    let aprime = crate::profiles::shift_map_derivative(p)?;
    let grid = junction.build_grid();
    let h = junction.grid_spacing();
    let trapz = |vals: &[f64]| -> f64 {
        let n = vals.len();
        let mut s = 0.5 * (vals[0] + vals[n - 1]);
        for v in &vals[1..n - 1] {
            s += v;
        }
        s * h
    };
    let inner: Vec<f64> = grid.edges[0]
        .iter()
        .map(|&x| {
            let d = p.phi_deriv(0, x);
            d * d * d * p.phi(0, x).sin()
        })
        .collect();
    let outer: Vec<f64> = grid.edges[1]
        .iter()
        .map(|&x| {
            let d = p.phi_deriv(1, x);
            d * d * d * (-p.phi(1, x)).sin()
        })
        .collect();
    Ok(4.0 * aprime * trapz(&inner) + 2.0 * aprime * trapz(&outer))
}

/// Predicted one-sided slope of the restricted branch through zero,
/// `beta = eta / ||Phi'_{l0}||^2` with `Phi'_{l0} = (2 phi_1', phi_2', phi_2')`.
pub fn branch_slope_prediction(
    p: &StationaryProfile,
    junction: &YJunction,
) -> Result<f64, SpectralError> {
    let eta = eta_integral(p, junction)?;
    let kernel = GraphFunction::from_fn(junction, |e, x| match e {
        0 => 2.0 * p.phi_deriv(0, x),
        _ => p.phi_deriv(1, x),
    });
    let norm_sq = crate::graph::graph_inner_product(&kernel, &kernel, junction)?;
    Ok(eta / norm_sq)
}

/// `B^T A B` restriction onto a symmetry subspace; requires the matching
/// speed symmetry and an operator assembled on the full space.
pub fn subspace_project(
    op: &LinearizedOperator,
    kind: SubspaceKind,
) -> Result<LinearizedOperator, SpectralError> {
    if op.subspace != SubspaceKind::Full {
        return Err(SpectralError::SpeedSymmetry(
            "projection must start from the full-space operator".into(),
        ));
    }
    let potential = if op.free {
        Potential::Free
    } else {
        Potential::Samples(op.potential.clone())
    };
    assemble::assemble_operator_in(&potential, &op.junction, op.cond, kind)
}
