//! Eigenvalue continuation along the coupling parameter.
//!
//! For each lambda on an ascending grid the stationary profile is re-solved,
//! the operator reassembled (switching to the Kirchhoff-limit kind exactly
//! at lambda = 0) and the low spectrum computed; eigenvalues at adjacent
//! grid points are then matched into branches by normalized eigenvector
//! overlap, so crossings of zero and their one-sided slopes can be read off
//! a single branch.

use super::{
    assemble_for_profile, eigen_solve, subspace_project, SpectralError, SpectrumReport,
    SubspaceKind,
};
use crate::graph::{graph_inner_product, GraphFunction, YJunction};
use crate::profiles::{solve_antikink_shift, solve_kink_shifts, ProfileFamily};

#[derive(Debug, Clone, Copy)]
pub struct BranchPoint {
    pub lambda: f64,
    pub mu: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub id: usize,
    pub points: Vec<BranchPoint>,
}

/// A sign change of a tracked branch: interpolated crossing location plus
/// secant slopes measured on each side.
#[derive(Debug, Clone, Copy)]
pub struct ZeroCrossing {
    pub branch_id: usize,
    pub lambda: f64,
    pub slope_left: f64,
    pub slope_right: f64,
}

#[derive(Debug, Clone)]
pub struct BranchTrack {
    pub lambdas: Vec<f64>,
    pub reports: Vec<SpectrumReport>,
    pub branches: Vec<Branch>,
    pub crossings: Vec<ZeroCrossing>,
}

const MATCH_THRESHOLD: f64 = 0.9;
const AMBIGUOUS_FLOOR: f64 = 0.5;

pub fn eigen_branch_track(
    family: ProfileFamily,
    lambda_grid: &[f64],
    junction: &YJunction,
    subspace: SubspaceKind,
    threshold: f64,
) -> Result<BranchTrack, SpectralError> {
    let mut lambdas = Vec::with_capacity(lambda_grid.len());
    let mut reports = Vec::with_capacity(lambda_grid.len());
    let mut branches: Vec<Branch> = Vec::new();
    // Modes carried over from the previous grid point: (id, eigenvalue, mode).
    let mut prev: Vec<(usize, f64, GraphFunction)> = Vec::new();
    for &lambda in lambda_grid {
        let profile = match family {
            ProfileFamily::Kink => solve_kink_shifts(lambda, junction.speeds())?,
            ProfileFamily::KinkAntiKink => solve_antikink_shift(lambda)?,
        };
        let jl = junction.with_lambda(lambda);
        let mut op = assemble_for_profile(&profile, &jl)?;
        if subspace != SubspaceKind::Full {
            op = subspace_project(&op, subspace)?;
        }
        let sol = eigen_solve(&op, threshold)?;
        let mut assigned: Vec<Option<usize>> = vec![None; sol.modes.len()];
        if !prev.is_empty() && !sol.modes.is_empty() {
            // Pairwise overlaps, greedy one-to-one assignment first.
            let mut ov = vec![vec![0.0f64; prev.len()]; sol.modes.len()];
            let mut cands = Vec::new();
            for (ci, mode) in sol.modes.iter().enumerate() {
                for (pi, (_, _, pmode)) in prev.iter().enumerate() {
                    let o = overlap(mode, pmode, &jl)?;
                    ov[ci][pi] = o;
                    cands.push((o, ci, pi));
                }
            }
            cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let mut prev_used = vec![false; prev.len()];
            for (o, ci, pi) in &cands {
                if *o < MATCH_THRESHOLD {
                    break;
                }
                if assigned[*ci].is_none() && !prev_used[*pi] {
                    assigned[*ci] = Some(prev[*pi].0);
                    prev_used[*pi] = true;
                }
            }
            // Near-degenerate clusters rotate their internal basis freely,
            // so unmatched modes are tested against cluster spans instead
            // of single vectors.
            let clusters = cluster_indices(&prev);
            for ci in 0..sol.modes.len() {
                if assigned[ci].is_some() {
                    continue;
                }
                let mut best_cluster: Option<(f64, usize)> = None;
                for (ki, members) in clusters.iter().enumerate() {
                    if !members.iter().any(|&pi| !prev_used[pi]) {
                        continue;
                    }
                    let span: f64 = members
                        .iter()
                        .map(|&pi| ov[ci][pi] * ov[ci][pi])
                        .sum::<f64>()
                        .sqrt();
                    if best_cluster.is_none_or(|(b, _)| span > b) {
                        best_cluster = Some((span, ki));
                    }
                }
                if let Some((span, ki)) = best_cluster {
                    if span >= MATCH_THRESHOLD {
                        let pi = clusters[ki]
                            .iter()
                            .filter(|&&pi| !prev_used[pi])
                            .max_by(|&&a, &&b| ov[ci][a].partial_cmp(&ov[ci][b]).unwrap())
                            .copied()
                            .expect("cluster has an unused member");
                        assigned[ci] = Some(prev[pi].0);
                        prev_used[pi] = true;
                        continue;
                    }
                }
                let best = ov[ci].iter().copied().fold(0.0f64, f64::max);
                if best >= AMBIGUOUS_FLOOR {
                    return Err(SpectralError::OverlapMatching(format!(
                        "mode at lambda = {lambda} has best overlap {best:.3} in \
                         ({AMBIGUOUS_FLOOR}, {MATCH_THRESHOLD}); refine the lambda grid"
                    )));
                }
            }
        }
        let mut next_prev = Vec::with_capacity(sol.modes.len());
        for (ci, mode) in sol.modes.iter().enumerate() {
            let id = match assigned[ci] {
                Some(id) => id,
                None => {
                    let id = branches.len();
                    branches.push(Branch {
                        id,
                        points: Vec::new(),
                    });
                    id
                }
            };
            branches[id].points.push(BranchPoint {
                lambda,
                mu: sol.report.eigenvalues_below[ci],
                residual: sol.report.residuals[ci],
            });
            next_prev.push((id, sol.report.eigenvalues_below[ci], mode.clone()));
        }
        prev = next_prev;
        lambdas.push(lambda);
        reports.push(sol.report);
    }
    let crossings = find_crossings(&branches);
    Ok(BranchTrack {
        lambdas,
        reports,
        branches,
        crossings,
    })
}

/// Consecutive-index clusters of near-degenerate previous eigenvalues
/// (ascending input order).
fn cluster_indices(prev: &[(usize, f64, GraphFunction)]) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pi, (_, mu, _)) in prev.iter().enumerate() {
        let joined = if let Some(last) = clusters.last_mut() {
            let (_, last_mu, _) = prev[*last.last().unwrap()];
            if (mu - last_mu).abs() <= 0.05 * (1.0 + last_mu.abs()) {
                last.push(pi);
                true
            } else {
                false
            }
        } else {
            false
        };
        if !joined {
            clusters.push(vec![pi]);
        }
    }
    clusters
}

fn overlap(a: &GraphFunction, b: &GraphFunction, j: &YJunction) -> Result<f64, SpectralError> {
    let num = graph_inner_product(a, b, j)?.abs();
    let na = graph_inner_product(a, a, j)?.sqrt();
    let nb = graph_inner_product(b, b, j)?.sqrt();
    Ok(num / (na * nb).max(1e-300))
}

fn find_crossings(branches: &[Branch]) -> Vec<ZeroCrossing> {
    let mut out = Vec::new();
    for br in branches {
        let pts = &br.points;
        for i in 0..pts.len().saturating_sub(1) {
            let (p, q) = (pts[i], pts[i + 1]);
            if p.mu == 0.0 || p.mu * q.mu >= 0.0 {
                continue;
            }
            let frac = p.mu / (p.mu - q.mu);
            let lambda = p.lambda + frac * (q.lambda - p.lambda);
            let secant = (q.mu - p.mu) / (q.lambda - p.lambda);
            let slope_left = if i >= 1 {
                (p.mu - pts[i - 1].mu) / (p.lambda - pts[i - 1].lambda)
            } else {
                secant
            };
            let slope_right = if i + 2 < pts.len() {
                (pts[i + 2].mu - q.mu) / (pts[i + 2].lambda - q.lambda)
            } else {
                secant
            };
            out.push(ZeroCrossing {
                branch_id: br.id,
                lambda,
                slope_left,
                slope_right,
            });
        }
    }
    out
}
