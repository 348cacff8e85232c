//! Galerkin assembly of the operator pencil in a reduced basis.
//!
//! Per edge the piecewise-linear stiffness, potential and mass blocks are
//! plain tridiagonal matrices over all N nodes; the reduced matrices are
//! obtained by contracting those blocks (plus the rank-one vertex coupling)
//! with sparse basis columns. One code path therefore covers the full
//! space, both symmetry subspaces and the Kirchhoff-limit constraint.

use super::{
    BasisCol, LinearizedOperator, Potential, ReducedBasis, SpectralError, SubspaceKind,
};
use crate::graph::{GraphFunction, VertexCondition, YJunction};
use crate::linalg::{ChainsMatrix, Link, Tridiag};
use crate::profiles::StationaryProfile;

/// Per-edge full tridiagonal blocks of the form and the mass.
struct EdgeBlocks {
    form: [Tridiag; 3],
    mass: [Tridiag; 3],
}

fn edge_blocks(potential: &GraphFunction, junction: &YJunction) -> EdgeBlocks {
    let n = junction.points_per_edge();
    let h = junction.grid_spacing();
    let mut form = [Tridiag::zeros(n), Tridiag::zeros(n), Tridiag::zeros(n)];
    let mut mass = [Tridiag::zeros(n), Tridiag::zeros(n), Tridiag::zeros(n)];
    for e in 0..3 {
        let c = junction.speed(e);
        let k = c * c / h;
        let v = &potential.edges[e];
        let (f, m) = (&mut form[e], &mut mass[e]);
        for i in 0..n - 1 {
            let (a, b) = (v[i], v[i + 1]);
            // Stiffness.
            f.diag[i] += k;
            f.diag[i + 1] += k;
            f.off[i] -= k;
            // Potential, with the nodal values interpolated linearly.
            f.diag[i] += h * (3.0 * a + b) / 12.0;
            f.diag[i + 1] += h * (a + 3.0 * b) / 12.0;
            f.off[i] += h * (a + b) / 12.0;
            // Consistent mass.
            m.diag[i] += h / 3.0;
            m.diag[i + 1] += h / 3.0;
            m.off[i] += h / 6.0;
        }
    }
    EdgeBlocks { form, mass }
}

/// Weight of a column against the jump functional
/// `sum_{j=2,3} c_j u_j(0+) - c_1 u_1(0-)`.
fn jump_weight(col: &BasisCol, junction: &YJunction) -> f64 {
    let n = junction.points_per_edge();
    let (c1, c2, c3) = junction.speeds();
    let mut acc = 0.0;
    for &(e, node, coeff) in &col.entries {
        match (e, node) {
            (0, v) if v == n - 1 => acc -= c1 * coeff,
            (1, 0) => acc += c2 * coeff,
            (2, 0) => acc += c3 * coeff,
            _ => {}
        }
    }
    acc
}

fn pair_value(blocks: &[Tridiag; 3], p: &BasisCol, q: &BasisCol) -> f64 {
    let mut acc = 0.0;
    for &(e, i, a) in &p.entries {
        for &(e2, j, b) in &q.entries {
            if e != e2 {
                continue;
            }
            let t = &blocks[e];
            let v = if i == j {
                t.diag[i]
            } else if i + 1 == j {
                t.off[i]
            } else if j + 1 == i {
                t.off[j]
            } else {
                0.0
            };
            acc += a * b * v;
        }
    }
    acc
}

fn build_basis(
    junction: &YJunction,
    cond: VertexCondition,
    kind: SubspaceKind,
) -> Result<ReducedBasis, SpectralError> {
    let n = junction.points_per_edge();
    let (c1, c2, c3) = junction.speeds();
    let speed_tol = 1e-12 * junction.max_speed();
    let vtx = n - 1;
    let single = |e: usize, node: usize| BasisCol {
        entries: vec![(e, node, 1.0)],
    };
    match kind {
        SubspaceKind::Full => {
            let chains = vec![
                (1..n - 1).map(|i| single(0, i)).collect(),
                (1..n - 1).map(|i| single(1, i)).collect(),
                (1..n - 1).map(|i| single(2, i)).collect(),
            ];
            let border = match cond {
                VertexCondition::DeltaPrime(_) => {
                    vec![single(0, vtx), single(1, 0), single(2, 0)]
                }
                VertexCondition::DeltaPrimeKirchhoffLimit => vec![
                    BasisCol {
                        entries: vec![(1, 0, 1.0), (0, vtx, c2 / c1)],
                    },
                    BasisCol {
                        entries: vec![(2, 0, 1.0), (0, vtx, c3 / c1)],
                    },
                ],
            };
            Ok(ReducedBasis { chains, border })
        }
        SubspaceKind::C1 => {
            if (c2 - c3).abs() > speed_tol {
                return Err(SpectralError::SpeedSymmetry(format!(
                    "C1 requires c2 = c3, got c2 = {c2}, c3 = {c3}"
                )));
            }
            let s = 0.5f64.sqrt();
            let pair = |node: usize| BasisCol {
                entries: vec![(1, node, s), (2, node, s)],
            };
            let chains = vec![
                (1..n - 1).map(|i| single(0, i)).collect(),
                (1..n - 1).map(pair).collect(),
            ];
            let border = match cond {
                VertexCondition::DeltaPrime(_) => vec![single(0, vtx), pair(0)],
                VertexCondition::DeltaPrimeKirchhoffLimit => vec![BasisCol {
                    entries: vec![(1, 0, s), (2, 0, s), (0, vtx, (c2 + c3) * s / c1)],
                }],
            };
            Ok(ReducedBasis { chains, border })
        }
        SubspaceKind::C2 => {
            if (c1 - c2).abs() > speed_tol || (c2 - c3).abs() > speed_tol {
                return Err(SpectralError::SpeedSymmetry(format!(
                    "C2 requires c1 = c2 = c3, got ({c1}, {c2}, {c3})"
                )));
            }
            let t = (1.0f64 / 3.0).sqrt();
            let triple = |m: usize| BasisCol {
                entries: vec![(1, m, t), (2, m, t), (0, vtx - m, -t)],
            };
            let chains = vec![(1..n - 1).map(triple).collect()];
            let border = match cond {
                VertexCondition::DeltaPrime(_) => vec![triple(0)],
                // The constraint (c1+c2+c3) * trace = 0 pins the vertex
                // value of a C2 element to zero.
                VertexCondition::DeltaPrimeKirchhoffLimit => vec![],
            };
            Ok(ReducedBasis { chains, border })
        }
    }
}

pub(crate) fn assemble_operator_in(
    potential: &Potential,
    junction: &YJunction,
    cond: VertexCondition,
    kind: SubspaceKind,
) -> Result<LinearizedOperator, SpectralError> {
    let n = junction.points_per_edge();
    let (samples, free) = match potential {
        Potential::Free => (GraphFunction::zeros(n), true),
        Potential::Samples(v) => {
            if v.len() != n {
                return Err(SpectralError::GridMismatch(format!(
                    "potential sampled on {} nodes per edge, junction has {}",
                    v.len(),
                    n
                )));
            }
            (v.clone(), false)
        }
    };
    let inv_lambda = match cond {
        VertexCondition::DeltaPrime(lambda) => {
            if lambda == 0.0 {
                return Err(SpectralError::ZeroLambda);
            }
            Some(1.0 / lambda)
        }
        VertexCondition::DeltaPrimeKirchhoffLimit => None,
    };
    let blocks = edge_blocks(&samples, junction);
    let basis = build_basis(junction, cond, kind)?;

    let form_pair = |p: &BasisCol, q: &BasisCol| -> f64 {
        let mut v = pair_value(&blocks.form, p, q);
        if let Some(il) = inv_lambda {
            v += il * jump_weight(p, junction) * jump_weight(q, junction);
        }
        v
    };
    let mass_pair = |p: &BasisCol, q: &BasisCol| pair_value(&blocks.mass, p, q);

    let mut a_chains = Vec::new();
    let mut m_chains = Vec::new();
    for chain in &basis.chains {
        let len = chain.len();
        let mut at = Tridiag::zeros(len);
        let mut mt = Tridiag::zeros(len);
        for (i, col) in chain.iter().enumerate() {
            at.diag[i] = form_pair(col, col);
            mt.diag[i] = mass_pair(col, col);
            if i + 1 < len {
                at.off[i] = form_pair(col, &chain[i + 1]);
                mt.off[i] = mass_pair(col, &chain[i + 1]);
            }
        }
        a_chains.push(at);
        m_chains.push(mt);
    }
    let k = basis.border.len();
    let mut a_border = vec![0.0; k * k];
    let mut m_border = vec![0.0; k * k];
    for (bi, bcol) in basis.border.iter().enumerate() {
        for (bj, bcol2) in basis.border.iter().enumerate() {
            if bj < bi {
                a_border[bi * k + bj] = a_border[bj * k + bi];
                m_border[bi * k + bj] = m_border[bj * k + bi];
            } else {
                a_border[bi * k + bj] = form_pair(bcol, bcol2);
                m_border[bi * k + bj] = mass_pair(bcol, bcol2);
            }
        }
    }
    // Chain end columns are the only interior unknowns a border column can
    // touch through the tridiagonal blocks (the Kirchhoff fold reaches the
    // last edge-1 interior node, everything else is adjacent to a vertex).
    let mut a_links = Vec::new();
    let mut m_links = Vec::new();
    for (ci, chain) in basis.chains.iter().enumerate() {
        for pos in [0usize, chain.len() - 1] {
            for (bi, bcol) in basis.border.iter().enumerate() {
                let av = form_pair(&chain[pos], bcol);
                let mv = mass_pair(&chain[pos], bcol);
                if av != 0.0 || mv != 0.0 {
                    a_links.push(Link {
                        chain: ci,
                        pos,
                        border: bi,
                        value: av,
                    });
                    m_links.push(Link {
                        chain: ci,
                        pos,
                        border: bi,
                        value: mv,
                    });
                }
            }
        }
    }
    let a = ChainsMatrix {
        chains: a_chains,
        links: a_links,
        border: a_border,
        k,
    };
    let m = ChainsMatrix {
        chains: m_chains,
        links: m_links,
        border: m_border,
        k,
    };

    let mut warnings = Vec::new();
    if free && junction.lambda() < 0.0 {
        let alpha = junction.speed_sum() / junction.lambda();
        let reach = junction.truncation_length() * alpha.abs() / junction.max_speed();
        if reach < 20.0 {
            warnings.push(format!(
                "free-operator eigenfunction decays over L*|alpha|/max c = {reach:.2} < 20; \
                 truncation may bias the eigenvalue"
            ));
        }
    }

    Ok(LinearizedOperator {
        junction: junction.clone(),
        cond,
        subspace: kind,
        basis,
        a,
        m,
        potential: samples,
        free,
        warnings,
    })
}

/// Assemble the full-space operator for a potential and vertex condition.
pub fn assemble_operator(
    potential: &Potential,
    junction: &YJunction,
    cond: VertexCondition,
) -> Result<LinearizedOperator, SpectralError> {
    assemble_operator_in(potential, junction, cond, SubspaceKind::Full)
}

/// Linearization around a stationary profile (potential cos phi_j) with the
/// vertex condition matching the profile's coupling parameter.
pub fn assemble_for_profile(
    p: &StationaryProfile,
    junction: &YJunction,
) -> Result<LinearizedOperator, SpectralError> {
    let cond = VertexCondition::from_lambda(p.lambda);
    assemble_operator(&Potential::Samples(p.potential(junction)), junction, cond)
}
