//! Y-junction geometry, grids, vertex conditions and the inner products the
//! rest of the crate is built on.
//!
//! The junction has one incoming edge parametrized on [-L, 0] and two
//! outgoing edges on [0, L]; the three edges share the grid spacing
//! h = L/(N-1) so that the mirror maps of the symmetry subspaces are exact
//! index permutations. Functions on the graph may jump at the vertex: the
//! delta-prime coupling constrains weighted derivatives, not values.

use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid junction: {0}")]
    InvalidJunction(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("lambda-weighted norm is undefined at lambda = 0; use the Kirchhoff-limit vertex condition")]
    NormUndefinedAtZeroLambda,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Vertex coupling at the junction.
///
/// `DeltaPrime(lambda)` imposes equality of the weighted derivatives
/// c_j u_j' at the vertex together with
/// `sum_{j=2,3} c_j u_j(0+) - c_1 u_1(0-) = lambda * c_1 u_1'(0-)`.
/// `DeltaPrimeKirchhoffLimit` is the lambda = 0 member where the jump is
/// pinned to zero as a hard constraint (the 1/lambda form term is singular
/// there and is never evaluated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VertexCondition {
    DeltaPrime(f64),
    DeltaPrimeKirchhoffLimit,
}

impl VertexCondition {
    /// Map a real coupling parameter to the matching condition kind.
    pub fn from_lambda(lambda: f64) -> Self {
        if lambda == 0.0 {
            VertexCondition::DeltaPrimeKirchhoffLimit
        } else {
            VertexCondition::DeltaPrime(lambda)
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            VertexCondition::DeltaPrime(l) => *l,
            VertexCondition::DeltaPrimeKirchhoffLimit => 0.0,
        }
    }
}

/// Geometry and discretization of the Y-junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YJunction {
    speeds: (f64, f64, f64),
    lambda: f64,
    truncation_length: f64,
    points_per_edge: usize,
}

impl YJunction {
    pub fn new(
        speeds: (f64, f64, f64),
        lambda: f64,
        truncation_length: f64,
        points_per_edge: usize,
    ) -> Result<Self, GraphError> {
        let (c1, c2, c3) = speeds;
        if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) {
            return Err(GraphError::InvalidJunction(format!(
                "speeds must be positive, got ({c1}, {c2}, {c3})"
            )));
        }
        if !(truncation_length > 0.0) {
            return Err(GraphError::InvalidJunction(format!(
                "truncation_length must be positive, got {truncation_length}"
            )));
        }
        if points_per_edge < 16 {
            return Err(GraphError::InvalidJunction(format!(
                "points_per_edge must be at least 16, got {points_per_edge}"
            )));
        }
        if !lambda.is_finite() {
            return Err(GraphError::InvalidJunction("lambda must be finite".into()));
        }
        Ok(YJunction {
            speeds,
            lambda,
            truncation_length,
            points_per_edge,
        })
    }

    /// Default truncation for a given lambda: L = 40 * max c_j, N chosen so
    /// that h = 0.01 * max c_j.
    pub fn with_default_grid(speeds: (f64, f64, f64), lambda: f64) -> Result<Self, GraphError> {
        let cmax = speeds.0.max(speeds.1).max(speeds.2);
        YJunction::new(speeds, lambda, 40.0 * cmax, 4001)
    }

    pub fn speeds(&self) -> (f64, f64, f64) {
        self.speeds
    }

    pub fn speed(&self, edge: usize) -> f64 {
        match edge {
            0 => self.speeds.0,
            1 => self.speeds.1,
            2 => self.speeds.2,
            _ => panic!("edge index out of range"),
        }
    }

    pub fn speed_sum(&self) -> f64 {
        self.speeds.0 + self.speeds.1 + self.speeds.2
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.0.max(self.speeds.1).max(self.speeds.2)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut j = self.clone();
        j.lambda = lambda;
        j
    }

    pub fn vertex_condition(&self) -> VertexCondition {
        VertexCondition::from_lambda(self.lambda)
    }

    pub fn truncation_length(&self) -> f64 {
        self.truncation_length
    }

    pub fn points_per_edge(&self) -> usize {
        self.points_per_edge
    }

    pub fn grid_spacing(&self) -> f64 {
        self.truncation_length / (self.points_per_edge - 1) as f64
    }

    /// Node coordinates on every edge. Edge 1 ascends from -L to 0 (vertex
    /// last), edges 2 and 3 ascend from 0 (vertex first) to L.
    pub fn build_grid(&self) -> GridDescription {
        let n = self.points_per_edge;
        let h = self.grid_spacing();
        let l = self.truncation_length;
        let e1: Vec<f64> = (0..n).map(|k| -l + k as f64 * h).collect();
        let eout: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        GridDescription {
            edges: [e1, eout.clone(), eout],
        }
    }
}

/// Node coordinates per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDescription {
    pub edges: [Vec<f64>; 3],
}

impl GridDescription {
    /// JSON of the form `{"edges":[{"x":[...]},...]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct EdgeX<'a> {
            x: &'a [f64],
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            edges: [EdgeX<'a>; 3],
        }
        let doc = Doc {
            edges: [
                EdgeX { x: &self.edges[0] },
                EdgeX { x: &self.edges[1] },
                EdgeX { x: &self.edges[2] },
            ],
        };
        serde_json::to_string(&doc).expect("grid serialization cannot fail")
    }
}

/// One real sample array per edge on the shared grid convention. No
/// continuity across the vertex is assumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction {
    pub edges: [Vec<f64>; 3],
}

impl GraphFunction {
    pub fn zeros(n: usize) -> Self {
        GraphFunction {
            edges: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_fn(
        junction: &YJunction,
        mut f: impl FnMut(usize, f64) -> f64,
    ) -> Self {
        let grid = junction.build_grid();
        let mut out = GraphFunction::zeros(junction.points_per_edge());
        for e in 0..3 {
            for (k, &x) in grid.edges[e].iter().enumerate() {
                out.edges[e][k] = f(e, x);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.edges[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges[0].is_empty()
    }

    /// Values of the three traces at the vertex: (u1(0-), u2(0+), u3(0+)).
    pub fn vertex_values(&self) -> (f64, f64, f64) {
        let n = self.len();
        (self.edges[0][n - 1], self.edges[1][0], self.edges[2][0])
    }

    /// sum_{j=2,3} c_j u_j(0+) - c_1 u_1(0-).
    pub fn vertex_jump(&self, junction: &YJunction) -> f64 {
        let (u1, u2, u3) = self.vertex_values();
        let (c1, c2, c3) = junction.speeds();
        c2 * u2 + c3 * u3 - c1 * u1
    }

    pub fn sup_norm(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for e in self.edges.iter_mut() {
            for v in e.iter_mut() {
                *v *= s;
            }
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &GraphFunction) {
        for (e, oe) in self.edges.iter_mut().zip(other.edges.iter()) {
            for (v, ov) in e.iter_mut().zip(oe.iter()) {
                *v += alpha * ov;
            }
        }
    }

    /// One-sided second-order derivative traces at the vertex:
    /// (u1'(0-), u2'(0+), u3'(0+)).
    pub fn vertex_derivatives(&self, junction: &YJunction) -> (f64, f64, f64) {
        let h = junction.grid_spacing();
        let n = self.len();
        let e1 = &self.edges[0];
        let d1 = (3.0 * e1[n - 1] - 4.0 * e1[n - 2] + e1[n - 3]) / (2.0 * h);
        let dj = |e: &Vec<f64>| (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h);
        (d1, dj(&self.edges[1]), dj(&self.edges[2]))
    }

    /// Nodal derivative samples: centered differences in the interior,
    /// 3-point one-sided stencils at the edge ends.
    pub fn derivative_samples(&self, junction: &YJunction) -> GraphFunction {
        let h = junction.grid_spacing();
        let n = self.len();
        let mut out = GraphFunction::zeros(n);
        for e in 0..3 {
            let u = &self.edges[e];
            let d = &mut out.edges[e];
            d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
            for i in 1..n - 1 {
                d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
            }
            d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        }
        out
    }

    /// CSV with columns `edge,x,value`; edges are numbered 1..3.
    pub fn write_csv<W: Write>(
        &self,
        junction: &YJunction,
        mut w: W,
    ) -> Result<(), GraphError> {
        let grid = junction.build_grid();
        writeln!(w, "edge,x,value")?;
        for e in 0..3 {
            for (k, &x) in grid.edges[e].iter().enumerate() {
                writeln!(w, "{},{},{}", e + 1, x, self.edges[e][k])?;
            }
        }
        Ok(())
    }
}

/// Trapezoidal quadrature of `sum_j integral f_j` for nodal samples.
pub fn trapezoid(values: &GraphFunction, junction: &YJunction) -> f64 {
    let h = junction.grid_spacing();
    let mut acc = 0.0;
    for e in 0..3 {
        let v = &values.edges[e];
        let n = v.len();
        let mut s = 0.5 * (v[0] + v[n - 1]);
        for x in &v[1..n - 1] {
            s += *x;
        }
        acc += s * h;
    }
    acc
}

/// L2 inner product on the graph, `sum_j integral u_j v_j`, by trapezoid.
pub fn graph_inner_product(
    u: &GraphFunction,
    v: &GraphFunction,
    junction: &YJunction,
) -> Result<f64, GraphError> {
    if u.len() != v.len() || u.len() != junction.points_per_edge() {
        return Err(GraphError::GridMismatch(format!(
            "lengths {} and {} on a junction with N = {}",
            u.len(),
            v.len(),
            junction.points_per_edge()
        )));
    }
    let h = junction.grid_spacing();
    let mut acc = 0.0;
    for e in 0..3 {
        let a = &u.edges[e];
        let b = &v.edges[e];
        let n = a.len();
        let mut s = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
        for i in 1..n - 1 {
            s += a[i] * b[i];
        }
        acc += s * h;
    }
    Ok(acc)
}

pub fn graph_l2_norm(u: &GraphFunction, junction: &YJunction) -> f64 {
    graph_inner_product(u, u, junction)
        .expect("matching grids")
        .max(0.0)
        .sqrt()
}

/// Squared lambda-weighted H1 norm:
/// `||u'||^2 + (beta0 + 1) ||u||^2 + (1/lambda) |jump(u)|^2`
/// with beta0 = (sum c_j)^2 / lambda^2 for lambda < 0 and beta0 = 0 for
/// lambda > 0. Undefined at lambda = 0.
pub fn graph_norm_lambda(u: &GraphFunction, junction: &YJunction) -> Result<f64, GraphError> {
    let lambda = junction.lambda();
    if lambda == 0.0 {
        return Err(GraphError::NormUndefinedAtZeroLambda);
    }
    if u.len() != junction.points_per_edge() {
        return Err(GraphError::GridMismatch(format!(
            "length {} on a junction with N = {}",
            u.len(),
            junction.points_per_edge()
        )));
    }
    let beta0 = if lambda < 0.0 {
        let s = junction.speed_sum();
        s * s / (lambda * lambda)
    } else {
        0.0
    };
    let du = u.derivative_samples(junction);
    let grad = graph_inner_product(&du, &du, junction)?;
    let l2 = graph_inner_product(u, u, junction)?;
    let jump = u.vertex_jump(junction);
    Ok(grad + (beta0 + 1.0) * l2 + jump * jump / lambda)
}

/// Residuals of the delta-prime vertex conditions for nodal samples, using
/// second-order one-sided derivative stencils:
/// r1 = c1 u1'(0-) - c2 u2'(0+),
/// r2 = c2 u2'(0+) - c3 u3'(0+),
/// r3 = jump(u) - lambda c1 u1'(0-)   (or just jump(u) in the Kirchhoff
/// limit).
pub fn vertex_residual(
    u: &GraphFunction,
    cond: VertexCondition,
    junction: &YJunction,
) -> (f64, f64, f64) {
    let (c1, c2, c3) = junction.speeds();
    let (d1, d2, d3) = u.vertex_derivatives(junction);
    let r1 = c1 * d1 - c2 * d2;
    let r2 = c2 * d2 - c3 * d3;
    let jump = u.vertex_jump(junction);
    let r3 = match cond {
        VertexCondition::DeltaPrime(lambda) => jump - lambda * c1 * d1,
        VertexCondition::DeltaPrimeKirchhoffLimit => jump,
    };
    (r1, r2, r3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_match_arithmetic_progression() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 1.0, 16).unwrap();
        let g = j.build_grid();
        let h = j.grid_spacing();
        assert!((h - 1.0 / 15.0).abs() < 1e-15);
        assert!((g.edges[0][0] + 1.0).abs() < 1e-15);
        assert!(g.edges[0][15].abs() < 1e-15);
        assert!(g.edges[1][0].abs() < 1e-15);
        assert!((g.edges[1][15] - 1.0).abs() < 1e-15);
        for k in 1..16 {
            assert!((g.edges[0][k] - g.edges[0][k - 1] - h).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_spacing_example() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 40.0, 4001).unwrap();
        assert!((j.grid_spacing() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_nests_in_fine() {
        let coarse = YJunction::new((1.0, 1.0, 1.0), -4.0, 40.0, 2001).unwrap();
        let fine = YJunction::new((1.0, 1.0, 1.0), -4.0, 40.0, 4001).unwrap();
        let gc = coarse.build_grid();
        let gf = fine.build_grid();
        for (k, &x) in gc.edges[1].iter().enumerate() {
            assert!((x - gf.edges[1][2 * k]).abs() < 1e-12);
        }
    }

    #[test]
    fn junction_validation() {
        assert!(YJunction::new((0.0, 1.0, 1.0), -4.0, 40.0, 4001).is_err());
        assert!(YJunction::new((1.0, 1.0, 1.0), -4.0, -1.0, 4001).is_err());
        assert!(YJunction::new((1.0, 1.0, 1.0), -4.0, 40.0, 15).is_err());
        assert!(YJunction::new((1.0, 1.0, 1.0), f64::NAN, 40.0, 4001).is_err());
    }

    #[test]
    fn inner_product_of_unit_constants_is_three() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 1.0, 101).unwrap();
        let ones = GraphFunction::from_fn(&j, |_, _| 1.0);
        let ip = graph_inner_product(&ones, &ones, &j).unwrap();
        assert!((ip - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_disjoint_supports_vanishes() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 1.0, 101).unwrap();
        let u = GraphFunction::from_fn(&j, |e, _| if e == 0 { 1.0 } else { 0.0 });
        let v = GraphFunction::from_fn(&j, |e, _| if e == 1 { 1.0 } else { 0.0 });
        assert_eq!(graph_inner_product(&u, &v, &j).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_rejects_mismatched_grids() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 1.0, 101).unwrap();
        let u = GraphFunction::zeros(101);
        let v = GraphFunction::zeros(100);
        assert!(graph_inner_product(&u, &v, &j).is_err());
    }

    #[test]
    fn kink_derivative_inner_product_matches_closed_form() {
        // At the critical coupling all shifts vanish and each edge carries
        // |phi'| = 2 sech(x / c); with unit speeds
        // sum_j int (2 sech x)^2 = 3 * 4 tanh L.
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 20.0, 4001).unwrap();
        let u = GraphFunction::from_fn(&j, |_, x| 2.0 / x.cosh());
        let ip = graph_inner_product(&u, &u, &j).unwrap();
        let exact = 12.0 * (20.0f64).tanh();
        assert!(
            (ip - exact).abs() < 1e-8,
            "quadrature {ip} vs closed form {exact}"
        );
    }

    #[test]
    fn norm_lambda_zero_function_is_zero() {
        let j = YJunction::new((1.0, 1.0, 1.0), -3.0, 40.0, 1001).unwrap();
        let z = GraphFunction::zeros(1001);
        assert_eq!(graph_norm_lambda(&z, &j).unwrap(), 0.0);
    }

    #[test]
    fn norm_lambda_rejects_zero_lambda() {
        let j = YJunction::new((1.0, 1.0, 1.0), 0.0, 40.0, 1001).unwrap();
        let z = GraphFunction::zeros(1001);
        assert!(matches!(
            graph_norm_lambda(&z, &j),
            Err(GraphError::NormUndefinedAtZeroLambda)
        ));
    }

    #[test]
    fn norm_lambda_zero_jump_reduces_to_weighted_h1() {
        let j = YJunction::new((1.0, 1.0, 1.0), -2.0, 10.0, 2001).unwrap();
        // Zero trace on every edge at the vertex: jump vanishes.
        let u = GraphFunction::from_fn(&j, |e, x| {
            let y = if e == 0 { -x } else { x };
            y * (-y).exp()
        });
        let beta0 = 9.0 / 4.0;
        let du = u.derivative_samples(&j);
        let expected = graph_inner_product(&du, &du, &j).unwrap()
            + (beta0 + 1.0) * graph_inner_product(&u, &u, &j).unwrap();
        let got = graph_norm_lambda(&u, &j).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn norm_lambda_free_eigenfunction_matches_exponential_integrals() {
        // u = (-e^x, e^-x, e^-x) for lambda = -3, unit speeds: each edge
        // contributes (1 - e^{-2L})/2 to ||u||^2 and ||u'||^2, beta0 = 1 and
        // the jump equals 3 exactly, so
        // ||u||_{1,lambda}^2 = (9/2)(1 - e^{-2L}) - 3.
        let l = 40.0;
        let j = YJunction::new((1.0, 1.0, 1.0), -3.0, l, 64001).unwrap();
        let u = GraphFunction::from_fn(&j, |e, x| if e == 0 { -x.exp() } else { (-x).exp() });
        let exact = 4.5 * (1.0 - (-2.0 * l).exp()) - 3.0;
        let got = graph_norm_lambda(&u, &j).unwrap();
        assert!(got > 0.0);
        assert!(
            ((got - exact) / exact).abs() < 1e-6,
            "got {got}, exact {exact}"
        );
    }

    #[test]
    fn norm_lambda_is_nonnegative_for_positive_lambda() {
        let j = YJunction::new((1.0, 1.0, 1.0), 2.5, 10.0, 501).unwrap();
        let mut rng = crate::linalg::SplitMix64::new(11);
        for _ in 0..25 {
            let u = GraphFunction::from_fn(&j, |_, _| rng.next_sym());
            assert!(graph_norm_lambda(&u, &j).unwrap() >= 0.0);
        }
    }

    #[test]
    fn vertex_residual_of_constant_function() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 10.0, 1001).unwrap();
        let k = 0.7;
        let u = GraphFunction::from_fn(&j, |_, _| k);
        let (r1, r2, r3) = vertex_residual(&u, VertexCondition::DeltaPrime(-4.0), &j);
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        assert!((r3 - k).abs() < 1e-12);
    }

    #[test]
    fn grid_json_shape() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 1.0, 16).unwrap();
        let s = j.build_grid().to_json();
        assert!(s.starts_with("{\"edges\":[{\"x\":[-1.0,"));
    }

    #[test]
    fn csv_has_expected_header_and_rows() {
        let j = YJunction::new((1.0, 1.0, 1.0), -4.0, 1.0, 16).unwrap();
        let u = GraphFunction::zeros(16);
        let mut buf = Vec::new();
        u.write_csv(&j, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("edge,x,value"));
        assert_eq!(text.lines().count(), 1 + 3 * 16);
    }
}
