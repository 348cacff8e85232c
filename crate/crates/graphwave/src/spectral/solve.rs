//! Deterministic generalized eigenvalue solver for the assembled pencil.
//!
//! All eigenvalues below a threshold are located by inertia bisection
//! (Sturm counts on the chains plus the Schur complement on the border),
//! then each isolated eigenvalue is polished by shift-inverted inverse
//! iteration; clusters that bisection cannot split get a small block
//! iteration with Rayleigh-Ritz extraction. No randomness beyond a fixed
//! seeded generator, so repeated runs agree bit for bit.

use super::{EigenSolution, LinearizedOperator, SpectralError, SpectrumReport};
use crate::linalg::{small_sym_eigen, ChainsFactor, ChainsMatrix, SplitMix64};

const ISOLATE_ATOL: f64 = 1e-12;
const ISOLATE_RTOL: f64 = 1e-12;
const MAX_BISECT: usize = 220;

struct Pencil<'a> {
    a: &'a ChainsMatrix,
    m: &'a ChainsMatrix,
    norm_a: f64,
    norm_m: f64,
    scale: f64,
}

impl<'a> Pencil<'a> {
    fn count_below(&self, sigma: f64) -> Result<usize, SpectralError> {
        Ok(self.a.shifted(self.m, sigma)?.count_negative())
    }

    fn factor_near(&self, sigma: f64, width: f64) -> Result<ChainsFactor, SpectralError> {
        let mut s = sigma;
        for attempt in 0..6 {
            let shifted = self.a.shifted(self.m, s)?;
            match shifted.factor() {
                Ok(f) => return Ok(f),
                Err(_) => {
                    // Shift landed on an eigenvalue; nudge and retry.
                    s = sigma + (attempt + 1) as f64 * (1e-3 * width + 1e-12 * self.scale);
                }
            }
        }
        Err(SpectralError::NonConvergence(format!(
            "could not factor the pencil near shift {sigma}"
        )))
    }

    fn dot_m(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut my = vec![0.0; y.len()];
        self.m.matvec(y, &mut my);
        x.iter().zip(&my).map(|(a, b)| a * b).sum()
    }

    fn rayleigh(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        let mut mx = vec![0.0; x.len()];
        self.a.matvec(x, &mut ax);
        self.m.matvec(x, &mut mx);
        let num: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        num / den
    }

    /// Backward-error style residual of an approximate eigenpair.
    fn residual(&self, x: &[f64], mu: f64) -> f64 {
        let mut ax = vec![0.0; x.len()];
        let mut mx = vec![0.0; x.len()];
        self.a.matvec(x, &mut ax);
        self.m.matvec(x, &mut mx);
        let num = ax
            .iter()
            .zip(&mx)
            .map(|(a, m)| (a - mu * m) * (a - mu * m))
            .sum::<f64>()
            .sqrt();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        num / ((self.norm_a + mu.abs() * self.norm_m) * nx)
    }
}

fn start_vector(dim: usize, tag: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(0x5eed_0001_u64 ^ (dim as u64).wrapping_mul(0x9e37) ^ tag);
    (0..dim).map(|_| rng.next_sym()).collect()
}

/// Solve for all eigenvalues of (A, M) strictly below `threshold`; the
/// kernel tolerance of the report is the operator default.
pub fn eigen_solve(
    op: &LinearizedOperator,
    threshold: f64,
) -> Result<EigenSolution, SpectralError> {
    eigen_solve_with_zero_tol(op, threshold, op.default_zero_tol())
}

pub fn eigen_solve_with_zero_tol(
    op: &LinearizedOperator,
    threshold: f64,
    zero_tol: f64,
) -> Result<EigenSolution, SpectralError> {
    let norm_a = op.a.norm_inf().max(1e-300);
    let norm_m = op.m.norm_inf().max(1e-300);
    let pencil = Pencil {
        a: &op.a,
        m: &op.m,
        norm_a,
        norm_m,
        scale: norm_a / norm_m,
    };
    let dim = op.dim();
    if dim == 0 {
        return Ok(EigenSolution {
            report: SpectrumReport::from_eigenvalues(threshold, vec![], vec![], zero_tol),
            modes: vec![],
        });
    }
    let total = pencil.count_below(threshold)?;
    if total == 0 {
        return Ok(EigenSolution {
            report: SpectrumReport::from_eigenvalues(threshold, vec![], vec![], zero_tol),
            modes: vec![],
        });
    }
    // Lower bound with no spectrum below it.
    let mut lo = threshold.min(0.0) - 1.0;
    for _ in 0..120 {
        if pencil.count_below(lo)? == 0 {
            break;
        }
        lo = 2.0 * lo - 1.0;
    }
    if pencil.count_below(lo)? != 0 {
        return Err(SpectralError::NonConvergence(
            "no finite lower spectral bound found".into(),
        ));
    }
    // Isolate eigenvalues by bisection on the inertia counts.
    let mut work = vec![(lo, threshold, 0usize, total)];
    let mut boxes: Vec<(f64, f64, usize)> = Vec::new();
    let mut steps = 0usize;
    while let Some((a, b, ca, cb)) = work.pop() {
        let inside = cb - ca;
        if inside == 0 {
            continue;
        }
        let width = b - a;
        let tol = ISOLATE_ATOL + ISOLATE_RTOL * a.abs().max(b.abs());
        if width <= tol {
            boxes.push((a, b, inside));
            continue;
        }
        steps += 1;
        if steps > MAX_BISECT * total.max(1) {
            return Err(SpectralError::NonConvergence(format!(
                "bisection budget exhausted isolating {inside} eigenvalue(s) in [{a}, {b}]"
            )));
        }
        let mid = 0.5 * (a + b);
        let cm = pencil.count_below(mid)?;
        let cm = cm.clamp(ca, cb);
        if cm > ca {
            work.push((a, mid, ca, cm));
        }
        if cb > cm {
            work.push((mid, b, cm, cb));
        }
    }
    boxes.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    for (a, b, count) in boxes {
        let sigma = 0.5 * (a + b);
        let factor = pencil.factor_near(sigma, (b - a).max(1e-12))?;
        if count == 1 {
            let x = inverse_iteration(&pencil, &factor, dim, pairs.len() as u64)?;
            let mu = pencil.rayleigh(&x);
            pairs.push((mu, x));
        } else {
            let block = block_iteration(&pencil, &factor, dim, count)?;
            pairs.extend(block);
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs.truncate(total);

    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    let mut modes = Vec::with_capacity(pairs.len());
    for (mu, x) in pairs.into_iter().filter(|(mu, _)| *mu < threshold) {
        let res = pencil.residual(&x, mu);
        if res > 1e-8 {
            return Err(SpectralError::NonConvergence(format!(
                "eigenpair at mu = {mu} has residual {res:.3e}"
            )));
        }
        eigenvalues.push(mu);
        residuals.push(res);
        modes.push(op.expand(&x));
    }
    Ok(EigenSolution {
        report: SpectrumReport::from_eigenvalues(threshold, eigenvalues, residuals, zero_tol),
        modes,
    })
}

fn normalize_m(pencil: &Pencil, x: &mut [f64]) -> f64 {
    let nrm = pencil.dot_m(x, x).max(0.0).sqrt();
    if nrm > 0.0 {
        // Deterministic sign: largest-magnitude component positive.
        let mut lead = 0.0f64;
        for &v in x.iter() {
            if v.abs() > lead.abs() {
                lead = v;
            }
        }
        let s = if lead < 0.0 { -1.0 } else { 1.0 };
        for v in x.iter_mut() {
            *v *= s / nrm;
        }
    }
    nrm
}

fn inverse_iteration(
    pencil: &Pencil,
    factor: &ChainsFactor,
    dim: usize,
    tag: u64,
) -> Result<Vec<f64>, SpectralError> {
    let mut x = start_vector(dim, tag);
    normalize_m(pencil, &mut x);
    let mut last_mu = f64::INFINITY;
    for _ in 0..100 {
        let mut y = vec![0.0; dim];
        pencil.m.matvec(&x, &mut y);
        factor.solve(&mut y);
        x = y;
        normalize_m(pencil, &mut x);
        let mu = pencil.rayleigh(&x);
        if pencil.residual(&x, mu) <= 1e-11 || (mu - last_mu).abs() <= 1e-14 * mu.abs().max(1.0) {
            return Ok(x);
        }
        last_mu = mu;
    }
    // Accept if still decent; the residual gate upstream decides.
    Ok(x)
}

fn block_iteration(
    pencil: &Pencil,
    factor: &ChainsFactor,
    dim: usize,
    count: usize,
) -> Result<Vec<(f64, Vec<f64>)>, SpectralError> {
    let mut basis: Vec<Vec<f64>> = (0..count)
        .map(|i| start_vector(dim, 0xb10c_0000 + i as u64))
        .collect();
    for sweep in 0..200 {
        for x in basis.iter_mut() {
            let mut y = vec![0.0; dim];
            pencil.m.matvec(x, &mut y);
            factor.solve(&mut y);
            *x = y;
        }
        m_orthonormalize(pencil, &mut basis);
        // Rayleigh-Ritz in the block.
        let k = basis.len();
        let mut h = vec![0.0; k * k];
        for i in 0..k {
            let mut ax = vec![0.0; dim];
            pencil.a.matvec(&basis[i], &mut ax);
            for j in 0..k {
                h[j * k + i] = basis[j].iter().zip(&ax).map(|(a, b)| a * b).sum();
            }
        }
        // Symmetrize roundoff.
        for i in 0..k {
            for j in (i + 1)..k {
                let v = 0.5 * (h[i * k + j] + h[j * k + i]);
                h[i * k + j] = v;
                h[j * k + i] = v;
            }
        }
        let (vals, vecs) = small_sym_eigen(&h, k);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
        let rotated: Vec<Vec<f64>> = order
            .iter()
            .map(|&col| {
                let mut out = vec![0.0; dim];
                for (bi, b) in basis.iter().enumerate() {
                    let w = vecs[bi * k + col];
                    for (o, v) in out.iter_mut().zip(b) {
                        *o += w * v;
                    }
                }
                out
            })
            .collect();
        basis = rotated;
        for x in basis.iter_mut() {
            normalize_m(pencil, x);
        }
        let worst = basis
            .iter()
            .map(|x| pencil.residual(x, pencil.rayleigh(x)))
            .fold(0.0f64, f64::max);
        if worst <= 1e-11 && sweep >= 1 {
            break;
        }
    }
    Ok(basis
        .into_iter()
        .map(|x| (pencil.rayleigh(&x), x))
        .collect())
}

fn m_orthonormalize(pencil: &Pencil, basis: &mut [Vec<f64>]) {
    let k = basis.len();
    for i in 0..k {
        for _pass in 0..2 {
            for j in 0..i {
                let proj = pencil.dot_m(&basis[j], &basis[i]);
                let bj = basis[j].clone();
                for (v, w) in basis[i].iter_mut().zip(&bj) {
                    *v -= proj * w;
                }
            }
        }
        let mut x = std::mem::take(&mut basis[i]);
        normalize_m(pencil, &mut x);
        basis[i] = x;
    }
}
