//! Linear algebra for matrices shaped like a star graph: a few independent
//! tridiagonal chains coupled to a small dense "border" block (the vertex
//! unknowns). Everything the eigenvalue and Newton solvers need — pivoted
//! tridiagonal LU, Schur-complement solves, Sturm counts for spectrum
//! slicing — is implemented here without external dependencies so that runs
//! are reproducible bit for bit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular system: {0}")]
    Singular(String),
    #[error("structure mismatch: {0}")]
    Structure(String),
}

/// Symmetric tridiagonal block: `diag` has length n, `off` length n-1.
#[derive(Debug, Clone, Default)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Tridiag {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// Coupling entry between an interior chain node and a border unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub chain: usize,
    pub pos: usize,
    pub border: usize,
    pub value: f64,
}

/// Symmetric matrix of the form
/// `[[T, B], [B^T, D]]` with `T` block-diagonal tridiagonal (the chains),
/// `B` sparse (the links) and `D` a small dense symmetric block.
///
/// Unknown ordering: chain 0 nodes, chain 1 nodes, ..., border unknowns.
#[derive(Debug, Clone)]
pub struct ChainsMatrix {
    pub chains: Vec<Tridiag>,
    pub links: Vec<Link>,
    /// Row-major k*k symmetric block.
    pub border: Vec<f64>,
    pub k: usize,
}

impl ChainsMatrix {
    pub fn interior_len(&self) -> usize {
        self.chains.iter().map(Tridiag::len).sum()
    }

    pub fn dim(&self) -> usize {
        self.interior_len() + self.k
    }

    fn chain_offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.chains.len());
        let mut acc = 0;
        for c in &self.chains {
            offs.push(acc);
            acc += c.len();
        }
        offs
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        y.fill(0.0);
        let offs = self.chain_offsets();
        let nint = self.interior_len();
        for (ci, c) in self.chains.iter().enumerate() {
            let o = offs[ci];
            let n = c.len();
            for i in 0..n {
                let mut acc = c.diag[i] * x[o + i];
                if i > 0 {
                    acc += c.off[i - 1] * x[o + i - 1];
                }
                if i + 1 < n {
                    acc += c.off[i] * x[o + i + 1];
                }
                y[o + i] += acc;
            }
        }
        for l in &self.links {
            let gi = offs[l.chain] + l.pos;
            y[gi] += l.value * x[nint + l.border];
            y[nint + l.border] += l.value * x[gi];
        }
        for r in 0..self.k {
            for c in 0..self.k {
                y[nint + r] += self.border[r * self.k + c] * x[nint + c];
            }
        }
    }

    /// Largest absolute row sum, used to scale residuals.
    pub fn norm_inf(&self) -> f64 {
        let offs = self.chain_offsets();
        let mut rows = vec![0.0f64; self.dim()];
        let nint = self.interior_len();
        for (ci, c) in self.chains.iter().enumerate() {
            let o = offs[ci];
            for i in 0..c.len() {
                rows[o + i] += c.diag[i].abs();
                if i > 0 {
                    rows[o + i] += c.off[i - 1].abs();
                }
                if i + 1 < c.len() {
                    rows[o + i] += c.off[i].abs();
                }
            }
        }
        for l in &self.links {
            let gi = offs[l.chain] + l.pos;
            rows[gi] += l.value.abs();
            rows[nint + l.border] += l.value.abs();
        }
        for r in 0..self.k {
            for c in 0..self.k {
                rows[nint + r] += self.border[r * self.k + c].abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// A - sigma*B entrywise; the two matrices must share their layout
    /// (same chain lengths and identical link positions), which holds for
    /// stiffness/mass pairs produced by the same assembly pass.
    pub fn shifted(&self, b: &ChainsMatrix, sigma: f64) -> Result<ChainsMatrix, LinalgError> {
        if self.chains.len() != b.chains.len()
            || self.k != b.k
            || self.links.len() != b.links.len()
        {
            return Err(LinalgError::Structure(
                "chain/link layout differs between matrices".into(),
            ));
        }
        let mut out = self.clone();
        for (ci, c) in out.chains.iter_mut().enumerate() {
            if c.len() != b.chains[ci].len() {
                return Err(LinalgError::Structure("chain length mismatch".into()));
            }
            for (d, bd) in c.diag.iter_mut().zip(&b.chains[ci].diag) {
                *d -= sigma * bd;
            }
            for (e, be) in c.off.iter_mut().zip(&b.chains[ci].off) {
                *e -= sigma * be;
            }
        }
        for (l, bl) in out.links.iter_mut().zip(&b.links) {
            if (l.chain, l.pos, l.border) != (bl.chain, bl.pos, bl.border) {
                return Err(LinalgError::Structure("link position mismatch".into()));
            }
            l.value -= sigma * bl.value;
        }
        for (d, bd) in out.border.iter_mut().zip(&b.border) {
            *d -= sigma * bd;
        }
        Ok(out)
    }

    /// Number of eigenvalues strictly below zero, by Sylvester inertia:
    /// Sturm counts on the chains plus the inertia of the Schur complement
    /// on the border block.
    pub fn count_negative(&self) -> usize {
        let mut count = 0;
        for c in &self.chains {
            count += sturm_negative_count(c);
        }
        if self.k > 0 {
            let schur = self.border_schur();
            count += small_sym_negative_count(&schur, self.k);
        }
        count
    }

    /// Schur complement D - B^T T^{-1} B of the border block.
    fn border_schur(&self) -> Vec<f64> {
        let k = self.k;
        let mut schur = self.border.clone();
        if self.links.is_empty() {
            return schur;
        }
        let offs = self.chain_offsets();
        let lus: Vec<TridiagLu> = self.chains.iter().map(TridiagLu::factor).collect();
        // Columns of B, solved chain by chain.
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; self.interior_len()]; k];
        for l in &self.links {
            cols[l.border][offs[l.chain] + l.pos] += l.value;
        }
        for col in cols.iter_mut() {
            for (ci, lu) in lus.iter().enumerate() {
                let o = offs[ci];
                lu.solve(&mut col[o..o + self.chains[ci].len()]);
            }
        }
        for l in &self.links {
            let gi = offs[l.chain] + l.pos;
            for (bj, col) in cols.iter().enumerate() {
                schur[l.border * k + bj] -= l.value * col[gi];
            }
        }
        schur
    }

    pub fn factor(&self) -> Result<ChainsFactor, LinalgError> {
        let offs = self.chain_offsets();
        let k = self.k;
        let nint = self.interior_len();
        let lus: Vec<TridiagLu> = self.chains.iter().map(TridiagLu::factor).collect();
        let mut w: Vec<Vec<f64>> = vec![vec![0.0; nint]; k];
        for l in &self.links {
            w[l.border][offs[l.chain] + l.pos] += l.value;
        }
        for col in w.iter_mut() {
            for (ci, lu) in lus.iter().enumerate() {
                let o = offs[ci];
                lu.solve(&mut col[o..o + self.chains[ci].len()]);
            }
        }
        let mut schur = self.border.clone();
        for l in &self.links {
            let gi = offs[l.chain] + l.pos;
            for (bj, col) in w.iter().enumerate() {
                schur[l.border * k + bj] -= l.value * col[gi];
            }
        }
        let schur_lu = DenseLu::factor(schur, k)?;
        Ok(ChainsFactor {
            offsets: offs,
            chain_lens: self.chains.iter().map(Tridiag::len).collect(),
            links: self.links.clone(),
            lus,
            w,
            schur_lu,
            k,
        })
    }
}

/// Factorization of a [`ChainsMatrix`] for repeated solves at a fixed shift.
pub struct ChainsFactor {
    offsets: Vec<usize>,
    chain_lens: Vec<usize>,
    links: Vec<Link>,
    lus: Vec<TridiagLu>,
    /// T^{-1} B columns.
    w: Vec<Vec<f64>>,
    schur_lu: DenseLu,
    k: usize,
}

impl ChainsFactor {
    /// Solve (in place) the bordered system for one right-hand side.
    pub fn solve(&self, b: &mut [f64]) {
        let nint: usize = self.chain_lens.iter().sum();
        for (ci, lu) in self.lus.iter().enumerate() {
            let o = self.offsets[ci];
            lu.solve(&mut b[o..o + self.chain_lens[ci]]);
        }
        let mut rhs_b = b[nint..nint + self.k].to_vec();
        for l in &self.links {
            rhs_b[l.border] -= l.value * b[self.offsets[l.chain] + l.pos];
        }
        self.schur_lu.solve(&mut rhs_b);
        for (bi, xb) in rhs_b.iter().enumerate() {
            for (i, wv) in self.w[bi].iter().enumerate() {
                b[i] -= wv * xb;
            }
        }
        b[nint..nint + self.k].copy_from_slice(&rhs_b);
    }
}

/// Number of eigenvalues of a symmetric tridiagonal block strictly below
/// zero, via the classic LDL^T pivot-sign recursion with a pivot guard.
fn sturm_negative_count(t: &Tridiag) -> usize {
    let n = t.len();
    if n == 0 {
        return 0;
    }
    let scale = t
        .diag
        .iter()
        .chain(t.off.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let pivmin = f64::MIN_POSITIVE.max(1e-300) * scale;
    let mut count = 0;
    let mut q = t.diag[0];
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        q = t.diag[i] - t.off[i - 1] * t.off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Negative-eigenvalue count of a small symmetric matrix (k <= 3 in
/// practice) via cyclic Jacobi.
fn small_sym_negative_count(m: &[f64], k: usize) -> usize {
    small_sym_eigenvalues(m, k).into_iter().filter(|&e| e < 0.0).count()
}

/// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi sweeps.
pub fn small_sym_eigenvalues(m: &[f64], k: usize) -> Vec<f64> {
    let (vals, _) = small_sym_eigen(m, k);
    vals
}

/// Eigenvalues and eigenvectors (columns) of a small dense symmetric matrix.
pub fn small_sym_eigen(m: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = m.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _sweep in 0..60 {
        let mut offdiag = 0.0f64;
        for p in 0..k {
            for q in (p + 1)..k {
                offdiag += a[p * k + q].abs();
            }
        }
        let scale = (0..k).fold(0.0f64, |s, i| s.max(a[i * k + i].abs())).max(1.0);
        if offdiag <= 1e-15 * scale {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let aip = a[i * k + p];
                    let aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for j in 0..k {
                    let apj = a[p * k + j];
                    let aqj = a[q * k + j];
                    a[p * k + j] = c * apj - s * aqj;
                    a[q * k + j] = s * apj + c * aqj;
                }
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    ((0..k).map(|i| a[i * k + i]).collect(), v)
}

/// Pivoted LU of a (generally nonsymmetric) tridiagonal matrix, in the
/// style of LAPACK `dgttrf`/`dgtts2`.
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(t: &Tridiag) -> Self {
        Self::factor_general(&t.off, &t.diag, &t.off)
    }

    pub fn factor_general(dl_in: &[f64], d_in: &[f64], du_in: &[f64]) -> Self {
        let n = d_in.len();
        let mut dl = dl_in.to_vec();
        let mut d = d_in.to_vec();
        let mut du = du_in.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let scale = d
            .iter()
            .chain(dl.iter())
            .chain(du.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let tiny = 1e-300 * scale;
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        TridiagLu { dl, d, du, du2, swap }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        if n == 0 {
            return;
        }
        assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if !self.swap[i] {
                b[i + 1] -= self.dl[i] * b[i];
            } else {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Dense LU with partial pivoting for the small border blocks.
pub struct DenseLu {
    a: Vec<f64>,
    piv: Vec<usize>,
    n: usize,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, LinalgError> {
        assert_eq!(a.len(), n * n);
        let mut piv = vec![0usize; n];
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for col in 0..n {
            let mut p = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[p * n + col].abs() {
                    p = r;
                }
            }
            piv[col] = p;
            if p != col {
                for j in 0..n {
                    a.swap(col * n + j, p * n + j);
                }
            }
            let pivot = a[col * n + col];
            if pivot.abs() < 1e-14 * scale {
                return Err(LinalgError::Singular(format!(
                    "pivot {:.3e} in {}x{} border block",
                    pivot, n, n
                )));
            }
            for r in col + 1..n {
                let f = a[r * n + col] / pivot;
                a[r * n + col] = f;
                for j in col + 1..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
        Ok(DenseLu { a, piv, n })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for i in 0..n {
            b.swap(i, self.piv[i]);
            for j in 0..i {
                b[i] -= self.a[i * n + j] * b[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                b[i] -= self.a[i * n + j] * b[j];
            }
            b[i] /= self.a[i * n + i];
        }
    }
}

/// General bordered system with possibly different row/column couplings,
/// used by the Newton solver for discrete equilibria (the vertex trace
/// equations are not symmetric).
pub struct BorderedSystem {
    /// Per chain: (sub, diag, super) bands.
    pub chains: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    /// Entries M[interior, border].
    pub col_links: Vec<Link>,
    /// Entries M[border, interior].
    pub row_links: Vec<Link>,
    pub border: Vec<f64>,
    pub k: usize,
}

impl BorderedSystem {
    fn offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.chains.len());
        let mut acc = 0;
        for c in &self.chains {
            offs.push(acc);
            acc += c.1.len();
        }
        offs
    }

    pub fn interior_len(&self) -> usize {
        self.chains.iter().map(|c| c.1.len()).sum()
    }

    /// Solve the full system in place via the Schur complement on the
    /// border unknowns.
    pub fn solve(&self, b: &mut [f64]) -> Result<(), LinalgError> {
        let k = self.k;
        let offs = self.offsets();
        let nint = self.interior_len();
        assert_eq!(b.len(), nint + k);
        let lus: Vec<TridiagLu> = self
            .chains
            .iter()
            .map(|(dl, d, du)| TridiagLu::factor_general(dl, d, du))
            .collect();
        let mut w: Vec<Vec<f64>> = vec![vec![0.0; nint]; k];
        for l in &self.col_links {
            w[l.border][offs[l.chain] + l.pos] += l.value;
        }
        for col in w.iter_mut() {
            for (ci, lu) in lus.iter().enumerate() {
                let o = offs[ci];
                lu.solve(&mut col[o..o + self.chains[ci].1.len()]);
            }
        }
        let mut schur = self.border.clone();
        for l in &self.row_links {
            let gi = offs[l.chain] + l.pos;
            for (bj, col) in w.iter().enumerate() {
                schur[l.border * k + bj] -= l.value * col[gi];
            }
        }
        let schur_lu = DenseLu::factor(schur, k)?;
        for (ci, lu) in lus.iter().enumerate() {
            let o = offs[ci];
            lu.solve(&mut b[o..o + self.chains[ci].1.len()]);
        }
        let mut rhs_b = b[nint..nint + k].to_vec();
        for l in &self.row_links {
            rhs_b[l.border] -= l.value * b[offs[l.chain] + l.pos];
        }
        schur_lu.solve(&mut rhs_b);
        for (bi, xb) in rhs_b.iter().enumerate() {
            for (i, wv) in w[bi].iter().enumerate() {
                b[i] -= wv * xb;
            }
        }
        b[nint..nint + k].copy_from_slice(&rhs_b);
        Ok(())
    }
}

/// SplitMix64: tiny deterministic generator for start vectors and test
/// inputs; avoids platform-dependent RNG state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [-1, 1).
    pub fn next_sym(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_from(m: &ChainsMatrix) -> Vec<Vec<f64>> {
        let n = m.dim();
        let mut a = vec![vec![0.0; n]; n];
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for j in 0..n {
            x.fill(0.0);
            x[j] = 1.0;
            m.matvec(&x, &mut y);
            for i in 0..n {
                a[i][j] = y[i];
            }
        }
        a
    }

    fn sample_matrix() -> ChainsMatrix {
        // Two chains of lengths 4 and 3 with a 2-unknown border.
        ChainsMatrix {
            chains: vec![
                Tridiag {
                    diag: vec![4.0, 5.0, 6.0, 5.0],
                    off: vec![-1.0, -2.0, -1.0],
                },
                Tridiag {
                    diag: vec![3.0, 4.0, 3.0],
                    off: vec![-0.5, -0.5],
                },
            ],
            links: vec![
                Link { chain: 0, pos: 3, border: 0, value: -1.5 },
                Link { chain: 1, pos: 0, border: 1, value: -0.7 },
                Link { chain: 1, pos: 1, border: 0, value: 0.3 },
            ],
            border: vec![2.5, 0.4, 0.4, 1.9],
            k: 2,
        }
    }

    #[test]
    fn bordered_solve_matches_dense_gauss() {
        let m = sample_matrix();
        let n = m.dim();
        let mut rng = SplitMix64::new(7);
        let b: Vec<f64> = (0..n).map(|_| rng.next_sym()).collect();
        let mut x = b.clone();
        let f = m.factor().unwrap();
        f.solve(&mut x);
        let mut back = vec![0.0; n];
        m.matvec(&x, &mut back);
        for i in 0..n {
            assert!((back[i] - b[i]).abs() < 1e-12, "component {i}");
        }
    }

    #[test]
    fn inertia_counts_match_jacobi_on_dense() {
        let base = sample_matrix();
        let mass = {
            let mut m = base.clone();
            for c in m.chains.iter_mut() {
                for d in c.diag.iter_mut() {
                    *d = 1.0;
                }
                for e in c.off.iter_mut() {
                    *e = 0.2;
                }
            }
            for l in m.links.iter_mut() {
                l.value = 0.1;
            }
            m.border = vec![1.0, 0.05, 0.05, 1.0];
            m
        };
        // Dense reference eigenvalues of the pencil via scan of inertia.
        for sigma in [-5.0, -1.0, 0.0, 1.0, 2.0, 3.5, 8.0, 20.0] {
            let shifted = base.shifted(&mass, sigma).unwrap();
            let dense = dense_from(&shifted);
            let n = shifted.dim();
            let flat: Vec<f64> = dense.iter().flatten().copied().collect();
            let expected = small_sym_eigenvalues(&flat, n)
                .into_iter()
                .filter(|&e| e < 0.0)
                .count();
            assert_eq!(shifted.count_negative(), expected, "sigma = {sigma}");
        }
    }

    #[test]
    fn pivoted_tridiag_handles_zero_diagonal() {
        // Leading diagonal entry zero forces a row swap.
        let lu = TridiagLu::factor_general(&[1.0, 2.0], &[0.0, 1.0, 3.0], &[4.0, -1.0]);
        let mut b = vec![4.0, 2.0, 8.0];
        lu.solve(&mut b);
        // Reconstruct.
        let x = b;
        let r0 = 0.0 * x[0] + 4.0 * x[1] - 4.0;
        let r1 = 1.0 * x[0] + 1.0 * x[1] - 1.0 * x[2] - 2.0;
        let r2 = 2.0 * x[1] + 3.0 * x[2] - 8.0;
        assert!(r0.abs() + r1.abs() + r2.abs() < 1e-12);
    }

    #[test]
    fn nonsymmetric_bordered_system_solves() {
        let sys = BorderedSystem {
            chains: vec![(vec![0.5, 0.2], vec![3.0, 2.5, 2.0], vec![-0.4, -0.3])],
            col_links: vec![Link { chain: 0, pos: 2, border: 0, value: -1.0 }],
            row_links: vec![
                Link { chain: 0, pos: 2, border: 0, value: 2.0 },
                Link { chain: 0, pos: 1, border: 0, value: -0.25 },
            ],
            border: vec![4.0],
            k: 1,
        };
        let b = vec![1.0, -2.0, 0.5, 3.0];
        let mut x = b.clone();
        sys.solve(&mut x).unwrap();
        // Dense reconstruction.
        let a = [
            [3.0, -0.4, 0.0, 0.0],
            [0.5, 2.5, -0.3, 0.0],
            [0.0, 0.2, 2.0, -1.0],
            [0.0, -0.25, 2.0, 4.0],
        ];
        for i in 0..4 {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += a[i][j] * x[j];
            }
            assert!((acc - b[i]).abs() < 1e-12, "row {i}");
        }
    }
}
