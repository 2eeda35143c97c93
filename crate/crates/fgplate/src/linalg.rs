//! Dense-band linear algebra for the assembled plate systems.
//!
//! Structured plate meshes produce matrices whose half-bandwidth is a
//! small multiple of one node row, so a symmetric band store with an
//! in-place band Cholesky covers every solve in the pipeline. The
//! generalized symmetric eigenproblem is reduced by shift-and-invert
//! subspace iteration with Rayleigh-Ritz projection; the small projected
//! problems use a cyclic Jacobi eigensolver.
//!
//! Everything here is deterministic: fixed iteration orders, fixed
//! pseudo-random starting blocks, no threading.

use crate::{Error, Result};
use ndarray::Array2;

/// Symmetric matrix in lower-band column storage: entry `(i, j)` with
/// `j <= i <= j + bw` lives at `data[(i - j) + j (bw + 1)]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        (i - j) + j * (self.bw + 1)
    }

    /// Accumulate into the symmetric entry (i, j); only the lower triangle
    /// is stored.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// y = A x.
    pub fn symv(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        let ld = self.bw + 1;
        for j in 0..self.n {
            let col = &self.data[j * ld..j * ld + ld.min(self.n - j)];
            let xj = x[j];
            y[j] += col[0] * xj;
            let mut acc = 0.0;
            for (off, &a) in col.iter().enumerate().skip(1) {
                y[j + off] += a * xj;
                acc += a * x[j + off];
            }
            y[j] += acc;
        }
    }

    /// Y = A X for column-major blocks (ncols vectors of length n).
    pub fn symv_block(&self, x: &[f64], y: &mut [f64], ncols: usize) {
        for c in 0..ncols {
            let (xs, ys) = (&x[c * self.n..(c + 1) * self.n], &mut y[c * self.n..(c + 1) * self.n]);
            self.symv(xs, ys);
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.n, self.n));
        for j in 0..self.n {
            for i in j..=(j + self.bw).min(self.n - 1) {
                let v = self.data[self.idx(i, j)];
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &Array2<f64>) -> Self {
        let n = m.nrows();
        let mut bw = 0usize;
        for i in 0..n {
            for j in 0..i {
                if m[[i, j]] != 0.0 {
                    bw = bw.max(i - j);
                }
            }
        }
        let mut out = Self::zeros(n, bw);
        for j in 0..n {
            for i in j..=(j + bw).min(n - 1) {
                let k = out.idx(i, j);
                out.data[k] = m[[i, j]];
            }
        }
        out
    }

    /// B = A + s * M (same size; bandwidth grows to the larger of the two).
    pub fn add_scaled(&self, s: f64, m: &SymBand) -> SymBand {
        assert_eq!(self.n, m.n);
        let bw = self.bw.max(m.bw);
        let mut out = SymBand::zeros(self.n, bw);
        for j in 0..self.n {
            for i in j..=(j + bw).min(self.n - 1) {
                let v = self.get(i, j) + s * m.get(i, j);
                let k = out.idx(i, j);
                out.data[k] = v;
            }
        }
        out
    }

    /// Extract the principal submatrix on `keep` (sorted ascending).
    pub fn extract(&self, keep: &[usize]) -> SymBand {
        let pos = {
            let mut p = vec![usize::MAX; self.n];
            for (new, &old) in keep.iter().enumerate() {
                p[old] = new;
            }
            p
        };
        // new bandwidth: max index distance among retained couples
        let mut bw = 0usize;
        for (new_j, &old_j) in keep.iter().enumerate() {
            for old_i in old_j..=(old_j + self.bw).min(self.n - 1) {
                if pos[old_i] != usize::MAX && self.data[self.idx(old_i, old_j)] != 0.0 {
                    bw = bw.max(pos[old_i] - new_j);
                }
            }
        }
        let mut out = SymBand::zeros(keep.len(), bw);
        for (new_j, &old_j) in keep.iter().enumerate() {
            for old_i in old_j..=(old_j + self.bw).min(self.n - 1) {
                let new_i = pos[old_i];
                if new_i != usize::MAX {
                    let v = self.data[self.idx(old_i, old_j)];
                    if v != 0.0 {
                        let k = out.idx(new_i, new_j);
                        out.data[k] = v;
                    }
                }
            }
        }
        out
    }

    /// In-place band Cholesky, `A = L L^T`. Fails on non-positive pivots.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.n;
        let bw = self.bw;
        let ld = bw + 1;
        let mut l = self.data.clone();
        for j in 0..n {
            let start = j.saturating_sub(bw);
            let mut d = l[j * ld];
            for k in start..j {
                let v = l[(j - k) + k * ld];
                d -= v * v;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::solve(format!("matrix not positive definite at pivot {j} (d = {d:.3e})")));
            }
            let dj = d.sqrt();
            l[j * ld] = dj;
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                let kstart = i.saturating_sub(bw).max(start);
                let mut s = l[(i - j) + j * ld];
                for k in kstart..j {
                    s -= l[(i - k) + k * ld] * l[(j - k) + k * ld];
                }
                l[(i - j) + j * ld] = s / dj;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// Band Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let ld = self.bw + 1;
        // forward: L y = b
        for j in 0..self.n {
            let yj = b[j] / self.l[j * ld];
            b[j] = yj;
            let imax = (j + self.bw).min(self.n - 1);
            for i in (j + 1)..=imax {
                b[i] -= self.l[(i - j) + j * ld] * yj;
            }
        }
        // backward: L^T x = y
        for j in (0..self.n).rev() {
            let imax = (j + self.bw).min(self.n - 1);
            let mut s = b[j];
            for i in (j + 1)..=imax {
                s -= self.l[(i - j) + j * ld] * b[i];
            }
            b[j] = s / self.l[j * ld];
        }
    }

    /// Solve for a column-major block of vectors in place.
    pub fn solve_block_in_place(&self, b: &mut [f64], ncols: usize) {
        for c in 0..ncols {
            self.solve_in_place(&mut b[c * self.n..(c + 1) * self.n]);
        }
    }
}

/// Eigenvalues of a symmetric dense matrix, ascending (cyclic Jacobi).
pub fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    jacobi_eigen(m).0
}

/// Full symmetric eigen-decomposition by cyclic Jacobi. Returns
/// eigenvalues ascending and the corresponding orthonormal eigenvectors
/// as columns. Intended for small matrices (projected problems, element
/// audits).
pub fn jacobi_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut v = Array2::<f64>::eye(n);
    let norm: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-15 * norm;
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let (app, aqq) = (a[[p, p]], a[[q, q]]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]));
    let vals: Vec<f64> = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[[k, new]] = v[[k, old]];
        }
    }
    (vals, vecs)
}

/// Small dense generalized symmetric problem `A x = lambda M x` with M
/// positive definite; ascending. Used for projected subspaces and tests.
pub fn dense_generalized(a: &Array2<f64>, m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    let mb = SymBand::from_dense(m);
    let ch = mb.cholesky().map_err(|_| Error::solve("projected mass matrix not positive definite"))?;
    // C = L^-1 A L^-T via two triangular sweeps, done column-wise through
    // full solves of M z = a_col then correcting: simpler route below
    // builds C = Z^T A Z with Z = M^-1/2 implicitly; for the small sizes
    // used here we form L explicitly.
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        for i in j..n {
            l[[i, j]] = ch_l(&ch, i, j);
        }
    }
    // W = L^-1 A  (forward substitution, per column of A)
    let mut w = a.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = w[[i, col]];
            for k in 0..i {
                s -= l[[i, k]] * w[[k, col]];
            }
            w[[i, col]] = s / l[[i, i]];
        }
    }
    // C = (L^-1 W^T)^T = L^-1 A L^-T
    let wt = w.t().to_owned();
    let mut c = wt;
    for col in 0..n {
        for i in 0..n {
            let mut s = c[[i, col]];
            for k in 0..i {
                s -= l[[i, k]] * c[[k, col]];
            }
            c[[i, col]] = s / l[[i, i]];
        }
    }
    // symmetrize roundoff
    let cs = 0.5 * (&c + &c.t());
    let (vals, y) = jacobi_eigen(&cs);
    // x = L^-T y
    let mut x = y;
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = x[[i, col]];
            for k in (i + 1)..n {
                s -= l[[k, i]] * x[[k, col]];
            }
            x[[i, col]] = s / l[[i, i]];
        }
    }
    Ok((vals, x))
}

fn ch_l(ch: &BandCholesky, i: usize, j: usize) -> f64 {
    if j > i || i - j > ch.bw {
        0.0
    } else {
        ch.l[(i - j) + j * (ch.bw + 1)]
    }
}

/// Result of the lowest-modes generalized solve.
#[derive(Debug, Clone)]
pub struct LowestModes {
    /// Ascending eigenvalues (Rayleigh quotients of the returned vectors).
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors, column-major `n x nmodes`.
    pub vectors: Vec<f64>,
    /// Relative residuals `|A x - lambda M x| / |A x|` per pair.
    pub residuals: Vec<f64>,
}

/// Lowest `nmodes` eigenpairs of `A x = lambda M x` with M positive
/// definite and A symmetric (possibly indefinite or singular), by
/// shift-and-invert subspace iteration with Rayleigh-Ritz projection.
///
/// The shift walks up a fixed ladder until the shifted matrix factors
/// cleanly AND the iteration reaches tight residuals; trying `sigma = 0`
/// first keeps the common positive-definite case exact.
pub fn lowest_modes(a: &SymBand, m: &SymBand, nmodes: usize) -> Result<LowestModes> {
    let n = a.n;
    if n == 0 || nmodes == 0 {
        return Err(Error::solve("empty eigenproblem"));
    }
    let nmodes = nmodes.min(n);
    let q = (2 * nmodes).max(nmodes + 8).min(n);

    let mut scale = 0.0f64;
    for i in 0..n {
        let mi = m.get(i, i);
        if mi > 0.0 {
            scale = scale.max(a.get(i, i).abs() / mi);
        }
    }
    let scale = scale.max(1e-300);

    let mut best: Option<LowestModes> = None;
    for &s in &[0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2] {
        let sigma = s * scale;
        let shifted = if sigma == 0.0 { a.clone() } else { a.add_scaled(sigma, m) };
        let Ok(chol) = shifted.cholesky() else { continue };
        match subspace_iterate(a, m, &chol, nmodes, q, scale) {
            Ok(sol) => {
                let worst = sol.residuals.iter().fold(0.0f64, |acc, &r| acc.max(r));
                if worst <= 1e-8 {
                    return Ok(sol);
                }
                let better = match &best {
                    None => true,
                    Some(b) => worst < b.residuals.iter().fold(0.0f64, |acc, &r| acc.max(r)),
                };
                if better {
                    best = Some(sol);
                }
            }
            Err(_) => continue,
        }
    }
    match best {
        Some(sol) => Err(Error::solve(format!(
            "subspace iteration stalled (worst residual {:.3e})",
            sol.residuals.iter().fold(0.0f64, |acc, &r| acc.max(r))
        ))),
        None => Err(Error::solve("could not factor the shifted stiffness matrix")),
    }
}

fn subspace_iterate(
    a: &SymBand,
    m: &SymBand,
    chol: &BandCholesky,
    nmodes: usize,
    q: usize,
    scale: f64,
) -> Result<LowestModes> {
    let n = a.n;
    // deterministic pseudo-random start block
    let mut x = vec![0.0f64; n * q];
    let mut state = 0x9e3779b97f4a7c15u64;
    for v in x.iter_mut() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }

    let mut work = vec![0.0f64; n * q];
    let mut az = vec![0.0f64; n * q];
    let mut prev = vec![f64::INFINITY; nmodes];
    let mut values = vec![0.0f64; q];
    let max_iters = 600;
    let mut residuals = vec![f64::INFINITY; nmodes];
    for iter in 0..max_iters {
        // Z = (A + sigma M)^-1 M X
        m.symv_block(&x, &mut work, q);
        chol.solve_block_in_place(&mut work, q);
        let z = &mut work;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::solve("non-finite iterate"));
        }
        // Rayleigh-Ritz projections with the ORIGINAL A
        a.symv_block(z, &mut az, q);
        let mut ar = Array2::<f64>::zeros((q, q));
        let mut mr = Array2::<f64>::zeros((q, q));
        m.symv_block(z, &mut x, q); // x reused as M Z scratch
        for i in 0..q {
            for j in 0..q {
                let mut sa = 0.0;
                let mut sm = 0.0;
                for k in 0..n {
                    sa += z[i * n + k] * az[j * n + k];
                    sm += z[i * n + k] * x[j * n + k];
                }
                ar[[i, j]] = sa;
                mr[[i, j]] = sm;
            }
        }
        let ar = 0.5 * (&ar + &ar.t());
        let mr = 0.5 * (&mr + &mr.t());
        let (theta, phi) = dense_generalized(&ar, &mr)?;
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::solve("non-finite Ritz value"));
        }
        // X = Z Phi
        for c in 0..q {
            let xc = &mut x[c * n..(c + 1) * n];
            xc.fill(0.0);
            for (zi, &f) in phi.column(c).iter().enumerate() {
                if f != 0.0 {
                    let zc = &z[zi * n..(zi + 1) * n];
                    for (xk, zk) in xc.iter_mut().zip(zc.iter()) {
                        *xk += f * zk;
                    }
                }
            }
        }
        values.copy_from_slice(&theta[..q]);
        let mut delta = 0.0f64;
        for i in 0..nmodes {
            let denom = theta[i].abs().max(1e-300 * scale);
            delta = delta.max((theta[i] - prev[i]).abs() / denom);
        }
        prev.copy_from_slice(&theta[..nmodes]);
        // Ritz values converge twice as fast as the vectors; once they
        // settle, keep iterating until the residuals do too
        if iter >= 1 && delta < 1e-12 {
            compute_residuals(a, m, &x, &values, nmodes, &mut residuals);
            if residuals.iter().all(|&r| r <= 1e-9) {
                break;
            }
        }
    }
    if residuals[0].is_infinite() {
        compute_residuals(a, m, &x, &values, nmodes, &mut residuals);
    }
    Ok(LowestModes { values: values[..nmodes].to_vec(), vectors: x[..n * nmodes].to_vec(), residuals })
}

fn compute_residuals(a: &SymBand, m: &SymBand, x: &[f64], values: &[f64], nmodes: usize, out: &mut [f64]) {
    let n = a.n;
    let mut ax = vec![0.0f64; n];
    let mut mx = vec![0.0f64; n];
    // rigid-body eigenvalues have |A x| ~ 0, which would make the plain
    // relative residual meaningless; floor the denominator at a small
    // fraction of the largest requested eigenvalue instead
    let theta_ref = values[..nmodes].iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    for i in 0..nmodes {
        let xi = &x[i * n..(i + 1) * n];
        a.symv(xi, &mut ax);
        m.symv(xi, &mut mx);
        let mut num = 0.0f64;
        let mut ax_norm = 0.0f64;
        let mut mx_norm = 0.0f64;
        for k in 0..n {
            let r = ax[k] - values[i] * mx[k];
            num += r * r;
            ax_norm += ax[k] * ax[k];
            mx_norm += mx[k] * mx[k];
        }
        let den = ax_norm.sqrt().max(1e-6 * theta_ref * mx_norm.sqrt()).max(1e-300);
        out[i] = num.sqrt() / den;
    }
}

/// Largest eigenvalue (and vector) of `B x = mu K x` with K positive
/// definite, by block power iteration on the K-Cholesky-reduced operator.
/// Used for buckling factors, where `mu = 1/lambda_cr`.
pub fn largest_generalized(b: &SymBand, k: &SymBand, guard: usize) -> Result<(f64, Vec<f64>)> {
    let n = b.n;
    let q = (guard + 2).min(n);
    let chol = k.cholesky()?;
    let mut x = vec![0.0f64; n * q];
    let mut state = 0x2545f4914f6cdd1du64;
    for v in x.iter_mut() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }
    let mut work = vec![0.0f64; n * q];
    let mut mu_prev = f64::INFINITY;
    for _iter in 0..2000 {
        // Y = K^-1 B X
        b.symv_block(&x, &mut work, q);
        chol.solve_block_in_place(&mut work, q);
        // Rayleigh-Ritz on span(Y): solve projected (B, K)
        let mut br = Array2::<f64>::zeros((q, q));
        let mut kr = Array2::<f64>::zeros((q, q));
        let y = &work;
        let mut by = vec![0.0f64; n * q];
        b.symv_block(y, &mut by, q);
        let mut ky = vec![0.0f64; n * q];
        k.symv_block(y, &mut ky, q);
        for i in 0..q {
            for j in 0..q {
                let mut sb = 0.0;
                let mut sk = 0.0;
                for t in 0..n {
                    sb += y[i * n + t] * by[j * n + t];
                    sk += y[i * n + t] * ky[j * n + t];
                }
                br[[i, j]] = sb;
                kr[[i, j]] = sk;
            }
        }
        let br = 0.5 * (&br + &br.t());
        let kr = 0.5 * (&kr + &kr.t());
        let (mu, phi) = dense_generalized(&br, &kr)?;
        let mu_max = mu[q - 1];
        for c in 0..q {
            let src = q - 1 - c; // descending order into x
            let xc = &mut x[c * n..(c + 1) * n];
            xc.fill(0.0);
            for (yi, &f) in phi.column(src).iter().enumerate() {
                if f != 0.0 {
                    let yc = &y[yi * n..(yi + 1) * n];
                    for (xk, yk) in xc.iter_mut().zip(yc.iter()) {
                        *xk += f * yk;
                    }
                }
            }
        }
        if (mu_max - mu_prev).abs() <= 1e-12 * mu_max.abs().max(1e-300) {
            return Ok((mu_max, x[..n].to_vec()));
        }
        mu_prev = mu_max;
    }
    Err(Error::solve("block power iteration for the buckling factor did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn tridiag(n: usize, diag: f64, off: f64) -> SymBand {
        let mut m = SymBand::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, diag);
            if i + 1 < n {
                m.add(i + 1, i, off);
            }
        }
        m
    }

    #[test]
    fn band_cholesky_reconstructs() {
        let m = tridiag(50, 4.0, -1.0);
        let ch = m.cholesky().unwrap();
        let mut b = vec![0.0; 50];
        b[7] = 1.0;
        let mut x = b.clone();
        ch.solve_in_place(&mut x);
        let mut ax = vec![0.0; 50];
        m.symv(&x, &mut ax);
        for (i, (&ai, &bi)) in ax.iter().zip(b.iter()).enumerate() {
            assert_relative_eq!(ai, bi, epsilon = 1e-12, max_relative = 1e-12);
            let _ = i;
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = SymBand::zeros(3, 1);
        m.add(0, 0, 1.0);
        m.add(1, 1, -2.0);
        m.add(2, 2, 1.0);
        assert!(m.cholesky().is_err());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a = array![[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let (vals, vecs) = jacobi_eigen(&a);
        let s2 = 2.0f64.sqrt();
        assert_relative_eq!(vals[0], 2.0 - s2, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 2.0 + s2, epsilon = 1e-12);
        // residual check A v = lambda v
        for k in 0..3 {
            let v = vecs.column(k);
            let av = a.dot(&v);
            for i in 0..3 {
                assert_relative_eq!(av[i], vals[k] * v[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn dense_generalized_matches_direct() {
        let a = array![[4.0, 1.0], [1.0, 3.0]];
        let m = array![[2.0, 0.0], [0.0, 1.0]];
        let (vals, vecs) = dense_generalized(&a, &m).unwrap();
        for k in 0..2 {
            let v = vecs.column(k);
            let av = a.dot(&v);
            let mv = m.dot(&v);
            for i in 0..2 {
                assert_relative_eq!(av[i], vals[k] * mv[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn lowest_modes_match_dense_reference() {
        let n = 60;
        let a = tridiag(n, 2.5, -1.0);
        let m = tridiag(n, 1.0, 0.2);
        let got = lowest_modes(&a, &m, 5).unwrap();
        let (want, _) = dense_generalized(&a.to_dense(), &m.to_dense()).unwrap();
        for k in 0..5 {
            assert_relative_eq!(got.values[k], want[k], max_relative = 1e-10);
            assert!(got.residuals[k] < 1e-8);
        }
        // M-orthonormality of the returned block
        let md = m.to_dense();
        for i in 0..5 {
            for j in 0..5 {
                let xi = &got.vectors[i * n..(i + 1) * n];
                let xj = &got.vectors[j * n..(j + 1) * n];
                let mut s = 0.0;
                for r in 0..n {
                    for c in 0..n {
                        s += xi[r] * md[[r, c]] * xj[c];
                    }
                }
                assert_relative_eq!(s, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn lowest_modes_handles_singular_a() {
        // A with a null space (like a free structure): shift kicks in
        let n = 30;
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
        }
        // remove the constraint at both ends -> Neumann Laplacian, one zero mode
        a.add(0, 0, -1.0);
        a.add(n - 1, n - 1, -1.0);
        let m = tridiag(n, 1.0, 0.0);
        let got = lowest_modes(&a, &m, 3).unwrap();
        assert!(got.values[0].abs() < 1e-10);
        assert!(got.values[1] > 1e-4);
    }

    #[test]
    fn largest_generalized_power_iteration() {
        let n = 40;
        let k = tridiag(n, 2.0, -1.0);
        let mut b = SymBand::zeros(n, 0);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        let (mu, _) = largest_generalized(&b, &k, 2).unwrap();
        // largest mu of x = mu K x is 1/lambda_min(K); lambda_min of the
        // Dirichlet tridiagonal is 2 - 2 cos(pi/(n+1))
        let lam_min = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert_relative_eq!(mu, 1.0 / lam_min, max_relative = 1e-9);
    }

    #[test]
    fn extract_principal_submatrix() {
        let m = tridiag(6, 3.0, 1.0);
        let sub = m.extract(&[0, 2, 3, 5]);
        let d = sub.to_dense();
        assert_relative_eq!(d[[0, 0]], 3.0);
        assert_relative_eq!(d[[1, 2]], 1.0); // old (2,3) adjacency survives
        assert_relative_eq!(d[[0, 1]], 0.0); // old (0,2) was outside the band
    }
}
