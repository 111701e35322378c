//! Truncated SVD by Golub-Kahan-Lanczos bidiagonalization.
//!
//! The bidiagonalization runs on whichever of `A`, `Aᵀ` has fewer columns,
//! with full reorthogonalization (two Gram-Schmidt passes) of both bases. The
//! small bidiagonal factor is diagonalized by one-sided Jacobi. A Ritz triplet
//! `(σ, U_k x, V_k y)` satisfies `A v = σ u` exactly and `Aᵀ u = σ v` up to the
//! residual `|β_k x_k|`, so the Krylov space is grown until that residual is
//! negligible for every wanted triplet.

use rand::Rng;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Seed of the start vector and of restart vectors after a breakdown.
const LANCZOS_SEED: Seed = Seed(0x4c41_4e43_5a4f_5331);
/// Triplets count as converged once their residual is below this fraction
/// of the largest singular value.
const RESIDUAL_TOL: f64 = 1e-12;
/// A new basis vector shorter than this fraction of `‖A‖_F` is a breakdown.
const BREAKDOWN_TOL: f64 = 1e-13;
const JACOBI_SWEEPS: usize = 80;

/// Leading singular triplets of a sparse matrix. Singular vectors are stored
/// as columns of row-major `rows x k` and `cols x k` arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSvd {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Lanczos steps taken.
    pub steps: usize,
    /// Largest residual `‖Aᵀu − σv‖` among the returned triplets.
    pub max_residual: f64,
}

impl TruncatedSvd {
    pub fn u_col(&self, i: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.u[r * self.k + i]).collect()
    }

    pub fn v_col(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|r| self.v[r * self.k + i]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn orthogonalize(r: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(r, b);
            axpy(r, -c, b);
        }
    }
}

/// Unit vector orthogonal to `basis`, drawn from a labelled stream.
fn random_orthogonal(len: usize, basis: &[Vec<f64>], label: &str, step: usize) -> Vec<f64> {
    for attempt in 0u64.. {
        let mut rng = LANCZOS_SEED.stream(label, &[step as u64, attempt]);
        let mut r: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        orthogonalize(&mut r, basis);
        let nr = norm(&r);
        if nr > 1e-8 {
            r.iter_mut().for_each(|x| *x /= nr);
            return r;
        }
    }
    unreachable!()
}

struct Bidiagonalization<'a> {
    a: &'a SparseMatrix,
    at: &'a SparseMatrix,
    tol: f64,
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl<'a> Bidiagonalization<'a> {
    fn new(a: &'a SparseMatrix, at: &'a SparseMatrix) -> Self {
        let q0 = random_orthogonal(a.cols(), &[], "lanczos-start", 0);
        Bidiagonalization {
            a,
            at,
            tol: BREAKDOWN_TOL * a.frobenius_norm(),
            p: Vec::new(),
            q: vec![q0],
            alpha: Vec::new(),
            beta: Vec::new(),
        }
    }

    fn steps(&self) -> usize {
        self.alpha.len()
    }

    fn extend_to(&mut self, k: usize) {
        let n = self.a.cols();
        while self.steps() < k {
            let j = self.steps();
            let mut r = self.a.mul_vec(&self.q[j]);
            if j > 0 {
                axpy(&mut r, -self.beta[j - 1], &self.p[j - 1]);
            }
            orthogonalize(&mut r, &self.p);
            let mut a_j = norm(&r);
            if a_j <= self.tol {
                a_j = 0.0;
                r = random_orthogonal(r.len(), &self.p, "lanczos-restart-left", j);
            } else {
                r.iter_mut().for_each(|x| *x /= a_j);
            }
            self.alpha.push(a_j);
            self.p.push(r);

            let mut s = self.at.mul_vec(&self.p[j]);
            axpy(&mut s, -a_j, &self.q[j]);
            orthogonalize(&mut s, &self.q);
            if j + 1 == n {
                // The right basis spans everything; what is left is rounding.
                self.beta.push(0.0);
                break;
            }
            let mut b_j = norm(&s);
            if b_j <= self.tol {
                b_j = 0.0;
                s = random_orthogonal(s.len(), &self.q, "lanczos-restart-right", j);
            } else {
                s.iter_mut().for_each(|x| *x /= b_j);
            }
            self.beta.push(b_j);
            self.q.push(s);
        }
    }
}

/// Dense SVD of a small square matrix by one-sided Jacobi.
/// Returns `(sigma, x, y)` with `b = x diag(sigma) yᵀ`, `x` and `y` stored
/// column-major, singular values in descending order.
pub(crate) fn jacobi_svd(b: &[f64], k: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // Column-major working copy.
    let mut g: Vec<f64> = (0..k * k).map(|idx| b[(idx % k) * k + idx / k]).collect();
    let mut y = vec![0.0; k * k];
    for i in 0..k {
        y[i * k + i] = 1.0;
    }
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (gp, gq) = (&g[p * k..(p + 1) * k], &g[q * k..(q + 1) * k]);
                let a = dot(gp, gp);
                let bb = dot(gq, gq);
                let c = dot(gp, gq);
                if c == 0.0 || c.abs() <= f64::EPSILON * (a * bb).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (bb - a) / (2.0 * c);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut g, &mut y] {
                    for r in 0..k {
                        let (xp, xq) = (m[p * k + r], m[q * k + r]);
                        m[p * k + r] = cs * xp - sn * xq;
                        m[q * k + r] = sn * xp + cs * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| norm(&g[j * k..(j + 1) * k])).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut sigma = Vec::with_capacity(k);
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut ys = vec![0.0; k * k];
    let scale = norms.iter().copied().fold(0.0, f64::max);
    for (new, &old) in order.iter().enumerate() {
        let s = norms[old];
        ys[new * k..(new + 1) * k].copy_from_slice(&y[old * k..(old + 1) * k]);
        if s > scale * 1e-15 && s > 0.0 {
            sigma.push(s);
            x.push(g[old * k..(old + 1) * k].iter().map(|v| v / s).collect());
        } else {
            sigma.push(0.0);
            x.push(Vec::new());
        }
    }
    // Null directions get any orthonormal completion.
    let mut e = 0;
    for i in 0..k {
        if !x[i].is_empty() {
            continue;
        }
        let basis: Vec<Vec<f64>> = x.iter().filter(|c| !c.is_empty()).cloned().collect();
        loop {
            let mut c = vec![0.0; k];
            c[e % k] = 1.0;
            e += 1;
            orthogonalize(&mut c, &basis);
            let nc = norm(&c);
            if nc > 1e-8 {
                x[i] = c.iter().map(|v| v / nc).collect();
                break;
            }
        }
    }
    (sigma, x.concat(), ys)
}

/// Top `d` singular triplets of `a`. Each left singular vector is signed so
/// that its largest-magnitude entry (the first, on ties) is positive.
pub fn truncated_svd(a: &SparseMatrix, d: usize) -> Result<TruncatedSvd> {
    let (m, n) = (a.rows(), a.cols());
    if d == 0 || d > m.min(n) {
        return Err(Error::invalid(format!("need 1 <= d <= {} for a {m}x{n} matrix, got {d}", m.min(n))));
    }
    let at = a.transpose();
    let flipped = n > m;
    let (op, opt) = if flipped { (&at, a) } else { (a, &at) };
    let small = op.cols();
    let cap = small.min((10 * d + 100).max(500));
    let mut k = small.min((2 * d + 10).max(24));

    let mut lanczos = Bidiagonalization::new(op, opt);
    loop {
        lanczos.extend_to(k);
        let k_now = lanczos.steps();
        let mut b = vec![0.0; k_now * k_now];
        for i in 0..k_now {
            b[i * k_now + i] = lanczos.alpha[i];
            if i + 1 < k_now {
                b[i * k_now + i + 1] = lanczos.beta[i];
            }
        }
        let (sigma, x, y) = jacobi_svd(&b, k_now);
        let beta_last = lanczos.beta[k_now - 1];
        let residuals: Vec<f64> = (0..d).map(|i| (beta_last * x[i * k_now + k_now - 1]).abs()).collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let converged = max_residual <= RESIDUAL_TOL * sigma[0] || sigma[0] == 0.0;
        if converged || k_now >= cap {
            if !converged {
                return Err(Error::Convergence { iterations: k_now, residual: max_residual });
            }
            let combine = |basis: &[Vec<f64>], coef: &[f64], len: usize| {
                let mut out = vec![0.0; len * d];
                for i in 0..d {
                    for (j, bj) in basis.iter().take(k_now).enumerate() {
                        let c = coef[i * k_now + j];
                        if c != 0.0 {
                            for r in 0..len {
                                out[r * d + i] += c * bj[r];
                            }
                        }
                    }
                }
                out
            };
            let left = combine(&lanczos.p, &x, op.rows());
            let right = combine(&lanczos.q, &y, op.cols());
            let (mut u, mut v) = if flipped { (right, left) } else { (left, right) };
            for i in 0..d {
                let mut best = 0;
                for r in 0..m {
                    if u[r * d + i].abs() > u[best * d + i].abs() {
                        best = r;
                    }
                }
                if u[best * d + i] < 0.0 {
                    (0..m).for_each(|r| u[r * d + i] = -u[r * d + i]);
                    (0..n).for_each(|r| v[r * d + i] = -v[r * d + i]);
                }
            }
            return Ok(TruncatedSvd {
                rows: m,
                cols: n,
                k: d,
                sigma: sigma[..d].to_vec(),
                u,
                v,
                steps: k_now,
                max_residual,
            });
        }
        k = (2 * k).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs() {
        let k = 4;
        let b = [4.0, 1.0, 0.0, 0.0, 0.0, 3.0, 0.5, 0.0, 0.0, 0.0, 2.0, 0.1, 0.0, 0.0, 0.0, 0.0];
        let (s, x, y) = jacobi_svd(&b, k);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(s[3], 0.0);
        for r in 0..k {
            for c in 0..k {
                let v: f64 = (0..k).map(|i| x[i * k + r] * s[i] * y[i * k + c]).sum();
                assert!((v - b[r * k + c]).abs() < 1e-13);
            }
        }
        for i in 0..k {
            for j in 0..k {
                let xx: f64 = (0..k).map(|r| x[i * k + r] * x[j * k + r]).sum();
                assert!((xx - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let a = SparseMatrix::from_dense(3, 3, &[3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let s = truncated_svd(&a, 2).unwrap();
        assert!((s.sigma[0] - 3.0).abs() < 1e-14 && (s.sigma[1] - 2.0).abs() < 1e-14);
        assert!((s.u_col(0)[0] - 1.0).abs() < 1e-14);
        assert!((s.u_col(1)[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one() {
        let u = [0.6, 0.0, 0.8];
        let v = [0.5, 0.5, 0.5, 0.5];
        let dense: Vec<f64> = (0..12).map(|i| 5.0 * u[i / 4] * v[i % 4]).collect();
        let a = SparseMatrix::from_dense(3, 4, &dense).unwrap();
        let s = truncated_svd(&a, 1).unwrap();
        assert!((s.sigma[0] - 5.0).abs() < 1e-13);
        // Remaining triplets of a rank-one matrix are exact zeros.
        let s3 = truncated_svd(&a, 3).unwrap();
        assert!(s3.sigma[1].abs() < 1e-12 && s3.sigma[2].abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rank_and_handles_zero() {
        let a = SparseMatrix::from_dense(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(truncated_svd(&a, 0).is_err());
        assert!(truncated_svd(&a, 3).is_err());
        let z = SparseMatrix::from_triplets(3, 2, &[]).unwrap();
        let s = truncated_svd(&z, 2).unwrap();
        assert_eq!(s.sigma, vec![0.0, 0.0]);
    }
}
