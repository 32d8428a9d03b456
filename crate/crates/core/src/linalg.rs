//! Dense complex linear algebra and FFT plumbing shared by the solver and
//! the spectral indicator: 2D FFT plans, restarted GMRES, and a one-sided
//! Jacobi SVD (chosen for its accuracy on the smallest singular values,
//! which is exactly what the indicator reads off).

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Column-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two columns borrowed mutably at once (p != q).
    fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [Complex64], &mut [Complex64]) {
        assert!(p < q);
        let (lo, hi) = self.data.split_at_mut(q * self.rows);
        (&mut lo[p * self.rows..(p + 1) * self.rows], &mut hi[..self.rows])
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let w = other.get(k, j);
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let a = self.col(k);
                let o = out.col_mut(j);
                for i in 0..self.rows {
                    o[i] += a[i] * w;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (k, &w) in x.iter().enumerate() {
            let a = self.col(k);
            for i in 0..self.rows {
                out[i] += a[i] * w;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

/// Result of [`svd`], singular values sorted descending. `v` columns are the
/// right singular vectors in the same order.
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

impl Svd {
    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().unwrap()
    }

    pub fn v_min(&self) -> &[Complex64] {
        self.v.col(self.v.cols - 1)
    }
}

/// One-sided Jacobi SVD of an m x n matrix with m >= n. Orthogonalizes the
/// columns by unitary plane rotations; converges in a handful of sweeps and
/// computes small singular values to full relative accuracy.
pub fn svd(a: &CMat) -> Result<Svd> {
    if a.rows < a.cols {
        return Err(Error::config(format!(
            "svd expects rows >= cols, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.cols;
    let mut work = a.clone();
    let mut v = CMat::from_fn(n, n, |i, j| {
        if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
    });

    let mut norms_sq: Vec<f64> = (0..n).map(|j| vec_norm(work.col(j)).powi(2)).collect();
    let scale = norms_sq.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Svd { singular_values: vec![0.0; n], v });
    }

    const TOL: f64 = 1e-28; // on |gamma|^2 / (alpha*beta)
    for _sweep in 0..40 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let gamma = vec_dot(work.col(p), work.col(q));
                let alpha = norms_sq[p];
                let beta = norms_sq[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.norm_sqr() <= TOL * alpha * beta {
                    continue;
                }
                let abs_g = gamma.norm();
                let phase = gamma / abs_g; // e^{i phi}
                let zeta = (alpha - beta) / (2.0 * abs_g);
                // Small root of t^2 - 2 zeta t - 1 = 0 zeroes the coupling.
                let t = -zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let rot = |cp: &mut [Complex64], cq: &mut [Complex64]| {
                    for i in 0..cp.len() {
                        let xp = cp[i];
                        let xq = cq[i];
                        cp[i] = c * xp - s * phase.conj() * xq;
                        cq[i] = s * phase * xp + c * xq;
                    }
                };
                {
                    let (cp, cq) = work.col_pair_mut(p, q);
                    rot(cp, cq);
                }
                {
                    let (vp, vq) = v.col_pair_mut(p, q);
                    rot(vp, vq);
                }
                norms_sq[p] = vec_norm(work.col(p)).powi(2);
                norms_sq[q] = vec_norm(work.col(q)).powi(2);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    // Sort descending by singular value, carrying V columns along.
    let mut order: Vec<usize> = (0..n).collect();
    let sigmas: Vec<f64> = (0..n).map(|j| vec_norm(work.col(j))).collect();
    order.sort_by(|&i, &j| sigmas[j].partial_cmp(&sigmas[i]).unwrap());
    let singular_values: Vec<f64> = order.iter().map(|&j| sigmas[j]).collect();
    let v_sorted = CMat::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(Svd { singular_values, v: v_sorted })
}

// ---------------------------------------------------------------------------
// GMRES
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { tol: 1e-7, restart: 50, max_iterations: 500 }
    }
}

/// Restarted GMRES for `x = rhs + op_shift(x)` style operators written as
/// `A x = rhs` with `apply(x) = A x`. Returns the solution; on budget
/// exhaustion reports the residual history.
pub fn gmres(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    rhs: &[Complex64],
    opts: &GmresOptions,
) -> Result<Vec<Complex64>> {
    let n = rhs.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let rhs_norm = vec_norm(rhs);
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let abs_tol = opts.tol * rhs_norm;
    let mut history: Vec<f64> = Vec::new();
    let mut total = 0usize;

    loop {
        let ax = apply(&x);
        let r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = vec_norm(&r);
        history.push(beta / rhs_norm);
        if beta <= abs_tol {
            return Ok(x);
        }
        if total >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations: total,
                final_residual: beta / rhs_norm,
                history,
            });
        }

        let m = opts.restart.min(n);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|c| c / beta).collect());
        let mut h = CMat::zeros(m + 1, m);
        let mut cs = vec![0.0_f64; m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);

        let mut j = 0;
        while j < m && total < opts.max_iterations {
            let mut w = apply(&basis[j]);
            for i in 0..=j {
                let hij = vec_dot(&basis[i], &w);
                h.set(i, j, hij);
                for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                    *wk -= hij * vk;
                }
            }
            let wn = vec_norm(&w);
            h.set(j + 1, j, Complex64::new(wn, 0.0));
            if wn > 1e-300 {
                basis.push(w.iter().map(|c| c / wn).collect());
            } else {
                basis.push(vec![Complex64::new(0.0, 0.0); n]);
            }

            for i in 0..j {
                let t = cs[i] * h.get(i, j) + sn[i] * h.get(i + 1, j);
                let b = -sn[i].conj() * h.get(i, j) + cs[i] * h.get(i + 1, j);
                h.set(i, j, t);
                h.set(i + 1, j, b);
            }
            let (c, s) = givens(h.get(j, j), h.get(j + 1, j));
            cs[j] = c;
            sn[j] = s;
            let t = c * h.get(j, j) + s * h.get(j + 1, j);
            h.set(j, j, t);
            h.set(j + 1, j, Complex64::new(0.0, 0.0));
            let t = c * g[j] + s * g[j + 1];
            g[j + 1] = -s.conj() * g[j] + c * g[j + 1];
            g[j] = t;

            total += 1;
            j += 1;
            history.push(g[j].norm() / rhs_norm);
            if g[j].norm() <= abs_tol {
                break;
            }
        }

        // Back substitution on the j x j triangular system.
        let mut y = vec![Complex64::new(0.0, 0.0); j];
        for i in (0..j).rev() {
            let mut sum = g[i];
            for k2 in (i + 1)..j {
                sum -= h.get(i, k2) * y[k2];
            }
            if h.get(i, i).norm() > 1e-300 {
                y[i] = sum / h.get(i, i);
            }
        }
        for i in 0..j {
            for (xk, vk) in x.iter_mut().zip(&basis[i]) {
                *xk += y[i] * vk;
            }
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b.norm() < 1e-300 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() < 1e-300 {
        return (0.0, b / b.norm());
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

// ---------------------------------------------------------------------------
// 2D FFT
// ---------------------------------------------------------------------------

/// Plans for in-place 2D FFTs on a rows x cols complex buffer (row-major).
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.apply(buf, true);
    }

    /// Unnormalized inverse followed by the 1/(rows*cols) scaling.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.apply(buf, false);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn apply(&self, buf: &mut [Complex64], forward: bool) {
        assert_eq!(buf.len(), self.rows * self.cols);
        let row_plan = if forward { &self.row_fwd } else { &self.row_inv };
        let col_plan = if forward { &self.col_fwd } else { &self.col_inv };
        for r in 0..self.rows {
            row_plan.process(&mut buf[r * self.cols..(r + 1) * self.cols]);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        transpose(buf, &mut t, self.rows, self.cols);
        for c in 0..self.cols {
            col_plan.process(&mut t[c * self.rows..(c + 1) * self.rows]);
        }
        transpose(&t, buf, self.cols, self.rows);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Smallest FFT-friendly size (2^a or 3*2^a) >= n.
pub fn fft_friendly_size(n: usize) -> usize {
    let mut p = 1usize;
    while p < n {
        p <<= 1;
    }
    // 3*2^(a-2) sits between 2^(a-1) and 2^a; take it when it suffices.
    let three = (p >> 2) * 3;
    if three >= n && three > 0 {
        three
    } else {
        p
    }
}
