//! Direct scattering solves: the total field u = u^i + k^2 V[q u] where V is
//! convolution with the outgoing 2D Green's function (i/4) H_0^(1)(k|x-y|),
//! discretized on a uniform grid with an exact zero-padded circular
//! convolution and an equal-area-disk correction on the singular self cell.
//! Far-field patterns come from midpoint quadrature of the volume integral.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{rasterize_contrast, Grid, MediumSpec};
use crate::linalg::{fft_friendly_size, gmres, Fft2, GmresOptions};
use crate::specfun::hankel1;

#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub k: f64,
    /// Propagation direction angle; d = (cos, sin).
    pub direction_angle: f64,
}

impl PlaneWave {
    pub fn new(k: f64, direction_angle: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::config(format!("wavenumber must be positive, got {k}")));
        }
        Ok(PlaneWave { k, direction_angle })
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let (s, c) = self.direction_angle.sin_cos();
        Complex64::from_polar(1.0, self.k * (x * c + y * s))
    }
}

#[derive(Debug, Clone)]
pub struct TotalField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub wave: PlaneWave,
}

/// Sampled far-field pattern u_inf(obs_i, inc_j, k). Both angle sets are
/// uniform on [0, 2pi) starting at 0; entries are row-major over
/// observations then incidences.
#[derive(Debug, Clone)]
pub struct FarFieldMatrix {
    pub k: f64,
    pub obs_count: usize,
    pub inc_count: usize,
    pub entries: Vec<Complex64>,
}

impl FarFieldMatrix {
    pub fn from_fn(
        k: f64,
        obs_count: usize,
        inc_count: usize,
        mut f: impl FnMut(f64, f64) -> Complex64,
    ) -> Self {
        let mut entries = Vec::with_capacity(obs_count * inc_count);
        for i in 0..obs_count {
            let oa = 2.0 * PI * i as f64 / obs_count as f64;
            for j in 0..inc_count {
                let ia = 2.0 * PI * j as f64 / inc_count as f64;
                entries.push(f(oa, ia));
            }
        }
        FarFieldMatrix { k, obs_count, inc_count, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.inc_count + j]
    }

    pub fn obs_angle(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.obs_count as f64
    }

    pub fn inc_angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.inc_count as f64
    }

    /// Quadrature weight of the incident-direction grid, 2pi/n_inc.
    pub fn inc_weight(&self) -> f64 {
        2.0 * PI / self.inc_count as f64
    }

    pub fn obs_weight(&self) -> f64 {
        2.0 * PI / self.obs_count as f64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative defect of u_inf(x,d) = u_inf(-d,-x) on matched angle grids.
    pub fn reciprocity_defect(&self) -> Result<f64> {
        if self.obs_count != self.inc_count || self.obs_count % 2 != 0 {
            return Err(Error::config(
                "reciprocity defect needs matched even obs/inc angle grids",
            ));
        }
        let m = self.obs_count;
        let anti = |i: usize| (i + m / 2) % m;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..m {
            for j in 0..m {
                let a = self.get(i, j);
                let b = self.get(anti(j), anti(i));
                num += (a - b).norm_sqr();
                den += a.norm_sqr();
            }
        }
        Ok((num / den.max(1e-300)).sqrt())
    }

    /// Relative optical-theorem defect for incident direction j:
    /// integral of |u_inf|^2 over observations vs the forward-scattering
    /// imaginary part (constant verified against the Mie oracle).
    pub fn optical_defect(&self, j: usize) -> Result<f64> {
        if self.obs_count * self.inc_count == 0 || j >= self.inc_count {
            return Err(Error::config("incident index out of range"));
        }
        if self.inc_count % self.obs_count != 0 && self.obs_count % self.inc_count != 0 {
            return Err(Error::config("optical defect needs commensurate angle grids"));
        }
        // Locate the observation index aligned with d_j.
        let i = j * self.obs_count / self.inc_count;
        if i * self.inc_count != j * self.obs_count {
            return Err(Error::config("incident direction not in the observation grid"));
        }
        let total: f64 =
            (0..self.obs_count).map(|r| self.get(r, j).norm_sqr()).sum::<f64>() * self.obs_weight();
        let fwd = self.get(i, j);
        let predicted = -(8.0 * PI / self.k).sqrt() * (Complex64::from_polar(1.0, PI / 4.0) * fwd).re;
        Ok((total - predicted).abs() / total.max(1e-300))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative GMRES residual target.
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
    /// Anti-aliasing samples per axis per cell for the contrast raster.
    pub supersample: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-7, restart: 50, max_iterations: 500, supersample: 4 }
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if !(1e-10..=1e-4).contains(&tol) {
        return Err(Error::config(format!("solver tol {tol} outside [1e-10, 1e-4]")));
    }
    Ok(())
}

/// Shared per-(medium, grid, k) solver state: contrast raster, support list,
/// and the FFT image of the periodized Green's kernel. One context serves
/// every incident direction at that wavenumber.
pub struct SolverContext {
    pub grid: Grid,
    pub k: f64,
    contrast: Vec<f64>,
    support: Vec<(usize, usize)>,
    support_q: Vec<f64>,
    pad: usize,
    kernel_hat: Vec<Complex64>,
    fft: Fft2,
}

impl SolverContext {
    pub fn new(medium: &MediumSpec, grid: &Grid, k: f64, opts: &SolverOptions) -> Result<Self> {
        let contrast = rasterize_contrast(medium, grid, opts.supersample)?;
        Self::with_contrast(grid.clone(), k, contrast, medium.refractive_index)
    }

    /// Entry point that takes a raw contrast field (tests zero it manually).
    pub fn with_contrast(grid: Grid, k: f64, contrast: Vec<f64>, n_max: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::config("wavenumber must be positive"));
        }
        if contrast.len() != grid.len() {
            return Err(Error::config("contrast field does not match the grid"));
        }
        // Resolve at least ten cells per interior wavelength.
        let lambda = 2.0 * PI / (k * n_max.max(1.0).sqrt());
        let h = grid.hx().max(grid.hy());
        if h > lambda / 10.0 + 1e-12 {
            return Err(Error::config(format!(
                "grid too coarse: h = {h:.4e} exceeds lambda/10 = {:.4e}",
                lambda / 10.0
            )));
        }

        let res = grid.resolution;
        let pad = fft_friendly_size(2 * res);
        let fft = Fft2::new(pad, pad);
        let kernel_hat = build_kernel(&grid, k, pad, &fft)?;

        let mut support = Vec::new();
        let mut support_q = Vec::new();
        for iy in 0..res {
            for ix in 0..res {
                let q = contrast[grid.index(ix, iy)];
                if q != 0.0 {
                    support.push((ix, iy));
                    support_q.push(q);
                }
            }
        }
        Ok(SolverContext { grid: grid.clone(), k, contrast, support, support_q, pad, kernel_hat, fft })
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn contrast(&self) -> &[f64] {
        &self.contrast
    }

    /// Convolution with the (k^2-scaled) Green's kernel of a source given on
    /// the support cells; output on the full padded grid.
    fn convolve_support(&self, source: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.pad * self.pad];
        for (s, &(ix, iy)) in self.support.iter().enumerate() {
            buf[iy * self.pad + ix] = source[s];
        }
        self.fft.forward(&mut buf);
        for (b, kh) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= kh;
        }
        self.fft.inverse(&mut buf);
        buf
    }

    /// Solves for the total field restricted to the support cells under a
    /// given incident field (sampled on the support).
    pub fn solve_on_support(
        &self,
        incident: &[Complex64],
        opts: &SolverOptions,
    ) -> Result<Vec<Complex64>> {
        validate_tol(opts.tol)?;
        if self.support.is_empty() {
            return Ok(vec![]);
        }
        let gmres_opts = GmresOptions {
            tol: opts.tol,
            restart: opts.restart,
            max_iterations: opts.max_iterations,
        };
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            let src: Vec<Complex64> =
                x.iter().zip(&self.support_q).map(|(u, &q)| u * q).collect();
            let conv = self.convolve_support(&src);
            self.support
                .iter()
                .zip(x)
                .map(|(&(ix, iy), &xi)| xi - conv[iy * self.pad + ix])
                .collect()
        };
        gmres(&mut |x: &[Complex64]| apply(x), incident, &gmres_opts)
    }

    /// Total field everywhere on the grid from the support solution.
    pub fn extend_to_grid(&self, wave: &PlaneWave, u_support: &[Complex64]) -> Vec<Complex64> {
        let res = self.grid.resolution;
        let mut values = Vec::with_capacity(self.grid.len());
        if self.support.is_empty() {
            for iy in 0..res {
                for ix in 0..res {
                    let p = self.grid.cell_center(ix, iy);
                    values.push(wave.eval(p.x, p.y));
                }
            }
            return values;
        }
        let src: Vec<Complex64> =
            u_support.iter().zip(&self.support_q).map(|(u, &q)| u * q).collect();
        let conv = self.convolve_support(&src);
        for iy in 0..res {
            for ix in 0..res {
                let p = self.grid.cell_center(ix, iy);
                values.push(wave.eval(p.x, p.y) + conv[iy * self.pad + ix]);
            }
        }
        values
    }

    pub fn incident_on_support(&self, wave: &PlaneWave) -> Vec<Complex64> {
        self.support
            .iter()
            .map(|&(ix, iy)| {
                let p = self.grid.cell_center(ix, iy);
                wave.eval(p.x, p.y)
            })
            .collect()
    }

    /// Far field of a support solution at one observation angle:
    /// u_inf = gamma_2 k^2 sum e^{-ik x_hat . y} q u h^2.
    pub fn far_field_of(&self, u_support: &[Complex64], obs_angle: f64) -> Complex64 {
        let gamma2 = Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * self.k).sqrt();
        let (s, c) = obs_angle.sin_cos();
        let mut acc = Complex64::new(0.0, 0.0);
        for ((u, &q), &(ix, iy)) in u_support.iter().zip(&self.support_q).zip(&self.support) {
            let p = self.grid.cell_center(ix, iy);
            let phase = Complex64::from_polar(1.0, -self.k * (c * p.x + s * p.y));
            acc += u * q * phase;
        }
        gamma2 * self.k * self.k * self.grid.cell_area() * acc
    }

    /// Far field at a uniform set of observation angles, with separable phase
    /// factors precomputed per axis.
    pub fn far_field_row(&self, u_support: &[Complex64], obs: &ObsPhases) -> Vec<Complex64> {
        let gamma2 = Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * self.k).sqrt();
        let scale = gamma2 * self.k * self.k * self.grid.cell_area();
        let src: Vec<Complex64> =
            u_support.iter().zip(&self.support_q).map(|(u, &q)| u * q).collect();
        obs.phase_x
            .iter()
            .zip(&obs.phase_y)
            .map(|(px, py)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, &(ix, iy)) in src.iter().zip(&self.support) {
                    acc += w * px[ix] * py[iy];
                }
                scale * acc
            })
            .collect()
    }

    pub fn obs_phases(&self, angles: &[f64]) -> ObsPhases {
        let res = self.grid.resolution;
        let mut phase_x = Vec::with_capacity(angles.len());
        let mut phase_y = Vec::with_capacity(angles.len());
        for &a in angles {
            let (s, c) = a.sin_cos();
            phase_x.push(
                (0..res)
                    .map(|ix| {
                        let x = self.grid.bbox.xmin + (ix as f64 + 0.5) * self.grid.hx();
                        Complex64::from_polar(1.0, -self.k * c * x)
                    })
                    .collect(),
            );
            phase_y.push(
                (0..res)
                    .map(|iy| {
                        let y = self.grid.bbox.ymin + (iy as f64 + 0.5) * self.grid.hy();
                        Complex64::from_polar(1.0, -self.k * s * y)
                    })
                    .collect(),
            );
        }
        ObsPhases { phase_x, phase_y }
    }
}

/// e^{-ik x_hat . y} factored over grid axes, one pair of tables per angle.
pub struct ObsPhases {
    phase_x: Vec<Vec<Complex64>>,
    phase_y: Vec<Vec<Complex64>>,
}

fn build_kernel(grid: &Grid, k: f64, pad: usize, fft: &Fft2) -> Result<Vec<Complex64>> {
    let (hx, hy) = (grid.hx(), grid.hy());
    let area = hx * hy;
    // Equal-area disk radius for the singular self cell.
    let a = (area / PI).sqrt();
    let self_cell = Complex64::i() * PI * a / (2.0 * k) * hankel1(1, k * a)?
        - Complex64::new(1.0 / (k * k), 0.0);
    let k2 = k * k;
    let mut kernel = vec![Complex64::new(0.0, 0.0); pad * pad];
    let half = pad as i64 / 2;
    for ry in 0..pad {
        let dy = {
            let r = ry as i64;
            if r <= half { r } else { r - pad as i64 }
        } as f64
            * hy;
        for rx in 0..pad {
            let dx = {
                let r = rx as i64;
                if r <= half { r } else { r - pad as i64 }
            } as f64
                * hx;
            let dist = dx.hypot(dy);
            kernel[ry * pad + rx] = if dist == 0.0 {
                k2 * self_cell
            } else {
                k2 * area * Complex64::i() / 4.0 * hankel1(0, k * dist)?
            };
        }
    }
    fft.forward(&mut kernel);
    Ok(kernel)
}

/// Solves the direct problem for one plane wave and returns the total field
/// on the grid.
pub fn solve_total_field(
    medium: &MediumSpec,
    grid: &Grid,
    wave: PlaneWave,
    opts: &SolverOptions,
) -> Result<TotalField> {
    let ctx = SolverContext::new(medium, grid, wave.k, opts)?;
    let incident = ctx.incident_on_support(&wave);
    let u = ctx.solve_on_support(&incident, opts)?;
    let values = ctx.extend_to_grid(&wave, &u);
    Ok(TotalField { grid: grid.clone(), values, wave })
}

/// Far field of a solved total field at one observation angle. Convenience
/// wrapper; batch callers should go through `SolverContext`.
pub fn far_field(total: &TotalField, medium: &MediumSpec, obs_angle: f64) -> Result<Complex64> {
    Ok(far_field_many(total, medium, &[obs_angle])?[0])
}

pub fn far_field_many(
    total: &TotalField,
    medium: &MediumSpec,
    angles: &[f64],
) -> Result<Vec<Complex64>> {
    let grid = &total.grid;
    let contrast = rasterize_contrast(medium, grid, SolverOptions::default().supersample)?;
    let k = total.wave.k;
    let gamma2 = Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt();
    let scale = gamma2 * k * k * grid.cell_area();
    let res = grid.resolution;
    Ok(angles
        .iter()
        .map(|&a| {
            let (s, c) = a.sin_cos();
            let mut acc = Complex64::new(0.0, 0.0);
            for iy in 0..res {
                for ix in 0..res {
                    let q = contrast[grid.index(ix, iy)];
                    if q == 0.0 {
                        continue;
                    }
                    let p = grid.cell_center(ix, iy);
                    acc += total.values[grid.index(ix, iy)]
                        * q
                        * Complex64::from_polar(1.0, -k * (c * p.x + s * p.y));
                }
            }
            scale * acc
        })
        .collect())
}

/// Synthesizes the far-field matrix at one wavenumber: `inc_count`
/// independent forward solves, one observation row set each. Solves run in
/// parallel over incident directions; each column is produced independently
/// so the result is deterministic under any scheduling.
pub fn synthesize_matrix(
    medium: &MediumSpec,
    grid: &Grid,
    k: f64,
    obs_count: usize,
    inc_count: usize,
    opts: &SolverOptions,
) -> Result<FarFieldMatrix> {
    let r = medium.geometry.origin_circumradius();
    let nyquist = 2 * (k * r).ceil() as usize + 1;
    if obs_count < nyquist || inc_count < nyquist {
        return Err(Error::config(format!(
            "angle counts (m={obs_count}, n_inc={inc_count}) below the Nyquist count {nyquist} for kR = {:.2}",
            k * r
        )));
    }
    let ctx = SolverContext::new(medium, grid, k, opts)?;
    let obs_angles: Vec<f64> =
        (0..obs_count).map(|i| 2.0 * PI * i as f64 / obs_count as f64).collect();
    let obs = ctx.obs_phases(&obs_angles);

    let columns: Vec<Result<Vec<Complex64>>> = (0..inc_count)
        .into_par_iter()
        .map(|j| {
            let wave = PlaneWave::new(k, 2.0 * PI * j as f64 / inc_count as f64)?;
            let incident = ctx.incident_on_support(&wave);
            let u = ctx.solve_on_support(&incident, opts)?;
            Ok(ctx.far_field_row(&u, &obs))
        })
        .collect();

    let mut entries = vec![Complex64::new(0.0, 0.0); obs_count * inc_count];
    for (j, col) in columns.into_iter().enumerate() {
        let col = col.map_err(|e| match e {
            Error::NoConvergence { iterations, final_residual, history } => Error::NoConvergence {
                iterations,
                final_residual,
                history,
            },
            other => other,
        })?;
        for i in 0..obs_count {
            entries[i * inc_count + j] = col[i];
        }
    }
    Ok(FarFieldMatrix { k, obs_count, inc_count, entries })
}

/// Relative L2 distance between two complex fields.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(1e-300)).sqrt()
}

pub use crate::linalg::vec_norm as field_norm;
