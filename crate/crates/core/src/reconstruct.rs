//! Herglotz wave evaluation from a recovered kernel and the geometric read:
//! vanishing points (deep isolated minima of |v_g|) mark convex corners,
//! localizing points (isolated dominant maxima) mark reflex cusps. Clustered
//! representatives optionally close into a convex polygon.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Grid, Point2};
use crate::specfun::bessel_j_array;
use crate::spectral::TruncatedKernel;

#[derive(Debug, Clone)]
pub struct HerglotzField {
    pub grid: Grid,
    /// Complex field, normalized so max |v| over the grid is 1.
    pub values: Vec<Complex64>,
    pub k: f64,
}

impl HerglotzField {
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }
}

fn check_resolution(kernel: &TruncatedKernel, grid: &Grid) -> Result<()> {
    let lambda = 2.0 * PI / kernel.k;
    let h = grid.hx().max(grid.hy());
    if h > lambda / 10.0 + 1e-12 {
        return Err(Error::config(format!(
            "herglotz grid too coarse: h = {h:.4e} exceeds lambda/10 = {:.4e}",
            lambda / 10.0
        )));
    }
    Ok(())
}

/// Evaluates v_g(x) = sqrt(2 pi) sum_n a_n i^n J_n(k|x|) e^{in theta} on the
/// grid (the circular-harmonic form of the plane-wave superposition) and
/// normalizes to unit maximum magnitude.
pub fn herglotz_eval(kernel: &TruncatedKernel, grid: &Grid) -> Result<HerglotzField> {
    check_resolution(kernel, grid)?;
    let values = herglotz_raw(kernel, grid);
    Ok(normalize(grid.clone(), values, kernel.k))
}

/// Direct quadrature of the defining integral over `n_dirs` plane-wave
/// directions; independent route used to validate the mode expansion.
pub fn herglotz_eval_quadrature(
    kernel: &TruncatedKernel,
    grid: &Grid,
    n_dirs: usize,
) -> Result<HerglotzField> {
    check_resolution(kernel, grid)?;
    let values = herglotz_raw_quadrature(kernel, grid, n_dirs);
    Ok(normalize(grid.clone(), values, kernel.k))
}

pub fn herglotz_raw(kernel: &TruncatedKernel, grid: &Grid) -> Vec<Complex64> {
    let res = grid.resolution;
    let k = kernel.k;
    let order = kernel.order;
    let front = (2.0 * PI).sqrt();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values
        .par_chunks_mut(res)
        .enumerate()
        .for_each(|(iy, row)| {
            for (ix, slot) in row.iter_mut().enumerate() {
                let p = grid.cell_center(ix, iy);
                let r = p.norm();
                let theta = p.angle();
                let j = bessel_j_array(order, k * r);
                let mut acc = Complex64::new(0.0, 0.0);
                for n in -(order as i32)..=(order as i32) {
                    let jn = if n < 0 && n % 2 != 0 {
                        -j[n.unsigned_abs() as usize]
                    } else {
                        j[n.unsigned_abs() as usize]
                    };
                    acc += kernel.coeff(n)
                        * Complex64::i().powi(n)
                        * jn
                        * Complex64::from_polar(1.0, n as f64 * theta);
                }
                *slot = front * acc;
            }
        });
    values
}

fn herglotz_raw_quadrature(kernel: &TruncatedKernel, grid: &Grid, n_dirs: usize) -> Vec<Complex64> {
    let res = grid.resolution;
    let k = kernel.k;
    let w = 2.0 * PI / n_dirs as f64;
    let dirs: Vec<(f64, f64, Complex64)> = (0..n_dirs)
        .map(|j| {
            let th = w * j as f64;
            (th.cos(), th.sin(), kernel.eval(th) * w)
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values
        .par_chunks_mut(res)
        .enumerate()
        .for_each(|(iy, row)| {
            for (ix, slot) in row.iter_mut().enumerate() {
                let p = grid.cell_center(ix, iy);
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, s, gw) in &dirs {
                    acc += gw * Complex64::from_polar(1.0, k * (p.x * c + p.y * s));
                }
                *slot = acc;
            }
        });
    values
}

fn normalize(grid: Grid, mut values: Vec<Complex64>, k: f64) -> HerglotzField {
    let max = values.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    if max > 0.0 {
        for v in values.iter_mut() {
            *v /= max;
        }
    }
    HerglotzField { grid, values, k }
}

/// Relative discrete Helmholtz residual ||(L_h + k^2) v|| / ||k^2 v|| over
/// interior nodes with the 5-point Laplacian.
pub fn helmholtz_residual(field: &HerglotzField) -> f64 {
    let res = field.grid.resolution;
    let (hx, hy) = (field.grid.hx(), field.grid.hy());
    let k2 = field.k * field.k;
    let mut num = 0.0;
    let mut den = 0.0;
    let at = |ix: usize, iy: usize| field.values[field.grid.index(ix, iy)];
    for iy in 1..res - 1 {
        for ix in 1..res - 1 {
            let v = at(ix, iy);
            let lap = (at(ix + 1, iy) - 2.0 * v + at(ix - 1, iy)) / (hx * hx)
                + (at(ix, iy + 1) - 2.0 * v + at(ix, iy - 1)) / (hy * hy);
            num += (lap + k2 * v).norm_sqr();
            den += (k2 * v).norm_sqr();
        }
    }
    (num / den.max(1e-300)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectMode {
    Auto,
    Vanishing,
    Localizing,
}

#[derive(Debug, Clone, Copy)]
pub struct CuspParams {
    /// Vanishing candidates: local minima with |v| <= this.
    pub tau_v: f64,
    /// Localizing candidates: local maxima with |v| >= this.
    pub tau_l: f64,
    /// Single-linkage clustering radius; None = lambda/4.
    pub cluster_radius: Option<f64>,
    /// Maxima with a comparable peak within this radius are not isolated;
    /// None = one wavelength.
    pub isolation_radius: Option<f64>,
    /// Candidates on extended nodal curves (>= this many collinear-ish
    /// neighbors within one wavelength) are demoted to curve artifacts.
    pub nodal_min_count: usize,
    /// Perpendicular RMS below this fraction of the wavelength counts as
    /// collinear-ish.
    pub nodal_rms_fraction: f64,
}

impl Default for CuspParams {
    fn default() -> Self {
        CuspParams {
            tau_v: 0.05,
            tau_l: 0.95,
            cluster_radius: None,
            isolation_radius: None,
            nodal_min_count: 5,
            nodal_rms_fraction: 1.0 / 16.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub members: Vec<Point2>,
    pub representative: Point2,
}

#[derive(Debug, Clone)]
pub struct CuspReport {
    pub vanishing: Vec<Cluster>,
    pub localizing: Vec<Cluster>,
    /// Vanishing candidates demoted by the nodal-curve rule.
    pub curve_artifacts: Vec<Point2>,
    /// Human-readable note when nothing was found.
    pub diagnostic: Option<String>,
}

/// Finds vanishing and/or localizing points of a normalized Herglotz field.
pub fn detect_cusps(field: &HerglotzField, mode: DetectMode, params: &CuspParams) -> Result<CuspReport> {
    let res = field.grid.resolution;
    let lambda = field.wavelength();
    let cluster_radius = params.cluster_radius.unwrap_or(lambda / 4.0);
    let isolation = params.isolation_radius.unwrap_or(lambda);

    // Scale invariance: consume magnitudes re-normalized to max 1.
    let mags: Vec<f64> = field.values.iter().map(|v| v.norm()).collect();
    let max = mags.iter().cloned().fold(0.0_f64, f64::max).max(1e-300);
    let at = |ix: usize, iy: usize| mags[field.grid.index(ix, iy)] / max;

    let mut vanishing_candidates: Vec<Point2> = Vec::new();
    let mut maxima: Vec<(Point2, f64)> = Vec::new();
    for iy in 1..res - 1 {
        for ix in 1..res - 1 {
            let v = at(ix, iy);
            let mut is_min = true;
            let mut is_max = true;
            for (dx, dy) in [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                let w = at((ix as i64 + dx) as usize, (iy as i64 + dy) as usize);
                if w <= v {
                    is_min = false;
                }
                if w >= v {
                    is_max = false;
                }
                if !is_min && !is_max {
                    break;
                }
            }
            let p = field.grid.cell_center(ix, iy);
            if is_min && v <= params.tau_v {
                vanishing_candidates.push(p);
            }
            if is_max && v >= params.tau_l {
                maxima.push((p, v));
            }
        }
    }

    // Nodal-curve demotion for the vanishing side.
    let mut kept: Vec<Point2> = Vec::new();
    let mut artifacts: Vec<Point2> = Vec::new();
    for (i, &p) in vanishing_candidates.iter().enumerate() {
        let neighborhood: Vec<Point2> = vanishing_candidates
            .iter()
            .enumerate()
            .filter(|&(j, q)| j != i && q.dist(p) <= lambda)
            .map(|(_, &q)| q)
            .collect();
        if neighborhood.len() + 1 >= params.nodal_min_count {
            let mut pts = neighborhood;
            pts.push(p);
            if perpendicular_rms(&pts) < params.nodal_rms_fraction * lambda {
                artifacts.push(p);
                continue;
            }
        }
        kept.push(p);
    }

    // Localizing candidates must dominate their wavelength-scale
    // neighborhood: a comparable peak nearby disqualifies both.
    let localizing_pts: Vec<Point2> = maxima
        .iter()
        .filter(|(p, v)| {
            maxima
                .iter()
                .all(|(q, w)| q == p || q.dist(*p) > isolation || *w < 0.9 * v)
        })
        .map(|&(p, _)| p)
        .collect();

    let vanishing = if mode != DetectMode::Localizing {
        cluster_points(&kept, cluster_radius)
    } else {
        vec![]
    };
    let localizing = if mode != DetectMode::Vanishing {
        cluster_points(&localizing_pts, cluster_radius)
    } else {
        vec![]
    };

    let diagnostic = if vanishing.is_empty() && localizing.is_empty() {
        Some("no vanishing or localizing candidates; thresholds may need adjustment".to_string())
    } else {
        None
    };
    Ok(CuspReport { vanishing, localizing, curve_artifacts: artifacts, diagnostic })
}

/// RMS distance to the best-fit line (smallest principal axis of the spread).
fn perpendicular_rms(pts: &[Point2]) -> f64 {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let dx = p.x - cx;
        let dy = p.y - cy;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let lambda_min = (tr / 2.0 - disc).max(0.0);
    (lambda_min / n).sqrt()
}

fn cluster_points(pts: &[Point2], radius: f64) -> Vec<Cluster> {
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if pts[i].dist(pts[j]) <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Point2>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(pts[i]);
    }
    groups
        .into_values()
        .map(|members| {
            let m = members.len() as f64;
            let representative = Point2::new(
                members.iter().map(|p| p.x).sum::<f64>() / m,
                members.iter().map(|p| p.y).sum::<f64>() / m,
            );
            Cluster { members, representative }
        })
        .collect()
}

/// Convex hull (counterclockwise) of the vanishing representatives.
pub fn polygon_from_cusps(report: &CuspReport) -> Result<Vec<Point2>> {
    let pts: Vec<Point2> = report.vanishing.iter().map(|c| c.representative).collect();
    if pts.len() < 3 {
        return Err(Error::Reconstruction(format!(
            "insufficient corners: need >= 3 vanishing representatives, got {}",
            pts.len()
        )));
    }
    let hull = convex_hull(&pts);
    if hull.len() < 3 {
        return Err(Error::Reconstruction(
            "vanishing representatives are collinear; no polygon".to_string(),
        ));
    }
    Ok(hull)
}

/// Andrew's monotone chain, counterclockwise output, degenerate (collinear
/// within 1e-9) points dropped.
fn convex_hull(pts: &[Point2]) -> Vec<Point2> {
    let mut p: Vec<Point2> = pts.to_vec();
    p.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    p.dedup_by(|a, b| a.dist(*b) < 1e-12);
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Point2> = Vec::new();
    for &pt in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 1e-9 {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 1e-9 {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
