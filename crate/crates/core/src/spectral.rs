//! The frequency-scan indicator: restrict the discrete far-field operator to
//! a truncated circular-harmonic kernel space and read off the smallest
//! singular value. Transmission eigenvalues show up as dips of
//! sigma_min(k); the minimizing right singular vector is the recovered
//! Herglotz kernel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forward::FarFieldMatrix;
use crate::linalg::{svd, vec_norm, CMat};
use crate::specfun::circular_harmonic;

/// Unit-norm truncated Herglotz kernel g_N(theta) = sum a_n e^{in theta}/sqrt(2pi),
/// coefficients stored for n = -N..N.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    pub k: f64,
    pub order: usize,
    pub coeffs: Vec<Complex64>,
}

impl TruncatedKernel {
    pub fn new(k: f64, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * order + 1 {
            return Err(Error::config(format!(
                "kernel of order {order} needs {} coefficients, got {}",
                2 * order + 1,
                coeffs.len()
            )));
        }
        let norm = vec_norm(&coeffs);
        if norm < 1e-300 {
            return Err(Error::config("kernel coefficients must not all vanish"));
        }
        let mut coeffs = coeffs;
        for c in coeffs.iter_mut() {
            *c /= norm;
        }
        Ok(TruncatedKernel { k, order, coeffs })
    }

    pub fn coeff(&self, n: i32) -> Complex64 {
        self.coeffs[(n + self.order as i32) as usize]
    }

    /// g_N evaluated at a direction angle.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in self.coeffs.iter().enumerate() {
            let n = i as i32 - self.order as i32;
            acc += a * circular_harmonic(n, theta);
        }
        acc
    }

    /// Fixes the global phase: largest-magnitude coefficient real positive.
    fn fix_phase(&mut self) {
        let mut best = 0usize;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() > self.coeffs[best].norm_sqr() {
                best = i;
            }
        }
        let phase = self.coeffs[best] / self.coeffs[best].norm().max(1e-300);
        let rot = phase.conj();
        for c in self.coeffs.iter_mut() {
            *c *= rot;
        }
    }
}

/// Discrete kernel basis: column n holds circular_harmonic(n, theta_j) *
/// sqrt(w) over the uniform incident angles, so columns are orthonormal in
/// the quadrature inner product.
pub fn kernel_basis_matrix(inc_count: usize, order: usize) -> Result<CMat> {
    if inc_count < 2 * order + 2 {
        return Err(Error::config(format!(
            "n_inc = {inc_count} too small for order {order} (need >= {})",
            2 * order + 2
        )));
    }
    let w = (2.0 * PI / inc_count as f64).sqrt();
    Ok(CMat::from_fn(inc_count, 2 * order + 1, |j, col| {
        let n = col as i32 - order as i32;
        circular_harmonic(n, 2.0 * PI * j as f64 / inc_count as f64) * w
    }))
}

/// Quadrature form of F_{k,N}(g): A applied to the w-weighted samples of g_N
/// at the incident angles. Output indexed by observation angle.
pub fn apply_truncated(a: &FarFieldMatrix, kernel: &TruncatedKernel) -> Result<Vec<Complex64>> {
    if (kernel.k - a.k).abs() > 1e-12 * a.k.max(1.0) {
        return Err(Error::config(format!(
            "kernel wavenumber {} does not match matrix wavenumber {}",
            kernel.k, a.k
        )));
    }
    let w = a.inc_weight();
    let samples: Vec<Complex64> =
        (0..a.inc_count).map(|j| kernel.eval(a.inc_angle(j)) * w).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); a.obs_count];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, s) in samples.iter().enumerate() {
            acc += a.get(i, j) * s;
        }
        *o = acc;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct IndicatorOutcome {
    pub sigma: f64,
    pub kernel: TruncatedKernel,
    /// Set when the data matrix is identically zero (no scatterer).
    pub degenerate: bool,
}

/// Smallest singular value of B = A_w Y (A row-scaled by sqrt of the
/// observation weight, Y the orthonormal kernel basis) and the minimizing
/// unit kernel. This is the exact L2 minimizer of ||F_{k,N} g|| over
/// ||g|| = 1.
pub fn indicator(a: &FarFieldMatrix, order: usize) -> Result<IndicatorOutcome> {
    if 2 * order + 1 > a.obs_count {
        return Err(Error::config(format!(
            "order {order} leaves no observation headroom (m = {})",
            a.obs_count
        )));
    }
    if a.inc_count < 2 * order + 2 {
        return Err(Error::config(format!(
            "order {order} violates n_inc >= 2N+2 (n_inc = {})",
            a.inc_count
        )));
    }
    let mut identity = TruncatedKernel::new(
        a.k,
        order,
        (0..2 * order + 1)
            .map(|i| if i == order { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect(),
    )?;
    if a.frobenius_norm() == 0.0 {
        identity.fix_phase();
        return Ok(IndicatorOutcome { sigma: 0.0, kernel: identity, degenerate: true });
    }

    let b = weighted_restriction(a, order)?;
    let out = svd(&b)?;
    let mut kernel = TruncatedKernel::new(a.k, order, out.v_min().to_vec())?;
    kernel.fix_phase();
    Ok(IndicatorOutcome { sigma: out.sigma_min(), kernel, degenerate: false })
}

/// B = A_w Y, the restricted and weighted operator the SVD runs on.
fn weighted_restriction(a: &FarFieldMatrix, order: usize) -> Result<CMat> {
    let y = kernel_basis_matrix(a.inc_count, order)?;
    let sw = a.obs_weight().sqrt();
    let aw = CMat::from_fn(a.obs_count, a.inc_count, |i, j| a.get(i, j) * sw);
    Ok(aw.matmul(&y))
}

/// Paper-style L1 cost sum_d |F_{k,N}(g)|, minimized by derivative-free
/// cyclic coordinate descent on the unit sphere, seeded from the L2
/// minimizer. Exposed for comparison; dip locations agree with the L2 route.
pub fn indicator_l1(a: &FarFieldMatrix, order: usize) -> Result<IndicatorOutcome> {
    let seed = indicator(a, order)?;
    if seed.degenerate {
        return Ok(seed);
    }
    let b = weighted_restriction(a, order)?;
    let dim = 2 * order + 1;
    let cost = |coeffs: &[Complex64]| -> f64 {
        let bv = b.matvec(coeffs);
        bv.iter().map(|c| c.norm()).sum()
    };
    let mut x = seed.kernel.coeffs.clone();
    let mut best = cost(&x);
    let budget = 200 * dim;
    let mut evals = 0usize;
    let mut step = 0.1_f64;
    'outer: while evals < budget {
        let mut improved = false;
        for idx in 0..dim {
            for delta in [
                Complex64::new(step, 0.0),
                Complex64::new(-step, 0.0),
                Complex64::new(0.0, step),
                Complex64::new(0.0, -step),
            ] {
                let mut trial = x.clone();
                trial[idx] += delta;
                let n = vec_norm(&trial);
                for c in trial.iter_mut() {
                    *c /= n;
                }
                let v = cost(&trial);
                evals += 1;
                if v < best {
                    best = v;
                    x = trial;
                    improved = true;
                }
                if evals >= budget {
                    break 'outer;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 {
                break;
            }
        }
    }
    let mut kernel = TruncatedKernel::new(a.k, order, x)?;
    kernel.fix_phase();
    // Report the L2-equivalent magnitude of the found minimizer for
    // comparability across modes: sigma = ||B g||.
    let sigma = vec_norm(&b.matvec(&kernel.coeffs));
    Ok(IndicatorOutcome { sigma, kernel, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorMode {
    /// Exact L2 minimizer via SVD (default).
    SmallestSingular,
    /// Paper-style L1 cost with coordinate descent, seeded from the L2 route.
    CoordinateDescentL1,
}

/// Truncation-order range for the frequency scan.
///
/// The far-field operator of a scatterer inside a ball of radius r (anywhere
/// in the plane) has numerical rank ~ 2 k r, so restrictions beyond that are
/// rank-deficient and sigma_min reads solver noise; meaningful dips appear
/// at orders up to about k r plus a small margin. Different eigenfunctions
/// cancel in different harmonic sectors (e.g. the square's first
/// eigenfunction needs modes {0, +-4}), so the scan sweeps every order in
/// [1, ceil(k r) + extra] and detects dips per constant-order curve.
#[derive(Debug, Clone, Copy)]
pub struct NRule {
    /// Prior radius of a ball (any center) enclosing the scatterer.
    pub size_estimate: f64,
    /// Orders swept above ceil(k r).
    pub extra_orders: usize,
    /// Hard override of the maximum order.
    pub override_max: Option<usize>,
}

impl NRule {
    pub fn new(size_estimate: f64) -> Self {
        NRule { size_estimate, extra_orders: 3, override_max: None }
    }

    /// Largest order swept at wavenumber k, honoring the unisolvency caps of
    /// the angle grids.
    pub fn max_order_for(&self, k: f64, obs_count: usize, inc_count: usize) -> usize {
        let raw = self
            .override_max
            .unwrap_or_else(|| (k * self.size_estimate).ceil() as usize + self.extra_orders)
            .max(1);
        let cap_obs = (obs_count - 1) / 2;
        let cap_inc = (inc_count - 2) / 2;
        raw.min(cap_obs).min(cap_inc)
    }
}

#[derive(Debug, Clone)]
pub struct IndicatorPoint {
    pub k: f64,
    pub sigma: f64,
    pub kernel: TruncatedKernel,
}

/// sigma_min(k) at one fixed truncation order, over the part of the window
/// where that order is within the sweep range.
#[derive(Debug, Clone)]
pub struct OrderCurve {
    pub order: usize,
    pub points: Vec<IndicatorPoint>,
    pub median: f64,
}

#[derive(Debug, Clone)]
pub struct IndicatorCurve {
    pub per_order: Vec<OrderCurve>,
}

impl IndicatorCurve {
    /// Scale-free aggregate for plotting: at each k, the minimum over orders
    /// of sigma_N(k) / median_N.
    pub fn aggregate(&self) -> Vec<(f64, f64)> {
        let mut map: std::collections::BTreeMap<u64, (f64, f64)> = std::collections::BTreeMap::new();
        for curve in &self.per_order {
            for p in &curve.points {
                let key = p.k.to_bits();
                let v = p.sigma / curve.median.max(1e-300);
                map.entry(key)
                    .and_modify(|e| {
                        if v < e.1 {
                            e.1 = v;
                        }
                    })
                    .or_insert((p.k, v));
            }
        }
        map.into_values().collect()
    }
}

#[derive(Debug, Clone)]
pub struct EigenDetection {
    pub k_star: f64,
    pub sigma: f64,
    /// sigma at the dip relative to the median of its order curve.
    pub dip_depth: f64,
    /// Truncation order of the curve the dip was found on.
    pub order: usize,
    pub kernel: TruncatedKernel,
    /// Bracket around the dip (neighboring scan points), for refinement.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub n_rule: NRule,
    /// A dip counts as a detection when sigma(k*) / median < this.
    pub dip_threshold: f64,
    /// Looser gate applied to raw grid minima before refinement; grid
    /// sampling rarely lands on the bottom of a dip.
    pub pre_threshold: f64,
    /// Order curves whose median falls below this fraction of the largest
    /// curve median are rank-deficient noise and are dropped.
    pub degenerate_floor: f64,
    pub mode: IndicatorMode,
    /// Parabolic refinement of each dip location through its neighbors.
    pub parabolic_refine: bool,
}

impl ScanOptions {
    pub fn new(n_rule: NRule) -> Self {
        ScanOptions {
            n_rule,
            dip_threshold: 0.1,
            pre_threshold: 0.5,
            degenerate_floor: 1e-8,
            mode: IndicatorMode::SmallestSingular,
            parabolic_refine: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub curve: IndicatorCurve,
    /// Dips passing `dip_threshold` straight off the grid samples.
    pub detections: Vec<EigenDetection>,
    /// Dips passing only `pre_threshold`; candidates for refinement.
    pub candidates: Vec<EigenDetection>,
}

/// Sweeps the indicator over an archive of far-field matrices (sorted by k)
/// at every truncation order the rule allows, and detects dips per
/// constant-order curve against that curve's median. An empty detection
/// list is a valid outcome: the window may contain no eigenvalue.
pub fn scan(matrices: &[FarFieldMatrix], opts: &ScanOptions) -> Result<ScanOutcome> {
    if matrices.len() < 3 {
        return Err(Error::config("scan needs at least 3 wavenumber samples"));
    }
    for w in matrices.windows(2) {
        if w[1].k <= w[0].k {
            return Err(Error::config("scan matrices must be sorted by strictly increasing k"));
        }
    }
    let width = matrices.last().unwrap().k - matrices[0].k;
    let max_step = matrices
        .windows(2)
        .map(|w| w[1].k - w[0].k)
        .fold(0.0_f64, f64::max);
    // 1% of the window width, never stricter than the absolute default 0.01.
    if max_step > (0.0101 * width).max(0.0101) {
        return Err(Error::config(format!(
            "scan step {max_step:.4} exceeds 1% of the window width {width:.4}"
        )));
    }

    let global_max = matrices
        .iter()
        .map(|a| opts.n_rule.max_order_for(a.k, a.obs_count, a.inc_count))
        .max()
        .unwrap();

    let mut per_order = Vec::new();
    for order in 1..=global_max {
        let mut points = Vec::new();
        for a in matrices {
            if order > opts.n_rule.max_order_for(a.k, a.obs_count, a.inc_count) {
                continue;
            }
            let out = match opts.mode {
                IndicatorMode::SmallestSingular => indicator(a, order)?,
                IndicatorMode::CoordinateDescentL1 => indicator_l1(a, order)?,
            };
            points.push(IndicatorPoint { k: a.k, sigma: out.sigma, kernel: out.kernel });
        }
        if points.is_empty() {
            continue;
        }
        let mut sigmas: Vec<f64> = points.iter().map(|p| p.sigma).collect();
        sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sigmas[sigmas.len() / 2];
        per_order.push(OrderCurve { order, points, median });
    }

    let max_median = per_order.iter().map(|c| c.median).fold(0.0_f64, f64::max);
    let mut detections: Vec<EigenDetection> = Vec::new();
    let mut candidates: Vec<EigenDetection> = Vec::new();
    for curve in &per_order {
        if curve.points.len() < 3 || curve.median < opts.degenerate_floor * max_median {
            continue;
        }
        let median = curve.median.max(1e-300);
        for i in 1..curve.points.len() - 1 {
            let (prev, cur, next) = (&curve.points[i - 1], &curve.points[i], &curve.points[i + 1]);
            if !(cur.sigma < prev.sigma && cur.sigma < next.sigma) {
                continue;
            }
            let dip_depth = cur.sigma / median;
            if dip_depth >= opts.pre_threshold {
                continue;
            }
            let k_star = if opts.parabolic_refine {
                parabolic_vertex(
                    (prev.k, prev.sigma.max(1e-300).ln()),
                    (cur.k, cur.sigma.max(1e-300).ln()),
                    (next.k, next.sigma.max(1e-300).ln()),
                )
                .unwrap_or(cur.k)
            } else {
                cur.k
            };
            let det = EigenDetection {
                k_star,
                sigma: cur.sigma,
                dip_depth,
                order: curve.order,
                kernel: cur.kernel.clone(),
                bracket: (prev.k, next.k),
            };
            if dip_depth < opts.dip_threshold {
                merge_detection(&mut detections, det, max_step);
            } else {
                merge_detection(&mut candidates, det, max_step);
            }
        }
    }
    // A dip promoted to a detection on one curve supersedes candidate echoes
    // of the same eigenvalue on other curves.
    candidates.retain(|c| {
        detections.iter().all(|d| (d.k_star - c.k_star).abs() > 2.0 * max_step)
    });
    detections.sort_by(|a, b| a.k_star.partial_cmp(&b.k_star).unwrap());
    candidates.sort_by(|a, b| a.k_star.partial_cmp(&b.k_star).unwrap());
    Ok(ScanOutcome { curve: IndicatorCurve { per_order }, detections, candidates })
}

/// Keeps the deepest of detections within two grid steps of each other.
fn merge_detection(list: &mut Vec<EigenDetection>, det: EigenDetection, step: f64) {
    if let Some(existing) = list.iter_mut().find(|d| (d.k_star - det.k_star).abs() <= 2.0 * step) {
        if det.dip_depth < existing.dip_depth {
            *existing = det;
        }
    } else {
        list.push(det);
    }
}

/// Golden-section refinement of scan dips against a live sigma evaluator
/// (typically synthesize + indicator at probe wavenumbers) on the dip's own
/// order curve. Re-applies the dip threshold to the refined minimum.
pub fn refine_detections(
    outcome: &ScanOutcome,
    opts: &ScanOptions,
    tol_k: f64,
    eval: &mut dyn FnMut(f64, usize) -> Result<IndicatorOutcome>,
) -> Result<Vec<EigenDetection>> {
    let mut refined: Vec<EigenDetection> = Vec::new();
    for det in outcome.detections.iter().chain(&outcome.candidates) {
        let median = det.sigma / det.dip_depth.max(1e-300);
        let mut best: Option<(f64, IndicatorOutcome)> = None;
        let mut best_k = det.k_star;
        let mut probe = |k: f64| -> Result<f64> {
            let out = eval(k, det.order)?;
            let sigma = out.sigma;
            if best.as_ref().map(|(s, _)| sigma < *s).unwrap_or(true) {
                best = Some((sigma, out));
                best_k = k;
            }
            Ok(sigma)
        };
        let k_mid = refine_dip_golden(&mut probe, det.bracket, tol_k)?;
        let (sigma, out) = best.expect("golden section evaluates at least twice");
        let k_star = if sigma < det.sigma { best_k } else { det.k_star };
        let _ = k_mid;
        let dip_depth = sigma.min(det.sigma) / median;
        if dip_depth < opts.dip_threshold {
            let width = det.bracket.1 - det.bracket.0;
            let improved = EigenDetection {
                k_star,
                sigma: sigma.min(det.sigma),
                dip_depth,
                order: det.order,
                kernel: if sigma < det.sigma { out.kernel } else { det.kernel.clone() },
                bracket: det.bracket,
            };
            merge_detection(&mut refined, improved, width);
        }
    }
    refined.sort_by(|a, b| a.k_star.partial_cmp(&b.k_star).unwrap());
    Ok(refined)
}

/// Vertex of the parabola through three points (minimum only).
fn parabolic_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let (x1, y1) = a;
    let (x2, y2) = b;
    let (x3, y3) = c;
    let denom = (x1 - x2) * (y2 - y3) - (x2 - x3) * (y1 - y2);
    if denom.abs() < 1e-300 {
        return None;
    }
    let num = (x1 - x2) * (x1 + x2) * (y2 - y3) - (x2 - x3) * (x2 + x3) * (y1 - y2);
    let x_star = 0.5 * num / denom;
    if x_star.is_finite() && x_star > x1 && x_star < x3 {
        Some(x_star)
    } else {
        None
    }
}

/// Golden-section refinement of a dip on the bracket, evaluating
/// sigma(k) through the provided (usually synthesize+indicator) closure.
pub fn refine_dip_golden(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    bracket: (f64, f64),
    tol_k: f64,
) -> Result<f64> {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = bracket;
    if !(b > a) {
        return Err(Error::config("invalid refinement bracket"));
    }
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol_k {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Adds seeded complex Gaussian noise with per-entry standard deviation
/// eps * ||A||_F / sqrt(m n).
pub fn add_noise(a: &mut FarFieldMatrix, eps: f64, seed: u64) {
    if eps <= 0.0 {
        return;
    }
    let scale = eps * a.frobenius_norm() / ((a.obs_count * a.inc_count) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for e in a.entries.iter_mut() {
        // Box-Muller from uniform draws, variance split across re/im.
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt() / 2.0_f64.sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        *e += Complex64::new(scale * r * c, scale * r * s);
    }
}
