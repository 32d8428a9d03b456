//! Acceptance suite: every release gate in one sequential run, one PASS/FAIL
//! line per criterion (run with --nocapture to watch progress). Heavy
//! fixtures share synthesized archives; the whole suite is deterministic.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::Instant;

use cuspscan_core::forward::{
    far_field_many, relative_l2, solve_total_field, synthesize_matrix, FarFieldMatrix,
    PlaneWave, SolverOptions,
};
use cuspscan_core::geometry::{builtin_corners, builtin_medium, BBox, Grid, MediumSpec, Point2};
use cuspscan_core::linalg::vec_norm;
use cuspscan_core::oracle::{bound_window, disk_transmission_eigs, MieSolution};
use cuspscan_core::reconstruct::{
    detect_cusps, helmholtz_residual, herglotz_eval, herglotz_eval_quadrature, herglotz_raw,
    polygon_from_cusps, CuspParams, CuspReport, DetectMode,
};
use cuspscan_core::spectral::{
    apply_truncated, indicator, refine_detections, scan, EigenDetection, NRule, ScanOptions,
    TruncatedKernel,
};

struct Suite {
    results: Vec<(String, Result<String, String>)>,
    /// Worst reciprocity defect over every synthesized matrix with matched
    /// angle grids (criterion 2).
    worst_reciprocity: f64,
    /// (medium name, accepted detections) per scanned fixture (criterion 12).
    detections: Vec<(String, Vec<f64>)>,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Result<String, String>) {
        match &outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => println!("FAIL {name}: {detail}"),
        }
        self.results.push((name.to_string(), outcome));
    }
}

struct Fixture {
    name: &'static str,
    medium: MediumSpec,
    grid: Grid,
    angles: usize,
    solver: SolverOptions,
    scan_opts: ScanOptions,
}

impl Fixture {
    fn new(name: &'static str, n: f64, resolution: usize, angles: usize) -> Self {
        let medium = builtin_medium(name, n).unwrap();
        let grid = Grid::covering(&medium.geometry, 0.15, resolution).unwrap();
        let rule = NRule::new(medium.geometry.enclosing_ball_radius());
        Fixture {
            name,
            medium,
            grid,
            angles,
            solver: SolverOptions::default(),
            scan_opts: ScanOptions::new(rule),
        }
    }

    fn synthesize(&self, k: f64) -> FarFieldMatrix {
        synthesize_matrix(&self.medium, &self.grid, k, self.angles, self.angles, &self.solver)
            .unwrap_or_else(|e| panic!("{}: synthesis failed at k = {k}: {e}", self.name))
    }

    fn synthesize_window(&self, lo: f64, hi: f64, h: f64, suite: &mut Suite) -> Vec<FarFieldMatrix> {
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let k = lo + h * i as f64;
            if k > hi + 1e-9 {
                break;
            }
            let m = self.synthesize(k);
            suite.worst_reciprocity = suite.worst_reciprocity.max(m.reciprocity_defect().unwrap());
            out.push(m);
            i += 1;
        }
        out
    }

    fn scan_and_refine(&self, mats: &[FarFieldMatrix], tol_k: f64) -> Vec<EigenDetection> {
        let outcome = scan(mats, &self.scan_opts).expect("scan failed");
        refine_detections(&outcome, &self.scan_opts, tol_k, &mut |k, order| {
            indicator(&self.synthesize(k), order)
        })
        .expect("refinement failed")
    }

    /// Minimizing kernel at an explicit truncation order (reconstruction may
    /// want more harmonics than the detecting curve used).
    fn kernel_at(&self, k: f64, order: usize) -> TruncatedKernel {
        indicator(&self.synthesize(k), order).unwrap().kernel
    }
}

fn reconstruct_at(
    kernel: &TruncatedKernel,
    bbox: BBox,
    resolution: usize,
    mode: DetectMode,
) -> CuspReport {
    let grid = Grid::new(bbox, resolution).unwrap();
    let field = herglotz_eval(kernel, &grid).unwrap();
    detect_cusps(&field, mode, &CuspParams::default()).unwrap()
}

fn nearest_detection(dets: &[EigenDetection], k: f64) -> Option<&EigenDetection> {
    dets.iter().min_by(|a, b| {
        (a.k_star - k).abs().partial_cmp(&(b.k_star - k).abs()).unwrap()
    })
}

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn criterion_1(suite: &mut Suite) {
    let t = Instant::now();
    let run = || -> Result<String, String> {
        let medium = builtin_medium("disk", 4.0).unwrap();
        let grid = Grid::new(BBox { xmin: -1.5, xmax: 1.5, ymin: -1.5, ymax: 1.5 }, 256).unwrap();
        let opts = SolverOptions { tol: 1e-9, ..Default::default() };
        let angles: Vec<f64> = (0..64).map(|i| 2.0 * PI * i as f64 / 64.0).collect();
        let mut detail = String::new();
        for (k, tol_field) in [(1.0, 1e-3), (4.0, 5e-3)] {
            let wave = PlaneWave::new(k, 0.0).unwrap();
            let total = solve_total_field(&medium, &grid, wave, &opts).map_err(|e| e.to_string())?;
            let mie = MieSolution::new(k, 4.0, 1.0).unwrap();
            let reference: Vec<Complex64> = (0..grid.resolution)
                .flat_map(|iy| {
                    let (mie, grid) = (&mie, &grid);
                    (0..grid.resolution)
                        .map(move |ix| mie.total_field(grid.cell_center(ix, iy), 0.0))
                })
                .collect();
            let field_err = relative_l2(&total.values, &reference);
            check(field_err <= tol_field, format!("total field at k={k}: {field_err:.2e} > {tol_field:.0e}"))?;
            let got = far_field_many(&total, &medium, &angles).map_err(|e| e.to_string())?;
            let want: Vec<Complex64> = angles.iter().map(|&a| mie.far_field(a, 0.0)).collect();
            let ff_err = relative_l2(&got, &want);
            check(ff_err <= 1e-3, format!("far field at k={k}: {ff_err:.2e} > 1e-3"))?;
            detail.push_str(&format!("k={k}: field {field_err:.1e}, far-field {ff_err:.1e}; "));
        }
        let secs = t.elapsed().as_secs_f64();
        check(secs <= 60.0, format!("runtime {secs:.0}s > 60s"))?;
        Ok(format!("{detail}runtime {secs:.0}s"))
    };
    suite.record("criterion 1 (forward vs Mie oracle)", run());
}

fn criterion_3(suite: &mut Suite) {
    let run = || -> Result<String, String> {
        let fix = Fixture::new("square", 16.0, 96, 64);
        let a = fix.synthesize(1.0);
        let r = 2.0_f64.sqrt();
        let n_star = (std::f64::consts::E * 1.0 * r / 2.0).ceil() as usize + 10;
        let n_ref = 2 * n_star;
        check(
            a.inc_count >= 2 * n_ref + 2,
            format!("n_inc too small for reference order {n_ref}"),
        )?;
        // 20 deterministic pseudo-random unit kernels over modes <= n_ref.
        let mut state = 0x853c49e6748fea9b_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut worst_at_rule = 0.0_f64;
        let mut worst_ratio = 0.0_f64;
        for _ in 0..20 {
            let coeffs: Vec<Complex64> =
                (0..2 * n_ref + 1).map(|_| Complex64::new(next(), next())).collect();
            let g_ref = TruncatedKernel::new(1.0, n_ref, coeffs).unwrap();
            let full = apply_truncated(&a, &g_ref).unwrap();
            let full_norm = vec_norm(&full);
            let err_at = |n: usize| -> f64 {
                let sub: Vec<Complex64> =
                    (0..2 * n + 1).map(|i| g_ref.coeff(i as i32 - n as i32)).collect();
                let scale = vec_norm(&sub);
                let g_n = TruncatedKernel::new(1.0, n, sub).unwrap();
                let part = apply_truncated(&a, &g_n).unwrap();
                let diff: Vec<Complex64> =
                    full.iter().zip(&part).map(|(f, p)| f - p * scale).collect();
                vec_norm(&diff) / full_norm
            };
            let e0 = err_at(n_star);
            worst_at_rule = worst_at_rule.max(e0);
            let mut prev = e0;
            for n in n_star + 1..n_star + 5 {
                let e = err_at(n);
                if prev >= 1e-13 {
                    worst_ratio = worst_ratio.max(e / prev);
                }
                prev = e;
            }
        }
        check(
            worst_at_rule < 1e-6,
            format!("truncation error {worst_at_rule:.2e} at N = {n_star} exceeds 1e-6"),
        )?;
        check(worst_ratio <= 0.5, format!("successive-N ratio {worst_ratio:.2} > 0.5"))?;
        Ok(format!("err(N={n_star}) <= {worst_at_rule:.1e}, worst ratio {worst_ratio:.2}"))
    };
    suite.record("criterion 3 (truncation decay)", run());
}

fn criterion_4(suite: &mut Suite) {
    let t = Instant::now();
    let run = |suite: &mut Suite| -> Result<String, String> {
        let fix = Fixture::new("disk", 16.0, 64, 64);
        let eigs = disk_transmission_eigs(16.0, 1.0, 0.5, 1.45).unwrap();
        let (k1, k2) = (eigs[0].k, eigs[1].k);
        let mats = fix.synthesize_window(0.92, 1.38, 0.005, suite);
        let outcome = scan(&mats, &fix.scan_opts).map_err(|e| e.to_string())?;
        // Local minima within 0.01 of each oracle eigenvalue on some curve.
        for target in [k1, k2] {
            let found = outcome.curve.per_order.iter().any(|curve| {
                curve.points.windows(3).any(|w| {
                    w[1].sigma < w[0].sigma
                        && w[1].sigma < w[2].sigma
                        && (w[1].k - target).abs() <= 0.01
                })
            });
            check(found, format!("no local minimum within 0.01 of oracle eigenvalue {target:.4}"))?;
        }
        let refined = refine_detections(&outcome, &fix.scan_opts, 1e-3, &mut |k, order| {
            indicator(&fix.synthesize(k), order)
        })
        .map_err(|e| e.to_string())?;
        for target in [k1, k2] {
            let d = nearest_detection(&refined, target)
                .ok_or_else(|| "no refined detections".to_string())?;
            check(
                (d.k_star - target).abs() <= 0.01,
                format!("refined detection {:.4} not within 0.01 of {target:.4}", d.k_star),
            )?;
        }
        // Floor: on each detecting curve, sigma at >= 0.1 from every
        // eigenvalue stays >= 5x the refined dip.
        for d in &refined {
            let curve = outcome
                .curve
                .per_order
                .iter()
                .find(|c| c.order == d.order)
                .ok_or_else(|| "detection order missing from curve".to_string())?;
            for p in &curve.points {
                if eigs.iter().all(|e| (p.k - e.k).abs() >= 0.1) {
                    check(
                        p.sigma >= 5.0 * d.sigma,
                        format!(
                            "floor {:.2e} at k={:.3} (order {}) < 5x dip {:.2e}",
                            p.sigma, p.k, d.order, d.sigma
                        ),
                    )?;
                }
            }
        }
        suite
            .detections
            .push(("disk".into(), refined.iter().map(|d| d.k_star).collect()));
        let secs = t.elapsed().as_secs_f64();
        check(secs <= 600.0, format!("runtime {secs:.0}s > 600s"))?;
        Ok(format!(
            "dips at {:?} vs oracle [{k1:.4}, {k2:.4}], runtime {secs:.0}s",
            refined.iter().map(|d| (d.k_star * 1e4).round() / 1e4).collect::<Vec<_>>()
        ))
    };
    let outcome = run(suite);
    suite.record("criterion 4 (disk dip/floor calibration)", outcome);
}

fn criteria_5_and_7(suite: &mut Suite) {
    let fix = Fixture::new("square", 16.0, 96, 64);
    let mats = fix.synthesize_window(0.5, 2.0, 0.01, suite);
    let refined = fix.scan_and_refine(&mats, 1e-3);
    suite
        .detections
        .push(("square".into(), refined.iter().map(|d| d.k_star).collect()));

    let c5 = || -> Result<String, String> {
        let d1 = nearest_detection(&refined, 0.94).ok_or("no detections")?;
        check(
            (d1.k_star - 0.94).abs() <= 0.02,
            format!("first detection {:.4} not within 0.02 of 0.94", d1.k_star),
        )?;
        let d2 = nearest_detection(&refined, 1.22).ok_or("no detections")?;
        check(
            (d2.k_star - 1.22).abs() <= 0.03,
            format!("second detection {:.4} not within 0.03 of 1.22", d2.k_star),
        )?;
        Ok(format!("detections at {:.4} and {:.4}", d1.k_star, d2.k_star))
    };
    suite.record("criterion 5 (square eigenvalue regression)", c5());

    let c7 = || -> Result<String, String> {
        let d1 = nearest_detection(&refined, 0.94).ok_or("no detections")?;
        // Reconstruction kernel: richest non-degenerate order at the dip.
        let kernel = fix.kernel_at(d1.k_star, 8);
        let report = reconstruct_at(
            &kernel,
            BBox { xmin: -4.0, xmax: 4.0, ymin: -4.0, ymax: 4.0 },
            257,
            DetectMode::Vanishing,
        );
        let corners = builtin_corners("square");
        check(
            report.vanishing.len() == 4,
            format!("expected exactly 4 vanishing clusters, got {}", report.vanishing.len()),
        )?;
        for c in &corners {
            let ok = report
                .vanishing
                .iter()
                .any(|cl| cl.representative.dist(*c) <= 0.2);
            check(ok, format!("no representative within 0.2 of corner ({}, {})", c.x, c.y))?;
        }
        let hull = polygon_from_cusps(&report).map_err(|e| e.to_string())?;
        check(hull.len() == 4, format!("hull has {} vertices, expected 4", hull.len()))?;
        let reps: Vec<String> = report
            .vanishing
            .iter()
            .map(|c| format!("({:.2},{:.2})", c.representative.x, c.representative.y))
            .collect();
        Ok(format!("4 corners at {}", reps.join(" ")))
    };
    suite.record("criterion 7 (square corner recovery)", c7());
}

fn criteria_6_and_8(suite: &mut Suite) {
    let fix = Fixture::new("hexagon", 25.0, 96, 64);
    let mats = fix.synthesize_window(0.2, 1.0, 0.01, suite);
    let refined = fix.scan_and_refine(&mats, 1e-3);
    suite
        .detections
        .push(("hexagon".into(), refined.iter().map(|d| d.k_star).collect()));

    let c6 = || -> Result<String, String> {
        let d = nearest_detection(&refined, 0.44).ok_or("no detections")?;
        check(
            (d.k_star - 0.44).abs() <= 0.02,
            format!("detection {:.4} not within 0.02 of 0.44", d.k_star),
        )?;
        Ok(format!("detection at {:.4}", d.k_star))
    };
    suite.record("criterion 6 (hexagon eigenvalue regression)", c6());

    let c8 = || -> Result<String, String> {
        let d = nearest_detection(&refined, 0.44).ok_or("no detections")?;
        let kernel = fix.kernel_at(d.k_star, 7);
        let report = reconstruct_at(
            &kernel,
            BBox { xmin: -4.0, xmax: 4.0, ymin: -4.0, ymax: 4.0 },
            257,
            DetectMode::Vanishing,
        );
        let corners = builtin_corners("hexagon");
        let mut matched = 0;
        for c in &corners {
            if report.vanishing.iter().any(|cl| cl.representative.dist(*c) <= 0.35) {
                matched += 1;
            }
        }
        check(
            matched == 6,
            format!(
                "{matched}/6 vertices matched within 0.35; representatives: {:?}",
                report
                    .vanishing
                    .iter()
                    .map(|c| ((c.representative.x * 100.0).round() / 100.0,
                              (c.representative.y * 100.0).round() / 100.0))
                    .collect::<Vec<_>>()
            ),
        )?;
        Ok(format!("all 6 vertices matched ({} clusters)", report.vanishing.len()))
    };
    suite.record("criterion 8 (hexagon corner recovery)", c8());
}

fn criterion_9(suite: &mut Suite) {
    let t = Instant::now();
    let run = |suite: &mut Suite| -> Result<String, String> {
        let fix = Fixture::new("rain_small", 4.0, 96, 64);
        let mats = fix.synthesize_window(30.0, 35.0, 0.05, suite);
        let refined = fix.scan_and_refine(&mats, 5e-3);
        suite
            .detections
            .push(("rain_small".into(), refined.iter().map(|d| d.k_star).collect()));
        let d = nearest_detection(&refined, 32.14).ok_or("no detections")?;
        check(
            (d.k_star - 32.14).abs() <= 0.1,
            format!("detection {:.4} not within 0.1 of 32.14", d.k_star),
        )?;
        let kernel = fix.kernel_at(d.k_star, 9);
        let report = reconstruct_at(
            &kernel,
            BBox { xmin: -0.5, xmax: 0.5, ymin: -0.5, ymax: 0.5 },
            257,
            DetectMode::Vanishing,
        );
        let corner = Point2::new(0.0, 0.0);
        let best = report
            .vanishing
            .iter()
            .map(|c| c.representative.dist(corner))
            .fold(f64::INFINITY, f64::min);
        check(
            best <= 0.1,
            format!("nearest vanishing representative {best:.3} from (0,0), need <= 0.1"),
        )?;
        let secs = t.elapsed().as_secs_f64();
        check(secs <= 2700.0, format!("runtime {secs:.0}s > 2700s"))?;
        Ok(format!(
            "detection at {:.3}, corner representative within {best:.3}, runtime {secs:.0}s",
            d.k_star
        ))
    };
    let outcome = run(suite);
    suite.record("criterion 9 (rain drop, small)", outcome);
}

fn criterion_10(suite: &mut Suite) {
    let run = |suite: &mut Suite| -> Result<String, String> {
        let fix = Fixture::new("rain_regular", 4.0, 96, 64);
        let mats = fix.synthesize_window(5.0, 7.0, 0.01, suite);
        let refined = fix.scan_and_refine(&mats, 1e-3);
        suite
            .detections
            .push(("rain_regular".into(), refined.iter().map(|d| d.k_star).collect()));
        let d = nearest_detection(&refined, 6.43).ok_or("no detections")?;
        check(
            (d.k_star - 6.43).abs() <= 0.05,
            format!("detection {:.4} not within 0.05 of 6.43", d.k_star),
        )?;
        let kernel = fix.kernel_at(d.k_star, 8);
        let report = reconstruct_at(
            &kernel,
            BBox { xmin: 0.5, xmax: 4.5, ymin: 1.0, ymax: 5.0 },
            513,
            DetectMode::Vanishing,
        );
        let corner = Point2::new(2.0, 3.0);
        let best = report
            .vanishing
            .iter()
            .map(|c| c.representative.dist(corner))
            .fold(f64::INFINITY, f64::min);
        check(
            best <= 0.35,
            format!("nearest vanishing representative {best:.3} from (2,3), need <= 0.35"),
        )?;
        Ok(format!("detection at {:.3}, corner representative within {best:.3}", d.k_star))
    };
    let outcome = run(suite);
    suite.record("criterion 10 (rain drop, regular)", outcome);
}

fn criterion_11(suite: &mut Suite) {
    let run = |suite: &mut Suite| -> Result<String, String> {
        let fix = Fixture::new("heart", 16.0, 96, 64);
        let mats = fix.synthesize_window(2.0, 3.0, 0.01, suite);
        let refined = fix.scan_and_refine(&mats, 1e-3);
        suite
            .detections
            .push(("heart".into(), refined.iter().map(|d| d.k_star).collect()));
        let listed: Vec<f64> = refined.iter().map(|d| (d.k_star * 1e3).round() / 1e3).collect();
        // Localizing point from the first detected eigenvalue, whatever the
        // k-anchor verdict turns out to be.
        let localizing_detail = if let Some(first) = refined.first() {
            let kernel = fix.kernel_at(first.k_star, 7);
            let report = reconstruct_at(
                &kernel,
                BBox { xmin: -4.0, xmax: 4.0, ymin: -4.0, ymax: 4.0 },
                257,
                DetectMode::Localizing,
            );
            let cusp = Point2::new(-1.0, -0.5);
            let best = report
                .localizing
                .iter()
                .map(|c| c.representative.dist(cusp))
                .fold(f64::INFINITY, f64::min);
            check(
                best <= 0.1,
                format!("nearest localizing representative {best:.3} from (-1,-0.5), need <= 0.1"),
            )?;
            format!("localizing representative within {best:.3} of (-1,-0.5) at k = {:.3}", first.k_star)
        } else {
            return Err("no detections in (2,3)".to_string());
        };
        let d = nearest_detection(&refined, 2.14).ok_or("no detections")?;
        check(
            (d.k_star - 2.14).abs() <= 0.03,
            format!(
                "no detection within 0.03 of 2.14 (found {listed:?}); {localizing_detail}"
            ),
        )?;
        Ok(format!("detection at {:.3}; {localizing_detail}", d.k_star))
    };
    let outcome = run(suite);
    suite.record("criterion 11 (heart, localizing case)", outcome);
}

fn criterion_2(suite: &mut Suite) {
    let defect = suite.worst_reciprocity;
    let outcome = if defect <= 5e-3 {
        Ok(format!("worst reciprocity defect {defect:.2e} <= 5e-3"))
    } else {
        Err(format!("worst reciprocity defect {defect:.2e} > 5e-3"))
    };
    suite.record("criterion 2 (reciprocity)", outcome);
}

fn criterion_12(suite: &mut Suite) {
    let run = || -> Result<String, String> {
        let mut checked = 0usize;
        for (name, ks) in &suite.detections {
            let n = match name.as_str() {
                "disk" | "square" | "heart" => 16.0,
                "hexagon" => 25.0,
                _ => 4.0,
            };
            let medium = builtin_medium(name, n).unwrap();
            let w = bound_window(&medium, 4.0).map_err(|e| e.to_string())?;
            for &k in ks {
                check(
                    k >= w.k_lo - 1e-9,
                    format!("{name}: detected {k:.4} below Theorem bound {:.4}", w.k_lo),
                )?;
                checked += 1;
            }
        }
        check(checked > 0, "no detections recorded".to_string())?;
        Ok(format!("{checked} detections all above their lower bounds"))
    };
    let outcome = run();
    suite.record("criterion 12 (Theorem bound consistency)", outcome);
}

fn criterion_13(suite: &mut Suite) {
    let run = || -> Result<String, String> {
        let k = 2.5;
        let coeffs: Vec<Complex64> = (0..9)
            .map(|i| Complex64::new((i as f64 * 1.3).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let kernel = TruncatedKernel::new(k, 4, coeffs).unwrap();
        let grid = Grid::new(BBox { xmin: -3.0, xmax: 3.0, ymin: -3.0, ymax: 3.0 }, 64).unwrap();
        // Mode expansion vs direct quadrature.
        let a = herglotz_raw(&kernel, &grid);
        let b = herglotz_eval_quadrature(&kernel, &grid, 512).unwrap();
        // Compare raw against re-scaled normalized output.
        let max = a.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        let mut worst = 0.0_f64;
        for (x, y) in a.iter().zip(&b.values) {
            worst = worst.max((x / max - y).norm());
        }
        check(worst <= 1e-8, format!("mode expansion vs quadrature {worst:.2e} > 1e-8"))?;

        // Helmholtz residual order >= 1.8.
        let mut residuals = Vec::new();
        for res in [64usize, 128, 256] {
            let g = Grid::new(BBox { xmin: -2.0, xmax: 2.0, ymin: -2.0, ymax: 2.0 }, res).unwrap();
            residuals.push(helmholtz_residual(&herglotz_eval(&kernel, &g).unwrap()));
        }
        let o1 = (residuals[0] / residuals[1]).log2();
        let o2 = (residuals[1] / residuals[2]).log2();
        check(
            o1 >= 1.8 && o2 >= 1.8,
            format!("Helmholtz residual orders {o1:.2}, {o2:.2} < 1.8"),
        )?;

        // Rotation equivariance to 1e-10.
        let alpha = 0.61;
        let rotated: Vec<Complex64> = (0..9)
            .map(|i| {
                let n = i as i32 - 4;
                kernel.coeffs[i] * Complex64::from_polar(1.0, n as f64 * alpha)
            })
            .collect();
        let kr = TruncatedKernel::new(k, 4, rotated).unwrap();
        let eval = |kern: &TruncatedKernel, r: f64, th: f64| {
            let j = cuspscan_core::specfun::bessel_j_array(kern.order, kern.k * r);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in -(kern.order as i32)..=(kern.order as i32) {
                let jn = if n < 0 && n % 2 != 0 {
                    -j[n.unsigned_abs() as usize]
                } else {
                    j[n.unsigned_abs() as usize]
                };
                acc += kern.coeff(n)
                    * Complex64::i().powi(n)
                    * jn
                    * Complex64::from_polar(1.0, n as f64 * th);
            }
            acc
        };
        let mut worst_rot = 0.0_f64;
        for (r, th) in [(0.4, 0.2), (1.5, 1.9), (2.7, -2.4)] {
            let d = (eval(&kr, r, th) - eval(&kernel, r, th + alpha)).norm();
            worst_rot = worst_rot.max(d);
        }
        check(worst_rot <= 1e-10, format!("rotation equivariance defect {worst_rot:.2e}"))?;
        Ok(format!(
            "quadrature {worst:.1e}, residual orders {o1:.2}/{o2:.2}, rotation {worst_rot:.1e}"
        ))
    };
    suite.record("criterion 13 (Herglotz property suite)", run());
}

#[test]
fn acceptance() {
    let t0 = Instant::now();
    let mut suite = Suite { results: vec![], worst_reciprocity: 0.0, detections: vec![] };

    criterion_1(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criteria_5_and_7(&mut suite);
    criteria_6_and_8(&mut suite);
    criterion_9(&mut suite);
    criterion_10(&mut suite);
    criterion_11(&mut suite);
    criterion_2(&mut suite);
    criterion_12(&mut suite);
    criterion_13(&mut suite);

    println!("acceptance suite wall time: {:.0}s", t0.elapsed().as_secs_f64());
    let failures: Vec<String> = suite
        .results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    assert!(
        failures.is_empty(),
        "{} criterion(s) failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
