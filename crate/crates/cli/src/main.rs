//! End-to-end pipeline driver: synthesize far-field archives, scan the
//! frequency window for transmission-eigenvalue dips, and reconstruct cusp
//! locations from the recovered Herglotz kernels.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cuspscan_core::error::{Error, Result};
use cuspscan_core::forward::{synthesize_matrix, FarFieldMatrix, SolverOptions};
use cuspscan_core::geometry::{BBox, Grid, MediumSpec};
use cuspscan_core::oracle;
use cuspscan_core::reconstruct::{
    detect_cusps, herglotz_eval, polygon_from_cusps, CuspParams, DetectMode,
};
use cuspscan_core::spectral::{
    add_noise, indicator, indicator_l1, refine_detections, scan, EigenDetection, IndicatorMode,
    NRule, ScanOptions, ScanOutcome,
};

use cuspscan_cli::archive::FarFieldArchive;
use cuspscan_cli::config::{DetectModeConfig, IndicatorModeConfig, MediumConfig, RefineMethod, RunConfig, WindowConfig};
use cuspscan_cli::report::{
    cusp_report_json, write_field_csv, write_indicator_csv, write_json, DetectionJson,
    DetectionsFile,
};

#[derive(Parser)]
#[command(name = "cuspscan", about = "Corner recovery from acoustic far-field data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<String>,
    /// Builtin medium name (rain_small, rain_regular, heart, square, hexagon, disk).
    #[arg(long)]
    medium: Option<String>,
    /// Refractive index of the medium.
    #[arg(long)]
    n: Option<f64>,
    /// Scan window, two values: lo hi.
    #[arg(long, num_args = 2)]
    window: Option<Vec<f64>>,
    /// Scan step h.
    #[arg(long)]
    step: Option<f64>,
    /// Solver grid resolution (cells per axis).
    #[arg(long)]
    resolution: Option<usize>,
    /// Observation angle count m.
    #[arg(long)]
    obs: Option<usize>,
    /// Incident angle count n_inc.
    #[arg(long)]
    inc: Option<usize>,
    /// GMRES relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Additive relative noise level on far-field entries.
    #[arg(long)]
    noise: Option<f64>,
    /// Noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Prior radius of a ball enclosing the scatterer.
    #[arg(long)]
    size_estimate: Option<f64>,
    /// Herglotz search box: xmin xmax ymin ymax.
    #[arg(long, num_args = 4)]
    search_box: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    output_dir: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(name) = &self.medium {
            let n = self.n.or(cfg.medium.as_ref().map(|m| m.n)).ok_or_else(|| {
                Error::config("--medium requires --n (or a config medium with n)")
            })?;
            cfg.medium = Some(MediumConfig { builtin: Some(name.clone()), polygon: None, n });
        } else if let Some(n) = self.n {
            if let Some(m) = cfg.medium.as_mut() {
                m.n = n;
            }
        }
        if let Some(w) = &self.window {
            cfg.window = Some(WindowConfig { k_lo: w[0], k_hi: w[1] });
        }
        if let Some(v) = self.step {
            cfg.scan_step = v;
        }
        if let Some(v) = self.resolution {
            cfg.grid_resolution = v;
        }
        if let Some(v) = self.obs {
            cfg.obs_count = v;
        }
        if let Some(v) = self.inc {
            cfg.inc_count = v;
        }
        if let Some(v) = self.tol {
            cfg.solver_tol = v;
        }
        if let Some(v) = self.noise {
            cfg.noise_level = v;
        }
        if let Some(v) = self.seed {
            cfg.noise_seed = v;
        }
        if let Some(v) = self.size_estimate {
            cfg.size_estimate = Some(v);
        }
        if let Some(b) = &self.search_box {
            cfg.search_box = [b[0], b[1], b[2], b[3]];
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem over the k-grid and write the archive.
    Synthesize {
        #[command(flatten)]
        common: ConfigArgs,
        /// Archive path; default <output_dir>/archive.json.
        #[arg(long)]
        archive: Option<String>,
    },
    /// Sweep the indicator over an archive and write indicator.csv and
    /// detections.json.
    Scan {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        archive: Option<String>,
    },
    /// Evaluate the Herglotz field of a detection and locate cusps.
    Reconstruct {
        #[command(flatten)]
        common: ConfigArgs,
        /// Detections file; default <output_dir>/detections.json.
        #[arg(long)]
        detections: Option<String>,
        /// Which detection to reconstruct (index into the detections list).
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Disk ground truth utilities.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
    /// synthesize + scan + reconstruct in one run.
    Pipeline {
        #[command(flatten)]
        common: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Real transmission eigenvalues of a disk by per-mode determinant scan.
    DiskEigs {
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Window: lo hi.
        #[arg(long, num_args = 2)]
        window: Vec<f64>,
    },
    /// Theorem-bound search window for a medium.
    Bounds {
        #[command(flatten)]
        common: ConfigArgs,
        /// Upper factor applied to the lower bound.
        #[arg(long, default_value_t = 4.0)]
        factor: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, tag) = match &e {
                Error::Config(_) | Error::Domain(_) => (2, "config"),
                Error::NoConvergence { .. } | Error::IllConditioned { .. } => (3, "solver"),
                Error::Reconstruction(_) => (5, "reconstruction"),
            };
            eprintln!("error[{tag}]: {e}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synthesize { common, archive } => {
            let cfg = common.resolve()?;
            let path = archive_path(&cfg, archive.as_deref())?;
            cmd_synthesize(&cfg, &path)?;
            Ok(())
        }
        Command::Scan { common, archive } => {
            let cfg = common.resolve()?;
            let path = archive_path(&cfg, archive.as_deref())?;
            cmd_scan(&cfg, &path)
        }
        Command::Reconstruct { common, detections, index } => {
            let cfg = common.resolve()?;
            let path = detections
                .map(PathBuf::from)
                .unwrap_or_else(|| Path::new(&cfg.output_dir).join("detections.json"));
            cmd_reconstruct(&cfg, &path, index)
        }
        Command::Oracle { what } => cmd_oracle(what),
        Command::Pipeline { common } => {
            let cfg = common.resolve()?;
            let path = archive_path(&cfg, None)?;
            cmd_synthesize(&cfg, &path)?;
            cmd_scan(&cfg, &path)?;
            let detections = Path::new(&cfg.output_dir).join("detections.json");
            cmd_reconstruct(&cfg, &detections, 0)
        }
    }
}

fn archive_path(cfg: &RunConfig, explicit: Option<&str>) -> Result<PathBuf> {
    let path = match explicit {
        Some(p) => PathBuf::from(p),
        None => Path::new(&cfg.output_dir).join("archive.json"),
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(path)
}

fn ensure_output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.solver_tol, ..Default::default() }
}

fn scan_window(cfg: &RunConfig, medium: &MediumSpec) -> Result<(f64, f64)> {
    match cfg.window {
        Some(w) => {
            if !(w.k_lo > 0.0) || !(w.k_hi > w.k_lo) {
                return Err(Error::config("window must satisfy 0 < k_lo < k_hi"));
            }
            Ok((w.k_lo, w.k_hi))
        }
        None => {
            let w = oracle::bound_window(medium, cfg.window_factor)?;
            Ok((w.k_lo, w.k_hi))
        }
    }
}

fn k_grid(cfg: &RunConfig, medium: &MediumSpec) -> Result<Vec<f64>> {
    let (lo, hi) = scan_window(cfg, medium)?;
    let h = cfg.scan_step;
    if !(h > 0.0) {
        return Err(Error::config("scan step must be positive"));
    }
    let mut ks = Vec::new();
    let mut i = 0usize;
    loop {
        let k = lo + h * i as f64;
        if k > hi + 1e-9 {
            break;
        }
        ks.push(k);
        i += 1;
    }
    if ks.is_empty() {
        return Err(Error::config("empty k grid"));
    }
    Ok(ks)
}

fn solver_grid(cfg: &RunConfig, medium: &MediumSpec) -> Result<Grid> {
    Grid::covering(&medium.geometry, cfg.grid_margin, cfg.grid_resolution)
}

fn cmd_synthesize(cfg: &RunConfig, path: &Path) -> Result<FarFieldArchive> {
    let medium = cfg.medium()?;
    let ks = k_grid(cfg, &medium)?;
    let grid = solver_grid(cfg, &medium)?;
    let opts = solver_options(cfg);

    let mut archive = if path.exists() {
        let existing = FarFieldArchive::load(path)?;
        if existing.obs_angles_count != cfg.obs_count || existing.inc_angles_count != cfg.inc_count {
            return Err(Error::config(
                "existing archive has different angle counts; use a fresh path",
            ));
        }
        existing
    } else {
        FarFieldArchive::new(cfg.obs_count, cfg.inc_count)
    };

    let missing: Vec<f64> = ks.iter().copied().filter(|&k| !archive.contains_k(k)).collect();
    let mut done = 0usize;
    for k in missing {
        let matrix = synthesize_matrix(&medium, &grid, k, cfg.obs_count, cfg.inc_count, &opts)
            .map_err(|e| Error::config(format!("synthesis failed at k = {k}: {e}")))?;
        archive.insert(&matrix)?;
        done += 1;
        // Checkpoint so interrupted runs resume where they stopped.
        if done % 8 == 0 {
            archive.save(path)?;
        }
    }
    archive.save(path)?;
    println!(
        "archive {}: {} wavenumbers ({} synthesized this run)",
        path.display(),
        archive.k_list.len(),
        done
    );
    Ok(archive)
}

fn scan_options(cfg: &RunConfig, medium: &MediumSpec) -> ScanOptions {
    let size = cfg
        .size_estimate
        .unwrap_or_else(|| medium.geometry.enclosing_ball_radius());
    let mut rule = NRule::new(size);
    rule.extra_orders = cfg.extra_orders;
    rule.override_max = cfg.max_order_override;
    let mut opts = ScanOptions::new(rule);
    opts.dip_threshold = cfg.dip_threshold;
    opts.pre_threshold = cfg.pre_threshold;
    opts.mode = match cfg.indicator_mode {
        IndicatorModeConfig::L2 => IndicatorMode::SmallestSingular,
        IndicatorModeConfig::L1 => IndicatorMode::CoordinateDescentL1,
    };
    opts.parabolic_refine = cfg.refine != RefineMethod::None;
    opts
}

fn load_noisy_matrices(cfg: &RunConfig, archive: &FarFieldArchive) -> Vec<FarFieldMatrix> {
    let mut matrices = archive.all_matrices();
    if cfg.noise_level > 0.0 {
        for m in matrices.iter_mut() {
            let seed = cfg.noise_seed ^ m.k.to_bits();
            add_noise(m, cfg.noise_level, seed);
        }
    }
    matrices
}

fn run_scan(cfg: &RunConfig, archive: &FarFieldArchive) -> Result<(ScanOutcome, Vec<EigenDetection>)> {
    let medium = cfg.medium()?;
    let opts = scan_options(cfg, &medium);
    let matrices = load_noisy_matrices(cfg, archive);
    let outcome = scan(&matrices, &opts)?;
    let accepted = match cfg.refine {
        RefineMethod::Golden => {
            let grid = solver_grid(cfg, &medium)?;
            let solver_opts = solver_options(cfg);
            let mut eval = |k: f64, order: usize| {
                let mut m =
                    synthesize_matrix(&medium, &grid, k, cfg.obs_count, cfg.inc_count, &solver_opts)?;
                if cfg.noise_level > 0.0 {
                    let seed = cfg.noise_seed ^ m.k.to_bits();
                    add_noise(&mut m, cfg.noise_level, seed);
                }
                match opts.mode {
                    IndicatorMode::SmallestSingular => indicator(&m, order),
                    IndicatorMode::CoordinateDescentL1 => indicator_l1(&m, order),
                }
            };
            refine_detections(&outcome, &opts, cfg.refine_tol_k, &mut eval)?
        }
        _ => outcome.detections.clone(),
    };
    Ok((outcome, accepted))
}

fn cmd_scan(cfg: &RunConfig, archive_file: &Path) -> Result<()> {
    let archive = FarFieldArchive::load(archive_file)?;
    let dir = ensure_output_dir(cfg)?;
    let (outcome, accepted) = run_scan(cfg, &archive)?;
    write_indicator_csv(&dir.join("indicator.csv"), &outcome.curve)?;
    let file = DetectionsFile {
        format_version: 1,
        detections: accepted.iter().map(DetectionJson::from_detection).collect(),
        diagnostic: if accepted.is_empty() {
            Some("no dip passed the threshold; window may contain no eigenvalue".to_string())
        } else {
            None
        },
    };
    write_json(&dir.join("detections.json"), &file)?;
    println!(
        "scan: {} detections over {} wavenumbers",
        accepted.len(),
        archive.k_list.len()
    );
    for d in &accepted {
        println!("  k* = {:.6} (order {}, dip depth {:.3e})", d.k_star, d.order, d.dip_depth);
    }
    Ok(())
}

fn herglotz_grid(cfg: &RunConfig, k: f64) -> Result<Grid> {
    let [xmin, xmax, ymin, ymax] = cfg.search_box;
    let bbox = BBox { xmin, xmax, ymin, ymax };
    let res = match cfg.herglotz_resolution {
        Some(r) => r,
        None => {
            let lambda = 2.0 * std::f64::consts::PI / k;
            let extent = bbox.width().max(bbox.height());
            let need = (extent / (lambda / 10.0)).ceil() as usize + 1;
            // Odd count keeps symmetric peaks off cell-corner ties.
            let r = need.max(129);
            if r % 2 == 0 {
                r + 1
            } else {
                r
            }
        }
    };
    Grid::new(bbox, res)
}

fn cmd_reconstruct(cfg: &RunConfig, detections_path: &Path, index: usize) -> Result<()> {
    let file = DetectionsFile::load(detections_path)?;
    if file.detections.is_empty() {
        return Err(Error::Reconstruction("no detections to reconstruct from".to_string()));
    }
    let det = file.detections.get(index).ok_or_else(|| {
        Error::config(format!(
            "detection index {index} out of range ({} available)",
            file.detections.len()
        ))
    })?;
    let kernel = det.kernel.to_kernel()?;
    let dir = ensure_output_dir(cfg)?;
    let grid = herglotz_grid(cfg, kernel.k)?;
    let field = herglotz_eval(&kernel, &grid)?;
    write_field_csv(&dir.join("field.csv"), &field)?;

    let mode = match cfg.detect_mode {
        DetectModeConfig::Auto => DetectMode::Auto,
        DetectModeConfig::Vanishing => DetectMode::Vanishing,
        DetectModeConfig::Localizing => DetectMode::Localizing,
    };
    let params = CuspParams {
        tau_v: cfg.tau_v,
        tau_l: cfg.tau_l,
        cluster_radius: cfg.cluster_radius,
        ..Default::default()
    };
    let report = detect_cusps(&field, mode, &params)?;
    let polygon = polygon_from_cusps(&report)
        .map(|hull| hull.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>())
        .map_err(|e| e.to_string());
    let json = cusp_report_json(
        kernel.k,
        &report,
        polygon,
        params.tau_v,
        params.tau_l,
        params.cluster_radius.unwrap_or(field.wavelength() / 4.0),
    );
    write_json(&dir.join("cusps.json"), &json)?;
    println!(
        "reconstruct at k = {:.6}: {} vanishing, {} localizing cluster(s)",
        kernel.k,
        report.vanishing.len(),
        report.localizing.len()
    );
    for c in &report.vanishing {
        println!("  vanishing at ({:.4}, {:.4})", c.representative.x, c.representative.y);
    }
    for c in &report.localizing {
        println!("  localizing at ({:.4}, {:.4})", c.representative.x, c.representative.y);
    }
    Ok(())
}

fn cmd_oracle(what: OracleCommand) -> Result<()> {
    match what {
        OracleCommand::DiskEigs { n, radius, window } => {
            if window.len() != 2 {
                return Err(Error::config("--window needs two values"));
            }
            let eigs = oracle::disk_transmission_eigs(n, radius, window[0], window[1])?;
            #[derive(serde::Serialize)]
            struct Eig {
                k: f64,
                mode: i32,
                multiplicity: usize,
            }
            let list: Vec<Eig> = eigs
                .iter()
                .map(|e| Eig { k: e.k, mode: e.mode, multiplicity: e.multiplicity })
                .collect();
            println!("{}", cuspscan_cli::report::to_json_17(&list)?);
            Ok(())
        }
        OracleCommand::Bounds { common, factor } => {
            let cfg = common.resolve()?;
            let medium = cfg.medium()?;
            let w = oracle::bound_window(&medium, factor)?;
            #[derive(serde::Serialize)]
            struct Window {
                k_lo: f64,
                k_hi: f64,
            }
            println!("{}", cuspscan_cli::report::to_json_17(&Window { k_lo: w.k_lo, k_hi: w.k_hi })?);
            Ok(())
        }
    }
}
