//! Run configuration: JSON file plus flag overrides. Unknown keys are
//! rejected so typos fail loudly.

use serde::{Deserialize, Serialize};

use cuspscan_core::error::{Error, Result};
use cuspscan_core::geometry::{builtin_medium, Geometry, MediumSpec, Point2};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    /// Builtin geometry name (rain_small, rain_regular, heart, square,
    /// hexagon, disk); mutually exclusive with `polygon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Explicit counterclockwise vertex list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
    /// Constant refractive index inside the support.
    pub n: f64,
}

impl MediumConfig {
    pub fn build(&self) -> Result<MediumSpec> {
        match (&self.builtin, &self.polygon) {
            (Some(name), None) => builtin_medium(name, self.n),
            (None, Some(verts)) => {
                let pts = verts.iter().map(|&[x, y]| Point2::new(x, y)).collect();
                MediumSpec::new(Geometry::polygon(pts)?, self.n)
            }
            _ => Err(Error::config(
                "medium needs exactly one of `builtin` or `polygon`",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub k_lo: f64,
    pub k_hi: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RefineMethod {
    None,
    Parabolic,
    Golden,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorModeConfig {
    L2,
    L1,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DetectModeConfig {
    Auto,
    Vanishing,
    Localizing,
}

/// Every knob of the pipeline. Field defaults are the documented ones; a
/// config file may set any subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub medium: Option<MediumConfig>,
    /// Solver grid cells per axis.
    pub grid_resolution: usize,
    /// Relative margin of the solver box around the geometry.
    pub grid_margin: f64,
    /// Observation angle count m.
    pub obs_count: usize,
    /// Incident angle count n_inc.
    pub inc_count: usize,
    /// Scan window; None = derive from the Theorem-2.2 bound.
    pub window: Option<WindowConfig>,
    /// Factor applied to the lower bound when the window is auto.
    pub window_factor: f64,
    /// Scan step h.
    pub scan_step: f64,
    /// Prior radius of a ball enclosing the scatterer; None = from geometry.
    pub size_estimate: Option<f64>,
    /// Orders swept above ceil(k * size).
    pub extra_orders: usize,
    /// Hard override of the maximum truncation order.
    pub max_order_override: Option<usize>,
    pub dip_threshold: f64,
    pub pre_threshold: f64,
    pub indicator_mode: IndicatorModeConfig,
    pub refine: RefineMethod,
    /// Golden-section bracket tolerance on k.
    pub refine_tol_k: f64,
    /// Vanishing magnitude threshold.
    pub tau_v: f64,
    /// Localizing magnitude threshold.
    pub tau_l: f64,
    /// Cluster radius; None = lambda/4.
    pub cluster_radius: Option<f64>,
    /// Herglotz search box [xmin, xmax, ymin, ymax].
    pub search_box: [f64; 4],
    /// Herglotz grid resolution; None = ten points per wavelength (odd).
    pub herglotz_resolution: Option<usize>,
    pub detect_mode: DetectModeConfig,
    /// Relative additive noise level on far-field entries (0 = clean).
    pub noise_level: f64,
    pub noise_seed: u64,
    pub solver_tol: f64,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            medium: None,
            grid_resolution: 96,
            grid_margin: 0.15,
            obs_count: 64,
            inc_count: 128,
            window: None,
            window_factor: 4.0,
            scan_step: 0.01,
            size_estimate: None,
            extra_orders: 3,
            max_order_override: None,
            dip_threshold: 0.1,
            pre_threshold: 0.5,
            indicator_mode: IndicatorModeConfig::L2,
            refine: RefineMethod::Golden,
            refine_tol_k: 1e-3,
            tau_v: 0.05,
            tau_l: 0.95,
            cluster_radius: None,
            search_box: [-4.0, 4.0, -4.0, 4.0],
            herglotz_resolution: None,
            detect_mode: DetectModeConfig::Auto,
            noise_level: 0.0,
            noise_seed: 0,
            solver_tol: 1e-7,
            output_dir: "out".to_string(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {path}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("invalid config {path}: {e}")))
    }

    pub fn medium(&self) -> Result<MediumSpec> {
        self.medium
            .as_ref()
            .ok_or_else(|| Error::config("no medium configured (set --medium or config.medium)"))?
            .build()
    }
}
