//! Output artifacts: JSON with floats pinned to 17 significant digits (so
//! identical runs produce byte-identical files and every f64 round-trips
//! exactly), plus the CSV dumps for curves and fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io;
use std::path::Path;

use cuspscan_core::error::{Error, Result};
use cuspscan_core::reconstruct::{CuspReport, HerglotzField};
use cuspscan_core::spectral::{EigenDetection, IndicatorCurve, TruncatedKernel};

struct Fmt17;

impl serde_json::ser::Formatter for Fmt17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes with 17-significant-digit float formatting.
pub fn to_json_17<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fmt17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::config(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::config(format!("non-utf8 output: {e}")))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = to_json_17(value)?;
    std::fs::write(path, json)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelJson {
    pub k: f64,
    pub order: usize,
    /// Interleaved [re, im] for n = -order..order.
    pub coeffs: Vec<f64>,
}

impl KernelJson {
    pub fn from_kernel(kernel: &TruncatedKernel) -> Self {
        let mut coeffs = Vec::with_capacity(2 * kernel.coeffs.len());
        for c in &kernel.coeffs {
            coeffs.push(c.re);
            coeffs.push(c.im);
        }
        KernelJson { k: kernel.k, order: kernel.order, coeffs }
    }

    pub fn to_kernel(&self) -> Result<TruncatedKernel> {
        let coeffs: Vec<Complex64> =
            self.coeffs.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        TruncatedKernel::new(self.k, self.order, coeffs)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionJson {
    pub k_star: f64,
    pub sigma: f64,
    pub dip_depth: f64,
    pub order: usize,
    pub kernel: KernelJson,
}

impl DetectionJson {
    pub fn from_detection(d: &EigenDetection) -> Self {
        DetectionJson {
            k_star: d.k_star,
            sigma: d.sigma,
            dip_depth: d.dip_depth,
            order: d.order,
            kernel: KernelJson::from_kernel(&d.kernel),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionsFile {
    pub format_version: u32,
    pub detections: Vec<DetectionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl DetectionsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("invalid detections file: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterJson {
    pub representative: [f64; 2],
    pub members: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspReportJson {
    pub k: f64,
    pub vanishing: Vec<ClusterJson>,
    pub localizing: Vec<ClusterJson>,
    pub curve_artifacts: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub tau_v: f64,
    pub tau_l: f64,
    pub cluster_radius: f64,
}

pub fn cusp_report_json(
    k: f64,
    report: &CuspReport,
    polygon: std::result::Result<Vec<[f64; 2]>, String>,
    tau_v: f64,
    tau_l: f64,
    cluster_radius: f64,
) -> CuspReportJson {
    let cluster = |c: &cuspscan_core::reconstruct::Cluster| ClusterJson {
        representative: [c.representative.x, c.representative.y],
        members: c.members.iter().map(|p| [p.x, p.y]).collect(),
    };
    let (polygon, polygon_note) = match polygon {
        Ok(p) => (Some(p), None),
        Err(note) => (None, Some(note)),
    };
    CuspReportJson {
        k,
        vanishing: report.vanishing.iter().map(cluster).collect(),
        localizing: report.localizing.iter().map(cluster).collect(),
        curve_artifacts: report.curve_artifacts.iter().map(|p| [p.x, p.y]).collect(),
        polygon,
        polygon_note,
        diagnostic: report.diagnostic.clone(),
        tau_v,
        tau_l,
        cluster_radius,
    }
}

/// Indicator curve CSV: column `sigma` is the scale-free aggregate
/// min over order curves of sigma_N(k) / median_N.
pub fn write_indicator_csv(path: &Path, curve: &IndicatorCurve) -> Result<()> {
    let mut out = String::from("k,sigma\n");
    for (k, sigma) in curve.aggregate() {
        out.push_str(&format!("{k:.16e},{sigma:.16e}\n"));
    }
    std::fs::write(path, out)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_field_csv(path: &Path, field: &HerglotzField) -> Result<()> {
    let mut out = String::from("x,y,re,im,abs\n");
    let res = field.grid.resolution;
    for iy in 0..res {
        for ix in 0..res {
            let p = field.grid.cell_center(ix, iy);
            let v = field.values[field.grid.index(ix, iy)];
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.x,
                p.y,
                v.re,
                v.im,
                v.norm()
            ));
        }
    }
    std::fs::write(path, out)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
}
