//! Far-field archive file: every synthesized matrix for a k-grid, written
//! atomically and resumable by wavenumber.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use cuspscan_core::error::{Error, Result};
use cuspscan_core::forward::FarFieldMatrix;

use crate::report::to_json_17;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldArchive {
    pub format_version: u32,
    /// Strictly increasing wavenumbers.
    pub k_list: Vec<f64>,
    pub obs_angles_count: usize,
    pub inc_angles_count: usize,
    /// One flat array per k: row-major over observations then incidences,
    /// interleaved [re, im], length 2 * m * n_inc.
    pub matrices: Vec<Vec<f64>>,
}

impl FarFieldArchive {
    pub fn new(obs: usize, inc: usize) -> Self {
        FarFieldArchive {
            format_version: 1,
            k_list: vec![],
            obs_angles_count: obs,
            inc_angles_count: inc,
            matrices: vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != 1 {
            return Err(Error::config(format!(
                "unsupported archive format_version {}",
                self.format_version
            )));
        }
        if self.k_list.len() != self.matrices.len() {
            return Err(Error::config("archive k_list and matrices lengths differ"));
        }
        for w in self.k_list.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::config("archive k_list must be strictly increasing"));
            }
        }
        let expect = 2 * self.obs_angles_count * self.inc_angles_count;
        for (i, m) in self.matrices.iter().enumerate() {
            if m.len() != expect {
                return Err(Error::config(format!(
                    "archive matrix {i} has {} values, expected {expect}",
                    m.len()
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read archive {}: {e}", path.display())))?;
        let archive: FarFieldArchive = serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("invalid archive {}: {e}", path.display())))?;
        archive.validate()?;
        Ok(archive)
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let json = to_json_17(self)?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, json)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, path)
            .map_err(|e| Error::config(format!("cannot rename archive into place: {e}")))?;
        Ok(())
    }

    pub fn contains_k(&self, k: f64) -> bool {
        self.k_list.iter().any(|&kk| (kk - k).abs() <= 1e-12 * k.max(1.0))
    }

    pub fn insert(&mut self, matrix: &FarFieldMatrix) -> Result<()> {
        if matrix.obs_count != self.obs_angles_count || matrix.inc_count != self.inc_angles_count {
            return Err(Error::config("matrix angle counts do not match the archive"));
        }
        let mut flat = Vec::with_capacity(2 * matrix.entries.len());
        for e in &matrix.entries {
            flat.push(e.re);
            flat.push(e.im);
        }
        let pos = self.k_list.partition_point(|&kk| kk < matrix.k);
        self.k_list.insert(pos, matrix.k);
        self.matrices.insert(pos, flat);
        Ok(())
    }

    pub fn matrix(&self, index: usize) -> FarFieldMatrix {
        let flat = &self.matrices[index];
        let entries: Vec<Complex64> =
            flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        FarFieldMatrix {
            k: self.k_list[index],
            obs_count: self.obs_angles_count,
            inc_count: self.inc_angles_count,
            entries,
        }
    }

    pub fn all_matrices(&self) -> Vec<FarFieldMatrix> {
        (0..self.k_list.len()).map(|i| self.matrix(i)).collect()
    }
}
