//! Run directories: manifests, snapshot files and grayscale images.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::kan::io::NETWORK_FORMAT_VERSION;
use crate::problems::snapshot::{FieldSnapshot, SNAPSHOT_FORMAT_VERSION};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub evokan: String,
    pub evkn_format: u32,
    pub evks_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            evokan: env!("CARGO_PKG_VERSION").to_string(),
            evkn_format: NETWORK_FORMAT_VERSION,
            evks_format: SNAPSHOT_FORMAT_VERSION,
        }
    }
}

/// Enough to reproduce a run: the resolved configuration, its hash, the seed
/// and the tool versions. Sweep parents list their children instead of snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub command: String,
    /// `evokan`, `ednn` or `spectral`.
    pub method: String,
    pub problem: String,
    pub parameter: String,
    pub value: f64,
    pub config_sha256: String,
    pub seed: u64,
    pub versions: Versions,
    /// `ok`, or the error that ended the run.
    pub status: String,
    #[serde(default)]
    pub snapshots: Vec<String>,
    #[serde(default)]
    pub children: Vec<String>,
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, method: &str, config: &RunConfig) -> Self {
        let (parameter, value) = config.problem.parameter();
        Manifest {
            manifest_version: MANIFEST_VERSION,
            command: command.into(),
            method: method.into(),
            problem: config.problem.spec().tag().into(),
            parameter: parameter.into(),
            value,
            config_sha256: config.hash(),
            seed: config.seed,
            versions: Versions::default(),
            status: "running".into(),
            snapshots: Vec::new(),
            children: Vec::new(),
            extra: serde_json::Map::new(),
            config: config.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn create_file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:06}.evks")
}

/// The snapshots a run directory lists in its manifest, in order.
pub fn load_trajectory(dir: &Path) -> Result<Vec<FieldSnapshot>> {
    let m = Manifest::read(dir)?;
    m.snapshots
        .iter()
        .map(|name| FieldSnapshot::load(&dir.join(SNAPSHOT_DIR).join(name)))
        .collect()
}

/// Every `.evks` file in `dir`, sorted by name.
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "evks"))
        .collect();
    out.sort();
    Ok(out)
}

/// Binary 8-bit PGM plus the value range it maps onto `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub min: f64,
    pub max: f64,
}

impl GrayImage {
    /// Rows are given top to bottom. A constant image maps to mid-gray.
    pub fn from_rows(width: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if width == 0 || rows.is_empty() || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Contract("image rows must be non-empty and equally long".into()));
        }
        let (min, max) = rows
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::Contract("cannot render non-finite values".into()));
        }
        let span = max - min;
        let pixels = rows
            .iter()
            .flatten()
            .map(|&v| {
                if span > 0.0 {
                    ((v - min) / span * 255.0).round() as u8
                } else {
                    128
                }
            })
            .collect();
        Ok(GrayImage {
            width,
            height: rows.len(),
            pixels,
            min,
            max,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Write `path` and the range sidecar `path.txt`.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))?;
        let mut side = path.as_os_str().to_owned();
        side.push(".txt");
        let side = PathBuf::from(side);
        fs::write(&side, format!("min {:e}\nmax {:e}\n", self.min, self.max)).map_err(|e| Error::io(&side, e))
    }
}

/// One component of a 2D snapshot, `y` increasing upward.
pub fn render_field(snap: &FieldSnapshot, component: usize) -> Result<GrayImage> {
    if component >= snap.components {
        return Err(Error::validation(
            "component",
            format!("snapshot has {} components", snap.components),
        ));
    }
    let values = snap.component(component);
    match snap.shape[..] {
        [n] => GrayImage::from_rows(n, &[values.to_vec()]),
        [nx, ny] => {
            let rows: Vec<Vec<f64>> = (0..ny).rev().map(|iy| values[iy * nx..(iy + 1) * nx].to_vec()).collect();
            GrayImage::from_rows(nx, &rows)
        }
        _ => Err(Error::Contract("unsupported snapshot shape".into())),
    }
}

/// 1D trajectory as a space-time strip, time increasing downward.
pub fn render_strip(traj: &[FieldSnapshot], component: usize) -> Result<GrayImage> {
    let first = traj
        .first()
        .ok_or_else(|| Error::validation("trajectory", "no snapshots to render"))?;
    if first.dim() != 1 || traj.iter().any(|s| s.shape != first.shape) {
        return Err(Error::validation("trajectory", "space-time strips need 1D snapshots on one grid"));
    }
    if component >= first.components {
        return Err(Error::validation("component", format!("snapshot has {} components", first.components)));
    }
    let rows: Vec<Vec<f64>> = traj.iter().map(|s| s.component(component).to_vec()).collect();
    GrayImage::from_rows(first.shape[0], &rows)
}
