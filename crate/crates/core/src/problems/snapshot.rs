//! Sampled fields on the uniform periodic grid over `[-1, 1]^d`.
//!
//! Points are `x_i = -1 + 2i/n` for `i = 0..n` (the duplicate endpoint
//! `x = 1` is excluded). In 2D the flat index is `iy * nx + ix`,
//! so `x` varies fastest. Components are stored one after another.
//!
//! `EVKS` file layout (little-endian):
//!
//! ```text
//! "EVKS"  u32 version  u32 nx  u32 ny (1 for 1D)  u32 components  f64 t
//! f64 × (nx·ny) for component 0, then component 1, ...
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::util::{ByteReader, ByteWriter};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"EVKS";
pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    /// Points per axis: `[n]` or `[n, n]`.
    pub shape: Vec<usize>,
    pub components: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

/// Coordinates of the uniform periodic grid on `[-1, 1]`.
pub fn grid_coords(n: usize) -> Vec<f64> {
    (0..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect()
}

/// Every grid point in snapshot order.
pub fn grid_points(shape: &[usize]) -> Vec<Vec<f64>> {
    match shape {
        [n] => grid_coords(*n).into_iter().map(|x| vec![x]).collect(),
        [nx, ny] => {
            let xs = grid_coords(*nx);
            let ys = grid_coords(*ny);
            let mut pts = Vec::with_capacity(nx * ny);
            for &y in &ys {
                for &x in &xs {
                    pts.push(vec![x, y]);
                }
            }
            pts
        }
        _ => Vec::new(),
    }
}

impl FieldSnapshot {
    pub fn new(shape: Vec<usize>, components: usize, t: f64, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 || shape.iter().any(|&s| s == 0) {
            return Err(Error::Contract(format!("unsupported snapshot shape {shape:?}")));
        }
        if components == 0 {
            return Err(Error::Contract("snapshot needs at least one component".into()));
        }
        let n: usize = shape.iter().product();
        if values.len() != n * components {
            return Err(Error::Contract(format!(
                "snapshot holds {} values, shape {:?} x {} components needs {}",
                values.len(),
                shape,
                components,
                n * components
            )));
        }
        Ok(FieldSnapshot {
            shape,
            components,
            t,
            values,
        })
    }

    /// Sample `f` at every grid point.
    pub fn from_fn(
        shape: Vec<usize>,
        components: usize,
        t: f64,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let pts = grid_points(&shape);
        let n = pts.len();
        let mut values = vec![0.0; n * components];
        for (i, p) in pts.iter().enumerate() {
            let v = f(p);
            for c in 0..components {
                values[c * n + i] = v[c];
            }
        }
        Self::new(shape, components, t, values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn n_points(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.n_points();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.n_points();
        &mut self.values[c * n..(c + 1) * n]
    }

    /// Quadrature weight of one grid cell; the domain measure is `2^d`.
    pub fn cell_volume(&self) -> f64 {
        self.shape.iter().map(|&n| 2.0 / n as f64).product()
    }

    pub fn domain_measure(&self) -> f64 {
        2f64.powi(self.dim() as i32)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        grid_points(&self.shape)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::default();
        w.bytes(SNAPSHOT_MAGIC);
        w.u32(SNAPSHOT_FORMAT_VERSION);
        w.u32(self.shape[0] as u32);
        w.u32(self.shape.get(1).copied().unwrap_or(1) as u32);
        w.u32(self.components as u32);
        w.f64(self.t);
        for &v in &self.values {
            w.f64(v);
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8], origin: &Path) -> Result<Self> {
        let mut r = ByteReader::new(bytes, origin);
        if r.take(4)? != SNAPSHOT_MAGIC {
            return Err(Error::format(origin, "missing EVKS magic"));
        }
        let version = r.u32()?;
        if version != SNAPSHOT_FORMAT_VERSION {
            return Err(Error::format(origin, format!("unsupported version {version}")));
        }
        let nx = r.u32()? as usize;
        let ny = r.u32()? as usize;
        let comps = r.u32()? as usize;
        let t = r.f64()?;
        let shape = if ny == 1 { vec![nx] } else { vec![nx, ny] };
        let n = nx
            .checked_mul(ny)
            .and_then(|v| v.checked_mul(comps))
            .ok_or_else(|| Error::format(origin, "dimensions overflow"))?;
        if n * 8 != bytes.len().saturating_sub(28) {
            return Err(Error::format(
                origin,
                format!("payload holds {} bytes, header promises {}", bytes.len() - 28, n * 8),
            ));
        }
        let values = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        r.expect_end()?;
        Self::new(shape, comps, t, values).map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_excludes_right_endpoint() {
        let xs = grid_coords(4);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5]);
        let pts = grid_points(&[2, 2]);
        assert_eq!(pts, vec![vec![-1.0, -1.0], vec![0.0, -1.0], vec![-1.0, 0.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn value_count_checked() {
        assert!(FieldSnapshot::new(vec![4], 1, 0.0, vec![0.0; 3]).is_err());
        assert!(FieldSnapshot::new(vec![4, 4], 2, 0.0, vec![0.0; 32]).is_ok());
    }

    #[test]
    fn evks_header() {
        let s = FieldSnapshot::new(vec![2, 2], 2, 0.5, (0..8).map(|v| v as f64).collect()).unwrap();
        let b = s.encode();
        assert_eq!(&b[..4], b"EVKS");
        assert_eq!(b.len(), 28 + 64);
        assert_eq!(f64::from_le_bytes(b[20..28].try_into().unwrap()), 0.5);
        assert_eq!(FieldSnapshot::decode(&b, Path::new("m")).unwrap(), s);
        assert!(FieldSnapshot::decode(&b[..b.len() - 1], Path::new("m")).is_err());
    }
}
