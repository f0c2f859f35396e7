//! Fourier grids on the periodic box `[-1, 1]^d` (d = 1, 2).
//!
//! Coefficients use the unnormalized forward DFT; the inverse divides by the
//! number of points. Wavenumbers are `k = π m` for mode index `m` in FFT order.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::problems::snapshot::grid_points;

#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    dim: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `π m` per axis index.
    k: Vec<f64>,
    /// As `k` with the Nyquist entry zeroed, for odd derivatives.
    k_odd: Vec<f64>,
    /// Signed mode index per axis index.
    modes: Vec<i64>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("dim", &self.dim)
            .finish()
    }
}

impl SpectralGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize, dim: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Configuration(format!("spectral grids are 1D or 2D, got {dim}D")));
        }
        if !n.is_power_of_two() || n < Self::MIN_POINTS {
            return Err(Error::Configuration(format!(
                "spectral grid size must be a power of two >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let modes: Vec<i64> = (0..n)
            .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let pi = std::f64::consts::PI;
        let k: Vec<f64> = modes.iter().map(|&m| pi * m as f64).collect();
        let k_odd = modes
            .iter()
            .map(|&m| if m == -(n as i64) / 2 { 0.0 } else { pi * m as f64 })
            .collect();
        Ok(SpectralGrid {
            n,
            dim,
            fwd,
            inv,
            k,
            k_odd,
            modes,
        })
    }

    /// Grid matching a snapshot's shape; rejects non-square 2D shapes.
    pub fn for_shape(shape: &[usize]) -> Result<Self> {
        match shape {
            [n] => Self::new(*n, 1),
            [nx, ny] if nx == ny => Self::new(*nx, 2),
            _ => Err(Error::Configuration(format!(
                "spectral operations need a square grid, got {shape:?}"
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.dim]
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        (2.0 / self.n as f64).powi(self.dim as i32)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        grid_points(&self.shape())
    }

    /// Largest resolved wavenumber `π n / 2`.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI * (self.n / 2) as f64
    }

    #[inline]
    fn axis_index(&self, idx: usize, axis: usize) -> usize {
        if axis == 0 {
            idx % self.n
        } else {
            idx / self.n
        }
    }

    /// Wavenumber along `axis` for odd-order derivatives (Nyquist zeroed).
    #[inline]
    pub fn k_odd(&self, idx: usize, axis: usize) -> f64 {
        if axis >= self.dim {
            return 0.0;
        }
        self.k_odd[self.axis_index(idx, axis)]
    }

    #[inline]
    pub fn mode(&self, idx: usize, axis: usize) -> i64 {
        if axis >= self.dim {
            return 0;
        }
        self.modes[self.axis_index(idx, axis)]
    }

    /// `|k|²` including the Nyquist modes.
    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        (0..self.dim)
            .map(|a| {
                let k = self.k[self.axis_index(idx, a)];
                k * k
            })
            .sum()
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        // Rows (x direction) are contiguous.
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        if self.dim == 2 {
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for ix in 0..n {
                for iy in 0..n {
                    col[iy] = data[iy * n + ix];
                }
                plan.process(&mut col);
                for iy in 0..n {
                    data[iy * n + ix] = col[iy];
                }
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len(), "field size does not match grid");
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fwd);
        data
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len(), "coefficient count does not match grid");
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.inv);
        let scale = 1.0 / self.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    /// `∂/∂x_axis` in coefficient space.
    pub fn derivative(&self, coeffs: &[Complex64], axis: usize) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, self.k_odd(i, axis)))
            .collect()
    }

    pub fn laplacian(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * -self.k2(i))
            .collect()
    }

    /// Physical-space derivative of a physical field.
    pub fn derivative_physical(&self, values: &[f64], axis: usize) -> Vec<f64> {
        self.inverse(&self.derivative(&self.forward(values), axis))
    }

    pub fn laplacian_physical(&self, values: &[f64]) -> Vec<f64> {
        self.inverse(&self.laplacian(&self.forward(values)))
    }

    /// 2/3-rule: zero every mode with `|k_axis| ≥ (2/3) k_max` on any axis.
    pub fn dealias(&self, coeffs: &mut [Complex64]) {
        let cut = self.n as i64; // |m| >= n/3  <=>  3|m| >= n
        for (i, c) in coeffs.iter_mut().enumerate() {
            if (0..self.dim).any(|a| 3 * self.mode(i, a).abs() >= cut) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Spectral truncation onto a coarser (or equal) grid of the same dimension.
    /// Modes with `|m| < n_target / 2` are kept; the target Nyquist mode is zero.
    pub fn truncate_to(&self, coeffs: &[Complex64], target: &SpectralGrid) -> Result<Vec<Complex64>> {
        if target.dim != self.dim || target.n > self.n {
            return Err(Error::Configuration(format!(
                "cannot truncate {}^{} onto {}^{}",
                self.n, self.dim, target.n, target.dim
            )));
        }
        let half = (target.n / 2) as i64;
        let scale = (target.n as f64 / self.n as f64).powi(self.dim as i32);
        let to_src = |m: i64| -> usize {
            if m >= 0 {
                m as usize
            } else {
                (self.n as i64 + m) as usize
            }
        };
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        for (ti, o) in out.iter_mut().enumerate() {
            let mx = target.mode(ti, 0);
            let my = target.mode(ti, 1);
            if mx.abs() >= half || my.abs() >= half {
                continue;
            }
            let si = if self.dim == 2 {
                to_src(my) * self.n + to_src(mx)
            } else {
                to_src(mx)
            };
            *o = coeffs[si] * scale;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_sizes() {
        assert!(SpectralGrid::new(48, 1).is_err());
        assert!(SpectralGrid::new(8, 1).is_err());
        assert!(SpectralGrid::new(32, 3).is_err());
        assert!(SpectralGrid::for_shape(&[32, 64]).is_err());
    }

    #[test]
    fn round_trip_is_exact_to_roundoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, d) in [(64, 1), (32, 2), (128, 2)] {
            let g = SpectralGrid::new(n, d).unwrap();
            let f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = g.inverse(&g.forward(&f));
            let scale = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let err = f.iter().zip(&back).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            assert!(err / scale < 1e-12, "{err}");
        }
    }

    #[test]
    fn derivatives_of_trig_fields() {
        let g = SpectralGrid::new(32, 2).unwrap();
        let pi = std::f64::consts::PI;
        let pts = g.points();
        let f: Vec<f64> = pts.iter().map(|p| (pi * p[0]).sin() * (2.0 * pi * p[1]).cos()).collect();
        let fx = g.derivative_physical(&f, 0);
        let lap = g.laplacian_physical(&f);
        for (i, p) in pts.iter().enumerate() {
            let ex = pi * (pi * p[0]).cos() * (2.0 * pi * p[1]).cos();
            assert!((fx[i] - ex).abs() < 1e-11);
            assert!((lap[i] + 5.0 * pi * pi * f[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn dealias_band() {
        let g = SpectralGrid::new(64, 1).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); 64];
        c[1] = Complex64::new(32.0, 0.0);
        c[63] = Complex64::new(32.0, 0.0);
        let before = c.clone();
        g.dealias(&mut c);
        assert_eq!(c, before);

        let nyq: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut c = g.forward(&nyq);
        g.dealias(&mut c);
        assert!(c.iter().all(|z| z.norm() == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut once = g.forward(&f);
        g.dealias(&mut once);
        let mut twice = once.clone();
        g.dealias(&mut twice);
        assert_eq!(once, twice);
    }

    #[test]
    fn truncation_exact_on_band_limited_fields() {
        let fine = SpectralGrid::new(64, 2).unwrap();
        let coarse = SpectralGrid::new(16, 2).unwrap();
        let pi = std::f64::consts::PI;
        let f = |p: &[f64]| (3.0 * pi * p[0]).sin() * (pi * p[1]).cos() + 0.5;
        let vals: Vec<f64> = fine.points().iter().map(|p| f(p)).collect();
        let c = fine.truncate_to(&fine.forward(&vals), &coarse).unwrap();
        let down = coarse.inverse(&c);
        for (p, v) in coarse.points().iter().zip(down) {
            assert!((v - f(p)).abs() < 1e-13);
        }
    }
}
