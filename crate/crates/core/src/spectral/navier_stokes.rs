//! Incompressible 2D Navier-Stokes in Fourier space,
//! `v̂_t = −P[((v·∇)v)^] − ν|k|²v̂` with `P = I − k kᵀ/|k|²`.

use rustfft::num_complex::Complex64;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};
use crate::problems::snapshot::FieldSnapshot;
use crate::problems::BLOWUP_LIMIT;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dealiased `((v·∇)v)^` with the mean mode removed.
pub fn advection(grid: &SpectralGrid, u_hat: &[Complex64], v_hat: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let u = grid.inverse(u_hat);
    let v = grid.inverse(v_hat);
    let ux = grid.inverse(&grid.derivative(u_hat, 0));
    let uy = grid.inverse(&grid.derivative(u_hat, 1));
    let vx = grid.inverse(&grid.derivative(v_hat, 0));
    let vy = grid.inverse(&grid.derivative(v_hat, 1));
    let au: Vec<f64> = (0..u.len()).map(|i| u[i] * ux[i] + v[i] * uy[i]).collect();
    let av: Vec<f64> = (0..u.len()).map(|i| u[i] * vx[i] + v[i] * vy[i]).collect();
    let mut au = grid.forward(&au);
    let mut av = grid.forward(&av);
    grid.dealias(&mut au);
    grid.dealias(&mut av);
    // Momentum is conserved analytically; drop the roundoff-level mean.
    au[0] = ZERO;
    av[0] = ZERO;
    (au, av)
}

/// In-place Leray projection `a ← a − k (k·a)/|k|²`.
pub fn project(grid: &SpectralGrid, a: &mut [Complex64], b: &mut [Complex64]) {
    for i in 0..a.len() {
        let kx = grid.k_odd(i, 0);
        let ky = grid.k_odd(i, 1);
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            continue;
        }
        let dot = a[i] * kx + b[i] * ky;
        a[i] -= dot * (kx / k2);
        b[i] -= dot * (ky / k2);
    }
}

/// `p̂ = i k·Â / |k|²` for the advection term `Â`; zero mean.
pub fn pressure_hat(grid: &SpectralGrid, au: &[Complex64], av: &[Complex64]) -> Vec<Complex64> {
    (0..au.len())
        .map(|i| {
            let kx = grid.k_odd(i, 0);
            let ky = grid.k_odd(i, 1);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                ZERO
            } else {
                Complex64::new(0.0, 1.0) * (au[i] * kx + av[i] * ky) / k2
            }
        })
        .collect()
}

/// Full right-hand side `P(−Â − ν|k|²v̂)`.
pub fn tendency(grid: &SpectralGrid, nu: f64, u_hat: &[Complex64], v_hat: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let (mut au, mut av) = advection(grid, u_hat, v_hat);
    for i in 0..au.len() {
        let visc = nu * grid.k2(i);
        au[i] = -au[i] - u_hat[i] * visc;
        av[i] = -av[i] - v_hat[i] * visc;
    }
    project(grid, &mut au, &mut av);
    (au, av)
}

/// Spectral divergence `∂u/∂x + ∂v/∂y` in physical space.
pub fn divergence(grid: &SpectralGrid, u_hat: &[Complex64], v_hat: &[Complex64]) -> Vec<f64> {
    let d: Vec<Complex64> = (0..u_hat.len())
        .map(|i| Complex64::new(0.0, 1.0) * (u_hat[i] * grid.k_odd(i, 0) + v_hat[i] * grid.k_odd(i, 1)))
        .collect();
    grid.inverse(&d)
}

fn velocity_grid(snap: &FieldSnapshot) -> Result<SpectralGrid> {
    if snap.components != 2 || snap.dim() != 2 {
        return Err(Error::Contract(format!(
            "velocity snapshots are 2D with 2 components, got {}D with {}",
            snap.dim(),
            snap.components
        )));
    }
    SpectralGrid::for_shape(&snap.shape)
}

/// `ω = ∂v/∂x − ∂u/∂y`.
pub fn vorticity(snap: &FieldSnapshot) -> Result<FieldSnapshot> {
    let grid = velocity_grid(snap)?;
    let uy = grid.derivative_physical(snap.component(0), 1);
    let vx = grid.derivative_physical(snap.component(1), 0);
    let w = vx.iter().zip(&uy).map(|(a, b)| a - b).collect();
    FieldSnapshot::new(snap.shape.clone(), 1, snap.t, w)
}

/// Max-norm spectral divergence of a velocity snapshot.
pub fn max_divergence(snap: &FieldSnapshot) -> Result<f64> {
    let grid = velocity_grid(snap)?;
    let d = divergence(&grid, &grid.forward(snap.component(0)), &grid.forward(snap.component(1)));
    Ok(d.iter().fold(0.0, |a, b| a.max(b.abs())))
}

/// Pressure field recovered from the advection term of a velocity snapshot.
pub fn pressure(snap: &FieldSnapshot) -> Result<FieldSnapshot> {
    let grid = velocity_grid(snap)?;
    let (au, av) = advection(&grid, &grid.forward(snap.component(0)), &grid.forward(snap.component(1)));
    let p = grid.inverse(&pressure_hat(&grid, &au, &av));
    FieldSnapshot::new(snap.shape.clone(), 1, snap.t, p)
}

/// Low-storage three-stage RK coefficients.
const RK_A: [f64; 3] = [0.0, -5.0 / 9.0, -153.0 / 128.0];
const RK_B: [f64; 3] = [1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0];
const RK_C: [f64; 4] = [0.0, 1.0 / 3.0, 3.0 / 4.0, 1.0];

#[derive(Debug, Clone)]
pub struct NseSpectralState {
    pub grid: SpectralGrid,
    pub u_hat: Vec<Complex64>,
    pub v_hat: Vec<Complex64>,
    pub t: f64,
    pub step: usize,
    /// Cached per-stage integrating factors for `cached_dt`.
    factors: Vec<Vec<f64>>,
    cached: Option<(f64, f64)>,
}

impl NseSpectralState {
    pub fn new(grid: SpectralGrid, u: &[f64], v: &[f64]) -> Self {
        let u_hat = grid.forward(u);
        let v_hat = grid.forward(v);
        NseSpectralState {
            grid,
            u_hat,
            v_hat,
            t: 0.0,
            step: 0,
            factors: Vec::new(),
            cached: None,
        }
    }

    pub fn snapshot(&self) -> FieldSnapshot {
        let mut values = self.grid.inverse(&self.u_hat);
        values.extend(self.grid.inverse(&self.v_hat));
        FieldSnapshot::new(self.grid.shape(), 2, self.t, values).expect("grid-shaped velocity")
    }

    fn ensure_factors(&mut self, nu: f64, dt: f64) {
        if self.cached == Some((nu, dt)) {
            return;
        }
        self.factors = (0..3)
            .map(|s| {
                let h = (RK_C[s + 1] - RK_C[s]) * dt;
                (0..self.grid.len()).map(|i| (-nu * self.grid.k2(i) * h).exp()).collect()
            })
            .collect();
        self.cached = Some((nu, dt));
    }
}

/// One step of integrating-factor low-storage RK3.
///
/// Stages run on `w = e^{ν|k|²τ} v̂`; both the stage value and the
/// accumulator are carried in the frame of the current stage time.
pub fn nse_spectral_step(state: &mut NseSpectralState, nu: f64, dt: f64) -> Result<()> {
    state.ensure_factors(nu, dt);
    let grid = state.grid.clone();
    let n = grid.len();
    let mut qu = vec![ZERO; n];
    let mut qv = vec![ZERO; n];
    for s in 0..3 {
        let (mut nu_hat, mut nv_hat) = advection(&grid, &state.u_hat, &state.v_hat);
        for c in nu_hat.iter_mut().chain(nv_hat.iter_mut()) {
            *c = -*c;
        }
        project(&grid, &mut nu_hat, &mut nv_hat);
        let f = &state.factors[s];
        for i in 0..n {
            qu[i] = qu[i] * RK_A[s] + nu_hat[i] * dt;
            qv[i] = qv[i] * RK_A[s] + nv_hat[i] * dt;
            state.u_hat[i] = (state.u_hat[i] + qu[i] * RK_B[s]) * f[i];
            state.v_hat[i] = (state.v_hat[i] + qv[i] * RK_B[s]) * f[i];
            qu[i] *= f[i];
            qv[i] *= f[i];
        }
    }
    state.step += 1;
    state.t = state.step as f64 * dt;
    let vmax = grid
        .inverse(&state.u_hat)
        .into_iter()
        .chain(grid.inverse(&state.v_hat))
        .fold(0.0f64, |a, b| if b.is_finite() { a.max(b.abs()) } else { f64::INFINITY });
    if vmax > BLOWUP_LIMIT {
        return Err(Error::BlowUp {
            step: state.step,
            t: state.t,
            detail: format!("max |v| = {vmax:.3e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_green(n: usize) -> (SpectralGrid, Vec<f64>, Vec<f64>) {
        let g = SpectralGrid::new(n, 2).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        let pts = g.points();
        let u = pts.iter().map(|p| -(tp * p[0]).cos() * (tp * p[1]).sin()).collect();
        let v = pts.iter().map(|p| (tp * p[0]).sin() * (tp * p[1]).cos()).collect();
        (g, u, v)
    }

    #[test]
    fn taylor_green_tendency_is_pure_viscous_decay() {
        let (g, u, v) = taylor_green(32);
        let nu = 0.05;
        let (tu, tv) = tendency(&g, nu, &g.forward(&u), &g.forward(&v));
        let rate = -8.0 * std::f64::consts::PI.powi(2) * nu;
        let (tu, tv) = (g.inverse(&tu), g.inverse(&tv));
        for i in 0..u.len() {
            assert!((tu[i] - rate * u[i]).abs() < 1e-10);
            assert!((tv[i] - rate * v[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_flow_is_steady() {
        let g = SpectralGrid::new(16, 2).unwrap();
        let mut s = NseSpectralState::new(g.clone(), &vec![0.7; 256], &vec![0.0; 256]);
        let before = s.snapshot().values;
        nse_spectral_step(&mut s, 0.01, 0.01).unwrap();
        let after = s.snapshot().values;
        for (a, b) in before.iter().zip(after) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn taylor_green_vorticity() {
        let (g, u, v) = taylor_green(32);
        let mut vals = u.clone();
        vals.extend(&v);
        let snap = FieldSnapshot::new(g.shape(), 2, 0.0, vals).unwrap();
        let w = vorticity(&snap).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        for (p, wv) in snap.points().iter().zip(w.component(0)) {
            let expect = 2.0 * tp * (tp * p[0]).cos() * (tp * p[1]).cos();
            assert!((wv - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn single_mode_enstrophy_identity() {
        // ψ = sin(πx) sin(2πy): |k|² = 5π², ∫ω² = |k|² ∫|v|².
        let pi = std::f64::consts::PI;
        let snap = FieldSnapshot::from_fn(vec![32, 32], 2, 0.0, |p| {
            vec![
                2.0 * pi * (pi * p[0]).sin() * (2.0 * pi * p[1]).cos(),
                -pi * (pi * p[0]).cos() * (2.0 * pi * p[1]).sin(),
            ]
        })
        .unwrap();
        let w = vorticity(&snap).unwrap();
        let enst: f64 = w.values.iter().map(|x| x * x).sum();
        let ke: f64 = snap.values.iter().map(|x| x * x).sum();
        assert!((enst / ke - 5.0 * pi * pi).abs() < 1e-9);
    }

    #[test]
    fn shear_flow_stays_divergence_free() {
        let g = SpectralGrid::new(64, 2).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        let pts = g.points();
        let u: Vec<f64> = pts.iter().map(|p| -(tp * p[1]).sin()).collect();
        let v: Vec<f64> = pts.iter().map(|p| (tp * p[0]).cos()).collect();
        let mut st = NseSpectralState::new(g, &u, &v);
        for _ in 0..200 {
            nse_spectral_step(&mut st, 0.01, 1e-3).unwrap();
        }
        let div = max_divergence(&st.snapshot()).unwrap();
        assert!(div < 1e-10, "{div}");
    }
}
