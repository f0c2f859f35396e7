//! First-order Fourier schemes for Allen-Cahn: linearly implicit IMEX and SAV.

use rustfft::num_complex::Complex64;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::problems::allen_cahn::{AllenCahnSpec, GradientFlowForm, SavState};
use crate::problems::snapshot::FieldSnapshot;
use crate::problems::BLOWUP_LIMIT;

#[derive(Debug, Clone)]
pub struct AcSpectralState {
    pub grid: SpectralGrid,
    pub u: Vec<f64>,
    /// Auxiliary variable; only advanced by the SAV scheme.
    pub sav: SavState,
    pub t: f64,
    pub step: usize,
}

impl AcSpectralState {
    /// State from physical values, with `r = √E₁[u]`.
    pub fn new(grid: SpectralGrid, u: Vec<f64>, spec: &AllenCahnSpec) -> Self {
        let e1 = spec.gradient_flow().nonlinear_energy(&u, grid.cell_volume());
        AcSpectralState {
            grid,
            u,
            sav: SavState { r: e1.sqrt() },
            t: 0.0,
            step: 0,
        }
    }

    pub fn from_initial_condition(grid: SpectralGrid, spec: &AllenCahnSpec) -> Self {
        let u = grid.points().iter().map(|p| spec.initial_value(p)).collect();
        Self::new(grid, u, spec)
    }

    pub fn snapshot(&self) -> FieldSnapshot {
        FieldSnapshot::new(self.grid.shape(), 1, self.t, self.u.clone()).expect("grid-shaped field")
    }

    /// `½(φ, 𝓛φ) + r²`.
    pub fn modified_energy(&self, spec: &AllenCahnSpec) -> f64 {
        let q = spec.gradient_flow().quadratic_energy(&self.grid, &self.u);
        self.sav.modified_energy(q)
    }

    fn finish(&mut self, dt: f64) -> Result<()> {
        self.step += 1;
        self.t = self.step as f64 * dt;
        let m = self
            .u
            .iter()
            .fold(0.0f64, |a, &b| if b.is_finite() { a.max(b.abs()) } else { f64::INFINITY });
        if m > BLOWUP_LIMIT || !self.sav.r.is_finite() {
            return Err(Error::BlowUp {
                step: self.step,
                t: self.t,
                detail: format!("max |u| = {m:.3e}, r = {}", self.sav.r),
            });
        }
        Ok(())
    }
}

fn dealiased_g(grid: &SpectralGrid, spec: &AllenCahnSpec, u: &[f64]) -> Vec<Complex64> {
    let g: Vec<f64> = u.iter().map(|&v| spec.g(v)).collect();
    let mut gh = grid.forward(&g);
    grid.dealias(&mut gh);
    gh
}

fn implicit_solve(grid: &SpectralGrid, eps2: f64, dt: f64, rhs: &mut [Complex64]) {
    for (i, c) in rhs.iter_mut().enumerate() {
        *c /= 1.0 + dt * eps2 * grid.k2(i);
    }
}

/// `(1 + Δt ε²|k|²) ûⁿ⁺¹ = ûⁿ − Δt ĝ(uⁿ)`.
pub fn ac_spectral_step_imex(state: &mut AcSpectralState, spec: &AllenCahnSpec, dt: f64) -> Result<()> {
    let grid = &state.grid;
    let gh = dealiased_g(grid, spec, &state.u);
    let mut uh = grid.forward(&state.u);
    for (c, g) in uh.iter_mut().zip(&gh) {
        *c -= g * dt;
    }
    implicit_solve(grid, spec.epsilon * spec.epsilon, dt, &mut uh);
    state.u = grid.inverse(&uh);
    state.finish(dt)
}

/// First-order SAV step.
///
/// With `b = U[φⁿ]/√E₁[φⁿ]` and `A = I + Δt𝓛` the scheme
/// `φⁿ⁺¹ − φⁿ = −Δt(𝓛φⁿ⁺¹ + rⁿ⁺¹ b)`, `rⁿ⁺¹ − rⁿ = ½(b, φⁿ⁺¹ − φⁿ)`
/// reduces to two diagonal solves `A⁻¹c`, `A⁻¹b` and one scalar equation.
pub fn ac_spectral_step_sav(state: &mut AcSpectralState, spec: &AllenCahnSpec, dt: f64) -> Result<()> {
    let form: GradientFlowForm = spec.gradient_flow();
    let grid = &state.grid;
    let w = grid.cell_volume();
    let e1 = form.nonlinear_energy(&state.u, w);
    let inv_sqrt = 1.0 / e1.sqrt();
    let b: Vec<f64> = grid
        .inverse(&dealiased_g(grid, spec, &state.u))
        .into_iter()
        .map(|v| v * inv_sqrt)
        .collect();
    let r = state.sav.r;
    let b_phi = dot(&b, &state.u) * w;
    let c: Vec<f64> = state
        .u
        .iter()
        .zip(&b)
        .map(|(&p, &bb)| p - dt * r * bb + 0.5 * dt * bb * b_phi)
        .collect();
    let eps2 = spec.epsilon * spec.epsilon;
    let mut ch = grid.forward(&c);
    implicit_solve(grid, eps2, dt, &mut ch);
    let x1 = grid.inverse(&ch);
    let mut bh = grid.forward(&b);
    implicit_solve(grid, eps2, dt, &mut bh);
    let x2 = grid.inverse(&bh);
    let b_new = dot(&b, &x1) * w / (1.0 + 0.5 * dt * dot(&b, &x2) * w);
    let u_new: Vec<f64> = x1.iter().zip(&x2).map(|(a, c)| a - 0.5 * dt * b_new * c).collect();
    state.sav.r = r + 0.5 * (b_new - b_phi);
    state.u = u_new;
    state.finish(dt)
}
