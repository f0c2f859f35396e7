//! Allen-Cahn `u_t = ε²Δu − g(u)` with `g(u) = u(u² − 1)/ε²` and its
//! gradient-flow decomposition for the scalar auxiliary variable method.
//!
//! The flow is `φ_t = −μ` with `μ = 𝓛φ + U[φ]`, `𝓛 = −ε²Δ`, `U = g`. The SAV
//! reformulation replaces `U[φ]` by `(r/√E₁[φ]) U[φ]` where `r ≈ √E₁` evolves by
//! `r_t = (U[φ], φ_t) / (2√E₁[φ])`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kan::JetValue;
use crate::problems::snapshot::FieldSnapshot;
use crate::spectral::SpectralGrid;

pub const DEFAULT_AMPLITUDE: f64 = 0.25;
pub const AMPLITUDE_2D: f64 = 0.08;
/// Constant added to the nonlinear energy so that `E₁ ≥ C₀ > 0`.
pub const DEFAULT_SHIFT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllenCahnSpec {
    pub dim: usize,
    pub epsilon: f64,
    /// 1D initial amplitude `a` in `a sin(πx)`.
    pub amplitude: f64,
    /// 2D initial wavenumber `α` in `0.08 sin(απx) sin(απy)`.
    pub alpha: u32,
}

impl AllenCahnSpec {
    pub fn one_d(epsilon: f64) -> Self {
        AllenCahnSpec {
            dim: 1,
            epsilon,
            amplitude: DEFAULT_AMPLITUDE,
            alpha: 1,
        }
    }

    pub fn two_d(epsilon: f64, alpha: u32) -> Self {
        AllenCahnSpec {
            dim: 2,
            epsilon,
            amplitude: AMPLITUDE_2D,
            alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::validation("dim", format!("must be 1 or 2, got {}", self.dim)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::validation("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if self.alpha < 1 {
            return Err(Error::validation("alpha", "must be >= 1"));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::validation("amplitude", "must be finite"));
        }
        Ok(())
    }

    /// `g(u) = u(u² − 1)/ε²`.
    #[inline]
    pub fn g(&self, u: f64) -> f64 {
        u * (u * u - 1.0) / (self.epsilon * self.epsilon)
    }

    /// `g'(u) = (3u² − 1)/ε²`.
    #[inline]
    pub fn g_prime(&self, u: f64) -> f64 {
        (3.0 * u * u - 1.0) / (self.epsilon * self.epsilon)
    }

    /// Double-well `G(u) = (u² − 1)²/(4ε²)`.
    #[inline]
    pub fn potential(&self, u: f64) -> f64 {
        let w = u * u - 1.0;
        w * w / (4.0 * self.epsilon * self.epsilon)
    }

    pub fn initial_value(&self, x: &[f64]) -> f64 {
        let pi = std::f64::consts::PI;
        if self.dim == 1 {
            self.amplitude * (pi * x[0]).sin()
        } else {
            let a = self.alpha as f64 * pi;
            self.amplitude * (a * x[0]).sin() * (a * x[1]).sin()
        }
    }

    pub fn gradient_flow(&self) -> GradientFlowForm {
        GradientFlowForm {
            spec: *self,
            shift: DEFAULT_SHIFT,
        }
    }
}

/// Right-hand side `ε²Δu − g(u)` from a network jet.
pub fn ac_residual(spec: &AllenCahnSpec, jet: &JetValue) -> Result<f64> {
    if jet.second.len() != spec.dim || jet.grad.len() != spec.dim {
        return Err(Error::Contract(format!(
            "Allen-Cahn residual needs second derivatives in {} coordinates, jet has {}",
            spec.dim,
            jet.second.len()
        )));
    }
    let eps2 = spec.epsilon * spec.epsilon;
    Ok(eps2 * jet.laplacian() - spec.g(jet.value))
}

fn require_scalar(spec: &AllenCahnSpec, snap: &FieldSnapshot) -> Result<()> {
    if snap.components != 1 {
        return Err(Error::Contract(format!(
            "Allen-Cahn fields are scalar, snapshot has {} components",
            snap.components
        )));
    }
    if snap.dim() != spec.dim {
        return Err(Error::Contract(format!(
            "{}D problem given a {}D snapshot",
            spec.dim,
            snap.dim()
        )));
    }
    Ok(())
}

/// `(E_total, E₁)` with `E_total = ∫ ½ε²|∇u|² + G(u)` and `E₁ = ∫ G(u) + C₀`.
pub fn ac_energy(spec: &AllenCahnSpec, snap: &FieldSnapshot) -> Result<(f64, f64)> {
    require_scalar(spec, snap)?;
    let form = spec.gradient_flow();
    let grid = SpectralGrid::for_shape(&snap.shape)?;
    let u = snap.component(0);
    let quad = form.quadratic_energy(&grid, u);
    let e1 = form.nonlinear_energy(u, snap.cell_volume());
    Ok((quad + e1 - form.shift, e1))
}

/// `(𝓛, 𝓖 = −I, E₁, U)` for Allen-Cahn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientFlowForm {
    pub spec: AllenCahnSpec,
    /// `C₀`.
    pub shift: f64,
}

impl GradientFlowForm {
    /// `E₁ = Σ G(u_i) w + C₀` for uniform quadrature weight `w`.
    pub fn nonlinear_energy(&self, values: &[f64], weight: f64) -> f64 {
        let s: f64 = values.iter().map(|&u| self.spec.potential(u)).sum();
        s * weight + self.shift
    }

    /// `U[φ]` pointwise.
    pub fn variational(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&u| self.spec.g(u)).collect()
    }

    /// `𝓛φ = −ε²Δφ` spectrally.
    pub fn apply_linear(&self, grid: &SpectralGrid, values: &[f64]) -> Vec<f64> {
        let eps2 = self.spec.epsilon * self.spec.epsilon;
        grid.laplacian_physical(values)
            .into_iter()
            .map(|v| -eps2 * v)
            .collect()
    }

    /// `½(φ, 𝓛φ)` evaluated through Parseval so it matches the diagonal solves exactly.
    pub fn quadratic_energy(&self, grid: &SpectralGrid, values: &[f64]) -> f64 {
        let c = grid.forward(values);
        let eps2 = self.spec.epsilon * self.spec.epsilon;
        let s: f64 = c
            .iter()
            .enumerate()
            .map(|(i, z)| grid.k2(i) * z.norm_sqr())
            .sum();
        0.5 * eps2 * s * grid.cell_volume() / grid.len() as f64
    }
}

/// Scalar auxiliary variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavState {
    pub r: f64,
}

impl SavState {
    fn check(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::Contract(format!("auxiliary variable must be positive, r = {}", self.r)));
        }
        Ok(())
    }

    /// `½(φ, 𝓛φ) + r²`.
    pub fn modified_energy(&self, quadratic: f64) -> f64 {
        quadratic + self.r * self.r
    }
}

pub fn sav_init(form: &GradientFlowForm, snap: &FieldSnapshot) -> Result<SavState> {
    require_scalar(&form.spec, snap)?;
    let e1 = form.nonlinear_energy(snap.component(0), snap.cell_volume());
    Ok(SavState { r: e1.sqrt() })
}

/// `μ = 𝓛φ + (r/√E₁) U[φ]` on the snapshot grid.
pub fn sav_mu(form: &GradientFlowForm, snap: &FieldSnapshot, sav: &SavState) -> Result<Vec<f64>> {
    sav.check()?;
    require_scalar(&form.spec, snap)?;
    let grid = SpectralGrid::for_shape(&snap.shape)?;
    let u = snap.component(0);
    let ratio = sav.r / form.nonlinear_energy(u, snap.cell_volume()).sqrt();
    let lin = form.apply_linear(&grid, u);
    Ok(lin
        .iter()
        .zip(u)
        .map(|(l, &v)| l + ratio * form.spec.g(v))
        .collect())
}

/// `(φ_t, r_t)` with `φ_t = −μ` and `r_t = (U, φ_t)/(2√E₁)`.
pub fn sav_rhs(form: &GradientFlowForm, snap: &FieldSnapshot, sav: &SavState) -> Result<(Vec<f64>, f64)> {
    let mu = sav_mu(form, snap, sav)?;
    let u = snap.component(0);
    let w = snap.cell_volume();
    let e1 = form.nonlinear_energy(u, w);
    let phi_t: Vec<f64> = mu.iter().map(|m| -m).collect();
    let inner: f64 = u
        .iter()
        .zip(&phi_t)
        .map(|(&v, p)| form.spec.g(v) * p)
        .sum::<f64>()
        * w;
    Ok((phi_t, inner / (2.0 * e1.sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant(n: usize, v: f64) -> FieldSnapshot {
        FieldSnapshot::new(vec![n], 1, 0.0, vec![v; n]).unwrap()
    }

    #[test]
    fn residual_at_constants_is_zero() {
        let s = AllenCahnSpec::one_d(0.02);
        for u in [-1.0, 0.0, 1.0] {
            assert_eq!(ac_residual(&s, &JetValue::constant(u, 1)).unwrap(), 0.0);
        }
    }

    #[test]
    fn residual_of_sine_at_peak() {
        let s = AllenCahnSpec::one_d(0.1);
        let pi = std::f64::consts::PI;
        let jet = JetValue {
            value: 1.0,
            grad: vec![0.0],
            second: vec![-pi * pi],
            cross: None,
        };
        assert_relative_eq!(ac_residual(&s, &jet).unwrap(), -0.01 * pi * pi, max_relative = 1e-14);
        assert!(ac_residual(&s, &JetValue::constant(0.0, 2)).is_err());
    }

    #[test]
    fn potential_derivative_is_g() {
        let s = AllenCahnSpec::one_d(0.3);
        let h = 1e-6;
        for i in 0..=40 {
            let u = -2.0 + 0.1 * i as f64;
            let fd = (s.potential(u + h) - s.potential(u - h)) / (2.0 * h);
            assert_relative_eq!(fd, s.g(u), max_relative = 1e-7, epsilon = 1e-7);
        }
    }

    #[test]
    fn energies_of_constant_fields() {
        let s = AllenCahnSpec::one_d(0.5);
        let (e, e1) = ac_energy(&s, &constant(32, 1.0)).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(e1, DEFAULT_SHIFT);
        let (e, e1) = ac_energy(&s, &constant(32, 0.0)).unwrap();
        assert_relative_eq!(e, 2.0, max_relative = 1e-14);
        assert_relative_eq!(e1, 3.0, max_relative = 1e-14);
        let sav = sav_init(&s.gradient_flow(), &constant(32, 0.0)).unwrap();
        assert_relative_eq!(sav.r, 3f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn sav_equilibria() {
        let form = AllenCahnSpec::one_d(0.5).gradient_flow();
        for v in [0.0, 1.0] {
            let snap = constant(32, v);
            let sav = sav_init(&form, &snap).unwrap();
            let (phi_t, r_t) = sav_rhs(&form, &snap, &sav).unwrap();
            assert!(phi_t.iter().all(|p| *p == 0.0));
            assert_eq!(r_t, 0.0);
        }
        let bad = SavState { r: 0.0 };
        assert!(sav_mu(&form, &constant(32, 0.0), &bad).is_err());
    }

    #[test]
    fn mu_at_init_is_chemical_potential() {
        let spec = AllenCahnSpec::one_d(0.2);
        let form = spec.gradient_flow();
        let snap = FieldSnapshot::from_fn(vec![64], 1, 0.0, |x| vec![spec.initial_value(x)]).unwrap();
        let sav = sav_init(&form, &snap).unwrap();
        let mu = sav_mu(&form, &snap, &sav).unwrap();
        let pi = std::f64::consts::PI;
        for (m, p) in mu.iter().zip(snap.points()) {
            let u = spec.initial_value(&p);
            let expect = spec.epsilon.powi(2) * pi * pi * u + spec.g(u);
            assert!((m - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn two_d_initial_condition() {
        let s = AllenCahnSpec::two_d(0.05, 1);
        assert_relative_eq!(s.initial_value(&[0.5, 0.5]), 0.08, max_relative = 1e-15);
        assert_eq!(AllenCahnSpec::one_d(0.02).initial_value(&[0.0]), 0.0);
    }
}
