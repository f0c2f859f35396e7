//! 2D incompressible Navier-Stokes on `[-1, 1]²` without forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::snapshot::FieldSnapshot;
use crate::spectral::{navier_stokes, SpectralGrid};

/// Initial velocity variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NseInitialCondition {
    /// `u = −sin(2πy)`, `v = cos(2πy)` as printed; not divergence-free.
    PaperLiteral,
    /// `u = −sin(2πy)`, `v = cos(2πx)`.
    #[default]
    DivergenceFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavierStokesSpec {
    pub nu: f64,
    pub ic: NseInitialCondition,
}

impl NavierStokesSpec {
    pub fn new(nu: f64) -> Self {
        NavierStokesSpec {
            nu,
            ic: NseInitialCondition::DivergenceFree,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::validation("nu", format!("must be > 0, got {}", self.nu)));
        }
        Ok(())
    }

    pub fn initial_value(&self, x: &[f64]) -> [f64; 2] {
        let tp = 2.0 * std::f64::consts::PI;
        let u = -(tp * x[1]).sin();
        let v = match self.ic {
            NseInitialCondition::PaperLiteral => (tp * x[1]).cos(),
            NseInitialCondition::DivergenceFree => (tp * x[0]).cos(),
        };
        [u, v]
    }
}

/// `N = −(v·∇)v − ∇p + νΔv` on the snapshot grid, with the pressure chosen
/// so that `N` is divergence-free.
pub fn nse_residual(spec: &NavierStokesSpec, snap: &FieldSnapshot) -> Result<FieldSnapshot> {
    if snap.components != 2 || snap.dim() != 2 {
        return Err(Error::Contract(format!(
            "velocity snapshots are 2D with 2 components, got {}D with {}",
            snap.dim(),
            snap.components
        )));
    }
    let grid = SpectralGrid::for_shape(&snap.shape)?;
    let (nu_hat, nv_hat) = navier_stokes::tendency(
        &grid,
        spec.nu,
        &grid.forward(snap.component(0)),
        &grid.forward(snap.component(1)),
    );
    let mut values = grid.inverse(&nu_hat);
    values.extend(grid.inverse(&nv_hat));
    FieldSnapshot::new(snap.shape.clone(), 2, snap.t, values)
}
