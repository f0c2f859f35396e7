//! PDE definitions: residual operators, energies and initial conditions.
//!
//! Sign convention: every residual `N` is the full right-hand side of
//! `u_t = N(u)`.

pub mod allen_cahn;
pub mod navier_stokes;
pub mod snapshot;

pub use allen_cahn::{
    ac_energy, ac_residual, sav_init, sav_mu, sav_rhs, AllenCahnSpec, GradientFlowForm, SavState,
};
pub use navier_stokes::{nse_residual, NavierStokesSpec, NseInitialCondition};
pub use snapshot::FieldSnapshot;

use crate::error::Result;

/// Runs abort once any field value exceeds this magnitude.
pub const BLOWUP_LIMIT: f64 = 10.0;

/// A fully specified problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemSpec {
    AllenCahn(AllenCahnSpec),
    NavierStokes(NavierStokesSpec),
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProblemSpec::AllenCahn(s) => s.dim,
            ProblemSpec::NavierStokes(_) => 2,
        }
    }

    pub fn components(&self) -> usize {
        match self {
            ProblemSpec::AllenCahn(_) => 1,
            ProblemSpec::NavierStokes(_) => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProblemSpec::AllenCahn(s) => s.validate(),
            ProblemSpec::NavierStokes(s) => s.validate(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ProblemSpec::AllenCahn(s) if s.dim == 1 => "ac1d",
            ProblemSpec::AllenCahn(_) => "ac2d",
            ProblemSpec::NavierStokes(_) => "nse2d",
        }
    }
}

/// Initial condition as a closure returning one value per component.
pub fn make_initial_condition(problem: &ProblemSpec) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync {
    let p = *problem;
    move |x: &[f64]| match &p {
        ProblemSpec::AllenCahn(s) => vec![s.initial_value(x)],
        ProblemSpec::NavierStokes(s) => s.initial_value(x).to_vec(),
    }
}
