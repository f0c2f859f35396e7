//! Evolution of network parameters: `K' = γ̂(K)` where `γ̂` is the
//! least-squares projection of the PDE right-hand side onto the tangent
//! space spanned by the output Jacobian.

pub mod collocation;
pub mod fit;
pub mod residual;
pub mod run;
pub mod solve;
pub mod stepper;

pub use collocation::{CollocationMode, CollocationSet};
pub use fit::{fit_initial, FitConfig, FitIteration, FitReport};
pub use residual::{Linearization, ResidualOperator, StepContext};
pub use run::{run, sample_snapshot, Recorder, RunObserver, RunSetup, RunSummary, StepDiagnostics};
pub use solve::{least_squares_direction, normal_system, solve_direction};
pub use stepper::{
    compute_direction, evolve_step, integrate, Direction, EvolutionConfig, EvolutionState, Integrator,
};
