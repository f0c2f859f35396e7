//! Pseudo-spectral reference solvers on periodic boxes.

pub mod allen_cahn;
pub mod bench;
pub mod grid;
pub mod navier_stokes;

pub use allen_cahn::{ac_spectral_step_imex, ac_spectral_step_sav, AcSpectralState};
pub use bench::{downsample, run_benchmark, AcScheme, Benchmark, BenchmarkConfig, TraceRow};
pub use grid::SpectralGrid;
pub use navier_stokes::{max_divergence, nse_spectral_step, pressure, vorticity, NseSpectralState};
pub use rustfft::num_complex::Complex64;
