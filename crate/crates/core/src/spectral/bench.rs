//! Reference trajectories: run a spectral solver at reference resolution and
//! hand back snapshots truncated onto the comparison grid.

use serde::{Deserialize, Serialize};

use super::allen_cahn::{ac_spectral_step_imex, ac_spectral_step_sav, AcSpectralState};
use super::grid::SpectralGrid;
use super::navier_stokes::{nse_spectral_step, vorticity, NseSpectralState};
use crate::error::{Error, Result};
use crate::problems::allen_cahn::ac_energy;
use crate::problems::snapshot::FieldSnapshot;
use crate::problems::ProblemSpec;

pub const DEFAULT_REFERENCE_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AcScheme {
    #[default]
    Imex,
    Sav,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Points per axis; defaults to 512 (1D AC), 256 (2D AC), 128 (NSE).
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Defaults to `1e-4`, lowered to `ε²/2` for Allen-Cahn so the explicit
    /// cubic term stays stable.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub scheme: AcScheme,
}

impl BenchmarkConfig {
    pub fn resolution_for(&self, problem: &ProblemSpec) -> usize {
        self.resolution.unwrap_or(match problem {
            ProblemSpec::AllenCahn(s) if s.dim == 1 => 512,
            ProblemSpec::AllenCahn(_) => 256,
            ProblemSpec::NavierStokes(_) => 128,
        })
    }

    pub fn dt_for(&self, problem: &ProblemSpec) -> f64 {
        self.dt.unwrap_or(match problem {
            ProblemSpec::AllenCahn(s) => DEFAULT_REFERENCE_DT.min(0.5 * s.epsilon * s.epsilon),
            ProblemSpec::NavierStokes(_) => DEFAULT_REFERENCE_DT,
        })
    }

    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::validation("benchmark.dt", format!("must be > 0, got {dt}")));
            }
        }
        let n = self.resolution_for(problem);
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::validation(
                "benchmark.resolution",
                format!("must be a power of two >= 16, got {n}"),
            ));
        }
        if self.scheme == AcScheme::Sav && matches!(problem, ProblemSpec::NavierStokes(_)) {
            return Err(Error::validation("benchmark.scheme", "the SAV scheme is for Allen-Cahn only"));
        }
        Ok(())
    }
}

/// One row of the energy trace, taken at every output time.
///
/// Allen-Cahn: `(E_total, E₁, modified)`, the last only for the SAV scheme.
/// Navier-Stokes: `(kinetic energy, enstrophy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub secondary: f64,
    pub modified: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    /// Snapshots on the comparison grid, one per requested time.
    pub snapshots: Vec<FieldSnapshot>,
    /// Energies of the reference-resolution field at the same times.
    pub trace: Vec<TraceRow>,
    pub resolution: usize,
    pub dt: f64,
}

/// Truncate every component of `snap` onto an `n`-point-per-axis grid.
pub fn downsample(snap: &FieldSnapshot, n: usize) -> Result<FieldSnapshot> {
    let fine = SpectralGrid::for_shape(&snap.shape)?;
    let coarse = SpectralGrid::new(n, snap.dim())?;
    let mut values = Vec::with_capacity(coarse.len() * snap.components);
    for c in 0..snap.components {
        let coeffs = fine.truncate_to(&fine.forward(snap.component(c)), &coarse)?;
        values.extend(coarse.inverse(&coeffs));
    }
    FieldSnapshot::new(coarse.shape(), snap.components, snap.t, values)
}

/// Map output times onto whole step counts of `dt`.
fn step_indices(times: &[f64], dt: f64) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let s = (t / dt).round();
        if !(t >= 0.0) || (s * dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Configuration(format!(
                "output time {t} is not a whole number of reference steps of {dt}"
            )));
        }
        if let Some(&prev) = out.last() {
            if (s as usize) < prev {
                return Err(Error::Configuration("output times must be non-decreasing".into()));
            }
        }
        out.push(s as usize);
    }
    Ok(out)
}

fn nse_row(snap: &FieldSnapshot) -> Result<TraceRow> {
    let dv = snap.cell_volume();
    let kinetic = 0.5 * snap.values.iter().map(|v| v * v).sum::<f64>() * dv;
    let w = vorticity(snap)?;
    let enstrophy = 0.5 * w.values.iter().map(|v| v * v).sum::<f64>() * dv;
    Ok(TraceRow {
        t: snap.t,
        energy: kinetic,
        secondary: enstrophy,
        modified: None,
    })
}

/// Reference trajectory of `problem` sampled at `times` on an `n_compare` grid.
pub fn run_benchmark(
    problem: &ProblemSpec,
    cfg: &BenchmarkConfig,
    times: &[f64],
    n_compare: usize,
) -> Result<Benchmark> {
    problem.validate()?;
    cfg.validate(problem)?;
    let n = cfg.resolution_for(problem);
    if n_compare > n {
        return Err(Error::Configuration(format!(
            "comparison grid {n_compare} is finer than the reference grid {n}"
        )));
    }
    let dt = cfg.dt_for(problem);
    let steps = step_indices(times, dt)?;
    let grid = SpectralGrid::new(n, problem.dim())?;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut trace = Vec::with_capacity(times.len());
    let mut emit = |mut snap: FieldSnapshot, t: f64, row: TraceRow| -> Result<()> {
        snap.t = t;
        snapshots.push(downsample(&snap, n_compare)?);
        trace.push(TraceRow { t, ..row });
        Ok(())
    };
    match problem {
        ProblemSpec::AllenCahn(spec) => {
            let mut state = AcSpectralState::from_initial_condition(grid, spec);
            let mut done = 0;
            for (&target, &t) in steps.iter().zip(times) {
                while done < target {
                    match cfg.scheme {
                        AcScheme::Imex => ac_spectral_step_imex(&mut state, spec, dt)?,
                        AcScheme::Sav => ac_spectral_step_sav(&mut state, spec, dt)?,
                    }
                    done += 1;
                }
                let snap = state.snapshot();
                let (energy, e1) = ac_energy(spec, &snap)?;
                let modified = (cfg.scheme == AcScheme::Sav).then(|| state.modified_energy(spec));
                emit(
                    snap,
                    t,
                    TraceRow {
                        t,
                        energy,
                        secondary: e1,
                        modified,
                    },
                )?;
            }
        }
        ProblemSpec::NavierStokes(spec) => {
            let pts = grid.points();
            let iv: Vec<[f64; 2]> = pts.iter().map(|p| spec.initial_value(p)).collect();
            let u: Vec<f64> = iv.iter().map(|v| v[0]).collect();
            let v: Vec<f64> = iv.iter().map(|v| v[1]).collect();
            let mut state = NseSpectralState::new(grid, &u, &v);
            let mut done = 0;
            for (&target, &t) in steps.iter().zip(times) {
                while done < target {
                    nse_spectral_step(&mut state, spec.nu, dt)?;
                    done += 1;
                }
                let snap = state.snapshot();
                let row = nse_row(&snap)?;
                emit(snap, t, row)?;
            }
        }
    }
    Ok(Benchmark {
        snapshots,
        trace,
        resolution: n,
        dt,
    })
}
