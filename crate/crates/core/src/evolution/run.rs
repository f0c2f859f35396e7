//! Full runs: fit, evolve, sample snapshots, stream diagnostics.

use std::time::Instant;

use super::collocation::CollocationSet;
use super::fit::{fit_initial, FitConfig, FitReport};
use super::residual::ResidualOperator;
use super::stepper::{evolve_step, EvolutionConfig, EvolutionState};
use crate::error::{Error, Result};
use crate::kan::{Network, ParamVector};
use crate::problems::allen_cahn::SavState;
use crate::problems::snapshot::{grid_points, FieldSnapshot};
use crate::problems::{make_initial_condition, ProblemSpec};

/// One diagnostics row. Row 0 describes the initial state and has no
/// direction; row `n` holds the direction computed at step `n − 1` and the
/// energies of the state after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub residual_norm: Option<f64>,
    pub gamma_norm: Option<f64>,
    pub energy: f64,
    pub modified_energy: Option<f64>,
    pub wall_ms: f64,
}

/// Receives results as they are produced so a failed run still leaves its
/// partial trajectory behind.
pub trait RunObserver {
    fn on_fit(&mut self, _report: &FitReport) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _snap: &FieldSnapshot) -> Result<()> {
        Ok(())
    }
    fn on_step(&mut self, _diag: &StepDiagnostics) -> Result<()> {
        Ok(())
    }
}

/// Keeps everything in memory.
#[derive(Debug, Default)]
pub struct Recorder {
    pub fit: Option<FitReport>,
    pub snapshots: Vec<FieldSnapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl RunObserver for Recorder {
    fn on_fit(&mut self, report: &FitReport) -> Result<()> {
        self.fit = Some(report.clone());
        Ok(())
    }
    fn on_snapshot(&mut self, snap: &FieldSnapshot) -> Result<()> {
        self.snapshots.push(snap.clone());
        Ok(())
    }
    fn on_step(&mut self, diag: &StepDiagnostics) -> Result<()> {
        self.diagnostics.push(*diag);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: EvolutionState,
    pub fit_rms: f64,
    /// Steps where the SAV modified energy rose by more than the relative tolerance.
    pub energy_violations: usize,
}

pub struct RunSetup<'a> {
    pub problem: ProblemSpec,
    pub net: &'a Network,
    pub evolution: EvolutionConfig,
    pub fit: FitConfig,
    pub colloc: CollocationSet,
    /// Snapshot grid shape (`[n]` or `[n, n]`).
    pub snapshot_shape: Vec<usize>,
    /// Skip the fit and start from these parameters.
    pub initial_params: Option<ParamVector>,
}

/// Relative per-step tolerance on the SAV modified energy.
pub const MODIFIED_ENERGY_TOLERANCE: f64 = 1e-3;

pub fn sample_snapshot(net: &Network, params: &ParamVector, shape: &[usize], t: f64) -> Result<FieldSnapshot> {
    let pts = grid_points(shape);
    let vals = net.forward_batch(params, &pts)?;
    let m = net.output_dim();
    let n = pts.len();
    let mut values = vec![0.0; n * m];
    for (i, v) in vals.iter().enumerate() {
        for c in 0..m {
            values[c * n + i] = v[c];
        }
    }
    FieldSnapshot::new(shape.to_vec(), m, t, values)
}

pub fn run(setup: RunSetup<'_>, observer: &mut dyn RunObserver) -> Result<RunSummary> {
    let RunSetup {
        problem,
        net,
        evolution: cfg,
        fit,
        mut colloc,
        snapshot_shape,
        initial_params,
    } = setup;
    problem.validate()?;
    cfg.validate()?;
    if snapshot_shape.len() != problem.dim() {
        return Err(Error::Configuration(format!(
            "{}D snapshot grid for a {}D problem",
            snapshot_shape.len(),
            problem.dim()
        )));
    }
    let op = ResidualOperator::from_problem(&problem, cfg.sav)?;
    op.check_compatible(net, &colloc)?;
    colloc.check_count(op.output_dim(), net.n_params());

    let clock = Instant::now();
    let params = match initial_params {
        Some(p) => {
            if p.len() != net.n_params() {
                return Err(Error::validation(
                    "initial parameters",
                    format!("expected {} values, got {}", net.n_params(), p.len()),
                ));
            }
            p
        }
        None => {
            let ic = make_initial_condition(&problem);
            let report = fit_initial(net, net.init_params(fit.seed), ic, &colloc, &fit)?;
            log::info!("initial fit rms = {:.3e} after {} iterations", report.rms, report.iterations);
            observer.on_fit(&report)?;
            report.params
        }
    };
    let fit_rms = {
        let ic = make_initial_condition(&problem);
        let vals = net.forward_batch(&params, colloc.points())?;
        let mut s = 0.0;
        let mut n = 0usize;
        for (p, v) in colloc.points().iter().zip(&vals) {
            for (a, b) in v.iter().zip(ic(p)) {
                s += (a - b) * (a - b);
                n += 1;
            }
        }
        (s / n as f64).sqrt()
    };

    let r0 = op.sav_initial_r(net, &params, &colloc)?;
    let mut state = EvolutionState::new(params, r0.map(|r| SavState { r }));
    let (e0, m0) = op.energies(net, &state.params, &colloc, r0)?;
    observer.on_snapshot(&sample_snapshot(net, &state.params, &snapshot_shape, 0.0)?)?;
    observer.on_step(&StepDiagnostics {
        step: 0,
        t: 0.0,
        residual_norm: None,
        gamma_norm: None,
        energy: e0,
        modified_energy: m0,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
    })?;

    let n_steps = cfg.n_steps();
    let mut last_modified = m0;
    let mut violations = 0;
    for _ in 0..n_steps {
        let t0 = Instant::now();
        let (next, dir) = evolve_step(&state, net, &op, &mut colloc, &cfg)?;
        state = next;
        let r = state.sav.map(|s| s.r);
        let (energy, modified) = op.energies(net, &state.params, &colloc, r)?;
        if let (Some(prev), Some(cur)) = (last_modified, modified) {
            if cur > prev * (1.0 + MODIFIED_ENERGY_TOLERANCE) {
                violations += 1;
                log::warn!("step {}: modified energy rose {prev:.6e} -> {cur:.6e}", state.step);
            }
        }
        last_modified = modified;
        if state.step % cfg.snapshot_every == 0 || state.step == n_steps {
            observer.on_snapshot(&sample_snapshot(net, &state.params, &snapshot_shape, state.t)?)?;
        }
        observer.on_step(&StepDiagnostics {
            step: state.step,
            t: state.t,
            residual_norm: Some(dir.residual_norm),
            gamma_norm: Some(dir.gamma_norm),
            energy,
            modified_energy: modified,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        })?;
    }
    Ok(RunSummary {
        final_state: state,
        fit_rms,
        energy_violations: violations,
    })
}
