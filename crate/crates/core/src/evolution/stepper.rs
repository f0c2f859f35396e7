//! Time stepping of the parameter ODE `K' = γ̂(K)`.

use serde::{Deserialize, Serialize};

use super::collocation::CollocationSet;
use super::residual::{ResidualOperator, StepContext};
use super::solve::least_squares_direction;
use crate::error::{Error, Result};
use crate::kan::{Network, ParamVector};
use crate::linalg::{dot, norm2};
use crate::problems::allen_cahn::SavState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

pub const DEFAULT_LAMBDA: f64 = 1e-8;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 10;

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub sav: bool,
    /// Snapshot every this many steps (the final state is always kept).
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        EvolutionConfig {
            dt,
            t_final,
            integrator: Integrator::Rk4,
            lambda: DEFAULT_LAMBDA,
            sav: false,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation("evolution.dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::validation(
                "evolution.t_final",
                format!("must be >= dt = {}, got {}", self.dt, self.t_final),
            ));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::validation(
                "evolution.t_final",
                format!("must be a whole number of steps of {}", self.dt),
            ));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::validation("evolution.lambda", "must be >= 0"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::validation("evolution.snapshot_every", "must be >= 1"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Step numbers that produce a snapshot: every `snapshot_every`-th step
    /// from 0, plus the last one.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut s: Vec<usize> = (0..=n).step_by(self.snapshot_every).collect();
        if s.last() != Some(&n) {
            s.push(n);
        }
        s
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshot_steps().iter().map(|&s| s as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub params: ParamVector,
    pub sav: Option<SavState>,
    pub t: f64,
    pub step: usize,
}

impl EvolutionState {
    pub fn new(params: ParamVector, sav: Option<SavState>) -> Self {
        EvolutionState {
            params,
            sav,
            t: 0.0,
            step: 0,
        }
    }
}

/// The vector field at one parameter state.
#[derive(Debug, Clone)]
pub struct Direction {
    pub gamma: Vec<f64>,
    /// SAV only.
    pub r_t: Option<f64>,
    /// `‖Jγ − N‖₂`.
    pub residual_norm: f64,
    pub gamma_norm: f64,
    /// `‖N‖₂`, the objective at `γ = 0`.
    pub rhs_norm: f64,
}

/// `γ̂ = argmin ‖Jγ − N‖² + λ s‖γ‖²` at `params`.
pub fn compute_direction(
    net: &Network,
    op: &ResidualOperator,
    colloc: &CollocationSet,
    params: &ParamVector,
    r: Option<f64>,
    lambda: f64,
    ctx: StepContext,
) -> Result<Direction> {
    let lin = op.linearize(net, params, colloc, r, ctx)?;
    let gamma = least_squares_direction(&lin.jacobian, &lin.rhs, lambda)?;
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::BlowUp {
            step: ctx.step,
            t: ctx.t,
            detail: "non-finite direction".into(),
        });
    }
    let jg = lin.jacobian.matvec(&gamma);
    let misfit: Vec<f64> = jg.iter().zip(&lin.rhs).map(|(a, b)| a - b).collect();
    let residual_norm = norm2(&misfit);
    let rhs_norm = norm2(&lin.rhs);
    if residual_norm > rhs_norm * (1.0 + 1e-10) + 1e-300 {
        log::warn!(
            "step {}: direction increased the objective ({residual_norm:.3e} > {rhs_norm:.3e})",
            ctx.step
        );
    }
    let r_t = lin.sav_weights.as_ref().map(|w| dot(w, &jg));
    Ok(Direction {
        gamma_norm: norm2(&gamma),
        gamma,
        r_t,
        residual_norm,
        rhs_norm,
    })
}

/// One explicit step of `y' = f(y)`.
pub fn integrate<F>(integrator: Integrator, y: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], usize) -> Result<Vec<f64>>,
{
    let axpy = |base: &[f64], a: f64, k: &[f64]| -> Vec<f64> {
        base.iter().zip(k).map(|(b, k)| b + a * k).collect()
    };
    match integrator {
        Integrator::Euler => {
            let k1 = f(y, 0)?;
            Ok(axpy(y, dt, &k1))
        }
        Integrator::Rk4 => {
            let k1 = f(y, 0)?;
            let k2 = f(&axpy(y, 0.5 * dt, &k1), 1)?;
            let k3 = f(&axpy(y, 0.5 * dt, &k2), 2)?;
            let k4 = f(&axpy(y, dt, &k3), 3)?;
            Ok(y
                .iter()
                .enumerate()
                .map(|(i, &v)| v + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        }
    }
}

/// Advance one step. Returns the new state and the direction at the old one.
pub fn evolve_step(
    state: &EvolutionState,
    net: &Network,
    op: &ResidualOperator,
    colloc: &mut CollocationSet,
    cfg: &EvolutionConfig,
) -> Result<(EvolutionState, Direction)> {
    let np = state.params.len();
    let mut y = state.params.0.clone();
    if let Some(s) = state.sav {
        y.push(s.r);
    }
    let ctx = StepContext {
        step: state.step,
        t: state.t,
    };
    let mut first: Option<Direction> = None;
    let colloc_ref: &CollocationSet = colloc;
    let next = integrate(cfg.integrator, &y, cfg.dt, |z, stage| {
        let params = ParamVector(z[..np].to_vec());
        let r = if z.len() > np { Some(z[np]) } else { None };
        let d = compute_direction(net, op, colloc_ref, &params, r, cfg.lambda, ctx)?;
        let mut out = d.gamma.clone();
        if let Some(rt) = d.r_t {
            out.push(rt);
        }
        if stage == 0 {
            first = Some(d);
        }
        Ok(out)
    })?;
    let step = state.step + 1;
    let sav = state.sav.map(|_| SavState { r: next[np] });
    if let Some(s) = sav {
        if !(s.r > 0.0) || !s.r.is_finite() {
            return Err(Error::BlowUp {
                step,
                t: step as f64 * cfg.dt,
                detail: format!("auxiliary variable left (0, inf): r = {}", s.r),
            });
        }
    }
    colloc.advance(step);
    Ok((
        EvolutionState {
            params: ParamVector(next[..np].to_vec()),
            sav,
            t: step as f64 * cfg.dt,
            step,
        },
        first.expect("integrator evaluates the first stage"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_on_linear_decay() {
        let mut y = vec![1.0, -2.0];
        for _ in 0..10 {
            y = integrate(Integrator::Rk4, &y, 0.1, |z, _| Ok(z.iter().map(|v| -v).collect())).unwrap();
        }
        // RK4 amplification factor for y' = -y is the degree-4 Taylor polynomial.
        let h: f64 = 0.1;
        let amp = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        let exact = amp.powi(10);
        assert!((y[0] - exact).abs() < 1e-15);
        assert!((y[1] + 2.0 * exact).abs() < 1e-15);
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig::new(0.0, 1.0).validate().is_err());
        assert!(EvolutionConfig::new(0.1, 0.05).validate().is_err());
        assert!(EvolutionConfig::new(0.3, 1.0).validate().is_err());
        let c = EvolutionConfig::new(1e-3, 1.0);
        c.validate().unwrap();
        assert_eq!(c.n_steps(), 1000);
        let mut c = EvolutionConfig::new(0.1, 0.5);
        c.snapshot_every = 2;
        assert_eq!(c.snapshot_steps(), vec![0, 2, 4, 5]);
    }
}
