//! Levenberg-Marquardt fit of the network to the initial condition.

use serde::{Deserialize, Serialize};

use super::collocation::CollocationSet;
use super::solve::least_squares_direction;
use crate::error::{Error, Result};
use crate::kan::{Network, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Stop once the RMS misfit drops below this.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_up")]
    pub damping_up: f64,
    #[serde(default = "default_down")]
    pub damping_down: f64,
    /// Seed for the parameter initialization.
    #[serde(default)]
    pub seed: u64,
}

fn default_max_iters() -> usize {
    200
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_damping() -> f64 {
    1e-3
}
fn default_up() -> f64 {
    10.0
}
fn default_down() -> f64 {
    3.0
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: default_max_iters(),
            tolerance: default_tolerance(),
            damping: default_damping(),
            damping_up: default_up(),
            damping_down: default_down(),
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("fit.tolerance", "must be > 0"));
        }
        if !(self.damping > 0.0) {
            return Err(Error::validation("fit.damping", "must be > 0"));
        }
        if !(self.damping_up > 1.0) || !(self.damping_down > 1.0) {
            return Err(Error::validation("fit.damping_up", "damping factors must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitIteration {
    pub iteration: usize,
    pub rms: f64,
    pub damping: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: ParamVector,
    pub rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<FitIteration>,
}

fn misfit(net: &Network, params: &ParamVector, colloc: &CollocationSet, target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let vals = net.forward_batch(params, colloc.points())?;
    let e: Vec<f64> = vals.iter().flatten().zip(target).map(|(v, t)| t - v).collect();
    let rms = (e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64).sqrt();
    Ok((e, rms))
}

/// Minimize `Σ_i ‖û(x_i) − f(x_i)‖²` starting from `init`.
///
/// Not reaching `tolerance` is not an error: the best parameters are returned
/// with `converged = false`.
pub fn fit_initial<F>(
    net: &Network,
    init: ParamVector,
    ic: F,
    colloc: &CollocationSet,
    cfg: &FitConfig,
) -> Result<FitReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    let m = net.output_dim();
    let target: Vec<f64> = colloc
        .points()
        .iter()
        .flat_map(|p| {
            let v = ic(p);
            assert_eq!(v.len(), m, "initial condition has the wrong number of components");
            v
        })
        .collect();
    let mut params = init;
    let (_, mut rms) = misfit(net, &params, colloc, &target)?;
    let mut damping = cfg.damping;
    let mut history = vec![FitIteration {
        iteration: 0,
        rms,
        damping,
        accepted: true,
    }];
    let mut iterations = 0;
    while iterations < cfg.max_iters && rms >= cfg.tolerance {
        iterations += 1;
        let (vals, jac) = net.values_and_jacobian(&params, colloc.points())?;
        let e: Vec<f64> = vals.iter().zip(&target).map(|(v, t)| t - v).collect();
        let mut accepted = false;
        // Raise the damping until a step decreases the loss.
        for _ in 0..12 {
            let delta = match least_squares_direction(&jac, &e, damping) {
                Ok(d) => d,
                Err(Error::Singular(_)) => {
                    damping *= cfg.damping_up;
                    continue;
                }
                Err(err) => return Err(err),
            };
            let mut trial = params.clone();
            trial.axpy(1.0, &delta);
            let (_, trial_rms) = misfit(net, &trial, colloc, &target)?;
            if trial_rms.is_finite() && trial_rms < rms {
                params = trial;
                rms = trial_rms;
                damping = (damping / cfg.damping_down).max(1e-15);
                accepted = true;
                break;
            }
            damping *= cfg.damping_up;
        }
        history.push(FitIteration {
            iteration: iterations,
            rms,
            damping,
            accepted,
        });
        if !accepted {
            log::warn!("fit stalled at iteration {iterations}, rms = {rms:.3e}");
            break;
        }
    }
    let converged = rms < cfg.tolerance;
    if !converged {
        log::warn!("initial fit stopped at rms = {rms:.3e} after {iterations} iterations");
    }
    Ok(FitReport {
        params,
        rms,
        iterations,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kan::NetworkSpec;

    #[test]
    fn zero_target_from_zero_network() {
        let net = Network::new(NetworkSpec::kan(vec![1, 3, 1])).unwrap();
        let colloc = CollocationSet::uniform_grid(32, 1).unwrap();
        let rep = fit_initial(&net, net.zero_params(), |_| vec![0.0], &colloc, &FitConfig::default()).unwrap();
        assert_eq!(rep.rms, 0.0);
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
    }

    #[test]
    fn fits_a_sine() {
        let net = Network::new(NetworkSpec::kan(vec![1, 4, 1])).unwrap();
        let colloc = CollocationSet::uniform_grid(64, 1).unwrap();
        let pi = std::f64::consts::PI;
        let cfg = FitConfig {
            max_iters: 100,
            ..FitConfig::default()
        };
        let rep = fit_initial(&net, net.init_params(1), |x| vec![0.25 * (pi * x[0]).sin()], &colloc, &cfg).unwrap();
        assert!(rep.rms < 1e-4, "{}", rep.rms);
    }
}
