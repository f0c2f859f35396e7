//! PDE right-hand sides evaluated on a network at collocation points.

use crate::error::{Error, Result};
use crate::evolution::collocation::CollocationSet;
use crate::kan::{JetValue, Network, ParamVector};
use crate::linalg::Matrix;
use crate::problems::allen_cahn::{ac_residual, AllenCahnSpec};
use crate::problems::navier_stokes::{nse_residual, NavierStokesSpec};
use crate::problems::snapshot::FieldSnapshot;
use crate::problems::{ProblemSpec, BLOWUP_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualOperator {
    /// Direct residual `ε²Δu − g(u)`, or the SAV form `ε²Δu − (r/√E₁) g(u)`.
    AllenCahn { spec: AllenCahnSpec, sav: bool },
    NavierStokes { spec: NavierStokesSpec },
    /// `u_t = κΔu`, linear and energy-free; used to check the projection.
    Heat { diffusivity: f64 },
}

/// Where a residual evaluation happens, for blow-up reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepContext {
    pub step: usize,
    pub t: f64,
}

impl StepContext {
    fn blow_up(&self, detail: String) -> Error {
        Error::BlowUp {
            step: self.step,
            t: self.t,
            detail,
        }
    }
}

/// Everything one direction solve needs.
#[derive(Debug, Clone)]
pub struct Linearization {
    /// Network outputs, `(point, output)` order.
    pub values: Vec<f64>,
    pub jacobian: Matrix,
    /// `N` at the collocation points, same order as `values`.
    pub rhs: Vec<f64>,
    /// SAV only: `w U(u_i) / (2√E₁)` so that `r_t = Σ_i sav_weights_i (Jγ)_i`.
    pub sav_weights: Option<Vec<f64>>,
}

impl ResidualOperator {
    pub fn from_problem(problem: &ProblemSpec, sav: bool) -> Result<Self> {
        match problem {
            ProblemSpec::AllenCahn(spec) => Ok(ResidualOperator::AllenCahn { spec: *spec, sav }),
            ProblemSpec::NavierStokes(spec) => {
                if sav {
                    return Err(Error::validation(
                        "evolution.sav",
                        "the SAV form is only defined for Allen-Cahn",
                    ));
                }
                Ok(ResidualOperator::NavierStokes { spec: *spec })
            }
        }
    }

    pub fn is_sav(&self) -> bool {
        matches!(self, ResidualOperator::AllenCahn { sav: true, .. })
    }

    pub fn output_dim(&self) -> usize {
        match self {
            ResidualOperator::NavierStokes { .. } => 2,
            _ => 1,
        }
    }

    /// Check that the network and collocation set can carry this residual.
    pub fn check_compatible(&self, net: &Network, colloc: &CollocationSet) -> Result<()> {
        if net.output_dim() != self.output_dim() {
            return Err(Error::Configuration(format!(
                "residual needs {} network outputs, network has {}",
                self.output_dim(),
                net.output_dim()
            )));
        }
        if net.input_dim() != colloc.dim() {
            return Err(Error::Configuration(format!(
                "{}D network on {}D collocation points",
                net.input_dim(),
                colloc.dim()
            )));
        }
        if let ResidualOperator::AllenCahn { spec, .. } = self {
            if spec.dim != net.input_dim() {
                return Err(Error::Configuration(format!(
                    "{}D Allen-Cahn problem with a {}D network",
                    spec.dim,
                    net.input_dim()
                )));
            }
        }
        if let ResidualOperator::NavierStokes { .. } = self {
            match colloc.grid_shape() {
                Some(shape) if shape.len() == 2 && shape[0].is_power_of_two() => {}
                _ => {
                    return Err(Error::Configuration(
                        "Navier-Stokes needs collocation on a power-of-two uniform grid".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// Evaluate `N`, the output Jacobian and (SAV) the `r_t` weights.
    /// `r` is required in SAV mode.
    pub fn linearize(
        &self,
        net: &Network,
        params: &ParamVector,
        colloc: &CollocationSet,
        r: Option<f64>,
        ctx: StepContext,
    ) -> Result<Linearization> {
        let (values, jacobian) = net.values_and_jacobian(params, colloc.points())?;
        check_values(&values, ctx)?;
        let w = colloc.weight();
        let (rhs, sav_weights) = match self {
            ResidualOperator::AllenCahn { spec, sav } => {
                let jets = net.forward_jet_batch(params, colloc.points())?;
                let u: Vec<f64> = jets.iter().map(|j| j[0].value).collect();
                let ratio = if *sav {
                    let r = r.ok_or_else(|| Error::Contract("SAV residual needs r".into()))?;
                    if !(r > 0.0) {
                        return Err(Error::Contract(format!("auxiliary variable must be positive, r = {r}")));
                    }
                    r / spec.gradient_flow().nonlinear_energy(&u, w).sqrt()
                } else {
                    1.0
                };
                let eps2 = spec.epsilon * spec.epsilon;
                let rhs = jets
                    .iter()
                    .map(|j| {
                        if *sav {
                            Ok(eps2 * j[0].laplacian() - ratio * spec.g(j[0].value))
                        } else {
                            ac_residual(spec, &j[0])
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let weights = if *sav {
                    let e1 = spec.gradient_flow().nonlinear_energy(&u, w);
                    let scale = w / (2.0 * e1.sqrt());
                    Some(u.iter().map(|&v| scale * spec.g(v)).collect())
                } else {
                    None
                };
                (rhs, weights)
            }
            ResidualOperator::NavierStokes { spec } => {
                let shape = colloc
                    .grid_shape()
                    .ok_or_else(|| Error::Configuration("Navier-Stokes needs grid collocation".into()))?;
                let n = colloc.len();
                let mut comp = vec![0.0; 2 * n];
                for i in 0..n {
                    comp[i] = values[2 * i];
                    comp[n + i] = values[2 * i + 1];
                }
                let snap = FieldSnapshot::new(shape, 2, ctx.t, comp)?;
                let res = nse_residual(spec, &snap)?;
                let mut rhs = vec![0.0; 2 * n];
                for i in 0..n {
                    rhs[2 * i] = res.values[i];
                    rhs[2 * i + 1] = res.values[n + i];
                }
                (rhs, None)
            }
            ResidualOperator::Heat { diffusivity } => {
                let jets = net.forward_jet_batch(params, colloc.points())?;
                (jets.iter().map(|j| diffusivity * j[0].laplacian()).collect(), None)
            }
        };
        if let Some(i) = rhs.iter().position(|v| !v.is_finite()) {
            return Err(ctx.blow_up(format!("non-finite residual at row {i}")));
        }
        Ok(Linearization {
            values,
            jacobian,
            rhs,
            sav_weights,
        })
    }

    /// `(energy, modified energy)` by collocation quadrature.
    ///
    /// Allen-Cahn: `∫ ½ε²|∇u|² + G(u)`; SAV adds `½∫ε²|∇u|² + r²`.
    /// Navier-Stokes: kinetic energy `½∫|v|²`. Heat: `½∫u²`.
    pub fn energies(
        &self,
        net: &Network,
        params: &ParamVector,
        colloc: &CollocationSet,
        r: Option<f64>,
    ) -> Result<(f64, Option<f64>)> {
        let w = colloc.weight();
        match self {
            ResidualOperator::AllenCahn { spec, sav } => {
                let jets = net.forward_jet_batch(params, colloc.points())?;
                let eps2 = spec.epsilon * spec.epsilon;
                let grad2 = |j: &JetValue| j.grad.iter().map(|g| g * g).sum::<f64>();
                let quad: f64 = jets.iter().map(|j| 0.5 * eps2 * grad2(&j[0])).sum::<f64>() * w;
                let pot: f64 = jets.iter().map(|j| spec.potential(j[0].value)).sum::<f64>() * w;
                let modified = match (sav, r) {
                    (true, Some(r)) => Some(quad + r * r),
                    _ => None,
                };
                Ok((quad + pot, modified))
            }
            ResidualOperator::NavierStokes { .. } | ResidualOperator::Heat { .. } => {
                let vals = net.forward_batch(params, colloc.points())?;
                let e: f64 = vals.iter().flatten().map(|v| 0.5 * v * v).sum::<f64>() * w;
                Ok((e, None))
            }
        }
    }

    /// `√E₁` at the collocation points (SAV initialization).
    pub fn sav_initial_r(&self, net: &Network, params: &ParamVector, colloc: &CollocationSet) -> Result<Option<f64>> {
        match self {
            ResidualOperator::AllenCahn { spec, sav: true } => {
                let vals = net.forward_batch(params, colloc.points())?;
                let u: Vec<f64> = vals.iter().map(|v| v[0]).collect();
                Ok(Some(spec.gradient_flow().nonlinear_energy(&u, colloc.weight()).sqrt()))
            }
            _ => Ok(None),
        }
    }
}

fn check_values(values: &[f64], ctx: StepContext) -> Result<()> {
    let mut worst = 0.0f64;
    for &v in values {
        if !v.is_finite() {
            return Err(ctx.blow_up("non-finite network output".into()));
        }
        worst = worst.max(v.abs());
    }
    if worst > BLOWUP_LIMIT {
        return Err(ctx.blow_up(format!("max |u| = {worst:.3e} exceeds {BLOWUP_LIMIT}")));
    }
    Ok(())
}
