//! Layered solution ansatz: Kolmogorov-Arnold layers or a tanh MLP, behind
//! an optional periodic sin/cos input embedding.
//!
//! All trainable scalars live in one flat [`ParamVector`]. For the KAN backend
//! edge `(layer, out, in)` owns `G + k` spline coefficients followed by
//! `w_base` and `w_spline` (the two scales are omitted when fixed). For the MLP
//! backend each layer stores its row-major weight matrix and then its bias.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::edge::{silu_derivs, EdgeFunction};
use super::jet::{JetLayout, JetValue};
use super::knots::{make_knots, KnotVector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Kan,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Embedding {
    Identity,
    /// Each coordinate becomes `(sin(πx/L), cos(πx/L))`, so the network is
    /// `2L`-periodic in every direction.
    PeriodicSinCos { half_period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleMode {
    Trainable,
    /// Edge scales held at fixed values and left out of the parameter vector.
    Fixed { base: f64, spline: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub backend: Backend,
    pub embedding: Embedding,
    /// `[d, hidden.., m]`: spatial dimension, hidden widths, output count.
    pub widths: Vec<usize>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_domain")]
    pub domain: (f64, f64),
    #[serde(default = "default_scales")]
    pub scales: ScaleMode,
    #[serde(default)]
    pub full_hessian: bool,
}

fn default_order() -> usize {
    3
}
fn default_grid() -> usize {
    8
}
fn default_domain() -> (f64, f64) {
    (-1.0, 1.0)
}
fn default_scales() -> ScaleMode {
    ScaleMode::Trainable
}

impl NetworkSpec {
    /// KAN `[d, hidden.., m]` with cubic splines on 8 intervals and a periodic
    /// embedding of half-period 1.
    pub fn kan(widths: Vec<usize>) -> Self {
        NetworkSpec {
            backend: Backend::Kan,
            embedding: Embedding::PeriodicSinCos { half_period: 1.0 },
            widths,
            order: default_order(),
            grid: default_grid(),
            domain: default_domain(),
            scales: ScaleMode::Trainable,
            full_hessian: false,
        }
    }

    pub fn mlp(widths: Vec<usize>) -> Self {
        NetworkSpec {
            backend: Backend::Mlp,
            ..Self::kan(widths)
        }
    }
}

/// Flat, ordered view of every trainable scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn axpy(&mut self, alpha: f64, dir: &[f64]) {
        for (p, d) in self.0.iter_mut().zip(dir) {
            *p += alpha * d;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KanLayer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub edges: Vec<EdgeFunction>,
}

impl KanLayer {
    pub fn edge(&self, out: usize, inp: usize) -> &EdgeFunction {
        &self.edges[out * self.n_in + inp]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpLayer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Kan(KanLayer),
    Mlp(MlpLayer),
}

/// Address of a single trainable scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSlot {
    SplineCoeff {
        layer: usize,
        out: usize,
        inp: usize,
        index: usize,
    },
    BaseScale {
        layer: usize,
        out: usize,
        inp: usize,
    },
    SplineScale {
        layer: usize,
        out: usize,
        inp: usize,
    },
    Weight {
        layer: usize,
        out: usize,
        inp: usize,
    },
    Bias {
        layer: usize,
        out: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    knots: KnotVector,
    /// Widths seen by the layers, after the embedding.
    layer_widths: Vec<usize>,
    offsets: Vec<usize>,
    n_params: usize,
    edge_stride: usize,
}

impl Network {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        if spec.widths.len() < 2 {
            return Err(Error::validation(
                "network.widths",
                "need at least input and output widths",
            ));
        }
        if spec.widths.iter().any(|&w| w == 0) {
            return Err(Error::validation("network.widths", "widths must be positive"));
        }
        if let Embedding::PeriodicSinCos { half_period } = spec.embedding {
            if !(half_period > 0.0 && half_period.is_finite()) {
                return Err(Error::validation(
                    "network.embedding.half_period",
                    "must be positive",
                ));
            }
        }
        let knots = make_knots(spec.domain.0, spec.domain.1, spec.grid, spec.order)?;
        let mut layer_widths = spec.widths.clone();
        if matches!(spec.embedding, Embedding::PeriodicSinCos { .. }) {
            layer_widths[0] *= 2;
        }
        let edge_stride = knots.n_basis()
            + match spec.scales {
                ScaleMode::Trainable => 2,
                ScaleMode::Fixed { .. } => 0,
            };
        let mut offsets = Vec::with_capacity(layer_widths.len());
        let mut total = 0;
        for w in layer_widths.windows(2) {
            offsets.push(total);
            total += match spec.backend {
                Backend::Kan => w[0] * w[1] * edge_stride,
                Backend::Mlp => w[0] * w[1] + w[1],
            };
        }
        offsets.push(total);
        Ok(Network {
            spec,
            knots,
            layer_widths,
            offsets,
            n_params: total,
            edge_stride,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn backend(&self) -> Backend {
        self.spec.backend
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn input_dim(&self) -> usize {
        self.spec.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.spec.widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    fn scales(&self, p: &[f64], off: usize) -> (f64, f64) {
        match self.spec.scales {
            ScaleMode::Trainable => {
                let nb = self.knots.n_basis();
                (p[off + nb], p[off + nb + 1])
            }
            ScaleMode::Fixed { base, spline } => (base, spline),
        }
    }

    fn edge_offset(&self, layer: usize, out: usize, inp: usize) -> usize {
        self.offsets[layer] + (out * self.layer_widths[layer] + inp) * self.edge_stride
    }

    /// Flat position of a parameter, or `None` if it does not exist in this layout.
    pub fn position(&self, slot: ParamSlot) -> Option<usize> {
        let nb = self.knots.n_basis();
        let in_range = |layer: usize, out: usize, inp: usize| {
            layer < self.n_layers()
                && out < self.layer_widths[layer + 1]
                && inp < self.layer_widths[layer]
        };
        let trainable = matches!(self.spec.scales, ScaleMode::Trainable);
        match (self.spec.backend, slot) {
            (
                Backend::Kan,
                ParamSlot::SplineCoeff {
                    layer,
                    out,
                    inp,
                    index,
                },
            ) if in_range(layer, out, inp) && index < nb => {
                Some(self.edge_offset(layer, out, inp) + index)
            }
            (Backend::Kan, ParamSlot::BaseScale { layer, out, inp })
                if trainable && in_range(layer, out, inp) =>
            {
                Some(self.edge_offset(layer, out, inp) + nb)
            }
            (Backend::Kan, ParamSlot::SplineScale { layer, out, inp })
                if trainable && in_range(layer, out, inp) =>
            {
                Some(self.edge_offset(layer, out, inp) + nb + 1)
            }
            (Backend::Mlp, ParamSlot::Weight { layer, out, inp }) if in_range(layer, out, inp) => {
                Some(self.offsets[layer] + out * self.layer_widths[layer] + inp)
            }
            (Backend::Mlp, ParamSlot::Bias { layer, out })
                if layer < self.n_layers() && out < self.layer_widths[layer + 1] =>
            {
                Some(
                    self.offsets[layer]
                        + self.layer_widths[layer] * self.layer_widths[layer + 1]
                        + out,
                )
            }
            _ => None,
        }
    }

    pub fn zero_params(&self) -> ParamVector {
        ParamVector(vec![0.0; self.n_params])
    }

    /// Seeded initialization. KAN: spline coefficients uniform in
    /// `±0.1/√(G+k)` with unit scales. MLP: Glorot-uniform weights, zero bias.
    pub fn init_params(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = vec![0.0; self.n_params];
        match self.spec.backend {
            Backend::Kan => {
                let nb = self.knots.n_basis();
                let amp = 0.1 / (nb as f64).sqrt();
                for l in 0..self.n_layers() {
                    for q in 0..self.layer_widths[l + 1] {
                        for i in 0..self.layer_widths[l] {
                            let off = self.edge_offset(l, q, i);
                            for c in &mut p[off..off + nb] {
                                *c = rng.gen_range(-amp..amp);
                            }
                            if let ScaleMode::Trainable = self.spec.scales {
                                p[off + nb] = 1.0;
                                p[off + nb + 1] = 1.0;
                            }
                        }
                    }
                }
            }
            Backend::Mlp => {
                for l in 0..self.n_layers() {
                    let (ni, no) = (self.layer_widths[l], self.layer_widths[l + 1]);
                    let bound = (6.0 / (ni + no) as f64).sqrt();
                    let off = self.offsets[l];
                    for w in &mut p[off..off + ni * no] {
                        *w = rng.gen_range(-bound..bound);
                    }
                }
            }
        }
        ParamVector(p)
    }

    fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::validation(
                "params",
                format!("length {} but network has {}", params.len(), self.n_params),
            ));
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::validation(
                "point",
                format!("dimension {} but network expects {}", x.len(), self.input_dim()),
            ));
        }
        Ok(())
    }

    /// Structured copy of the parameters.
    pub fn unflatten(&self, params: &ParamVector) -> Result<Vec<LayerParams>> {
        self.check_params(params)?;
        let p = params.as_slice();
        let nb = self.knots.n_basis();
        let layers = (0..self.n_layers())
            .map(|l| {
                let (ni, no) = (self.layer_widths[l], self.layer_widths[l + 1]);
                match self.spec.backend {
                    Backend::Kan => {
                        let mut edges = Vec::with_capacity(ni * no);
                        for q in 0..no {
                            for i in 0..ni {
                                let off = self.edge_offset(l, q, i);
                                let (w_base, w_spline) = self.scales(p, off);
                                edges.push(EdgeFunction {
                                    coeffs: p[off..off + nb].to_vec(),
                                    w_base,
                                    w_spline,
                                });
                            }
                        }
                        LayerParams::Kan(KanLayer {
                            n_in: ni,
                            n_out: no,
                            edges,
                        })
                    }
                    Backend::Mlp => {
                        let off = self.offsets[l];
                        LayerParams::Mlp(MlpLayer {
                            n_in: ni,
                            n_out: no,
                            weights: p[off..off + ni * no].to_vec(),
                            bias: p[off + ni * no..off + ni * no + no].to_vec(),
                        })
                    }
                }
            })
            .collect();
        Ok(layers)
    }

    /// Inverse of [`Network::unflatten`]. Fixed scales are not stored and must
    /// match the network's values.
    pub fn flatten(&self, layers: &[LayerParams]) -> Result<ParamVector> {
        if layers.len() != self.n_layers() {
            return Err(Error::validation("layers", "layer count mismatch"));
        }
        let nb = self.knots.n_basis();
        let mut p = vec![0.0; self.n_params];
        for (l, layer) in layers.iter().enumerate() {
            let (ni, no) = (self.layer_widths[l], self.layer_widths[l + 1]);
            match (self.spec.backend, layer) {
                (Backend::Kan, LayerParams::Kan(k)) => {
                    if k.n_in != ni || k.n_out != no || k.edges.len() != ni * no {
                        return Err(Error::validation("layers", format!("layer {l} shape")));
                    }
                    for q in 0..no {
                        for i in 0..ni {
                            let e = k.edge(q, i);
                            if e.coeffs.len() != nb {
                                return Err(Error::validation(
                                    "layers",
                                    format!("edge ({l},{q},{i}) coefficient count"),
                                ));
                            }
                            let off = self.edge_offset(l, q, i);
                            p[off..off + nb].copy_from_slice(&e.coeffs);
                            match self.spec.scales {
                                ScaleMode::Trainable => {
                                    p[off + nb] = e.w_base;
                                    p[off + nb + 1] = e.w_spline;
                                }
                                ScaleMode::Fixed { base, spline } => {
                                    if e.w_base != base || e.w_spline != spline {
                                        return Err(Error::validation(
                                            "layers",
                                            "edge scales differ from the fixed values",
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
                (Backend::Mlp, LayerParams::Mlp(m)) => {
                    if m.n_in != ni
                        || m.n_out != no
                        || m.weights.len() != ni * no
                        || m.bias.len() != no
                    {
                        return Err(Error::validation("layers", format!("layer {l} shape")));
                    }
                    let off = self.offsets[l];
                    p[off..off + ni * no].copy_from_slice(&m.weights);
                    p[off + ni * no..off + ni * no + no].copy_from_slice(&m.bias);
                }
                _ => return Err(Error::validation("layers", "backend mismatch")),
            }
        }
        Ok(ParamVector(p))
    }

    /// Embedding jets written into `out` (`layer_widths[0]` jets of `layout.stride()`).
    fn embed(&self, x: &[f64], layout: &JetLayout, out: &mut [f64]) {
        let s = layout.stride();
        match self.spec.embedding {
            Embedding::Identity => {
                for (d, &xd) in x.iter().enumerate() {
                    let slot = &mut out[d * s..(d + 1) * s];
                    slot.fill(0.0);
                    slot[0] = xd;
                    if layout.dim > 0 {
                        slot[1 + d] = 1.0;
                    }
                }
            }
            Embedding::PeriodicSinCos { half_period } => {
                let w = std::f64::consts::PI / half_period;
                for (d, &xd) in x.iter().enumerate() {
                    let (sn, cs) = (w * xd).sin_cos();
                    let sin_slot = &mut out[2 * d * s..(2 * d + 1) * s];
                    sin_slot.fill(0.0);
                    sin_slot[0] = sn;
                    if layout.dim > 0 {
                        sin_slot[1 + d] = w * cs;
                        sin_slot[1 + layout.dim + d] = -w * w * sn;
                    }
                    let cos_slot = &mut out[(2 * d + 1) * s..(2 * d + 2) * s];
                    cos_slot.fill(0.0);
                    cos_slot[0] = cs;
                    if layout.dim > 0 {
                        cos_slot[1 + d] = -w * sn;
                        cos_slot[1 + layout.dim + d] = -w * w * cs;
                    }
                }
            }
        }
    }

    /// Jets of every layer's activations; `acts[l]` holds `layer_widths[l]` jets.
    /// With `layout.dim == 0` this is the plain value forward pass.
    fn trace(&self, p: &[f64], x: &[f64], layout: &JetLayout) -> Vec<Vec<f64>> {
        let s = layout.stride();
        let mut acts = Vec::with_capacity(self.layer_widths.len());
        let mut first = vec![0.0; self.layer_widths[0] * s];
        self.embed(x, layout, &mut first);
        acts.push(first);
        let nb = self.knots.n_basis();
        let n_layers = self.n_layers();
        for l in 0..n_layers {
            let (ni, no) = (self.layer_widths[l], self.layer_widths[l + 1]);
            let inp = &acts[l];
            let mut out = vec![0.0; no * s];
            match self.spec.backend {
                Backend::Kan => {
                    for i in 0..ni {
                        let xi = &inp[i * s..(i + 1) * s];
                        let basis = self.knots.active_basis(xi[0]);
                        let (s0, s1, s2) = silu_derivs(xi[0]);
                        for q in 0..no {
                            let off = self.edge_offset(l, q, i);
                            let (wb, ws) = self.scales(p, off);
                            let (b0, b1, b2) = basis.combine(&p[off..off + nb]);
                            layout.accumulate_composed(
                                &mut out[q * s..(q + 1) * s],
                                xi,
                                wb * s0 + ws * b0,
                                wb * s1 + ws * b1,
                                wb * s2 + ws * b2,
                            );
                        }
                    }
                }
                Backend::Mlp => {
                    let off = self.offsets[l];
                    let w = &p[off..off + ni * no];
                    let b = &p[off + ni * no..off + ni * no + no];
                    let last = l + 1 == n_layers;
                    let mut z = vec![0.0; s];
                    for q in 0..no {
                        z.fill(0.0);
                        z[0] = b[q];
                        for i in 0..ni {
                            layout.accumulate_scaled(&mut z, &inp[i * s..(i + 1) * s], w[q * ni + i]);
                        }
                        let dst = &mut out[q * s..(q + 1) * s];
                        if last {
                            dst.copy_from_slice(&z);
                        } else {
                            let t = z[0].tanh();
                            let t1 = 1.0 - t * t;
                            layout.write_composed(dst, &z, t, t1, -2.0 * t * t1);
                        }
                    }
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Network outputs at a spatial point.
    pub fn forward(&self, params: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        self.check_point(x)?;
        let layout = JetLayout::new(0, false);
        Ok(self.trace(params.as_slice(), x, &layout).pop().unwrap())
    }

    /// Outputs with spatial gradients and second derivatives.
    pub fn forward_jet(&self, params: &ParamVector, x: &[f64]) -> Result<Vec<JetValue>> {
        self.check_params(params)?;
        self.check_point(x)?;
        let layout = self.jet_layout();
        let out = self.trace(params.as_slice(), x, &layout).pop().unwrap();
        Ok(out
            .chunks(layout.stride())
            .map(|c| layout.to_value(c))
            .collect())
    }

    pub fn jet_layout(&self) -> JetLayout {
        JetLayout::new(self.input_dim(), self.spec.full_hessian)
    }

    /// Jets at many points, evaluated in parallel with a fixed output order.
    pub fn forward_jet_batch(
        &self,
        params: &ParamVector,
        points: &[Vec<f64>],
    ) -> Result<Vec<Vec<JetValue>>> {
        self.check_params(params)?;
        for x in points {
            self.check_point(x)?;
        }
        let layout = self.jet_layout();
        Ok(points
            .par_iter()
            .map(|x| {
                let out = self.trace(params.as_slice(), x, &layout).pop().unwrap();
                out.chunks(layout.stride())
                    .map(|c| layout.to_value(c))
                    .collect()
            })
            .collect())
    }

    pub fn forward_batch(&self, params: &ParamVector, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check_params(params)?;
        for x in points {
            self.check_point(x)?;
        }
        let layout = JetLayout::new(0, false);
        Ok(points
            .par_iter()
            .map(|x| self.trace(params.as_slice(), x, &layout).pop().unwrap())
            .collect())
    }

    /// Reverse accumulation of `∂û_o/∂K` for every output `o` at one point.
    /// `values` receives the outputs, `rows` the `m × N_K` Jacobian block.
    fn value_and_jacobian_rows(&self, p: &[f64], x: &[f64], values: &mut [f64], rows: &mut [f64]) {
        let layout = JetLayout::new(0, false);
        let acts = self.trace(p, x, &layout);
        let m = self.output_dim();
        values.copy_from_slice(&acts[self.n_layers()]);
        rows.fill(0.0);
        let nb = self.knots.n_basis();
        let n_layers = self.n_layers();
        let trainable = matches!(self.spec.scales, ScaleMode::Trainable);
        for o in 0..m {
            let row = &mut rows[o * self.n_params..(o + 1) * self.n_params];
            let mut adj = vec![0.0; m];
            adj[o] = 1.0;
            for l in (0..n_layers).rev() {
                let (ni, no) = (self.layer_widths[l], self.layer_widths[l + 1]);
                let inp = &acts[l];
                let mut prev = vec![0.0; ni];
                match self.spec.backend {
                    Backend::Kan => {
                        for i in 0..ni {
                            let xi = inp[i];
                            let basis = self.knots.active_basis(xi);
                            let (s0, s1, _) = silu_derivs(xi);
                            let mut acc = 0.0;
                            for q in 0..no {
                                let a = adj[q];
                                let off = self.edge_offset(l, q, i);
                                let (wb, ws) = self.scales(p, off);
                                let (b0, b1, _) = basis.combine(&p[off..off + nb]);
                                let dst = &mut row[off + basis.first..off + basis.first + basis.len];
                                for (d, v) in dst.iter_mut().zip(&basis.values[..basis.len]) {
                                    *d = a * ws * v;
                                }
                                if trainable {
                                    row[off + nb] = a * s0;
                                    row[off + nb + 1] = a * b0;
                                }
                                acc += a * (wb * s1 + ws * b1);
                            }
                            prev[i] = acc;
                        }
                    }
                    Backend::Mlp => {
                        let off = self.offsets[l];
                        let last = l + 1 == n_layers;
                        let outv = &acts[l + 1];
                        let adj_z: Vec<f64> = (0..no)
                            .map(|q| {
                                if last {
                                    adj[q]
                                } else {
                                    adj[q] * (1.0 - outv[q] * outv[q])
                                }
                            })
                            .collect();
                        for q in 0..no {
                            let a = adj_z[q];
                            for i in 0..ni {
                                row[off + q * ni + i] = a * inp[i];
                                prev[i] += a * p[off + q * ni + i];
                            }
                            row[off + ni * no + q] = a;
                        }
                    }
                }
                adj = prev;
            }
        }
    }

    /// Output values and the Jacobian `∂û/∂K` at a set of points.
    ///
    /// Rows are ordered `(point, output)` row-major; columns follow the
    /// parameter layout. Rows are filled in parallel, one block per point.
    pub fn values_and_jacobian(
        &self,
        params: &ParamVector,
        points: &[Vec<f64>],
    ) -> Result<(Vec<f64>, Matrix)> {
        self.check_params(params)?;
        if points.is_empty() {
            return Err(Error::validation("collocation", "empty point set"));
        }
        for x in points {
            self.check_point(x)?;
        }
        let m = self.output_dim();
        let n = self.n_params;
        let mut values = vec![0.0; points.len() * m];
        let mut jac = Matrix::zeros(points.len() * m, n);
        values
            .par_chunks_mut(m)
            .zip(jac.as_mut_slice().par_chunks_mut(m * n))
            .zip(points.par_iter())
            .for_each(|((v, rows), x)| {
                self.value_and_jacobian_rows(params.as_slice(), x, v, rows);
            });
        Ok((values, jac))
    }

    /// `∂û/∂K` at the given points (see [`Network::values_and_jacobian`]).
    pub fn param_jacobian(&self, params: &ParamVector, points: &[Vec<f64>]) -> Result<Matrix> {
        Ok(self.values_and_jacobian(params, points)?.1)
    }
}
