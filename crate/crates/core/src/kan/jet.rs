//! Second-order forward-mode jets over spatial coordinates.
//!
//! A jet stores `u`, `∂u/∂x_d` and `∂²u/∂x_d²` for each of `dim` coordinates,
//! plus the mixed partials `∂²u/∂x_a∂x_b` (a < b) when full Hessians are on.
//! Internally jets live in flat slices laid out as
//! `[value, grad.., pure.., cross..]` so layer buffers need no per-node allocation.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetLayout {
    pub dim: usize,
    pub cross: bool,
}

impl JetLayout {
    pub fn new(dim: usize, cross: bool) -> Self {
        JetLayout { dim, cross }
    }

    pub fn n_cross(&self) -> usize {
        if self.cross {
            self.dim * self.dim.saturating_sub(1) / 2
        } else {
            0
        }
    }

    pub fn stride(&self) -> usize {
        1 + 2 * self.dim + self.n_cross()
    }

    /// Jet of the coordinate function `x_coord` evaluated at `value`.
    pub fn write_variable(&self, out: &mut [f64], value: f64, coord: usize) {
        out.fill(0.0);
        out[0] = value;
        out[1 + coord] = 1.0;
    }

    /// `out += f ∘ inp`, given `f(v), f'(v), f''(v)` at the input value `v`.
    #[inline]
    pub fn accumulate_composed(&self, out: &mut [f64], inp: &[f64], f0: f64, f1: f64, f2: f64) {
        let d = self.dim;
        out[0] += f0;
        for a in 0..d {
            let g = inp[1 + a];
            out[1 + a] += f1 * g;
            out[1 + d + a] += f2 * g * g + f1 * inp[1 + d + a];
        }
        if self.cross {
            let base = 1 + 2 * d;
            let mut idx = base;
            for a in 0..d {
                for b in a + 1..d {
                    out[idx] += f2 * inp[1 + a] * inp[1 + b] + f1 * inp[idx];
                    idx += 1;
                }
            }
        }
    }

    /// Overwrite `out` with `f ∘ inp`.
    #[inline]
    pub fn write_composed(&self, out: &mut [f64], inp: &[f64], f0: f64, f1: f64, f2: f64) {
        out.fill(0.0);
        self.accumulate_composed(out, inp, f0, f1, f2);
    }

    /// `out += scale · inp` (linear combination of jets).
    #[inline]
    pub fn accumulate_scaled(&self, out: &mut [f64], inp: &[f64], scale: f64) {
        for (o, i) in out.iter_mut().zip(inp) {
            *o += scale * i;
        }
    }

    pub fn to_value(&self, flat: &[f64]) -> JetValue {
        let d = self.dim;
        JetValue {
            value: flat[0],
            grad: flat[1..1 + d].to_vec(),
            second: flat[1 + d..1 + 2 * d].to_vec(),
            cross: if self.cross {
                Some(flat[1 + 2 * d..self.stride()].to_vec())
            } else {
                None
            },
        }
    }

    pub fn from_value(&self, jet: &JetValue, out: &mut [f64]) {
        let d = self.dim;
        out.fill(0.0);
        out[0] = jet.value;
        out[1..1 + d].copy_from_slice(&jet.grad);
        out[1 + d..1 + 2 * d].copy_from_slice(&jet.second);
        if let (true, Some(c)) = (self.cross, jet.cross.as_ref()) {
            out[1 + 2 * d..self.stride()].copy_from_slice(c);
        }
    }
}

/// A scalar together with its spatial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct JetValue {
    pub value: f64,
    /// `∂u/∂x_d`.
    pub grad: Vec<f64>,
    /// Pure second derivatives `∂²u/∂x_d²`.
    pub second: Vec<f64>,
    /// Mixed partials ordered `(0,1), (0,2), .., (1,2), ..` when enabled.
    pub cross: Option<Vec<f64>>,
}

impl JetValue {
    pub fn constant(value: f64, dim: usize) -> Self {
        JetValue {
            value,
            grad: vec![0.0; dim],
            second: vec![0.0; dim],
            cross: None,
        }
    }

    /// The coordinate `x_coord` seen as a function of all `dim` coordinates.
    pub fn variable(value: f64, coord: usize, dim: usize) -> Self {
        let mut j = Self::constant(value, dim);
        j.grad[coord] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn laplacian(&self) -> f64 {
        self.second.iter().sum()
    }

    pub fn layout(&self) -> JetLayout {
        JetLayout::new(self.dim(), self.cross.is_some())
    }

    pub fn is_consistent(&self) -> bool {
        let d = self.dim();
        self.second.len() == d
            && self
                .cross
                .as_ref()
                .map_or(true, |c| c.len() == d * d.saturating_sub(1) / 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_chain_rule() {
        // u(x, y) = x * 2 + y, f = sin
        let layout = JetLayout::new(2, true);
        let mut inp = vec![0.0; layout.stride()];
        inp[0] = 0.3;
        inp[1] = 2.0;
        inp[2] = 1.0;
        let mut out = vec![0.0; layout.stride()];
        let v: f64 = 0.3;
        layout.write_composed(&mut out, &inp, v.sin(), v.cos(), -v.sin());
        assert_eq!(out[0], v.sin());
        assert_eq!(out[1], 2.0 * v.cos());
        assert_eq!(out[2], v.cos());
        assert_eq!(out[3], -4.0 * v.sin());
        assert_eq!(out[4], -v.sin());
        assert_eq!(out[5], -2.0 * v.sin());
    }

    #[test]
    fn round_trip_through_flat() {
        let layout = JetLayout::new(2, false);
        let j = JetValue {
            value: 1.0,
            grad: vec![2.0, 3.0],
            second: vec![4.0, 5.0],
            cross: None,
        };
        let mut flat = vec![0.0; layout.stride()];
        layout.from_value(&j, &mut flat);
        assert_eq!(layout.to_value(&flat), j);
        assert_eq!(j.laplacian(), 9.0);
    }
}
