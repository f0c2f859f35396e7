//! Edge activations `φ(x) = w_b·silu(x) + w_s·Σ c_i B_i(x)`.

use super::jet::JetValue;
use super::knots::KnotVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    pub coeffs: Vec<f64>,
    pub w_base: f64,
    pub w_spline: f64,
}

impl EdgeFunction {
    pub fn zeros(n_basis: usize) -> Self {
        EdgeFunction {
            coeffs: vec![0.0; n_basis],
            w_base: 0.0,
            w_spline: 0.0,
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `silu(x) = x / (1 + e^{-x})` with its first two derivatives.
#[inline]
pub fn silu_derivs(x: f64) -> (f64, f64, f64) {
    let s = sigmoid(x);
    let f0 = x * s;
    let f1 = s * (1.0 + x * (1.0 - s));
    let f2 = s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
    (f0, f1, f2)
}

/// `φ, φ', φ''` at a scalar input.
#[inline]
pub fn edge_derivs(
    coeffs: &[f64],
    w_base: f64,
    w_spline: f64,
    knots: &KnotVector,
    x: f64,
) -> (f64, f64, f64) {
    let (s0, s1, s2) = silu_derivs(x);
    let basis = knots.active_basis(x);
    let (b0, b1, b2) = basis.combine(coeffs);
    (
        w_base * s0 + w_spline * b0,
        w_base * s1 + w_spline * b1,
        w_base * s2 + w_spline * b2,
    )
}

/// Push a jet through one edge function.
pub fn edge_eval(edge: &EdgeFunction, knots: &KnotVector, x: &JetValue) -> Result<JetValue> {
    if edge.coeffs.len() != knots.n_basis() {
        return Err(Error::Contract(format!(
            "edge has {} coefficients, knot vector needs {}",
            edge.coeffs.len(),
            knots.n_basis()
        )));
    }
    if !x.is_consistent() {
        return Err(Error::Contract("inconsistent jet arrays".into()));
    }
    let (f0, f1, f2) = edge_derivs(&edge.coeffs, edge.w_base, edge.w_spline, knots, x.value);
    let layout = x.layout();
    let mut inp = vec![0.0; layout.stride()];
    layout.from_value(x, &mut inp);
    let mut out = vec![0.0; layout.stride()];
    layout.write_composed(&mut out, &inp, f0, f1, f2);
    Ok(layout.to_value(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kan::knots::make_knots;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_edge_is_zero() {
        let kv = make_knots(-1.0, 1.0, 8, 3).unwrap();
        let e = EdgeFunction::zeros(kv.n_basis());
        let j = edge_eval(&e, &kv, &JetValue::variable(0.4, 0, 1)).unwrap();
        assert_eq!(j, JetValue::constant(0.0, 1));
    }

    #[test]
    fn silu_slope_at_origin() {
        let kv = make_knots(-1.0, 1.0, 8, 3).unwrap();
        let mut e = EdgeFunction::zeros(kv.n_basis());
        e.w_base = 1.0;
        let j = edge_eval(&e, &kv, &JetValue::variable(0.0, 0, 1)).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad[0], 0.5);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let kv = make_knots(-1.0, 1.0, 6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let e = EdgeFunction {
                coeffs: (0..kv.n_basis()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                w_base: rng.gen_range(-1.0..1.0),
                w_spline: rng.gen_range(-1.0..1.0),
            };
            let x: f64 = rng.gen_range(-0.95..0.95);
            let h = 1e-5;
            let f = |y: f64| edge_derivs(&e.coeffs, e.w_base, e.w_spline, &kv, y).0;
            let (_, d1, d2) = edge_derivs(&e.coeffs, e.w_base, e.w_spline, &kv, x);
            let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
            assert_relative_eq!(d1, fd1, max_relative = 1e-6, epsilon = 1e-9);
            // Second derivative against differences of the analytic first derivative.
            let g = |y: f64| edge_derivs(&e.coeffs, e.w_base, e.w_spline, &kv, y).1;
            let fd2 = (g(x + h) - g(x - h)) / (2.0 * h);
            assert_relative_eq!(d2, fd2, max_relative = 1e-6, epsilon = 1e-6);
        }
    }
}
