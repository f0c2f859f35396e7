//! Uniform extended knot vectors and B-spline bases.
//!
//! A grid of `G` intervals over `[lo, hi]` is extended by `k` knots on each
//! side, giving `G + 2k + 1` knots and `G + k` basis functions of degree `k`.
//! On `[lo, hi]` exactly `k + 1` of them are non-zero and they sum to one.

use crate::error::{Error, Result};

/// Largest supported polynomial degree. Keeps the active-basis buffers on the stack.
pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    order: usize,
    grid: usize,
    lo: f64,
    hi: f64,
    knots: Vec<f64>,
}

/// Build the uniform knot vector for `grid` intervals of degree `order` splines on `[lo, hi]`.
pub fn make_knots(lo: f64, hi: f64, grid: usize, order: usize) -> Result<KnotVector> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::validation(
            "domain",
            format!("need finite lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if grid < 2 {
        return Err(Error::validation("grid", format!("need G >= 2, got {grid}")));
    }
    if order < 1 || order > MAX_ORDER {
        return Err(Error::validation(
            "order",
            format!("need 1 <= k <= {MAX_ORDER}, got {order}"),
        ));
    }
    let h = (hi - lo) / grid as f64;
    let knots = (0..grid + 2 * order + 1)
        .map(|j| lo + (j as f64 - order as f64) * h)
        .collect();
    Ok(KnotVector {
        order,
        grid,
        lo,
        hi,
        knots,
    })
}

/// The `k + 1` basis functions that are non-zero at a point, with derivatives.
///
/// `values[r]` belongs to basis index `first + r`.
#[derive(Debug, Clone, Copy)]
pub struct ActiveBasis {
    pub first: usize,
    pub len: usize,
    pub values: [f64; MAX_ORDER + 1],
    pub d1: [f64; MAX_ORDER + 1],
    pub d2: [f64; MAX_ORDER + 1],
}

impl ActiveBasis {
    /// `Σ c_i B_i`, `Σ c_i B_i'`, `Σ c_i B_i''` for a full coefficient slice.
    #[inline]
    pub fn combine(&self, coeffs: &[f64]) -> (f64, f64, f64) {
        let c = &coeffs[self.first..self.first + self.len];
        let mut s = (0.0, 0.0, 0.0);
        for r in 0..self.len {
            s.0 += c[r] * self.values[r];
            s.1 += c[r] * self.d1[r];
            s.2 += c[r] * self.d2[r];
        }
        s
    }
}

impl KnotVector {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.grid as f64
    }

    pub fn n_basis(&self) -> usize {
        self.grid + self.order
    }

    /// Clamp into the domain and locate the knot interval `[t_s, t_{s+1})`.
    /// The last interval is closed so that `hi` itself is covered.
    #[inline]
    fn locate(&self, x: f64) -> (usize, f64, bool) {
        let inside = x >= self.lo && x <= self.hi;
        let xc = x.clamp(self.lo, self.hi);
        let rel = ((xc - self.lo) / self.spacing()).floor();
        let cell = if rel < 0.0 { 0 } else { rel as usize };
        let cell = cell.min(self.grid - 1);
        (cell + self.order, xc, inside)
    }

    /// All non-zero basis functions at `x` with first and second derivatives.
    ///
    /// Inputs outside `[lo, hi]` are evaluated at the nearest endpoint and have
    /// zero derivatives, since the clamped spline is constant there.
    pub fn active_basis(&self, x: f64) -> ActiveBasis {
        let k = self.order;
        let (span, xc, inside) = self.locate(x);
        let t = &self.knots;
        let h = self.spacing();

        // Triangular Cox-de Boor table; keep the rows for degrees k-2, k-1 and k.
        let mut n = [0.0f64; MAX_ORDER + 1];
        let mut deg_km1 = [0.0f64; MAX_ORDER + 1];
        let mut deg_km2 = [0.0f64; MAX_ORDER + 1];
        let mut left = [0.0f64; MAX_ORDER + 1];
        let mut right = [0.0f64; MAX_ORDER + 1];
        n[0] = 1.0;
        if k == 1 {
            deg_km1[0] = 1.0;
        }
        for j in 1..=k {
            left[j] = xc - t[span + 1 - j];
            right[j] = t[span + j] - xc;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            n[j] = saved;
            if j + 2 == k {
                deg_km2[..=j].copy_from_slice(&n[..=j]);
            }
            if j + 1 == k {
                deg_km1[..=j].copy_from_slice(&n[..=j]);
            }
        }
        if k == 2 {
            deg_km2[0] = 1.0;
        }

        let mut out = ActiveBasis {
            first: span - k,
            len: k + 1,
            values: [0.0; MAX_ORDER + 1],
            d1: [0.0; MAX_ORDER + 1],
            d2: [0.0; MAX_ORDER + 1],
        };
        out.values[..=k].copy_from_slice(&n[..=k]);
        if !inside {
            return out;
        }
        // Uniform knots: B'_{i,k} = (B_{i,k-1} - B_{i+1,k-1}) / h. The degree k-1
        // row covers indices first+1 ..= first+k, so entry r-1 is B_{first+r,k-1}.
        let lower = |row: &[f64; MAX_ORDER + 1], len: usize, idx: isize| -> f64 {
            if idx < 0 || idx as usize >= len {
                0.0
            } else {
                row[idx as usize]
            }
        };
        for r in 0..=k {
            let a = lower(&deg_km1, k, r as isize - 1);
            let b = lower(&deg_km1, k, r as isize);
            out.d1[r] = (a - b) / h;
        }
        if k >= 2 {
            // Degree k-2 row covers first+2 ..= first+k.
            for r in 0..=k {
                let a = lower(&deg_km2, k - 1, r as isize - 2);
                let b = lower(&deg_km2, k - 1, r as isize - 1);
                let c = lower(&deg_km2, k - 1, r as isize);
                out.d2[r] = (a - 2.0 * b + c) / (h * h);
            }
        }
        out
    }
}

/// Value of basis function `i` at `x` by the Cox-de Boor recursion.
///
/// `x` is clamped into `[lo, hi]`; the right end of the domain belongs to the
/// last interior interval.
pub fn bspline_basis(knots: &KnotVector, i: usize, x: f64) -> Result<f64> {
    if i >= knots.n_basis() {
        return Err(Error::validation(
            "basis index",
            format!("{i} out of range 0..{}", knots.n_basis()),
        ));
    }
    let xc = x.clamp(knots.lo, knots.hi);
    let last = knots.grid + knots.order - 1;
    Ok(cox_de_boor(&knots.knots, i, knots.order, xc, last, xc == knots.hi))
}

fn cox_de_boor(t: &[f64], i: usize, degree: usize, x: f64, last: usize, at_hi: bool) -> f64 {
    if degree == 0 {
        return if at_hi {
            if i == last {
                1.0
            } else {
                0.0
            }
        } else if t[i] <= x && x < t[i + 1] {
            1.0
        } else {
            0.0
        };
    }
    let w_left = (x - t[i]) / (t[i + degree] - t[i]);
    let w_right = (t[i + degree + 1] - x) / (t[i + degree + 1] - t[i + 1]);
    w_left * cox_de_boor(t, i, degree - 1, x, last, at_hi)
        + w_right * cox_de_boor(t, i + 1, degree - 1, x, last, at_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn knot_counts_and_extension() {
        let kv = make_knots(-1.0, 1.0, 4, 3).unwrap();
        // G + 2k + 1 = 11 knots from -2.5 to 2.5.
        assert_eq!(kv.knots().len(), 11);
        assert_eq!(kv.n_basis(), 7);
        assert_abs_diff_eq!(kv.knots()[0], -2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kv.knots()[10], 2.5, epsilon = 1e-15);
        for w in kv.knots().windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 0.5, epsilon = 1e-12 * 2.0);
        }

        let kv = make_knots(0.0, 1.0, 2, 1).unwrap();
        let expected = [-0.5, 0.0, 0.5, 1.0, 1.5];
        for (a, b) in kv.knots().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_knots(1.0, 1.0, 4, 3).is_err());
        assert!(make_knots(2.0, 1.0, 4, 3).is_err());
        assert!(make_knots(0.0, 1.0, 1, 3).is_err());
        assert!(make_knots(0.0, 1.0, 4, 0).is_err());
        let kv = make_knots(0.0, 1.0, 4, 3).unwrap();
        assert!(bspline_basis(&kv, 7, 0.5).is_err());
    }

    #[test]
    fn cubic_values_at_knots() {
        // Basis 3 is supported on [t_3, t_7] = [-1, 1] with centre t_5 = 0.
        let kv = make_knots(-1.0, 1.0, 4, 3).unwrap();
        assert_abs_diff_eq!(bspline_basis(&kv, 3, 0.0).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bspline_basis(&kv, 3, 0.5).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bspline_basis(&kv, 3, -0.5).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        // Outside the support.
        assert_eq!(bspline_basis(&kv, 0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn active_basis_matches_recursion() {
        for &(g, k) in &[(4, 1), (5, 2), (8, 3), (6, 4)] {
            let kv = make_knots(-1.0, 1.0, g, k).unwrap();
            for s in 0..=200 {
                let x = -1.0 + 2.0 * s as f64 / 200.0;
                let ab = kv.active_basis(x);
                for i in 0..kv.n_basis() {
                    let expect = bspline_basis(&kv, i, x).unwrap();
                    let got = if i >= ab.first && i < ab.first + ab.len {
                        ab.values[i - ab.first]
                    } else {
                        0.0
                    };
                    assert_abs_diff_eq!(got, expect, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let kv = make_knots(-1.0, 1.0, 7, 3).unwrap();
        let h = 1e-5;
        for s in 1..50 {
            // Stay away from knots where B'' jumps.
            let x = -0.93 + 1.83 * s as f64 / 50.0 + 0.0123;
            let ab = kv.active_basis(x);
            for r in 0..ab.len {
                let i = ab.first + r;
                let f = |y: f64| bspline_basis(&kv, i, y).unwrap();
                let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
                let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
                assert_abs_diff_eq!(ab.d1[r], d1, epsilon = 1e-7);
                assert_abs_diff_eq!(ab.d2[r], d2, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn clamped_outside_domain() {
        let kv = make_knots(-1.0, 1.0, 8, 3).unwrap();
        let a = kv.active_basis(1.7);
        let b = kv.active_basis(1.0);
        assert_eq!(a.first, b.first);
        for r in 0..a.len {
            assert_eq!(a.values[r], b.values[r]);
            assert_eq!(a.d1[r], 0.0);
            assert_eq!(a.d2[r], 0.0);
        }
    }

    #[test]
    fn partition_of_unity_at_endpoints() {
        let kv = make_knots(-1.0, 1.0, 8, 3).unwrap();
        for x in [-1.0, 1.0] {
            let s: f64 = (0..kv.n_basis())
                .map(|i| bspline_basis(&kv, i, x).unwrap())
                .sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
        }
    }
}
