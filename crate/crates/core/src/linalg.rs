//! Dense row-major matrices with the handful of kernels the solver needs:
//! Gram products `JᵀJ`, blocked Cholesky and triangular solves.
//!
//! Matrix products go through `matrixmultiply::dgemm`; everything else is
//! plain loops with a fixed evaluation order so results are reproducible.

use crate::error::{Error, Result};

const BLOCK: usize = 64;
const GRAM_BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer size");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    /// `Aᵀ y`, accumulated row by row.
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    /// `A B` via dgemm.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        if self.rows == 0 || other.cols == 0 || self.cols == 0 {
            return out;
        }
        // SAFETY: all pointers cover rows*cols elements with the given strides.
        unsafe {
            matrixmultiply::dgemm(
                self.rows,
                self.cols,
                other.cols,
                1.0,
                self.data.as_ptr(),
                self.cols as isize,
                1,
                other.data.as_ptr(),
                other.cols as isize,
                1,
                0.0,
                out.data.as_mut_ptr(),
                out.cols as isize,
                1,
            );
        }
        out
    }

    /// `JᵀJ`, computed on the lower block triangle and mirrored so the result
    /// is exactly symmetric.
    pub fn gram(&self) -> Matrix {
        let (m, n) = (self.rows, self.cols);
        let mut out = Matrix::zeros(n, n);
        if m == 0 || n == 0 {
            return out;
        }
        let mut i0 = 0;
        while i0 < n {
            let bi = GRAM_BLOCK.min(n - i0);
            let mut j0 = 0;
            while j0 <= i0 {
                let bj = GRAM_BLOCK.min(n - j0);
                // SAFETY: column sub-blocks of a row-major m x n buffer; the output
                // block lies inside the n x n result.
                unsafe {
                    matrixmultiply::dgemm(
                        bi,
                        m,
                        bj,
                        1.0,
                        self.data.as_ptr().add(i0),
                        1,
                        n as isize,
                        self.data.as_ptr().add(j0),
                        n as isize,
                        1,
                        0.0,
                        out.data.as_mut_ptr().add(i0 * n + j0),
                        n as isize,
                        1,
                    );
                }
                j0 += GRAM_BLOCK;
            }
            i0 += GRAM_BLOCK;
        }
        for i in 0..n {
            for j in i + 1..n {
                out.data[i * n + j] = out.data[j * n + i];
            }
        }
        out
    }

    /// `J Jᵀ`, mirrored from the lower triangle.
    pub fn outer_gram(&self) -> Matrix {
        let (m, n) = (self.rows, self.cols);
        let mut out = Matrix::zeros(m, m);
        if m == 0 || n == 0 {
            return out;
        }
        // SAFETY: B is the transpose view of the same row-major buffer.
        unsafe {
            matrixmultiply::dgemm(
                m,
                n,
                m,
                1.0,
                self.data.as_ptr(),
                n as isize,
                1,
                self.data.as_ptr(),
                1,
                n as isize,
                0.0,
                out.data.as_mut_ptr(),
                m as isize,
                1,
            );
        }
        for i in 0..m {
            for j in i + 1..m {
                out.data[i * m + j] = out.data[j * m + i];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: Matrix,
}

impl Cholesky {
    /// Factor a symmetric positive-definite matrix. Only the lower triangle is read.
    pub fn new(a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Contract("cholesky needs a square matrix".into()));
        }
        let n = a.rows;
        let mut l = a.clone();
        let d = &mut l.data;
        let mut k0 = 0;
        while k0 < n {
            let kb = BLOCK.min(n - k0);
            let k1 = k0 + kb;
            // Diagonal block, unblocked.
            for j in k0..k1 {
                let mut s = d[j * n + j];
                for p in k0..j {
                    s -= d[j * n + p] * d[j * n + p];
                }
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::Singular(format!(
                        "non-positive pivot {s:.3e} at column {j} of {n}"
                    )));
                }
                let piv = s.sqrt();
                d[j * n + j] = piv;
                for i in j + 1..k1 {
                    let mut t = d[i * n + j];
                    for p in k0..j {
                        t -= d[i * n + p] * d[j * n + p];
                    }
                    d[i * n + j] = t / piv;
                }
            }
            if k1 < n {
                // Panel below the diagonal block: solve X L_kkᵀ = A_ik row by row.
                for i in k1..n {
                    for j in k0..k1 {
                        let mut t = d[i * n + j];
                        for p in k0..j {
                            t -= d[i * n + p] * d[j * n + p];
                        }
                        d[i * n + j] = t / d[j * n + j];
                    }
                }
                // Trailing update on the lower trapezoid, one row block at a time.
                let mut i0 = k1;
                while i0 < n {
                    let bi = BLOCK.min(n - i0);
                    let width = i0 + bi - k1;
                    // SAFETY: reads rows [i0, i0+bi) and [k1, i0+bi) of columns
                    // [k0, k1); writes rows [i0, i0+bi) of columns [k1, i0+bi).
                    // The read and written column ranges are disjoint.
                    unsafe {
                        let base = d.as_mut_ptr();
                        matrixmultiply::dgemm(
                            bi,
                            kb,
                            width,
                            -1.0,
                            base.add(i0 * n + k0),
                            n as isize,
                            1,
                            base.add(k1 * n + k0),
                            1,
                            n as isize,
                            1.0,
                            base.add(i0 * n + k1),
                            n as isize,
                            1,
                        );
                    }
                    i0 += BLOCK;
                }
            }
            k0 = k1;
        }
        for i in 0..n {
            for j in i + 1..n {
                d[i * n + j] = 0.0;
            }
        }
        Ok(Cholesky { factor: l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.factor.rows;
        assert_eq!(b.len(), n);
        let d = &self.factor.data;
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&d[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / d[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= d[k * n + i] * y[k];
            }
            y[i] = s / d[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn gram_matches_naive_and_is_symmetric() {
        for &(m, n) in &[(7, 3), (300, 270), (40, 600)] {
            let j = random(m, n, 11);
            let g = j.gram();
            for a in 0..n {
                for b in 0..n {
                    let naive: f64 = (0..m).map(|r| j[(r, a)] * j[(r, b)]).sum();
                    assert_abs_diff_eq!(g[(a, b)], naive, epsilon = 1e-10);
                    assert_eq!(g[(a, b)], g[(b, a)]);
                }
            }
        }
    }

    #[test]
    fn cholesky_reconstructs_and_solves() {
        for &n in &[1, 5, 64, 65, 200] {
            let j = random(n + 10, n, 3);
            let mut a = j.gram();
            for i in 0..n {
                a[(i, i)] += 0.5;
            }
            let c = Cholesky::new(&a).unwrap();
            let l = c.factor();
            let rec = l.matmul(&l.transpose());
            for i in 0..n {
                for k in 0..n {
                    assert_abs_diff_eq!(rec[(i, k)], a[(i, k)], epsilon = 1e-9);
                }
            }
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let x = c.solve(&b);
            let r = a.matvec(&x);
            for i in 0..n {
                assert_abs_diff_eq!(r[i], b[i], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn outer_gram_matches_naive() {
        let j = random(37, 90, 4);
        let g = j.outer_gram();
        for a in 0..37 {
            for b in 0..37 {
                assert_abs_diff_eq!(g[(a, b)], dot(j.row(a), j.row(b)), epsilon = 1e-11);
                assert_eq!(g[(a, b)], g[(b, a)]);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Matrix::identity(3);
        a[(2, 2)] = -1.0;
        assert!(matches!(Cholesky::new(&a), Err(Error::Singular(_))));
    }
}
