//! Regularized least-squares directions `min ‖Jγ − N‖² + λ s ‖γ‖²`.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

const RETRIES: usize = 3;
/// Floor used when a zero regularization has to be raised after a failure.
const RETRY_FLOOR: f64 = 1e-14;

/// Factor `A + λ s I` with `s = trace(A)/n`, raising `λ` tenfold on failure.
fn factor_shifted(a: &Matrix, lambda: f64, n_scale: usize) -> Result<Cholesky> {
    let n = a.rows();
    let s = a.trace() / n_scale as f64;
    let mut lam = lambda;
    let mut last = String::new();
    for attempt in 0..=RETRIES {
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] += lam * s;
        }
        match Cholesky::new(&shifted) {
            Ok(c) => {
                if attempt > 0 {
                    log::warn!("direction solve needed lambda = {lam:.1e}");
                }
                return Ok(c);
            }
            Err(e) => last = e.to_string(),
        }
        lam = if lam == 0.0 { RETRY_FLOOR } else { lam * 10.0 };
    }
    Err(Error::Singular(format!(
        "{n}x{n} system, trace/n = {s:.3e}, final lambda = {:.1e}: {last}",
        lam / 10.0
    )))
}

/// Solve `(A + λ s I) γ = b`, `s = trace(A)/N`.
pub fn solve_direction(a: &Matrix, b: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if a.rows() != a.cols() || a.rows() != b.len() {
        return Err(Error::Contract("normal system dimensions disagree".into()));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::validation("lambda", "must be >= 0"));
    }
    if b.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; b.len()]);
    }
    let c = factor_shifted(a, lambda, a.rows())?;
    Ok(c.solve(b))
}

/// `(JᵀJ, JᵀN)`.
pub fn normal_system(jac: &Matrix, rhs: &[f64]) -> (Matrix, Vec<f64>) {
    (jac.gram(), jac.tr_matvec(rhs))
}

/// Regularized least-squares direction from the Jacobian directly.
///
/// Tall systems use the normal equations. Wide ones use the equivalent
/// `γ = Jᵀ (JJᵀ + λ s I)⁻¹ N`, which has the same solution for `λ > 0`
/// (and the minimum-norm one for `λ = 0`) at the cost of an `M × M` factor.
pub fn least_squares_direction(jac: &Matrix, rhs: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if jac.rows() != rhs.len() {
        return Err(Error::Contract("Jacobian rows and residual length disagree".into()));
    }
    if jac.rows() >= jac.cols() {
        let (a, b) = normal_system(jac, rhs);
        return solve_direction(&a, &b, lambda);
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::validation("lambda", "must be >= 0"));
    }
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; jac.cols()]);
    }
    let outer = jac.outer_gram();
    let c = factor_shifted(&outer, lambda, jac.cols())?;
    Ok(jac.tr_matvec(&c.solve(rhs)))
}
