use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::snapshot::grid_points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollocationMode {
    /// `n` points per axis on the periodic grid.
    UniformGrid { n: usize },
    /// Uniform random points in `[-1, 1)^d`.
    UniformRandom { count: usize, seed: u64 },
}

/// Points at which residuals and Jacobians are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    points: Vec<Vec<f64>>,
    mode: CollocationMode,
    dim: usize,
    resample: bool,
}

fn random_points(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

impl CollocationSet {
    pub fn new(mode: CollocationMode, dim: usize, resample: bool) -> Result<Self> {
        let points = match mode {
            CollocationMode::UniformGrid { n } => {
                if n == 0 {
                    return Err(Error::validation("collocation.n", "must be positive"));
                }
                grid_points(&vec![n; dim])
            }
            CollocationMode::UniformRandom { count, seed } => {
                if count == 0 {
                    return Err(Error::validation("collocation.count", "must be positive"));
                }
                random_points(count, dim, seed)
            }
        };
        if points.is_empty() {
            return Err(Error::validation("collocation", format!("unsupported dimension {dim}")));
        }
        Ok(CollocationSet {
            points,
            mode,
            dim,
            resample,
        })
    }

    pub fn uniform_grid(n: usize, dim: usize) -> Result<Self> {
        Self::new(CollocationMode::UniformGrid { n }, dim, false)
    }

    /// Explicit point list, treated as random-like (no grid structure).
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if points.is_empty() || points.iter().any(|p| p.len() != dim) {
            return Err(Error::validation("collocation", "empty or ragged point list"));
        }
        let count = points.len();
        Ok(CollocationSet {
            points,
            mode: CollocationMode::UniformRandom { count, seed: 0 },
            dim,
            resample: false,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> CollocationMode {
        self.mode
    }

    /// Grid shape when the points form the periodic grid in snapshot order.
    pub fn grid_shape(&self) -> Option<Vec<usize>> {
        match self.mode {
            CollocationMode::UniformGrid { n } => Some(vec![n; self.dim]),
            CollocationMode::UniformRandom { .. } => None,
        }
    }

    /// Uniform quadrature weight `|Ω| / M`.
    pub fn weight(&self) -> f64 {
        2f64.powi(self.dim as i32) / self.points.len() as f64
    }

    /// Draw fresh random points for `step` when resampling is on.
    pub fn advance(&mut self, step: usize) {
        if let (true, CollocationMode::UniformRandom { count, seed }) = (self.resample, self.mode) {
            let s = seed.wrapping_add((step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            self.points = random_points(count, self.dim, s);
        }
    }

    /// Log a warning when the system is badly underdetermined.
    pub fn check_count(&self, rows_per_point: usize, n_params: usize) {
        if self.points.len() * rows_per_point * 4 < n_params {
            log::warn!(
                "{} collocation rows for {} parameters; fewer than N/4",
                self.points.len() * rows_per_point,
                n_params
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_random_sets() {
        let g = CollocationSet::uniform_grid(8, 2).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.grid_shape(), Some(vec![8, 8]));
        assert!(g.points().iter().all(|p| p.iter().all(|&x| (-1.0..1.0).contains(&x))));
        let r = CollocationSet::new(CollocationMode::UniformRandom { count: 10, seed: 3 }, 1, true).unwrap();
        let r2 = CollocationSet::new(CollocationMode::UniformRandom { count: 10, seed: 3 }, 1, true).unwrap();
        assert_eq!(r, r2);
        let mut r3 = r.clone();
        r3.advance(1);
        assert_ne!(r3.points(), r.points());
        assert!(CollocationSet::uniform_grid(0, 1).is_err());
    }
}
