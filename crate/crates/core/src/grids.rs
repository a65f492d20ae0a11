//! Fiber grids and density weights for the bundle Fourier transform.

use crate::error::{Result, SdqError};
use std::sync::Arc;

/// Uniform symmetric grid on a fiber R^p with its Nyquist-consistent dual.
///
/// Primal points per axis: xi_j = -L + j * dx, dx = 2L/N (so 0 is a grid
/// point for even N). Dual points: theta_k = (k - N/2) * dtheta with
/// dtheta = pi / L, covering |theta| <= pi / dx.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberGrid {
    pub fiber_dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl FiberGrid {
    pub fn new(fiber_dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !points_per_axis.is_power_of_two() || points_per_axis < 4 {
            return Err(SdqError::Config(format!(
                "fiber grid points_per_axis must be a power of two >= 4, got {points_per_axis}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(SdqError::Config("fiber grid half_width must be positive".into()));
        }
        Ok(FiberGrid {
            fiber_dim,
            half_width,
            points_per_axis,
        })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    pub fn dtheta(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    pub fn primal_axis(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.points_per_axis)
            .map(|j| -self.half_width + dx * j as f64)
            .collect()
    }

    pub fn dual_axis(&self) -> Vec<f64> {
        let dt = self.dtheta();
        let n = self.points_per_axis as isize;
        (0..n).map(|k| (k - n / 2) as f64 * dt).collect()
    }

    /// All fiber points (cartesian product), row-major over axes.
    pub fn points(&self, dual: bool) -> Vec<Vec<f64>> {
        let axis = if dual { self.dual_axis() } else { self.primal_axis() };
        let mut out = vec![vec![]];
        for _ in 0..self.fiber_dim {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for &v in &axis {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    pub fn fiber_len(&self) -> usize {
        self.points_per_axis.pow(self.fiber_dim as u32)
    }
}

/// Positive 1-density weight in the chosen frame; the dual weight is 1/mu_e.
#[derive(Clone)]
pub struct DensityWeight {
    pub mu_e: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl DensityWeight {
    pub fn lebesgue() -> Self {
        DensityWeight {
            mu_e: Arc::new(|_| 1.0),
        }
    }

    pub fn constant(c: f64) -> Self {
        DensityWeight {
            mu_e: Arc::new(move |_| c),
        }
    }

    pub fn mu_at(&self, x: &[f64]) -> Result<f64> {
        let v = (self.mu_e)(x);
        if !(v > 0.0) {
            return Err(SdqError::Config(format!("density weight must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn mu_star_at(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 / self.mu_at(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_nyquist_consistent() {
        let g = FiberGrid::new(1, 12.0, 256).unwrap();
        let xs = g.primal_axis();
        assert_eq!(xs.len(), 256);
        assert!((xs[128]).abs() < 1e-15);
        assert!((xs[0] + 12.0).abs() < 1e-12);
        let th = g.dual_axis();
        assert!((th[128]).abs() < 1e-15);
        // dual spacing 2 pi / (2 L)
        assert!((th[1] - th[0] - std::f64::consts::PI / 12.0).abs() < 1e-12);
        // dx * dtheta = 2 pi / N
        assert!((g.dx() * g.dtheta() - 2.0 * std::f64::consts::PI / 256.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(FiberGrid::new(1, 4.0, 100).is_err());
    }

    #[test]
    fn dual_weight_is_exact_reciprocal() {
        let mu = DensityWeight::constant(2.5);
        let x = [0.0];
        assert_eq!(mu.mu_at(&x).unwrap() * mu.mu_star_at(&x).unwrap(), 1.0);
    }
}
