//! Power iteration for operator norms of discretized kernels.
//!
//! The norm of an integral operator A on a weighted l^2 space is estimated as
//! sqrt(lambda_max(A* A)) by iterating the positive operator A*A on a
//! deterministic pseudo-random start vector.

use crate::error::{Result, SdqError};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct PowerIterSettings {
    /// Relative tolerance on the norm estimate.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerIterSettings {
    fn default() -> Self {
        PowerIterSettings {
            tol: 1e-9,
            max_iter: 10_000,
            seed: 42,
        }
    }
}

/// An operator together with the quadrature weights of its l^2 space.
pub trait WeightedOp: Sync {
    fn dim(&self) -> usize;
    /// y = A x (including quadrature weights).
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// y = A* x.
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]);
    /// Weights of the inner product <u, v> = sum w_i conj(u_i) v_i.
    fn weights(&self) -> &[f64];
}

pub fn weighted_dot(w: &[f64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        acc += w[i] * a[i].conj() * b[i];
    }
    acc
}

pub fn weighted_norm(w: &[f64], a: &[Complex64]) -> f64 {
    weighted_dot(w, a, a).re.max(0.0).sqrt()
}

/// Estimate the operator norm ||A|| on l^2(w) via power iteration on A*A.
pub fn operator_norm<A: WeightedOp + ?Sized>(op: &A, settings: &PowerIterSettings) -> Result<f64> {
    let n = op.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let w = op.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nx = weighted_norm(w, &x);
    if nx == 0.0 {
        return Ok(0.0);
    }
    for v in &mut x {
        *v /= nx;
    }
    let mut ax = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut last = 0.0f64;
    let mut stable = 0usize;
    for it in 0..settings.max_iter {
        op.apply(&x, &mut ax);
        op.apply_adjoint(&ax, &mut y);
        // Rayleigh quotient for A*A: <x, A*Ax> = ||Ax||^2 since ||x|| = 1.
        let lam = weighted_dot(w, &x, &y).re.max(0.0);
        let ny = weighted_norm(w, &y);
        if ny == 0.0 || lam == 0.0 {
            return Ok(0.0);
        }
        for i in 0..n {
            x[i] = y[i] / ny;
        }
        let est = lam.sqrt();
        if (est - last).abs() <= settings.tol * est.max(f64::MIN_POSITIVE) {
            stable += 1;
            if stable >= 3 {
                return Ok(est);
            }
        } else {
            stable = 0;
        }
        last = est;
        if !est.is_finite() {
            return Err(SdqError::NonFinite(format!("power iteration at step {it}")));
        }
    }
    // Residual of the eigen-equation at exit, reported with the last estimate.
    op.apply(&x, &mut ax);
    op.apply_adjoint(&ax, &mut y);
    let lam = weighted_dot(w, &x, &y).re.max(0.0);
    let mut rvec = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        rvec[i] = y[i] - lam * x[i];
    }
    Err(SdqError::PowerIterationNoConvergence {
        iterations: settings.max_iter,
        last_estimate: lam.sqrt(),
        residual: weighted_norm(w, &rvec),
    })
}

/// Banded kernel viewed as a weighted operator.
pub struct BandedOp<'a> {
    pub kernel: &'a crate::banded::BandedKernel,
    pub adjoint: crate::banded::BandedKernel,
    pub w: &'a [f64],
}

impl<'a> BandedOp<'a> {
    pub fn new(kernel: &'a crate::banded::BandedKernel, w: &'a [f64]) -> Self {
        BandedOp {
            kernel,
            adjoint: kernel.adjoint(),
            w,
        }
    }
}

impl WeightedOp for BandedOp<'_> {
    fn dim(&self) -> usize {
        self.kernel.n()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.kernel.apply(self.w, x, y);
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.adjoint.apply(self.w, x, y);
    }
    fn weights(&self) -> &[f64] {
        self.w
    }
}

/// Spectral norm of a banded kernel acting on l^2(w).
pub fn banded_operator_norm(
    kernel: &crate::banded::BandedKernel,
    w: &[f64],
    settings: &PowerIterSettings,
) -> Result<f64> {
    if kernel.is_zero() {
        return Ok(0.0);
    }
    let op = BandedOp::new(kernel, w);
    operator_norm(&op, settings)
}
