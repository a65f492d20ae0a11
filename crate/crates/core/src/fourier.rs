//! Fiberwise Fourier transform on trivialized vector bundles.
//!
//! Conventions: the forward transform carries the measure weight and the
//! sign e^{-i<theta, xi>} with no 2 pi factor; the inverse carries
//! (2 pi)^{-p} with the dual weight 1/mu_e. Discretely this is a
//! continuum-normalized centered DFT: quadrature factor dx^p on the primal
//! side, dtheta^p (2 pi)^{-p} on the dual side, with phase twiddles aligning
//! both grids at 0 so that closed-form Gaussian pairs are reproduced rather
//! than discrete-transform conventions.

use crate::error::{Result, SdqError};
use crate::grids::{DensityWeight, FiberGrid};
use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Primal,
    Dual,
}

/// Complex samples over base points x fiber grid (shape [n_base, N, .., N]).
#[derive(Clone, Debug)]
pub struct SampledFiberFunction {
    pub side: Side,
    pub grid: FiberGrid,
    pub base_points: Vec<Vec<f64>>,
    pub values: ArrayD<C64>,
}

impl SampledFiberFunction {
    pub fn shape_of(grid: &FiberGrid, n_base: usize) -> Vec<usize> {
        let mut s = vec![n_base];
        s.extend(std::iter::repeat(grid.points_per_axis).take(grid.fiber_dim));
        s
    }

    pub fn zeros(side: Side, grid: FiberGrid, base_points: Vec<Vec<f64>>) -> Self {
        let shape = Self::shape_of(&grid, base_points.len());
        SampledFiberFunction {
            side,
            grid,
            base_points,
            values: ArrayD::from_elem(IxDyn(&shape), C64::new(0.0, 0.0)),
        }
    }

    /// Sample a closed-form fiber function per base point.
    pub fn sample(
        side: Side,
        grid: FiberGrid,
        base_points: Vec<Vec<f64>>,
        f: impl Fn(&[f64], &[f64]) -> C64,
    ) -> Self {
        let mut out = Self::zeros(side, grid, base_points);
        let axis = match side {
            Side::Primal => out.grid.primal_axis(),
            Side::Dual => out.grid.dual_axis(),
        };
        let p = out.grid.fiber_dim;
        let n = out.grid.points_per_axis;
        let base = out.base_points.clone();
        for (bi, bp) in base.iter().enumerate() {
            let mut idx = vec![0usize; p];
            loop {
                let xi: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
                let mut full = vec![bi];
                full.extend(idx.iter().cloned());
                out.values[IxDyn(&full)] = f(bp, &xi);
                // odometer
                let mut k = p;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                    if k == 0 {
                        return out;
                    }
                }
                if p == 0 {
                    return out;
                }
            }
        }
        out
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |f| on the boundary hyperfaces of the fiber grid, relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.sup_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.grid.points_per_axis;
        let mut worst = 0.0f64;
        for ax in 1..=self.grid.fiber_dim {
            for edge in [0usize, n - 1] {
                let sl = self.values.index_axis(Axis(ax), edge);
                worst = worst.max(sl.iter().map(|v| v.norm()).fold(0.0, f64::max));
            }
        }
        worst / peak
    }
}

#[derive(Clone, Debug, Default)]
pub struct TransformReport {
    /// Boundary decay |f|_edge / |f|_peak observed on the input.
    pub boundary_ratio: f64,
    /// Set when the input fails the 1e-10 boundary-decay precondition.
    pub boundary_warning: bool,
}

fn centered_dft_axis(values: &mut ArrayD<C64>, axis: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // global phase e^{ -+ i pi N / 2 } = +1 for N % 4 == 0, -1 for N % 4 == 2
    let phase = if n % 4 == 0 { 1.0 } else { -1.0 };
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for mut lane in values.lanes_mut(Axis(axis)) {
        for (j, v) in lane.iter().enumerate() {
            buf[j] = if j % 2 == 0 { *v } else { -*v };
        }
        fft.process(&mut buf);
        for (k, v) in lane.iter_mut().enumerate() {
            let s = if k % 2 == 0 { phase } else { -phase };
            *v = buf[k] * s;
        }
    }
}

/// Forward transform: theta -> int f(xi) e^{-i<theta,xi>} dmu^x(xi).
pub fn fourier_forward(f: &SampledFiberFunction, mu: &DensityWeight) -> Result<(SampledFiberFunction, TransformReport)> {
    if f.side != Side::Primal {
        return Err(SdqError::ShapeMismatch("fourier_forward expects a primal-side function".into()));
    }
    let report = TransformReport {
        boundary_ratio: f.boundary_ratio(),
        boundary_warning: f.boundary_ratio() > 1e-10,
    };
    let mut out = f.clone();
    out.side = Side::Dual;
    let n = f.grid.points_per_axis;
    for ax in 1..=f.grid.fiber_dim {
        centered_dft_axis(&mut out.values, ax, n, false);
    }
    let dxp = f.grid.dx().powi(f.grid.fiber_dim as i32);
    for (bi, bp) in f.base_points.iter().enumerate() {
        let w = dxp * mu.mu_at(bp)?;
        out.values.index_axis_mut(Axis(0), bi).mapv_inplace(|v| v * w);
    }
    Ok((out, report))
}

/// Inverse transform: xi -> (2 pi)^{-p} int g(theta) e^{+i<theta,xi>} dmu*^x(theta).
pub fn fourier_inverse(g: &SampledFiberFunction, mu: &DensityWeight) -> Result<(SampledFiberFunction, TransformReport)> {
    if g.side != Side::Dual {
        return Err(SdqError::ShapeMismatch("fourier_inverse expects a dual-side function".into()));
    }
    let report = TransformReport {
        boundary_ratio: g.boundary_ratio(),
        boundary_warning: g.boundary_ratio() > 1e-10,
    };
    let mut out = g.clone();
    out.side = Side::Primal;
    let n = g.grid.points_per_axis;
    for ax in 1..=g.grid.fiber_dim {
        centered_dft_axis(&mut out.values, ax, n, true);
    }
    let p = g.grid.fiber_dim as i32;
    let scale = (g.grid.dtheta() / (2.0 * std::f64::consts::PI)).powi(p);
    for (bi, bp) in g.base_points.iter().enumerate() {
        let w = scale * mu.mu_star_at(bp)?;
        out.values.index_axis_mut(Axis(0), bi).mapv_inplace(|v| v * w);
    }
    Ok((out, report))
}

/// Closed-form fiber function handed to the transform-rule checks.
#[derive(Clone)]
pub struct ClosedFormFiber {
    /// Value on the primal fiber.
    pub value: Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>,
    /// Analytic fiber gradient d/d lambda_k on the primal side.
    pub grad: Option<Arc<dyn Fn(&[f64]) -> Vec<C64> + Send + Sync>>,
    /// Closed-form transform and its gradient on the dual side, when known.
    pub hat_value: Option<Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>>,
    pub hat_grad: Option<Arc<dyn Fn(&[f64]) -> Vec<C64> + Send + Sync>>,
}

#[derive(Clone, Debug)]
pub struct TransformRulesReport {
    /// max | d fhat / d eps_i + i (xi_i f)^ | over the dual grid.
    pub rule_derivative_residual: f64,
    /// max | i theta_k fhat - (df/d lambda_k)^ | over the dual grid.
    pub rule_multiplier_residual: f64,
    pub analytic_hat_used: bool,
    pub pass: bool,
}

/// Numerical check of the derivative/multiplier identities of the transform,
/// per base point, against closed forms where available.
pub fn check_transform_rules(
    grid: &FiberGrid,
    base_points: &[Vec<f64>],
    mu: &DensityWeight,
    cf: &ClosedFormFiber,
    tol: f64,
) -> Result<TransformRulesReport> {
    let f = SampledFiberFunction::sample(Side::Primal, grid.clone(), base_points.to_vec(), |_, xi| {
        (cf.value)(xi)
    });
    let (fhat, _) = fourier_forward(&f, mu)?;
    let p = grid.fiber_dim;
    let primal = grid.primal_axis();
    let dual = grid.dual_axis();
    let n = grid.points_per_axis;

    // rule (derivative): d fhat / d eps_i = -i (xi_i f)^
    let mut rule3 = 0.0f64;
    let analytic_hat = cf.hat_grad.is_some();
    for i in 0..p {
        let xi_f = SampledFiberFunction::sample(Side::Primal, grid.clone(), base_points.to_vec(), |_, xi| {
            xi[i] * (cf.value)(xi)
        });
        let (rhs, _) = fourier_forward(&xi_f, mu)?;
        for (bi, bp) in base_points.iter().enumerate() {
            let muw = mu.mu_at(bp)?;
            let mut idx = vec![0usize; p];
            loop {
                let theta: Vec<f64> = idx.iter().map(|&k| dual[k]).collect();
                let mut full = vec![bi];
                full.extend(idx.iter().cloned());
                let rhs_v = -C64::i() * rhs.values[IxDyn(&full)];
                let lhs_v = if let Some(hg) = &cf.hat_grad {
                    hg(&theta)[i] * muw
                } else {
                    // sixth-order central difference on the dual grid
                    fd6_axis(&fhat, bi, &idx, i, grid.dtheta())
                };
                rule3 = rule3.max((lhs_v - rhs_v).norm());
                if !advance(&mut idx, n) {
                    break;
                }
            }
        }
    }

    // rule (multiplier): i theta_k fhat = (df/d lambda_k)^
    let mut rule5 = 0.0f64;
    for k in 0..p {
        let dlam = SampledFiberFunction::sample(Side::Primal, grid.clone(), base_points.to_vec(), |_, xi| {
            if let Some(g) = &cf.grad {
                g(xi)[k]
            } else {
                let h = 1e-5 * (1.0 + xi[k].abs());
                let mut up = xi.to_vec();
                let mut dn = xi.to_vec();
                up[k] += h;
                dn[k] -= h;
                ((cf.value)(&up) - (cf.value)(&dn)) / (2.0 * h)
            }
        });
        let (rhs, _) = fourier_forward(&dlam, mu)?;
        for bi in 0..base_points.len() {
            let mut idx = vec![0usize; p];
            loop {
                let theta_k = dual[idx[k]];
                let mut full = vec![bi];
                full.extend(idx.iter().cloned());
                let lhs_v = C64::i() * theta_k * fhat.values[IxDyn(&full)];
                let rhs_v = rhs.values[IxDyn(&full)];
                rule5 = rule5.max((lhs_v - rhs_v).norm());
                if !advance(&mut idx, n) {
                    break;
                }
            }
        }
    }
    let _ = primal;
    Ok(TransformRulesReport {
        rule_derivative_residual: rule3,
        rule_multiplier_residual: rule5,
        analytic_hat_used: analytic_hat,
        pass: rule3 <= tol && rule5 <= tol,
    })
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    let mut k = idx.len();
    while k > 0 {
        k -= 1;
        idx[k] += 1;
        if idx[k] < n {
            return true;
        }
        idx[k] = 0;
    }
    false
}

fn fd6_axis(f: &SampledFiberFunction, bi: usize, idx: &[usize], axis: usize, h: f64) -> C64 {
    let n = f.grid.points_per_axis as isize;
    let at = |off: isize| -> C64 {
        let j = idx[axis] as isize + off;
        if j < 0 || j >= n {
            return C64::new(0.0, 0.0);
        }
        let mut full = vec![bi];
        full.extend(idx.iter().cloned());
        full[axis + 1] = j as usize;
        f.values[IxDyn(&full)]
    };
    (at(-3) * (-1.0 / 60.0)
        + at(-2) * (3.0 / 20.0)
        + at(-1) * (-0.75)
        + at(1) * 0.75
        + at(2) * (-3.0 / 20.0)
        + at(3) * (1.0 / 60.0))
        / h
}

/// Smooth radial cutoff: 1 on r <= r_in, 0 on r >= r_out, C-infinity between.
pub fn smooth_radial_cutoff(r: f64, r_in: f64, r_out: f64) -> f64 {
    if r <= r_in {
        1.0
    } else if r >= r_out {
        0.0
    } else {
        let s = (r - r_in) / (r_out - r_in);
        let e = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
        e(1.0 - s) / (e(1.0 - s) + e(s))
    }
}

/// Band-limited surrogate: inverse-transform, apply a smooth radial cutoff
/// supported in |xi| <= R (plateau at 0.75 R), transform forward again.
pub fn project_paley_wiener(
    phi: &SampledFiberFunction,
    mu: &DensityWeight,
    band_radius: f64,
) -> Result<SampledFiberFunction> {
    if phi.side != Side::Dual {
        return Err(SdqError::ShapeMismatch("project_paley_wiener expects a dual-side function".into()));
    }
    let l = phi.grid.half_width;
    if band_radius >= 0.5 * l {
        return Err(SdqError::Aliasing { r: band_radius, l });
    }
    let (mut u, _) = fourier_inverse(phi, mu)?;
    let axis = u.grid.primal_axis();
    let p = u.grid.fiber_dim;
    let n = u.grid.points_per_axis;
    let r_in = 0.75 * band_radius;
    for bi in 0..u.base_points.len() {
        let mut idx = vec![0usize; p];
        loop {
            let r = idx.iter().map(|&k| axis[k] * axis[k]).sum::<f64>().sqrt();
            let w = smooth_radial_cutoff(r, r_in, band_radius);
            let mut full = vec![bi];
            full.extend(idx.iter().cloned());
            u.values[IxDyn(&full)] *= w;
            if !advance(&mut idx, n) {
                break;
            }
        }
    }
    let (out, _) = fourier_forward(&u, mu)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::{DensityWeight, FiberGrid};

    fn gaussian_samples(grid: &FiberGrid) -> SampledFiberFunction {
        SampledFiberFunction::sample(Side::Primal, grid.clone(), vec![vec![]], |_, xi| {
            C64::new((-0.5 * xi.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        })
    }

    #[test]
    fn gaussian_pair_closed_form() {
        let grid = FiberGrid::new(1, 12.0, 256).unwrap();
        let mu = DensityWeight::lebesgue();
        let f = gaussian_samples(&grid);
        let (fhat, rep) = fourier_forward(&f, &mu).unwrap();
        assert!(!rep.boundary_warning);
        let theta = grid.dual_axis();
        let s = (2.0 * std::f64::consts::PI).sqrt();
        let mut worst = 0.0f64;
        for (k, &t) in theta.iter().enumerate() {
            let expect = s * (-0.5 * t * t).exp();
            let got = fhat.values[IxDyn(&[0, k])];
            worst = worst.max((got - C64::new(expect, 0.0)).norm());
        }
        assert!(worst < 1e-8, "gaussian pair error {worst}");
    }

    #[test]
    fn roundtrip_identity_on_band_limited() {
        let grid = FiberGrid::new(1, 12.0, 256).unwrap();
        let mu = DensityWeight::constant(1.7);
        let f = gaussian_samples(&grid);
        let (fhat, _) = fourier_forward(&f, &mu).unwrap();
        let (back, _) = fourier_inverse(&fhat, &mu).unwrap();
        assert!(f.sup_abs_diff(&back) < 1e-8);
    }

    #[test]
    fn zero_maps_to_zero_and_mu_scales_linearly() {
        let grid = FiberGrid::new(1, 8.0, 64).unwrap();
        let z = SampledFiberFunction::zeros(Side::Primal, grid.clone(), vec![vec![]]);
        let (zhat, _) = fourier_forward(&z, &DensityWeight::lebesgue()).unwrap();
        assert_eq!(zhat.sup_abs(), 0.0);

        let f = gaussian_samples(&grid);
        let (h1, _) = fourier_forward(&f, &DensityWeight::constant(1.0)).unwrap();
        let (h2, _) = fourier_forward(&f, &DensityWeight::constant(2.0)).unwrap();
        let scaled = {
            let mut t = h1.clone();
            t.values.mapv_inplace(|v| v * 2.0);
            t
        };
        assert!(scaled.sup_abs_diff(&h2) < 1e-12);
    }

    #[test]
    fn real_even_input_gives_real_even_transform() {
        let grid = FiberGrid::new(1, 10.0, 128).unwrap();
        let f = SampledFiberFunction::sample(Side::Primal, grid.clone(), vec![vec![]], |_, xi| {
            C64::new((-0.5 * xi[0] * xi[0]).exp() * (1.0 + xi[0] * xi[0]), 0.0)
        });
        let (fhat, _) = fourier_forward(&f, &DensityWeight::lebesgue()).unwrap();
        let n = grid.points_per_axis;
        let mut worst = 0.0f64;
        for k in 1..n {
            let v = fhat.values[IxDyn(&[0, k])];
            worst = worst.max(v.im.abs());
            let w = fhat.values[IxDyn(&[0, n - k])];
            worst = worst.max((v - w).norm());
        }
        assert!(worst < 1e-10, "symmetry violation {worst}");
    }

    #[test]
    fn convolution_theorem_on_fiber() {
        // F(f * g) = F f . F g with the mu-weighted fiber convolution
        let grid = FiberGrid::new(1, 14.0, 256).unwrap();
        let muw = 1.3;
        let mu = DensityWeight::constant(muw);
        let fa = |x: f64| (-0.5 * x * x).exp();
        let fb = |x: f64| x * (-0.7 * x * x).exp();
        let f = SampledFiberFunction::sample(Side::Primal, grid.clone(), vec![vec![]], |_, xi| {
            C64::new(fa(xi[0]), 0.0)
        });
        let g = SampledFiberFunction::sample(Side::Primal, grid.clone(), vec![vec![]], |_, xi| {
            C64::new(fb(xi[0]), 0.0)
        });
        // direct weighted convolution on the grid (independent oracle)
        let xs = grid.primal_axis();
        let dx = grid.dx();
        let conv = SampledFiberFunction::sample(Side::Primal, grid.clone(), vec![vec![]], |_, xi| {
            let mut acc = 0.0;
            for (j, &y) in xs.iter().enumerate() {
                let _ = j;
                acc += fa(xi[0] - y) * fb(y);
            }
            C64::new(acc * dx * muw, 0.0)
        });
        let (lhs, _) = fourier_forward(&conv, &mu).unwrap();
        let (fh, _) = fourier_forward(&f, &mu).unwrap();
        let (gh, _) = fourier_forward(&g, &mu).unwrap();
        let mut prod = fh.clone();
        for (v, w) in prod.values.iter_mut().zip(gh.values.iter()) {
            *v *= *w;
        }
        assert!(lhs.sup_abs_diff(&prod) < 1e-6, "{}", lhs.sup_abs_diff(&prod));
    }

    #[test]
    fn transform_rules_gaussian() {
        let grid = FiberGrid::new(1, 12.0, 256).unwrap();
        let mu = DensityWeight::lebesgue();
        let s = (2.0 * std::f64::consts::PI).sqrt();
        let cf = ClosedFormFiber {
            value: Arc::new(|xi: &[f64]| C64::new((-0.5 * xi[0] * xi[0]).exp(), 0.0)),
            grad: Some(Arc::new(|xi: &[f64]| {
                vec![C64::new(-xi[0] * (-0.5 * xi[0] * xi[0]).exp(), 0.0)]
            })),
            hat_value: Some(Arc::new(move |t: &[f64]| C64::new(s * (-0.5 * t[0] * t[0]).exp(), 0.0))),
            hat_grad: Some(Arc::new(move |t: &[f64]| {
                vec![C64::new(-t[0] * s * (-0.5 * t[0] * t[0]).exp(), 0.0)]
            })),
        };
        let rep = check_transform_rules(&grid, &[vec![]], &mu, &cf, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn paley_wiener_projection_behaviour() {
        let grid = FiberGrid::new(1, 12.0, 256).unwrap();
        let mu = DensityWeight::lebesgue();
        // phi already band-limited inside the plateau: unchanged
        let bump = |x: f64, r: f64| {
            let s = (x / r).abs();
            if s < 1.0 {
                (1.0 - 1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        };
        let r_small = 2.0;
        let u = SampledFiberFunction::sample(Side::Primal, grid.clone(), vec![vec![]], |_, xi| {
            C64::new(bump(xi[0], r_small), 0.0)
        });
        let (phi, _) = fourier_forward(&u, &mu).unwrap();
        let proj = project_paley_wiener(&phi, &mu, 3.0).unwrap();
        assert!(phi.sup_abs_diff(&proj) < 1e-9);

        // zero stays zero
        let z = SampledFiberFunction::zeros(Side::Dual, grid.clone(), vec![vec![]]);
        let pz = project_paley_wiener(&z, &mu, 3.0).unwrap();
        assert_eq!(pz.sup_abs(), 0.0);

        // aliasing guard
        assert!(matches!(
            project_paley_wiener(&phi, &mu, 6.5),
            Err(SdqError::Aliasing { .. })
        ));

        // Gaussian: projection error bounded by the tail mass beyond the plateau
        let g = gaussian_samples(&grid);
        let (gh, _) = fourier_forward(&g, &mu).unwrap();
        let r = 3.0;
        let pg = project_paley_wiener(&gh, &mu, r).unwrap();
        let xs = grid.primal_axis();
        let dx = grid.dx();
        let tail: f64 = xs
            .iter()
            .filter(|x| x.abs() > 0.75 * r)
            .map(|x| (-0.5 * x * x).exp() * dx)
            .sum();
        assert!(gh.sup_abs_diff(&pg) <= tail, "{} vs tail {}", gh.sup_abs_diff(&pg), tail);
    }
}
