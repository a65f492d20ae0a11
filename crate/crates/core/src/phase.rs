//! Phase-space observables on the dual bundle E*.
//!
//! Observables come in three concrete flavours: closed-form symbols
//! (polynomial x Gaussian, exact under brackets and transforms), band-limited
//! functions defined by a compactly supported inverse transform (the honest
//! Paley-Wiener class at grid resolution), and grid samples.

use crate::error::{Result, SdqError};
use crate::fourier::SampledFiberFunction;
use crate::symbol::GaussPoly;
use num_complex::Complex64;
use std::sync::Arc;

pub type C64 = Complex64;

/// A function of the base alone, f(q, eps) = A(q); quantizes to a
/// multiplication operator.
#[derive(Clone)]
pub struct BaseOnlySymbol {
    pub base: GaussPoly,
}

/// f(q, eps) = A(q) * (F u)(eps) with u(xi) = amplitude * bump(|xi|/radius),
/// the standard C-infinity bump. The inverse fiber transform is exactly
/// supported in |xi| <= radius, so f lies in the Paley-Wiener class at any
/// grid resolution. One-dimensional fibers only.
#[derive(Clone)]
pub struct BandLimitedSymbol {
    pub base: GaussPoly,
    pub radius: f64,
    pub amplitude: f64,
    nodes: Arc<Vec<(f64, f64)>>,
}

impl BandLimitedSymbol {
    pub fn new(base: GaussPoly, radius: f64, amplitude: f64) -> Self {
        let n = 4096;
        let mut nodes = Vec::with_capacity(n + 1);
        // trapezoid nodes on [-1, 1]; the bump vanishes to all orders at the
        // endpoints so the rule is spectrally accurate
        for i in 0..=n {
            let s = -1.0 + 2.0 * i as f64 / n as f64;
            nodes.push((s, bump(s)));
        }
        BandLimitedSymbol {
            base,
            radius,
            amplitude,
            nodes: Arc::new(nodes),
        }
    }

    /// u(xi) = amplitude * bump(xi / radius): the inverse fiber transform.
    pub fn u(&self, xi: f64) -> f64 {
        self.amplitude * bump(xi / self.radius)
    }

    /// Fiber profile (F u)(eps) = int u(xi) e^{-i eps xi} dxi (real, even).
    pub fn fiber_value(&self, eps: f64) -> f64 {
        let h = 2.0 / (self.nodes.len() - 1) as f64;
        let mut acc = 0.0;
        for &(s, b) in self.nodes.iter() {
            acc += b * (eps * self.radius * s).cos();
        }
        // endpoints carry zero weight anyway (bump vanishes there)
        self.amplitude * self.radius * acc * h
    }

    pub fn fiber_derivative(&self, eps: f64) -> f64 {
        let h = 2.0 / (self.nodes.len() - 1) as f64;
        let mut acc = 0.0;
        for &(s, b) in self.nodes.iter() {
            acc -= b * self.radius * s * (eps * self.radius * s).sin();
        }
        self.amplitude * self.radius * acc * h
    }
}

pub fn bump(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// Closure-backed observable (results of generic bracket evaluations).
#[derive(Clone)]
pub struct CustomPhase {
    pub nq: usize,
    pub ne: usize,
    pub f: Arc<dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync>,
}

#[derive(Clone)]
pub enum PhaseFunction {
    /// Closed-form polynomial x Gaussian symbol.
    Symbolic(GaussPoly),
    /// Function of the base variable only.
    BaseOnly(BaseOnlySymbol),
    /// Band-limited observable with exactly supported inverse transform.
    BandLimited(BandLimitedSymbol),
    /// Dual-side samples over base points x dual fiber grid.
    Grid(SampledFiberFunction),
    /// Arbitrary evaluator.
    Custom(CustomPhase),
}

impl PhaseFunction {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            PhaseFunction::Symbolic(g) => (g.nq, g.ne),
            PhaseFunction::BaseOnly(b) => (b.base.nq, b.base.ne),
            PhaseFunction::BandLimited(b) => (b.base.nq, 1),
            PhaseFunction::Grid(s) => (s.base_points.first().map(|p| p.len()).unwrap_or(0), s.grid.fiber_dim),
            PhaseFunction::Custom(c) => (c.nq, c.ne),
        }
    }

    pub fn eval(&self, q: &[f64], e: &[f64]) -> C64 {
        match self {
            PhaseFunction::Symbolic(g) => g.eval(q, e),
            PhaseFunction::BaseOnly(b) => b.base.eval(q, &[]),
            PhaseFunction::BandLimited(b) => b.base.eval(q, &[]) * b.fiber_value(e[0]),
            PhaseFunction::Custom(c) => (c.f)(q, e),
            PhaseFunction::Grid(_) => C64::new(f64::NAN, 0.0),
        }
    }

    pub fn is_base_only(&self) -> bool {
        match self {
            PhaseFunction::BaseOnly(_) => true,
            PhaseFunction::Symbolic(g) => g
                .terms
                .iter()
                .all(|t| t.epow.iter().all(|&p| p == 0) && t.eprec.iter().all(|&x| x == 0.0)),
            _ => false,
        }
    }

    /// Radius containing the inverse fiber transform (down to `tol` of peak).
    pub fn band_radius(&self, tol: f64) -> Result<f64> {
        match self {
            PhaseFunction::BandLimited(b) => Ok(b.radius),
            PhaseFunction::Symbolic(g) => Ok(g.inverse_fourier_eps()?.eps_tail_radius(tol)),
            _ => Err(SdqError::Unsupported("band radius needs a closed-form observable".into())),
        }
    }

    pub fn grad_q(&self, q: &[f64], e: &[f64], step: f64) -> Vec<C64> {
        match self {
            PhaseFunction::Symbolic(g) => (0..g.nq).map(|j| g.d_q(j).eval(q, e)).collect(),
            PhaseFunction::BaseOnly(b) => (0..b.base.nq).map(|j| b.base.d_q(j).eval(q, &[])).collect(),
            PhaseFunction::BandLimited(b) => {
                let fib = b.fiber_value(e[0]);
                (0..b.base.nq)
                    .map(|j| b.base.d_q(j).eval(q, &[]) * fib)
                    .collect()
            }
            _ => fd_grad(|qq, ee| self.eval(qq, ee), q, e, true, step),
        }
    }

    pub fn grad_eps(&self, q: &[f64], e: &[f64], step: f64) -> Vec<C64> {
        match self {
            PhaseFunction::Symbolic(g) => (0..g.ne).map(|k| g.d_eps(k).eval(q, e)).collect(),
            PhaseFunction::BaseOnly(b) => vec![C64::new(0.0, 0.0); b.base.ne],
            PhaseFunction::BandLimited(b) => {
                vec![b.base.eval(q, &[]) * b.fiber_derivative(e[0])]
            }
            _ => fd_grad(|qq, ee| self.eval(qq, ee), q, e, false, step),
        }
    }

    pub fn conj(&self) -> PhaseFunction {
        match self {
            PhaseFunction::Symbolic(g) => PhaseFunction::Symbolic(g.conj()),
            PhaseFunction::BaseOnly(b) => PhaseFunction::BaseOnly(BaseOnlySymbol { base: b.base.conj() }),
            PhaseFunction::BandLimited(b) => PhaseFunction::BandLimited(BandLimitedSymbol {
                base: b.base.conj(),
                ..b.clone()
            }),
            PhaseFunction::Grid(s) => {
                let mut t = s.clone();
                t.values.mapv_inplace(|v| v.conj());
                PhaseFunction::Grid(t)
            }
            PhaseFunction::Custom(c) => {
                let f = c.f.clone();
                PhaseFunction::Custom(CustomPhase {
                    nq: c.nq,
                    ne: c.ne,
                    f: Arc::new(move |q, e| f(q, e).conj()),
                })
            }
        }
    }

    /// Sup of |f| over base sample points x dual fiber grid.
    pub fn sup_on_dual_grid(&self, base_points: &[Vec<f64>], dual_points: &[Vec<f64>]) -> f64 {
        match self {
            PhaseFunction::Grid(s) => s.sup_abs(),
            _ => {
                let mut m = 0.0f64;
                for q in base_points {
                    for e in dual_points {
                        m = m.max(self.eval(q, e).norm());
                    }
                }
                m
            }
        }
    }
}

fn fd_grad(
    f: impl Fn(&[f64], &[f64]) -> C64,
    q: &[f64],
    e: &[f64],
    base_side: bool,
    step: f64,
) -> Vec<C64> {
    let n = if base_side { q.len() } else { e.len() };
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let x = if base_side { q[j] } else { e[j] };
        let h = step.max(1e-9) * (1.0 + x.abs());
        let (mut qu, mut qd) = (q.to_vec(), q.to_vec());
        let (mut eu, mut ed) = (e.to_vec(), e.to_vec());
        if base_side {
            qu[j] += h;
            qd[j] -= h;
        } else {
            eu[j] += h;
            ed[j] -= h;
        }
        out.push((f(&qu, &eu) - f(&qd, &ed)) / C64::new(2.0 * h, 0.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_limited_inverse_transform_supported_in_radius() {
        // the defining property of the class: u vanishes outside |xi| <= R
        let base = GaussPoly::constant(0, 0, C64::new(1.0, 0.0));
        let b = BandLimitedSymbol::new(base, 3.0, 1.0);
        assert_eq!(b.u(3.2), 0.0);
        assert!(b.u(0.0) > 0.9);
        // fiber profile peaks at 0 for a nonnegative u
        assert!(b.fiber_value(0.0) > b.fiber_value(1.0).abs());
    }

    #[test]
    fn band_limited_fiber_profile_matches_quadrature_oracle() {
        let base = GaussPoly::constant(0, 0, C64::new(1.0, 0.0));
        let b = BandLimitedSymbol::new(base, 2.0, 1.5);
        // independent mid-point oracle
        let n = 30001;
        let h = 4.0 / n as f64;
        for &eps in &[0.0, 0.7, 2.3] {
            let mut acc = 0.0;
            for i in 0..n {
                let xi = -2.0 + (i as f64 + 0.5) * h;
                acc += b.u(xi) * (eps * xi).cos() * h;
            }
            assert!((b.fiber_value(eps) - acc).abs() < 1e-9, "eps={eps}");
        }
    }

    #[test]
    fn symbolic_gradients_match_fd() {
        let g = GaussPoly::gaussian(1, 1, C64::new(1.0, 0.0), &[Some(1.5)], &[Some(1.0)]);
        let f = PhaseFunction::Symbolic(g.mul_eps(0));
        let q = [0.4];
        let e = [-0.8];
        let ga = f.grad_eps(&q, &e, 1e-6);
        let custom = PhaseFunction::Custom(CustomPhase {
            nq: 1,
            ne: 1,
            f: Arc::new(move |qq, ee| f_eval(qq, ee)),
        });
        fn f_eval(q: &[f64], e: &[f64]) -> C64 {
            let g = GaussPoly::gaussian(1, 1, C64::new(1.0, 0.0), &[Some(1.5)], &[Some(1.0)]);
            g.mul_eps(0).eval(q, e)
        }
        let gf = custom.grad_eps(&q, &e, 1e-6);
        assert!((ga[0] - gf[0]).norm() < 1e-6);
    }
}
