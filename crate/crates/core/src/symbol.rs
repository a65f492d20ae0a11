//! Closed-form phase-space symbols: sums of (monomial x Gaussian) terms.
//!
//! A term is c * prod_i q_i^{a_i} e^{-alpha_i q_i^2/2} * prod_k e_k^{b_k}
//! e^{-beta_k e_k^2/2}, with complex coefficient c. The class is closed under
//! sums, products, partial derivatives, multiplication by coordinates, and
//! fiberwise Fourier transforms (Hermite-type recursions), which is exactly
//! what the quantizer, the Poisson bracket, and the sweep oracles need in
//! closed form.

use crate::error::{Result, SdqError};
use num_complex::Complex64;

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct GpTerm {
    pub coeff: C64,
    pub qpow: Vec<u8>,
    pub epow: Vec<u8>,
    /// Gaussian precisions: the factor is e^{-qprec_i q_i^2 / 2} (0 = none).
    pub qprec: Vec<f64>,
    pub eprec: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly {
    pub nq: usize,
    pub ne: usize,
    pub terms: Vec<GpTerm>,
}

impl GaussPoly {
    pub fn zero(nq: usize, ne: usize) -> Self {
        GaussPoly { nq, ne, terms: vec![] }
    }

    /// A single Gaussian term with per-axis standard deviations.
    /// sigma = None on an axis means no Gaussian factor there.
    pub fn gaussian(nq: usize, ne: usize, coeff: C64, sigma_q: &[Option<f64>], sigma_e: &[Option<f64>]) -> Self {
        let qprec = (0..nq)
            .map(|i| sigma_q[i].map(|s| 1.0 / (s * s)).unwrap_or(0.0))
            .collect();
        let eprec = (0..ne)
            .map(|i| sigma_e[i].map(|s| 1.0 / (s * s)).unwrap_or(0.0))
            .collect();
        GaussPoly {
            nq,
            ne,
            terms: vec![GpTerm {
                coeff,
                qpow: vec![0; nq],
                epow: vec![0; ne],
                qprec,
                eprec,
            }],
        }
    }

    pub fn constant(nq: usize, ne: usize, c: C64) -> Self {
        GaussPoly {
            nq,
            ne,
            terms: vec![GpTerm {
                coeff: c,
                qpow: vec![0; nq],
                epow: vec![0; ne],
                qprec: vec![0.0; nq],
                eprec: vec![0.0; ne],
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nq, self.ne), (other.nq, other.ne));
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let mut out = GaussPoly { nq: self.nq, ne: self.ne, terms };
        out.simplify();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= s;
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!((self.nq, self.ne), (other.nq, other.ne));
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(GpTerm {
                    coeff: a.coeff * b.coeff,
                    qpow: a.qpow.iter().zip(&b.qpow).map(|(x, y)| x + y).collect(),
                    epow: a.epow.iter().zip(&b.epow).map(|(x, y)| x + y).collect(),
                    qprec: a.qprec.iter().zip(&b.qprec).map(|(x, y)| x + y).collect(),
                    eprec: a.eprec.iter().zip(&b.eprec).map(|(x, y)| x + y).collect(),
                });
            }
        }
        let mut out = GaussPoly { nq: self.nq, ne: self.ne, terms };
        out.simplify();
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.conj();
        }
        out
    }

    /// epsilon -> -epsilon (used by involutions).
    pub fn flip_eps(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            let odd: u32 = t.epow.iter().map(|&p| p as u32).sum();
            if odd % 2 == 1 {
                t.coeff = -t.coeff;
            }
        }
        out
    }

    pub fn mul_q(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.qpow[axis] += 1;
        }
        out
    }

    pub fn mul_eps(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.epow[axis] += 1;
        }
        out
    }

    pub fn d_q(&self, axis: usize) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.qpow[axis] > 0 {
                let mut t1 = t.clone();
                t1.coeff *= C64::new(t.qpow[axis] as f64, 0.0);
                t1.qpow[axis] -= 1;
                terms.push(t1);
            }
            if t.qprec[axis] != 0.0 {
                let mut t2 = t.clone();
                t2.coeff *= C64::new(-t.qprec[axis], 0.0);
                t2.qpow[axis] += 1;
                terms.push(t2);
            }
        }
        let mut out = GaussPoly { nq: self.nq, ne: self.ne, terms };
        out.simplify();
        out
    }

    pub fn d_eps(&self, axis: usize) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.epow[axis] > 0 {
                let mut t1 = t.clone();
                t1.coeff *= C64::new(t.epow[axis] as f64, 0.0);
                t1.epow[axis] -= 1;
                terms.push(t1);
            }
            if t.eprec[axis] != 0.0 {
                let mut t2 = t.clone();
                t2.coeff *= C64::new(-t.eprec[axis], 0.0);
                t2.epow[axis] += 1;
                terms.push(t2);
            }
        }
        let mut out = GaussPoly { nq: self.nq, ne: self.ne, terms };
        out.simplify();
        out
    }

    pub fn eval(&self, q: &[f64], e: &[f64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.coeff;
            let mut expo = 0.0;
            for i in 0..self.nq {
                for _ in 0..t.qpow[i] {
                    v *= q[i];
                }
                expo -= 0.5 * t.qprec[i] * q[i] * q[i];
            }
            for k in 0..self.ne {
                for _ in 0..t.epow[k] {
                    v *= e[k];
                }
                expo -= 0.5 * t.eprec[k] * e[k] * e[k];
            }
            acc += v * expo.exp();
        }
        acc
    }

    /// Inverse fiber transform: (F^-1 g)(xi) = (2 pi)^{-p} \int g(e) e^{+i <e, xi>} de
    /// along all epsilon axes (each must carry a Gaussian).
    pub fn inverse_fourier_eps(&self) -> Result<Self> {
        self.fourier_eps_impl(true)
    }

    /// Forward fiber transform: (F f)(e) = \int f(xi) e^{-i <e, xi>} dxi.
    pub fn fourier_eps(&self) -> Result<Self> {
        self.fourier_eps_impl(false)
    }

    fn fourier_eps_impl(&self, inverse: bool) -> Result<Self> {
        let mut out = GaussPoly::zero(self.nq, self.ne);
        for t in &self.terms {
            out = out.add(&fourier_term(self.nq, self.ne, t, inverse, &(0..self.ne).collect::<Vec<_>>())?);
        }
        Ok(out)
    }

    /// Transform only the listed epsilon axes (others are spectators).
    pub fn inverse_fourier_eps_axes(&self, axes: &[usize]) -> Result<Self> {
        let mut out = GaussPoly::zero(self.nq, self.ne);
        for t in &self.terms {
            out = out.add(&fourier_term(self.nq, self.ne, t, true, axes)?);
        }
        Ok(out)
    }

    /// Conservative radius containing the epsilon-side support down to
    /// `tol` times the peak envelope, per axis, maximized.
    pub fn eps_tail_radius(&self, tol: f64) -> f64 {
        let mut rmax: f64 = 0.0;
        for t in &self.terms {
            for k in 0..self.ne {
                let beta = t.eprec[k];
                if beta <= 0.0 {
                    continue;
                }
                let b = t.epow[k] as f64;
                // envelope x^b e^{-beta x^2/2}: peak at x* = sqrt(b/beta)
                let xstar = (b / beta).sqrt().max(1.0 / beta.sqrt());
                let peak = xstar.powf(b) * (-0.5 * beta * xstar * xstar).exp();
                let mut r = xstar;
                while r.powf(b) * (-0.5 * beta * r * r).exp() > tol * peak {
                    r *= 1.05;
                    if r > 1e6 {
                        break;
                    }
                }
                rmax = rmax.max(r);
            }
        }
        rmax
    }

    pub fn sup_abs_on_grid(&self, qs: &[Vec<f64>], es: &[Vec<f64>]) -> f64 {
        let mut m = 0.0f64;
        for q in qs {
            for e in es {
                m = m.max(self.eval(q, e).norm());
            }
        }
        m
    }

    fn prune(&mut self) {
        self.terms.retain(|t| t.coeff.norm_sqr() > 0.0);
    }

    pub fn simplify(&mut self) {
        use std::collections::HashMap;
        let mut map: HashMap<(Vec<u8>, Vec<u8>, Vec<u64>, Vec<u64>), C64> = HashMap::new();
        for t in &self.terms {
            let key = (
                t.qpow.clone(),
                t.epow.clone(),
                t.qprec.iter().map(|x| x.to_bits()).collect(),
                t.eprec.iter().map(|x| x.to_bits()).collect(),
            );
            *map.entry(key).or_insert(C64::new(0.0, 0.0)) += t.coeff;
        }
        let mut terms: Vec<GpTerm> = map
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|((qpow, epow, qb, eb), coeff)| GpTerm {
                coeff,
                qpow,
                epow,
                qprec: qb.into_iter().map(f64::from_bits).collect(),
                eprec: eb.into_iter().map(f64::from_bits).collect(),
            })
            .collect();
        terms.sort_by(|a, b| {
            (&a.qpow, &a.epow, a.qprec.iter().map(|x| x.to_bits()).collect::<Vec<_>>())
                .cmp(&(&b.qpow, &b.epow, b.qprec.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        });
        self.terms = terms;
    }
}

/// Transform of one term along `axes`. Recursion strips monomial powers:
/// F^-1[e_k t] = -i d_xi_k F^-1[t], F[xi_k t] = +i d_e_k F[t].
fn fourier_term(nq: usize, ne: usize, t: &GpTerm, inverse: bool, axes: &[usize]) -> Result<GaussPoly> {
    // find an axis in `axes` with a leftover power
    if let Some(&k) = axes.iter().find(|&&k| t.epow[k] > 0) {
        let mut t1 = t.clone();
        t1.epow[k] -= 1;
        let inner = fourier_term(nq, ne, &t1, inverse, axes)?;
        let d = inner.d_eps(k);
        let factor = if inverse { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
        return Ok(d.scaled(factor));
    }
    // pure Gaussian along the transformed axes
    let mut out = t.clone();
    let mut coeff = t.coeff;
    for &k in axes {
        let beta = t.eprec[k];
        if beta <= 0.0 {
            return Err(SdqError::Unsupported(
                "fiber Fourier transform needs a Gaussian factor on every transformed axis".into(),
            ));
        }
        // \int e^{-beta x^2/2 +- i x y} dx = sqrt(2 pi / beta) e^{-y^2/(2 beta)}
        let amp = (2.0 * std::f64::consts::PI / beta).sqrt();
        coeff *= C64::new(
            if inverse { amp / (2.0 * std::f64::consts::PI) } else { amp },
            0.0,
        );
        out.eprec[k] = 1.0 / beta;
    }
    out.coeff = coeff;
    Ok(GaussPoly { nq, ne, terms: vec![out] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quad_inverse_fourier_1d(f: &GaussPoly, xi: f64) -> C64 {
        // (2pi)^-1 \int f(e) e^{+i e xi} de by trapezoid
        let n = 20001;
        let l = 40.0;
        let h = 2.0 * l / (n as f64 - 1.0);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let e = -l + h * i as f64;
            let phase = C64::new(0.0, e * xi).exp();
            acc += f.eval(&[], &[e]) * phase;
        }
        acc * C64::new(h / (2.0 * std::f64::consts::PI), 0.0)
    }

    #[test]
    fn gaussian_inverse_fourier_matches_quadrature() {
        // f(e) = e^2 exp(-e^2/2)
        let g = GaussPoly::gaussian(0, 1, C64::new(1.0, 0.0), &[], &[Some(1.0)]);
        let f = g.mul_eps(0).mul_eps(0);
        let u = f.inverse_fourier_eps().unwrap();
        for &xi in &[0.0, 0.6, 1.7, -2.3] {
            let expect = quad_inverse_fourier_1d(&f, xi);
            let got = u.eval(&[], &[xi]);
            assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-8);
            assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-8);
        }
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let g = GaussPoly::gaussian(1, 2, C64::new(0.7, 0.1), &[Some(2.0)], &[Some(1.3), Some(0.8)]);
        let f = g.mul_eps(0).mul_eps(1).mul_q(0);
        let round = f.fourier_eps().unwrap().inverse_fourier_eps().unwrap();
        // F then F^-1 returns the reflection-free identity on this class
        for &(q, e1, e2) in &[(0.3, 0.5, -0.2), (-1.1, 1.9, 0.4), (0.0, 0.0, 0.0)] {
            let a = f.eval(&[q], &[e1, e2]);
            let b = round.eval(&[q], &[e1, e2]);
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g = GaussPoly::gaussian(1, 1, C64::new(1.0, 0.0), &[Some(1.5)], &[Some(0.9)]);
        let f = g.mul_q(0).mul_eps(0).mul_eps(0);
        let fd = |q: f64, e: f64| {
            let h = 1e-6;
            (f.eval(&[q], &[e + h]) - f.eval(&[q], &[e - h])) / C64::new(2.0 * h, 0.0)
        };
        let d = f.d_eps(0);
        for &(q, e) in &[(0.4, 0.8), (-0.6, 1.2)] {
            let a = d.eval(&[q], &[e]);
            let b = fd(q, e);
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn tail_radius_bounds_support() {
        let g = GaussPoly::gaussian(0, 1, C64::new(3.0, 0.0), &[], &[Some(1.0)]);
        let f = g.mul_eps(0);
        let r = f.eps_tail_radius(1e-8);
        // beyond r the (normalized) envelope is below 1e-8
        let peak = (0..2000)
            .map(|i| f.eval(&[], &[i as f64 * 0.01]).norm())
            .fold(0.0f64, f64::max);
        assert!(f.eval(&[], &[r * 1.01]).norm() <= 1.1e-8 * peak);
    }
}
