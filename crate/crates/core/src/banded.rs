//! Complex banded matrices used as discretized integral kernels.
//!
//! A kernel K(x_i, x_j) sampled on an n-point grid is stored with a half
//! bandwidth b, so only entries with |i - j| <= b are kept. Weighted products
//! implement quadrature composition (K1 * W * K2 with W = diag of quadrature
//! weights), which is the discrete form of kernel convolution on pair
//! groupoids. Dense matrices are the special case b = n - 1.

use crate::error::{Result, SdqError};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct BandedKernel {
    n: usize,
    half_band: usize,
    /// Row-major: entry (i, j) at data[i * (2b+1) + (j - i + b)].
    data: Vec<Complex64>,
}

impl BandedKernel {
    pub fn zeros(n: usize, half_band: usize) -> Self {
        let b = half_band.min(n.saturating_sub(1));
        BandedKernel {
            n,
            half_band: b,
            data: vec![Complex64::new(0.0, 0.0); n * (2 * b + 1)],
        }
    }

    pub fn dense_zeros(n: usize) -> Self {
        Self::zeros(n, n.saturating_sub(1))
    }

    pub fn from_fn(n: usize, half_band: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut k = Self::zeros(n, half_band);
        let b = k.half_band;
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(n - 1);
            for j in lo..=hi {
                k.data[i * (2 * b + 1) + (j + b - i)] = f(i, j);
            }
        }
        k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_band(&self) -> usize {
        self.half_band
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let b = self.half_band;
        if i >= self.n || j >= self.n || i.abs_diff(j) > b {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[i * (2 * b + 1) + (j + b - i)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let b = self.half_band;
        assert!(i.abs_diff(j) <= b, "entry ({i},{j}) outside band {b}");
        self.data[i * (2 * b + 1) + (j + b - i)] = v;
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// K1 + K2, band widened as needed.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(SdqError::ShapeMismatch(format!(
                "add: {} vs {}",
                self.n, other.n
            )));
        }
        let b = self.half_band.max(other.half_band);
        Ok(Self::from_fn(self.n, b, |i, j| self.get(i, j) + other.get(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(SdqError::ShapeMismatch(format!(
                "sub: {} vs {}",
                self.n, other.n
            )));
        }
        let b = self.half_band.max(other.half_band);
        Ok(Self::from_fn(self.n, b, |i, j| self.get(i, j) - other.get(i, j)))
    }

    /// Adjoint with respect to the weighted L^2 inner product: K*(i,j) = conj K(j,i).
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, self.half_band, |i, j| self.get(j, i).conj())
    }

    /// Quadrature composition (K1 * diag(w) * K2). Half bands add.
    pub fn compose(&self, w: &[f64], other: &Self) -> Result<Self> {
        if self.n != other.n || w.len() != self.n {
            return Err(SdqError::ShapeMismatch(format!(
                "compose: {} / {} / weights {}",
                self.n,
                other.n,
                w.len()
            )));
        }
        let n = self.n;
        let b1 = self.half_band;
        let b2 = other.half_band;
        let b = (b1 + b2).min(n.saturating_sub(1));
        let mut out = Self::zeros(n, b);
        let w1 = 2 * b1 + 1;
        let w2 = 2 * b2 + 1;
        let wo = 2 * b + 1;
        for i in 0..n {
            let jlo = i.saturating_sub(b1);
            let jhi = (i + b1).min(n - 1);
            for j in jlo..=jhi {
                let a = self.data[i * w1 + (j + b1 - i)] * w[j];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let klo = j.saturating_sub(b2).max(i.saturating_sub(b));
                let khi = (j + b2).min(n - 1).min(i + b);
                if klo > khi {
                    continue;
                }
                let orow = &mut out.data[i * wo..(i + 1) * wo];
                let brow = &other.data[j * w2..(j + 1) * w2];
                for k in klo..=khi {
                    orow[k + b - i] += a * brow[k + b2 - j];
                }
            }
        }
        Ok(out)
    }

    /// y = (K * diag(w)) x — the integral-operator action on l^2(w).
    pub fn apply(&self, w: &[f64], x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        let b = self.half_band;
        let row = 2 * b + 1;
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            let r = &self.data[i * row..(i + 1) * row];
            for j in lo..=hi {
                acc += r[j + b - i] * (w[j] * x[j]);
            }
            y[i] = acc;
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_abs_diff(&self, other: &Self) -> f64 {
        let b = self.half_band.max(other.half_band);
        let mut m = 0.0f64;
        for i in 0..self.n {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(self.n - 1);
            for j in lo..=hi {
                m = m.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.norm_sqr() == 0.0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Max |K(i,j)| over entries that a smaller half band `b` would drop.
    pub fn mass_outside_band(&self, b: usize) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.half_band);
            let hi = (i + self.half_band).min(self.n - 1);
            for j in lo..=hi {
                if i.abs_diff(j) > b {
                    m = m.max(self.get(i, j).norm());
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn compose_matches_dense_matmul() {
        let n = 12;
        let w: Vec<f64> = (0..n).map(|i| 0.5 + 0.1 * i as f64).collect();
        let a = BandedKernel::from_fn(n, 3, |i, j| c((i * 7 + j) as f64 * 0.1, (i as f64) - (j as f64)));
        let b = BandedKernel::from_fn(n, 2, |i, j| c((j * 5) as f64 * 0.2, 0.3 * i as f64));
        let p = a.compose(&w, &b).unwrap();
        let ad = a.to_dense();
        let bd = b.to_dense();
        let wd = DMatrix::from_fn(n, n, |i, j| if i == j { c(w[i], 0.0) } else { c(0.0, 0.0) });
        let pd = &ad * &wd * &bd;
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(p.get(i, j).re, pd[(i, j)].re, epsilon = 1e-12);
                assert_abs_diff_eq!(p.get(i, j).im, pd[(i, j)].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_involutive_and_anti_multiplicative() {
        let n = 10;
        let w: Vec<f64> = vec![0.7; n];
        let a = BandedKernel::from_fn(n, 2, |i, j| c(i as f64 * 0.3, j as f64 * 0.2 - 1.0));
        let b = BandedKernel::from_fn(n, 3, |i, j| c(0.1 * (i + j) as f64, 0.4));
        assert_eq!(a.adjoint().adjoint().sup_abs_diff(&a), 0.0);
        let lhs = a.compose(&w, &b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&w, &a.adjoint()).unwrap();
        assert!(lhs.sup_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn apply_matches_dense() {
        let n = 9;
        let w: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.05).collect();
        let a = BandedKernel::from_fn(n, 4, |i, j| c((i + 2 * j) as f64, -(i as f64)));
        let x: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let mut y = vec![c(0.0, 0.0); n];
        a.apply(&w, &x, &mut y);
        let ad = a.to_dense();
        for i in 0..n {
            let mut acc = c(0.0, 0.0);
            for j in 0..n {
                acc += ad[(i, j)] * w[j] * x[j];
            }
            assert!((acc - y[i]).norm() < 1e-12);
        }
    }
}
