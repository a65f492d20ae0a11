//! Exponential nilpotent Lie groups of step <= 2 in exponential coordinates.
//!
//! Group law x . y = x + y + [x,y]/2 (exact by Baker-Campbell-Hausdorff at
//! step 2), Haar measure = Lebesgue measure (unimodular), Exp = identity on
//! coordinates. Algebra elements are kept symbolically as sums of convolution
//! products of closed-form kernels x -> scale * u(x/hbar); convolutions stay
//! exact and representation norms are evaluated blockwise.
//!
//! Reduced norms: the left regular representation decomposes over the central
//! frequency. For the abelian case the blocks are the characters; for the
//! 3-dimensional Heisenberg pattern [e1,e2] = gamma e3 each central frequency
//! lambda gives an integral operator on L^2(R) with kernel
//! K_lambda(t,s) = F_{23}[k](s - t, gamma lambda (t+s)/2, lambda),
//! whose norm is estimated by power iteration on a banded discretization.
//! The sup over sampled frequencies (plus the characters) is the norm.

use crate::banded::BandedKernel;
use crate::error::{Result, SdqError};
use crate::powerit::{banded_operator_norm, PowerIterSettings};
use crate::symbol::GaussPoly;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NilKind {
    Abelian,
    /// dim = 3 with [e1, e2] = gamma e3, gamma != 0.
    HeisenbergLike { gamma: f64 },
    General,
}

#[derive(Clone, Debug)]
pub struct NilNormSettings {
    /// Scan range of the symbol-side frequency variables.
    pub eps_max: f64,
    pub eps_step: f64,
    /// Half-extent of the 1-d representation line.
    pub t_half: f64,
    /// Grid points across one kernel support radius (sets h_t = hbar r_u / pps).
    pub points_per_support: usize,
    /// Relative tail threshold defining kernel support radii.
    pub tail_tol: f64,
    /// Parabolic refinement of the frequency scan around the maximum.
    pub refine: bool,
}

impl Default for NilNormSettings {
    fn default() -> Self {
        NilNormSettings {
            eps_max: 5.0,
            eps_step: 0.25,
            t_half: 6.0,
            points_per_support: 16,
            tail_tol: 1e-8,
            refine: true,
        }
    }
}

#[derive(Clone)]
pub struct NilpotentGroup {
    pub dim: usize,
    /// Structure constants: [x, y]_k = sum_{ij} c[i][j][k] x_i y_j.
    pub c: Vec<Vec<Vec<f64>>>,
    /// Constant Haar weight (Lebesgue scale).
    pub haar: f64,
    pub norm_settings: NilNormSettings,
}

impl NilpotentGroup {
    pub fn new(dim: usize, c: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let g = NilpotentGroup {
            dim,
            c,
            haar: 1.0,
            norm_settings: NilNormSettings::default(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn abelian(dim: usize) -> Self {
        NilpotentGroup {
            dim,
            c: vec![vec![vec![0.0; dim]; dim]; dim],
            haar: 1.0,
            norm_settings: NilNormSettings::default(),
        }
    }

    pub fn heisenberg() -> Self {
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        c[0][1][2] = 1.0;
        c[1][0][2] = -1.0;
        NilpotentGroup {
            dim: 3,
            c,
            haar: 1.0,
            norm_settings: NilNormSettings::default(),
        }
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for k in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let cijk = self.c[i][j][k];
                    if cijk != 0.0 {
                        acc += cijk * x[i] * y[j];
                    }
                }
            }
            out[k] = acc;
        }
        out
    }

    /// x . y = x + y + [x,y]/2 in exponential coordinates.
    pub fn compose(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let b = self.bracket(x, y);
        (0..self.dim).map(|k| x[k] + y[k] + 0.5 * b[k]).collect()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| -v).collect()
    }

    pub fn kind(&self) -> NilKind {
        let d = self.dim;
        let zero = self.c.iter().flatten().flatten().all(|&v| v == 0.0);
        if zero {
            return NilKind::Abelian;
        }
        if d == 3 {
            let gamma = self.c[0][1][2];
            let mut ok = gamma != 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let expect = if (i, j, k) == (0, 1, 2) {
                            gamma
                        } else if (i, j, k) == (1, 0, 2) {
                            -gamma
                        } else {
                            0.0
                        };
                        if (self.c[i][j][k] - expect).abs() > 0.0 {
                            ok = false;
                        }
                    }
                }
            }
            if ok {
                return NilKind::HeisenbergLike { gamma };
            }
        }
        NilKind::General
    }

    /// Antisymmetry, centrality of the derived algebra (step <= 2), and
    /// associativity of the exponential-coordinate product on random triples.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if (self.c[i][j][k] + self.c[j][i][k]).abs() > 1e-14 {
                        return Err(SdqError::Config("structure constants must be antisymmetric".into()));
                    }
                }
            }
        }
        // centrality: if e_k is hit by any bracket, e_k must bracket to zero
        for k in 0..d {
            let hit = (0..d).any(|i| (0..d).any(|j| self.c[i][j][k] != 0.0));
            if hit {
                let central = (0..d).all(|j| (0..d).all(|m| self.c[k][j][m] == 0.0));
                if !central {
                    return Err(SdqError::Config(
                        "structure constants exceed nilpotency step 2".into(),
                    ));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..32 {
            let rv = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let (x, y, z) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
            let left = self.compose(&self.compose(&x, &y), &z);
            let right = self.compose(&x, &self.compose(&y, &z));
            for k in 0..d {
                if (left[k] - right[k]).abs() > 1e-12 {
                    return Err(SdqError::Config("group law not associative".into()));
                }
            }
            let e = self.compose(&x, &self.inverse(&x));
            if e.iter().any(|v| v.abs() > 1e-12) {
                return Err(SdqError::Config("inverse law broken".into()));
            }
        }
        Ok(())
    }
}

/// Closed-form kernel x -> scale * u(x / hbar) on the group.
#[derive(Clone)]
pub struct NilKernelFactor {
    pub u: GaussPoly,
    pub scale: f64,
    pub hbar: f64,
}

impl NilKernelFactor {
    pub fn eval(&self, x: &[f64]) -> C64 {
        let xi: Vec<f64> = x.iter().map(|v| v / self.hbar).collect();
        self.u.eval(&[], &xi) * self.scale
    }

    pub fn support_radius(&self, tol: f64) -> f64 {
        self.hbar * self.u.eps_tail_radius(tol)
    }

    fn star(&self) -> Self {
        NilKernelFactor {
            u: self.u.flip_eps().conj(),
            scale: self.scale,
            hbar: self.hbar,
        }
    }
}

/// coeff * (f_1 * f_2 * ... * f_k), a convolution product.
#[derive(Clone)]
pub struct NilTerm {
    pub coeff: C64,
    pub factors: Vec<NilKernelFactor>,
}

/// Symbolic element of the group convolution algebra: a sum of terms.
#[derive(Clone)]
pub struct NilElement {
    pub terms: Vec<NilTerm>,
}

impl NilElement {
    pub fn single(factor: NilKernelFactor) -> Self {
        NilElement {
            terms: vec![NilTerm {
                coeff: C64::new(1.0, 0.0),
                factors: vec![factor],
            }],
        }
    }

    pub fn zero() -> Self {
        NilElement { terms: vec![] }
    }

    pub fn scale(&mut self, s: C64) {
        for t in &mut self.terms {
            t.coeff *= s;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        NilElement { terms }
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(NilTerm {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        NilElement { terms }
    }

    pub fn involute(&self) -> Self {
        NilElement {
            terms: self
                .terms
                .iter()
                .map(|t| NilTerm {
                    coeff: t.coeff.conj(),
                    factors: t.factors.iter().rev().map(|f| f.star()).collect(),
                })
                .collect(),
        }
    }

    pub fn max_support_radius(&self, tol: f64) -> f64 {
        let mut r: f64 = 0.0;
        for t in &self.terms {
            let sum: f64 = t.factors.iter().map(|f| f.support_radius(tol)).sum();
            r = r.max(sum);
        }
        r
    }

    /// Pointwise evaluation of the element (with the convolution Haar weight
    /// `w` per product) at arbitrary group points. Terms with at most two
    /// factors are supported; quadrature uses `nodes` points per axis over the
    /// support ball of the second factor.
    pub fn eval_at(&self, model: &NilpotentGroup, w: f64, x: &[f64], nodes: usize) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for term in &self.terms {
            match term.factors.len() {
                0 => {}
                1 => acc += term.coeff * term.factors[0].eval(x),
                2 => {
                    let f = &term.factors[0];
                    let g = &term.factors[1];
                    // f*g(x) = w \int f(x . eta) g(eta^{-1}) d eta,
                    // eta ranges over the (negated) support ball of g
                    let r = g.support_radius(1e-12) * 1.05;
                    let h = 2.0 * r / nodes as f64;
                    let d = model.dim;
                    let mut idx = vec![0usize; d];
                    let mut sum = C64::new(0.0, 0.0);
                    loop {
                        let eta: Vec<f64> =
                            idx.iter().map(|&i| -r + (i as f64 + 0.5) * h).collect();
                        let ginv = g.eval(&model.inverse(&eta));
                        if ginv.norm_sqr() > 0.0 {
                            let xe = model.compose(x, &eta);
                            sum += f.eval(&xe) * ginv;
                        }
                        let mut k = d;
                        let mut done = true;
                        while k > 0 {
                            k -= 1;
                            idx[k] += 1;
                            if idx[k] < nodes {
                                done = false;
                                break;
                            }
                            idx[k] = 0;
                        }
                        if done {
                            break;
                        }
                    }
                    acc += term.coeff * w * sum * h.powi(d as i32);
                }
                n => {
                    return Err(SdqError::Unsupported(format!(
                        "pointwise evaluation of {n}-fold convolution products"
                    )))
                }
            }
        }
        Ok(acc)
    }

    /// Reduced norm via the central-frequency decomposition of the left
    /// regular representation. `w` is the Haar scaling of the convolution
    /// (|hbar|^{-p} for tangent-field elements, 1 otherwise).
    pub fn reduced_norm(
        &self,
        model: &NilpotentGroup,
        hbar: f64,
        w: f64,
        settings: &PowerIterSettings,
    ) -> Result<f64> {
        if self.terms.is_empty() {
            return Ok(0.0);
        }
        if hbar == 0.0 {
            return Err(SdqError::Unsupported("hbar = 0 elements live in the dual-function fiber".into()));
        }
        let ns = &model.norm_settings;
        match model.kind() {
            NilKind::Abelian => self.character_sup(model, hbar, w, None),
            NilKind::HeisenbergLike { gamma } => {
                let chars = self.character_sup(model, hbar, w, Some(2))?;
                let blocks = self.heisenberg_block_sup(model, hbar, w, gamma, ns, settings)?;
                Ok(chars.max(blocks))
            }
            NilKind::General => Err(SdqError::Unsupported(
                "reduced norms for general step-2 groups; declare abelian or Heisenberg-type constants".into(),
            )),
        }
    }

    /// Sup over the one-dimensional representations (characters of the
    /// abelianization). `central_axis = Some(k)` pins the frequency of axis k
    /// to zero (characters kill the derived algebra).
    fn character_sup(
        &self,
        model: &NilpotentGroup,
        hbar: f64,
        w: f64,
        central_axis: Option<usize>,
    ) -> Result<f64> {
        let d = model.dim;
        let ns = &model.norm_settings;
        // character of one factor at frequency zeta:
        // int scale u(x/hbar) e^{i zeta x} dx
        //   = scale hbar^d (2 pi)^d (F^-1 u)(hbar zeta)
        let transformed: Vec<Vec<(C64, GaussPoly)>> = self
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .map(|f| {
                        let v = f.u.inverse_fourier_eps()?;
                        let amp = f.scale * hbar.abs().powi(d as i32) * TWO_PI.powi(d as i32);
                        Ok((C64::new(amp, 0.0), v))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let steps = (2.0 * ns.eps_max / ns.eps_step).round() as usize + 1;
        let mut sup = 0.0f64;
        let mut eps = vec![0.0f64; d];
        let mut idx = vec![0usize; d];
        loop {
            for k in 0..d {
                eps[k] = -ns.eps_max + ns.eps_step * idx[k] as f64;
            }
            if let Some(k) = central_axis {
                eps[k] = 0.0;
            }
            let mut total = C64::new(0.0, 0.0);
            for (term, tf) in self.terms.iter().zip(transformed.iter()) {
                let mut val = term.coeff * w.powi(term.factors.len() as i32 - 1);
                for (amp, v) in tf {
                    val *= *amp * v.eval(&[], &eps);
                }
                total += val;
            }
            sup = sup.max(total.norm() * w);
            let mut k = d;
            let mut done = true;
            while k > 0 {
                k -= 1;
                if central_axis == Some(k) {
                    continue;
                }
                idx[k] += 1;
                if idx[k] < steps {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if done {
                break;
            }
        }
        Ok(sup)
    }

    fn heisenberg_block_sup(
        &self,
        model: &NilpotentGroup,
        hbar: f64,
        w: f64,
        gamma: f64,
        ns: &NilNormSettings,
        settings: &PowerIterSettings,
    ) -> Result<f64> {
        // per-factor partially transformed profiles along axes (2, 3):
        // v(xi1, a, b) with F_{23}[k](x1, omega, lambda)
        //   = scale hbar^2 (2 pi)^2 v(x1/hbar, hbar omega, hbar lambda)
        let prepared: Vec<Vec<(f64, GaussPoly, f64)>> = self
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .map(|f| {
                        let v = f.u.inverse_fourier_eps_axes(&[1, 2])?;
                        let amp = f.scale * hbar * hbar * TWO_PI * TWO_PI;
                        let r = f.support_radius(ns.tail_tol);
                        Ok((amp, v, r))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let r_u = self
            .terms
            .iter()
            .flat_map(|t| t.factors.iter())
            .map(|f| f.support_radius(ns.tail_tol))
            .fold(0.0f64, f64::max);
        if r_u == 0.0 {
            return Ok(0.0);
        }
        let h_t = r_u / ns.points_per_support as f64;
        let n_t = (2.0 * (ns.t_half / h_t).ceil() as usize + 1).min(60_001);
        let t0 = -(n_t as f64 - 1.0) / 2.0 * h_t;
        let weights = vec![h_t; n_t];

        let mut block_norm = |eps3: f64| -> Result<f64> {
            let lambda = eps3 / hbar;
            let mut total: Option<BandedKernel> = None;
            for (term, tf) in self.terms.iter().zip(prepared.iter()) {
                let mut mat: Option<BandedKernel> = None;
                for (amp, v, r) in tf {
                    let band = (r / h_t).ceil() as usize + 1;
                    let k = BandedKernel::from_fn(n_t, band, |ti, si| {
                        let t = t0 + ti as f64 * h_t;
                        let s = t0 + si as f64 * h_t;
                        let x1 = s - t;
                        if x1.abs() > *r {
                            return C64::new(0.0, 0.0);
                        }
                        v.eval(&[], &[x1 / hbar, gamma * eps3 * (t + s) / 2.0, eps3]) * *amp
                    });
                    mat = Some(match mat {
                        None => k,
                        Some(m) => m.compose(&weights, &k)?,
                    });
                }
                if let Some(mut m) = mat {
                    m.scale(term.coeff * w.powi(term.factors.len() as i32 - 1));
                    total = Some(match total {
                        None => m,
                        Some(t) => t.add(&m)?,
                    });
                }
            }
            let total = total.ok_or_else(|| SdqError::Unsupported("empty element".into()))?;
            Ok(w * banded_operator_norm(&total, &weights, settings)?)
        };

        let steps = (ns.eps_max / ns.eps_step).round() as usize;
        let mut values = Vec::with_capacity(2 * steps + 1);
        for i in -(steps as isize)..=(steps as isize) {
            let eps3 = i as f64 * ns.eps_step;
            if eps3 == 0.0 {
                continue;
            }
            values.push((eps3, block_norm(eps3)?));
        }
        let mut sup = values.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
        if ns.refine {
            if let Some((imax, _)) = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            {
                if imax > 0 && imax + 1 < values.len() {
                    // quadratic interpolation through the three samples
                    // around the scan maximum
                    let (x0, y0) = values[imax - 1];
                    let (x1, y1) = values[imax];
                    let (x2, y2) = values[imax + 1];
                    let d01 = x1 - x0;
                    let d12 = x2 - x1;
                    if (d01 - d12).abs() < 1e-12 * d01.abs() {
                        let denom = y0 - 2.0 * y1 + y2;
                        if denom.abs() > 1e-300 {
                            let vertex = x1 + 0.5 * d01 * (y0 - y2) / denom;
                            if vertex.is_finite()
                                && vertex != 0.0
                                && vertex.abs() <= ns.eps_max
                                && (vertex - x1).abs() <= d01
                            {
                                sup = sup.max(block_norm(vertex)?);
                            }
                        }
                    }
                }
            }
        }
        Ok(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_group_law_is_step_two_bch() {
        let g = NilpotentGroup::heisenberg();
        g.validate().unwrap();
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        let xy = g.compose(&x, &y);
        assert_eq!(xy, vec![1.0, 1.0, 0.5]);
        assert_eq!(g.kind(), NilKind::HeisenbergLike { gamma: 1.0 });
    }

    #[test]
    fn invalid_step_three_constants_rejected() {
        // [e1, e2] = e2 makes e2 both derived and non-central
        let mut c = vec![vec![vec![0.0; 2]; 2]; 2];
        c[0][1][1] = 1.0;
        c[1][0][1] = -1.0;
        assert!(NilpotentGroup::new(2, c).is_err());
    }

    #[test]
    fn abelian_grid_convolution_of_gaussians() {
        // on R, Q-type kernels: conv of two centered Gaussians has summed variances
        let model = NilpotentGroup::abelian(1);
        let hbar = 1.0;
        let mk = |s: f64| NilKernelFactor {
            u: GaussPoly::gaussian(0, 1, C64::new(1.0, 0.0), &[], &[Some(s)]),
            scale: 1.0,
            hbar,
        };
        let f = NilElement::single(mk(0.8));
        let g = NilElement::single(mk(1.1));
        let fg = f.convolve(&g);
        // closed form: (f*g)(x) = sqrt(2 pi s1^2 s2^2/(s1^2+s2^2)) e^{-x^2/(2(s1^2+s2^2))}
        let s1s = 0.8f64 * 0.8;
        let s2s = 1.1f64 * 1.1;
        let amp = (2.0 * std::f64::consts::PI * s1s * s2s / (s1s + s2s)).sqrt();
        for &x in &[0.0, 0.4, -1.2] {
            let got = fg.eval_at(&model, 1.0, &[x], 4000).unwrap();
            let expect = amp * (-(x * x) / (2.0 * (s1s + s2s))).exp();
            assert!((got.re - expect).abs() < 1e-6, "x={x}: {} vs {expect}", got.re);
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn involution_is_anti_homomorphism_pointwise() {
        let model = NilpotentGroup::heisenberg();
        let mk = |c: C64| NilKernelFactor {
            u: GaussPoly::gaussian(0, 3, c, &[], &[Some(1.0), Some(0.9), Some(1.2)]).mul_eps(0),
            scale: 1.0,
            hbar: 0.5,
        };
        let f = NilElement::single(mk(C64::new(1.0, 0.3)));
        let g = NilElement::single(mk(C64::new(0.2, -0.7)));
        let lhs = f.convolve(&g).involute();
        let rhs = g.involute().convolve(&f.involute());
        for x in [[0.1, 0.05, -0.02], [0.0, 0.0, 0.0], [-0.2, 0.1, 0.04]] {
            let a = lhs.eval_at(&model, 1.0, &x, 60).unwrap();
            let b = rhs.eval_at(&model, 1.0, &x, 60).unwrap();
            assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn involute_matches_pointwise_definition() {
        // group case R: f*(x) = conj f(-x) on an asymmetric sample
        let model = NilpotentGroup::abelian(1);
        let f = NilElement::single(NilKernelFactor {
            u: GaussPoly::gaussian(0, 1, C64::new(1.0, 0.5), &[], &[Some(1.0)]).mul_eps(0),
            scale: 2.0,
            hbar: 0.7,
        });
        let fs = f.involute();
        for &x in &[0.3, -0.9, 1.4] {
            let a = fs.eval_at(&model, 1.0, &[x], 10).unwrap();
            let b = f.eval_at(&model, 1.0, &[-x], 10).unwrap().conj();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn abelian_reduced_norm_is_symbol_sup() {
        // || Q_hbar(f) || = sup |f| for the abelian group: characters exhaust the spectrum
        let model = NilpotentGroup::abelian(1);
        let hbar = 0.3;
        // f(eps) = e^{-eps^2/2}: u = F^-1 f, Q kernel = hbar^{-1} u(x/hbar)
        let f_sym = GaussPoly::gaussian(0, 1, C64::new(1.0, 0.0), &[], &[Some(1.0)]);
        let u = f_sym.inverse_fourier_eps().unwrap();
        let q = NilElement::single(NilKernelFactor {
            u,
            scale: 1.0 / hbar,
            hbar,
        });
        let norm = q
            .reduced_norm(&model, hbar, 1.0, &PowerIterSettings::default())
            .unwrap();
        assert!((norm - 1.0).abs() < 1e-9, "norm {norm}");
    }
}
