//! Transformation groupoid of R acting by rotations on an annulus in R^2.
//!
//! Arrows are (t, m) with range m and source t^{-1} m, where the action of t
//! rotates a point clockwise by t (so the anchor of the algebroid is the
//! counterclockwise rotation field (-u2, u1)). The base is a polar lattice
//! whose angular spacing equals the arrow-lattice spacing in t, so group
//! displacements act exactly on grid points; convolution, involution, and the
//! per-orbit representation blocks are lattice-exact.

use crate::banded::BandedKernel;
use crate::error::{Result, SdqError};
use crate::powerit::{banded_operator_norm, PowerIterSettings};
use ndarray::Array3;
use num_complex::Complex64;

type C64 = Complex64;

#[derive(Clone, Debug)]
pub struct TransformationModel {
    pub radii: Vec<f64>,
    pub n_angles: usize,
    /// t-lattice indices run over -t_steps ..= t_steps with spacing 2 pi / n_angles.
    pub t_steps: usize,
}

impl TransformationModel {
    pub fn new(radii: Vec<f64>, n_angles: usize, t_half: f64) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
            return Err(SdqError::Config("radii must be positive".into()));
        }
        if n_angles < 8 {
            return Err(SdqError::Config("need at least 8 angles".into()));
        }
        let dt = 2.0 * std::f64::consts::PI / n_angles as f64;
        let t_steps = (t_half / dt).floor() as usize;
        if t_steps == 0 {
            return Err(SdqError::Config("t_half smaller than the lattice spacing".into()));
        }
        Ok(TransformationModel {
            radii,
            n_angles,
            t_steps,
        })
    }

    pub fn dt(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_angles as f64
    }

    pub fn t_half(&self) -> f64 {
        self.t_steps as f64 * self.dt()
    }

    pub fn n_t(&self) -> usize {
        2 * self.t_steps + 1
    }

    pub fn t_value(&self, idx: usize) -> f64 {
        (idx as f64 - self.t_steps as f64) * self.dt()
    }

    pub fn angle_value(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    pub fn base_point(&self, ri: usize, j: usize) -> Vec<f64> {
        let th = self.angle_value(j);
        vec![self.radii[ri] * th.cos(), self.radii[ri] * th.sin()]
    }

    /// Counterclockwise rotation of a base point by angle phi.
    pub fn rotate(&self, m: &[f64], phi: f64) -> Vec<f64> {
        let (c, s) = (phi.cos(), phi.sin());
        vec![c * m[0] - s * m[1], s * m[0] + c * m[1]]
    }

    /// act(t, m): the group action (clockwise rotation by t).
    pub fn act(&self, t: f64, m: &[f64]) -> Vec<f64> {
        self.rotate(m, -t)
    }

    pub fn validate(&self) -> Result<()> {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..16 {
            let m = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (s, t) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            // action property: act(s, act(t, m)) = act(s + t, m)
            let a = self.act(s, &self.act(t, &m));
            let b = self.act(s + t, &m);
            if (a[0] - b[0]).abs() + (a[1] - b[1]).abs() > 1e-12 {
                return Err(SdqError::Config("group action not associative".into()));
            }
        }
        Ok(())
    }
}

/// Sampled function on the arrow lattice, indexed [t][radius][angle];
/// the angle index is that of the arrow's range point.
#[derive(Clone)]
pub struct ActionElement {
    pub values: Array3<C64>,
}

impl ActionElement {
    pub fn zeros(model: &TransformationModel) -> Self {
        ActionElement {
            values: Array3::zeros((model.n_t(), model.radii.len(), model.n_angles)),
        }
    }

    pub fn from_fn(
        model: &TransformationModel,
        mut f: impl FnMut(f64, usize, usize) -> C64,
    ) -> Self {
        let mut out = Self::zeros(model);
        for it in 0..model.n_t() {
            let t = model.t_value(it);
            for ri in 0..model.radii.len() {
                for j in 0..model.n_angles {
                    out.values[(it, ri, j)] = f(t, ri, j);
                }
            }
        }
        out
    }

    pub fn scale(&mut self, s: C64) {
        self.values.mapv_inplace(|v| v * s);
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.values.dim() != other.values.dim() {
            return Err(SdqError::ShapeMismatch("action element shapes".into()));
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(other.values.iter()) {
            *v += *w;
        }
        Ok(out)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// f*g(t, m) = w int f(tau, m) g(t - tau, R(tau) m) d tau, exact on the lattice.
    pub fn convolve(&self, model: &TransformationModel, other: &Self, w: f64) -> Result<Self> {
        if self.values.dim() != other.values.dim() {
            return Err(SdqError::ShapeMismatch("action element shapes".into()));
        }
        let nt = model.n_t();
        let na = model.n_angles;
        let ts = model.t_steps as isize;
        let dt = model.dt();
        let mut out = Self::zeros(model);
        for it in 0..nt {
            let t = it as isize - ts;
            for ri in 0..model.radii.len() {
                for j in 0..na {
                    let mut acc = C64::new(0.0, 0.0);
                    for itau in 0..nt {
                        let tau = itau as isize - ts;
                        let rem = t - tau;
                        if rem < -ts || rem > ts {
                            continue;
                        }
                        let f = self.values[(itau, ri, j)];
                        if f.norm_sqr() == 0.0 {
                            continue;
                        }
                        // R(tau) rotates counterclockwise: angle index j + tau
                        let jr = (j as isize + tau).rem_euclid(na as isize) as usize;
                        acc += f * other.values[((rem + ts) as usize, ri, jr)];
                    }
                    out.values[(it, ri, j)] = acc * (w * dt);
                }
            }
        }
        Ok(out)
    }

    /// f*(t, m) = conj f(-t, R(t) m), exact on the lattice.
    pub fn involute(&self, model: &TransformationModel) -> Self {
        let nt = model.n_t();
        let na = model.n_angles;
        let ts = model.t_steps as isize;
        let mut out = self.clone();
        for it in 0..nt {
            let t = it as isize - ts;
            let it_inv = (-t + ts) as usize;
            for ri in 0..model.radii.len() {
                for j in 0..na {
                    let jr = (j as isize + t).rem_euclid(na as isize) as usize;
                    out.values[(it, ri, j)] = self.values[(it_inv, ri, jr)].conj();
                }
            }
        }
        out
    }

    /// Sup over units of the left-regular block norms. Blocks along one orbit
    /// are unitarily equivalent (intertwined by lattice shifts), so one block
    /// per radius suffices.
    pub fn reduced_norm(&self, model: &TransformationModel, settings: &PowerIterSettings) -> Result<f64> {
        let nt = model.n_t();
        let na = model.n_angles;
        let ts = model.t_steps as isize;
        let dt = model.dt();
        let weights = vec![dt; nt];
        let mut sup = 0.0f64;
        for ri in 0..model.radii.len() {
            // unit m0 at angle 0; kernel B(t, s) = f(t - s, R(-t) m0)
            let band = nt - 1;
            let k = BandedKernel::from_fn(nt, band, |ti, si| {
                let t = ti as isize - ts;
                let s = si as isize - ts;
                let x = t - s;
                if x < -ts || x > ts {
                    return C64::new(0.0, 0.0);
                }
                let j = (-t).rem_euclid(na as isize) as usize;
                self.values[((x + ts) as usize, ri, j)]
            });
            sup = sup.max(banded_operator_norm(&k, &weights, settings)?);
        }
        Ok(sup)
    }
}
