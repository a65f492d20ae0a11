//! Local parametrizations of a groupoid near its unit space and structure
//! function extraction from the quadratic term of the composed coordinate
//! (groupoid Baker-Campbell-Hausdorff expansion).
//!
//! The parametrization psi(u, v) satisfies psi(u, 0) = unit at u and
//! r(psi(u,v)) = u; sigma(u, v) is the source in chart coordinates, and
//! p_map(u, v, w) the fiber coordinate of psi(u,v) psi(sigma(u,v), w).
//! First derivatives of sigma give the anchor coefficients and the
//! antisymmetrized quadratic term of p_map gives the bracket coefficients:
//!   a_ij(u) = d sigma_j / d v_i (u, 0),
//!   c_ijk(u) = B_k(u, f_i, f_j) - B_k(u, f_j, f_i),
//! with B the mixed second derivative of p_map at (u, 0, 0).

use crate::error::{Result, SdqError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use super::GroupoidModel;

pub type SigmaFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type PMapFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct LocalParametrization {
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub sigma: SigmaFn,
    pub p_map: PMapFn,
}

impl LocalParametrization {
    /// sigma(u,0) = u, p(u,0,w) = w, p(u,v,0) = v on seeded random points.
    pub fn validate(&self, scale: f64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..24 {
            let u: Vec<f64> = (0..self.base_dim).map(|_| rng.gen_range(-scale..scale)).collect();
            let v: Vec<f64> = (0..self.fiber_dim).map(|_| rng.gen_range(-scale..scale)).collect();
            let zero = vec![0.0; self.fiber_dim];
            let s0 = (self.sigma)(&u, &zero);
            for j in 0..self.base_dim {
                if (s0[j] - u[j]).abs() > 1e-12 {
                    return Err(SdqError::Config("sigma(u,0) != u".into()));
                }
            }
            let pv0 = (self.p_map)(&u, &v, &zero);
            let p0w = (self.p_map)(&u, &zero, &v);
            for k in 0..self.fiber_dim {
                if (pv0[k] - v[k]).abs() > 1e-12 || (p0w[k] - v[k]).abs() > 1e-12 {
                    return Err(SdqError::Config("p_map unit laws broken".into()));
                }
            }
        }
        Ok(())
    }
}

/// Output of the structure-function extraction at one base point.
#[derive(Clone, Debug)]
pub struct BchData {
    /// b[i][j][k] = B_k(u, f_i, f_j), the quadratic term of p_map.
    pub b: Vec<Vec<Vec<f64>>>,
    /// a[i][j] = d sigma_j / d v_i (u, 0).
    pub a: Vec<Vec<f64>>,
    /// c[i][j][k] = b[i][j][k] - b[j][i][k].
    pub c: Vec<Vec<Vec<f64>>>,
}

/// Central-difference extraction of (B, a, c) at base point u with step h.
pub fn bch_extract(par: &LocalParametrization, u: &[f64], h: f64) -> Result<BchData> {
    let p = par.fiber_dim;
    let n = par.base_dim;
    let ev = |v: &[f64], w: &[f64]| (par.p_map)(u, v, w);
    let unit = |i: usize, s: f64| -> Vec<f64> {
        let mut v = vec![0.0; p];
        v[i] = s;
        v
    };
    let mut b = vec![vec![vec![0.0; p]; p]; p];
    for i in 0..p {
        for j in 0..p {
            let pp = ev(&unit(i, h), &unit(j, h));
            let pm = ev(&unit(i, h), &unit(j, -h));
            let mp = ev(&unit(i, -h), &unit(j, h));
            let mm = ev(&unit(i, -h), &unit(j, -h));
            for k in 0..p {
                let val = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
                if !val.is_finite() {
                    return Err(SdqError::NonFinite("bch mixed difference".into()));
                }
                b[i][j][k] = val;
            }
        }
    }
    let mut a = vec![vec![0.0; n]; p];
    for i in 0..p {
        let sp = (par.sigma)(u, &unit(i, h));
        let sm = (par.sigma)(u, &unit(i, -h));
        for j in 0..n {
            let val = (sp[j] - sm[j]) / (2.0 * h);
            if !val.is_finite() {
                return Err(SdqError::NonFinite("anchor difference".into()));
            }
            a[i][j] = val;
        }
    }
    let mut c = vec![vec![vec![0.0; p]; p]; p];
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                c[i][j][k] = b[i][j][k] - b[j][i][k];
            }
        }
    }
    Ok(BchData { b, a, c })
}

impl GroupoidModel {
    /// The chart-natural parametrization of each model.
    pub fn parametrization(&self) -> Result<LocalParametrization> {
        match self {
            GroupoidModel::FinitePair(_) => Err(SdqError::Unsupported(
                "finite pair groupoid has no smooth parametrization".into(),
            )),
            GroupoidModel::GridPair(_) => Ok(LocalParametrization {
                base_dim: 1,
                fiber_dim: 1,
                // psi(u, v) = (u, u + v): source u + v, composition adds chords
                sigma: Arc::new(|u: &[f64], v: &[f64]| vec![u[0] + v[0]]),
                p_map: Arc::new(|_u: &[f64], v: &[f64], w: &[f64]| vec![v[0] + w[0]]),
            }),
            GroupoidModel::Nilpotent(g) => {
                let g1 = g.clone();
                Ok(LocalParametrization {
                    base_dim: 0,
                    fiber_dim: g.dim,
                    sigma: Arc::new(|_u: &[f64], _v: &[f64]| vec![]),
                    p_map: Arc::new(move |_u: &[f64], v: &[f64], w: &[f64]| g1.compose(v, w)),
                })
            }
            GroupoidModel::Transformation(m) => {
                let mm = m.clone();
                Ok(LocalParametrization {
                    base_dim: 2,
                    fiber_dim: 1,
                    // sigma(u, v) = source of (v, u) = act(-v, u) = R(v) u
                    sigma: Arc::new(move |u: &[f64], v: &[f64]| mm.rotate(u, v[0])),
                    p_map: Arc::new(|_u: &[f64], v: &[f64], w: &[f64]| vec![v[0] + w[0]]),
                })
            }
        }
    }
}
