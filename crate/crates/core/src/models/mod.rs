//! Concrete groupoid realizations with Haar weights, convolution, involution,
//! representation norms, and exponential maps.
//!
//! Four kinds are shipped: the finite pair groupoid (algebra sanity), the
//! grid pair groupoid over a 1-d base (Weyl calculus), exponential nilpotent
//! groups of step <= 2 (Lie-Poisson), and transformation groupoids of R
//! acting by rotations on a polar lattice.

mod action;
mod nilpotent;
mod pair;
mod param;

pub use action::{ActionElement, TransformationModel};
pub use nilpotent::{NilElement, NilKernelFactor, NilNormSettings, NilTerm, NilpotentGroup};
pub use pair::{FinitePair, GridPair};
pub use param::{bch_extract, BchData, LocalParametrization};

use crate::banded::BandedKernel;
use crate::error::{Result, SdqError};
use crate::fourier::SampledFiberFunction;
use crate::powerit::{banded_operator_norm, PowerIterSettings};
use num_complex::Complex64;
use std::sync::Arc;

pub type C64 = Complex64;

#[derive(Clone)]
pub enum GroupoidModel {
    FinitePair(FinitePair),
    GridPair(GridPair),
    Nilpotent(NilpotentGroup),
    Transformation(TransformationModel),
}

impl GroupoidModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GroupoidModel::FinitePair(_) => "finite-pair",
            GroupoidModel::GridPair(_) => "grid-pair",
            GroupoidModel::Nilpotent(_) => "exp-nilpotent-group",
            GroupoidModel::Transformation(_) => "transformation",
        }
    }

    /// Fiber dimension of the associated algebroid.
    pub fn fiber_dim(&self) -> usize {
        match self {
            GroupoidModel::FinitePair(_) => 0,
            GroupoidModel::GridPair(_) => 1,
            GroupoidModel::Nilpotent(g) => g.dim,
            GroupoidModel::Transformation(_) => 1,
        }
    }

    /// Composition/inversion consistency checks: exhaustive for the finite
    /// pair groupoid, seeded random triples otherwise.
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupoidModel::FinitePair(m) => m.validate(),
            GroupoidModel::GridPair(m) => m.validate(),
            GroupoidModel::Nilpotent(m) => m.validate(),
            GroupoidModel::Transformation(m) => m.validate(),
        }
    }
}

/// An arrow of one of the concrete models, in coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Arrow {
    /// Pair groupoid arrow (range, source).
    Pair(f64, f64),
    /// Group element in exponential coordinates.
    Group(Vec<f64>),
    /// Transformation-groupoid arrow (group element t, range point m).
    Action { t: f64, range_point: Vec<f64> },
}

#[derive(Clone)]
pub enum AlgebraRep {
    /// Kernel matrix over units (pair kinds).
    Kernel(BandedKernel),
    /// Symbolic element of a nilpotent group algebra.
    Nil(NilElement),
    /// Sampled function on the (t-lattice x polar base) arrow grid.
    Action(ActionElement),
    /// The hbar = 0 fiber: a function on the dual bundle (multiplication algebra).
    DualFunction(SampledFiberFunction),
}

/// An element of the groupoid convolution algebra at a fixed hbar fiber.
#[derive(Clone)]
pub struct AlgebraElement {
    pub model: Arc<GroupoidModel>,
    pub hbar_tag: f64,
    /// Tangent-field elements convolve against the |hbar|^{-p}-scaled Haar system.
    pub tangent_scaled: bool,
    pub rep: AlgebraRep,
}

impl AlgebraElement {
    pub fn haar_scale(&self) -> f64 {
        if self.tangent_scaled && self.hbar_tag != 0.0 {
            self.hbar_tag
                .abs()
                .powi(-(self.model.fiber_dim() as i32))
        } else {
            1.0
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.model, &other.model) {
            return Err(SdqError::ModelMismatch);
        }
        if self.hbar_tag != other.hbar_tag || self.tangent_scaled != other.tangent_scaled {
            return Err(SdqError::HbarMismatch(self.hbar_tag, other.hbar_tag));
        }
        Ok(())
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        match &mut out.rep {
            AlgebraRep::Kernel(k) => k.scale(s),
            AlgebraRep::Nil(e) => e.scale(s),
            AlgebraRep::Action(a) => a.scale(s),
            AlgebraRep::DualFunction(d) => d.values.mapv_inplace(|v| v * s),
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let rep = match (&self.rep, &other.rep) {
            (AlgebraRep::Kernel(a), AlgebraRep::Kernel(b)) => AlgebraRep::Kernel(a.add(b)?),
            (AlgebraRep::Nil(a), AlgebraRep::Nil(b)) => AlgebraRep::Nil(a.add(b)),
            (AlgebraRep::Action(a), AlgebraRep::Action(b)) => AlgebraRep::Action(a.add(b)?),
            (AlgebraRep::DualFunction(a), AlgebraRep::DualFunction(b)) => {
                let mut t = a.clone();
                for (v, w) in t.values.iter_mut().zip(b.values.iter()) {
                    *v += *w;
                }
                AlgebraRep::DualFunction(t)
            }
            _ => return Err(SdqError::ModelMismatch),
        };
        Ok(AlgebraElement { rep, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }
}

/// Groupoid convolution f * g with the model's Haar quadrature. Tangent-field
/// elements pick up the |hbar|^{-p} Haar scaling.
pub fn convolve(f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement> {
    f.check_compatible(g)?;
    let w = f.haar_scale();
    let rep = match (&f.rep, &g.rep, f.model.as_ref()) {
        (AlgebraRep::Kernel(a), AlgebraRep::Kernel(b), GroupoidModel::FinitePair(m)) => {
            let mut k = a.compose(&m.weights(), b)?;
            if w != 1.0 {
                k.scale(C64::new(w, 0.0));
            }
            AlgebraRep::Kernel(k)
        }
        (AlgebraRep::Kernel(a), AlgebraRep::Kernel(b), GroupoidModel::GridPair(m)) => {
            let mut k = a.compose(&m.weights, b)?;
            if w != 1.0 {
                k.scale(C64::new(w, 0.0));
            }
            AlgebraRep::Kernel(k)
        }
        (AlgebraRep::Nil(a), AlgebraRep::Nil(b), GroupoidModel::Nilpotent(_)) => {
            AlgebraRep::Nil(a.convolve(b))
        }
        (AlgebraRep::Action(a), AlgebraRep::Action(b), GroupoidModel::Transformation(m)) => {
            AlgebraRep::Action(a.convolve(m, b, w)?)
        }
        (AlgebraRep::DualFunction(a), AlgebraRep::DualFunction(b), _) => {
            // hbar = 0 fiber: C0(E*) is the commutative product algebra
            let mut t = a.clone();
            for (v, u) in t.values.iter_mut().zip(b.values.iter()) {
                *v *= *u;
            }
            AlgebraRep::DualFunction(t)
        }
        _ => return Err(SdqError::ModelMismatch),
    };
    Ok(AlgebraElement { rep, ..f.clone() })
}

/// Involution f*(gamma) = conj f(gamma^{-1}).
pub fn involute(f: &AlgebraElement) -> AlgebraElement {
    let rep = match (&f.rep, f.model.as_ref()) {
        (AlgebraRep::Kernel(k), _) => AlgebraRep::Kernel(k.adjoint()),
        (AlgebraRep::Nil(e), _) => AlgebraRep::Nil(e.involute()),
        (AlgebraRep::Action(a), GroupoidModel::Transformation(m)) => AlgebraRep::Action(a.involute(m)),
        (AlgebraRep::DualFunction(d), _) => {
            let mut t = d.clone();
            t.values.mapv_inplace(|v| v.conj());
            AlgebraRep::DualFunction(t)
        }
        (AlgebraRep::Action(_), _) => unreachable!("action rep on non-transformation model"),
    };
    AlgebraElement { rep, ..f.clone() }
}

/// Reduced norm: sup over units of the left-regular-representation operator
/// norm, each block estimated by power iteration to relative tolerance tol.
pub fn reduced_norm(f: &AlgebraElement, tol: f64) -> Result<f64> {
    let settings = PowerIterSettings {
        tol,
        ..PowerIterSettings::default()
    };
    let w = f.haar_scale();
    let raw = match (&f.rep, f.model.as_ref()) {
        (AlgebraRep::Kernel(k), GroupoidModel::FinitePair(m)) => {
            banded_operator_norm(k, &m.weights(), &settings)?
        }
        (AlgebraRep::Kernel(k), GroupoidModel::GridPair(m)) => {
            banded_operator_norm(k, &m.weights, &settings)?
        }
        (AlgebraRep::Nil(e), GroupoidModel::Nilpotent(m)) => {
            e.reduced_norm(m, f.hbar_tag, f.haar_scale(), &settings)?
        }
        (AlgebraRep::Action(a), GroupoidModel::Transformation(m)) => a.reduced_norm(m, &settings)?,
        (AlgebraRep::DualFunction(d), _) => d.sup_abs(),
        _ => return Err(SdqError::ModelMismatch),
    };
    // the left regular representation of C*(G, w * lambda) is w times the
    // Lebesgue-normalized one
    Ok(match &f.rep {
        AlgebraRep::Nil(_) => raw, // scaling handled inside (per-term)
        _ => w * raw,
    })
}

/// Left and Weyl exponential maps of the model at a base point.
/// Returns (Exp^L(X), Exp^W(X)).
pub fn exp_maps(model: &GroupoidModel, base_point: &[f64], fiber: &[f64]) -> Result<(Arrow, Arrow)> {
    match model {
        GroupoidModel::FinitePair(_) => Err(SdqError::Unsupported(
            "the finite pair groupoid carries no exponential map".into(),
        )),
        GroupoidModel::GridPair(m) => {
            let x = base_point[0];
            let v = fiber[0];
            for val in [x + v, x - 0.5 * v, x + 0.5 * v] {
                if val < m.min() || val > m.max() {
                    return Err(SdqError::OutOfNeighbourhood(format!(
                        "point {val} outside base grid [{}, {}]",
                        m.min(),
                        m.max()
                    )));
                }
            }
            Ok((Arrow::Pair(x, x + v), Arrow::Pair(x - 0.5 * v, x + 0.5 * v)))
        }
        GroupoidModel::Nilpotent(_) => {
            let g = fiber.to_vec();
            Ok((Arrow::Group(g.clone()), Arrow::Group(g)))
        }
        GroupoidModel::Transformation(m) => {
            let t = fiber[0];
            if t.abs() > m.t_half() {
                return Err(SdqError::OutOfNeighbourhood(format!(
                    "group displacement {t} outside the arrow lattice (|t| <= {})",
                    m.t_half()
                )));
            }
            let exp_l = Arrow::Action {
                t,
                range_point: base_point.to_vec(),
            };
            let exp_w = Arrow::Action {
                t,
                range_point: m.rotate(base_point, -0.5 * t),
            };
            Ok((exp_l, exp_w))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_maps_fix_units() {
        let grid = GridPair::uniform(-2.0, 2.0, 41);
        let m = GroupoidModel::GridPair(grid);
        let (l, w) = exp_maps(&m, &[0.5], &[0.0]).unwrap();
        assert_eq!(l, Arrow::Pair(0.5, 0.5));
        assert_eq!(w, Arrow::Pair(0.5, 0.5));
    }

    #[test]
    fn grid_pair_weyl_exp_is_midpoint_chord() {
        let grid = GridPair::uniform(-2.0, 2.0, 41);
        let m = GroupoidModel::GridPair(grid);
        let (l, w) = exp_maps(&m, &[0.2], &[0.6]).unwrap();
        assert_eq!(l, Arrow::Pair(0.2, 0.8));
        match w {
            Arrow::Pair(a, b) => {
                // midpoint 0.2, chord b - a = 0.6
                assert!((0.5 * (a + b) - 0.2).abs() < 1e-15);
                assert!((b - a - 0.6).abs() < 1e-15);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn grid_pair_exp_out_of_box_errors() {
        let grid = GridPair::uniform(-1.0, 1.0, 21);
        let m = GroupoidModel::GridPair(grid);
        assert!(matches!(
            exp_maps(&m, &[0.9], &[0.5]),
            Err(SdqError::OutOfNeighbourhood(_))
        ));
    }
}
