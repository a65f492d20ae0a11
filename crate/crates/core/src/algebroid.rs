//! Lie algebroids in chart-local form: structure functions a_ij (anchor
//! coefficients) and c_ijk (bracket coefficients), axiom checks, and the
//! induced operations on sections.
//!
//! A point-base chart (n = 0) encodes the pure Lie algebra case; all base
//! derivatives and integrals then contribute zero.

use crate::error::{Result, SdqError};
use crate::symbol::GaussPoly;
use num_complex::Complex64;
use std::sync::Arc;

/// Axis-aligned box in R^n together with the sample points used by the
/// pointwise checks. n = 0 is a single-point base.
#[derive(Clone)]
pub struct ChartDomain {
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub base_min: Vec<f64>,
    pub base_max: Vec<f64>,
    pub sample_points: Vec<Vec<f64>>,
}

impl ChartDomain {
    pub fn point_base(fiber_dim: usize) -> Self {
        ChartDomain {
            base_dim: 0,
            fiber_dim,
            base_min: vec![],
            base_max: vec![],
            sample_points: vec![vec![]],
        }
    }

    pub fn new(
        fiber_dim: usize,
        base_min: Vec<f64>,
        base_max: Vec<f64>,
        sample_points: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = base_min.len();
        if base_max.len() != n {
            return Err(SdqError::ShapeMismatch("base box bounds".into()));
        }
        let chart = ChartDomain {
            base_dim: n,
            fiber_dim,
            base_min,
            base_max,
            sample_points,
        };
        for p in &chart.sample_points {
            chart.check_inside(p)?;
        }
        Ok(chart)
    }

    pub fn check_inside(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.base_dim {
            return Err(SdqError::ShapeMismatch(format!(
                "base point dim {} vs chart dim {}",
                point.len(),
                self.base_dim
            )));
        }
        for i in 0..self.base_dim {
            if point[i] < self.base_min[i] || point[i] > self.base_max[i] {
                return Err(SdqError::DomainError { point: point.to_vec() });
            }
        }
        Ok(())
    }
}

/// How derivatives of user-supplied evaluators are taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Central differences with the given relative step.
    FiniteDifference { h: f64 },
}

impl DerivativeMode {
    pub fn step(&self) -> f64 {
        match self {
            DerivativeMode::Analytic => 1e-7,
            DerivativeMode::FiniteDifference { h } => *h,
        }
    }
}

pub type AnchorFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub type BracketFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<Vec<f64>>> + Send + Sync>;

/// Chart-local data of a Lie algebroid: anchor coefficients a (p x n) and
/// bracket coefficients c (p x p x p), both evaluated pointwise on the base.
#[derive(Clone)]
pub struct StructureFunctions {
    pub chart: ChartDomain,
    pub a: AnchorFn,
    pub c: BracketFn,
    pub derivative_mode: DerivativeMode,
    /// Polynomial forms of (a, c) in the base coordinates, when available.
    /// These drive the exact symbolic Poisson bracket.
    pub sym: Option<SymbolicCoeffs>,
}

/// Structure functions as base-coordinate polynomials (symbols with ne
/// epsilon slots so they can multiply phase-space symbols directly).
#[derive(Clone)]
pub struct SymbolicCoeffs {
    pub a: Vec<Vec<GaussPoly>>,
    pub c: Vec<Vec<Vec<GaussPoly>>>,
}

impl StructureFunctions {
    pub fn new(chart: ChartDomain, a: AnchorFn, c: BracketFn, derivative_mode: DerivativeMode) -> Self {
        StructureFunctions { chart, a, c, derivative_mode, sym: None }
    }

    pub fn constant(chart: ChartDomain, a: Vec<Vec<f64>>, c: Vec<Vec<Vec<f64>>>) -> Self {
        let (n, p) = (chart.base_dim, chart.fiber_dim);
        let sym = SymbolicCoeffs {
            a: (0..p)
                .map(|i| {
                    (0..n)
                        .map(|j| GaussPoly::constant(n, p, Complex64::new(a[i][j], 0.0)))
                        .collect()
                })
                .collect(),
            c: (0..p)
                .map(|i| {
                    (0..p)
                        .map(|j| {
                            (0..p)
                                .map(|k| GaussPoly::constant(n, p, Complex64::new(c[i][j][k], 0.0)))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        };
        let ac = a.clone();
        let cc = c.clone();
        StructureFunctions {
            chart,
            a: Arc::new(move |_| ac.clone()),
            c: Arc::new(move |_| cc.clone()),
            derivative_mode: DerivativeMode::Analytic,
            sym: Some(sym),
        }
    }

    pub fn fiber_dim(&self) -> usize {
        self.chart.fiber_dim
    }

    pub fn base_dim(&self) -> usize {
        self.chart.base_dim
    }

    pub fn a_at(&self, u: &[f64]) -> Vec<Vec<f64>> {
        if self.chart.base_dim == 0 {
            return vec![vec![]; self.chart.fiber_dim];
        }
        (self.a)(u)
    }

    pub fn c_at(&self, u: &[f64]) -> Vec<Vec<Vec<f64>>> {
        (self.c)(u)
    }

    /// Antisymmetry residual max over sample points: c_ijk + c_jik.
    pub fn antisymmetry_residual(&self) -> f64 {
        let p = self.chart.fiber_dim;
        let mut m = 0.0f64;
        for u in &self.chart.sample_points {
            let c = self.c_at(u);
            for i in 0..p {
                for j in 0..p {
                    for k in 0..p {
                        m = m.max((c[i][j][k] + c[j][i][k]).abs());
                    }
                }
            }
        }
        m
    }

    fn d_base(&self, f: &dyn Fn(&[f64]) -> f64, u: &[f64], j: usize) -> f64 {
        if self.chart.base_dim == 0 {
            return 0.0;
        }
        let h = self.derivative_mode.step().max(1e-9) * (1.0 + u[j].abs());
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[j] += h;
        dn[j] -= h;
        (f(&up) - f(&dn)) / (2.0 * h)
    }

    /// Derivative of c_ijk along base axis l (central difference).
    fn dc(&self, u: &[f64], i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.d_base(&|x: &[f64]| self.c_at(x)[i][j][k], u, l)
    }

    fn da(&self, u: &[f64], i: usize, j: usize, l: usize) -> f64 {
        self.d_base(&|x: &[f64]| self.a_at(x)[i][j], u, l)
    }
}

/// A section X = sum_i X_i(u) e_i given by its frame components.
#[derive(Clone)]
pub struct Section {
    pub components: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl Section {
    pub fn new(components: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>) -> Self {
        Section { components }
    }

    pub fn frame(p: usize, i: usize) -> Self {
        Section {
            components: Arc::new(move |_| {
                let mut v = vec![0.0; p];
                v[i] = 1.0;
                v
            }),
        }
    }

    pub fn at(&self, u: &[f64]) -> Vec<f64> {
        (self.components)(u)
    }
}

/// Base scalar field with optional analytic gradient.
#[derive(Clone)]
pub struct BaseField {
    pub value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub grad: Option<Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>>,
}

impl BaseField {
    pub fn coordinate(j: usize, n: usize) -> Self {
        BaseField {
            value: Arc::new(move |u| u[j]),
            grad: Some(Arc::new(move |_| {
                let mut g = vec![0.0; n];
                g[j] = 1.0;
                g
            })),
        }
    }

    fn grad_at(&self, u: &[f64], mode: DerivativeMode) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(u);
        }
        let n = u.len();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let h = mode.step().max(1e-9) * (1.0 + u[j].abs());
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[j] += h;
            dn[j] -= h;
            out[j] = ((self.value)(&up) - (self.value)(&dn)) / (2.0 * h);
        }
        out
    }
}

/// (rho o X) h: the anchor applied to a base scalar field.
/// Returns u -> sum_{i,j} X_i(u) a_ij(u) dh/dq_j(u).
pub fn anchor_apply(sf: &StructureFunctions, x: &Section, h: &BaseField) -> impl Fn(&[f64]) -> Result<f64> {
    let sf = sf.clone();
    let x = x.clone();
    let h = h.clone();
    move |u: &[f64]| {
        sf.chart.check_inside(u)?;
        if sf.chart.base_dim == 0 {
            return Ok(0.0);
        }
        let a = sf.a_at(u);
        let xi = x.at(u);
        let g = h.grad_at(u, sf.derivative_mode);
        let mut acc = 0.0;
        for i in 0..sf.fiber_dim() {
            for j in 0..sf.base_dim() {
                acc += xi[i] * a[i][j] * g[j];
            }
        }
        Ok(acc)
    }
}

/// The bracket of two sections:
/// [X,Y]_k = sum_{i,j} X_i Y_j c_ijk + (rho o X)(Y_k) - (rho o Y)(X_k).
pub fn bracket_sections(sf: &StructureFunctions, x: &Section, y: &Section) -> Section {
    let sf = sf.clone();
    let x = x.clone();
    let y = y.clone();
    Section {
        components: Arc::new(move |u: &[f64]| {
            let p = sf.fiber_dim();
            let n = sf.base_dim();
            let c = sf.c_at(u);
            let a = sf.a_at(u);
            let xv = x.at(u);
            let yv = y.at(u);
            let mut out = vec![0.0; p];
            for k in 0..p {
                let mut acc = 0.0;
                for i in 0..p {
                    for j in 0..p {
                        acc += xv[i] * yv[j] * c[i][j][k];
                    }
                }
                // derivative terms: rho(X)(Y_k) - rho(Y)(X_k)
                for j in 0..n {
                    let h = sf.derivative_mode.step().max(1e-9) * (1.0 + u[j].abs());
                    let mut up = u.to_vec();
                    let mut dn = u.to_vec();
                    up[j] += h;
                    dn[j] -= h;
                    let dyk = (y.at(&up)[k] - y.at(&dn)[k]) / (2.0 * h);
                    let dxk = (x.at(&up)[k] - x.at(&dn)[k]) / (2.0 * h);
                    for i in 0..p {
                        acc += xv[i] * a[i][j] * dyk - yv[i] * a[i][j] * dxk;
                    }
                }
                out[k] = acc;
            }
            out
        }),
    }
}

/// Result of the pointwise algebroid axiom checks.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub jacobi_residual: f64,
    pub anchor_residual: f64,
    pub antisymmetry_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Max residuals over sample points of the Jacobi identity on frame triples
/// and of the anchor morphism property on frame pairs.
pub fn check_axioms(sf: &StructureFunctions, tol: f64) -> AxiomReport {
    let p = sf.fiber_dim();
    let n = sf.base_dim();
    let mut jac = 0.0f64;
    let mut anc = 0.0f64;
    for u in &sf.chart.sample_points {
        let c = sf.c_at(u);
        let a = sf.a_at(u);
        // Jacobi: for all triples (i,j,k) and output component m:
        // sum_l [ c_jkl c_ilm + c_kil c_jlm + c_ijl c_klm ]
        //   + rho(e_i) c_jkm + rho(e_j) c_kim + rho(e_k) c_ijm = 0
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    for m in 0..p {
                        let mut s = 0.0;
                        for l in 0..p {
                            s += c[j][k][l] * c[i][l][m]
                                + c[k][i][l] * c[j][l][m]
                                + c[i][j][l] * c[k][l][m];
                        }
                        for q in 0..n {
                            s += a[i][q] * sf.dc(u, j, k, m, q)
                                + a[j][q] * sf.dc(u, k, i, m, q)
                                + a[k][q] * sf.dc(u, i, j, m, q);
                        }
                        jac = jac.max(s.abs());
                    }
                }
            }
        }
        // anchor morphism: rho([e_i,e_j]) = [rho e_i, rho e_j]:
        // sum_k c_ijk a_kl = sum_s ( a_is d a_jl / d q_s - a_js d a_il / d q_s )
        for i in 0..p {
            for j in 0..p {
                for l in 0..n {
                    let mut lhs = 0.0;
                    for k in 0..p {
                        lhs += c[i][j][k] * a[k][l];
                    }
                    let mut rhs = 0.0;
                    for s in 0..n {
                        rhs += a[i][s] * sf.da(u, j, l, s) - a[j][s] * sf.da(u, i, l, s);
                    }
                    anc = anc.max((lhs - rhs).abs());
                }
            }
        }
    }
    let anti = sf.antisymmetry_residual();
    AxiomReport {
        jacobi_residual: jac,
        anchor_residual: anc,
        antisymmetry_residual: anti,
        tol,
        pass: jac <= tol && anc <= tol && anti <= tol,
    }
}

/// Named structure-function builtins used by scenario configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinStructure {
    /// a = 0, c = 0 on a point base of the given fiber dimension.
    Abelian,
    /// Tangent bundle: p = n, a = identity, c = 0.
    Tangent,
    /// Heisenberg Lie algebra: n = 0, p = 3, c_123 = 1 (antisymmetrized).
    Heisenberg,
    /// Action algebroid of R rotating R^2: p = 1, n = 2, a_1(u) = (-u2, u1).
    ActionRotation,
    /// Constants violating the Jacobi identity: c_123 = 1, c_232 = 1/2
    /// (antisymmetrized). Used as the negative axiom-check case.
    PerturbedJacobi,
}

pub fn builtin_structure(kind: BuiltinStructure, chart: ChartDomain) -> StructureFunctions {
    match kind {
        BuiltinStructure::Abelian => {
            let p = chart.fiber_dim;
            let n = chart.base_dim;
            StructureFunctions::constant(chart, vec![vec![0.0; n]; p], zero_c(p))
        }
        BuiltinStructure::Tangent => {
            let p = chart.fiber_dim;
            assert_eq!(p, chart.base_dim, "tangent algebroid needs p = n");
            let mut a = vec![vec![0.0; p]; p];
            for i in 0..p {
                a[i][i] = 1.0;
            }
            StructureFunctions::constant(chart, a, zero_c(p))
        }
        BuiltinStructure::Heisenberg => {
            assert_eq!(chart.fiber_dim, 3);
            let mut c = zero_c(3);
            c[0][1][2] = 1.0;
            c[1][0][2] = -1.0;
            StructureFunctions::constant(chart, vec![vec![]; 3], c)
        }
        BuiltinStructure::ActionRotation => {
            assert_eq!(chart.fiber_dim, 1);
            assert_eq!(chart.base_dim, 2);
            let mut sf = StructureFunctions::new(
                chart,
                Arc::new(|u: &[f64]| vec![vec![-u[1], u[0]]]),
                Arc::new(|_| zero_c(1)),
                DerivativeMode::Analytic,
            );
            let minus_q2 = GaussPoly::constant(2, 1, Complex64::new(-1.0, 0.0)).mul_q(1);
            let plus_q1 = GaussPoly::constant(2, 1, Complex64::new(1.0, 0.0)).mul_q(0);
            sf.sym = Some(SymbolicCoeffs {
                a: vec![vec![minus_q2, plus_q1]],
                c: vec![vec![vec![GaussPoly::zero(2, 1)]]],
            });
            sf
        }
        BuiltinStructure::PerturbedJacobi => {
            assert_eq!(chart.fiber_dim, 3);
            let mut c = zero_c(3);
            c[0][1][2] = 1.0;
            c[1][0][2] = -1.0;
            c[1][2][1] = 0.5;
            c[2][1][1] = -0.5;
            StructureFunctions::constant(chart, vec![vec![]; 3], c)
        }
    }
}

fn zero_c(p: usize) -> Vec<Vec<Vec<f64>>> {
    vec![vec![vec![0.0; p]; p]; p]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tangent_sf() -> StructureFunctions {
        let chart = ChartDomain::new(
            2,
            vec![-2.0, -2.0],
            vec![2.0, 2.0],
            vec![vec![0.0, 0.0], vec![0.5, -1.0], vec![-1.5, 0.25]],
        )
        .unwrap();
        builtin_structure(BuiltinStructure::Tangent, chart)
    }

    #[test]
    fn anchor_identity_on_tangent_bundle() {
        let sf = tangent_sf();
        let x = Section::frame(2, 0);
        let h = BaseField::coordinate(0, 2);
        let f = anchor_apply(&sf, &x, &h);
        assert!((f(&[0.3, -0.7]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anchor_zero_on_point_base() {
        let sf = builtin_structure(BuiltinStructure::Heisenberg, ChartDomain::point_base(3));
        let x = Section::frame(3, 1);
        let h = BaseField {
            value: Arc::new(|_| 1.0),
            grad: None,
        };
        let f = anchor_apply(&sf, &x, &h);
        assert_eq!(f(&[]).unwrap(), 0.0);
    }

    #[test]
    fn anchor_rotation_field() {
        let chart = ChartDomain::new(
            1,
            vec![-3.0, -3.0],
            vec![3.0, 3.0],
            vec![vec![1.0, 2.0]],
        )
        .unwrap();
        let sf = builtin_structure(BuiltinStructure::ActionRotation, chart);
        let x = Section::frame(1, 0);
        let h = BaseField::coordinate(0, 2);
        let f = anchor_apply(&sf, &x, &h);
        // sum_j a_1j dq_1/dq_j = a_11 = -u2
        assert!((f(&[1.0, 2.0]).unwrap() - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn anchor_outside_box_is_domain_error() {
        let sf = tangent_sf();
        let x = Section::frame(2, 0);
        let h = BaseField::coordinate(0, 2);
        let f = anchor_apply(&sf, &x, &h);
        assert!(matches!(f(&[5.0, 0.0]), Err(SdqError::DomainError { .. })));
    }

    #[test]
    fn bracket_reproduces_structure_constants() {
        let sf = builtin_structure(BuiltinStructure::Heisenberg, ChartDomain::point_base(3));
        let b = bracket_sections(&sf, &Section::frame(3, 0), &Section::frame(3, 1));
        let v = b.at(&[]);
        assert_eq!(v, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn bracket_leibniz_term_on_tangent_bundle() {
        // [e1, q1 e2] = e2 on the tangent algebroid
        let sf = tangent_sf();
        let x = Section::frame(2, 0);
        let y = Section::new(Arc::new(|u: &[f64]| vec![0.0, u[0]]));
        let b = bracket_sections(&sf, &x, &y);
        let v = b.at(&[0.5, -1.0]);
        assert!(v[0].abs() < 1e-9 && (v[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn abelian_constant_sections_bracket_to_zero() {
        let chart = ChartDomain::new(2, vec![-1.0, -1.0], vec![1.0, 1.0], vec![vec![0.1, 0.2]]).unwrap();
        let sf = builtin_structure(BuiltinStructure::Abelian, chart);
        let b = bracket_sections(&sf, &Section::frame(2, 0), &Section::frame(2, 1));
        assert_eq!(b.at(&[0.1, 0.2]), vec![0.0, 0.0]);
    }

    #[test]
    fn axioms_pass_for_shipped_structures() {
        for (sf, tol) in [
            (builtin_structure(BuiltinStructure::Heisenberg, ChartDomain::point_base(3)), 1e-12),
            (tangent_sf(), 1e-9),
        ] {
            let rep = check_axioms(&sf, tol);
            assert!(rep.pass, "{rep:?}");
            assert_eq!(rep.jacobi_residual, 0.0);
        }
    }

    #[test]
    fn rotation_action_axioms_pass() {
        let chart = ChartDomain::new(
            1,
            vec![-3.0, -3.0],
            vec![3.0, 3.0],
            vec![vec![0.3, 0.4], vec![-1.0, 2.0]],
        )
        .unwrap();
        let sf = builtin_structure(BuiltinStructure::ActionRotation, chart);
        let rep = check_axioms(&sf, 1e-9);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn perturbed_constants_fail_jacobi() {
        let sf = builtin_structure(BuiltinStructure::PerturbedJacobi, ChartDomain::point_base(3));
        let rep = check_axioms(&sf, 1e-9);
        assert!(!rep.pass);
        assert!(rep.jacobi_residual > 0.1, "{rep:?}");
    }
}
