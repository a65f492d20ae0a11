//! The Poisson bracket on the dual bundle E*, in chart coordinates:
//!
//! {phi, psi}(x, eps) = sum_{ij} a_ij(x) (d phi/d eps_i d psi/d q_j
//!                                        - d phi/d q_j d psi/d eps_i)
//!                    + sum_{ijk} c_ijk(x) eps_k d phi/d eps_i d psi/d eps_j.
//!
//! The Weyl sign convention negates both terms; it is the convention under
//! which the pair-groupoid quantizer reduces to textbook Weyl calculus.

use crate::algebroid::StructureFunctions;
use crate::error::{Result, SdqError};
use crate::phase::{CustomPhase, PhaseFunction};
use crate::symbol::GaussPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// Bracket exactly as induced by the algebroid structure functions.
    Algebroid,
    /// a- and c-terms negated (textbook Weyl calculus on pair groupoids).
    Weyl,
}

impl SignConvention {
    pub fn factor(&self) -> f64 {
        match self {
            SignConvention::Algebroid => 1.0,
            SignConvention::Weyl => -1.0,
        }
    }
}

/// Exact bracket of two closed-form symbols (requires polynomial structure
/// functions, available on all shipped builtins).
pub fn symbolic_bracket(
    sf: &StructureFunctions,
    phi: &GaussPoly,
    psi: &GaussPoly,
    sign: SignConvention,
) -> Result<GaussPoly> {
    let sym = sf
        .sym
        .as_ref()
        .ok_or_else(|| SdqError::Unsupported("structure functions carry no polynomial form".into()))?;
    let p = sf.fiber_dim();
    let n = sf.base_dim();
    assert_eq!((phi.nq, phi.ne), (n, p));
    let mut acc = GaussPoly::zero(n, p);
    for i in 0..p {
        let phi_ei = phi.d_eps(i);
        let psi_ei = psi.d_eps(i);
        for j in 0..n {
            let t1 = phi_ei.mul(&psi.d_q(j));
            let t2 = phi.d_q(j).mul(&psi_ei);
            acc = acc.add(&sym.a[i][j].mul(&t1.sub(&t2)));
        }
        for j in 0..p {
            let prod = phi_ei.mul(&psi.d_eps(j));
            for k in 0..p {
                let c = &sym.c[i][j][k];
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(&c.mul(&prod.mul_eps(k)));
            }
        }
    }
    Ok(acc.scaled(C64::new(sign.factor(), 0.0)))
}

/// Bracket of two phase functions. Closed-form inputs with polynomial
/// structure functions take the exact route; anything else falls back to a
/// closure evaluating the chart formula with analytic or finite-difference
/// derivatives per the structure functions' derivative mode.
pub fn poisson_bracket_dual(
    sf: &StructureFunctions,
    phi: &PhaseFunction,
    psi: &PhaseFunction,
    sign: SignConvention,
) -> Result<PhaseFunction> {
    if let (PhaseFunction::Symbolic(a), PhaseFunction::Symbolic(b), Some(_)) =
        (phi, psi, sf.sym.as_ref())
    {
        return Ok(PhaseFunction::Symbolic(symbolic_bracket(sf, a, b, sign)?));
    }
    if phi.is_base_only() && psi.is_base_only() {
        let (nq, ne) = phi.dims();
        return Ok(PhaseFunction::Symbolic(GaussPoly::zero(nq, ne)));
    }
    match (phi, psi) {
        (PhaseFunction::Grid(_), _) | (_, PhaseFunction::Grid(_)) => {
            return Err(SdqError::Unsupported(
                "poisson bracket of grid-sampled observables is not defined off-grid".into(),
            ))
        }
        _ => {}
    }
    let sfc = sf.clone();
    let phi = phi.clone();
    let psi = psi.clone();
    let (nq, ne) = phi.dims();
    let step = sf.derivative_mode.step();
    let s = sign.factor();
    Ok(PhaseFunction::Custom(CustomPhase {
        nq,
        ne,
        f: Arc::new(move |q: &[f64], e: &[f64]| {
            let a = sfc.a_at(q);
            let c = sfc.c_at(q);
            let p = sfc.fiber_dim();
            let n = sfc.base_dim();
            let phi_eq = phi.grad_q(q, e, step);
            let phi_ee = phi.grad_eps(q, e, step);
            let psi_eq = psi.grad_q(q, e, step);
            let psi_ee = psi.grad_eps(q, e, step);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..p {
                for j in 0..n {
                    acc += a[i][j] * (phi_ee[i] * psi_eq[j] - phi_eq[j] * psi_ee[i]);
                }
                for j in 0..p {
                    for k in 0..p {
                        if c[i][j][k] != 0.0 {
                            acc += c[i][j][k] * e[k] * phi_ee[i] * psi_ee[j];
                        }
                    }
                }
            }
            acc * s
        }),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{builtin_structure, BuiltinStructure, ChartDomain};

    fn eps_coord(nq: usize, ne: usize, k: usize) -> GaussPoly {
        GaussPoly::constant(nq, ne, C64::new(1.0, 0.0)).mul_eps(k)
    }

    fn q_coord(nq: usize, ne: usize, j: usize) -> GaussPoly {
        GaussPoly::constant(nq, ne, C64::new(1.0, 0.0)).mul_q(j)
    }

    #[test]
    fn canonical_bracket_on_tangent_algebroid() {
        let chart = ChartDomain::new(1, vec![-2.0], vec![2.0], vec![vec![0.0], vec![1.0]]).unwrap();
        let sf = builtin_structure(BuiltinStructure::Tangent, chart);
        let phi = eps_coord(1, 1, 0);
        let psi = q_coord(1, 1, 0);
        let b = symbolic_bracket(&sf, &phi, &psi, SignConvention::Algebroid).unwrap();
        for &(q, e) in &[(0.0, 0.0), (0.5, -1.3), (1.0, 2.0)] {
            assert!((b.eval(&[q], &[e]) - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let bw = symbolic_bracket(&sf, &phi, &psi, SignConvention::Weyl).unwrap();
        assert!((bw.eval(&[0.0], &[0.0]) + C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lie_poisson_bracket_on_heisenberg() {
        let sf = builtin_structure(BuiltinStructure::Heisenberg, ChartDomain::point_base(3));
        let phi = eps_coord(0, 3, 0);
        let psi = eps_coord(0, 3, 1);
        let b = symbolic_bracket(&sf, &phi, &psi, SignConvention::Algebroid).unwrap();
        // {eps1, eps2} = eps3
        for &e3 in &[0.0, 1.0, -2.5] {
            assert!((b.eval(&[], &[0.3, 0.7, e3]) - C64::new(e3, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn bracket_of_function_with_itself_vanishes() {
        let sf = builtin_structure(BuiltinStructure::Heisenberg, ChartDomain::point_base(3));
        let g = GaussPoly::gaussian(0, 3, C64::new(1.0, 0.0), &[], &[Some(1.0), Some(1.0), Some(1.0)]);
        let f = g.mul_eps(0).add(&g.mul_eps(2));
        let b = symbolic_bracket(&sf, &f, &f, SignConvention::Algebroid).unwrap();
        assert!(b.is_zero() || b.sup_abs_on_grid(&[vec![]], &[vec![0.4, -0.2, 1.0]]) < 1e-14);
    }

    #[test]
    fn antisymmetry_and_leibniz_symbolic() {
        let chart = ChartDomain::new(
            1,
            vec![-3.0],
            vec![3.0],
            vec![vec![0.0], vec![0.7], vec![-1.2]],
        )
        .unwrap();
        let sf = builtin_structure(BuiltinStructure::Tangent, chart);
        let g = GaussPoly::gaussian(1, 1, C64::new(1.0, 0.0), &[Some(2.0)], &[Some(1.0)]);
        let f1 = g.mul_eps(0);
        let f2 = g.mul_q(0).mul_eps(0);
        let f3 = g.clone();
        let b12 = symbolic_bracket(&sf, &f1, &f2, SignConvention::Algebroid).unwrap();
        let b21 = symbolic_bracket(&sf, &f2, &f1, SignConvention::Algebroid).unwrap();
        let asym = b12.add(&b21);
        // Leibniz: {f1, f2 f3} = {f1,f2} f3 + f2 {f1,f3}
        let lhs = symbolic_bracket(&sf, &f1, &f2.mul(&f3), SignConvention::Algebroid).unwrap();
        let rhs = b12.mul(&f3).add(&f2.mul(&symbolic_bracket(&sf, &f1, &f3, SignConvention::Algebroid).unwrap()));
        for &(q, e) in &[(0.0, 0.0), (0.8, -0.6), (-1.4, 1.1)] {
            assert!(asym.eval(&[q], &[e]).norm() < 1e-13);
            assert!((lhs.eval(&[q], &[e]) - rhs.eval(&[q], &[e])).norm() < 1e-13);
        }
    }

    #[test]
    fn jacobi_identity_of_dual_bracket() {
        // holds exactly on the symbolic route whenever check_axioms passes
        let sf = builtin_structure(BuiltinStructure::Heisenberg, ChartDomain::point_base(3));
        let g = GaussPoly::gaussian(0, 3, C64::new(1.0, 0.0), &[], &[Some(1.0), Some(1.2), Some(0.8)]);
        let f1 = g.mul_eps(0);
        let f2 = g.mul_eps(1);
        let f3 = g.mul_eps(2);
        let br = |a: &GaussPoly, b: &GaussPoly| symbolic_bracket(&sf, a, b, SignConvention::Algebroid).unwrap();
        let j = br(&f1, &br(&f2, &f3))
            .add(&br(&f2, &br(&f3, &f1)))
            .add(&br(&f3, &br(&f1, &f2)));
        for &e in &[[0.3, -0.5, 0.9], [1.0, 1.0, 1.0]] {
            assert!(j.eval(&[], &e).norm() < 1e-12, "{}", j.eval(&[], &e).norm());
        }
    }

    #[test]
    fn generic_path_agrees_with_symbolic() {
        let chart = ChartDomain::new(
            1,
            vec![-3.0],
            vec![3.0],
            vec![vec![0.5]],
        )
        .unwrap();
        let sf = builtin_structure(BuiltinStructure::Tangent, chart);
        let g = GaussPoly::gaussian(1, 1, C64::new(1.0, 0.0), &[Some(1.0)], &[Some(1.0)]);
        let f1 = g.mul_eps(0);
        let f2 = g.mul_q(0);
        let exact = symbolic_bracket(&sf, &f1, &f2, SignConvention::Algebroid).unwrap();
        // force the generic closure path via Custom wrappers
        let c1 = {
            let f1 = f1.clone();
            PhaseFunction::Custom(CustomPhase {
                nq: 1,
                ne: 1,
                f: Arc::new(move |q, e| f1.eval(q, e)),
            })
        };
        let c2 = {
            let f2 = f2.clone();
            PhaseFunction::Custom(CustomPhase {
                nq: 1,
                ne: 1,
                f: Arc::new(move |q, e| f2.eval(q, e)),
            })
        };
        let generic = poisson_bracket_dual(&sf, &c1, &c2, SignConvention::Algebroid).unwrap();
        for &(q, e) in &[(0.2, 0.4), (-0.9, 1.3)] {
            let a = exact.eval(&[q], &[e]);
            let b = generic.eval(&[q], &[e]);
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn base_only_pair_brackets_to_zero() {
        let chart = ChartDomain::new(1, vec![-1.0], vec![1.0], vec![vec![0.0]]).unwrap();
        let sf = builtin_structure(BuiltinStructure::Tangent, chart);
        let a = PhaseFunction::Symbolic(GaussPoly::gaussian(1, 1, C64::new(1.0, 0.0), &[Some(1.0)], &[None]));
        let b = PhaseFunction::Symbolic(q_coord(1, 1, 0));
        let out = poisson_bracket_dual(&sf, &a, &b, SignConvention::Algebroid).unwrap();
        match out {
            PhaseFunction::Symbolic(g) => assert!(g.eval(&[0.3], &[0.9]).norm() < 1e-14),
            _ => panic!("expected symbolic zero"),
        }
    }
}
