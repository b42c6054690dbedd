//! First- and second-order KKT classification over products of simplices.
//!
//! A point `x*` is first-order stationary when, for every player `i`,
//! positive coordinates have partial derivative equal to the player average
//! `Σ_j x*_ij ∂P/∂x_ij` and zero coordinates have partial derivative at most
//! that average. It is second-order stationary when in addition `∇²P(x*)`
//! is negative semidefinite on the face tangent space
//! `{y : Σ_j y_ij = 0 for all i, y_ij = 0 off the support}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::objective::{gradient, hessian, Objective};
use crate::simplex::{support, StrategyProfile, SupportPattern, DEFAULT_SUPPORT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub support_tol: f64,
    pub eig_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad_tol: 1e-7,
            support_tol: DEFAULT_SUPPORT_TOL,
            eig_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KKTReport {
    pub point: StrategyProfile,
    pub support: SupportPattern,
    pub player_averages: Vec<f64>,
    pub first_order: bool,
    pub strict: bool,
    pub second_order: Option<bool>,
    pub worst_violation: f64,
    pub max_tangent_eigenvalue: Option<f64>,
    pub tangent_dimension: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    NonStationary,
    FirstOrderOnly,
    SecondOrderStationary,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::NonStationary => "non-stationary",
            Verdict::FirstOrderOnly => "first-order only",
            Verdict::SecondOrderStationary => "second-order stationary",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// False when the objective has no Hessian and the verdict stops at
    /// first order.
    pub second_order_checked: bool,
    pub report: KKTReport,
}

pub fn check_first_order(
    x: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    grad_tol: f64,
    support_tol: f64,
) -> Result<KKTReport> {
    let sp = support(x, support_tol)?;
    let g = gradient(obj, x)?;
    let shape = x.shape();

    let mut averages = Vec::with_capacity(shape.num_players);
    let mut worst = f64::NEG_INFINITY;
    let mut first_order = true;
    let mut strict = true;
    for i in 0..shape.num_players {
        let r = shape.row(i);
        let avg: f64 = x.values()[r.clone()].iter().zip(&g[r]).map(|(a, b)| a * b).sum();
        averages.push(avg);
        for j in 0..shape.num_strategies {
            let gij = g[shape.index(i, j)];
            let residual = if sp.contains(i, j) {
                (gij - avg).abs()
            } else {
                if gij - avg >= -grad_tol {
                    strict = false;
                }
                gij - avg
            };
            worst = worst.max(residual);
            if residual > grad_tol {
                first_order = false;
            }
        }
    }

    Ok(KKTReport {
        point: x.clone(),
        tangent_dimension: sp.tangent_dimension(),
        support: sp,
        player_averages: averages,
        first_order,
        strict: strict && first_order,
        second_order: None,
        worst_violation: worst,
        max_tangent_eigenvalue: None,
    })
}

/// Orthonormal basis of the face tangent space, built per player from the
/// differences `e_ij − e_ij0` (j0 the first support index) by modified
/// Gram–Schmidt. Vectors live in the flat N·M coordinate space.
pub fn tangent_basis(sp: &SupportPattern) -> Vec<DVector<f64>> {
    let shape = sp.shape;
    let mut basis = Vec::with_capacity(sp.tangent_dimension());
    for i in 0..shape.num_players {
        let members: Vec<usize> = (0..shape.num_strategies).filter(|&j| sp.contains(i, j)).collect();
        let Some((&j0, rest)) = members.split_first() else {
            continue;
        };
        let start = basis.len();
        for &j in rest {
            let mut v = DVector::zeros(shape.dim());
            v[shape.index(i, j)] = 1.0;
            v[shape.index(i, j0)] = -1.0;
            for b in &basis[start..] {
                let b: &DVector<f64> = b;
                let proj = b.dot(&v);
                v.axpy(-proj, b, 1.0);
            }
            let norm = v.norm();
            basis.push(v / norm);
        }
    }
    basis
}

/// `Bᵀ ∇²P B` for the tangent basis `B` of `sp`.
pub fn restricted_hessian(h: &DMatrix<f64>, sp: &SupportPattern) -> DMatrix<f64> {
    let basis = tangent_basis(sp);
    if basis.is_empty() {
        return DMatrix::zeros(0, 0);
    }
    let b = DMatrix::from_columns(&basis);
    b.transpose() * h * b
}

pub fn check_second_order(
    x: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    tols: &Tolerances,
) -> Result<KKTReport> {
    let mut report = check_first_order(x, obj, tols.grad_tol, tols.support_tol)?;
    if !report.first_order {
        report.second_order = Some(false);
        return Ok(report);
    }
    let h = hessian(obj, x)?;
    let ht = restricted_hessian(&h, &report.support);
    if ht.nrows() == 0 {
        report.second_order = Some(true);
        return Ok(report);
    }
    let lambda_max = *symmetric_eigenvalues(&ht)?.last().expect("non-empty tangent space");
    report.max_tangent_eigenvalue = Some(lambda_max);
    report.second_order = Some(lambda_max <= tols.eig_tol);
    Ok(report)
}

pub fn classify(x: &StrategyProfile, obj: &(impl Objective + ?Sized), tols: &Tolerances) -> Result<Classification> {
    match check_second_order(x, obj, tols) {
        Ok(report) => {
            let verdict = if !report.first_order {
                Verdict::NonStationary
            } else if report.second_order == Some(true) {
                Verdict::SecondOrderStationary
            } else {
                Verdict::FirstOrderOnly
            };
            Ok(Classification {
                verdict,
                second_order_checked: true,
                report,
            })
        }
        Err(Error::HessianUnavailable) => {
            let report = check_first_order(x, obj, tols.grad_tol, tols.support_tol)?;
            let verdict = if report.first_order {
                Verdict::FirstOrderOnly
            } else {
                Verdict::NonStationary
            };
            Ok(Classification {
                verdict,
                second_order_checked: false,
                report,
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{builtin, AnyObjective, BlackBoxObjective};
    use crate::simplex::DomainShape;
    use std::sync::Arc;

    fn profile(rows: &[&[f64]]) -> StrategyProfile {
        let shape = DomainShape::new(rows.len(), rows[0].len()).unwrap();
        StrategyProfile::from_rows(rows, shape, 1e-12).unwrap()
    }

    fn linear() -> AnyObjective {
        AnyObjective::parse("2 1:1\n1 1:2\n").unwrap()
    }

    #[test]
    fn linear_vertex_is_strict() {
        let r = check_first_order(&profile(&[&[1.0, 0.0]]), &linear(), 1e-7, 1e-9).unwrap();
        assert!(r.first_order && r.strict);
        assert_eq!(r.player_averages, vec![2.0]);
        assert_eq!(r.worst_violation, 0.0);
    }

    #[test]
    fn linear_midpoint_violates() {
        let r = check_first_order(&profile(&[&[0.5, 0.5]]), &linear(), 1e-7, 1e-9).unwrap();
        assert!(!r.first_order && !r.strict);
        assert!((r.worst_violation - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_rows_are_stationary() {
        let p = AnyObjective::parse("3 1:1\n3 1:2\n3 1:3\n-1 2:1\n-1 2:2\n-1 2:3").unwrap();
        let x = crate::simplex::random_profile(p.shape(), 5);
        assert!(check_first_order(&x, &p, 1e-7, 1e-9).unwrap().first_order);
    }

    #[test]
    fn non_strict_boundary_point() {
        let p = AnyObjective::parse("1 1:1\n1 1:2").unwrap();
        let r = check_first_order(&profile(&[&[1.0, 0.0]]), &p, 1e-7, 1e-9).unwrap();
        assert!(r.first_order);
        assert!(!r.strict);
    }

    #[test]
    fn tangent_basis_shapes() {
        let sh = DomainShape::new(1, 2).unwrap();
        let sp = SupportPattern {
            shape: sh,
            in_support: vec![vec![true, true]],
        };
        let b = tangent_basis(&sp);
        assert_eq!(b.len(), 1);
        assert!((b[0][0].abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((b[0][0] + b[0][1]).abs() < 1e-15);

        let sh = DomainShape::new(2, 2).unwrap();
        let sp = SupportPattern {
            shape: sh,
            in_support: vec![vec![true, true], vec![true, true]],
        };
        let b = tangent_basis(&sp);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].dot(&b[1]), 0.0);

        let sp = SupportPattern {
            shape: DomainShape::new(1, 3).unwrap(),
            in_support: vec![vec![false, true, false]],
        };
        assert!(tangent_basis(&sp).is_empty());
    }

    #[test]
    fn coordination_mixed_point_is_a_saddle() {
        let p = builtin("coord-2x2").unwrap();
        let x = profile(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let h = hessian(&p, &x).unwrap();
        let z = DVector::from_vec(vec![0.5, -0.5, 0.5, -0.5]);
        assert!(((z.transpose() * &h * &z)[(0, 0)] - 1.0).abs() < 1e-15);
        let r = check_second_order(&x, &p, &Tolerances::default()).unwrap();
        assert!(r.first_order);
        assert_eq!(r.second_order, Some(false));
        assert!((r.max_tangent_eigenvalue.unwrap() - 1.0).abs() < 1e-12);
        let c = classify(&x, &p, &Tolerances::default()).unwrap();
        assert_eq!(c.verdict, Verdict::FirstOrderOnly);
    }

    #[test]
    fn coordination_vertex_is_second_order() {
        let p = builtin("coord-2x2").unwrap();
        let x = profile(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let r = check_second_order(&x, &p, &Tolerances::default()).unwrap();
        assert!(r.strict);
        assert_eq!(r.second_order, Some(true));
        assert_eq!(r.tangent_dimension, 0);
        assert_eq!(r.max_tangent_eigenvalue, None);
        assert_eq!(
            classify(&x, &p, &Tolerances::default()).unwrap().verdict,
            Verdict::SecondOrderStationary
        );
    }

    #[test]
    fn trig_demo_interior_maximum() {
        let p = builtin("trig-demo").unwrap();
        let (x, y) = (std::f64::consts::PI / 8.0, std::f64::consts::PI / 4.0);
        let pt = profile(&[&[x, 1.0 - x], &[y, 1.0 - y]]);
        let c = classify(&pt, &p, &Tolerances::default()).unwrap();
        assert_eq!(c.verdict, Verdict::SecondOrderStationary);
        assert!(c.report.max_tangent_eigenvalue.unwrap() < 0.0);
    }

    #[test]
    fn non_stationary_short_circuits() {
        let c = classify(&profile(&[&[0.5, 0.5]]), &linear(), &Tolerances::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NonStationary);
        assert_eq!(c.report.second_order, Some(false));
        assert_eq!(c.report.max_tangent_eigenvalue, None);
    }

    #[test]
    fn missing_hessian_degrades() {
        let shape = DomainShape::new(1, 2).unwrap();
        let flat = BlackBoxObjective::new(shape, Arc::new(|_| 1.0), Arc::new(|_| vec![0.0, 0.0]), None);
        let x = profile(&[&[0.5, 0.5]]);
        assert!(matches!(
            check_second_order(&x, &flat, &Tolerances::default()),
            Err(Error::HessianUnavailable)
        ));
        let c = classify(&x, &flat, &Tolerances::default()).unwrap();
        assert_eq!(c.verdict, Verdict::FirstOrderOnly);
        assert!(!c.second_order_checked);
    }
}
