//! Named objectives addressable from the command line.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::simplex::DomainShape;

use super::{AnyObjective, BlackBoxObjective, SparsePolynomial};

pub const BUILTIN_IDS: [&str; 3] = ["trig-demo", "coord-2x2", "counterexample"];

pub fn builtin(id: &str) -> Result<AnyObjective> {
    match id {
        "trig-demo" => Ok(trig_demo().into()),
        "coord-2x2" => Ok(SparsePolynomial::parse("1 1:1 2:1\n1 1:2 2:2\n", None)?.into()),
        "counterexample" => Ok(SparsePolynomial::parse("1 1:1\n1 1:1^7 1:2\n1 1:2^7\n", None)?.into()),
        other => Err(Error::UnknownObjective(other.to_string())),
    }
}

/// `cos(8x)·sin(6y)` lifted to two players with two strategies each.
///
/// With `u = (1 + x11 − x12)/2` and `v = (1 + x21 − x22)/2` (so `u = x11`,
/// `v = x21` on D) the lifted function is `2·cos(8u)·sin(6v)`. Its partials
/// are `±8 sin(8u) sin(6v)` and `±6 cos(8u) cos(6v)` with opposite signs
/// per strategy, so its MWU map coincides with the two-variable demo map in
/// [`crate::experiments::demo_step`].
pub fn trig_demo() -> BlackBoxObjective {
    let shape = DomainShape::new(2, 2).expect("2x2 is valid");
    let uv = |x: &[f64]| ((1.0 + x[0] - x[1]) / 2.0, (1.0 + x[2] - x[3]) / 2.0);
    let value = Arc::new(move |x: &[f64]| {
        let (u, v) = uv(x);
        2.0 * (8.0 * u).cos() * (6.0 * v).sin()
    });
    let grad = Arc::new(move |x: &[f64]| {
        let (u, v) = uv(x);
        let a = -8.0 * (8.0 * u).sin() * (6.0 * v).sin();
        let b = 6.0 * (8.0 * u).cos() * (6.0 * v).cos();
        vec![a, -a, b, -b]
    });
    let hess = Arc::new(move |x: &[f64]| {
        let (u, v) = uv(x);
        let (s8, c8) = (8.0 * u).sin_cos();
        let (s6, c6) = (6.0 * v).sin_cos();
        // second partials of F(u, v) = 2 cos(8u) sin(6v)
        let fuu = -128.0 * c8 * s6;
        let fuv = -96.0 * s8 * c6;
        let fvv = -72.0 * c8 * s6;
        // du/dx = (1/2, -1/2, 0, 0), dv/dx = (0, 0, 1/2, -1/2)
        let du = [0.5, -0.5, 0.0, 0.0];
        let dv = [0.0, 0.0, 0.5, -0.5];
        DMatrix::from_fn(4, 4, |k, l| {
            fuu * du[k] * du[l] + fuv * (du[k] * dv[l] + dv[k] * du[l]) + fvv * dv[k] * dv[l]
        })
    });
    BlackBoxObjective::new(shape, value, grad, Some(hess))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::fd::{hessian_from_gradient, mixed_rel_err};
    use crate::objective::Objective;

    #[test]
    fn ids_resolve() {
        for id in BUILTIN_IDS {
            assert!(builtin(id).is_ok(), "{id}");
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownObjective(_))));
    }

    #[test]
    fn trig_demo_matches_planar_function_on_domain() {
        let t = trig_demo();
        let (x, y) = (0.31f64, 0.62f64);
        let v = t.value_at(&[x, 1.0 - x, y, 1.0 - y]).unwrap();
        assert!((v - 2.0 * (8.0 * x).cos() * (6.0 * y).sin()).abs() < 1e-14);
    }

    #[test]
    fn trig_demo_derivatives() {
        let t = trig_demo();
        assert!(t.gradient_self_test(50, 3).unwrap() < 1e-6);
        let x = [0.2, 0.8, 0.55, 0.45];
        let h = t.hessian_at(&x).unwrap();
        let fd = hessian_from_gradient(&t, &x, 1e-5).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                assert!(mixed_rel_err(h[(k, l)], fd[(k, l)]) < 1e-5);
            }
        }
    }
}
