//! Nonnegative-coefficient surrogate used to ascend a rational objective
//! with a Baum–Eagon step.
//!
//! At an anchor `y` the surrogate is `Q_y = P_y + C_y` with
//! `P_y = S1 − R(y)·S2` and `C_y = N_y·(Σ x + 1)^d`, `d = deg P_y`. On D,
//! `Q_y` differs from `P_y` by the constant `N_y·(N + 1)^d`, and `P_y(y) = 0`,
//! so any increase of `Q_y` from `y` is an increase of `R`.

use crate::error::{Error, Result};
use crate::simplex::StrategyProfile;

use super::polynomial::{multinomial_weight, simplex_power_expansion};
use super::{Objective, RationalObjective, SparsePolynomial};

#[derive(Clone, Debug)]
pub struct SurrogatePolynomial {
    pub base: RationalObjective,
    pub anchor: StrategyProfile,
    pub p_y: SparsePolynomial,
    /// N_y.
    pub c_y_constant: f64,
    pub surrogate_degree: u32,
    pub q_y: SparsePolynomial,
}

impl SurrogatePolynomial {
    /// `R(anchor)`, the value the surrogate step must improve on.
    pub fn anchor_value(&self) -> f64 {
        self.base
            .eval(self.anchor.values())
            .expect("denominator was checked at construction")
    }
}

/// `(P_y, d, N_y)` without expanding `(Σ x + 1)^d`.
pub(crate) fn surrogate_terms(r: &RationalObjective, y: &StrategyProfile) -> Result<(SparsePolynomial, u32, f64)> {
    if r.numerator().shape() != y.shape() {
        return Err(Error::ShapeMismatch {
            expected: r.numerator().shape().to_string(),
            found: y.shape().to_string(),
        });
    }
    let ry = r.eval(y.values())?;
    let p_y = r.numerator().sub(&r.denominator().scale(ry));
    // degree floor of 1 keeps the constant case well defined
    let d = p_y.degree().max(1);

    let n_y = p_y
        .monomials()
        .iter()
        .filter(|m| m.coefficient < 0.0)
        .map(|m| -m.coefficient / multinomial_weight(m.exponents(), d))
        .fold(0.0f64, f64::max);
    Ok((p_y, d, n_y))
}

pub fn build_surrogate(r: &RationalObjective, y: &StrategyProfile) -> Result<SurrogatePolynomial> {
    let (p_y, d, n_y) = surrogate_terms(r, y)?;

    let q_y = if n_y > 0.0 {
        let mut q = p_y.add(&simplex_power_expansion(y.shape(), d).scale(n_y));
        // exact cancellation can leave -ulp residue; clip what rounding left
        q = SparsePolynomial::new(
            q.shape(),
            q.monomials().iter().map(|m| {
                let mut m = m.clone();
                if m.coefficient < 0.0 && m.coefficient > -1e-12 * n_y.max(1.0) {
                    m.coefficient = 0.0;
                }
                m
            }),
        )?;
        q
    } else {
        p_y.clone()
    };

    Ok(SurrogatePolynomial {
        base: r.clone(),
        anchor: y.clone(),
        p_y,
        c_y_constant: n_y,
        surrogate_degree: d,
        q_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::DomainShape;

    #[test]
    fn nonnegative_p_y_needs_no_correction() {
        // S2 = 1 and S1 with nonnegative coefficients and no constant term
        // gives P_y = S1 − R(y), which has a negative constant unless R(y) = 0.
        // Use S1 = x11 * x12 at a vertex, where R(y) = 0.
        let r = RationalObjective::parse("1 1:1 1:2\n---\n1\n").unwrap();
        let y = StrategyProfile::from_rows(&[[1.0, 0.0]], DomainShape::new(1, 2).unwrap(), 1e-12).unwrap();
        let s = build_surrogate(&r, &y).unwrap();
        assert_eq!(s.c_y_constant, 0.0);
        assert_eq!(s.q_y, s.p_y);
    }

    #[test]
    fn linear_numerator_example() {
        let r = RationalObjective::parse("1 1:1\n---\n1\n").unwrap();
        let y = StrategyProfile::from_rows(&[[0.3, 0.7]], DomainShape::new(1, 2).unwrap(), 1e-12).unwrap();
        let s = build_surrogate(&r, &y).unwrap();
        assert_eq!(s.surrogate_degree, 1);
        assert!((s.p_y.coefficient_of(&[]) + 0.3).abs() < 1e-15);
        assert!((s.c_y_constant - 0.3).abs() < 1e-15);
        assert!(s.q_y.min_coefficient().unwrap() >= -1e-12);
        // q_y = x11 + 0.3 x11 + 0.3 x12 (constant cancels)
        assert!((s.q_y.coefficient_of(&[(0, 1)]) - 1.3).abs() < 1e-15);
        assert!((s.q_y.coefficient_of(&[(1, 1)]) - 0.3).abs() < 1e-15);
        assert_eq!(s.q_y.coefficient_of(&[]), 0.0);
    }

    #[test]
    fn constant_p_y_uses_degree_floor() {
        let r = RationalObjective::parse("2\n---\n1\n").unwrap();
        let y = StrategyProfile::uniform(DomainShape::new(1, 2).unwrap());
        let s = build_surrogate(&r, &y).unwrap();
        assert_eq!(s.surrogate_degree, 1);
        assert!(s.p_y.monomials().is_empty());
    }
}
