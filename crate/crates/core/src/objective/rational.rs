use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::simplex::DomainShape;

use super::polynomial::{build_from_parsed, infer_shape, parse_terms};
use super::{Objective, SparsePolynomial};

/// `R = S1 / S2` with S2 expected positive on D.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalObjective {
    numerator: SparsePolynomial,
    denominator: SparsePolynomial,
}

impl RationalObjective {
    pub fn new(numerator: SparsePolynomial, denominator: SparsePolynomial) -> Result<Self> {
        if numerator.shape() != denominator.shape() {
            return Err(Error::ShapeMismatch {
                expected: numerator.shape().to_string(),
                found: denominator.shape().to_string(),
            });
        }
        Ok(Self { numerator, denominator })
    }

    /// A polynomial viewed as a rational function over the constant 1.
    pub fn from_polynomial(p: SparsePolynomial) -> Self {
        let one = SparsePolynomial::constant(p.shape(), 1.0);
        Self {
            numerator: p,
            denominator: one,
        }
    }

    pub fn numerator(&self) -> &SparsePolynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &SparsePolynomial {
        &self.denominator
    }

    /// Parses `numerator --- denominator`. A `shape N M` directive in either
    /// block applies to both.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let sep = lines.iter().position(|l| l.trim() == "---").ok_or(Error::Parse {
            line: lines.len(),
            message: "missing '---' separator".into(),
        })?;
        let top = lines[..sep].join("\n");
        let bottom = lines[sep + 1..].join("\n");
        let (num_terms, d1) = parse_terms(&top, 0)?;
        let (den_terms, d2) = parse_terms(&bottom, sep + 1)?;
        if den_terms.is_empty() {
            return Err(Error::Parse {
                line: lines.len(),
                message: "empty denominator".into(),
            });
        }
        let shape = match d1.or(d2) {
            Some(s) => s,
            None => {
                let all: Vec<_> = num_terms.iter().chain(&den_terms).cloned().collect();
                infer_shape(&all)?
            }
        };
        Self::new(
            build_from_parsed(num_terms, shape)?,
            build_from_parsed(den_terms, shape)?,
        )
    }

    fn positive_denominator(&self, x: &[f64]) -> Result<f64> {
        let d = self.denominator.eval(x);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::DenominatorNonPositive { value: d })
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let d = self.positive_denominator(x)?;
        Ok(self.numerator.eval(x) / d)
    }
}

impl Objective for RationalObjective {
    fn shape(&self) -> DomainShape {
        self.numerator.shape()
    }

    fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.shape().check_len(x.len())?;
        self.eval(x)
    }

    fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.shape().check_len(x.len())?;
        let d = self.positive_denominator(x)?;
        let r = self.numerator.eval(x) / d;
        let g1 = self.numerator.gradient(x);
        let g2 = self.denominator.gradient(x);
        Ok(g1.iter().zip(&g2).map(|(a, b)| (a - r * b) / d).collect())
    }

    fn hessian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.shape().check_len(x.len())?;
        let d = self.positive_denominator(x)?;
        let r = self.numerator.eval(x) / d;
        let g2 = self.denominator.gradient(x);
        let gr: Vec<f64> = self
            .numerator
            .gradient(x)
            .iter()
            .zip(&g2)
            .map(|(a, b)| (a - r * b) / d)
            .collect();
        let h1 = self.numerator.hessian(x);
        let h2 = self.denominator.hessian(x);
        let n = x.len();
        // ∇²R = (∇²S1 − R∇²S2 − ∇S2∇Rᵀ − ∇R∇S2ᵀ) / S2
        Ok(DMatrix::from_fn(n, n, |k, l| {
            (h1[(k, l)] - r * h2[(k, l)] - g2[k] * gr[l] - gr[k] * g2[l]) / d
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ratio_is_one() {
        let r = RationalObjective::parse("1 1:1\n---\n1 1:1\n").unwrap();
        assert_eq!(r.eval(&[0.3, 0.7]).unwrap(), 1.0);
        let g = r.gradient_at(&[0.3, 0.7]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn non_positive_denominator_is_rejected() {
        let r = RationalObjective::parse("1\n---\n1 1:1\n-1 1:2\n").unwrap();
        let e = r.eval(&[0.2, 0.8]).unwrap_err();
        assert!(matches!(e, Error::DenominatorNonPositive { .. }));
        assert!(r.gradient_at(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn missing_separator() {
        let e = RationalObjective::parse("1 1:1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    #[test]
    fn denominator_line_numbers_are_absolute() {
        let e = RationalObjective::parse("1 1:1\n---\n1 1:q\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }
}
