//! Objectives P on the product of simplices: sparse polynomials, rational
//! functions and black-box callables, all exposing value, gradient and
//! (where available) Hessian over the flat coordinate vector.
//!
//! The raw `*_at` methods accept any finite coordinate vector of the right
//! length, not only points of D. Finite-difference oracles and the Jacobian
//! code rely on that.

mod blackbox;
mod builtin;
pub mod fd;
mod polynomial;
mod rational;
mod surrogate;

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::simplex::{DomainShape, StrategyProfile};

pub use blackbox::{BlackBoxObjective, GradFn, HessFn, ValueFn};
pub use builtin::{builtin, trig_demo, BUILTIN_IDS};
pub use polynomial::{multinomial_weight, simplex_power_expansion, Monomial, SparsePolynomial};
pub use rational::RationalObjective;
pub(crate) use surrogate::surrogate_terms;
pub use surrogate::{build_surrogate, SurrogatePolynomial};

/// A twice-differentiable function of the N·M flat coordinates.
pub trait Objective: Send + Sync {
    fn shape(&self) -> DomainShape;

    fn value_at(&self, x: &[f64]) -> Result<f64>;

    fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Symmetric matrix of second partials, flat index order `i·M + j`.
    fn hessian_at(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    fn has_hessian(&self) -> bool {
        true
    }
}

/// Any of the supported objective representations.
#[derive(Clone, Debug)]
pub enum AnyObjective {
    Polynomial(SparsePolynomial),
    Rational(RationalObjective),
    BlackBox(BlackBoxObjective),
}

impl AnyObjective {
    fn inner(&self) -> &dyn Objective {
        match self {
            AnyObjective::Polynomial(p) => p,
            AnyObjective::Rational(r) => r,
            AnyObjective::BlackBox(b) => b,
        }
    }

    /// Reads an objective from a text file: a single polynomial block, or a
    /// numerator and denominator separated by a `---` line.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.lines().any(|l| l.trim() == "---") {
            Ok(AnyObjective::Rational(RationalObjective::parse(text)?))
        } else {
            Ok(AnyObjective::Polynomial(SparsePolynomial::parse(text, None)?))
        }
    }

    /// Resolves `source` as a built-in id first, then as a file path.
    pub fn resolve(source: &str) -> Result<Self> {
        if BUILTIN_IDS.contains(&source) {
            return builtin(source);
        }
        let path = Path::new(source);
        if path.exists() {
            Self::from_file(path)
        } else {
            Err(Error::UnknownObjective(source.to_string()))
        }
    }
}

impl Objective for AnyObjective {
    fn shape(&self) -> DomainShape {
        self.inner().shape()
    }
    fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.inner().value_at(x)
    }
    fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner().gradient_at(x)
    }
    fn hessian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.inner().hessian_at(x)
    }
    fn has_hessian(&self) -> bool {
        self.inner().has_hessian()
    }
}

impl From<SparsePolynomial> for AnyObjective {
    fn from(p: SparsePolynomial) -> Self {
        AnyObjective::Polynomial(p)
    }
}

impl From<RationalObjective> for AnyObjective {
    fn from(r: RationalObjective) -> Self {
        AnyObjective::Rational(r)
    }
}

impl From<BlackBoxObjective> for AnyObjective {
    fn from(b: BlackBoxObjective) -> Self {
        AnyObjective::BlackBox(b)
    }
}

fn check_shape(obj: &(impl Objective + ?Sized), x: &StrategyProfile) -> Result<()> {
    if obj.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            expected: obj.shape().to_string(),
            found: x.shape().to_string(),
        });
    }
    Ok(())
}

pub fn eval(obj: &(impl Objective + ?Sized), x: &StrategyProfile) -> Result<f64> {
    check_shape(obj, x)?;
    obj.value_at(x.values())
}

pub fn gradient(obj: &(impl Objective + ?Sized), x: &StrategyProfile) -> Result<Vec<f64>> {
    check_shape(obj, x)?;
    obj.gradient_at(x.values())
}

pub fn hessian(obj: &(impl Objective + ?Sized), x: &StrategyProfile) -> Result<DMatrix<f64>> {
    check_shape(obj, x)?;
    obj.hessian_at(x.values())
}
