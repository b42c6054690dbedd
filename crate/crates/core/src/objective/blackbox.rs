use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simplex::{random_profile_with, DomainShape};

use super::fd::{central_gradient, mixed_rel_err, FD_STEP};
use super::Objective;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type HessFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// An objective given by callables. The callables must be pure; nothing
/// here enforces that.
#[derive(Clone)]
pub struct BlackBoxObjective {
    shape: DomainShape,
    value: ValueFn,
    grad: GradFn,
    hess: Option<HessFn>,
}

impl fmt::Debug for BlackBoxObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxObjective")
            .field("shape", &self.shape)
            .field("has_hessian", &self.hess.is_some())
            .finish()
    }
}

impl BlackBoxObjective {
    pub fn new(shape: DomainShape, value: ValueFn, grad: GradFn, hess: Option<HessFn>) -> Self {
        Self {
            shape,
            value,
            grad,
            hess,
        }
    }

    /// Largest mixed relative error between the supplied gradient and
    /// central differences of the value at `samples` random interior points.
    pub fn gradient_self_test(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x = random_profile_with(self.shape, &mut rng);
            let analytic = (self.grad)(x.values());
            let numeric = central_gradient(|p| Ok((self.value)(p)), x.values(), FD_STEP)?;
            for (a, b) in analytic.iter().zip(&numeric) {
                worst = worst.max(mixed_rel_err(*a, *b));
            }
        }
        Ok(worst)
    }
}

impl Objective for BlackBoxObjective {
    fn shape(&self) -> DomainShape {
        self.shape
    }

    fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.shape.check_len(x.len())?;
        Ok((self.value)(x))
    }

    fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.shape.check_len(x.len())?;
        let g = (self.grad)(x);
        self.shape.check_len(g.len())?;
        Ok(g)
    }

    fn hessian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.shape.check_len(x.len())?;
        match &self.hess {
            Some(h) => Ok(h(x)),
            None => Err(Error::HessianUnavailable),
        }
    }

    fn has_hessian(&self) -> bool {
        self.hess.is_some()
    }
}
