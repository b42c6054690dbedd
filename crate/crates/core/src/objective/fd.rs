//! Central finite differences, used as independent oracles for analytic
//! derivatives and by the black-box self-test.

use nalgebra::DMatrix;

use crate::error::Result;

use super::Objective;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

pub fn central_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let up = f(&probe)?;
        probe[k] = x[k] - h;
        let down = f(&probe)?;
        probe[k] = x[k];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

/// Central differences of a vector-valued map; column `k` holds ∂F/∂x_k.
pub fn central_jacobian<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut probe = x.to_vec();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        probe[k] = x[k] + h;
        let up = f(&probe)?;
        probe[k] = x[k] - h;
        let down = f(&probe)?;
        probe[k] = x[k];
        cols.push(
            up.iter()
                .zip(&down)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let rows = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows, n, |r, c| cols[c][r]))
}

/// Hessian estimated by differencing the analytic gradient.
pub fn hessian_from_gradient(obj: &(impl Objective + ?Sized), x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    central_jacobian(|p| obj.gradient_at(p), x, h)
}

/// `|a − b| / max(1, |b|)`, the mixed error used throughout the oracles.
#[inline]
pub fn mixed_rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
