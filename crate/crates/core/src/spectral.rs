//! Jacobian of the MWU map, its reduced-coordinate projection, the compact
//! interior form, and the stability / diffeomorphism checks built on them.
//!
//! With `g = ∇P`, `H = ∇²P`, `S_i = 1 + ε_i Σ_j' x_ij' g_ij'` and
//! `T_ij = x_ij (1 + ε_i g_ij) / S_i`, differentiating by the quotient rule
//! gives
//!
//! ```text
//! ∂T_ij/∂x_i's = δ (1 + ε_i g_ij)/S_i + (x_ij/S_i) ε_i H[ij, i's]
//!              − x_ij (1 + ε_i g_ij)/S_i² · ε_i (δ_ii' g_i's + Σ_j' x_ij' H[ij', i's])
//! ```
//!
//! The projection eliminates, per player, the largest coordinate through
//! `x_i,rem = 1 − Σ_{j≠rem} x_ij`, so it is the Jacobian of the MWU map in
//! reduced coordinates on D, valid at any point, not only at fixed points.

use std::io::Write;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::dynamics::{mwu_step, StepSizes};
use crate::error::{Error, Result};
use crate::linalg::{determinant, eigenvalues};
use crate::objective::Objective;
use crate::simplex::{random_profile_with, DomainShape, StrategyProfile, DEFAULT_SUPPORT_TOL};
use crate::stationarity::Tolerances;

/// Fixed-point tolerance (∞-norm step gap) for stability and compact-form
/// checks.
pub const FIXED_POINT_TOL: f64 = 1e-8;

fn player_denominators(x: &[f64], g: &[f64], shape: DomainShape, eps: &StepSizes) -> Result<Vec<f64>> {
    eps.check_players(shape)?;
    (0..shape.num_players)
        .map(|i| {
            let r = shape.row(i);
            let s = 1.0 + eps.get(i) * x[r.clone()].iter().zip(&g[r]).map(|(a, b)| a * b).sum::<f64>();
            if s > 0.0 {
                Ok(s)
            } else {
                Err(Error::StepSizeTooLarge { player: i, value: s })
            }
        })
        .collect()
}

/// Jacobian of the MWU map at raw coordinates `x` (need not lie on D).
pub fn analytic_jacobian_at(obj: &(impl Objective + ?Sized), x: &[f64], eps: &StepSizes) -> Result<DMatrix<f64>> {
    let shape = obj.shape();
    shape.check_len(x.len())?;
    let g = obj.gradient_at(x)?;
    let s = player_denominators(x, &g, shape, eps)?;
    let h = obj.hessian_at(x)?;
    let n = shape.dim();
    let m = shape.num_strategies;

    // w[i][col] = Σ_j' x_ij' H[ij', col]
    let mut w = DMatrix::<f64>::zeros(shape.num_players, n);
    for i in 0..shape.num_players {
        for col in 0..n {
            w[(i, col)] = shape.row(i).map(|k| x[k] * h[(k, col)]).sum();
        }
    }

    Ok(DMatrix::from_fn(n, n, |row, col| {
        let i = row / m;
        let e = eps.get(i);
        let si = s[i];
        let factor = 1.0 + e * g[row];
        let own = if row / m == col / m { g[col] } else { 0.0 };
        let diag = if row == col { factor / si } else { 0.0 };
        diag + x[row] / si * e * h[(row, col)] - x[row] * factor / (si * si) * e * (own + w[(i, col)])
    }))
}

pub fn analytic_jacobian(
    x: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    eps: &StepSizes,
) -> Result<DMatrix<f64>> {
    if obj.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            expected: obj.shape().to_string(),
            found: x.shape().to_string(),
        });
    }
    analytic_jacobian_at(obj, x.values(), eps)
}

/// Per player, the strategy eliminated by the projection: the largest
/// coordinate, lowest index on ties.
pub fn removed_strategies(x: &StrategyProfile, support_tol: f64) -> Result<Vec<(usize, usize)>> {
    x.rows()
        .enumerate()
        .map(|(i, row)| {
            let (j, &v) = row
                .iter()
                .enumerate()
                .fold((0, &row[0]), |best, cur| if cur.1 > best.1 { cur } else { best });
            if v > support_tol {
                Ok((i, j))
            } else {
                Err(Error::EmptySupportRow { player: i })
            }
        })
        .collect()
}

/// Projected matrix and the `(player, strategy)` removed per player.
pub type Projection = (DMatrix<f64>, Vec<(usize, usize)>);

/// Reduced-coordinate Jacobian: folds each player's removed column into the
/// retained columns of that player, then drops the removed rows/columns.
pub fn project_jacobian(full: &DMatrix<f64>, x: &StrategyProfile, support_tol: f64) -> Result<Projection> {
    let shape = x.shape();
    let n = shape.dim();
    if full.nrows() != n || full.ncols() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n}x{n} matrix"),
            found: format!("{}x{}", full.nrows(), full.ncols()),
        });
    }
    let removed = removed_strategies(x, support_tol)?;
    let removed_flat: Vec<usize> = removed.iter().map(|&(i, j)| shape.index(i, j)).collect();
    let kept: Vec<usize> = (0..n).filter(|k| !removed_flat.contains(k)).collect();
    let m = shape.num_strategies;
    let projected = DMatrix::from_fn(kept.len(), kept.len(), |a, b| {
        let (row, col) = (kept[a], kept[b]);
        full[(row, col)] - full[(row, removed_flat[col / m])]
    });
    Ok((projected, removed))
}

fn check_interior_fixed_point(
    x: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    eps: &StepSizes,
    support_tol: f64,
) -> Result<()> {
    if !x.is_interior(support_tol) {
        return Err(Error::NotInteriorFixedPoint("point is on the boundary".into()));
    }
    let gap = mwu_step(x, obj, eps)?.max_abs_diff(x);
    if gap > FIXED_POINT_TOL {
        return Err(Error::NotInteriorFixedPoint(format!("step moves by {gap:e}")));
    }
    Ok(())
}

/// Diagonal of `D_xs`, `ε_i x*_ij / S_i`.
fn dxs_diagonal(x: &StrategyProfile, obj: &(impl Objective + ?Sized), eps: &StepSizes) -> Result<Vec<f64>> {
    let shape = x.shape();
    let g = obj.gradient_at(x.values())?;
    let s = player_denominators(x.values(), &g, shape, eps)?;
    Ok((0..shape.dim())
        .map(|k| {
            let i = k / shape.num_strategies;
            eps.get(i) * x.values()[k] / s[i]
        })
        .collect())
}

/// `D_xx`: per player, a block whose every row is `(x*_i1, …, x*_iM)`.
fn dxx(x: &StrategyProfile) -> DMatrix<f64> {
    let shape = x.shape();
    let m = shape.num_strategies;
    DMatrix::from_fn(shape.dim(), shape.dim(), |r, c| {
        if r / m == c / m {
            x.values()[c]
        } else {
            0.0
        }
    })
}

/// `I + D_xs (I − D_xx) ∇²P(x*)` at an interior fixed point.
pub fn compact_form(
    x_star: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    eps: &StepSizes,
) -> Result<DMatrix<f64>> {
    check_interior_fixed_point(x_star, obj, eps, DEFAULT_SUPPORT_TOL)?;
    let n = x_star.shape().dim();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dxs_diagonal(x_star, obj, eps)?));
    let h = obj.hessian_at(x_star.values())?;
    let id = DMatrix::<f64>::identity(n, n);
    Ok(&id + d * (&id - dxx(x_star)) * h)
}

/// `I + D_xs^{1/2} (I − D_xx) ∇²P(x*) D_xs^{1/2}`, similar to
/// [`compact_form`] through conjugation by `D_xs^{1/2}`.
pub fn scaled_compact_form(
    x_star: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    eps: &StepSizes,
) -> Result<DMatrix<f64>> {
    check_interior_fixed_point(x_star, obj, eps, DEFAULT_SUPPORT_TOL)?;
    let n = x_star.shape().dim();
    let root: Vec<f64> = dxs_diagonal(x_star, obj, eps)?.into_iter().map(f64::sqrt).collect();
    let r = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(root));
    let h = obj.hessian_at(x_star.values())?;
    let id = DMatrix::<f64>::identity(n, n);
    Ok(&id + &r * (&id - dxx(x_star)) * h * &r)
}

/// Eigenvalues of a general real matrix, decreasing modulus.
pub fn spectrum(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    eigenvalues(m)
}

pub fn spectral_radius(ev: &[Complex<f64>]) -> f64 {
    ev.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn ser_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

fn ser_complex<S: Serializer>(v: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobianBundle {
    pub point: StrategyProfile,
    pub eps: StepSizes,
    pub player_denominators: Vec<f64>,
    #[serde(serialize_with = "ser_matrix")]
    pub full: DMatrix<f64>,
    pub removed_indices: Vec<(usize, usize)>,
    #[serde(serialize_with = "ser_matrix")]
    pub projected: DMatrix<f64>,
    /// `[re, im]` pairs, decreasing modulus.
    #[serde(serialize_with = "ser_complex")]
    pub spectrum: Vec<Complex<f64>>,
    pub spectral_radius: f64,
    pub determinant_full: f64,
    pub determinant_projected: f64,
}

impl JacobianBundle {
    pub fn compute(
        x: &StrategyProfile,
        obj: &(impl Objective + ?Sized),
        eps: &StepSizes,
        support_tol: f64,
    ) -> Result<Self> {
        let full = analytic_jacobian(x, obj, eps)?;
        let g = obj.gradient_at(x.values())?;
        let player_denominators = player_denominators(x.values(), &g, x.shape(), eps)?;
        let (projected, removed_indices) = project_jacobian(&full, x, support_tol)?;
        let spectrum = eigenvalues(&projected)?;
        Ok(Self {
            point: x.clone(),
            eps: eps.clone(),
            player_denominators,
            determinant_full: determinant(&full),
            determinant_projected: determinant(&projected),
            spectral_radius: spectral_radius(&spectrum),
            full,
            removed_indices,
            projected,
            spectrum,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stability {
    Unstable,
    NotUnstable,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub stability: Stability,
    pub spectral_radius: f64,
    pub bundle: JacobianBundle,
}

/// Unstable iff the projected Jacobian at the fixed point `x` has spectral
/// radius above `1 + eig_tol`.
pub fn stability_verdict(
    x: &StrategyProfile,
    obj: &(impl Objective + ?Sized),
    eps: &StepSizes,
    tols: &Tolerances,
) -> Result<StabilityReport> {
    let gap = mwu_step(x, obj, eps)?.max_abs_diff(x);
    if gap > FIXED_POINT_TOL {
        return Err(Error::NotFixedPoint { gap });
    }
    let bundle = JacobianBundle::compute(x, obj, eps, tols.support_tol)?;
    let stability = if bundle.spectral_radius > 1.0 + tols.eig_tol {
        Stability::Unstable
    } else {
        Stability::NotUnstable
    };
    Ok(StabilityReport {
        stability,
        spectral_radius: bundle.spectral_radius,
        bundle,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub eps: f64,
    /// `None` when no sample point produced a Jacobian.
    pub min_det: Option<f64>,
    pub argmin_point_index: Option<usize>,
    /// `(point index, error)` for points where the Jacobian failed.
    pub failures: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub num_points: usize,
    /// Largest grid ε whose minimum determinant exceeds 1/2 with no failures.
    pub empirical_delta: Option<f64>,
}

impl ProbeReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "eps,min_det,argmin_point_index")?;
        for r in &self.rows {
            let det = r.min_det.map_or(String::from("nan"), |d| format!("{d:?}"));
            let idx = r.argmin_point_index.map_or(String::new(), |i| i.to_string());
            writeln!(w, "{:?},{det},{idx}", r.eps)?;
        }
        Ok(())
    }
}

/// Probe points: `samples` random interior points, then the centre of every
/// facet (one player's row uniform over all but one strategy, the other
/// rows uniform).
pub fn probe_points(shape: DomainShape, samples: usize, seed: u64) -> Vec<StrategyProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<StrategyProfile> = (0..samples).map(|_| random_profile_with(shape, &mut rng)).collect();
    let m = shape.num_strategies;
    let uniform = 1.0 / m as f64;
    for i in 0..shape.num_players {
        for skip in 0..m {
            let mut v = vec![uniform; shape.dim()];
            for j in 0..m {
                v[shape.index(i, j)] = if j == skip { 0.0 } else { 1.0 / (m - 1) as f64 };
            }
            points.push(StrategyProfile::validate(&v, shape, 1e-12).expect("facet centre lies on D"));
        }
    }
    points
}

/// Minimum projected-Jacobian determinant over the probe points for each
/// step size in `eps_grid`.
pub fn diffeomorphism_probe(
    obj: &(impl Objective + ?Sized),
    shape: DomainShape,
    eps_grid: &[f64],
    sample_points: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) || eps_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("eps grid must be positive and ascending".into()));
    }
    let points = probe_points(shape, sample_points, seed);
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let eps = StepSizes::uniform(shape.num_players, e)?;
        let mut best: Option<(f64, usize)> = None;
        let mut failures = Vec::new();
        for (idx, p) in points.iter().enumerate() {
            let det = analytic_jacobian(p, obj, &eps)
                .and_then(|full| project_jacobian(&full, p, DEFAULT_SUPPORT_TOL))
                .map(|(proj, _)| determinant(&proj));
            match det {
                Ok(d) => {
                    if best.is_none_or(|(b, _)| d < b) {
                        best = Some((d, idx));
                    }
                }
                Err(err) => failures.push((idx, err.to_string())),
            }
        }
        rows.push(ProbeRow {
            eps: e,
            min_det: best.map(|b| b.0),
            argmin_point_index: best.map(|b| b.1),
            failures,
        });
    }
    let empirical_delta = rows
        .iter()
        .filter(|r| r.failures.is_empty() && r.min_det.is_some_and(|d| d > 0.5))
        .map(|r| r.eps)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    Ok(ProbeReport {
        rows,
        num_points: points.len(),
        empirical_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::mwu_map_at;
    use crate::objective::fd::central_jacobian;
    use crate::objective::{builtin, AnyObjective};

    fn profile(rows: &[&[f64]]) -> StrategyProfile {
        let shape = DomainShape::new(rows.len(), rows[0].len()).unwrap();
        StrategyProfile::from_rows(rows, shape, 1e-12).unwrap()
    }

    fn linear() -> AnyObjective {
        AnyObjective::parse("2 1:1\n1 1:2\n").unwrap()
    }

    #[test]
    fn zero_step_gives_identity() {
        let p = builtin("coord-2x2").unwrap();
        let x = profile(&[&[0.3, 0.7], &[0.6, 0.4]]);
        let eps = StepSizes::uniform(2, 0.0).unwrap();
        let j = analytic_jacobian(&x, &p, &eps).unwrap();
        assert_eq!(j, DMatrix::identity(4, 4));
        let (proj, _) = project_jacobian(&j, &x, 1e-9).unwrap();
        assert_eq!(proj, DMatrix::identity(2, 2));
    }

    #[test]
    fn linear_jacobian_matches_differences() {
        let x = profile(&[&[0.5, 0.5]]);
        let eps = StepSizes::uniform(1, 0.1).unwrap();
        let p = linear();
        let j = analytic_jacobian(&x, &p, &eps).unwrap();
        let fd = central_jacobian(|v| mwu_map_at(&p, v, &eps), x.values(), 1e-6).unwrap();
        assert!((j - fd).abs().max() < 1e-7);
    }

    #[test]
    fn projection_dimensions() {
        let x = profile(&[&[0.5, 0.5]]);
        let j = analytic_jacobian(&x, &linear(), &StepSizes::uniform(1, 0.1).unwrap()).unwrap();
        let (proj, removed) = project_jacobian(&j, &x, 1e-9).unwrap();
        assert_eq!(proj.shape(), (1, 1));
        // tie broken towards the lowest index
        assert_eq!(removed, vec![(0, 0)]);
    }

    #[test]
    fn first_order_violation_witness() {
        let x = profile(&[&[0.0, 1.0]]);
        let eps = StepSizes::uniform(1, 0.1).unwrap();
        let rep = stability_verdict(&x, &linear(), &eps, &Tolerances::default()).unwrap();
        assert_eq!(rep.stability, Stability::Unstable);
        assert_eq!(rep.bundle.removed_indices, vec![(0, 1)]);
        let expected = 1.2 / 1.1;
        assert!((rep.bundle.projected[(0, 0)] - expected).abs() < 1e-15);
        assert!((rep.spectral_radius - expected).abs() < 1e-9);
        assert!((rep.spectral_radius - 1.0909091).abs() < 1e-7);
    }

    #[test]
    fn coordination_points() {
        let p = builtin("coord-2x2").unwrap();
        let eps = StepSizes::uniform(2, 0.1).unwrap();
        let mixed = profile(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let rep = stability_verdict(&mixed, &p, &eps, &Tolerances::default()).unwrap();
        assert_eq!(rep.stability, Stability::Unstable);
        assert!(rep.spectral_radius > 1.0);
        let vertex = profile(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let rep = stability_verdict(&vertex, &p, &eps, &Tolerances::default()).unwrap();
        assert_eq!(rep.stability, Stability::NotUnstable);
        assert!(matches!(
            stability_verdict(&profile(&[&[0.3, 0.7], &[0.5, 0.5]]), &p, &eps, &Tolerances::default()),
            Err(Error::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn compact_form_requires_interior_fixed_point() {
        let p = builtin("coord-2x2").unwrap();
        let eps = StepSizes::uniform(2, 0.1).unwrap();
        assert!(matches!(
            compact_form(&profile(&[&[1.0, 0.0], &[1.0, 0.0]]), &p, &eps),
            Err(Error::NotInteriorFixedPoint(_))
        ));
        assert!(matches!(
            compact_form(&profile(&[&[0.3, 0.7], &[0.5, 0.5]]), &p, &eps),
            Err(Error::NotInteriorFixedPoint(_))
        ));
    }

    #[test]
    fn compact_form_with_zero_hessian_is_identity() {
        let p = AnyObjective::parse("1 1:1\n1 1:2\n").unwrap();
        let x = profile(&[&[0.25, 0.75]]);
        let c = compact_form(&x, &p, &StepSizes::uniform(1, 0.3).unwrap()).unwrap();
        assert_eq!(c, DMatrix::identity(2, 2));
    }

    #[test]
    fn probe_at_tiny_step() {
        let p = builtin("coord-2x2").unwrap();
        let rep = diffeomorphism_probe(&p, p.shape(), &[1e-6, 0.1, 1.0], 20, 0).unwrap();
        assert!((rep.rows[0].min_det.unwrap() - 1.0).abs() < 1e-3);
        assert!(rep.empirical_delta.unwrap() >= 1e-6);
        assert_eq!(rep.num_points, 20 + 4);
        assert!(diffeomorphism_probe(&p, p.shape(), &[0.1, 0.01], 2, 0).is_err());
    }

    #[test]
    fn probe_csv() {
        let p = linear();
        let rep = diffeomorphism_probe(&p, p.shape(), &[0.01, 0.1], 3, 1).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,min_det,argmin_point_index\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
