//! Points of the product of simplices `D = Δ_M × … × Δ_M` (N copies).
//!
//! A [`StrategyProfile`] stores the N×M coordinates row-major in a flat
//! vector; flat index `i * M + j` addresses player `i`, strategy `j` (both
//! zero-based). Everything downstream (gradients, Hessians, Jacobians) uses
//! the same flat ordering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute row-sum tolerance applied when deserializing or checking profiles.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Default threshold below which a coordinate is treated as off-support.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainShape {
    pub num_players: usize,
    pub num_strategies: usize,
}

impl DomainShape {
    pub fn new(num_players: usize, num_strategies: usize) -> Result<Self> {
        if num_players < 1 {
            return Err(Error::InvalidShape("need at least one player".into()));
        }
        if num_strategies < 2 {
            return Err(Error::InvalidShape("need at least two strategies per player".into()));
        }
        Ok(Self {
            num_players,
            num_strategies,
        })
    }

    /// Total number of coordinates, N·M.
    #[inline]
    pub fn dim(&self) -> usize {
        self.num_players * self.num_strategies
    }

    #[inline]
    pub fn index(&self, player: usize, strategy: usize) -> usize {
        player * self.num_strategies + strategy
    }

    /// Flat index range of one player's block.
    #[inline]
    pub fn row(&self, player: usize) -> std::ops::Range<usize> {
        let m = self.num_strategies;
        player * m..(player + 1) * m
    }

    /// Inverse of [`DomainShape::index`].
    #[inline]
    pub fn split(&self, flat: usize) -> (usize, usize) {
        (flat / self.num_strategies, flat % self.num_strategies)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} coordinates", self.dim()),
                found: format!("{len}"),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for DomainShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.num_players, self.num_strategies)
    }
}

/// A point of D: N probability vectors of length M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct StrategyProfile {
    shape: DomainShape,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    n: usize,
    m: usize,
    values: Vec<Vec<f64>>,
}

impl TryFrom<ProfileRepr> for StrategyProfile {
    type Error = Error;

    fn try_from(repr: ProfileRepr) -> Result<Self> {
        let shape = DomainShape::new(repr.n, repr.m)?;
        StrategyProfile::from_rows(&repr.values, shape, ROW_SUM_TOL)
    }
}

impl From<StrategyProfile> for ProfileRepr {
    fn from(p: StrategyProfile) -> Self {
        ProfileRepr {
            n: p.shape.num_players,
            m: p.shape.num_strategies,
            values: p.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl StrategyProfile {
    /// Checks `values` (flat, row-major) against the simplex constraints.
    ///
    /// Entries in `[-tol, 0)` are clamped to zero, and rows within `tol` of
    /// unit mass are renormalized. Anything further out is rejected.
    pub fn validate(values: &[f64], shape: DomainShape, tol: f64) -> Result<Self> {
        shape.check_len(values.len())?;
        let mut out = values.to_vec();
        for i in 0..shape.num_players {
            let row = &mut out[shape.row(i)];
            for (j, v) in row.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { player: i, strategy: j });
                }
                if *v < -tol {
                    return Err(Error::NegativeEntry {
                        player: i,
                        strategy: j,
                        value: *v,
                    });
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::RowSumViolation { player: i, sum });
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(Self { shape, values: out })
    }

    /// Same as [`StrategyProfile::validate`], taking one slice per player.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], shape: DomainShape, tol: f64) -> Result<Self> {
        if rows.len() != shape.num_players {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", shape.num_players),
                found: format!("{}", rows.len()),
            });
        }
        let mut flat = Vec::with_capacity(shape.dim());
        for r in rows {
            let r = r.as_ref();
            if r.len() != shape.num_strategies {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} strategies", shape.num_strategies),
                    found: format!("{}", r.len()),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::validate(&flat, shape, tol)
    }

    /// Wraps values already known to lie on D (within rounding). Only for
    /// outputs of maps that preserve D by construction.
    pub(crate) fn from_raw(values: Vec<f64>, shape: DomainShape) -> Self {
        debug_assert_eq!(values.len(), shape.dim());
        Self { shape, values }
    }

    /// The barycentre: every row uniform.
    pub fn uniform(shape: DomainShape) -> Self {
        let v = 1.0 / shape.num_strategies as f64;
        Self::from_raw(vec![v; shape.dim()], shape)
    }

    #[inline]
    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, player: usize, strategy: usize) -> f64 {
        self.values[self.shape.index(player, strategy)]
    }

    pub fn row(&self, player: usize) -> &[f64] {
        &self.values[self.shape.row(player)]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.shape.num_strategies)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// ∞-norm distance between two profiles of the same shape.
    pub fn max_abs_diff(&self, other: &StrategyProfile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// True when every coordinate exceeds `support_tol`.
    pub fn is_interior(&self, support_tol: f64) -> bool {
        self.values.iter().all(|&v| v > support_tol)
    }
}

/// Which coordinates of a profile are treated as positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPattern {
    pub shape: DomainShape,
    pub in_support: Vec<Vec<bool>>,
}

impl SupportPattern {
    #[inline]
    pub fn contains(&self, player: usize, strategy: usize) -> bool {
        self.in_support[player][strategy]
    }

    pub fn row_size(&self, player: usize) -> usize {
        self.in_support[player].iter().filter(|&&b| b).count()
    }

    /// Σ_i (k_i − 1), the dimension of the face tangent space.
    pub fn tangent_dimension(&self) -> usize {
        (0..self.shape.num_players).map(|i| self.row_size(i) - 1).sum()
    }
}

pub fn support(x: &StrategyProfile, support_tol: f64) -> Result<SupportPattern> {
    let shape = x.shape();
    let mut in_support = Vec::with_capacity(shape.num_players);
    for (i, row) in x.rows().enumerate() {
        let flags: Vec<bool> = row.iter().map(|&v| v > support_tol).collect();
        if !flags.iter().any(|&b| b) {
            return Err(Error::EmptySupportRow { player: i });
        }
        in_support.push(flags);
    }
    Ok(SupportPattern { shape, in_support })
}

/// Draws each row uniformly from the open simplex (flat Dirichlet) using the
/// supplied generator.
pub fn random_profile_with<R: Rng + ?Sized>(shape: DomainShape, rng: &mut R) -> StrategyProfile {
    let m = shape.num_strategies;
    let mut values = Vec::with_capacity(shape.dim());
    for _ in 0..shape.num_players {
        let draws: Vec<f64> = (0..m)
            .map(|_| loop {
                let e: f64 = Exp1.sample(rng);
                if e > 0.0 {
                    break e;
                }
            })
            .collect();
        let total: f64 = draws.iter().sum();
        values.extend(draws.iter().map(|e| e / total));
    }
    StrategyProfile::from_raw(values, shape)
}

/// Deterministic flat-Dirichlet sample for a given seed.
pub fn random_profile(shape: DomainShape, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_profile_with(shape, &mut rng)
}

/// Zeroes coordinates at or below `support_tol` and renormalizes each row.
pub fn clamp_to_support(x: &StrategyProfile, support_tol: f64) -> Result<StrategyProfile> {
    let shape = x.shape();
    let mut values = x.values().to_vec();
    for i in 0..shape.num_players {
        let row = &mut values[shape.row(i)];
        row.iter_mut().filter(|v| **v <= support_tol).for_each(|v| *v = 0.0);
        let sum: f64 = row.iter().sum();
        if sum <= 0.0 {
            return Err(Error::EmptySupportRow { player: i });
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(StrategyProfile::from_raw(values, shape))
}
