//! MWU, Baum–Eagon and rational Baum–Eagon steps, and trajectory runs.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{eval, gradient, surrogate_terms, AnyObjective, Objective, RationalObjective, SparsePolynomial};
use crate::simplex::{random_profile_with, DomainShape, StrategyProfile};

/// Step size used by [`safe_stepsize`] when every sampled gradient vanishes.
pub const STEPSIZE_CAP: f64 = 1.0;

/// Per-player learning rates ε_i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepSizes {
    per_player: Vec<f64>,
}

impl StepSizes {
    /// Zero is accepted (the identity map); negative or non-finite rates
    /// are not.
    pub fn new(per_player: Vec<f64>) -> Result<Self> {
        if per_player.is_empty() {
            return Err(Error::InvalidConfig("no step sizes given".into()));
        }
        if let Some(bad) = per_player.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::InvalidConfig(format!("invalid step size {bad}")));
        }
        Ok(Self { per_player })
    }

    pub fn uniform(num_players: usize, eps: f64) -> Result<Self> {
        Self::new(vec![eps; num_players])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.per_player
    }

    #[inline]
    pub fn get(&self, player: usize) -> f64 {
        self.per_player[player]
    }

    pub(crate) fn check_players(&self, shape: DomainShape) -> Result<()> {
        if self.per_player.len() != shape.num_players {
            return Err(Error::ShapeMismatch {
                expected: format!("{} step sizes", shape.num_players),
                found: format!("{}", self.per_player.len()),
            });
        }
        Ok(())
    }
}

/// The MWU map on raw coordinates with a precomputed gradient. Not
/// restricted to D, so it can be differenced in every direction.
pub fn mwu_map(x: &[f64], g: &[f64], shape: DomainShape, eps: &StepSizes) -> Result<Vec<f64>> {
    shape.check_len(x.len())?;
    shape.check_len(g.len())?;
    eps.check_players(shape)?;
    let mut out = vec![0.0; x.len()];
    for i in 0..shape.num_players {
        let e = eps.get(i);
        let r = shape.row(i);
        let weighted: f64 = x[r.clone()].iter().zip(&g[r.clone()]).map(|(a, b)| a * b).sum();
        let denom = 1.0 + e * weighted;
        if denom.is_nan() || denom <= 0.0 {
            return Err(Error::StepSizeTooLarge {
                player: i,
                value: denom,
            });
        }
        for k in r {
            let num = 1.0 + e * g[k];
            if num.is_nan() || num <= 0.0 {
                return Err(Error::StepSizeTooLarge { player: i, value: num });
            }
            out[k] = x[k] * num / denom;
        }
    }
    Ok(out)
}

/// MWU map evaluated through the objective's gradient at raw coordinates.
pub fn mwu_map_at(obj: &(impl Objective + ?Sized), x: &[f64], eps: &StepSizes) -> Result<Vec<f64>> {
    let g = obj.gradient_at(x)?;
    mwu_map(x, &g, obj.shape(), eps)
}

pub fn mwu_step(x: &StrategyProfile, obj: &(impl Objective + ?Sized), eps: &StepSizes) -> Result<StrategyProfile> {
    let g = gradient(obj, x)?;
    let next = mwu_map(x.values(), &g, x.shape(), eps)?;
    Ok(StrategyProfile::from_raw(next, x.shape()))
}

/// One Baum–Eagon step `x_ij ∂P/∂x_ij / Σ_h x_ih ∂P/∂x_ih`.
pub fn baum_eagon_step(x: &StrategyProfile, p: &SparsePolynomial) -> Result<StrategyProfile> {
    if p.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            expected: p.shape().to_string(),
            found: x.shape().to_string(),
        });
    }
    if !p.nonneg_coefficients() {
        return Err(Error::InvalidConfig(
            "Baum-Eagon step needs a polynomial with nonnegative coefficients".into(),
        ));
    }
    baum_eagon_normalize(x, &p.gradient(x.values()))
}

/// `x_ij g_ij / Σ_h x_ih g_ih` per player.
fn baum_eagon_normalize(x: &StrategyProfile, g: &[f64]) -> Result<StrategyProfile> {
    let shape = x.shape();
    let xv = x.values();
    let mut out = vec![0.0; xv.len()];
    for i in 0..shape.num_players {
        let r = shape.row(i);
        let denom: f64 = r.clone().map(|k| xv[k] * g[k]).sum();
        if denom.is_nan() || denom <= 0.0 {
            return Err(Error::ZeroDenominator {
                player: i,
                value: denom,
            });
        }
        for k in r {
            out[k] = xv[k] * g[k] / denom;
        }
    }
    Ok(StrategyProfile::from_raw(out, shape))
}

/// Baum–Eagon step of the surrogate anchored at `x`; never decreases `R`.
///
/// On D every partial of `N_y (Σ x + 1)^d` equals `N_y d (N + 1)^(d−1)`, so
/// the surrogate gradient is that constant added to `∇P_y`, and the
/// expansion built by [`build_surrogate`] is never materialized here.
pub fn rational_be_step(x: &StrategyProfile, r: &RationalObjective) -> Result<StrategyProfile> {
    let (p_y, d, n_y) = surrogate_terms(r, x)?;
    let lift = n_y * d as f64 * (x.shape().num_players as f64 + 1.0).powi(d as i32 - 1);
    let g: Vec<f64> = p_y.gradient(x.values()).into_iter().map(|v| v + lift).collect();
    baum_eagon_normalize(x, &g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Method {
    #[serde(rename = "mwu")]
    #[value(name = "mwu")]
    Mwu,
    #[serde(rename = "baum-eagon")]
    #[value(name = "baum-eagon")]
    BaumEagon,
    #[serde(rename = "rational-be")]
    #[value(name = "rational-be")]
    RationalBe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    MaxIterations,
    StepFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    /// Index of the step that failed (0 = the step from x0).
    pub iteration: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub record_every: usize,
}

impl RunOptions {
    /// Records every point for runs of at most 10^4 iterations, every 100th
    /// otherwise.
    pub fn new(tol: f64, max_iter: usize) -> Self {
        let record_every = if max_iter <= 10_000 { 1 } else { 100 };
        Self {
            tol,
            max_iter,
            record_every,
        }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub status: RunStatus,
    pub iterations: usize,
    /// Iteration index of each recorded point.
    pub steps: Vec<usize>,
    pub points: Vec<StrategyProfile>,
    #[serde(rename = "values")]
    pub objective_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<StepFailure>,
    /// ∞-norm gap of the last step taken.
    pub final_gap: f64,
}

impl Trajectory {
    pub fn final_point(&self) -> &StrategyProfile {
        self.points.last().expect("a trajectory always records x0")
    }

    pub fn final_value(&self) -> f64 {
        *self.objective_values.last().expect("a trajectory always records x0")
    }

    /// CSV with header `t,x_1_1,...,x_N_M,P`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let shape = self.final_point().shape();
        let mut header = vec!["t".to_string()];
        for i in 1..=shape.num_players {
            for j in 1..=shape.num_strategies {
                header.push(format!("x_{i}_{j}"));
            }
        }
        header.push("P".into());
        writeln!(w, "{}", header.join(","))?;
        for ((t, p), v) in self.steps.iter().zip(&self.points).zip(&self.objective_values) {
            let coords: Vec<String> = p.values().iter().map(|c| format!("{c:?}")).collect();
            writeln!(w, "{t},{},{v:?}", coords.join(","))?;
        }
        Ok(())
    }
}

fn step_with(
    method: Method,
    x: &StrategyProfile,
    obj: &AnyObjective,
    eps: &StepSizes,
    rational: Option<&RationalObjective>,
) -> Result<StrategyProfile> {
    match method {
        Method::Mwu => mwu_step(x, obj, eps),
        Method::BaumEagon => match obj {
            AnyObjective::Polynomial(p) => baum_eagon_step(x, p),
            _ => Err(Error::InvalidConfig("baum-eagon needs a polynomial objective".into())),
        },
        Method::RationalBe => rational_be_step(x, rational.expect("prepared by run")),
    }
}

/// Iterates `method` from `x0` until the ∞-norm gap between consecutive
/// iterates drops to `opts.tol`, `opts.max_iter` steps are taken, or a step
/// fails. Step errors end the run with [`RunStatus::StepFailure`].
pub fn run(x0: &StrategyProfile, obj: &AnyObjective, eps: &StepSizes, method: Method, opts: &RunOptions) -> Trajectory {
    let rational = match (method, obj) {
        (Method::RationalBe, AnyObjective::Rational(r)) => Some(r.clone()),
        (Method::RationalBe, AnyObjective::Polynomial(p)) => Some(RationalObjective::from_polynomial(p.clone())),
        _ => None,
    };
    let every = opts.record_every.max(1);
    let mut traj = Trajectory {
        status: RunStatus::MaxIterations,
        iterations: 0,
        steps: Vec::new(),
        points: Vec::new(),
        objective_values: Vec::new(),
        failure: None,
        final_gap: f64::INFINITY,
    };
    let fail = |traj: &mut Trajectory, iteration: usize, e: Error| {
        traj.status = RunStatus::StepFailure;
        traj.failure = Some(StepFailure {
            iteration,
            message: e.to_string(),
        });
    };

    let mut x = x0.clone();
    let mut value = match eval(obj, &x) {
        Ok(v) => v,
        Err(e) => {
            traj.steps.push(0);
            traj.points.push(x);
            traj.objective_values.push(f64::NAN);
            fail(&mut traj, 0, e);
            return traj;
        }
    };
    traj.steps.push(0);
    traj.points.push(x.clone());
    traj.objective_values.push(value);
    if method == Method::RationalBe && rational.is_none() {
        fail(
            &mut traj,
            0,
            Error::InvalidConfig("rational-be needs a polynomial or rational objective".into()),
        );
        return traj;
    }

    let mut last_recorded = 0;
    for t in 0..opts.max_iter {
        let next = match step_with(method, &x, obj, eps, rational.as_ref()).and_then(|n| eval(obj, &n).map(|v| (n, v)))
        {
            Ok(pair) => pair,
            Err(e) => {
                fail(&mut traj, t, e);
                break;
            }
        };
        let gap = next.0.max_abs_diff(&x);
        x = next.0;
        value = next.1;
        traj.iterations = t + 1;
        traj.final_gap = gap;
        if traj.iterations.is_multiple_of(every) {
            traj.steps.push(traj.iterations);
            traj.points.push(x.clone());
            traj.objective_values.push(value);
            last_recorded = traj.iterations;
        }
        if gap <= opts.tol {
            traj.status = RunStatus::Converged;
            break;
        }
    }
    if last_recorded != traj.iterations {
        traj.steps.push(traj.iterations);
        traj.points.push(x);
        traj.objective_values.push(value);
    }
    traj
}

/// All pure profiles of `shape`, or `None` when there are more than `limit`.
pub(crate) fn vertices(shape: DomainShape, limit: usize) -> Option<Vec<StrategyProfile>> {
    let m = shape.num_strategies;
    let count = (m as u128).checked_pow(shape.num_players as u32)?;
    if count > limit as u128 {
        return None;
    }
    let mut out = Vec::with_capacity(count as usize);
    for mut code in 0..count as usize {
        let mut values = vec![0.0; shape.dim()];
        for i in 0..shape.num_players {
            values[shape.index(i, code % m)] = 1.0;
            code /= m;
        }
        out.push(StrategyProfile::from_raw(values, shape));
    }
    Some(out)
}

/// ε_i = 1/(2G) with G the largest sampled gradient entry in absolute value.
///
/// Samples `samples` random interior points, plus every vertex for
/// polynomial objectives (when there are at most 4096 of them). Points
/// where the gradient cannot be evaluated are skipped.
pub fn safe_stepsize(obj: &AnyObjective, shape: DomainShape, samples: usize, seed: u64) -> StepSizes {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<StrategyProfile> = (0..samples.max(1))
        .map(|_| random_profile_with(shape, &mut rng))
        .collect();
    if let AnyObjective::Polynomial(_) = obj {
        if let Some(v) = vertices(shape, 4096) {
            points.extend(v);
        }
    }
    let g_max = points
        .iter()
        .filter_map(|p| gradient(obj, p).ok())
        .flat_map(|g| g.into_iter().map(f64::abs))
        .fold(0.0f64, f64::max);
    let eps = if g_max > 0.0 { 1.0 / (2.0 * g_max) } else { STEPSIZE_CAP };
    StepSizes::uniform(shape.num_players, eps).expect("positive finite step size")
}
