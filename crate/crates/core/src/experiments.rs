//! Reproducible studies: the two-variable trigonometric demo map, the
//! non-monotone Baum–Eagon counterexample, and basin-of-attraction
//! statistics, together with the run configuration shared by the CLI.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{baum_eagon_step, run, safe_stepsize, Method, RunOptions, RunStatus, StepSizes};
use crate::error::{Error, Result};
use crate::objective::{builtin, trig_demo, AnyObjective, Objective};
use crate::simplex::{clamp_to_support, random_profile_with, DomainShape, StrategyProfile};
use crate::stationarity::{classify, Tolerances, Verdict};

/// Default ∞-norm radius for grouping basin endpoints.
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-4;

/// The three local maximizers of `cos(8x)·sin(6y)` listed for the demo:
/// `(0, π/12)`, `(π/4, π/12)` and `(π/8, π/4)`.
pub const DEMO_MAXIMIZERS: [(f64, f64); 3] = [
    (0.0, std::f64::consts::PI / 12.0),
    (std::f64::consts::FRAC_PI_4, std::f64::consts::PI / 12.0),
    (std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4),
];

// ---------------------------------------------------------------------------
// Run configuration

/// Step-size choice: sampled automatically, or explicit per player. A single
/// explicit value is broadcast to every player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    Text(String),
    List(Vec<f64>),
    Single(f64),
}

impl Default for EpsSpec {
    fn default() -> Self {
        EpsSpec::Text("auto".into())
    }
}

impl EpsSpec {
    /// `None` for `auto`, otherwise the explicit values.
    pub fn values(&self) -> Result<Option<Vec<f64>>> {
        let parsed = match self {
            EpsSpec::Text(t) if t.trim().eq_ignore_ascii_case("auto") => return Ok(None),
            EpsSpec::Text(t) => t
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad step size '{v}'")))
                })
                .collect::<Result<Vec<_>>>()?,
            EpsSpec::List(v) => v.clone(),
            EpsSpec::Single(v) => vec![*v],
        };
        if parsed.is_empty() {
            return Err(Error::InvalidConfig("empty step-size list".into()));
        }
        Ok(Some(parsed))
    }

    pub fn resolve(&self, obj: &AnyObjective, seed: u64) -> Result<StepSizes> {
        let shape = obj.shape();
        match self.values()? {
            None => Ok(safe_stepsize(obj, shape, 256, seed)),
            Some(v) if v.len() == 1 => StepSizes::uniform(shape.num_players, v[0]),
            Some(v) if v.len() == shape.num_players => StepSizes::new(v),
            Some(v) => Err(Error::InvalidConfig(format!(
                "{} step sizes given for {} players",
                v.len(),
                shape.num_players
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// File path or built-in id.
    pub objective: String,
    pub method: Method,
    pub eps: EpsSpec,
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub output_path: Option<String>,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            objective: "coord-2x2".into(),
            method: Method::Mwu,
            eps: EpsSpec::default(),
            starts: 1,
            seed: 0,
            tol: 1e-12,
            max_iter: 100_000,
            output_path: None,
            output_format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::InvalidConfig("starts must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        self.eps.values()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Optimization runs

#[derive(Clone, Debug, Serialize)]
pub struct StartResult {
    pub start: usize,
    pub trajectory: crate::dynamics::Trajectory,
    /// Classification of the final point; `None` when it failed, with the
    /// reason in `classification_error`.
    pub classification: Option<crate::stationarity::Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeReport {
    pub config: RunConfig,
    pub eps: StepSizes,
    pub runs: Vec<StartResult>,
}

/// Runs `config.starts` seeded random interior starts and classifies each
/// final point.
pub fn optimize(config: &RunConfig, obj: &AnyObjective, tols: &Tolerances) -> Result<OptimizeReport> {
    config.validate()?;
    let eps = config.eps.resolve(obj, config.seed)?;
    let opts = RunOptions::new(config.tol, config.max_iter);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let runs = (0..config.starts)
        .map(|start| {
            let x0 = random_profile_with(obj.shape(), &mut rng);
            let trajectory = run(&x0, obj, &eps, config.method, &opts);
            let (classification, classification_error) = match classify(trajectory.final_point(), obj, tols) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            StartResult {
                start,
                trajectory,
                classification,
                classification_error,
            }
        })
        .collect();
    Ok(OptimizeReport {
        config: config.clone(),
        eps,
        runs,
    })
}

impl OptimizeReport {
    /// All trajectories in one CSV: `start,t,x_1_1,...,x_N_M,P`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, r) in self.runs.iter().enumerate() {
            let mut buf = Vec::new();
            r.trajectory.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).expect("CSV is ASCII");
            for (line_no, line) in text.lines().enumerate() {
                match (line_no, k) {
                    (0, 0) => writeln!(w, "start,{line}")?,
                    (0, _) => {}
                    _ => writeln!(w, "{},{line}", r.start)?,
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Two-variable demo map

/// One step of the planar MWU map for `cos(8x)·sin(6y)` with each player's
/// second strategy eliminated: `x` and `y` receive drives
/// `a = −8 sin(8x) sin(6y)` and `b = 6 cos(8x) cos(6y)`, their complements
/// the negated drives.
pub fn demo_step(x: f64, y: f64, eps: f64) -> Result<(f64, f64)> {
    let a = -8.0 * (8.0 * x).sin() * (6.0 * y).sin();
    let b = 6.0 * (8.0 * x).cos() * (6.0 * y).cos();
    let update = |player: usize, z: f64, drive: f64| -> Result<f64> {
        let num = 1.0 + eps * drive;
        let den = 1.0 + eps * z * drive + eps * (1.0 - z) * (-drive);
        if num <= 0.0 || 1.0 - eps * drive <= 0.0 {
            return Err(Error::StepSizeTooLarge {
                player,
                value: num.min(1.0 - eps * drive),
            });
        }
        if den <= 0.0 {
            return Err(Error::StepSizeTooLarge { player, value: den });
        }
        Ok(z * num / den)
    };
    Ok((update(0, x, a)?, update(1, y, b)?))
}

/// The planar point `(x, y)` as the profile `((x, 1−x), (y, 1−y))`.
pub fn lift_demo_point(x: f64, y: f64) -> Result<StrategyProfile> {
    let shape = DomainShape::new(2, 2)?;
    StrategyProfile::from_rows(&[[x, 1.0 - x], [y, 1.0 - y]], shape, 1e-12)
}

/// Grid points `(i+1)/(grid+1)` in each axis, x-major.
fn interior_grid(grid: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = 1.0 / (grid as f64 + 1.0);
    (1..=grid).flat_map(move |i| (1..=grid).map(move |j| (i as f64 * h, j as f64 * h)))
}

/// Displacement `T(x, y) − (x, y)` of the demo map on a `grid × grid`
/// interior lattice, rows `[x, y, dx, dy]`.
pub fn vector_field(grid: usize, eps: f64) -> Result<Vec<[f64; 4]>> {
    if grid < 2 {
        return Err(Error::InvalidConfig("grid must be at least 2".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig("eps must be positive".into()));
    }
    interior_grid(grid)
        .map(|(x, y)| {
            let (nx, ny) = demo_step(x, y, eps)?;
            Ok([x, y, nx - x, ny - y])
        })
        .collect()
}

pub fn write_vector_field_csv<W: Write>(rows: &[[f64; 4]], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,y,dx,dy")?;
    for r in rows {
        writeln!(w, "{:?},{:?},{:?},{:?}", r[0], r[1], r[2], r[3])?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Counterexample

/// `x1·∂P/∂x1` for `P = x1 + x1⁷x2 + x2⁷`, with `x2 = 1 − x1`.
pub fn counterexample_numerator(x1: f64) -> f64 {
    let x2 = 1.0 - x1;
    x1 + 7.0 * x1.powi(7) * x2
}

/// `k(x1) = x1 ∂P/∂x1 / (x2 ∂P/∂x2)`.
pub fn counterexample_k(x1: f64) -> f64 {
    let x2 = 1.0 - x1;
    counterexample_numerator(x1) / (x1.powi(7) * x2 + 7.0 * x2.powi(7))
}

/// The one-dimensional Baum–Eagon map `τ = k / (1 + k)`.
pub fn counterexample_tau(x1: f64) -> f64 {
    let k = counterexample_k(x1);
    k / (1.0 + k)
}

/// `τ(x1)` computed by one Baum–Eagon step of the `counterexample`
/// built-in objective.
pub fn counterexample_tau_via_objective(x1: f64) -> Result<f64> {
    let AnyObjective::Polynomial(p) = builtin("counterexample")? else {
        unreachable!("counterexample is a polynomial");
    };
    let x = StrategyProfile::from_rows(&[[x1, 1.0 - x1]], p.shape(), 1e-12)?;
    Ok(baum_eagon_step(&x, &p)?.get(0, 0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k_a: f64,
    pub k_b: f64,
    pub k_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityWitness {
    pub x: f64,
    pub x_prime: f64,
    pub tau_x: f64,
    pub tau_x_prime: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub grid: usize,
    /// `(x1, k(x1), τ(x1))` on the interior grid.
    pub table: Vec<[f64; 3]>,
    pub triple: MonotonicityTriple,
    pub witness: InjectivityWitness,
}

impl CounterexampleReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x1,k,tau")?;
        for r in &self.table {
            writeln!(w, "{:?},{:?},{:?}", r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans `k` on `grid` interior points for a strict local maximum followed
/// by a strict local minimum, then refines two preimages of one `τ` level
/// on either side of the maximum.
pub fn counterexample(grid: usize) -> Result<CounterexampleReport> {
    if grid < 100 {
        return Err(Error::InvalidConfig("grid must be at least 100".into()));
    }
    let h = 1.0 / (grid as f64 + 1.0);
    let table: Vec<[f64; 3]> = (1..=grid)
        .map(|i| {
            let x = i as f64 * h;
            let k = counterexample_k(x);
            [x, k, k / (1.0 + k)]
        })
        .collect();

    // first descent after an ascent, then the first ascent after that
    let peak = (1..table.len()).find(|&i| table[i][1] < table[i - 1][1]).map(|i| i - 1);
    let valley = peak.and_then(|p| (p + 1..table.len() - 1).find(|&i| table[i + 1][1] > table[i][1]));
    let (Some(p), Some(v)) = (peak, valley) else {
        return Err(Error::WitnessNotFound("k is monotone on the grid".into()));
    };
    let triple = MonotonicityTriple {
        a: table[p][0],
        b: table[v][0],
        c: table[v + 1][0],
        k_a: table[p][1],
        k_b: table[v][1],
        k_c: table[v + 1][1],
    };

    // τ rises on (0, x_p] and falls on [x_p, x_v]; cut both branches at the
    // level halfway between the two extremes.
    let level = 0.5 * (table[p][2] + table[v][2]);
    let shifted = |x: f64| counterexample_tau(x) - level;
    let rising_lo = (0..p)
        .rev()
        .find(|&i| table[i][2] < level)
        .ok_or_else(|| Error::WitnessNotFound("no crossing on the rising branch".into()))?;
    let x = bisect(shifted, table[rising_lo][0], table[rising_lo + 1][0]);
    let falling_lo = (p..v)
        .find(|&i| table[i + 1][2] < level)
        .ok_or_else(|| Error::WitnessNotFound("no crossing on the falling branch".into()))?;
    let x_prime = bisect(shifted, table[falling_lo][0], table[falling_lo + 1][0]);
    let (tau_x, tau_x_prime) = (counterexample_tau(x), counterexample_tau(x_prime));
    let witness = InjectivityWitness {
        x,
        x_prime,
        tau_x,
        tau_x_prime,
        gap: (tau_x - tau_x_prime).abs(),
    };
    if (x - x_prime).abs() <= 1e-3 || witness.gap > 1e-10 {
        return Err(Error::WitnessNotFound(format!(
            "bisection ended at x = {x}, x' = {x_prime}, gap {:e}",
            witness.gap
        )));
    }
    Ok(CounterexampleReport {
        grid,
        table,
        triple,
        witness,
    })
}

// ---------------------------------------------------------------------------
// Basins of attraction

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasinSummary {
    pub total_runs: usize,
    pub converged: usize,
    pub hit_max_iterations: usize,
    pub step_failures: usize,
    pub max_iterations_used: usize,
    pub cluster_centers: Vec<StrategyProfile>,
    pub cluster_counts: Vec<usize>,
    pub cluster_verdicts: Vec<Verdict>,
    /// Share of converged runs whose cluster classifies second-order
    /// stationary (0 when nothing converged).
    pub fraction_second_order: f64,
    /// Endpoints of the converged runs, in start order.
    #[serde(skip)]
    pub endpoints: Vec<StrategyProfile>,
}

/// Groups points greedily in lexicographic order: a point joins the first
/// cluster whose founding point is within `radius` in ∞-norm. Returns
/// (mean, count) pairs sorted lexicographically by mean.
pub fn cluster_points(points: &[StrategyProfile], radius: f64) -> Vec<(StrategyProfile, usize)> {
    let mut sorted: Vec<&StrategyProfile> = points.iter().collect();
    sorted.sort_by(|a, b| lex_cmp(a.values(), b.values()));
    let mut clusters: Vec<(&StrategyProfile, Vec<f64>, usize)> = Vec::new();
    for p in sorted {
        match clusters
            .iter_mut()
            .find(|(founder, _, _)| founder.max_abs_diff(p) <= radius)
        {
            Some((_, sum, count)) => {
                sum.iter_mut().zip(p.values()).for_each(|(s, v)| *s += v);
                *count += 1;
            }
            None => clusters.push((p, p.values().to_vec(), 1)),
        }
    }
    let mut out: Vec<(StrategyProfile, usize)> = clusters
        .into_iter()
        .map(|(founder, sum, count)| {
            let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
            (
                StrategyProfile::validate(&mean, founder.shape(), 1e-9).expect("mean of profiles"),
                count,
            )
        })
        .collect();
    out.sort_by(|a, b| lex_cmp(a.0.values(), b.0.values()));
    out
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

struct RunTally {
    total: usize,
    converged: Vec<StrategyProfile>,
    hit_max: usize,
    failures: usize,
    max_iter_used: usize,
}

fn summarize(tally: RunTally, obj: &(impl Objective + ?Sized), cluster_radius: f64, tols: &Tolerances) -> BasinSummary {
    let clusters = cluster_points(&tally.converged, cluster_radius);
    let mut centers = Vec::with_capacity(clusters.len());
    let mut counts = Vec::with_capacity(clusters.len());
    let mut verdicts = Vec::with_capacity(clusters.len());
    for (center, count) in clusters {
        // Convergence onto a face can be sublinear; coordinates still inside
        // the clustering radius are treated as zero before classifying.
        let snapped = clamp_to_support(&center, cluster_radius).unwrap_or(center);
        let verdict = classify(&snapped, obj, tols).map_or(Verdict::NonStationary, |c| c.verdict);
        centers.push(snapped);
        counts.push(count);
        verdicts.push(verdict);
    }
    let second: usize = counts
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| **v == Verdict::SecondOrderStationary)
        .map(|(c, _)| c)
        .sum();
    let converged = tally.converged.len();
    BasinSummary {
        total_runs: tally.total,
        converged,
        hit_max_iterations: tally.hit_max,
        step_failures: tally.failures,
        max_iterations_used: tally.max_iter_used,
        cluster_centers: centers,
        cluster_counts: counts,
        cluster_verdicts: verdicts,
        fraction_second_order: if converged == 0 {
            0.0
        } else {
            second as f64 / converged as f64
        },
        endpoints: tally.converged,
    }
}

/// MWU from `starts` seeded random interior points of `obj`'s domain.
pub fn basin(
    obj: &AnyObjective,
    eps: &StepSizes,
    starts: usize,
    seed: u64,
    opts: &RunOptions,
    cluster_radius: f64,
    tols: &Tolerances,
) -> Result<BasinSummary> {
    if starts < 1 {
        return Err(Error::InvalidConfig("starts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = RunTally {
        total: starts,
        converged: Vec::new(),
        hit_max: 0,
        failures: 0,
        max_iter_used: 0,
    };
    // only the final point is needed
    let opts = opts.clone().record_every(usize::MAX);
    for _ in 0..starts {
        let x0 = random_profile_with(obj.shape(), &mut rng);
        let traj = run(&x0, obj, eps, Method::Mwu, &opts);
        tally.max_iter_used = tally.max_iter_used.max(traj.iterations);
        match traj.status {
            RunStatus::Converged => tally.converged.push(traj.final_point().clone()),
            RunStatus::MaxIterations => tally.hit_max += 1,
            RunStatus::StepFailure => tally.failures += 1,
        }
    }
    Ok(summarize(tally, obj, cluster_radius, tols))
}

/// Outcome of iterating the demo map from one start.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DemoRun {
    Converged { x: f64, y: f64, iterations: usize },
    MaxIterations { x: f64, y: f64 },
    Failed { iteration: usize },
}

/// Iterates [`demo_step`] until a step moves by at most `tol` in ∞-norm.
pub fn demo_run(x0: f64, y0: f64, eps: f64, tol: f64, max_iter: usize) -> DemoRun {
    let (mut x, mut y) = (x0, y0);
    for t in 0..max_iter {
        let Ok((nx, ny)) = demo_step(x, y, eps) else {
            return DemoRun::Failed { iteration: t };
        };
        let gap = (nx - x).abs().max((ny - y).abs());
        (x, y) = (nx, ny);
        if gap <= tol {
            return DemoRun::Converged {
                x,
                y,
                iterations: t + 1,
            };
        }
    }
    DemoRun::MaxIterations { x, y }
}

/// Starts drawn uniformly from the open unit square.
pub fn demo_starts(starts: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut open = move || loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            break v;
        }
    };
    (0..starts).map(|_| (open(), open())).collect()
}

/// Basin experiment for the planar demo map; endpoints are lifted to
/// profiles and classified against the lifted trigonometric objective.
pub fn demo_basin(
    eps: f64,
    starts: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
    cluster_radius: f64,
    tols: &Tolerances,
) -> Result<BasinSummary> {
    if starts < 1 {
        return Err(Error::InvalidConfig("starts must be at least 1".into()));
    }
    let mut tally = RunTally {
        total: starts,
        converged: Vec::new(),
        hit_max: 0,
        failures: 0,
        max_iter_used: 0,
    };
    for (x0, y0) in demo_starts(starts, seed) {
        match demo_run(x0, y0, eps, tol, max_iter) {
            DemoRun::Converged { x, y, iterations } => {
                tally.max_iter_used = tally.max_iter_used.max(iterations);
                tally.converged.push(lift_demo_point(x, y)?);
            }
            DemoRun::MaxIterations { .. } => {
                tally.max_iter_used = max_iter;
                tally.hit_max += 1;
            }
            DemoRun::Failed { .. } => tally.failures += 1,
        }
    }
    Ok(summarize(tally, &trig_demo(), cluster_radius, tols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::mwu_step;

    #[test]
    fn eps_spec_parsing() {
        assert_eq!(EpsSpec::Text("auto".into()).values().unwrap(), None);
        assert_eq!(EpsSpec::Text("0.1, 0.2".into()).values().unwrap(), Some(vec![0.1, 0.2]));
        assert!(EpsSpec::Text("0.1,x".into()).values().is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"eps":[0.1,0.2],"starts":3}"#).unwrap();
        assert_eq!(cfg.eps, EpsSpec::List(vec![0.1, 0.2]));
        let cfg: RunConfig = serde_json::from_str(r#"{"eps":0.05}"#).unwrap();
        assert_eq!(cfg.eps.values().unwrap(), Some(vec![0.05]));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.starts = 0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        cfg.starts = 1;
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tol = 1e-9;
        cfg.max_iter = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn explicit_step_sizes_must_match_players() {
        let p = builtin("coord-2x2").unwrap();
        assert!(EpsSpec::Text("0.1,0.2,0.3".into()).resolve(&p, 0).is_err());
        let e = EpsSpec::Single(0.1).resolve(&p, 0).unwrap();
        assert_eq!(e.as_slice(), &[0.1, 0.1]);
    }

    #[test]
    fn demo_step_zero_drive() {
        let x = std::f64::consts::FRAC_PI_8; // sin(8x) = 0
        let (nx, _) = demo_step(x, 0.3, 0.05).unwrap();
        assert!((nx - x).abs() < 1e-15);
    }

    #[test]
    fn demo_step_matches_engine_on_lifted_objective() {
        let obj = trig_demo();
        let eps = StepSizes::uniform(2, 0.05).unwrap();
        for &(x, y) in &[(0.2, 0.7), (0.55, 0.1), (0.9, 0.45)] {
            let (nx, ny) = demo_step(x, y, 0.05).unwrap();
            let lifted = mwu_step(&lift_demo_point(x, y).unwrap(), &obj, &eps).unwrap();
            assert!((lifted.get(0, 0) - nx).abs() < 1e-14);
            assert!((lifted.get(1, 0) - ny).abs() < 1e-14);
        }
    }

    #[test]
    fn demo_step_rejects_large_steps() {
        assert!(matches!(
            demo_step(0.05, 0.25, 1.0),
            Err(Error::StepSizeTooLarge { .. })
        ));
    }

    #[test]
    fn vector_field_shape_and_inward_flow() {
        let rows = vector_field(50, 0.05).unwrap();
        assert_eq!(rows.len(), 2500);
        assert!(rows.iter().flatten().all(|v| v.is_finite()));
        let (mx, my) = DEMO_MAXIMIZERS[2];
        for (dx, dy) in [(0.02, 0.0), (-0.02, 0.0), (0.0, 0.02), (0.0, -0.02)] {
            let (x, y) = (mx + dx, my + dy);
            let (nx, ny) = demo_step(x, y, 0.05).unwrap();
            let before = (x - mx).hypot(y - my);
            assert!((nx - mx).hypot(ny - my) < before);
        }
        assert!(vector_field(1, 0.05).is_err());
    }

    #[test]
    fn counterexample_formula() {
        assert_eq!(counterexample_numerator(0.5), 0.52734375);
        assert!(counterexample_k(1e-9) < 1e-8);
        assert!((counterexample_tau(0.3) - counterexample_tau_via_objective(0.3).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn counterexample_witness() {
        let rep = counterexample(10_000).unwrap();
        assert_eq!(rep.table.len(), 10_000);
        let t = &rep.triple;
        assert!(t.a < t.b && t.b < t.c && t.k_a > t.k_b && t.k_b < t.k_c);
        let w = &rep.witness;
        assert!((w.x - w.x_prime).abs() > 1e-3);
        let again = (counterexample_tau_via_objective(w.x).unwrap()
            - counterexample_tau_via_objective(w.x_prime).unwrap())
        .abs();
        assert!(again <= 1e-9);
        assert!(counterexample(99).is_err());
    }

    #[test]
    fn clustering_is_order_independent() {
        let shape = DomainShape::new(1, 2).unwrap();
        let p = |a: f64| StrategyProfile::from_rows(&[[a, 1.0 - a]], shape, 1e-12).unwrap();
        let pts = vec![p(0.5), p(0.2), p(0.50001), p(0.2 + 5e-5)];
        let mut rev = pts.clone();
        rev.reverse();
        let a = cluster_points(&pts, 1e-4);
        assert_eq!(a, cluster_points(&rev, 1e-4));
        assert_eq!(a.iter().map(|c| c.1).collect::<Vec<_>>(), vec![2, 2]);
    }

    #[test]
    fn coordination_basin_hits_vertices() {
        let p = builtin("coord-2x2").unwrap();
        let eps = safe_stepsize(&p, p.shape(), 64, 0);
        let s = basin(
            &p,
            &eps,
            200,
            3,
            &RunOptions::new(1e-12, 100_000),
            1e-4,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(s.converged, 200);
        assert_eq!(s.cluster_counts.iter().sum::<usize>(), s.converged);
        assert_eq!(s.cluster_centers.len(), 2);
        for c in &s.cluster_centers {
            assert!(c.values().iter().all(|v| *v == 0.0 || *v == 1.0));
        }
        assert_eq!(s.fraction_second_order, 1.0);
    }

    #[test]
    fn linear_basin_single_vertex() {
        let p = AnyObjective::parse("2 1:1\n1 1:2\n").unwrap();
        let eps = StepSizes::uniform(1, 0.1).unwrap();
        let s = basin(
            &p,
            &eps,
            100,
            1,
            &RunOptions::new(1e-12, 100_000),
            1e-4,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(s.cluster_counts, vec![100]);
        assert_eq!(s.cluster_centers[0].values(), &[1.0, 0.0]);
    }
}
