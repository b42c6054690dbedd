//! Random objective generators and constructed fixed points shared by the
//! integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use simplex_mwu::objective::{AnyObjective, Monomial, Objective, RationalObjective, SparsePolynomial};
use simplex_mwu::simplex::{DomainShape, StrategyProfile};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn shape(n: usize, m: usize) -> DomainShape {
    DomainShape::new(n, m).unwrap()
}

/// N in 1..=3, M in 2..=4.
pub fn random_shape(rng: &mut ChaCha8Rng) -> DomainShape {
    shape(rng.random_range(1..=3), rng.random_range(2..=4))
}

fn random_exponents(rng: &mut ChaCha8Rng, shape: DomainShape, max_degree: u32) -> Vec<(usize, u32)> {
    let degree = rng.random_range(1..=max_degree);
    (0..degree).map(|_| (rng.random_range(0..shape.dim()), 1)).collect()
}

/// Nonnegative coefficients in (0, 2], a few monomials of degree 1..=max,
/// plus one linear term per player so every Baum–Eagon denominator is
/// positive on the interior.
pub fn random_nonneg_polynomial(rng: &mut ChaCha8Rng, shape: DomainShape, max_degree: u32) -> SparsePolynomial {
    let terms = rng.random_range(2..=8);
    let mut monomials: Vec<Monomial> = (0..terms)
        .map(|_| {
            let c = 2.0 * (1.0 - rng.random::<f64>());
            Monomial::new(c, random_exponents(rng, shape, max_degree))
        })
        .collect();
    for i in 0..shape.num_players {
        let j = rng.random_range(0..shape.num_strategies);
        monomials.push(Monomial::new(0.1, [(shape.index(i, j), 1)]));
    }
    SparsePolynomial::new(shape, monomials).unwrap()
}

/// Coefficients uniform in [-2, 2].
pub fn random_polynomial(rng: &mut ChaCha8Rng, shape: DomainShape, max_degree: u32) -> SparsePolynomial {
    let terms = rng.random_range(2..=8);
    let monomials: Vec<Monomial> = (0..terms)
        .map(|_| {
            let c = rng.random_range(-2.0..=2.0);
            Monomial::new(c, random_exponents(rng, shape, max_degree))
        })
        .collect();
    SparsePolynomial::new(shape, monomials).unwrap()
}

/// Signed numerator over a nonnegative denominator with constant term ≥ 1,
/// so the denominator is at least 1 on D.
pub fn random_rational(rng: &mut ChaCha8Rng, shape: DomainShape, max_degree: u32) -> RationalObjective {
    let num = random_polynomial(rng, shape, max_degree);
    let den = random_nonneg_polynomial(rng, shape, max_degree)
        .add(&SparsePolynomial::constant(shape, 1.0 + rng.random::<f64>()));
    RationalObjective::new(num, den).unwrap()
}

/// Interior profile with every coordinate at least `floor`.
pub fn interior_profile(rng: &mut ChaCha8Rng, shape: DomainShape, floor: f64) -> StrategyProfile {
    let mut values = Vec::with_capacity(shape.dim());
    for _ in 0..shape.num_players {
        let raw: Vec<f64> = (0..shape.num_strategies).map(|_| floor + rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        values.extend(raw.iter().map(|v| v / s));
    }
    StrategyProfile::validate(&values, shape, 1e-12).unwrap()
}

/// `P = Σ_i a_i Σ_j x_ij + ½ (x − c)ᵀ Q (x − c)` for symmetric `Q`: on D its
/// gradient at `c` is `a_i` across player `i`, so the interior point `c` is
/// a fixed point of MWU with nonzero player averages.
pub fn quadratic_with_fixed_point(
    c: &StrategyProfile,
    linear: &[f64],
    q: &[Vec<f64>],
) -> (AnyObjective, StrategyProfile) {
    let shape = c.shape();
    let n = shape.dim();
    let var = |k: usize| {
        let (i, j) = shape.split(k);
        SparsePolynomial::variable(shape, i, j)
    };
    let mut p = SparsePolynomial::zero(shape);
    for k in 0..n {
        let (i, _) = shape.split(k);
        p = p.add(&var(k).scale(linear[i]));
    }
    let shifted: Vec<SparsePolynomial> = (0..n)
        .map(|k| var(k).sub(&SparsePolynomial::constant(shape, c.values()[k])))
        .collect();
    for a in 0..n {
        for b in 0..n {
            if q[a][b] != 0.0 {
                p = p.add(&shifted[a].mul(&shifted[b]).scale(0.5 * q[a][b]));
            }
        }
    }
    (p.into(), c.clone())
}

/// The coordination potential's mixed equilibrium plus three constructed
/// interior fixed points of different shapes.
#[allow(clippy::needless_range_loop)]
pub fn interior_fixed_points() -> Vec<(String, AnyObjective, StrategyProfile)> {
    let mut out = Vec::new();
    let coord = simplex_mwu::objective::builtin("coord-2x2").unwrap();
    let mid = StrategyProfile::uniform(coord.shape());
    out.push(("coord-2x2 mixed".to_string(), coord, mid));

    let mut r = rng(11);
    for (k, (n, m)) in [(1usize, 3usize), (2, 3), (3, 2)].into_iter().enumerate() {
        let sh = shape(n, m);
        let c = interior_profile(&mut r, sh, 0.3);
        let linear: Vec<f64> = (0..n).map(|_| r.random_range(0.5..2.0)).collect();
        let dim = sh.dim();
        let mut q = vec![vec![0.0; dim]; dim];
        for a in 0..dim {
            for b in a..dim {
                let v = r.random_range(-1.0..1.0);
                q[a][b] = v;
                q[b][a] = v;
            }
        }
        let (obj, x) = quadratic_with_fixed_point(&c, &linear, &q);
        out.push((format!("constructed #{} ({sh})", k + 1), obj, x));
    }
    out
}
