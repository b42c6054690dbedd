//! Nonsymmetric eigenvalues checked against an independent route: the
//! characteristic polynomial (Faddeev–LeVerrier) solved by Durand–Kerner.

mod common;

use common::rng;
use nalgebra::{Complex, DMatrix};
use rand::Rng;

use simplex_mwu::linalg::{eigenvalues, hessenberg};

/// Monic characteristic polynomial coefficients, highest degree first.
fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c;
        c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn durand_kerner(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex<f64>| coeffs.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        let moved = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

/// Greedy matching distance between two multisets of complex numbers.
fn matching_error(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let mut pool = b.to_vec();
    let mut worst = 0.0f64;
    for z in a {
        let (idx, d) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(idx);
    }
    worst
}

#[test]
fn random_matrices_agree_with_characteristic_roots() {
    let mut r = rng(2024);
    for _ in 0..50 {
        let a = DMatrix::from_fn(6, 6, |_, _| r.random_range(-1.0..1.0));
        let ours = eigenvalues(&a).unwrap();
        let roots = durand_kerner(&characteristic_polynomial(&a));
        assert!(matching_error(&ours, &roots) < 1e-6, "{a}");
        // sorted by decreasing modulus
        assert!(ours.windows(2).all(|w| w[0].norm() >= w[1].norm() - 1e-12));
        // trace and determinant identities
        let sum: Complex<f64> = ours.iter().sum();
        assert!((sum.re - a.trace()).abs() < 1e-9 && sum.im.abs() < 1e-9);
        let prod = ours.iter().fold(Complex::new(1.0, 0.0), |acc, z| acc * z);
        assert!((prod.re - a.determinant()).abs() < 1e-9);
    }
}

#[test]
fn hessenberg_form_keeps_the_spectrum() {
    let mut r = rng(7);
    let a = DMatrix::from_fn(7, 7, |_, _| r.random_range(-2.0..2.0));
    let h = hessenberg(&a);
    for i in 2..7 {
        for j in 0..i - 1 {
            assert!(h[(i, j)].abs() < 1e-12);
        }
    }
    let ea = eigenvalues(&a).unwrap();
    let eh = eigenvalues(&h).unwrap();
    assert!(matching_error(&ea, &eh) < 1e-9);
}

proptest::proptest! {
    #[test]
    fn spectrum_reproduces_trace_and_determinant(seed in proptest::prelude::any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let a = DMatrix::from_fn(n, n, |_, _| r.random_range(-3.0..3.0));
        let ev = eigenvalues(&a).unwrap();
        proptest::prop_assert_eq!(ev.len(), n);
        let sum: Complex<f64> = ev.iter().sum();
        proptest::prop_assert!((sum.re - a.trace()).abs() < 1e-8 && sum.im.abs() < 1e-8);
        let prod = ev.iter().fold(Complex::new(1.0, 0.0), |acc, z| acc * z);
        let det = a.determinant();
        proptest::prop_assert!((prod.re - det).abs() < 1e-8 * det.abs().max(1.0));
    }
}
