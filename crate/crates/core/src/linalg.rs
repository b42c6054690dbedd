//! Small dense eigenvalue routines.
//!
//! Symmetric matrices use cyclic Jacobi rotations; general real matrices
//! are reduced to upper Hessenberg form with Householder reflections and
//! then iterated with the Francis double-shift QR algorithm (EISPACK
//! `orthes`/`hqr` lineage, values only).

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix in ascending order. Only the upper
/// triangle is trusted; the lower one is ignored.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = DMatrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] });
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                // below rounding of both diagonal entries: drop it
                if 1e2 * apq.abs() + a[(p, p)].abs() == a[(p, p)].abs()
                    && 1e2 * apq.abs() + a[(q, q)].abs() == a[(q, q)].abs()
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    Err(Error::NoConvergence { iterations: MAX_SWEEPS })
}

/// Reduces `a` in place to upper Hessenberg form by orthogonal similarity.
fn hessenberg_in_place(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
        for i in m + 1..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Upper Hessenberg form of `m` (similar to `m`).
pub fn hessenberg(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    h
}

/// All eigenvalues of a general real square matrix, sorted by decreasing
/// modulus (ties: larger real part, then larger imaginary part first).
///
/// Fails with [`Error::NoConvergence`] after `100·n²` QR sweeps.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let nn = m.nrows();
    assert_eq!(nn, m.ncols(), "matrix must be square");
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("matrix has non-finite entries".into()));
    }
    if nn == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m);
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let max_sweeps = 100 * nn * nn;
    let mut sweeps = 0usize;

    let eps = f64::EPSILON;
    let low: isize = 0;
    let mut n: isize = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let (mut s, mut z): (f64, f64);
    let (mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut iter = 0;
    macro_rules! at {
        ($i:expr, $j:expr) => {
            h[(($i) as usize, ($j) as usize)]
        };
    }

    while n >= low {
        // look for a single small sub-diagonal element
        let mut l = n;
        while l > low {
            s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at!(l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            at!(n, n) += exshift;
            d[n as usize] = at!(n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at!(n, n - 1) * at!(n - 1, n);
            p = (at!(n - 1, n - 1) - at!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            at!(n, n) += exshift;
            at!(n - 1, n - 1) += exshift;
            x = at!(n, n);
            let (i0, i1) = ((n - 1) as usize, n as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[i0] = x + z;
                d[i1] = d[i0];
                if z != 0.0 {
                    d[i1] = x - w / z;
                }
                e[i0] = 0.0;
                e[i1] = 0.0;
            } else {
                d[i0] = x + p;
                d[i1] = x + p;
                e[i0] = z;
                e[i1] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::NoConvergence { iterations: max_sweeps });
            }
            x = at!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = at!(n - 1, n - 1);
                w = at!(n, n - 1) * at!(n - 1, n);
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    at!(i, i) -= x;
                }
                s = at!(n, n - 1).abs() + at!(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        at!(i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // look for two consecutive small sub-diagonal elements
            let mut m = n - 2;
            while m >= l {
                z = at!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - r - s;
                r = at!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=n {
                at!(i, i - 2) = 0.0;
                if i > m + 2 {
                    at!(i, i - 3) = 0.0;
                }
            }

            // double QR step on rows l..n, columns m..n
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = if notlast { at!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        at!(k, k - 1) = -s * x;
                    } else if l != m {
                        at!(k, k - 1) = -at!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn as isize {
                        p = at!(k, j) + q * at!(k + 1, j);
                        if notlast {
                            p += r * at!(k + 2, j);
                            at!(k + 2, j) -= p * z;
                        }
                        at!(k, j) -= p * x;
                        at!(k + 1, j) -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * at!(i, k) + y * at!(i, k + 1);
                        if notlast {
                            p += z * at!(i, k + 2);
                            at!(i, k + 2) -= p * r;
                        }
                        at!(i, k) -= p;
                        at!(i, k + 1) -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    let mut out: Vec<Complex<f64>> = d.into_iter().zip(e).map(|(re, im)| Complex::new(re, im)).collect();
    sort_by_modulus(&mut out);
    Ok(out)
}

pub(crate) fn sort_by_modulus(v: &mut [Complex<f64>]) {
    v.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_rotation() {
        let ev = eigenvalues(&DMatrix::identity(5, 5)).unwrap();
        assert_eq!(ev.len(), 5);
        assert!(ev.iter().all(|z| (z.re - 1.0).abs() < 1e-15 && z.im == 0.0));

        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = eigenvalues(&rot).unwrap();
        assert!((ev[0] - Complex::new(0.0, 1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn triangular_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 5.0, -1.0, 0.0, -3.0, 4.0, 0.0, 0.0, 0.5]);
        let ev = eigenvalues(&m).unwrap();
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        assert!((re[0] + 3.0).abs() < 1e-14 && (re[1] - 2.0).abs() < 1e-14 && (re[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn companion_of_known_roots() {
        // (t - 1)(t - 2)(t - 3)(t^2 + 1) = t^5 - 6t^4 + 12t^3 - 12t^2 + 11t - 6
        let c = [-6.0, 11.0, -12.0, 12.0, -6.0];
        let n = 5;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if j == n - 1 {
                -c[i]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let ev = eigenvalues(&m).unwrap();
        let expected = [
            Complex::new(3.0, 0.0),
            Complex::new(2.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, -1.0),
        ];
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn hessenberg_preserves_spectrum_and_shape() {
        let m = DMatrix::from_fn(6, 6, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 0.5 } else { 0.0 }
        });
        let h = hessenberg(&m);
        for i in 0..6usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        assert!((h.trace() - m.trace()).abs() < 1e-12);
        assert!((determinant(&h) - determinant(&m)).abs() < 1e-9 * determinant(&m).abs().max(1.0));
    }

    #[test]
    fn jacobi_known_spectrum() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let ev = symmetric_eigenvalues(&m).unwrap();
        let s2 = 2f64.sqrt();
        let expected = [2.0 - s2, 2.0, 2.0 + s2];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(symmetric_eigenvalues(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(eigenvalues(&m).is_err());
    }

    #[test]
    fn determinant_small() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 1.0]);
        assert!((determinant(&m) + 6.0).abs() < 1e-15);
    }
}
