//! Dense real nonsymmetric eigenvalue computation: Parlett-Reinsch
//! balancing, Householder reduction to upper Hessenberg form, and Francis
//! double-shift QR iteration with deflation. Eigenvalues only; no Schur
//! vectors are accumulated.

// Indexed loops mirror the row/column sweeps of the algorithm.
#![allow(clippy::needless_range_loop)]

use nalgebra::Complex;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenvalueError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge within {0} iterations for one eigenvalue")]
    NoConvergence(usize),
}

/// Row-major square matrix working storage.
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn from_slice(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, a: data.to_vec() }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

/// Eigenvalues of a real `n x n` matrix given in row-major order, sorted by
/// real part, then imaginary part. Complex eigenvalues come out in exact
/// conjugate pairs because both members of a pair are extracted from the
/// same 2x2 block.
pub fn eigenvalues(n: usize, data: &[f64]) -> Result<Vec<Complex<f64>>, EigenvalueError> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(EigenvalueError::NonFinite);
    }
    let mut m = Dense::from_slice(n, data);
    if n == 0 {
        return Ok(Vec::new());
    }
    balance(&mut m);
    hessenberg(&mut m);
    let mut eig = hqr(&mut m)?;
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

/// Iterative row/column scaling by powers of the radix so that row and
/// column norms match; a similarity transform, so eigenvalues are unchanged
/// while their computed accuracy improves for badly scaled input.
fn balance(m: &mut Dense) {
    const RADIX: f64 = 2.0;
    let n = m.n;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m.at(j, i).abs();
                    r += m.at(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut f = 1.0;
                let mut c_scaled = c;
                let s = c + r;
                let mut g = r / RADIX;
                while c_scaled < g {
                    f *= RADIX;
                    c_scaled *= RADIX * RADIX;
                }
                g = r * RADIX;
                while c_scaled > g {
                    f /= RADIX;
                    c_scaled /= RADIX * RADIX;
                }
                if (c_scaled + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        *m.at_mut(i, j) *= g;
                    }
                    for j in 0..n {
                        *m.at_mut(j, i) *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Householder similarity reduction to upper Hessenberg form. Entries below
/// the first subdiagonal are zeroed explicitly.
fn hessenberg(m: &mut Dense) {
    let n = m.n;
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for col in 1..n - 1 {
        // Annihilate column col-1 below row col.
        let mut scale = 0.0;
        for i in col..n {
            scale += m.at(i, col - 1).abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (col..n).rev() {
            ort[i] = m.at(i, col - 1) / scale;
            h += ort[i] * ort[i];
        }
        let g = if ort[col] > 0.0 { -h.sqrt() } else { h.sqrt() };
        h -= ort[col] * g;
        ort[col] -= g;

        // Apply P = I - (u u^T)/h from the left, then from the right.
        for j in col..n {
            let mut f = 0.0;
            for i in (col..n).rev() {
                f += ort[i] * m.at(i, j);
            }
            f /= h;
            for i in col..n {
                *m.at_mut(i, j) -= f * ort[i];
            }
        }
        for i in 0..n {
            let mut f = 0.0;
            for j in (col..n).rev() {
                f += ort[j] * m.at(i, j);
            }
            f /= h;
            for j in col..n {
                *m.at_mut(i, j) -= f * ort[j];
            }
        }
        *m.at_mut(col, col - 1) = scale * g;
        for i in col + 1..n {
            *m.at_mut(i, col - 1) = 0.0;
        }
    }
}

/// |a| carrying the sign of b.
#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR iteration with deflation on an upper Hessenberg
/// matrix. Fails explicitly instead of returning garbage when an eigenvalue
/// refuses to converge.
fn hqr(m: &mut Dense) -> Result<Vec<Complex<f64>>, EigenvalueError> {
    let n = m.n as isize;
    let max_its = 30 * m.n;
    let eps = f64::EPSILON;
    let at = |m: &Dense, i: isize, j: isize| m.at(i as usize, j as usize);

    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(m, i, j).abs();
        }
    }

    let mut eig = Vec::with_capacity(m.n);
    let mut nn = n - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            // Look for a single small subdiagonal element to split the matrix.
            let mut l = nn;
            while l >= 1 {
                let mut s = at(m, l - 1, l - 1).abs() + at(m, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(m, l, l - 1).abs() <= eps * s {
                    *m.at_mut(l as usize, (l - 1) as usize) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(m, nn, nn);
            if l == nn {
                // One real root found.
                eig.push(Complex::new(x + t, 0.0));
                nn -= 1;
                break;
            }
            let mut y = at(m, nn - 1, nn - 1);
            let mut w = at(m, nn, nn - 1) * at(m, nn - 1, nn);
            if l == nn - 1 {
                // A 2x2 block has decoupled: two roots, real or a conjugate pair.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    eig.push(Complex::new(x + z, 0.0));
                    eig.push(Complex::new(if z != 0.0 { x - w / z } else { x + z }, 0.0));
                } else {
                    eig.push(Complex::new(x + p, z));
                    eig.push(Complex::new(x + p, -z));
                }
                nn -= 2;
                break;
            }
            if its == max_its {
                return Err(EigenvalueError::NoConvergence(max_its));
            }
            if its > 0 && its.is_multiple_of(10) {
                // Exceptional shift to break repetition cycles.
                t += x;
                for i in 0..=nn {
                    *m.at_mut(i as usize, i as usize) -= x;
                }
                let s = at(m, nn, nn - 1).abs() + at(m, nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Find two consecutive small subdiagonals where the implicit
            // double shift can start.
            let mut mm = nn - 2;
            let mut p = 0.0;
            let mut q = 0.0;
            let mut r = 0.0;
            while mm >= l {
                let z = at(m, mm, mm);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at(m, mm + 1, mm) + at(m, mm, mm + 1);
                q = at(m, mm + 1, mm + 1) - z - rr - ss;
                r = at(m, mm + 2, mm + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = at(m, mm, mm - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at(m, mm - 1, mm - 1).abs() + z.abs() + at(m, mm + 1, mm + 1).abs());
                if u <= eps * v {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nn {
                *m.at_mut(i as usize, (i - 2) as usize) = 0.0;
                if i != mm + 2 {
                    *m.at_mut(i as usize, (i - 3) as usize) = 0.0;
                }
            }

            // Double QR sweep on rows/columns l..=nn.
            for k in mm..=nn - 1 {
                if k != mm {
                    p = at(m, k, k - 1);
                    q = at(m, k + 1, k - 1);
                    r = if k != nn - 1 { at(m, k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == mm {
                    if l != mm {
                        *m.at_mut(k as usize, (k - 1) as usize) = -at(m, k, k - 1);
                    }
                } else {
                    *m.at_mut(k as usize, (k - 1) as usize) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pj = at(m, k, j) + q * at(m, k + 1, j);
                    if k != nn - 1 {
                        pj += r * at(m, k + 2, j);
                        *m.at_mut((k + 2) as usize, j as usize) -= pj * z;
                    }
                    *m.at_mut((k + 1) as usize, j as usize) -= pj * y;
                    *m.at_mut(k as usize, j as usize) -= pj * x;
                }
                let last = nn.min(k + 3);
                for i in l..=last {
                    let mut pi = x * at(m, i, k) + y * at(m, i, k + 1);
                    if k != nn - 1 {
                        pi += z * at(m, i, k + 2);
                        *m.at_mut(i as usize, (k + 2) as usize) -= pi * r;
                    }
                    *m.at_mut(i as usize, (k + 1) as usize) -= pi * q;
                    *m.at_mut(i as usize, k as usize) -= pi;
                }
            }
        }
    }
    Ok(eig)
}
