//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit QL iteration with Wilkinson-style shifts.
//!
//! Eigenvalues only for dense input; for tridiagonal input the first row of
//! the eigenvector matrix can be accumulated alongside, which is exactly
//! what Lanczos quadrature needs for Ritz weights.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_QL_ITER: usize = 50;

/// All eigenvalues of a dense symmetric matrix, ascending.
///
/// The input must be square and symmetric to roundoff; it is symmetrized
/// as `(A + A^T) / 2` before reduction.
pub fn symmetric_eigenvalues<F: Real>(a: &[Vec<F>]) -> Result<Vec<F>> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut scale = F::zero();
    let mut max_dev = F::zero();
    for i in 0..n {
        if a[i].len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: a[i].len(),
            });
        }
        for j in 0..n {
            scale = scale.max(a[i][j].abs());
            max_dev = max_dev.max((a[i][j] - a[j][i]).abs());
        }
    }
    let tol = F::of(1e-10) * scale.max(F::one());
    if max_dev > tol {
        return Err(Error::NotSymmetric {
            max_dev: max_dev.to_f64_lossy(),
        });
    }
    let half = F::of(0.5);
    let mut m: Vec<Vec<F>> = (0..n)
        .map(|i| (0..n).map(|j| (a[i][j] + a[j][i]) * half).collect())
        .collect();
    let (mut d, e) = householder_tridiagonal(&mut m);
    // householder stores the coupling of (i-1, i) at e[i]; QL wants it at i-1
    let mut off: Vec<F> = e[1..].to_vec();
    ql_implicit(&mut d, &mut off, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Eigenvalues (ascending) and squared first-row eigenvector components of a
/// symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() = diag.len() - 1`).
///
/// The squared first components are the Ritz weights of Lanczos quadrature;
/// they sum to one.
pub fn tridiagonal_eigen_weights<F: Real>(diag: &[F], off: &[F]) -> Result<Vec<(F, F)>> {
    let n = diag.len();
    assert!(n > 0, "empty tridiagonal matrix");
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n-1");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    let mut row = vec![F::zero(); n];
    row[0] = F::one();
    ql_implicit(&mut d, &mut e, Some(&mut row))?;
    let mut pairs: Vec<(F, F)> = d.into_iter().zip(row.into_iter().map(|r| r * r)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(pairs)
}

/// Householder reduction of a dense symmetric matrix to tridiagonal form,
/// eigenvalues-only variant. Destroys the input matrix.
fn householder_tridiagonal<F: Real>(a: &mut [Vec<F>]) -> (Vec<F>, Vec<F>) {
    let n = a.len();
    let mut d = vec![F::zero(); n];
    let mut e = vec![F::zero(); n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = F::zero();
        if l > 0 {
            let mut sc = F::zero();
            for k in 0..=l {
                sc += a[i][k].abs();
            }
            if sc == F::zero() {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= sc;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= F::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = sc * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut fsum = F::zero();
                for j in 0..=l {
                    let mut g2 = F::zero();
                    for k in 0..=j {
                        g2 += a[j][k] * a[i][k];
                    }
                    for k in (j + 1)..=l {
                        g2 += a[k][j] * a[i][k];
                    }
                    e[j] = g2 / h;
                    fsum += e[j] * a[i][j];
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let f2 = a[i][j];
                    let g2 = e[j] - hh * f2;
                    e[j] = g2;
                    for k in 0..=j {
                        let delta = f2 * e[k] + g2 * a[i][k];
                        a[j][k] -= delta;
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    e[0] = F::zero();
    for i in 0..n {
        d[i] = a[i][i];
    }
    (d, e)
}

/// Implicit QL with shifts on a tridiagonal matrix. `e` is the off-diagonal
/// stored in `e[0..n-1]`; if `row` is given, the first row of the eigenvector
/// matrix is accumulated through the rotations.
fn ql_implicit<F: Real>(d: &mut [F], e_off: &mut [F], mut row: Option<&mut [F]>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    // shift the off-diagonal into NR's e[l] = subdiagonal below l convention
    let mut e = vec![F::zero(); n];
    e[..n - 1].copy_from_slice(&e_off[..n - 1]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find the first negligible off-diagonal at or after l
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= F::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::Eigen(format!(
                    "QL did not converge after {MAX_QL_ITER} iterations"
                )));
            }
            let two = F::of(2.0);
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(F::one());
            let sign_r = if g >= F::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = F::one();
            let mut c = F::one();
            let mut p = F::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == F::zero() {
                    d[i + 1] -= p;
                    e[m] = F::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + two * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                if let Some(z) = row.as_deref_mut() {
                    let f2 = z[i + 1];
                    z[i + 1] = s * z[i] + c * f2;
                    z[i] = c * z[i] - s * f2;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = F::zero();
        }
    }
    e_off[..n - 1].copy_from_slice(&e[..n - 1]);
    Ok(())
}
